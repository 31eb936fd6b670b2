import pytest

from vurf.gateway import ProviderConfig
from vurf.registry import builtin_catalog
from vurf.synthetic import golden_descriptor, golden_examples, golden_script
from vurf.world import WorldStore


@pytest.fixture
def registry():
    return builtin_catalog()


@pytest.fixture
def golden_world():
    descriptor = golden_descriptor()
    return descriptor, WorldStore([descriptor])


@pytest.fixture
def golden_config():
    return ProviderConfig(kind="scripted", script=golden_script())


@pytest.fixture
def golden_icl():
    return golden_examples()
