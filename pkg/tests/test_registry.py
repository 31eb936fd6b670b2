import json

import pytest

from vurf.registry import (
    FunctionSignature,
    Param,
    Registry,
    RegistryConflictError,
    RegistryFormatError,
    SemType,
    builtin_catalog,
    load_extension,
    merge,
    registry_from_json,
    registry_to_json,
    unify,
    usage_block,
)


def _sig(name, returns=SemType.TEXT, params=()):
    return FunctionSignature(name, tuple(params), returns, f"{name.lower()} stub")


def test_catalog_has_twelve_functions(registry):
    assert len(registry) == 12


def test_catalog_covers_every_function_named_in_worked_examples(registry):
    for name in ("GROUNDING", "TRIMAFTER", "VQA", "MERGE", "CROP", "TRIM", "BGBLUR", "COLORPOP"):
        assert registry.lookup(name) is not None


def test_trimafter_signature(registry):
    sig = registry.lookup("TRIMAFTER")
    assert [(p.name, p.type) for p in sig.params] == [
        ("video", SemType.VIDEO),
        ("interval", SemType.INTERVAL),
    ]
    assert sig.returns == SemType.VIDEO


def test_unknown_name_is_absent(registry):
    assert registry.lookup("FOOBAR") is None
    assert "FOOBAR" not in registry


def test_unify_any_with_everything():
    for t in SemType:
        assert unify(SemType.ANY, t)
        assert unify(t, SemType.ANY)
    assert unify(SemType.VIDEO, SemType.VIDEO)
    assert not unify(SemType.VIDEO, SemType.TEXT)


def test_merge_adds_extension(registry):
    ext = Registry([_sig("FALLDETECT", SemType.TEXT, [Param("video", SemType.VIDEO)])])
    merged = merge(registry, ext)
    assert len(merged) == 13
    assert merged.lookup("FALLDETECT") is not None


def test_merge_is_idempotent(registry):
    merged = merge(registry, registry)
    assert merged.names() == registry.names()
    assert merged.signatures() == registry.signatures()


def test_merge_conflict_names_the_function(registry):
    clash = Registry([_sig("VQA", SemType.NUMBER, [Param("video", SemType.VIDEO)])])
    with pytest.raises(RegistryConflictError) as info:
        merge(registry, clash)
    assert info.value.name == "VQA"


def test_merge_identity_and_associativity(registry):
    empty = Registry()
    a = Registry([_sig("A")])
    b = Registry([_sig("B")])
    assert merge(registry, empty).names() == registry.names()
    assert merge(empty, registry).names() == registry.names()
    left = merge(merge(a, b), registry)
    right = merge(a, merge(b, registry))
    assert left.names() == right.names()
    assert left.signatures() == right.signatures()


def test_usage_block_sorted_and_sized(registry):
    block = usage_block(registry)
    lines = block.splitlines()
    assert len(lines) == 12
    assert lines[0].startswith("BGBLUR(")
    assert lines == sorted(lines)
    assert usage_block(registry) == block  # byte-identical across calls


def test_usage_block_empty_registry():
    assert usage_block(Registry()) == ""


def test_usage_block_of_merged_registry_has_thirteen_lines(registry):
    ext = Registry([_sig("FALLDETECT", SemType.TEXT, [Param("video", SemType.VIDEO)])])
    assert len(usage_block(merge(registry, ext)).splitlines()) == 13


def test_registry_json_round_trip(registry):
    data = registry_to_json(registry)
    rebuilt = registry_from_json(data)
    assert rebuilt.signatures() == registry.signatures()


def test_load_extension_file(tmp_path, registry):
    path = tmp_path / "ext.json"
    path.write_text(
        json.dumps(
            {
                "functions": [
                    {
                        "name": "FALLDETECT",
                        "params": [{"name": "video", "type": "Video", "required": True}],
                        "returns": "Text",
                        "usage": "detect falls",
                    }
                ]
            }
        )
    )
    ext = load_extension(path)
    assert merge(registry, ext).lookup("FALLDETECT").usage == "detect falls"


@pytest.mark.parametrize(
    "payload",
    [
        "not an object",
        {"functions": [{"name": "X"}]},
        {"functions": [{"name": "X", "params": [], "returns": "NoSuchType", "usage": "u"}]},
        {"functions": [{"name": "X", "params": [], "returns": "Text", "usage": ""}]},
    ],
)
def test_bad_extension_schemas_rejected(tmp_path, payload):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(payload))
    with pytest.raises(RegistryFormatError):
        load_extension(path)


def test_signature_rejects_duplicate_params():
    with pytest.raises(ValueError):
        FunctionSignature(
            "X",
            (Param("a", SemType.TEXT), Param("a", SemType.TEXT)),
            SemType.TEXT,
            "dup",
        )
