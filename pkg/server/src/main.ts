import { listen } from "./server.js";

function parsePort(argv: string[]): number {
  const index = argv.indexOf("--port");
  if (index >= 0 && argv[index + 1] !== undefined) {
    const port = Number(argv[index + 1]);
    if (!Number.isInteger(port) || port < 0 || port > 65535) {
      console.error(`invalid port: ${argv[index + 1]}`);
      process.exit(1);
    }
    return port;
  }
  return 8077;
}

const requested = parsePort(process.argv.slice(2));
listen(requested)
  .then(({ port }) => {
    console.log(`model server listening on http://127.0.0.1:${port}`);
  })
  .catch((error) => {
    console.error(`failed to start: ${error}`);
    process.exit(1);
  });
