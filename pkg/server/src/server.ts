/**
 * HTTP server implementing the remote-backend protocol:
 *
 *   GET  /health    -> {"status": "ok"}
 *   GET  /functions -> {"functions": [...]} (registry-extension schema)
 *   POST /invoke    -> {"ok": true, "value": TypedValue, "request_id": ...}
 *                    | {"ok": false, "error": {"kind", "message"}, "request_id": ...}
 *
 * Application errors always travel as ok:false with HTTP 200; non-200
 * responses are reserved for transport-level problems (bad route, bad JSON).
 */

import http from "node:http";

import { HANDLERS, MANIFEST, StubError } from "./stubs.js";
import { isTypedValue, TypedValue } from "./values.js";

interface InvokeRequest {
  function: string;
  args: Record<string, TypedValue>;
  request_id?: string;
}

interface InvokeOk {
  ok: true;
  value: TypedValue;
  request_id?: string;
}

interface InvokeFail {
  ok: false;
  error: { kind: string; message: string };
  request_id?: string;
}

export function invoke(request: InvokeRequest): InvokeOk | InvokeFail {
  const fail = (kind: string, message: string): InvokeFail => ({
    ok: false,
    error: { kind, message },
    request_id: request.request_id,
  });

  const manifestEntry = MANIFEST.find((fn) => fn.name === request.function);
  const handler = HANDLERS[request.function];
  if (!manifestEntry || !handler) {
    return fail("UnknownFunction", `no such function '${request.function}'`);
  }
  if (typeof request.args !== "object" || request.args === null || Array.isArray(request.args)) {
    return fail("BadArgs", "args must be an object of typed values");
  }
  for (const [name, value] of Object.entries(request.args)) {
    if (!isTypedValue(value)) {
      return fail("BadArgs", `argument '${name}' is not a typed value`);
    }
    const param = manifestEntry.params.find((p) => p.name === name);
    if (!param) {
      return fail("BadArgs", `function '${request.function}' has no parameter '${name}'`);
    }
    if (param.type !== "Any" && value.type !== param.type) {
      return fail("BadArgs", `argument '${name}' must be ${param.type}, got ${value.type}`);
    }
  }
  for (const param of manifestEntry.params) {
    if (param.required && !(param.name in request.args)) {
      return fail("BadArgs", `missing required parameter '${param.name}'`);
    }
  }

  try {
    const value = handler(request.args);
    return { ok: true, value, request_id: request.request_id };
  } catch (error) {
    if (error instanceof StubError) {
      return fail(error.kind, error.message);
    }
    return fail("Internal", String(error));
  }
}

function sendJson(res: http.ServerResponse, status: number, body: unknown): void {
  const text = JSON.stringify(body);
  res.writeHead(status, {
    "Content-Type": "application/json",
    "Content-Length": Buffer.byteLength(text),
  });
  res.end(text);
}

function readBody(req: http.IncomingMessage): Promise<string> {
  return new Promise((resolve, reject) => {
    const chunks: Buffer[] = [];
    req.on("data", (chunk) => chunks.push(chunk));
    req.on("end", () => resolve(Buffer.concat(chunks).toString("utf-8")));
    req.on("error", reject);
  });
}

export function createServer(): http.Server {
  return http.createServer(async (req, res) => {
    const url = req.url ?? "/";

    if (req.method === "GET" && url === "/health") {
      sendJson(res, 200, { status: "ok" });
      return;
    }
    if (req.method === "GET" && url === "/functions") {
      sendJson(res, 200, { functions: MANIFEST });
      return;
    }
    if (req.method === "POST" && url === "/invoke") {
      let parsed: unknown;
      try {
        parsed = JSON.parse(await readBody(req));
      } catch {
        sendJson(res, 400, { error: "request body is not valid JSON" });
        return;
      }
      if (
        typeof parsed !== "object" ||
        parsed === null ||
        typeof (parsed as InvokeRequest).function !== "string"
      ) {
        sendJson(res, 400, { error: "body must be {function, args, request_id}" });
        return;
      }
      sendJson(res, 200, invoke(parsed as InvokeRequest));
      return;
    }

    sendJson(res, 404, { error: `no route for ${req.method} ${url}` });
  });
}

export function listen(port: number): Promise<{ server: http.Server; port: number }> {
  const server = createServer();
  return new Promise((resolve, reject) => {
    server.once("error", reject);
    server.listen(port, "127.0.0.1", () => {
      const address = server.address();
      const boundPort = typeof address === "object" && address !== null ? address.port : port;
      resolve({ server, port: boundPort });
    });
  });
}
