/**
 * Entry point: serve the reader protocol over stdio (default) or TCP.
 *   node dist/main.js            # stdio, exits cleanly at end-of-input
 *   node dist/main.js --tcp 9090 # listen on a port, one session per connection
 */

import { createInterface } from "node:readline";
import { createServer } from "node:net";

import { handleLine, Registry } from "./server.js";

function serveStdio(): void {
  const registry: Registry = new Map();
  const rl = createInterface({ input: process.stdin, crlfDelay: Infinity });
  rl.on("line", (line) => {
    if (line.trim() === "") return;
    process.stdout.write(handleLine(line, registry) + "\n");
  });
  rl.on("close", () => process.exit(0));
}

function serveTcp(port: number): void {
  const server = createServer((socket) => {
    const registry: Registry = new Map();
    const rl = createInterface({ input: socket, crlfDelay: Infinity });
    rl.on("line", (line) => {
      if (line.trim() === "") return;
      socket.write(handleLine(line, registry) + "\n");
    });
    socket.on("error", () => socket.destroy());
  });
  server.listen(port, () => {
    const addr = server.address();
    const bound = typeof addr === "object" && addr !== null ? addr.port : port;
    process.stderr.write(`reader adapter listening on :${bound}\n`);
  });
}

const args = process.argv.slice(2);
const tcpIndex = args.indexOf("--tcp");
if (tcpIndex >= 0) {
  const port = Number(args[tcpIndex + 1]);
  if (!Number.isInteger(port) || port < 0) {
    // port 0 asks the OS for an ephemeral port; the bound one is announced
    process.stderr.write("usage: main.js [--tcp PORT]\n");
    process.exit(1);
  }
  serveTcp(port);
} else {
  serveStdio();
}
