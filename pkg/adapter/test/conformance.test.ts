import { spawn } from "node:child_process";
import { existsSync, readFileSync } from "node:fs";
import { createInterface } from "node:readline";
import { fileURLToPath } from "node:url";
import { dirname, join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { handleLine, Registry } from "../src/server.js";

const ROOT = join(dirname(fileURLToPath(import.meta.url)), "..");
const TRANSCRIPT = join(ROOT, "fixtures", "transcript.jsonl");

interface Exchange {
  request: string;
  response: string;
}

function loadTranscript(): Exchange[] {
  return readFileSync(TRANSCRIPT, "utf8")
    .split("\n")
    .filter((l) => l.trim())
    .map((l) => JSON.parse(l));
}

describe("in-process transcript replay", () => {
  it("answers every recorded request with the recorded bytes", () => {
    const registry: Registry = new Map();
    for (const { request, response } of loadTranscript()) {
      expect(handleLine(request, registry)).toBe(response);
    }
  });
});

describe("spawned adapter transcript replay", () => {
  const mainJs = join(ROOT, "dist", "main.js");
  let child: ReturnType<typeof spawn>;
  let lines: AsyncIterator<string>;

  beforeAll(() => {
    expect(existsSync(mainJs), "run tsc before the conformance test").toBe(true);
    child = spawn(process.execPath, [mainJs], { cwd: ROOT, stdio: ["pipe", "pipe", "inherit"] });
    const rl = createInterface({ input: child.stdout!, crlfDelay: Infinity });
    lines = rl[Symbol.asyncIterator]();
  });

  afterAll(() => {
    child.stdin!.end();
  });

  it("replays bit-identically over stdio", async () => {
    for (const { request, response } of loadTranscript()) {
      child.stdin!.write(request + "\n");
      const got = await lines.next();
      expect(got.done).toBe(false);
      expect(got.value).toBe(response);
    }
  }, 30000);
});
