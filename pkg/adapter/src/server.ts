/**
 * Request handling for the newline-delimited JSON reader protocol:
 *   {"op":"train","dataset_path":...,"config":{...}} -> {"ok":true,"model_id":...}
 *   {"op":"predict","model_id":...,"items":[...]}    -> {"ok":true,"results":[...]}
 * Failures answer {"ok":false,"error":...} and the loop continues.
 */

import { Canon, canonicalJson, jf, Raw } from "./canon.js";
import { loadSquad } from "./squad.js";
import {
  configFromWire,
  modelId,
  predictToy,
  ToyModel,
  trainToy,
  WindowPayload,
} from "./toy.js";

export type Registry = Map<string, ToyModel>;

function error(message: string): string {
  return canonicalJson({ ok: false, error: message });
}

function windowsToCanon(windows: WindowPayload[]): Canon {
  return {
    windows: windows.map((w) => ({
      token_offsets: w.token_offsets.map(([s, e]) => [s, e] as Canon[]),
      start_probs: w.start_probs.map(jf) as Raw[],
      end_probs: w.end_probs.map(jf) as Raw[],
    })),
  };
}

export function handleLine(line: string, registry: Registry): string {
  let request: Record<string, unknown>;
  try {
    request = JSON.parse(line);
    if (typeof request !== "object" || request === null) throw new Error("not an object");
  } catch {
    return error("invalid request JSON");
  }
  const op = request.op;
  if (op === "train") {
    const rawConfig = (request.config ?? {}) as Record<string, unknown>;
    const config = configFromWire(rawConfig);
    const language = String(rawConfig.language ?? "en");
    let dataset;
    try {
      dataset = loadSquad(String(request.dataset_path));
    } catch {
      return error("cannot read dataset");
    }
    const model = trainToy(dataset, config, language);
    const id = modelId(model);
    registry.set(id, model);
    return canonicalJson({ ok: true, model_id: id });
  }
  if (op === "predict") {
    const id = String(request.model_id);
    const model = registry.get(id);
    if (model === undefined) {
      return error(`unknown model_id: ${id}`);
    }
    const items = (request.items ?? []) as Array<Record<string, unknown>>;
    const results: Canon[] = [];
    for (const item of items) {
      const language = String(item.language ?? model.language);
      results.push(
        windowsToCanon(predictToy(model, String(item.context), String(item.question), language)),
      );
    }
    return canonicalJson({ ok: true, results });
  }
  return error("unsupported op");
}
