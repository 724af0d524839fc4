/**
 * Toy span reader mirrored operation-for-operation from the pipeline: the
 * linear feature scorer, softmax distributions, sliding windows, and the
 * per-gold-answer SGD loop in identical update order. A trained model here
 * must serialize to the exact bytes the reference produces.
 */

import { canonicalJson, jf, sha256Hex } from "./canon.js";
import { SplitMix64, softmax } from "./numerics.js";
import { SquadDataset } from "./squad.js";
import { tokenize } from "./text.js";

export interface TrainConfig {
  epochs: number;
  batch_size: number;
  learning_rate: number;
  seed: number;
  max_context_tokens: number;
  max_question_tokens: number;
  doc_stride: number;
}

export interface ToyModel {
  wStart: number[];
  wEnd: number[];
  config: TrainConfig;
  language: string;
}

export interface WindowPayload {
  token_offsets: Array<[number, number]>;
  start_probs: number[];
  end_probs: number[];
}

const FEATURE_DIM = 4;

export function configFromWire(raw: Record<string, unknown>): TrainConfig {
  return {
    epochs: Number(raw.epochs ?? 3),
    batch_size: Number(raw.batch_size ?? 32),
    learning_rate: Number(raw.learning_rate ?? 5e-5),
    seed: Number(raw.seed ?? 42),
    max_context_tokens: Number(raw.max_context_tokens ?? 384),
    max_question_tokens: Number(raw.max_question_tokens ?? 64),
    doc_stride: Number(raw.doc_stride ?? 128),
  };
}

export function windowStarts(nTokens: number, maxContext: number, stride: number): number[] {
  if (nTokens <= maxContext) return [0];
  const starts: number[] = [];
  let s = 0;
  for (;;) {
    starts.push(s);
    if (s + maxContext >= nTokens) return starts;
    s += stride;
  }
}

export function questionTokenSet(
  text: string,
  language: string,
  maxQuestionTokens: number,
): Set<string> {
  const toks = tokenize(text, language).tokens.slice(0, maxQuestionTokens);
  return new Set(toks);
}

export function tokenFeatures(
  tokens: string[],
  qset: Set<string>,
  t: number,
  n: number,
): [number, number, number, number] {
  const lo = t >= 2 ? t - 2 : 0;
  const hi = t + 3 <= n ? t + 3 : n;
  let overlap = 0.0;
  for (let j = lo; j < hi; j++) {
    if (qset.has(tokens[j])) overlap += 1.0;
  }
  const inQ = qset.has(tokens[t]) ? 1.0 : 0.0;
  return [overlap, inQ, t / n, 1.0];
}

function scores(w: number[], tokens: string[], qset: Set<string>): number[] {
  const n = tokens.length;
  const out: number[] = [];
  for (let t = 0; t < n; t++) {
    const f = tokenFeatures(tokens, qset, t, n);
    let acc = 0.0;
    for (let k = 0; k < FEATURE_DIM; k++) acc += w[k] * f[k];
    out.push(acc);
  }
  return out;
}

function expectedFeatures(probs: number[], tokens: string[], qset: Set<string>): number[] {
  const n = tokens.length;
  const ex = [0.0, 0.0, 0.0, 0.0];
  for (let t = 0; t < n; t++) {
    const f = tokenFeatures(tokens, qset, t, n);
    const p = probs[t];
    for (let k = 0; k < FEATURE_DIM; k++) ex[k] += p * f[k];
  }
  return ex;
}

function sgdStep(
  w: number[],
  tokens: string[],
  qset: Set<string>,
  goldT: number,
  lr: number,
): void {
  const probs = softmax(scores(w, tokens, qset));
  const ex = expectedFeatures(probs, tokens, qset);
  const fg = tokenFeatures(tokens, qset, goldT, tokens.length);
  for (let k = 0; k < FEATURE_DIM; k++) w[k] += lr * (fg[k] - ex[k]);
}

function goldTokenSpan(
  offsets: Array<[number, number]>,
  charStart: number,
  charEnd: number,
): [number, number] | null {
  let sTok: number | null = null;
  let eTok: number | null = null;
  for (let t = 0; t < offsets.length; t++) {
    const [lo, hi] = offsets[t];
    if (sTok === null && hi > charStart) sTok = t;
    if (lo < charEnd) eTok = t;
  }
  if (sTok === null || eTok === null || eTok < sTok) return null;
  return [sTok, eTok];
}

interface Example {
  tokens: string[];
  qset: Set<string>;
  goldStart: number;
  goldEnd: number;
}

function buildExamples(data: SquadDataset, config: TrainConfig, language: string): Example[] {
  const examples: Example[] = [];
  const cache = new Map<number, ReturnType<typeof tokenize>>();
  for (const q of data.questions) {
    let tt = cache.get(q.contextIndex);
    if (tt === undefined) {
      tt = tokenize(data.contexts[q.contextIndex], language);
      cache.set(q.contextIndex, tt);
    }
    const qset = questionTokenSet(q.text, language, config.max_question_tokens);
    for (const span of q.answers) {
      const located = goldTokenSpan(
        tt.offsets,
        span.answer_start,
        span.answer_start + Array.from(span.text).length,
      );
      if (located === null) continue;
      const [sTok, eTok] = located;
      for (const ws of windowStarts(tt.tokens.length, config.max_context_tokens, config.doc_stride)) {
        if (sTok >= ws && eTok < ws + config.max_context_tokens) {
          examples.push({
            tokens: tt.tokens.slice(ws, ws + config.max_context_tokens),
            qset,
            goldStart: sTok - ws,
            goldEnd: eTok - ws,
          });
          break;
        }
      }
    }
  }
  return examples;
}

export function trainToy(data: SquadDataset, config: TrainConfig, language: string): ToyModel {
  const examples = buildExamples(data, config, language);
  const wS = [0.0, 0.0, 0.0, 0.0];
  const wE = [0.0, 0.0, 0.0, 0.0];
  const rng = new SplitMix64(config.seed);
  const order = examples.map((_, i) => i);
  for (let epoch = 0; epoch < config.epochs; epoch++) {
    rng.shuffle(order);
    for (const idx of order) {
      const ex = examples[idx];
      sgdStep(wS, ex.tokens, ex.qset, ex.goldStart, config.learning_rate);
      sgdStep(wE, ex.tokens, ex.qset, ex.goldEnd, config.learning_rate);
    }
  }
  return { wStart: wS, wEnd: wE, config, language };
}

export function predictToy(
  model: ToyModel,
  context: string,
  question: string,
  language: string,
): WindowPayload[] {
  const cfg = model.config;
  const tt = tokenize(context, language);
  const qset = questionTokenSet(question, language, cfg.max_question_tokens);
  const windows: WindowPayload[] = [];
  for (const ws of windowStarts(tt.tokens.length, cfg.max_context_tokens, cfg.doc_stride)) {
    const toks = tt.tokens.slice(ws, ws + cfg.max_context_tokens);
    const offs = tt.offsets.slice(ws, ws + cfg.max_context_tokens);
    let sp: number[] = [];
    let ep: number[] = [];
    if (toks.length > 0) {
      sp = softmax(scores(model.wStart, toks, qset));
      ep = softmax(scores(model.wEnd, toks, qset));
    }
    windows.push({ token_offsets: offs, start_probs: sp, end_probs: ep });
  }
  return windows;
}

export function checkpointString(model: ToyModel): string {
  return (
    canonicalJson({
      kind: "toy",
      language: model.language,
      config: {
        epochs: model.config.epochs,
        batch_size: model.config.batch_size,
        learning_rate: jf(model.config.learning_rate),
        seed: model.config.seed,
        max_context_tokens: model.config.max_context_tokens,
        max_question_tokens: model.config.max_question_tokens,
        doc_stride: model.config.doc_stride,
      },
      w_start: model.wStart.map(jf),
      w_end: model.wEnd.map(jf),
    }) + "\n"
  );
}

export function modelId(model: ToyModel): string {
  return "sha256:" + sha256Hex(checkpointString(model));
}
