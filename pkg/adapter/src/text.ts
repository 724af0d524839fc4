/**
 * Tokenizer mirrored from the pipeline. All offsets are Unicode code-point
 * indices (not UTF-16 units), so strings are processed as code-point arrays.
 */

const WHITESPACE = new Set(
  " \t\n\r\f\v  " +
    "           " +
    "    　",
);

const ASCII_PUNCT = new Set("!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~");
const UNICODE_PUNCT = /\p{P}/u;

export const isSpace = (ch: string): boolean => WHITESPACE.has(ch);
export const isPunct = (ch: string): boolean =>
  ASCII_PUNCT.has(ch) || UNICODE_PUNCT.test(ch);

export interface Tokenized {
  tokens: string[];
  offsets: Array<[number, number]>; // code-point [start, end) per token
}

function spaceChunks(cps: string[]): Array<[number, number]> {
  const chunks: Array<[number, number]> = [];
  let start = -1;
  for (let i = 0; i < cps.length; i++) {
    if (isSpace(cps[i])) {
      if (start >= 0) {
        chunks.push([start, i]);
        start = -1;
      }
    } else if (start < 0) {
      start = i;
    }
  }
  if (start >= 0) chunks.push([start, cps.length]);
  return chunks;
}

function peel(cps: string[], s: number, e: number): Array<[string, number, number]> {
  let i = s;
  let j = e;
  const lead: Array<[string, number, number]> = [];
  while (i < j && isPunct(cps[i])) {
    lead.push([cps[i], i, i + 1]);
    i += 1;
  }
  const trail: Array<[string, number, number]> = [];
  while (j > i && isPunct(cps[j - 1])) {
    trail.push([cps[j - 1], j - 1, j]);
    j -= 1;
  }
  const mid: Array<[string, number, number]> =
    j > i ? [[cps.slice(i, j).join(""), i, j]] : [];
  return [...lead, ...mid, ...trail.reverse()];
}

export function tokenize(text: string, language: string): Tokenized {
  const cps = Array.from(text);
  if (language === "zh") {
    const tokens: string[] = [];
    const offsets: Array<[number, number]> = [];
    for (let i = 0; i < cps.length; i++) {
      if (isSpace(cps[i])) continue;
      tokens.push(cps[i]);
      offsets.push([i, i + 1]);
    }
    return { tokens, offsets };
  }
  const chunks = spaceChunks(cps);
  let pieces: Array<[string, number, number]>;
  if (language === "ko") {
    pieces = chunks.map(([s, e]) => [cps.slice(s, e).join(""), s, e]);
  } else {
    pieces = [];
    for (const [s, e] of chunks) pieces.push(...peel(cps, s, e));
  }
  return {
    tokens: pieces.map((p) => p[0]),
    offsets: pieces.map((p) => [p[1], p[2]] as [number, number]),
  };
}
