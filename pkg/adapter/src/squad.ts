/** Minimal SQuAD v1.1 loader preserving document order. */

import { readFileSync } from "node:fs";

export interface SquadAnswer {
  text: string;
  answer_start: number;
}

export interface SquadQuestion {
  id: string;
  contextIndex: number;
  text: string;
  answers: SquadAnswer[];
}

export interface SquadDataset {
  contexts: string[];
  questions: SquadQuestion[];
}

export function loadSquad(path: string): SquadDataset {
  const root = JSON.parse(readFileSync(path, "utf8"));
  const contexts: string[] = [];
  const questions: SquadQuestion[] = [];
  for (const article of root.data ?? []) {
    for (const para of article.paragraphs ?? []) {
      const contextIndex = contexts.length;
      contexts.push(String(para.context ?? ""));
      for (const qa of para.qas ?? []) {
        questions.push({
          id: String(qa.id),
          contextIndex,
          text: String(qa.question ?? ""),
          answers: (qa.answers ?? []).map((a: SquadAnswer) => ({
            text: String(a.text),
            answer_start: Number(a.answer_start),
          })),
        });
      }
    }
  }
  return { contexts, questions };
}
