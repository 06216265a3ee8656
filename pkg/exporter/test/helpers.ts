import * as fs from 'node:fs';
import * as os from 'node:os';
import * as path from 'node:path';

import { Sentence, renderConll } from '../src/conll.js';

export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

const CLASSES: Array<[string, string]> = [
  ['ONE', 'ab'],
  ['TWO', 'ef'],
  ['THREE', 'ij'],
];
const FILLER = 'opqrstuv';

function pick(rand: () => number, n: number): number {
  return Math.floor(rand() * n);
}

function word(letters: string, rand: () => number, length: number): string {
  let out = '';
  for (let i = 0; i < length; i++) {
    out += letters[pick(rand, letters.length)];
  }
  return out;
}

/** Synthetic labeled sentences with three entity classes over disjoint alphabets. */
export function syntheticCorpus(seed: number, nSentences: number): Sentence[] {
  const rand = mulberry32(seed);
  const sentences: Sentence[] = [];
  for (let s = 0; s < nSentences; s++) {
    const tokens: string[] = [];
    const tags: string[] = [];
    const fillers = 2 + pick(rand, 3);
    for (let i = 0; i < fillers; i++) {
      tokens.push(word(FILLER, rand, 3 + pick(rand, 3)));
      tags.push('O');
    }
    const spans = 1 + pick(rand, 2);
    for (let e = 0; e < spans; e++) {
      const [cls, letters] = CLASSES[pick(rand, CLASSES.length)];
      const spanLen = 1 + pick(rand, 2);
      for (let t = 0; t < spanLen; t++) {
        tokens.push(cls[0].toLowerCase() + word(letters, rand, 4));
        tags.push(`I-${cls}`);
      }
      tokens.push(word(FILLER, rand, 3 + pick(rand, 3)));
      tags.push('O');
    }
    sentences.push({ tokens, tags });
  }
  return sentences;
}

export function writeCorpus(dir: string, name: string, sentences: Sentence[]): string {
  const p = path.join(dir, name);
  fs.writeFileSync(p, renderConll(sentences), 'utf-8');
  return p;
}

export function tmpdir(prefix: string): string {
  return fs.mkdtempSync(path.join(os.tmpdir(), prefix));
}
