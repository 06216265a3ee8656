import * as fs from 'node:fs';
import * as path from 'node:path';

import { parseConll } from './conll.js';
import { PAD, UNK, saveVocab } from './wordpiece.js';

export interface CheckpointSpec {
  corpusPath: string;
  outDir: string;
  hiddenSize: number;
  layers: number;
  maxPieces: number;
  seed: number;
  /** Whole words kept in the vocab besides full character coverage. */
  maxWords: number;
  lowercase: boolean;
}

export const CHECKPOINT_DEFAULTS = {
  hiddenSize: 32,
  layers: 2,
  maxPieces: 48,
  seed: 7,
  maxWords: 2000,
  lowercase: true,
};

function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/**
 * Build a self-contained random-weights checkpoint from a corpus.
 *
 * The vocab covers every character of the corpus (as both word-initial and
 * continuation pieces) plus the most frequent whole words, so tokenization
 * never fails on corpus text; weights are seeded and reproducible.
 */
export function makeCheckpoint(spec: CheckpointSpec): void {
  const corpus = parseConll(fs.readFileSync(spec.corpusPath, 'utf-8'));
  const wordCounts = new Map<string, number>();
  const chars = new Set<string>();
  for (const sentence of corpus) {
    for (const raw of sentence.tokens) {
      const token = spec.lowercase ? raw.toLowerCase() : raw;
      wordCounts.set(token, (wordCounts.get(token) ?? 0) + 1);
      for (const ch of token) {
        chars.add(ch);
      }
    }
  }
  const words = [...wordCounts.entries()]
    .sort((a, b) => b[1] - a[1] || (a[0] < b[0] ? -1 : 1))
    .slice(0, spec.maxWords)
    .map(([w]) => w)
    .filter((w) => w.length > 1); // single chars are already covered
  const sortedChars = [...chars].sort();
  const vocab = [
    PAD,
    UNK,
    ...sortedChars,
    ...sortedChars.map((c) => `##${c}`),
    ...words.sort(),
  ];
  const seen = new Set<string>();
  const deduped = vocab.filter((p) => !seen.has(p) && (seen.add(p), true));

  const h = spec.hiddenSize;
  const total = deduped.length * h + spec.layers * (3 * h * h + h);
  const weights = new Float32Array(total);
  const rand = mulberry32(spec.seed);
  const embScale = 0.8;
  const mixScale = 1.0 / Math.sqrt(3 * h);
  let offset = 0;
  for (let i = 0; i < deduped.length * h; i++) {
    weights[offset++] = (rand() * 2 - 1) * embScale;
  }
  for (let l = 0; l < spec.layers; l++) {
    for (let i = 0; i < 3 * h * h; i++) {
      weights[offset++] = (rand() * 2 - 1) * mixScale;
    }
    for (let i = 0; i < h; i++) {
      weights[offset++] = (rand() * 2 - 1) * 0.1;
    }
  }

  fs.mkdirSync(spec.outDir, { recursive: true });
  saveVocab(path.join(spec.outDir, 'vocab.txt'), deduped);
  fs.writeFileSync(
    path.join(spec.outDir, 'weights.bin'),
    Buffer.from(weights.buffer, weights.byteOffset, weights.byteLength),
  );
  const config = {
    hiddenSize: spec.hiddenSize,
    maxPieces: spec.maxPieces,
    layers: spec.layers,
    lowercase: spec.lowercase,
    vocabFile: 'vocab.txt',
    weightsFile: 'weights.bin',
  };
  fs.writeFileSync(
    path.join(spec.outDir, 'config.json'),
    JSON.stringify(config, null, 2) + '\n',
    'utf-8',
  );
}
