import * as fs from 'node:fs';

import { parseConll } from './conll.js';
import { Encoder } from './encoder.js';
import { sha256Hex, writeFsemb, writeManifest } from './fsemb.js';
import { UNK, WordPieceTokenizer } from './wordpiece.js';

export type Pooling = 'first-subtoken' | 'mean-subtoken';

export interface ExportJob {
  corpusPath: string;
  checkpointDir: string;
  outPath: string;
  pooling: Pooling;
  /** Encoder layer to read; defaults to the last layer. */
  layer?: number;
}

export interface ExportStats {
  sentences: number;
  tokens: number;
  dim: number;
  unkSubstitutions: number;
  splitSentences: number;
}

export interface Windowing {
  starts: number[];
  size: number;
}

export function planWindows(nPieces: number, maxPieces: number): Windowing {
  if (nPieces <= maxPieces) {
    return { starts: [0], size: maxPieces };
  }
  const overlap = Math.floor(maxPieces / 4);
  const stride = maxPieces - overlap;
  const starts: number[] = [];
  for (let s = 0; ; s += stride) {
    if (s + maxPieces >= nPieces) {
      starts.push(Math.max(0, nPieces - maxPieces));
      break;
    }
    starts.push(s);
  }
  return { starts, size: maxPieces };
}

/** Pieces for one token; a token the tokenizer cannot split at all gets [UNK]. */
export function piecesForToken(
  tokenizer: WordPieceTokenizer,
  token: string,
): { pieces: string[]; substituted: boolean } {
  const pieces = tokenizer.tokenize(token);
  if (pieces.length === 0) {
    return { pieces: [UNK], substituted: true };
  }
  return { pieces, substituted: false };
}

/** Window whose interior holds the piece; ties go to the earlier window. */
function ownerWindow(piece: number, windows: Windowing, nPieces: number): number {
  let best = -1;
  let bestDepth = -1;
  windows.starts.forEach((start, w) => {
    const end = Math.min(start + windows.size, nPieces);
    if (piece < start || piece >= end) {
      return;
    }
    const depth = Math.min(piece - start, end - 1 - piece);
    if (depth > bestDepth) {
      best = w;
      bestDepth = depth;
    }
  });
  if (best < 0) {
    throw new Error(`piece ${piece} not covered by any window`);
  }
  return best;
}

export function runExport(job: ExportJob): ExportStats {
  const corpusText = fs.readFileSync(job.corpusPath, 'utf-8');
  const corpus = parseConll(corpusText);
  const encoder = Encoder.load(job.checkpointDir);
  const layer = job.layer ?? encoder.config.layers;
  const dim = encoder.config.hiddenSize;

  let unkSubstitutions = 0;
  let splitSentences = 0;
  let tokens = 0;
  const out: Float32Array[] = [];

  for (const sentence of corpus) {
    // pieces per token, [UNK]-substituting tokens the tokenizer cannot split
    const pieceIds: number[] = [];
    const tokenPieceSpans: Array<[number, number]> = [];
    for (const token of sentence.tokens) {
      const { pieces, substituted } = piecesForToken(encoder.tokenizer, token);
      if (substituted) {
        unkSubstitutions++;
        console.warn(`warning: token ${JSON.stringify(token)} produced no pieces; using ${UNK}`);
      }
      const start = pieceIds.length;
      for (const piece of pieces) {
        pieceIds.push(encoder.tokenizer.idOf(piece));
      }
      tokenPieceSpans.push([start, pieceIds.length]);
    }

    const windows = planWindows(pieceIds.length, encoder.config.maxPieces);
    if (windows.starts.length > 1) {
      splitSentences++;
      console.warn(
        `warning: sentence of ${pieceIds.length} pieces split into ${windows.starts.length} overlapping windows`,
      );
    }
    const encoded = windows.starts.map((start) =>
      encoder.encodePieces(
        pieceIds.slice(start, Math.min(start + windows.size, pieceIds.length)),
        layer,
      ),
    );
    const pieceVector = (piece: number): Float64Array => {
      const w = ownerWindow(piece, windows, pieceIds.length);
      return encoded[w][piece - windows.starts[w]];
    };

    const flat = new Float32Array(sentence.tokens.length * dim);
    tokenPieceSpans.forEach(([start, end], t) => {
      if (job.pooling === 'first-subtoken') {
        flat.set(Float32Array.from(pieceVector(start)), t * dim);
      } else {
        const mean = new Float64Array(dim);
        for (let p = start; p < end; p++) {
          const v = pieceVector(p);
          for (let i = 0; i < dim; i++) {
            mean[i] += v[i];
          }
        }
        for (let i = 0; i < dim; i++) {
          mean[i] /= end - start;
        }
        flat.set(Float32Array.from(mean), t * dim);
      }
    });
    tokens += sentence.tokens.length;
    out.push(flat);
  }

  writeFsemb(job.outPath, dim, out);
  writeManifest(`${job.outPath}.manifest`, {
    format: 'FSEMB1',
    dim: String(dim),
    sentences: String(corpus.length),
    provenance: `exporter:${encoder.checkpointId}`,
    corpus_sha256: sha256Hex(corpusText),
    pooling: job.pooling,
    layer: String(layer),
    checkpoint: job.checkpointDir,
  });
  return {
    sentences: corpus.length,
    tokens,
    dim,
    unkSubstitutions,
    splitSentences,
  };
}
