import * as fs from 'node:fs';
import * as path from 'node:path';

import { WordPieceTokenizer, loadVocab } from './wordpiece.js';

export interface EncoderConfig {
  hiddenSize: number;
  maxPieces: number;
  layers: number;
  lowercase: boolean;
  vocabFile: string;
  weightsFile: string;
}

interface LayerWeights {
  left: Float32Array; // H x H
  self: Float32Array; // H x H
  right: Float32Array; // H x H
  bias: Float32Array; // H
}

/**
 * A small contextual encoder loaded from a checkpoint directory.
 *
 * Checkpoint layout: config.json, a vocab file, and a little-endian float32
 * weights file holding the piece-embedding table [V x H] followed, per layer,
 * by three H x H mixing matrices (left neighbor, self, right neighbor) and a
 * bias [H]. Each layer computes tanh(W_l h_{t-1} + W_s h_t + W_r h_{t+1} + b)
 * with zero vectors past the sequence edges, so the receptive field grows by
 * one piece per layer in each direction.
 */
export class Encoder {
  private constructor(
    readonly config: EncoderConfig,
    readonly tokenizer: WordPieceTokenizer,
    private readonly embeddings: Float32Array, // V x H
    private readonly layerWeights: LayerWeights[],
    readonly checkpointId: string,
  ) {}

  static load(dir: string): Encoder {
    const configPath = path.join(dir, 'config.json');
    const config = JSON.parse(fs.readFileSync(configPath, 'utf-8')) as EncoderConfig;
    for (const key of ['hiddenSize', 'maxPieces', 'layers'] as const) {
      if (!Number.isInteger(config[key]) || config[key] < 1) {
        throw new Error(`${configPath}: ${key} must be a positive integer`);
      }
    }
    const vocab = loadVocab(path.join(dir, config.vocabFile));
    const tokenizer = new WordPieceTokenizer(vocab, config.lowercase);

    const raw = fs.readFileSync(path.join(dir, config.weightsFile));
    const floats = new Float32Array(raw.buffer, raw.byteOffset, raw.byteLength / 4);
    const h = config.hiddenSize;
    const expected = vocab.length * h + config.layers * (3 * h * h + h);
    if (floats.length !== expected) {
      throw new Error(
        `${config.weightsFile}: expected ${expected} float32 values, found ${floats.length}`,
      );
    }
    let offset = 0;
    const take = (n: number): Float32Array => {
      const view = floats.subarray(offset, offset + n);
      offset += n;
      return view;
    };
    const embeddings = take(vocab.length * h);
    const layers: LayerWeights[] = [];
    for (let l = 0; l < config.layers; l++) {
      layers.push({
        left: take(h * h),
        self: take(h * h),
        right: take(h * h),
        bias: take(h),
      });
    }
    return new Encoder(config, tokenizer, embeddings, layers, path.basename(dir));
  }

  /** Hidden states for one window of piece ids, at the requested layer. */
  encodePieces(pieceIds: number[], layer: number): Float64Array[] {
    const h = this.config.hiddenSize;
    if (layer < 0 || layer > this.config.layers) {
      throw new Error(`layer ${layer} outside 0..${this.config.layers}`);
    }
    if (pieceIds.length > this.config.maxPieces) {
      throw new Error(`window of ${pieceIds.length} pieces exceeds maxPieces`);
    }
    let states: Float64Array[] = pieceIds.map((id) => {
      const out = new Float64Array(h);
      const base = id * h;
      for (let i = 0; i < h; i++) {
        out[i] = this.embeddings[base + i];
      }
      return out;
    });
    for (let l = 0; l < layer; l++) {
      states = this.applyLayer(states, this.layerWeights[l]);
    }
    return states;
  }

  private applyLayer(states: Float64Array[], w: LayerWeights): Float64Array[] {
    const h = this.config.hiddenSize;
    const out: Float64Array[] = [];
    for (let t = 0; t < states.length; t++) {
      const next = new Float64Array(h);
      for (let i = 0; i < h; i++) {
        let acc = w.bias[i];
        const row = i * h;
        const cur = states[t];
        for (let j = 0; j < h; j++) {
          acc += w.self[row + j] * cur[j];
        }
        if (t > 0) {
          const prev = states[t - 1];
          for (let j = 0; j < h; j++) {
            acc += w.left[row + j] * prev[j];
          }
        }
        if (t + 1 < states.length) {
          const nxt = states[t + 1];
          for (let j = 0; j < h; j++) {
            acc += w.right[row + j] * nxt[j];
          }
        }
        next[i] = Math.tanh(acc);
      }
      out.push(next);
    }
    return out;
  }
}
