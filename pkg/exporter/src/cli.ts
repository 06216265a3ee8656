#!/usr/bin/env node
// Subcommands:
//   export          extract per-token embeddings for a corpus from a checkpoint
//   make-checkpoint build a self-contained random-weights checkpoint from a corpus

import { parseArgs } from 'node:util';

import { CHECKPOINT_DEFAULTS, makeCheckpoint } from './checkpoint.js';
import { Pooling, runExport } from './export.js';

function fail(message: string): never {
  console.error(`error: ${message}`);
  process.exit(2);
}

function cmdExport(argv: string[]): void {
  const { values } = parseArgs({
    args: argv,
    options: {
      corpus: { type: 'string' },
      checkpoint: { type: 'string' },
      out: { type: 'string' },
      pooling: { type: 'string', default: 'first-subtoken' },
      layer: { type: 'string' },
    },
  });
  if (!values.corpus || !values.checkpoint || !values.out) {
    fail('export requires --corpus, --checkpoint, and --out');
  }
  if (values.pooling !== 'first-subtoken' && values.pooling !== 'mean-subtoken') {
    fail(`unknown pooling ${values.pooling}`);
  }
  const stats = runExport({
    corpusPath: values.corpus,
    checkpointDir: values.checkpoint,
    outPath: values.out,
    pooling: values.pooling as Pooling,
    layer: values.layer === undefined ? undefined : Number(values.layer),
  });
  console.log(
    `exported ${stats.tokens} token vectors (dim ${stats.dim}) for ` +
      `${stats.sentences} sentences to ${values.out}`,
  );
  if (stats.unkSubstitutions > 0 || stats.splitSentences > 0) {
    console.log(
      `warnings: ${stats.unkSubstitutions} unknown-piece substitutions, ` +
        `${stats.splitSentences} split sentences`,
    );
  }
}

function cmdMakeCheckpoint(argv: string[]): void {
  const { values } = parseArgs({
    args: argv,
    options: {
      corpus: { type: 'string' },
      out: { type: 'string' },
      hidden: { type: 'string', default: String(CHECKPOINT_DEFAULTS.hiddenSize) },
      layers: { type: 'string', default: String(CHECKPOINT_DEFAULTS.layers) },
      'max-pieces': { type: 'string', default: String(CHECKPOINT_DEFAULTS.maxPieces) },
      seed: { type: 'string', default: String(CHECKPOINT_DEFAULTS.seed) },
    },
  });
  if (!values.corpus || !values.out) {
    fail('make-checkpoint requires --corpus and --out');
  }
  makeCheckpoint({
    corpusPath: values.corpus,
    outDir: values.out,
    hiddenSize: Number(values.hidden),
    layers: Number(values.layers),
    maxPieces: Number(values['max-pieces']),
    seed: Number(values.seed),
    maxWords: CHECKPOINT_DEFAULTS.maxWords,
    lowercase: CHECKPOINT_DEFAULTS.lowercase,
  });
  console.log(`wrote checkpoint to ${values.out}`);
}

function main(): void {
  const [command, ...rest] = process.argv.slice(2);
  try {
    switch (command) {
      case 'export':
        cmdExport(rest);
        break;
      case 'make-checkpoint':
        cmdMakeCheckpoint(rest);
        break;
      default:
        fail(`unknown command ${command ?? '(none)'}; use export or make-checkpoint`);
    }
  } catch (err) {
    fail(err instanceof Error ? err.message : String(err));
  }
}

main();
