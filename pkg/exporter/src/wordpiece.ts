import * as fs from 'node:fs';

export const UNK = '[UNK]';
export const PAD = '[PAD]';

const CONTINUATION = '##';

/**
 * Greedy longest-match-first subword tokenizer.
 *
 * Pieces after the first carry the `##` continuation marker. A word with any
 * unmatchable position collapses to a single [UNK] piece.
 */
export class WordPieceTokenizer {
  private readonly ids = new Map<string, number>();

  constructor(
    readonly vocab: string[],
    readonly lowercase: boolean = true,
  ) {
    vocab.forEach((piece, i) => {
      if (this.ids.has(piece)) {
        throw new Error(`duplicate vocab entry: ${piece}`);
      }
      this.ids.set(piece, i);
    });
    if (!this.ids.has(UNK)) {
      throw new Error(`vocab is missing ${UNK}`);
    }
  }

  idOf(piece: string): number {
    const id = this.ids.get(piece);
    if (id === undefined) {
      throw new Error(`piece not in vocab: ${piece}`);
    }
    return id;
  }

  tokenize(word: string): string[] {
    const text = this.lowercase ? word.toLowerCase() : word;
    if (text.length === 0) {
      return [];
    }
    const pieces: string[] = [];
    let start = 0;
    while (start < text.length) {
      let end = text.length;
      let found: string | null = null;
      while (end > start) {
        const candidate = (start > 0 ? CONTINUATION : '') + text.slice(start, end);
        if (this.ids.has(candidate)) {
          found = candidate;
          break;
        }
        end--;
      }
      if (found === null) {
        return [UNK];
      }
      pieces.push(found);
      start = end;
    }
    return pieces;
  }

  encode(word: string): number[] {
    return this.tokenize(word).map((p) => this.idOf(p));
  }
}

export function loadVocab(path: string): string[] {
  return fs
    .readFileSync(path, 'utf-8')
    .split('\n')
    .filter((line) => line !== '');
}

export function saveVocab(path: string, vocab: string[]): void {
  fs.writeFileSync(path, vocab.join('\n') + '\n', 'utf-8');
}
