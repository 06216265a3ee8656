// Two-column corpus text: one token per line, last column is the tag,
// blank line separates sentences. Middle columns are ignored.

export interface Sentence {
  tokens: string[];
  tags: string[];
}

export function parseConll(text: string): Sentence[] {
  const sentences: Sentence[] = [];
  let tokens: string[] = [];
  let tags: string[] = [];
  const lines = text.split('\n');
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i];
    if (line.trim() === '') {
      if (tokens.length > 0) {
        sentences.push({ tokens, tags });
        tokens = [];
        tags = [];
      }
      continue;
    }
    const cols = line.split(/\s+/).filter((c) => c !== '');
    if (cols.length < 2) {
      throw new Error(`line ${i + 1}: expected at least 2 columns, got ${cols.length}`);
    }
    tokens.push(cols[0]);
    tags.push(cols[cols.length - 1]);
  }
  if (tokens.length > 0) {
    sentences.push({ tokens, tags });
  }
  return sentences;
}

export function renderConll(sentences: Sentence[]): string {
  const blocks = sentences.map((s) =>
    s.tokens.map((tok, i) => `${tok}\t${s.tags[i]}`).join('\n'),
  );
  return blocks.join('\n\n') + '\n';
}
