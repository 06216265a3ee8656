import * as crypto from 'node:crypto';
import * as fs from 'node:fs';

// FSEMB1 (little-endian): magic "FSEMB1", u32 dim, u32 sentence count, then
// per sentence a u32 token count followed by tokenCount*dim float32 values.
const MAGIC = Buffer.from('FSEMB1', 'ascii');

export function writeFsemb(path: string, dim: number, sentences: Float32Array[]): void {
  let total = MAGIC.length + 8;
  for (const s of sentences) {
    if (s.length % dim !== 0) {
      throw new Error(`sentence payload of ${s.length} floats is not a multiple of dim ${dim}`);
    }
    total += 4 + s.length * 4;
  }
  const buf = Buffer.alloc(total);
  let off = 0;
  off += MAGIC.copy(buf, off);
  off = buf.writeUInt32LE(dim, off);
  off = buf.writeUInt32LE(sentences.length, off);
  for (const s of sentences) {
    off = buf.writeUInt32LE(s.length / dim, off);
    for (let i = 0; i < s.length; i++) {
      off = buf.writeFloatLE(s[i], off);
    }
  }
  fs.writeFileSync(path, buf);
}

export interface FsembFile {
  dim: number;
  sentences: Float32Array[];
}

export function readFsemb(path: string): FsembFile {
  const buf = fs.readFileSync(path);
  if (buf.length < MAGIC.length + 8 || !buf.subarray(0, MAGIC.length).equals(MAGIC)) {
    throw new Error(`${path}: not an FSEMB1 file`);
  }
  let off = MAGIC.length;
  const dim = buf.readUInt32LE(off);
  off += 4;
  const count = buf.readUInt32LE(off);
  off += 4;
  const sentences: Float32Array[] = [];
  for (let s = 0; s < count; s++) {
    if (off + 4 > buf.length) {
      throw new Error(`${path}: truncated at sentence ${s}`);
    }
    const tokens = buf.readUInt32LE(off);
    off += 4;
    const floats = new Float32Array(tokens * dim);
    if (off + floats.length * 4 > buf.length) {
      throw new Error(`${path}: truncated inside sentence ${s}`);
    }
    for (let i = 0; i < floats.length; i++) {
      floats[i] = buf.readFloatLE(off);
      off += 4;
    }
    sentences.push(floats);
  }
  if (off !== buf.length) {
    throw new Error(`${path}: ${buf.length - off} trailing bytes`);
  }
  return { dim, sentences };
}

export function writeManifest(path: string, fields: Record<string, string>): void {
  const lines = Object.entries(fields).map(([k, v]) => `${k}=${v}`);
  fs.writeFileSync(path, lines.join('\n') + '\n', 'utf-8');
}

export function sha256Hex(text: string): string {
  return crypto.createHash('sha256').update(text, 'utf-8').digest('hex');
}
