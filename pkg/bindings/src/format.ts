/**
 * Binary codecs for the engine's matrix and label files.
 *
 * Matrix files: magic "LGF1", u32 rows, u32 cols, then rows*cols float32,
 * row-major. Label files: magic "LGL1", u32 n, u32 k, then n u32 with
 * 0xFFFFFFFF marking IGNORE. All integers and floats little-endian.
 */

export const MATRIX_MAGIC = "LGF1";
export const LABEL_MAGIC = "LGL1";
export const IGNORE = -1;
const IGNORE_ENCODING = 0xffffffff;
const HEADER_BYTES = 12;

export class FormatError extends Error {}
export class ShapeError extends Error {}

/** Caller-owned row-major matrix view; the buffer is never mutated. */
export interface ArrayView {
  data: Float32Array | Float64Array;
  rows: number;
  cols: number;
}

export function checkView(view: ArrayView, name: string): void {
  if (!Number.isInteger(view.rows) || !Number.isInteger(view.cols) || view.rows < 1 || view.cols < 1) {
    throw new ShapeError(`${name}: rows and cols must be positive integers`);
  }
  if (view.data.length !== view.rows * view.cols) {
    throw new ShapeError(
      `${name}: buffer holds ${view.data.length} values, expected ${view.rows * view.cols}`,
    );
  }
}

function writeHeader(out: DataView, magic: string, a: number, b: number): void {
  for (let i = 0; i < 4; i++) out.setUint8(i, magic.charCodeAt(i));
  out.setUint32(4, a, true);
  out.setUint32(8, b, true);
}

function readHeader(buf: Uint8Array, magic: string): [number, number] {
  if (buf.length < HEADER_BYTES) throw new FormatError("file shorter than the 12-byte header");
  const got = String.fromCharCode(buf[0], buf[1], buf[2], buf[3]);
  if (got !== magic) throw new FormatError(`bad magic ${JSON.stringify(got)}, expected ${magic}`);
  const view = new DataView(buf.buffer, buf.byteOffset, buf.byteLength);
  return [view.getUint32(4, true), view.getUint32(8, true)];
}

function checkPayload(buf: Uint8Array, expected: number): void {
  const actual = buf.length - HEADER_BYTES;
  if (actual !== expected) {
    throw new FormatError(`expected ${expected} payload bytes, found ${actual}`);
  }
}

/** Encode a matrix view as file bytes (one narrowing conversion to f32). */
export function encodeMatrix(view: ArrayView): Uint8Array {
  checkView(view, "matrix");
  const out = new Uint8Array(HEADER_BYTES + view.data.length * 4);
  const dv = new DataView(out.buffer);
  writeHeader(dv, MATRIX_MAGIC, view.rows, view.cols);
  for (let i = 0; i < view.data.length; i++) {
    dv.setFloat32(HEADER_BYTES + 4 * i, view.data[i], true);
  }
  return out;
}

/** Decode matrix file bytes, widening values to float64. */
export function decodeMatrix(buf: Uint8Array): { rows: number; cols: number; data: Float64Array } {
  const [rows, cols] = readHeader(buf, MATRIX_MAGIC);
  checkPayload(buf, rows * cols * 4);
  const dv = new DataView(buf.buffer, buf.byteOffset, buf.byteLength);
  const data = new Float64Array(rows * cols);
  for (let i = 0; i < data.length; i++) {
    data[i] = dv.getFloat32(HEADER_BYTES + 4 * i, true);
  }
  return { rows, cols, data };
}

/** Encode labels (IGNORE as -1) into file bytes. */
export function encodeLabels(labels: Int32Array, k: number): Uint8Array {
  const out = new Uint8Array(HEADER_BYTES + labels.length * 4);
  const dv = new DataView(out.buffer);
  writeHeader(dv, LABEL_MAGIC, labels.length, k);
  for (let i = 0; i < labels.length; i++) {
    const value = labels[i];
    if (value === IGNORE) {
      dv.setUint32(HEADER_BYTES + 4 * i, IGNORE_ENCODING, true);
    } else if (value >= 0 && value < k) {
      dv.setUint32(HEADER_BYTES + 4 * i, value, true);
    } else {
      throw new ShapeError(`label ${value} out of range for k=${k}`);
    }
  }
  return out;
}

/** Decode label file bytes; IGNORE comes back as -1. */
export function decodeLabels(buf: Uint8Array): { labels: Int32Array; k: number } {
  const [n, k] = readHeader(buf, LABEL_MAGIC);
  checkPayload(buf, n * 4);
  const dv = new DataView(buf.buffer, buf.byteOffset, buf.byteLength);
  const labels = new Int32Array(n);
  for (let i = 0; i < n; i++) {
    const raw = dv.getUint32(HEADER_BYTES + 4 * i, true);
    if (raw === IGNORE_ENCODING) {
      labels[i] = IGNORE;
    } else if (raw < k) {
      labels[i] = raw;
    } else {
      throw new FormatError(`label ${raw} exceeds k=${k}`);
    }
  }
  return { labels, k };
}
