import { describe, expect, it } from "vitest";

import {
  FormatError,
  IGNORE,
  ShapeError,
  checkView,
  decodeLabels,
  decodeMatrix,
  encodeLabels,
  encodeMatrix,
} from "../src/format.js";

describe("matrix codec", () => {
  it("round-trips float64 data at float32 precision", () => {
    const data = Float64Array.from([1.5, -2.25, 0.1, 3.0]);
    const bytes = encodeMatrix({ data, rows: 2, cols: 2 });
    const out = decodeMatrix(bytes);
    expect(out.rows).toBe(2);
    expect(out.cols).toBe(2);
    expect(out.data[0]).toBe(1.5);
    expect(out.data[2]).toBe(Math.fround(0.1));
  });

  it("keeps float32 data exact", () => {
    const data = Float32Array.from([0.1, 0.2, 0.3]);
    const out = decodeMatrix(encodeMatrix({ data, rows: 1, cols: 3 }));
    expect(Array.from(out.data)).toEqual(Array.from(data, Number));
  });

  it("writes the documented 12-byte header", () => {
    const bytes = encodeMatrix({ data: Float64Array.from([7]), rows: 1, cols: 1 });
    expect(bytes.length).toBe(16);
    expect(String.fromCharCode(...bytes.slice(0, 4))).toBe("LGF1");
    const dv = new DataView(bytes.buffer);
    expect(dv.getUint32(4, true)).toBe(1);
    expect(dv.getUint32(8, true)).toBe(1);
  });

  it("rejects a bad magic", () => {
    const bytes = encodeMatrix({ data: Float64Array.from([1]), rows: 1, cols: 1 });
    bytes[0] = "X".charCodeAt(0);
    expect(() => decodeMatrix(bytes)).toThrow(FormatError);
  });

  it("rejects truncated payloads", () => {
    const bytes = encodeMatrix({ data: Float64Array.from([1, 2, 3, 4]), rows: 2, cols: 2 });
    expect(() => decodeMatrix(bytes.slice(0, bytes.length - 4))).toThrow(FormatError);
  });

  it("rejects shape mismatches before any work", () => {
    expect(() => checkView({ data: Float64Array.from([1, 2, 3]), rows: 2, cols: 2 }, "m")).toThrow(
      ShapeError,
    );
  });

  it("does not mutate the caller's buffer", () => {
    const data = Float64Array.from([1, 2, 3, 4]);
    const snapshot = Array.from(data);
    encodeMatrix({ data, rows: 2, cols: 2 });
    expect(Array.from(data)).toEqual(snapshot);
  });
});

describe("label codec", () => {
  it("round-trips IGNORE as -1", () => {
    const labels = Int32Array.from([0, IGNORE, 2]);
    const out = decodeLabels(encodeLabels(labels, 3));
    expect(Array.from(out.labels)).toEqual([0, -1, 2]);
    expect(out.k).toBe(3);
  });

  it("encodes IGNORE as u32 max", () => {
    const bytes = encodeLabels(Int32Array.from([IGNORE]), 2);
    const dv = new DataView(bytes.buffer);
    expect(dv.getUint32(12, true)).toBe(0xffffffff);
  });

  it("rejects labels outside [0, k)", () => {
    expect(() => encodeLabels(Int32Array.from([5]), 3)).toThrow(ShapeError);
  });

  it("rejects oversized decoded values", () => {
    const bytes = encodeLabels(Int32Array.from([1]), 4);
    const dv = new DataView(bytes.buffer);
    dv.setUint32(12, 9, true);
    expect(() => decodeLabels(bytes)).toThrow(FormatError);
  });
});
