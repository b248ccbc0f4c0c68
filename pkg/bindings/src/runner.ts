/**
 * Subprocess plumbing: stage input files in a scratch directory, invoke the
 * engine CLI, collect its outputs.
 */

import { spawnSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export class EngineError extends Error {}

/** Command used to reach the engine; override via LOGO_CLI, e.g.
 *  LOGO_CLI="python3 -m logo.cli". */
export function engineCommand(): string[] {
  const override = process.env.LOGO_CLI;
  if (override && override.trim().length > 0) return override.trim().split(/\s+/);
  return ["logo"];
}

export interface RunResult {
  stdout: string;
  files: Map<string, Uint8Array>;
}

/**
 * Run one engine subcommand against staged inputs.
 *
 * @param args CLI arguments after the executable; tokens of the form
 *   `@name` are replaced by the scratch path of a staged or expected file
 * @param inputs files to stage before the run (name -> bytes)
 * @param outputs file names to read back after a successful run
 */
export function runEngine(
  args: string[],
  inputs: Record<string, Uint8Array>,
  outputs: string[],
): RunResult {
  const dir = mkdtempSync(join(tmpdir(), "logo-bindings-"));
  try {
    for (const [name, bytes] of Object.entries(inputs)) {
      writeFileSync(join(dir, name), bytes);
    }
    const resolved = args.map((a) => (a.startsWith("@") ? join(dir, a.slice(1)) : a));
    const [exe, ...prefix] = engineCommand();
    const proc = spawnSync(exe, [...prefix, ...resolved], { encoding: "utf-8" });
    if (proc.error) {
      throw new EngineError(`failed to launch engine CLI: ${proc.error.message}`);
    }
    if (proc.status !== 0) {
      const detail = (proc.stderr || proc.stdout || "").trim();
      throw new EngineError(`engine exited with ${proc.status}: ${detail}`);
    }
    const files = new Map<string, Uint8Array>();
    for (const name of outputs) {
      files.set(name, new Uint8Array(readFileSync(join(dir, name))));
    }
    return { stdout: proc.stdout, files };
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}
