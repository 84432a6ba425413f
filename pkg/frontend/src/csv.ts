/** Strict readers for the experiment CSVs.
 *
 * Every figure value must trace back to a cell in one of these files, so the
 * readers keep the raw cell text alongside the parsed number and refuse any
 * file whose header does not match the documented contract exactly.
 */

import { readFileSync } from "fs";
import Papa from "papaparse";

export const SWEEP_HEADER = [
  "strategy",
  "beta",
  "n_samples",
  "demo_angle",
  "mean_belief_error",
  "std_error",
] as const;

export const AGGREGATE_HEADER = [
  "environment",
  "method",
  "dependence",
  "beta",
  "n_teachers",
  "mean_error",
  "stderr_error",
  "mean_regret",
  "stderr_regret",
] as const;

/** One numeric cell: the text exactly as written plus its parsed value. */
export interface Cell {
  raw: string;
  value: number;
}

export interface SweepRow {
  strategy: string;
  beta: Cell;
  /** Empty for the deterministic strategies. */
  nSamples: string;
  demoAngle: Cell;
  meanBeliefError: Cell;
  stdError: Cell;
}

export interface AggregateRow {
  environment: string;
  method: string;
  dependence: string;
  beta: Cell;
  nTeachers: Cell;
  meanError: Cell;
  stderrError: Cell;
  meanRegret: Cell;
  stderrRegret: Cell;
}

export class CsvFormatError extends Error {}

function parseRows(path: string, expected: readonly string[]): string[][] {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch {
    throw new CsvFormatError(`cannot read CSV file: ${path}`);
  }
  const parsed = Papa.parse<string[]>(text.trimEnd(), { skipEmptyLines: true });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new CsvFormatError(`${path}: ${first.message} (row ${first.row})`);
  }
  const rows = parsed.data;
  if (rows.length === 0) {
    throw new CsvFormatError(`${path}: file is empty`);
  }
  const header = rows[0];
  for (let i = 0; i < expected.length; i++) {
    if (header[i] !== expected[i]) {
      throw new CsvFormatError(
        `${path}: header column ${i} is ${JSON.stringify(header[i] ?? "")}, ` +
          `expected "${expected[i]}"`,
      );
    }
  }
  if (header.length !== expected.length) {
    throw new CsvFormatError(
      `${path}: unexpected extra column "${header[expected.length]}"`,
    );
  }
  return rows.slice(1);
}

function numericCell(path: string, column: string, raw: string): Cell {
  const value = Number(raw);
  if (raw.trim() === "" || !Number.isFinite(value)) {
    throw new CsvFormatError(
      `${path}: column "${column}" has non-numeric value ${JSON.stringify(raw)}`,
    );
  }
  return { raw, value };
}

export function readSweepCsv(path: string): SweepRow[] {
  return parseRows(path, SWEEP_HEADER).map((r) => ({
    strategy: r[0],
    beta: numericCell(path, "beta", r[1]),
    nSamples: r[2],
    demoAngle: numericCell(path, "demo_angle", r[3]),
    meanBeliefError: numericCell(path, "mean_belief_error", r[4]),
    // std_error is optional: an empty cell means a single run, no band.
    stdError:
      (r[5] ?? "").trim() === ""
        ? { raw: "", value: 0 }
        : numericCell(path, "std_error", r[5]),
  }));
}

export function readAggregateCsv(path: string): AggregateRow[] {
  return parseRows(path, AGGREGATE_HEADER).map((r) => ({
    environment: r[0],
    method: r[1],
    dependence: r[2],
    beta: numericCell(path, "beta", r[3]),
    nTeachers: numericCell(path, "n_teachers", r[4]),
    meanError: numericCell(path, "mean_error", r[5]),
    stderrError: numericCell(path, "stderr_error", r[6]),
    meanRegret: numericCell(path, "mean_regret", r[7]),
    stderrRegret: numericCell(path, "stderr_regret", r[8]),
  }));
}
