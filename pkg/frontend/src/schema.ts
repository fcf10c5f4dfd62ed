// Parsing and validation of blockpr benchmark CSVs.
//
// The harness writes a fixed header; blank cells mean "not recorded for this
// algorithm" (e.g. eig_iters for the alternating-projection baseline) and
// snr_db is the string "inf" for noiseless rows.

import Papa from "papaparse";

export const REQUIRED_COLUMNS = [
  "d",
  "delta",
  "D",
  "snr_db",
  "algorithm",
  "trial",
  "error_db",
  "time_ms_total",
  "time_ms_solve",
  "time_ms_eig",
  "eig_iters",
  "kappa",
] as const;

export type ColumnName = (typeof REQUIRED_COLUMNS)[number];

export interface ResultRow {
  d: number;
  delta: number;
  D: number;
  snr_db: number; // Infinity for noiseless rows
  algorithm: string;
  trial: number;
  error_db: number;
  time_ms_total: number;
  time_ms_solve: number | null;
  time_ms_eig: number | null;
  eig_iters: number | null;
  kappa: number | null;
}

export class CsvError extends Error {}

function toNumber(cell: string, column: string, line: number): number {
  if (cell === "inf") return Infinity;
  if (cell === "-inf") return -Infinity;
  const v = Number(cell);
  if (cell.trim() === "" || Number.isNaN(v)) {
    throw new CsvError(
      `row ${line}: column "${column}" has non-numeric value "${cell}"`,
    );
  }
  return v;
}

function toOptionalNumber(
  cell: string,
  column: string,
  line: number,
): number | null {
  if (cell.trim() === "") return null;
  return toNumber(cell, column, line);
}

/** Parse one benchmark CSV. Throws CsvError on a missing column, an empty
 *  table, or a malformed cell — naming the offender. */
export function parseResultsCsv(text: string, source = "<csv>"): ResultRow[] {
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const e = parsed.errors[0];
    throw new CsvError(`${source}: malformed CSV (${e.message} at row ${e.row})`);
  }
  const header = parsed.meta.fields ?? [];
  for (const column of REQUIRED_COLUMNS) {
    if (!header.includes(column)) {
      throw new CsvError(`${source}: missing column "${column}"`);
    }
  }
  if (parsed.data.length === 0) {
    throw new CsvError(`${source}: no data rows`);
  }
  return parsed.data.map((raw, i) => {
    const line = i + 2; // header is line 1
    return {
      d: toNumber(raw.d, "d", line),
      delta: toNumber(raw.delta, "delta", line),
      D: toNumber(raw.D, "D", line),
      snr_db: toNumber(raw.snr_db, "snr_db", line),
      algorithm: raw.algorithm,
      trial: toNumber(raw.trial, "trial", line),
      error_db: toNumber(raw.error_db, "error_db", line),
      time_ms_total: toNumber(raw.time_ms_total, "time_ms_total", line),
      time_ms_solve: toOptionalNumber(raw.time_ms_solve, "time_ms_solve", line),
      time_ms_eig: toOptionalNumber(raw.time_ms_eig, "time_ms_eig", line),
      eig_iters: toOptionalNumber(raw.eig_iters, "eig_iters", line),
      kappa: toOptionalNumber(raw.kappa, "kappa", line),
    };
  });
}
