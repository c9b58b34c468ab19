/**
 * Minimal CSV reader for the simulator's output tables.
 *
 * The simulator writes plain numeric columns with no quoting and no
 * embedded commas, so a line split is a complete parser. Cells are kept
 * as the exact strings found in the file: the renderer embeds them
 * verbatim in the SVG data layer, and a float round-trip here would break
 * that guarantee.
 */

import { readFileSync } from "fs";

/** Anything wrong with the input data or where it should have been. */
export class PlotDataError extends Error {}

export interface CsvTable {
  path: string;       // origin of the bytes, quoted in error messages
  header: string[];
  rows: string[][];
}

export function parseCsv(text: string, path: string): CsvTable {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new PlotDataError(`empty CSV: ${path}`);
  }
  const header = lines[0].split(",");
  const rows = lines.slice(1).map((line) => line.split(","));
  if (rows.length === 0) {
    throw new PlotDataError(`no data rows in ${path}`);
  }
  for (let i = 0; i < rows.length; i++) {
    if (rows[i].length !== header.length) {
      throw new PlotDataError(
        `ragged row ${i + 2} in ${path}: expected ${header.length} cells, got ${rows[i].length}`
      );
    }
  }
  return { path, header, rows };
}

export function readCsv(path: string): CsvTable {
  let text: string;
  try {
    text = readFileSync(path, "utf-8");
  } catch (err) {
    throw new PlotDataError(`cannot read ${path}: ${(err as Error).message}`);
  }
  return parseCsv(text, path);
}

/** One column as raw strings; an unknown name fails naming the file. */
export function column(table: CsvTable, name: string): string[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new PlotDataError(
      `column '${name}' missing from ${table.path} (found: ${table.header.join(", ")})`
    );
  }
  return table.rows.map((row) => row[idx]);
}
