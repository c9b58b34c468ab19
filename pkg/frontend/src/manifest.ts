/**
 * Reader for the manifest.json the simulator drops next to its CSV files.
 *
 * The manifest names every label in a sweep, and the label strings double
 * as file prefixes: <label>.aggregate.csv and <label>.rounds.csv live in
 * the same directory.
 */

import { readFileSync } from "fs";
import path from "path";
import { PlotDataError } from "./csv.js";

export interface LabelSummary {
  use_case: string;
  channel: string;
  beta: number;
  rounds: number;
  runs: number;
  diverged_runs: number;
  [extra: string]: unknown; // per-case summary fields ride along untyped
}

export interface Manifest {
  scenario: string;
  labels: Record<string, LabelSummary>;
}

export function readManifest(dir: string): Manifest {
  const file = path.join(dir, "manifest.json");
  let text: string;
  try {
    text = readFileSync(file, "utf-8");
  } catch (err) {
    throw new PlotDataError(`cannot read ${file}: ${(err as Error).message}`);
  }
  let parsed: Manifest;
  try {
    parsed = JSON.parse(text) as Manifest;
  } catch (err) {
    throw new PlotDataError(`malformed JSON in ${file}: ${(err as Error).message}`);
  }
  if (typeof parsed.scenario !== "string" || typeof parsed.labels !== "object"
      || parsed.labels === null) {
    throw new PlotDataError(`unexpected manifest shape in ${file}`);
  }
  return parsed;
}

/**
 * Deterministic drawing order: swept labels alphabetically, the error-free
 * reference last so it is drawn on top of the stack.
 */
export function seriesOrder(manifest: Manifest): string[] {
  const labels = Object.keys(manifest.labels).sort();
  const swept = labels.filter((label) => label !== "error_free");
  return swept.concat(labels.filter((label) => label === "error_free"));
}
