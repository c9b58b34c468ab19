/**
 * Tiny hand-written sweep directories for the tests. Values are chosen to
 * be exactly representable in binary floating point (halves, quarters,
 * eighths) so the exactness assertions are about plumbing, not rounding.
 */

import { mkdirSync, mkdtempSync, writeFileSync } from "fs";
import os from "os";
import path from "path";

export const AGGREGATE_HEADER =
  "round,sim_time_s_mean,violation_mean,violation_stderr,objective_mean,objective_stderr,participants_mean";
export const ROUNDS_HEADER =
  "run_id,round,sim_time_s,participants,violation,objective,price,sum_rate";

export function tmpDir(): string {
  return mkdtempSync(path.join(os.tmpdir(), "plots-"));
}

export interface LabelFixture {
  label: string;
  aggregate?: string[]; // data lines placed under AGGREGATE_HEADER
  rounds?: string[];    // data lines placed under ROUNDS_HEADER
  summary?: Record<string, unknown>;
}

/**
 * Write manifest.json plus per-label CSVs. By default the sweep lands in
 * root/<scenario>/ the way the simulator lays out a results tree; pass
 * nested: false to write into root directly.
 */
export function writeScenario(
  root: string,
  scenario: string,
  labels: LabelFixture[],
  opts: { nested?: boolean } = {}
): string {
  const dir = opts.nested === false ? root : path.join(root, scenario);
  mkdirSync(dir, { recursive: true });
  const manifest: { scenario: string; labels: Record<string, unknown> } = {
    scenario,
    labels: {},
  };
  for (const lf of labels) {
    manifest.labels[lf.label] = {
      use_case: "fdma",
      channel: lf.label === "error_free" ? "error_free" : "aircomp",
      beta: 10000.0,
      rounds: lf.aggregate?.length ?? lf.rounds?.length ?? 0,
      runs: 2,
      diverged_runs: 0,
      ...lf.summary,
    };
    if (lf.aggregate) {
      writeFileSync(
        path.join(dir, `${lf.label}.aggregate.csv`),
        [AGGREGATE_HEADER, ...lf.aggregate].join("\n") + "\n"
      );
    }
    if (lf.rounds) {
      writeFileSync(
        path.join(dir, `${lf.label}.rounds.csv`),
        [ROUNDS_HEADER, ...lf.rounds].join("\n") + "\n"
      );
    }
  }
  writeFileSync(path.join(dir, "manifest.json"), JSON.stringify(manifest, null, 2) + "\n");
  return dir;
}

/** Pull every series' embedded data layer back out of a rendered SVG. */
export function seriesLayer(svg: string): { label: string; x: string[]; y: string[] }[] {
  const out: { label: string; x: string[]; y: string[] }[] = [];
  const re = /<g class="series" data-label="([^"]*)" data-x="([^"]*)" data-y="([^"]*)"/g;
  for (let m = re.exec(svg); m !== null; m = re.exec(svg)) {
    out.push({ label: m[1], x: m[2].split(" "), y: m[3].split(" ") });
  }
  return out;
}

/** Count coordinate pairs drawn inside one series group. */
export function drawnPointCount(svg: string, label: string): number {
  const group = svg.split(`data-label="${label}"`)[1]?.split("</g>")[0] ?? "";
  let count = 0;
  const polyRe = /points="([^"]*)"/g;
  for (let m = polyRe.exec(group); m !== null; m = polyRe.exec(group)) {
    count += m[1].split(" ").length;
  }
  count += (group.match(/<circle/g) ?? []).length;
  return count;
}

/** Two-curve step-size sweep, enough for the fig2 panels. */
export function fig2Fixture(root: string, opts: { nested?: boolean } = {}): string {
  return writeScenario(
    root,
    "fig2_stepsizes",
    [
      {
        label: "step_c2_1000",
        aggregate: [
          "1,0.000128,1861000.5,5200.25,-3059881.125,1500.5,9.5",
          "2,0.000256,930500.25,2600.125,-3100440.0625,750.25,10.0",
        ],
      },
      {
        label: "step_c2_10000",
        aggregate: [
          "1,0.000128,1200000.5,4100.5,-3080000.5,1200.125,9.0",
          "2,0.000256,600000.25,2050.25,-3120000.25,600.0625,9.5",
        ],
      },
      {
        label: "step_c2_100000",
        aggregate: [
          "1,0.000128,900000.125,3000.0,-3090000.75,900.5,9.75",
          "2,0.000256,0.0,0.0,-3140000.375,450.25,10.0",
        ],
      },
      {
        label: "error_free",
        aggregate: [
          "1,0.005232,850000.0,2900.5,-3100000.5,850.125,10.0",
          "2,0.010464,0.0,0.0,-3160000.125,425.0625,10.0",
        ],
        summary: { channel: "error_free" },
      },
    ],
    opts
  );
}
