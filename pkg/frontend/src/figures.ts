/**
 * The figure catalogue: which sweep each panel reads, which columns it
 * plots, and how the axes are scaled.
 *
 * Every panel's data layer is lifted straight out of CSV cells. The two
 * departures are spelled out where they happen: the sum-rate panels flip
 * the sign of the logged objective (the solver minimizes the negated sum
 * rate, and IEEE negation is exact), and the price panel averages the
 * per-run price column because the aggregate table does not carry one.
 */

import path from "path";
import { column, CsvTable, PlotDataError, readCsv } from "./csv.js";
import { readManifest, seriesOrder } from "./manifest.js";

export interface FigureSpec {
  name: string;
  scenario: string;          // sweep directory the panel reads
  source: "aggregate" | "rounds_mean";
  xColumn: string;
  yColumn: string;
  stderrColumn?: string;     // half-width of the error band, aggregate only
  negate: boolean;           // display -y instead of y (exact sign flip)
  logX: boolean;
  logY: boolean;
  title: string;
  xLabel: string;
  yLabel: string;
}

const AGGREGATE_DEFAULTS = {
  source: "aggregate" as const,
  xColumn: "round",
  negate: false,
  logX: false,
  logY: false,
  xLabel: "optimization round",
};

export const FIGURES: Record<string, FigureSpec> = {
  fig2a: {
    ...AGGREGATE_DEFAULTS,
    name: "fig2a",
    scenario: "fig2_stepsizes",
    yColumn: "objective_mean",
    stderrColumn: "objective_stderr",
    negate: true,
    title: "Sum rate against rounds for three step schedules",
    yLabel: "mean sum rate (bit/s)",
  },
  fig2b: {
    ...AGGREGATE_DEFAULTS,
    name: "fig2b",
    scenario: "fig2_stepsizes",
    yColumn: "violation_mean",
    stderrColumn: "violation_stderr",
    title: "Constraint violation for three step schedules",
    yLabel: "mean constraint violation (bit/s)",
  },
  fig3a: {
    ...AGGREGATE_DEFAULTS,
    name: "fig3a",
    scenario: "fig3_beta_caseB",
    yColumn: "objective_mean",
    stderrColumn: "objective_stderr",
    negate: true,
    title: "Sum rate across power-control settings",
    yLabel: "mean sum rate (bit/s)",
  },
  fig3b: {
    ...AGGREGATE_DEFAULTS,
    name: "fig3b",
    scenario: "fig3_beta_caseB",
    yColumn: "violation_mean",
    stderrColumn: "violation_stderr",
    title: "Constraint violation across power-control settings",
    yLabel: "mean constraint violation (bit/s)",
  },
  fig4a: {
    ...AGGREGATE_DEFAULTS,
    name: "fig4a",
    scenario: "fig4_beta_caseA",
    yColumn: "violation_mean",
    stderrColumn: "violation_stderr",
    logY: true,
    title: "Constraint violation across power-control settings, energy market",
    yLabel: "mean constraint violation",
  },
  fig4b: {
    ...AGGREGATE_DEFAULTS,
    name: "fig4b",
    scenario: "fig4_beta_caseA",
    source: "rounds_mean",
    yColumn: "price",
    title: "Negotiated price across power-control settings",
    yLabel: "mean price per MWh",
  },
  fig5: {
    ...AGGREGATE_DEFAULTS,
    name: "fig5",
    scenario: "fig5_dualset",
    yColumn: "violation_mean",
    stderrColumn: "violation_stderr",
    logY: true,
    title: "Constraint violation across dual-set growth settings",
    yLabel: "mean constraint violation",
  },
  fig6: {
    ...AGGREGATE_DEFAULTS,
    name: "fig6",
    scenario: "fig6_timing",
    xColumn: "sim_time_s_mean",
    yColumn: "violation_mean",
    stderrColumn: "violation_stderr",
    logX: true,
    title: "Constraint violation against elapsed air time",
    xLabel: "elapsed air time (s)",
    yLabel: "mean constraint violation (bit/s)",
  },
};

export function figureNames(): string[] {
  return Object.keys(FIGURES);
}

export function figureSpec(name: string): FigureSpec {
  const spec = FIGURES[name];
  if (!spec) {
    throw new PlotDataError(
      `unknown figure '${name}'; valid figures: ${figureNames().join(", ")}, or all`
    );
  }
  return spec;
}

/** One curve: raw cell strings plus optional error-band edges. */
export interface SeriesData {
  label: string;
  x: string[];
  y: string[];
  bandLo?: number[];
  bandHi?: number[];
}

/** Textual sign flip; exact because "-3.5" and "3.5" parse to exact negations. */
function flipSign(raw: string): string {
  return raw.startsWith("-") ? raw.slice(1) : "-" + raw;
}

function aggregateSeries(spec: FigureSpec, dir: string, label: string): SeriesData {
  const table = readCsv(path.join(dir, `${label}.aggregate.csv`));
  const x = column(table, spec.xColumn);
  const rawY = column(table, spec.yColumn);
  const y = spec.negate ? rawY.map(flipSign) : rawY;
  const series: SeriesData = { label, x, y };
  if (spec.stderrColumn) {
    const halfWidth = column(table, spec.stderrColumn).map(Number);
    const mid = y.map(Number);
    series.bandLo = mid.map((v, i) => v - halfWidth[i]);
    series.bandHi = mid.map((v, i) => v + halfWidth[i]);
  }
  return series;
}

function cell(table: CsvTable, values: string[], col: string, i: number): number {
  if (values[i] === "") {
    throw new PlotDataError(`empty '${col}' cell in ${table.path} (row ${i + 2})`);
  }
  return Number(values[i]);
}

function roundsMeanSeries(spec: FigureSpec, dir: string, label: string): SeriesData {
  // Group per-run rows by round and average. Runs can stop at different
  // rounds (staged games settle after different stage counts); a round
  // averages whatever runs recorded it. Unlike the simulator's aggregate
  // table, the rounds table does not flag diverged runs, so they are in.
  const table = readCsv(path.join(dir, `${label}.rounds.csv`));
  const rounds = column(table, spec.xColumn);
  const values = column(table, spec.yColumn);
  const groups = new Map<string, { total: number; count: number }>();
  for (let i = 0; i < rounds.length; i++) {
    const group = groups.get(rounds[i]) ?? { total: 0, count: 0 };
    group.total += cell(table, values, spec.yColumn, i);
    group.count += 1;
    groups.set(rounds[i], group);
  }
  const order = Array.from(groups.keys()).sort((a, b) => Number(a) - Number(b));
  return {
    label,
    x: order,
    y: order.map((key) => {
      const group = groups.get(key)!;
      return String(group.total / group.count);
    }),
  };
}

/** Load every curve of a panel from a resolved sweep directory. */
export function figureData(spec: FigureSpec, scenarioDir: string): SeriesData[] {
  const manifest = readManifest(scenarioDir);
  if (manifest.scenario !== spec.scenario) {
    throw new PlotDataError(
      `${scenarioDir} holds sweep '${manifest.scenario}', but ${spec.name} needs '${spec.scenario}'`
    );
  }
  return seriesOrder(manifest).map((label) =>
    spec.source === "aggregate"
      ? aggregateSeries(spec, scenarioDir, label)
      : roundsMeanSeries(spec, scenarioDir, label)
  );
}
