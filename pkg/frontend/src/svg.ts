/**
 * Hand-rolled SVG line charts for the figure catalogue.
 *
 * The renderer is a pure function of its inputs: no clocks, no randomness,
 * so re-rendering the same CSVs reproduces the file byte for byte. Each
 * curve's cell strings are embedded verbatim in data-x / data-y attributes
 * on its <g> element, which makes the drawn document carry its own data
 * layer. Pixel coordinates are a scaled view of those values; the
 * attributes are the ground truth.
 *
 * Log axes cannot place zero or negative values, so such points are left
 * out of the drawn polyline (the line breaks) while staying in the data
 * attributes.
 */

import { PlotDataError } from "./csv.js";
import { FigureSpec, SeriesData } from "./figures.js";

export interface ChartSeries {
  label: string;
  x: string[];
  y: string[];
  bandLo?: number[];  // translucent band edges, drawn behind the line
  bandHi?: number[];
  color: string;
  dash?: string;      // stroke-dasharray
}

export interface ChartOpts {
  title: string;
  subtitle: string;
  xLabel: string;
  yLabel: string;
  logX: boolean;
  logY: boolean;
  series: ChartSeries[];
}

// ---------------------------------------------------------------------------
// Small helpers
// ---------------------------------------------------------------------------

export function esc(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Round-ish tick positions for a linear axis. */
export function niceTicks(min: number, max: number, count: number): number[] {
  const range = max - min || Math.abs(max) || 1;
  const rough = range / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rough)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => s >= rough) ?? rough;
  const start = Math.ceil(min / step) * step;
  const ticks: number[] = [];
  for (let i = 0; start + i * step <= max + step * 1e-9; i++) {
    ticks.push(start + i * step);
  }
  return ticks;
}

/** Exact powers of ten; Math.pow(10, -4) alone is one ulp off. */
export function pow10(e: number): number {
  return e >= 0 ? Math.pow(10, e) : 1 / Math.pow(10, -e);
}

/** Powers of ten spanning [min, max], thinned to at most nine labels. */
export function decadeTicks(min: number, max: number): number[] {
  const lo = Math.floor(Math.log10(min));
  const hi = Math.ceil(Math.log10(max));
  const step = Math.max(1, Math.ceil((hi - lo) / 8));
  const ticks: number[] = [];
  for (let e = lo; e <= hi; e += step) {
    ticks.push(pow10(e));
  }
  return ticks;
}

export function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e5 || a < 1e-3) {
    return v.toExponential(1).replace(".0e", "e");
  }
  const s = a >= 100 ? v.toFixed(0) : a >= 1 ? v.toFixed(2) : v.toFixed(4);
  return s.includes(".") ? s.replace(/0+$/, "").replace(/\.$/, "") : s;
}

// ---------------------------------------------------------------------------
// Chart builder
// ---------------------------------------------------------------------------

function finitePositive(v: number, log: boolean): boolean {
  return Number.isFinite(v) && (!log || v > 0);
}

/** Split indices into maximal runs of consecutive drawable points. */
function drawableRuns(ok: boolean[]): number[][] {
  const runs: number[][] = [];
  let current: number[] = [];
  for (let i = 0; i < ok.length; i++) {
    if (ok[i]) {
      current.push(i);
    } else if (current.length) {
      runs.push(current);
      current = [];
    }
  }
  if (current.length) runs.push(current);
  return runs;
}

export function buildChart(opts: ChartOpts): string {
  const { series, logX, logY } = opts;

  // Layout
  const W = 760, H = 340;
  const ml = 74, mr = 18, mt = 40, mb = 48;
  const pw = W - ml - mr;
  const ph = H - mt - mb;

  // Numeric views of the data layer
  const nums = series.map((sr) => ({
    x: sr.x.map(Number),
    y: sr.y.map(Number),
  }));

  // Domains span every drawable value, band edges included
  const xVals: number[] = [];
  const yVals: number[] = [];
  series.forEach((sr, s) => {
    for (let i = 0; i < sr.x.length; i++) {
      const xOk = finitePositive(nums[s].x[i], logX);
      const yOk = finitePositive(nums[s].y[i], logY);
      if (xOk && yOk) {
        xVals.push(nums[s].x[i]);
        yVals.push(nums[s].y[i]);
      }
      if (xOk && sr.bandLo && finitePositive(sr.bandLo[i], logY)) yVals.push(sr.bandLo[i]);
      if (xOk && sr.bandHi && finitePositive(sr.bandHi[i], logY)) yVals.push(sr.bandHi[i]);
    }
  });
  if (xVals.length === 0) {
    throw new PlotDataError(`nothing to draw for '${opts.title}' with the given axes`);
  }

  let xLo = Math.min(...xVals), xHi = Math.max(...xVals);
  let yLo = Math.min(...yVals), yHi = Math.max(...yVals);
  if (logX) {
    xLo = pow10(Math.floor(Math.log10(xLo)));
    xHi = pow10(Math.ceil(Math.log10(xHi)));
    if (xLo === xHi) xHi *= 10;
  } else if (xLo === xHi) {
    const pad = Math.max(Math.abs(xLo) * 0.05, 0.5);
    xLo -= pad;
    xHi += pad;
  }
  if (logY) {
    yLo = pow10(Math.floor(Math.log10(yLo)));
    yHi = pow10(Math.ceil(Math.log10(yHi)));
    if (yLo === yHi) yHi *= 10;
  } else {
    const pad = 0.04 * (yHi - yLo || Math.abs(yHi) || 1);
    yLo -= pad;
    yHi += pad;
  }

  const xSpan = logX ? Math.log10(xHi) - Math.log10(xLo) : xHi - xLo;
  const ySpan = logY ? Math.log10(yHi) - Math.log10(yLo) : yHi - yLo;
  const xOf = (v: number) =>
    ml + ((logX ? Math.log10(v) - Math.log10(xLo) : v - xLo) / (xSpan || 1)) * pw;
  const yOf = (v: number) =>
    mt + ph - ((logY ? Math.log10(v) - Math.log10(yLo) : v - yLo) / (ySpan || 1)) * ph;

  const xTicks = logX ? decadeTicks(xLo, xHi) : niceTicks(xLo, xHi, 8);
  const yTicks = logY ? decadeTicks(yLo, yHi) : niceTicks(yLo, yHi, 5);

  let s = `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${W} ${H}" font-family="Helvetica, Arial, sans-serif">\n`;
  s += `<rect width="${W}" height="${H}" fill="#fff"/>\n`;

  // Title + subtitle
  s += `<text x="${ml}" y="16" font-size="12" font-weight="600" fill="#222">${esc(opts.title)}</text>\n`;
  s += `<text x="${ml}" y="30" font-size="8" fill="#888">${esc(opts.subtitle)}</text>\n`;

  // Clip path for everything inside the axes
  s += `<defs><clipPath id="clip"><rect x="${ml}" y="${mt}" width="${pw}" height="${ph}"/></clipPath></defs>\n`;

  // Horizontal grid
  for (const v of yTicks) {
    const y = yOf(v).toFixed(2);
    s += `<line x1="${ml}" y1="${y}" x2="${ml + pw}" y2="${y}" stroke="#eee" stroke-width="0.5"/>\n`;
  }

  // Series: each <g> carries its own data layer verbatim
  for (let k = 0; k < series.length; k++) {
    const sr = series[k];
    const xs = nums[k].x;
    const ys = nums[k].y;
    const ok = xs.map(
      (x, i) => finitePositive(x, logX) && finitePositive(ys[i], logY)
    );
    s += `<g class="series" data-label="${esc(sr.label)}" data-x="${esc(sr.x.join(" "))}" data-y="${esc(sr.y.join(" "))}">\n`;

    if (sr.bandLo && sr.bandHi) {
      const bandOk = xs.map(
        (x, i) =>
          finitePositive(x, logX) &&
          finitePositive(sr.bandLo![i], logY) &&
          finitePositive(sr.bandHi![i], logY)
      );
      for (const run of drawableRuns(bandOk)) {
        if (run.length < 2) continue;
        const forward = run.map((i) => `${xOf(xs[i]).toFixed(2)},${yOf(sr.bandHi![i]).toFixed(2)}`);
        const backward = run.slice().reverse().map((i) => `${xOf(xs[i]).toFixed(2)},${yOf(sr.bandLo![i]).toFixed(2)}`);
        s += `<polygon class="band" clip-path="url(#clip)" fill="${sr.color}" fill-opacity="0.15" stroke="none" points="${forward.concat(backward).join(" ")}"/>\n`;
      }
    }

    for (const run of drawableRuns(ok)) {
      if (run.length === 1) {
        const i = run[0];
        s += `<circle clip-path="url(#clip)" cx="${xOf(xs[i]).toFixed(2)}" cy="${yOf(ys[i]).toFixed(2)}" r="2" fill="${sr.color}"/>\n`;
        continue;
      }
      const pts = run.map((i) => `${xOf(xs[i]).toFixed(2)},${yOf(ys[i]).toFixed(2)}`).join(" ");
      s += `<polyline clip-path="url(#clip)" fill="none" stroke="${sr.color}" stroke-width="1.2"${sr.dash ? ` stroke-dasharray="${sr.dash}"` : ""} points="${pts}"/>\n`;
    }
    s += `</g>\n`;
  }

  // Axes frame
  s += `<line x1="${ml}" y1="${mt}" x2="${ml}" y2="${mt + ph}" stroke="#333" stroke-width="0.7"/>\n`;
  s += `<line x1="${ml}" y1="${mt + ph}" x2="${ml + pw}" y2="${mt + ph}" stroke="#333" stroke-width="0.7"/>\n`;

  // X ticks + axis label
  for (const v of xTicks) {
    const x = xOf(v).toFixed(2);
    s += `<line x1="${x}" y1="${mt + ph}" x2="${x}" y2="${mt + ph + 3}" stroke="#333" stroke-width="0.5"/>\n`;
    s += `<text x="${x}" y="${mt + ph + 13}" text-anchor="middle" font-size="7" fill="#666">${esc(fmtTick(v))}</text>\n`;
  }
  s += `<text x="${ml + pw / 2}" y="${H - 8}" text-anchor="middle" font-size="9" fill="#444">${esc(opts.xLabel)}</text>\n`;

  // Y ticks + rotated axis label
  for (const v of yTicks) {
    const y = yOf(v);
    s += `<line x1="${ml - 3}" y1="${y.toFixed(2)}" x2="${ml}" y2="${y.toFixed(2)}" stroke="#333" stroke-width="0.5"/>\n`;
    s += `<text x="${ml - 5}" y="${(y + 2.5).toFixed(2)}" text-anchor="end" font-size="7" fill="#666">${esc(fmtTick(v))}</text>\n`;
  }
  s += `<text x="14" y="${mt + ph / 2}" text-anchor="middle" font-size="9" fill="#444" transform="rotate(-90,14,${mt + ph / 2})">${esc(opts.yLabel)}</text>\n`;

  // Legend, top right
  const legendW = Math.max(...series.map((sr) => sr.label.length)) * 4.8 + 28;
  const legendH = series.length * 12 + 6;
  const lx = ml + pw - legendW - 4;
  const ly = mt + 4;
  s += `<rect x="${lx}" y="${ly}" width="${legendW}" height="${legendH}" rx="2" fill="white" fill-opacity="0.85" stroke="#ddd" stroke-width="0.5"/>\n`;
  series.forEach((sr, k) => {
    const rowY = ly + 10 + k * 12;
    s += `<line x1="${lx + 6}" y1="${rowY}" x2="${lx + 20}" y2="${rowY}" stroke="${sr.color}" stroke-width="1.2"${sr.dash ? ` stroke-dasharray="${sr.dash}"` : ""}/>\n`;
    s += `<text x="${lx + 24}" y="${rowY + 2.5}" font-size="7" fill="#444">${esc(sr.label)}</text>\n`;
  });

  s += `</svg>\n`;
  return s;
}

// ---------------------------------------------------------------------------
// Figure assembly
// ---------------------------------------------------------------------------

const PALETTE = ["#4361ee", "#e63946", "#2d6a4f", "#f77f00", "#9d4edd", "#0096c7"];

/** The error-free reference is drawn grey and dashed, swept labels colored. */
export function renderFigure(spec: FigureSpec, data: SeriesData[], subtitle: string): string {
  let next = 0;
  const styled: ChartSeries[] = data.map((sr) =>
    sr.label === "error_free"
      ? { ...sr, color: "#555", dash: "6,3" }
      : { ...sr, color: PALETTE[next++ % PALETTE.length] }
  );
  return buildChart({
    title: spec.title,
    subtitle,
    xLabel: spec.xLabel,
    yLabel: spec.yLabel,
    logX: spec.logX,
    logY: spec.logY,
    series: styled,
  });
}
