#!/usr/bin/env node
/**
 * plot: render SVG figure panels from simulator sweep outputs.
 *
 * Usage:
 *   plot --figure fig2b --in results/ --out charts/
 *   plot --figure all   --in results/ --out charts/
 *
 * --in accepts either a directory holding one subdirectory per sweep
 * (fig2_stepsizes/, fig6_timing/, ...) or a single sweep directory with
 * manifest.json at its top level.
 */

import { existsSync, mkdirSync, realpathSync, writeFileSync } from "fs";
import path from "path";
import { pathToFileURL } from "url";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { PlotDataError } from "./csv.js";
import { figureData, figureNames, figureSpec, FigureSpec } from "./figures.js";
import { readManifest } from "./manifest.js";
import { renderFigure } from "./svg.js";

function findScenarioDir(inDir: string, scenario: string): string {
  for (const candidate of [path.join(inDir, scenario), inDir]) {
    if (!existsSync(path.join(candidate, "manifest.json"))) continue;
    if (readManifest(candidate).scenario === scenario) return candidate;
  }
  throw new PlotDataError(
    `no outputs for sweep '${scenario}' under ${inDir} ` +
      `(expected ${path.join(inDir, scenario, "manifest.json")})`
  );
}

function subtitleFor(dir: string): string {
  const manifest = readManifest(dir);
  const runs = new Set(Object.values(manifest.labels).map((label) => label.runs));
  const parts = [`sweep ${manifest.scenario}`];
  if (runs.size === 1) parts.push(`${[...runs][0]} runs per series`);
  return parts.join(" · ");
}

/** Render one panel, or every panel, into outDir. Returns the files written. */
export function renderToFiles(figure: string, inDir: string, outDir: string): string[] {
  const names = figure === "all" ? figureNames() : [figureSpec(figure).name];
  try {
    mkdirSync(outDir, { recursive: true });
  } catch (err) {
    throw new PlotDataError(`cannot create ${outDir}: ${(err as Error).message}`);
  }
  const written: string[] = [];
  for (const name of names) {
    const spec: FigureSpec = figureSpec(name);
    const dir = findScenarioDir(inDir, spec.scenario);
    const svg = renderFigure(spec, figureData(spec, dir), subtitleFor(dir));
    const outPath = path.join(outDir, `${name}.svg`);
    try {
      writeFileSync(outPath, svg);
    } catch (err) {
      throw new PlotDataError(`cannot write ${outPath}: ${(err as Error).message}`);
    }
    written.push(outPath);
  }
  return written;
}

/** Parse CLI words and run; exported so tests can drive the flag handling. */
export function runCli(argv: string[]): string[] {
  const args = yargs(argv)
    .scriptName("plot")
    .usage("$0 --figure <name> --in <dir> --out <dir>")
    .option("figure", {
      type: "string",
      demandOption: true,
      describe: "panel name, or 'all' for every panel",
    })
    .option("in", {
      type: "string",
      demandOption: true,
      describe: "simulator output directory",
    })
    .option("out", {
      type: "string",
      demandOption: true,
      describe: "directory for the rendered SVG files",
    })
    .strict()
    .exitProcess(false)
    .fail((msg, err) => {
      throw err ?? new PlotDataError(msg);
    })
    .parseSync();
  return renderToFiles(args.figure, args.in, args.out);
}

function isMain(): boolean {
  if (!process.argv[1]) return false;
  try {
    return import.meta.url === pathToFileURL(realpathSync(process.argv[1])).href;
  } catch {
    return false;
  }
}

if (isMain()) {
  try {
    for (const file of runCli(hideBin(process.argv))) {
      console.log(`SVG → ${file}`);
    }
  } catch (err) {
    console.error("Fatal:", err instanceof Error ? err.message : err);
    process.exit(1);
  }
}
