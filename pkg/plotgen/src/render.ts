/**
 * Figure dispatch: render every figure of a spec, writing each SVG only
 * after its content built cleanly, so a failed figure leaves no file.
 */

import { mkdirSync, writeFileSync } from "fs";
import { dirname, isAbsolute, resolve } from "path";
import { loadFigureSpec, type Figure } from "./figspec.js";
import { renderHeatmap } from "./heatmap.js";
import { renderOpening } from "./opening.js";
import { renderRadial } from "./radial.js";

export interface FigureResult {
  /** absolute path of the written image */
  output: string;
  kind: Figure["kind"];
}

export function renderFigure(fig: Figure, cwd: string): FigureResult {
  let svg: string;
  switch (fig.kind) {
    case "radial":
      svg = renderRadial(fig, cwd);
      break;
    case "opening":
      svg = renderOpening(fig, cwd);
      break;
    case "heatmap":
      svg = renderHeatmap(fig, cwd);
      break;
  }
  const out = isAbsolute(fig.output) ? fig.output : resolve(cwd, fig.output);
  mkdirSync(dirname(out), { recursive: true });
  writeFileSync(out, svg);
  return { output: out, kind: fig.kind };
}

export interface SpecRunReport {
  results: FigureResult[];
  /** one entry per failed figure: [output path from the spec, message] */
  errors: Array<[string, string]>;
}

/** Render all figures of a spec file; failures skip the figure, not the run. */
export function renderSpecFile(specPath: string): SpecRunReport {
  const spec = loadFigureSpec(specPath);
  const cwd = dirname(resolve(specPath));
  const results: FigureResult[] = [];
  const errors: Array<[string, string]> = [];
  for (const fig of spec.figures) {
    try {
      results.push(renderFigure(fig, cwd));
    } catch (e) {
      errors.push([fig.output, (e as Error).message]);
    }
  }
  return { results, errors };
}
