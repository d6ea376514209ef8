/**
 * Radial figures: a field quantity against distance to the crack tip,
 * one curve per sweep value, read straight from radial.csv files.
 */

import { readFileSync } from "fs";
import { parseCsv, column } from "./csv.js";
import type { RadialFigure, Quantity } from "./figspec.js";
import { expandInputs, sweepValueFromPath } from "./inputs.js";
import { buildFigure, PALETTE, type Panel } from "./svg.js";

/** y columns and panel titles per quantity */
const QUANTITY_PANELS: Record<Quantity, Array<[string, string]>> = {
  strain_norm: [["eps_frob", "strain norm"]],
  energy: [["energy", "strain energy density"]],
  stress_norm_components: [
    ["T11_norm", "T11 / sigma_T"],
    ["T22_norm", "T22 / sigma_T"],
    ["T12_norm", "T12 / sigma_T"],
  ],
};

const X_COLUMN = "r";
const X_LABEL = "distance to crack tip r";

export function renderRadial(fig: RadialFigure, cwd: string): string {
  const files = expandInputs(fig.input, cwd);
  const panelsSpec = QUANTITY_PANELS[fig.quantity];

  // parse and order by swept value before touching any output
  const inputs = files
    .map((file) => ({
      file,
      value: sweepValueFromPath(file, fig.groupBy),
      table: parseCsv(readFileSync(file, "utf8")),
    }))
    .sort((a, b) => a.value - b.value);

  const panels: Panel[] = panelsSpec.map(([col, title]) => ({
    title: fig.title && panelsSpec.length === 1 ? fig.title : title,
    xLabel: X_LABEL,
    yLabel: title,
    curves: inputs.map((inp, i) => ({
      label: `${fig.groupBy} = ${inp.value}`,
      x: column(inp.table, X_COLUMN),
      y: column(inp.table, col),
      src: inp.file,
      color: PALETTE[i % PALETTE.length],
    })),
  }));

  return buildFigure(panels);
}
