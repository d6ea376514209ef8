/**
 * Crack-opening figures: the face displacement u2 against x from the
 * crack mouth to the tip, one curve per matched opening.csv.
 */

import { readFileSync } from "fs";
import { parseCsv, column } from "./csv.js";
import type { OpeningFigure } from "./figspec.js";
import { expandInputs, pathLabels } from "./inputs.js";
import { buildFigure, PALETTE } from "./svg.js";

export function renderOpening(fig: OpeningFigure, cwd: string): string {
  const files = expandInputs(fig.input, cwd);
  const labels = pathLabels(files);

  const curves = files.map((file, i) => {
    const table = parseCsv(readFileSync(file, "utf8"));
    return {
      label: labels[i],
      x: column(table, "x"),
      y: column(table, "u2"),
      src: file,
      color: PALETTE[i % PALETTE.length],
    };
  });

  return buildFigure([
    {
      title: fig.title ?? "crack opening",
      xLabel: "x",
      yLabel: "u2",
      curves,
    },
  ]);
}
