/**
 * Displacement heatmap: each mesh quad filled by the displacement at its
 * corners (averaged), read from the solver's field.vtk. Deliberately
 * simple, no interpolation beyond the per-cell fill.
 */

import { readFileSync } from "fs";
import type { HeatmapFigure, HeatField } from "./figspec.js";
import { expandInputs } from "./inputs.js";
import { esc } from "./svg.js";
import { parseVtk, type VtkGrid } from "./vtk.js";

// cold-to-hot stops, interpolated linearly in RGB
const STOPS = ["#313695", "#74add1", "#ffffbf", "#f46d43", "#a50026"];

function hex2rgb(h: string): [number, number, number] {
  return [
    parseInt(h.slice(1, 3), 16),
    parseInt(h.slice(3, 5), 16),
    parseInt(h.slice(5, 7), 16),
  ];
}

export function colorAt(t: number): string {
  const c = Math.min(Math.max(t, 0), 1) * (STOPS.length - 1);
  const i = Math.min(Math.floor(c), STOPS.length - 2);
  const f = c - i;
  const a = hex2rgb(STOPS[i]);
  const b = hex2rgb(STOPS[i + 1]);
  const mix = a.map((v, k) => Math.round(v + (b[k] - v) * f));
  return `rgb(${mix[0]},${mix[1]},${mix[2]})`;
}

function nodeValue(grid: VtkGrid, field: HeatField, n: number): number {
  const disp = grid.vectors.get("displacement");
  if (!disp) {
    throw new Error('VTK file has no "displacement" point vectors');
  }
  const [u1, u2] = disp[n];
  if (field === "u1") return u1;
  if (field === "u2") return u2;
  return Math.hypot(u1, u2);
}

export function renderHeatmap(fig: HeatmapFigure, cwd: string): string {
  const files = expandInputs(fig.input, cwd);
  if (files.length !== 1) {
    throw new Error(
      `heatmap needs exactly one field.vtk, glob "${fig.input}" matched ${files.length}`
    );
  }
  const grid = parseVtk(readFileSync(files[0], "utf8"));

  const cellVals = grid.cells.map(
    (c) => c.reduce((acc, n) => acc + nodeValue(grid, fig.field, n), 0) / 4
  );
  const vMin = Math.min(...cellVals);
  const vMax = Math.max(...cellVals);
  const span = vMax - vMin || 1;

  const xs = grid.points.map((p) => p[0]);
  const ys = grid.points.map((p) => p[1]);
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const yMin = Math.min(...ys);
  const yMax = Math.max(...ys);

  // fit the mesh into a fixed canvas preserving aspect ratio
  const PW = 640;
  const PH = Math.max(120, Math.round((PW * (yMax - yMin)) / (xMax - xMin || 1)));
  const M = 36;
  const BAR_W = 70;
  const W = PW + 2 * M + BAR_W;
  const H = PH + 2 * M;
  const xOf = (v: number) => M + ((v - xMin) / (xMax - xMin || 1)) * PW;
  const yOf = (v: number) => M + PH - ((v - yMin) / (yMax - yMin || 1)) * PH;

  let s = `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${W} ${H}" font-family="Helvetica, Arial, sans-serif">\n`;
  s += `<rect width="${W}" height="${H}" fill="#fff"/>\n`;
  s += `<text x="${M}" y="${M - 10}" font-size="11" font-weight="600" fill="#222">${esc(fig.title ?? `displacement ${fig.field}`)}</text>\n`;

  grid.cells.forEach((cell, e) => {
    const pts = cell
      .map((n) => `${xOf(grid.points[n][0]).toFixed(1)},${yOf(grid.points[n][1]).toFixed(1)}`)
      .join(" ");
    const fill = colorAt((cellVals[e] - vMin) / span);
    s += `<polygon points="${pts}" fill="${fill}" stroke="${fill}" stroke-width="0.4"/>\n`;
  });

  // colorbar with end labels
  const bx = PW + M + 18;
  const STEPS = 24;
  for (let i = 0; i < STEPS; i++) {
    const y0 = M + PH - ((i + 1) / STEPS) * PH;
    s += `<rect x="${bx}" y="${y0.toFixed(1)}" width="12" height="${(PH / STEPS + 0.5).toFixed(1)}" fill="${colorAt((i + 0.5) / STEPS)}"/>\n`;
  }
  s += `<text x="${bx + 16}" y="${M + 6}" font-size="8" fill="#333">${esc(vMax.toPrecision(4))}</text>\n`;
  s += `<text x="${bx + 16}" y="${M + PH}" font-size="8" fill="#333">${esc(vMin.toPrecision(4))}</text>\n`;

  s += `</svg>\n`;
  return s;
}
