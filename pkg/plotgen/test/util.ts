// Shared helpers for reading rendered SVGs back in tests.

import { readFileSync } from "fs";

export interface PlottedCurve {
  label: string;
  src: string;
  x: string[];
  y: string[];
}

function attr(tag: string, name: string): string {
  const m = tag.match(new RegExp(`${name}="([^"]*)"`));
  if (!m) throw new Error(`polyline without ${name}: ${tag.slice(0, 120)}`);
  return m[1];
}

/** Every curve in an SVG, in document order, via its data attributes. */
export function plottedCurves(svg: string): PlottedCurve[] {
  const tags = svg.match(/<polyline[^>]*>/g) ?? [];
  return tags.map((t) => ({
    label: attr(t, "data-label"),
    src: attr(t, "data-src"),
    x: attr(t, "data-x").split(" "),
    y: attr(t, "data-y").split(" "),
  }));
}

/** Independent CSV column read: raw tokens, no library code involved. */
export function csvTokens(file: string, col: string): string[] {
  const lines = readFileSync(file, "utf8").trim().split("\n");
  const idx = lines[0].split(",").indexOf(col);
  if (idx < 0) throw new Error(`${file}: no column ${col}`);
  return lines.slice(1).map((l) => l.split(",")[idx]);
}
