/**
 * Figure-spec file: a JSON document listing the figures to render.
 *
 * {
 *   "figures": [
 *     {"kind": "radial", "input": <glob over radial.csv files>,
 *      "quantity": "strain_norm", "group_by": "beta",
 *      "output": "figs/strain.svg"},
 *     {"kind": "opening", "input": <glob over opening.csv files>,
 *      "output": "figs/opening.svg"},
 *     {"kind": "heatmap", "input": "out/fiber-x/beta-1/field.vtk",
 *      "field": "u2", "output": "figs/u2.svg"}
 *   ]
 * }
 *
 * Relative input globs and output paths resolve against the directory
 * holding the spec file, so a spec can travel with its data.
 */

import { readFileSync } from "fs";

export type Quantity = "strain_norm" | "stress_norm_components" | "energy";
export type GroupBy = "beta" | "alpha" | "sigma_T";
export type HeatField = "u1" | "u2" | "magnitude";

export interface RadialFigure {
  kind: "radial";
  input: string;
  quantity: Quantity;
  groupBy: GroupBy;
  output: string;
  title?: string;
}

export interface OpeningFigure {
  kind: "opening";
  input: string;
  output: string;
  title?: string;
}

export interface HeatmapFigure {
  kind: "heatmap";
  input: string;
  field: HeatField;
  output: string;
  title?: string;
}

export type Figure = RadialFigure | OpeningFigure | HeatmapFigure;

export interface FigureSpec {
  figures: Figure[];
}

const QUANTITIES: Quantity[] = ["strain_norm", "stress_norm_components", "energy"];
const GROUP_BYS: GroupBy[] = ["beta", "alpha", "sigma_T"];
const HEAT_FIELDS: HeatField[] = ["u1", "u2", "magnitude"];

function req(obj: Record<string, unknown>, key: string, where: string): string {
  const v = obj[key];
  if (typeof v !== "string" || v.length === 0) {
    throw new Error(`${where}: missing or non-string "${key}"`);
  }
  return v;
}

function oneOf<T extends string>(v: string, allowed: T[], key: string, where: string): T {
  if (!(allowed as string[]).includes(v)) {
    throw new Error(`${where}: "${key}" must be one of ${allowed.join(", ")}, got "${v}"`);
  }
  return v as T;
}

function parseFigure(raw: unknown, index: number): Figure {
  const where = `figures[${index}]`;
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    throw new Error(`${where}: must be an object`);
  }
  const obj = raw as Record<string, unknown>;
  const kind = req(obj, "kind", where);
  const input = req(obj, "input", where);
  const output = req(obj, "output", where);
  const title = typeof obj.title === "string" ? obj.title : undefined;

  if (kind === "radial") {
    const quantity = oneOf(req(obj, "quantity", where), QUANTITIES, "quantity", where);
    const groupBy = oneOf(req(obj, "group_by", where), GROUP_BYS, "group_by", where);
    return { kind, input, quantity, groupBy, output, title };
  }
  if (kind === "opening") {
    return { kind, input, output, title };
  }
  if (kind === "heatmap") {
    const field = obj.field === undefined
      ? "u2"
      : oneOf(req(obj, "field", where), HEAT_FIELDS, "field", where);
    return { kind, input, field, output, title };
  }
  throw new Error(`${where}: unknown kind "${kind}" (expected radial, opening or heatmap)`);
}

export function parseFigureSpec(text: string): FigureSpec {
  let doc: unknown;
  try {
    doc = JSON.parse(text);
  } catch (e) {
    throw new Error(`spec is not valid JSON: ${(e as Error).message}`);
  }
  if (typeof doc !== "object" || doc === null || !Array.isArray((doc as any).figures)) {
    throw new Error('spec must be an object with a "figures" array');
  }
  const figures = (doc as any).figures.map(parseFigure);
  if (figures.length === 0) {
    throw new Error("spec lists no figures");
  }
  return { figures };
}

export function loadFigureSpec(path: string): FigureSpec {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch (e) {
    throw new Error(`cannot read spec file ${path}: ${(e as Error).message}`);
  }
  return parseFigureSpec(text);
}
