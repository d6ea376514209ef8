/**
 * Input resolution: glob expansion and label derivation from the
 * solver's output layout, <output_dir>/<scenario>/<axis>-<value>/<file>.
 */

import { globSync } from "glob";
import { sep } from "path";
import type { GroupBy } from "./figspec.js";

/** Sweep axis -> directory tag prefix used by the solver CLI. */
const TAG_PREFIX: Record<GroupBy, string> = {
  beta: "beta",
  alpha: "alpha",
  sigma_T: "sigma_top",
};

export function expandInputs(pattern: string, cwd: string): string[] {
  const matches = globSync(pattern, { cwd, absolute: true, nodir: true });
  if (matches.length === 0) {
    throw new Error(`no files match input glob "${pattern}"`);
  }
  return matches.sort();
}

/**
 * The swept value encoded in a file's path, e.g. .../beta-0.1/radial.csv
 * grouped by beta gives 0.1. The tag directory must be present; figures
 * grouped by a parameter that was never swept are a spec mistake worth
 * failing loudly on.
 */
export function sweepValueFromPath(file: string, axis: GroupBy): number {
  const prefix = TAG_PREFIX[axis] + "-";
  for (const seg of file.split(sep)) {
    if (seg.startsWith(prefix)) {
      const v = Number(seg.slice(prefix.length));
      if (Number.isFinite(v)) return v;
    }
  }
  throw new Error(`no "${prefix}<value>" directory in path ${file}`);
}

/**
 * Short distinguishing labels for a set of files: the directory path of
 * each with the segments shared by all of them stripped. A lone file
 * keeps its scenario and tag directories.
 */
export function pathLabels(files: string[]): string[] {
  const dirs = files.map((f) => f.split(sep).slice(0, -1));
  if (files.length === 1) {
    return [dirs[0].slice(-2).join("/")];
  }
  let common = 0;
  while (dirs.every((d) => common < d.length - 1 && d[common] === dirs[0][common])) {
    common++;
  }
  return dirs.map((d) => d.slice(common).join("/"));
}
