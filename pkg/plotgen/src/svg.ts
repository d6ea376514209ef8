/**
 * Hand-rolled SVG line charts.
 *
 * Output is fully deterministic: fixed canvas, fixed palette, no
 * timestamps, coordinates rounded to 0.1 px. The source tokens of every
 * curve are embedded on its polyline as data-x / data-y attributes so a
 * reader can recover exactly what was plotted without re-deriving it
 * from pixel positions.
 */

export interface Curve {
  label: string;
  /** raw x tokens as read from the CSV */
  x: string[];
  /** raw y tokens as read from the CSV */
  y: string[];
  /** file the tokens came from */
  src: string;
  color: string;
  dash?: string;
}

export interface Panel {
  title: string;
  xLabel: string;
  yLabel: string;
  curves: Curve[];
}

export const PALETTE = [
  "#4361ee", "#e63946", "#2d6a4f", "#f77f00",
  "#7209b7", "#577590", "#b5179e", "#606c38",
];

export function esc(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function niceTicks(min: number, max: number, count: number): number[] {
  const range = max - min || Math.abs(min) || 1;
  const rough = range / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rough)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((n) => n >= rough) ?? rough;
  const start = Math.ceil(min / step) * step;
  const ticks: number[] = [];
  for (let v = start; v <= max + step * 0.01; v += step) ticks.push(v);
  return ticks;
}

function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(1);
  return String(Number(v.toPrecision(4)));
}

// Panel geometry. Legends sit outside the plot area on the right of the
// last panel so curves are never hidden under them.
const PANEL_W = 400;
const PANEL_H = 300;
const ML = 62;
const MR = 14;
const MT = 34;
const MB = 46;
const LEGEND_W = 150;

function renderPanel(panel: Panel, xOffset: number): string {
  const pw = PANEL_W - ML - MR;
  const ph = PANEL_H - MT - MB;
  const left = xOffset + ML;

  const xs = panel.curves.flatMap((c) => c.x.map(Number));
  const ys = panel.curves.flatMap((c) => c.y.map(Number));
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  let yMin = Math.min(...ys, 0);
  let yMax = Math.max(...ys);
  if (yMax === yMin) yMax = yMin + 1;
  yMax += (yMax - yMin) * 0.06;

  const xOf = (v: number) => left + ((v - xMin) / (xMax - xMin || 1)) * pw;
  const yOf = (v: number) => MT + ph - ((v - yMin) / (yMax - yMin || 1)) * ph;

  let s = "";
  s += `<text x="${left}" y="${MT - 12}" font-size="11" font-weight="600" fill="#222">${esc(panel.title)}</text>\n`;

  // grid + y ticks
  const yTicks = niceTicks(yMin, yMax, 5);
  for (const v of yTicks) {
    const y = yOf(v).toFixed(1);
    s += `<line x1="${left}" y1="${y}" x2="${left + pw}" y2="${y}" stroke="#eee" stroke-width="0.6"/>\n`;
    s += `<line x1="${left - 3}" y1="${y}" x2="${left}" y2="${y}" stroke="#333" stroke-width="0.6"/>\n`;
    s += `<text x="${left - 5}" y="${(yOf(v) + 3).toFixed(1)}" text-anchor="end" font-size="8" fill="#555">${esc(fmtTick(v))}</text>\n`;
  }

  // x ticks
  for (const v of niceTicks(xMin, xMax, 5)) {
    const x = xOf(v).toFixed(1);
    s += `<line x1="${x}" y1="${MT + ph}" x2="${x}" y2="${MT + ph + 3}" stroke="#333" stroke-width="0.6"/>\n`;
    s += `<text x="${x}" y="${MT + ph + 13}" text-anchor="middle" font-size="8" fill="#555">${esc(fmtTick(v))}</text>\n`;
  }

  // curves, with their source tokens attached
  for (const c of panel.curves) {
    const pts = c.x
      .map((xt, i) => `${xOf(Number(xt)).toFixed(1)},${yOf(Number(c.y[i])).toFixed(1)}`)
      .join(" ");
    s += `<polyline fill="none" stroke="${c.color}" stroke-width="1.3"`;
    if (c.dash) s += ` stroke-dasharray="${c.dash}"`;
    s += ` data-label="${esc(c.label)}" data-src="${esc(c.src)}"`;
    s += ` data-x="${esc(c.x.join(" "))}" data-y="${esc(c.y.join(" "))}"`;
    s += ` points="${pts}"/>\n`;
  }

  // frame
  s += `<line x1="${left}" y1="${MT}" x2="${left}" y2="${MT + ph}" stroke="#333" stroke-width="0.8"/>\n`;
  s += `<line x1="${left}" y1="${MT + ph}" x2="${left + pw}" y2="${MT + ph}" stroke="#333" stroke-width="0.8"/>\n`;

  // axis labels
  s += `<text x="${left + pw / 2}" y="${PANEL_H - 6}" text-anchor="middle" font-size="10" fill="#333">${esc(panel.xLabel)}</text>\n`;
  const lyc = MT + ph / 2;
  s += `<text x="${xOffset + 14}" y="${lyc}" text-anchor="middle" font-size="10" fill="#333" transform="rotate(-90,${xOffset + 14},${lyc})">${esc(panel.yLabel)}</text>\n`;

  return s;
}

/**
 * One SVG document from one or more panels laid out side by side, with a
 * shared legend on the right (curve labels are assumed identical across
 * panels, which holds for per-component figures of one sweep).
 */
export function buildFigure(panels: Panel[]): string {
  if (panels.length === 0 || panels.some((p) => p.curves.length === 0)) {
    throw new Error("figure needs at least one panel with at least one curve");
  }
  const W = panels.length * PANEL_W + LEGEND_W;
  const H = PANEL_H;

  let s = `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${W} ${H}" font-family="Helvetica, Arial, sans-serif">\n`;
  s += `<rect width="${W}" height="${H}" fill="#fff"/>\n`;
  panels.forEach((p, i) => {
    s += renderPanel(p, i * PANEL_W);
  });

  const lx = panels.length * PANEL_W + 8;
  let ly = MT + 4;
  for (const c of panels[0].curves) {
    s += `<line x1="${lx}" y1="${ly}" x2="${lx + 16}" y2="${ly}" stroke="${c.color}" stroke-width="1.3"${c.dash ? ` stroke-dasharray="${c.dash}"` : ""}/>\n`;
    s += `<text x="${lx + 20}" y="${ly + 3}" font-size="9" fill="#333">${esc(c.label)}</text>\n`;
    ly += 14;
  }

  s += `</svg>\n`;
  return s;
}
