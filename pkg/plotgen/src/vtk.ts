/**
 * Reader for the solver's legacy ASCII VTK export: an unstructured grid
 * of quads with a point-data displacement vector and per-cell scalar
 * fields. Only the constructs that exporter emits are understood.
 */

export interface VtkGrid {
  /** node coordinates, z dropped */
  points: Array<[number, number]>;
  /** quad connectivity, 4 node ids per cell */
  cells: Array<[number, number, number, number]>;
  /** point vectors by name, z dropped */
  vectors: Map<string, Array<[number, number]>>;
  /** cell scalars by name */
  scalars: Map<string, number[]>;
}

class LineCursor {
  private i = 0;
  constructor(private lines: string[]) {}

  next(): string {
    while (this.i < this.lines.length) {
      const l = this.lines[this.i++].trim();
      if (l.length > 0) return l;
    }
    throw new Error("unexpected end of VTK file");
  }

  peek(): string | null {
    let j = this.i;
    while (j < this.lines.length) {
      const l = this.lines[j].trim();
      if (l.length > 0) return l;
      j++;
    }
    return null;
  }
}

function nums(line: string): number[] {
  return line.split(/\s+/).map(Number);
}

export function parseVtk(text: string): VtkGrid {
  const cur = new LineCursor(text.split("\n"));

  if (!cur.next().startsWith("# vtk DataFile")) {
    throw new Error("not a legacy VTK file");
  }
  cur.next(); // free-form title
  if (cur.next() !== "ASCII") {
    throw new Error("only ASCII VTK is supported");
  }
  if (cur.next() !== "DATASET UNSTRUCTURED_GRID") {
    throw new Error("only unstructured grids are supported");
  }

  const pointsHdr = cur.next().split(/\s+/);
  if (pointsHdr[0] !== "POINTS") throw new Error(`expected POINTS, got ${pointsHdr[0]}`);
  const nPoints = parseInt(pointsHdr[1], 10);
  const points: Array<[number, number]> = [];
  for (let i = 0; i < nPoints; i++) {
    const [x, y] = nums(cur.next());
    points.push([x, y]);
  }

  const cellsHdr = cur.next().split(/\s+/);
  if (cellsHdr[0] !== "CELLS") throw new Error(`expected CELLS, got ${cellsHdr[0]}`);
  const nCells = parseInt(cellsHdr[1], 10);
  const cells: Array<[number, number, number, number]> = [];
  for (let i = 0; i < nCells; i++) {
    const row = nums(cur.next());
    if (row[0] !== 4) throw new Error(`cell ${i}: expected 4 nodes, got ${row[0]}`);
    cells.push([row[1], row[2], row[3], row[4]]);
  }

  const typesHdr = cur.next().split(/\s+/);
  if (typesHdr[0] !== "CELL_TYPES") throw new Error(`expected CELL_TYPES, got ${typesHdr[0]}`);
  for (let i = 0; i < nCells; i++) cur.next();

  const vectors = new Map<string, Array<[number, number]>>();
  const scalars = new Map<string, number[]>();
  let dataCount = 0;

  while (cur.peek() !== null) {
    const hdr = cur.next().split(/\s+/);
    switch (hdr[0]) {
      case "POINT_DATA":
        dataCount = parseInt(hdr[1], 10);
        break;
      case "CELL_DATA":
        dataCount = parseInt(hdr[1], 10);
        break;
      case "VECTORS": {
        const vals: Array<[number, number]> = [];
        for (let i = 0; i < dataCount; i++) {
          const [vx, vy] = nums(cur.next());
          vals.push([vx, vy]);
        }
        vectors.set(hdr[1], vals);
        break;
      }
      case "SCALARS": {
        if (!cur.next().startsWith("LOOKUP_TABLE")) {
          throw new Error(`SCALARS ${hdr[1]}: expected LOOKUP_TABLE line`);
        }
        const vals: number[] = [];
        while (vals.length < dataCount) {
          vals.push(...nums(cur.next()));
        }
        scalars.set(hdr[1], vals);
        break;
      }
      default:
        throw new Error(`unsupported VTK section ${hdr[0]}`);
    }
  }

  return { points, cells, vectors, scalars };
}
