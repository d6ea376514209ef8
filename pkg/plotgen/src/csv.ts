/**
 * Minimal CSV reader for the solver's output files.
 *
 * Values are kept as the raw string tokens from the file. The solver
 * prints 17 significant digits, and the checksum tests compare plotted
 * data against these tokens verbatim, so nothing here may reformat or
 * round-trip them through a float.
 */

export interface CsvTable {
  header: string[];
  /** rows[i][j] is the untouched token under header[j] */
  rows: string[][];
}

export function parseCsv(text: string): CsvTable {
  const lines = text.split("\n").filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new Error("empty CSV");
  }
  const header = lines[0].split(",");
  const rows = lines.slice(1).map((line, i) => {
    const fields = line.split(",");
    if (fields.length !== header.length) {
      throw new Error(
        `CSV row ${i + 2} has ${fields.length} fields, header has ${header.length}`
      );
    }
    return fields;
  });
  return { header, rows };
}

/** Raw tokens of one column. Names the column when it is absent. */
export function column(table: CsvTable, name: string): string[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new Error(
      `column "${name}" not found (header: ${table.header.join(",")})`
    );
  }
  return table.rows.map((r) => r[idx]);
}

export function numericColumn(table: CsvTable, name: string): number[] {
  return column(table, name).map((tok, i) => {
    const v = Number(tok);
    if (!Number.isFinite(v)) {
      throw new Error(`column "${name}" row ${i + 2}: not a number: "${tok}"`);
    }
    return v;
  });
}
