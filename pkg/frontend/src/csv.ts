/**
 * Reader for the CSV files the simulation CLI writes.
 *
 * The producer never quotes fields (floats via repr, booleans as
 * true/false, bare identifiers), so a plain comma split is exact here.
 */

export class DataError extends Error {}

export interface Table {
  /** column names in file order */
  columns: string[];
  /** raw cell text, rows[i][j] belongs to columns[j] */
  rows: string[][];
}

export function parseCsv(text: string, source = "input"): Table {
  const lines = text
    .split(/\r?\n/)
    .filter((line) => line.trim().length > 0);
  if (lines.length === 0) {
    throw new DataError(`empty CSV: ${source} has no header`);
  }
  const columns = lines[0]!.split(",").map((c) => c.trim());
  const rows: string[][] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i]!.split(",");
    if (cells.length !== columns.length) {
      throw new DataError(
        `${source} line ${i + 1}: ${cells.length} fields, header has ${columns.length}`,
      );
    }
    rows.push(cells);
  }
  if (rows.length === 0) {
    throw new DataError(`empty CSV: ${source} has a header but no data rows`);
  }
  return { columns, rows };
}

/** Indices of `names` in the table, failing loudly on the first absence. */
export function requireColumns(
  table: Table,
  names: string[],
  context: string,
): number[] {
  return names.map((name) => {
    const idx = table.columns.indexOf(name);
    if (idx < 0) {
      throw new DataError(
        `missing column "${name}" (required for ${context}); ` +
          `file has: ${table.columns.join(", ")}`,
      );
    }
    return idx;
  });
}

export function numberColumn(table: Table, name: string, context: string): number[] {
  const [idx] = requireColumns(table, [name], context);
  return table.rows.map((row, i) => {
    const v = Number(row[idx!]);
    if (!Number.isFinite(v)) {
      throw new DataError(
        `column "${name}" row ${i + 1}: "${row[idx!]}" is not a finite number`,
      );
    }
    return v;
  });
}

export function textColumn(table: Table, name: string, context: string): string[] {
  const [idx] = requireColumns(table, [name], context);
  return table.rows.map((row) => row[idx!]!.trim());
}

export function boolColumn(table: Table, name: string, context: string): boolean[] {
  return textColumn(table, name, context).map((v) => v === "true");
}
