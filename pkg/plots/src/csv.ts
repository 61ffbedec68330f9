/**
 * Reader for the confrec report CSVs.
 *
 * The files are machine-generated: '#' comment lines, a header row, then
 * comma-separated numeric fields with no quoting or escaping, so a direct
 * split is a faithful parser. Column reads are recorded on the table so
 * callers (and the tests) can verify that a figure consumed every column
 * it declares.
 */

import { readFileSync } from "fs";

export class MissingColumnError extends Error {
  constructor(column: string, path: string, header: string[]) {
    super(
      `column '${column}' not found in ${path} (header: ${header.join(", ")})`,
    );
    this.name = "MissingColumnError";
  }
}

export class EmptyReportError extends Error {
  constructor(path: string) {
    super(`no rows in ${path}`);
    this.name = "EmptyReportError";
  }
}

export class CsvTable {
  readonly path: string;
  readonly header: string[];
  readonly comments: string[];
  private readonly columns: Map<string, number[]>;
  private readonly accessed = new Set<string>();

  constructor(path: string, header: string[], rows: string[][], comments: string[]) {
    this.path = path;
    this.header = header;
    this.comments = comments;
    this.columns = new Map();
    header.forEach((name, j) => {
      this.columns.set(
        name,
        rows.map((r) => Number(r[j])),
      );
    });
  }

  get rowCount(): number {
    return this.columns.get(this.header[0])?.length ?? 0;
  }

  has(name: string): boolean {
    return this.columns.has(name);
  }

  column(name: string): number[] {
    const values = this.columns.get(name);
    if (values === undefined) {
      throw new MissingColumnError(name, this.path, this.header);
    }
    this.accessed.add(name);
    return values;
  }

  accessedColumns(): string[] {
    return [...this.accessed].sort();
  }
}

export function readReport(path: string): CsvTable {
  const text = readFileSync(path, "utf8");
  const lines = text.split(/\r?\n/).filter((ln) => ln.trim().length > 0);
  const comments = lines
    .filter((ln) => ln.startsWith("#"))
    .map((ln) => ln.replace(/^#\s?/, ""));
  const data = lines.filter((ln) => !ln.startsWith("#"));
  if (data.length === 0) {
    throw new EmptyReportError(path);
  }
  const header = data[0].split(",");
  const rows = data.slice(1).map((ln) => ln.split(","));
  if (rows.length === 0) {
    throw new EmptyReportError(path);
  }
  for (const [i, row] of rows.entries()) {
    if (row.length !== header.length) {
      throw new Error(
        `row ${i + 1} of ${path} has ${row.length} fields, expected ${header.length}`,
      );
    }
  }
  return new CsvTable(path, header, rows, comments);
}
