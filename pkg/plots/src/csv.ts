/** Minimal reader for the simulator's timeseries.csv files: a header line
 * followed by numeric rows, comma separated. */

export class CsvError extends Error {}

export interface CsvTable {
  header: string[];
  /** column name -> values, row order preserved */
  columns: Map<string, Float64Array>;
  rows: number;
}

export function parseCsv(text: string, source = "<csv>"): CsvTable {
  const lines = text.split(/\r?\n/).filter((line) => line.trim().length > 0);
  if (lines.length === 0) {
    throw new CsvError(`${source}: empty CSV`);
  }
  const header = lines[0].split(",").map((s) => s.trim());
  if (header.some((h) => h.length === 0)) {
    throw new CsvError(`${source}: blank column name in header`);
  }
  const seen = new Set<string>();
  for (const name of header) {
    if (seen.has(name)) throw new CsvError(`${source}: duplicate column ${name}`);
    seen.add(name);
  }
  const rows = lines.length - 1;
  if (rows === 0) {
    throw new CsvError(`${source}: no data rows`);
  }
  const data = header.map(() => new Float64Array(rows));
  for (let i = 0; i < rows; i++) {
    const parts = lines[i + 1].split(",");
    if (parts.length !== header.length) {
      throw new CsvError(
        `${source}: row ${i + 2} has ${parts.length} fields, expected ${header.length}`,
      );
    }
    for (let j = 0; j < header.length; j++) {
      const v = Number(parts[j]);
      if (Number.isNaN(v) && parts[j].trim() !== "nan") {
        throw new CsvError(`${source}: row ${i + 2}, column ${header[j]}: not a number: ${parts[j]}`);
      }
      data[j][i] = v;
    }
  }
  const columns = new Map<string, Float64Array>();
  header.forEach((name, j) => columns.set(name, data[j]));
  return { header, columns, rows };
}
