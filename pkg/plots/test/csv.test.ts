import { describe, expect, it } from "vitest";
import { readFileSync } from "node:fs";
import { join } from "node:path";

import { CsvError, parseCsv } from "../src/csv.js";

const FIXTURES = join(__dirname, "..", "fixtures");

describe("parseCsv", () => {
  it("reads a simulator timeseries file", () => {
    const text = readFileSync(join(FIXTURES, "fig2", "timeseries.csv"), "utf-8");
    const table = parseCsv(text, "fig2");
    expect(table.header[0]).toBe("time");
    expect(table.columns.has("negativity")).toBe(true);
    expect(table.columns.has("var_x")).toBe(true);
    expect(table.rows).toBeGreaterThan(50);
    expect(table.columns.get("negativity")![0]).toBe(0);
  });

  it("rejects an empty file", () => {
    expect(() => parseCsv("", "empty")).toThrow(CsvError);
    expect(() => parseCsv("\n\n", "empty")).toThrow(/empty/);
  });

  it("rejects a header-only file", () => {
    expect(() => parseCsv("time,x\n", "h")).toThrow(/no data rows/);
  });

  it("rejects ragged rows with the row number", () => {
    expect(() => parseCsv("time,x\n0,1\n1\n", "r")).toThrow(/row 3/);
  });

  it("rejects non-numeric fields naming the column", () => {
    expect(() => parseCsv("time,x\n0,banana\n", "n")).toThrow(/column x/);
  });

  it("rejects duplicate columns", () => {
    expect(() => parseCsv("time,time\n0,1\n", "d")).toThrow(/duplicate/);
  });
});
