import { afterEach, describe, expect, it } from "vitest";
import { existsSync, mkdtempSync, readFileSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { PNG } from "pngjs";

import { parseCsv, CsvTable } from "../src/csv.js";
import { renderFigure } from "../src/figure.js";
import { MissingColumnError, parseRecipe } from "../src/recipe.js";
import { resolveRecipe, runCli } from "../src/cli.js";

const FIXTURES = join(__dirname, "..", "fixtures");

const FIGURE_INPUTS: Record<string, string[]> = {
  fig2: ["fig2"],
  fig3: ["fig3", "fig4"],
  fig4: ["fig4", "fig4-mott"],
  fig5: ["fig5"],
  fig6: ["fig6"],
};

function loadTables(recipeName: string): Map<string, CsvTable> {
  const recipe = resolveRecipe(recipeName);
  const tables = new Map<string, CsvTable>();
  recipe.slots.forEach((slot, i) => {
    const path = join(FIXTURES, FIGURE_INPUTS[recipeName][i], "timeseries.csv");
    tables.set(slot, parseCsv(readFileSync(path, "utf-8"), path));
  });
  return tables;
}

describe("shipped recipes", () => {
  for (const name of Object.keys(FIGURE_INPUTS)) {
    it(`renders the ${name} analogue from simulator CSV output`, () => {
      const recipe = resolveRecipe(name);
      const png = renderFigure(recipe, loadTables(name));
      const decoded = PNG.sync.read(png);
      expect(decoded.width).toBe(recipe.width);
      expect(decoded.height).toBe(recipe.height);
      // something was actually drawn
      let nonWhite = 0;
      for (let i = 0; i < decoded.data.length; i += 4) {
        if (decoded.data[i] !== 255 || decoded.data[i + 1] !== 255 ||
            decoded.data[i + 2] !== 255) nonWhite++;
      }
      expect(nonWhite).toBeGreaterThan(500);
    });
  }

  it("renders deterministically with fixed dimensions", () => {
    const recipe = resolveRecipe("fig2");
    const a = renderFigure(recipe, loadTables("fig2"));
    const b = renderFigure(recipe, loadTables("fig2"));
    expect(a.equals(b)).toBe(true);
  });

  it("fails with the column name on a truncated CSV", () => {
    const recipe = resolveRecipe("fig2");
    const full = readFileSync(join(FIXTURES, "fig2", "timeseries.csv"), "utf-8");
    // drop the last column from every line
    const truncated = full
      .split("\n")
      .map((line) => line.split(",").slice(0, -1).join(","))
      .join("\n");
    const tables = new Map<string, CsvTable>([
      ["seesaw", parseCsv(truncated, "truncated")],
    ]);
    expect(() => renderFigure(recipe, tables)).toThrow(MissingColumnError);
    expect(() => renderFigure(recipe, tables)).toThrow(/var_x/);
  });
});

describe("recipe validation", () => {
  const minimal = {
    name: "t",
    width: 200,
    height: 120,
    slots: ["a"],
    panels: [{ curves: [{ slot: "a", x: "time", y: "y", label: "Y" }] }],
  };

  it("accepts a minimal recipe", () => {
    const recipe = parseRecipe(JSON.stringify(minimal), "mini");
    expect(recipe.panels.length).toBe(1);
  });

  it("rejects curves bound to unknown slots", () => {
    const bad = structuredClone(minimal);
    bad.panels[0].curves[0].slot = "zzz";
    expect(() => parseRecipe(JSON.stringify(bad), "mini")).toThrow(/zzz/);
  });

  it("rejects non-JSON and missing fields", () => {
    expect(() => parseRecipe("{oops", "x")).toThrow(/JSON/);
    expect(() => parseRecipe("{}", "x")).toThrow(/name/);
  });
});

describe("cli", () => {
  let dir: string | undefined;
  afterEach(() => {
    if (dir) rmSync(dir, { recursive: true, force: true });
    dir = undefined;
  });

  it("writes a PNG for a shipped recipe", () => {
    dir = mkdtempSync(join(tmpdir(), "plots-"));
    const out = join(dir, "fig2.png");
    const code = runCli(["fig2", join(FIXTURES, "fig2", "timeseries.csv"), out]);
    expect(code).toBe(0);
    const decoded = PNG.sync.read(readFileSync(out));
    expect(decoded.width).toBe(720);
  });

  it("rejects an empty CSV and writes no file", () => {
    dir = mkdtempSync(join(tmpdir(), "plots-"));
    const empty = join(dir, "empty.csv");
    const out = join(dir, "out.png");
    require("node:fs").writeFileSync(empty, "");
    const code = runCli(["fig2", empty, out]);
    expect(code).toBe(2);
    expect(existsSync(out)).toBe(false);
  });

  it("rejects a wrong CSV count naming the slots", () => {
    dir = mkdtempSync(join(tmpdir(), "plots-"));
    const code = runCli(["fig3", join(FIXTURES, "fig3", "timeseries.csv"),
                         join(dir, "out.png")]);
    expect(code).toBe(2);
  });

  it("rejects an unknown recipe", () => {
    dir = mkdtempSync(join(tmpdir(), "plots-"));
    const code = runCli(["figZZ", join(FIXTURES, "fig2", "timeseries.csv"),
                         join(dir, "out.png")]);
    expect(code).toBe(2);
  });
});
