/** Figure recipes: which CSV slots feed which curves of which panel.
 * Shipped as JSON files next to the code (recipes/<name>.json). */

import { readFileSync } from "node:fs";
import { CsvTable } from "./csv.js";

export class RecipeError extends Error {}

export class MissingColumnError extends RecipeError {
  constructor(column: string, slot: string, available: string[]) {
    super(
      `column '${column}' not found in the CSV for slot '${slot}' ` +
      `(available: ${available.join(", ")})`,
    );
  }
}

export interface CurveSpec {
  slot: string;
  x: string;
  y: string;
  label: string;
  color?: number; // palette index
  dashed?: boolean;
}

export interface InsetSpec {
  /** [x, y, w, h] as fractions of the parent panel's plot area */
  rect: [number, number, number, number];
  title?: string;
  curves: CurveSpec[];
}

export interface PanelSpec {
  title?: string;
  xlabel?: string;
  ylabel?: string;
  curves: CurveSpec[];
  inset?: InsetSpec;
}

export interface FigureRecipe {
  name: string;
  width: number;
  height: number;
  /** named CSV inputs, in the order they are passed on the command line */
  slots: string[];
  panels: PanelSpec[];
}

function requireField<T>(obj: Record<string, unknown>, key: string, where: string): T {
  if (!(key in obj)) throw new RecipeError(`${where}: missing field '${key}'`);
  return obj[key] as T;
}

export function parseRecipe(jsonText: string, source = "<recipe>"): FigureRecipe {
  let raw: Record<string, unknown>;
  try {
    raw = JSON.parse(jsonText);
  } catch (err) {
    throw new RecipeError(`${source}: not valid JSON (${(err as Error).message})`);
  }
  const recipe: FigureRecipe = {
    name: requireField(raw, "name", source),
    width: requireField(raw, "width", source),
    height: requireField(raw, "height", source),
    slots: requireField(raw, "slots", source),
    panels: requireField(raw, "panels", source),
  };
  if (!Number.isInteger(recipe.width) || !Number.isInteger(recipe.height) ||
      recipe.width < 64 || recipe.height < 64) {
    throw new RecipeError(`${source}: width/height must be integers >= 64`);
  }
  if (!Array.isArray(recipe.slots) || recipe.slots.length === 0) {
    throw new RecipeError(`${source}: slots must be a nonempty list`);
  }
  if (!Array.isArray(recipe.panels) || recipe.panels.length === 0) {
    throw new RecipeError(`${source}: panels must be a nonempty list`);
  }
  const allCurves = (p: PanelSpec) => [...p.curves, ...(p.inset?.curves ?? [])];
  for (const panel of recipe.panels) {
    for (const curve of allCurves(panel)) {
      for (const key of ["slot", "x", "y", "label"] as const) {
        if (typeof curve[key] !== "string") {
          throw new RecipeError(`${source}: curve is missing string field '${key}'`);
        }
      }
      if (!recipe.slots.includes(curve.slot)) {
        throw new RecipeError(
          `${source}: curve '${curve.label}' references unknown slot '${curve.slot}' ` +
          `(slots: ${recipe.slots.join(", ")})`);
      }
    }
  }
  return recipe;
}

export function loadRecipeFile(path: string): FigureRecipe {
  return parseRecipe(readFileSync(path, "utf-8"), path);
}

/** Check that every referenced column exists in its slot's CSV. */
export function validateRecipeAgainstData(
  recipe: FigureRecipe,
  tables: Map<string, CsvTable>,
): void {
  for (const slot of recipe.slots) {
    if (!tables.has(slot)) {
      throw new RecipeError(`no CSV bound to slot '${slot}'`);
    }
  }
  for (const panel of recipe.panels) {
    const curves = [...panel.curves, ...(panel.inset?.curves ?? [])];
    for (const curve of curves) {
      const table = tables.get(curve.slot)!;
      for (const column of [curve.x, curve.y]) {
        if (!table.columns.has(column)) {
          throw new MissingColumnError(column, curve.slot, table.header);
        }
      }
    }
  }
}
