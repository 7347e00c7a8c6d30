/** Figure renderer CLI.
 *
 *   node dist/cli.js <recipe-name-or-path> <timeseries.csv ...> <out.png>
 *
 * A recipe name resolves to recipes/<name>.json next to this package; each
 * CSV is bound to the recipe's slots in order.  The PNG is written only
 * after the whole figure rendered successfully.
 * Exit codes: 0 success, 2 bad usage / recipe / CSV input.
 */

import { existsSync, readFileSync, writeFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { CsvError, CsvTable, parseCsv } from "./csv.js";
import { renderFigure } from "./figure.js";
import { FigureRecipe, RecipeError, loadRecipeFile } from "./recipe.js";

const RECIPE_DIR = join(dirname(fileURLToPath(import.meta.url)), "..", "recipes");

export function resolveRecipe(nameOrPath: string): FigureRecipe {
  const builtin = join(RECIPE_DIR, `${nameOrPath}.json`);
  if (existsSync(builtin)) return loadRecipeFile(builtin);
  if (existsSync(nameOrPath)) return loadRecipeFile(nameOrPath);
  throw new RecipeError(
    `'${nameOrPath}' is neither a shipped recipe (${RECIPE_DIR}) nor a file`);
}

export function runCli(argv: string[]): number {
  if (argv.length < 3) {
    process.stderr.write(
      "usage: cli.js <recipe-name-or-path> <timeseries.csv ...> <out.png>\n");
    return 2;
  }
  const recipeArg = argv[0];
  const outPath = argv[argv.length - 1];
  const csvPaths = argv.slice(1, -1);
  try {
    const recipe = resolveRecipe(recipeArg);
    if (csvPaths.length !== recipe.slots.length) {
      throw new RecipeError(
        `recipe '${recipe.name}' needs ${recipe.slots.length} CSV input(s) ` +
        `(${recipe.slots.join(", ")}), got ${csvPaths.length}`);
    }
    const tables = new Map<string, CsvTable>();
    recipe.slots.forEach((slot, i) => {
      tables.set(slot, parseCsv(readFileSync(csvPaths[i], "utf-8"), csvPaths[i]));
    });
    const png = renderFigure(recipe, tables);
    writeFileSync(outPath, png);
    process.stdout.write(`wrote ${outPath} (${recipe.width}x${recipe.height})\n`);
    return 0;
  } catch (err) {
    if (err instanceof RecipeError || err instanceof CsvError ||
        (err as NodeJS.ErrnoException).code === "ENOENT") {
      process.stderr.write(`error: ${(err as Error).message}\n`);
      return 2;
    }
    throw err;
  }
}

const entry = process.argv[1] ? fileURLToPath(import.meta.url) === process.argv[1] : false;
if (entry) {
  process.exit(runCli(process.argv.slice(2)));
}
