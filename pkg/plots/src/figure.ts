/** Render a FigureRecipe + CSV tables into PNG bytes.
 * Pure function of its inputs: fixed dimensions per recipe, same bytes for
 * the same data. */

import { CsvTable } from "./csv.js";
import { encodePng } from "./png.js";
import { Color, GLYPH_H, GLYPH_W, PALETTE, Raster } from "./raster.js";
import { CurveSpec, FigureRecipe, InsetSpec, PanelSpec, validateRecipeAgainstData } from "./recipe.js";

const BLACK: Color = [0, 0, 0];
const GREY: Color = [150, 150, 150];

interface Range {
  lo: number;
  hi: number;
}

function finitePairs(xs: Float64Array, ys: Float64Array): Array<[number, number]> {
  const out: Array<[number, number]> = [];
  for (let i = 0; i < xs.length; i++) {
    if (Number.isFinite(xs[i]) && Number.isFinite(ys[i])) out.push([xs[i], ys[i]]);
  }
  return out;
}

function dataRange(values: number[]): Range {
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  if (!Number.isFinite(lo) || !Number.isFinite(hi)) {
    lo = 0;
    hi = 1;
  }
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const pad = 0.04 * (hi - lo);
  return { lo: lo - pad, hi: hi + pad };
}

/** round tick spacing to 1/2/5 x 10^k covering the range with ~n steps */
function niceTicks(r: Range, n = 5): number[] {
  const span = r.hi - r.lo;
  const rawStep = span / n;
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  let step = mag;
  for (const m of [1, 2, 5, 10]) {
    if (m * mag >= rawStep) {
      step = m * mag;
      break;
    }
  }
  const first = Math.ceil(r.lo / step) * step;
  const ticks: number[] = [];
  for (let v = first; v <= r.hi + 1e-12 * span; v += step) {
    ticks.push(Math.abs(v) < 1e-12 * span ? 0 : v);
  }
  return ticks;
}

function tickLabel(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(1).replace("e", "E");
  const s = Number(v.toPrecision(4));
  return String(s);
}

interface PlotArea {
  x: number;
  y: number;
  w: number;
  h: number;
  xr: Range;
  yr: Range;
}

function toPixel(area: PlotArea, x: number, y: number): [number, number] {
  const px = area.x + ((x - area.xr.lo) / (area.xr.hi - area.xr.lo)) * (area.w - 1);
  const py = area.y + area.h - 1 - ((y - area.yr.lo) / (area.yr.hi - area.yr.lo)) * (area.h - 1);
  return [px, py];
}

function curveColor(curve: CurveSpec, index: number): Color {
  const i = curve.color ?? index;
  return PALETTE[i % PALETTE.length];
}

function drawCurves(img: Raster, area: PlotArea, curves: CurveSpec[],
                    tables: Map<string, CsvTable>): void {
  curves.forEach((curve, ci) => {
    const table = tables.get(curve.slot)!;
    const pts = finitePairs(table.columns.get(curve.x)!, table.columns.get(curve.y)!);
    const color = curveColor(curve, ci);
    const dash = curve.dashed ? 4 : 0;
    for (let i = 1; i < pts.length; i++) {
      const [x0, y0] = toPixel(area, pts[i - 1][0], pts[i - 1][1]);
      const [x1, y1] = toPixel(area, pts[i][0], pts[i][1]);
      img.line(x0, y0, x1, y1, color, dash);
    }
  });
}

function rangesFor(curves: CurveSpec[], tables: Map<string, CsvTable>): [Range, Range] {
  const xs: number[] = [];
  const ys: number[] = [];
  for (const curve of curves) {
    const table = tables.get(curve.slot)!;
    for (const [x, y] of finitePairs(table.columns.get(curve.x)!, table.columns.get(curve.y)!)) {
      xs.push(x);
      ys.push(y);
    }
  }
  return [dataRange(xs), dataRange(ys)];
}

function drawAxes(img: Raster, area: PlotArea, small = false): void {
  img.frame(area.x - 1, area.y - 1, area.w + 2, area.h + 2, BLACK);
  const labelScale = 1;
  for (const t of niceTicks(area.xr, small ? 3 : 6)) {
    const [px] = toPixel(area, t, area.yr.lo);
    img.line(px, area.y + area.h, px, area.y + area.h + 3, BLACK);
    const label = tickLabel(t);
    img.text(px - img.textWidth(label, labelScale) / 2, area.y + area.h + 5, label,
             BLACK, labelScale);
  }
  for (const t of niceTicks(area.yr, small ? 3 : 5)) {
    const [, py] = toPixel(area, area.xr.lo, t);
    img.line(area.x - 4, py, area.x - 1, py, BLACK);
    const label = tickLabel(t);
    img.text(area.x - 6 - img.textWidth(label, labelScale), py - 3, label, BLACK,
             labelScale);
  }
}

function drawLegend(img: Raster, area: PlotArea, curves: CurveSpec[]): void {
  const pad = 4;
  const lineSample = 16;
  const rowH = GLYPH_H + 3;
  const widest = Math.max(...curves.map((c) => img.textWidth(c.label)));
  const w = lineSample + 6 + widest + 2 * pad;
  const h = curves.length * rowH + 2 * pad - 3;
  const x = area.x + area.w - w - 6;
  const y = area.y + 6;
  img.fillRect(x, y, w, h, [255, 255, 255]);
  img.frame(x, y, w, h, GREY);
  curves.forEach((curve, ci) => {
    const cy = y + pad + ci * rowH;
    img.line(x + pad, cy + 3, x + pad + lineSample, cy + 3, curveColor(curve, ci),
             curve.dashed ? 4 : 0);
    img.text(x + pad + lineSample + 6, cy, curve.label, BLACK);
  });
}

function drawInset(img: Raster, parent: PlotArea, inset: InsetSpec,
                   tables: Map<string, CsvTable>): void {
  const [fx, fy, fw, fh] = inset.rect;
  const area: PlotArea = {
    x: Math.round(parent.x + fx * parent.w),
    y: Math.round(parent.y + fy * parent.h),
    w: Math.round(fw * parent.w),
    h: Math.round(fh * parent.h),
    xr: { lo: 0, hi: 1 },
    yr: { lo: 0, hi: 1 },
  };
  [area.xr, area.yr] = rangesFor(inset.curves, tables);
  img.fillRect(area.x - 26, area.y - (inset.title ? GLYPH_H + 6 : 4),
               area.w + 34, area.h + GLYPH_H + 14 + (inset.title ? GLYPH_H + 2 : 0),
               [255, 255, 255]);
  drawAxes(img, area, true);
  drawCurves(img, area, inset.curves, tables);
  if (inset.title) {
    img.text(area.x + 2, area.y - GLYPH_H - 3, inset.title, BLACK);
  }
}

function drawPanel(img: Raster, panel: PanelSpec, rect: { x: number; y: number; w: number; h: number },
                   tables: Map<string, CsvTable>): void {
  const marginLeft = 52;
  const marginRight = 14;
  const marginTop = (panel.title ? GLYPH_H + 8 : 4) + (panel.ylabel ? GLYPH_H + 6 : 8);
  const marginBottom = 30;
  const area: PlotArea = {
    x: rect.x + marginLeft,
    y: rect.y + marginTop,
    w: rect.w - marginLeft - marginRight,
    h: rect.h - marginTop - marginBottom,
    xr: { lo: 0, hi: 1 },
    yr: { lo: 0, hi: 1 },
  };
  [area.xr, area.yr] = rangesFor(panel.curves, tables);
  drawAxes(img, area);
  drawCurves(img, area, panel.curves, tables);
  if (panel.title) {
    const tx = rect.x + Math.max(0, Math.floor((rect.w - img.textWidth(panel.title)) / 2));
    img.text(tx, rect.y + 4, panel.title, BLACK);
  }
  if (panel.xlabel) {
    img.text(area.x + area.w - img.textWidth(panel.xlabel), area.y + area.h + 5 + GLYPH_H + 3,
             panel.xlabel, BLACK);
  }
  if (panel.ylabel) {
    img.text(area.x, area.y - GLYPH_H - 4, panel.ylabel, BLACK);
  }
  if (panel.curves.length > 1) {
    drawLegend(img, area, panel.curves);
  }
  if (panel.inset) {
    drawInset(img, area, panel.inset, tables);
  }
}

export function renderFigure(recipe: FigureRecipe, tables: Map<string, CsvTable>): Buffer {
  validateRecipeAgainstData(recipe, tables);
  const img = new Raster(recipe.width, recipe.height);
  const n = recipe.panels.length;
  const panelH = Math.floor(recipe.height / n);
  recipe.panels.forEach((panel, i) => {
    drawPanel(img, panel, { x: 0, y: i * panelH, w: recipe.width, h: panelH }, tables);
  });
  return encodePng(recipe.width, recipe.height, img.data);
}
