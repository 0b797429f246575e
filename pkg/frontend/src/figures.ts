/**
 * The seven figure kinds, one per CSV layout the simulation CLI emits.
 *
 * Reference levels are drawn where they mean something physical: output
 * variance 1 is the vacuum level on squeezing panels, and 4 is the
 * two-mode separability bound on the witness panel. Rows with
 * valid=false get a shaded band so nobody reads linearized spectra
 * inside a flagged transition region.
 */

import {
  boolColumn,
  DataError,
  numberColumn,
  requireColumns,
  Table,
  textColumn,
} from "./csv.js";
import { domainOf, fmt, PALETTE, Panel } from "./svg.js";

export const KINDS = [
  "timeseries",
  "branch-scan",
  "spectrum",
  "spectrum-surface",
  "ds",
  "mcwf-compare",
  "fluctuation",
] as const;

export type FigureKind = (typeof KINDS)[number];

export function render(kind: string, table: Table, source = "input"): string {
  switch (kind) {
    case "timeseries":
      return timeseries(table, source);
    case "branch-scan":
      return branchScan(table, source);
    case "spectrum":
      return spectrum(table, source);
    case "spectrum-surface":
      return spectrumSurface(table, source);
    case "ds":
      return duanSimon(table, source);
    case "mcwf-compare":
      return mcwfCompare(table, source);
    case "fluctuation":
      return fluctuation(table, source);
    default:
      throw new DataError(
        `unknown figure kind "${kind}"; expected one of ${KINDS.join(", ")}`,
      );
  }
}

/** Contiguous index runs where keep[i] is true, as [start, end] pairs. */
function runs(keep: boolean[]): Array<[number, number]> {
  const out: Array<[number, number]> = [];
  let start = -1;
  for (let i = 0; i <= keep.length; i++) {
    const on = i < keep.length && keep[i]!;
    if (on && start < 0) start = i;
    if (!on && start >= 0) {
      out.push([start, i - 1]);
      start = -1;
    }
  }
  return out;
}

function shadeInvalid(panel: Panel, xs: number[], valid: boolean[]): void {
  for (const [a, b] of runs(valid.map((v) => !v))) {
    // extend half a step each way so single rows stay visible
    const left = a > 0 ? (xs[a]! + xs[a - 1]!) / 2 : xs[a]!;
    const right = b < xs.length - 1 ? (xs[b]! + xs[b + 1]!) / 2 : xs[b]!;
    panel.vband(left, right, "invalid-region");
  }
}

function timeseries(table: Table, source: string): string {
  const ctx = `kind "timeseries" (${source})`;
  const t = numberColumn(table, "t", ctx);
  const na = numberColumn(table, "na_mean", ctx);
  const naErr = numberColumn(table, "na_stderr", ctx);
  const nb = numberColumn(table, "nb_mean", ctx);
  const nbErr = numberColumn(table, "nb_stderr", ctx);

  const hiA = na.map((v, i) => v + naErr[i]!);
  const loA = na.map((v, i) => v - naErr[i]!);
  const hiB = nb.map((v, i) => v + nbErr[i]!);
  const loB = nb.map((v, i) => v - nbErr[i]!);
  const series = [hiA, loA, hiB, loB];

  const hasTrace = table.columns.includes("sc_na");
  let scA: number[] = [];
  let scB: number[] = [];
  if (hasTrace) {
    scA = numberColumn(table, "sc_na", ctx);
    scB = numberColumn(table, "sc_nb", ctx);
    series.push(scA, scB);
  }

  const panel = new Panel(
    domainOf([t], [t[0] ?? 0]),
    domainOf(series, [0]),
    "Ensemble mean photon numbers",
    "t (units of 1/gamma_a)",
    "photon number",
  );
  panel.band(t, loA, hiA, PALETTE[0]!);
  panel.band(t, loB, hiB, PALETTE[1]!);
  panel.line(t, na, PALETTE[0]!, "signal <n_a>");
  panel.line(t, nb, PALETTE[1]!, "pump <n_b>");
  if (hasTrace) {
    panel.line(t, scA, PALETTE[0]!, "mean-field n_a", "5 4", 1.2);
    panel.line(t, scB, PALETTE[1]!, "mean-field n_b", "5 4", 1.2);
  }
  return panel.toSvg();
}

const SCAN_X_CANDIDATES = ["epsilon_b", "epsilon_a", "alpha0"];

/** The scan axis is whichever candidate column actually varies. */
function scanAxis(table: Table, ctx: string): { name: string; values: number[] } {
  let fallback: { name: string; values: number[] } | null = null;
  for (const name of SCAN_X_CANDIDATES) {
    if (!table.columns.includes(name)) continue;
    const values = numberColumn(table, name, ctx);
    fallback = fallback ?? { name, values };
    if (new Set(values).size > 1) return { name, values };
  }
  if (fallback) return fallback;
  throw new DataError(
    `missing column "epsilon_b" (required for ${ctx}); no scan axis found`,
  );
}

function branchScan(table: Table, source: string): string {
  const ctx = `kind "branch-scan" (${source})`;
  const axis = scanAxis(table, ctx);
  const branch = textColumn(table, "branch", ctx);
  const alphaAbs = numberColumn(table, "branch_alpha_abs", ctx);
  const stable = boolColumn(table, "branch_stable", ctx);
  const sdeMean = numberColumn(table, "sde_abs_alpha_mean", ctx);
  const sdeErr = numberColumn(table, "sde_abs_alpha_stderr", ctx);
  const valid = boolColumn(table, "valid", ctx);

  const panel = new Panel(
    domainOf([axis.values]),
    domainOf([alphaAbs, sdeMean], [0]),
    "Steady-state branches and ensemble endpoints",
    axis.name,
    "|alpha|",
  );

  // shade scan points whose ensemble run was flagged invalid
  const uniqueX = [...new Set(axis.values)].sort((a, b) => a - b);
  const invalidX = new Set(
    axis.values.filter((_, i) => !valid[i]).map((v) => v),
  );
  shadeInvalid(panel, uniqueX, uniqueX.map((v) => !invalidX.has(v)));

  const names = [...new Set(branch)];
  names.sort();
  names.forEach((name, k) => {
    const idx = branch
      .map((b, i) => (b === name ? i : -1))
      .filter((i) => i >= 0)
      .sort((a, b) => axis.values[a]! - axis.values[b]!);
    const color = PALETTE[k % PALETTE.length]!;
    const solid = idx.filter((i) => stable[i]);
    const dashed = idx.filter((i) => !stable[i]);
    if (solid.length > 0) {
      panel.line(
        solid.map((i) => axis.values[i]!),
        solid.map((i) => alphaAbs[i]!),
        color,
        `${name} (stable)`,
      );
    }
    if (dashed.length > 0) {
      panel.line(
        dashed.map((i) => axis.values[i]!),
        dashed.map((i) => alphaAbs[i]!),
        color,
        `${name} (unstable)`,
        "4 4",
      );
    }
  });

  // one ensemble endpoint per scan value; rows repeat it per branch
  const seen = new Set<number>();
  const ex: number[] = [];
  const ey: number[] = [];
  const ee: number[] = [];
  axis.values.forEach((v, i) => {
    if (seen.has(v)) return;
    seen.add(v);
    ex.push(v);
    ey.push(sdeMean[i]!);
    ee.push(sdeErr[i]!);
  });
  panel.errorBars(ex, ey, ee, "#222222");
  panel.markers(ex, ey, "#222222", "ensemble <|alpha|>");
  return panel.toSvg();
}

function spectrum(table: Table, source: string): string {
  const ctx = `kind "spectrum" (${source})`;
  const omega = numberColumn(table, "omega", ctx);
  const names = ["V_Xa", "V_Ya", "V_Xb", "V_Yb"];
  requireColumns(table, names, ctx);
  const valid = boolColumn(table, "valid", ctx);

  const cols = names.map((n) => numberColumn(table, n, ctx));
  const panel = new Panel(
    domainOf([omega]),
    domainOf(cols, [0, 1.4]),
    "Output quadrature spectra",
    "omega (units of gamma_a)",
    "variance",
  );
  shadeInvalid(panel, omega, valid);
  panel.hline(1.0, "ref-vacuum", "vacuum");
  names.forEach((n, k) => panel.line(omega, cols[k]!, PALETTE[k % PALETTE.length]!, n));
  return panel.toSvg();
}

function spectrumSurface(table: Table, source: string): string {
  const ctx = `kind "spectrum-surface" (${source})`;
  const eps = numberColumn(table, "epsilon_b", ctx);
  const omega = numberColumn(table, "omega", ctx);
  const vya = numberColumn(table, "V_Ya", ctx);
  const valid = boolColumn(table, "valid", ctx);

  const levels = [...new Set(eps)].sort((a, b) => a - b);
  const panel = new Panel(
    domainOf([omega]),
    domainOf([vya], [0, 1.4]),
    "Signal squeezing across pump amplitudes",
    "omega (units of gamma_a)",
    "V_Ya",
  );
  panel.hline(1.0, "ref-vacuum", "vacuum");
  levels.forEach((level, k) => {
    const idx = eps
      .map((v, i) => (v === level ? i : -1))
      .filter((i) => i >= 0)
      .sort((a, b) => omega[a]! - omega[b]!);
    const xs = idx.map((i) => omega[i]!);
    if (idx.some((i) => !valid[i])) {
      shadeInvalid(panel, xs, idx.map((i) => valid[i]!));
    }
    // ramp from light to dark blue with pump strength
    const f = levels.length > 1 ? k / (levels.length - 1) : 0;
    const ch = (a: number, b: number) =>
      Math.round(a + (b - a) * f)
        .toString(16)
        .padStart(2, "0");
    const color = `#${ch(0x9e, 0x10)}${ch(0xc4, 0x2e)}${ch(0xe8, 0x66)}`;
    panel.line(xs, idx.map((i) => vya[i]!), color, `eps_b = ${fmt(level)}`);
  });
  return panel.toSvg();
}

function duanSimon(table: Table, source: string): string {
  const ctx = `kind "ds" (${source})`;
  const omega = numberColumn(table, "omega", ctx);
  const plus = numberColumn(table, "DS_plus", ctx);
  const minus = numberColumn(table, "DS_minus", ctx);
  const valid = boolColumn(table, "valid", ctx);

  const panel = new Panel(
    domainOf([omega]),
    domainOf([plus, minus], [3.6, 4.2]),
    "Two-mode separability witnesses",
    "omega (units of gamma_a)",
    "combined variance",
  );
  shadeInvalid(panel, omega, valid);
  panel.hline(4.0, "ref-ds-bound", "separability bound");
  panel.line(omega, plus, PALETTE[0]!, "DS_plus");
  panel.line(omega, minus, PALETTE[1]!, "DS_minus");
  return panel.toSvg();
}

const MCWF_OBSERVABLES = ["na", "nb"];

function mcwfCompare(table: Table, source: string): string {
  const ctx = `kind "mcwf-compare" (${source})`;
  const t = numberColumn(table, "t", ctx);
  const series: number[][] = [];
  const data: Record<string, { m: number[]; me: number[]; s: number[]; se: number[] }> = {};
  for (const name of MCWF_OBSERVABLES) {
    const m = numberColumn(table, `mcwf_${name}`, ctx);
    const me = numberColumn(table, `mcwf_${name}_stderr`, ctx);
    const s = numberColumn(table, `sde_${name}`, ctx);
    const se = numberColumn(table, `sde_${name}_stderr`, ctx);
    data[name] = { m, me, s, se };
    series.push(
      m.map((v, i) => v + me[i]!),
      m.map((v, i) => v - me[i]!),
      s.map((v, i) => v + se[i]!),
      s.map((v, i) => v - se[i]!),
    );
  }
  const panel = new Panel(
    domainOf([t], [t[0] ?? 0]),
    domainOf(series, [0]),
    "Wave-function vs trajectory-ensemble observables",
    "t (units of 1/gamma_a)",
    "photon number",
  );
  MCWF_OBSERVABLES.forEach((name, k) => {
    const d = data[name]!;
    const color = PALETTE[k % PALETTE.length]!;
    panel.band(t, d.m.map((v, i) => v - d.me[i]!), d.m.map((v, i) => v + d.me[i]!), color);
    panel.band(t, d.s.map((v, i) => v - d.se[i]!), d.s.map((v, i) => v + d.se[i]!), color);
    panel.line(t, d.m, color, `wave function ${name}`);
    panel.line(t, d.s, color, `ensemble ${name}`, "5 4");
  });
  return panel.toSvg();
}

function fluctuation(table: Table, source: string): string {
  const ctx = `kind "fluctuation" (${source})`;
  const parameter = textColumn(table, "parameter", ctx);
  const value = numberColumn(table, "value", ctx);
  const ra = numberColumn(table, "ratio_a", ctx);
  const rb = numberColumn(table, "ratio_b", ctx);
  const flagged = boolColumn(table, "flagged", ctx);

  const order = value.map((_, i) => i).sort((a, b) => value[a]! - value[b]!);
  const xs = order.map((i) => value[i]!);
  const panel = new Panel(
    domainOf([xs]),
    domainOf([ra, rb], [0, 0.6]),
    "Relative quadrature spread over the scan",
    parameter[0] ?? "scan value",
    "spread / |mean|",
  );
  shadeInvalid(panel, xs, order.map((i) => !flagged[i]));
  panel.hline(0.5, "ref-flag-threshold", "flag threshold");
  panel.line(xs, order.map((i) => ra[i]!), PALETTE[0]!, "ratio_a");
  panel.line(xs, order.map((i) => rb[i]!), PALETTE[1]!, "ratio_b");
  panel.markers(xs, order.map((i) => ra[i]!), PALETTE[0]!);
  panel.markers(xs, order.map((i) => rb[i]!), PALETTE[1]!);
  return panel.toSvg();
}
