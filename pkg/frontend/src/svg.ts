/**
 * Minimal deterministic SVG chart builder.
 *
 * Everything is a pure function of the data: no timestamps, no random ids,
 * fixed-precision coordinates. Rendering the same table twice must produce
 * byte-identical markup, which the tests assert.
 */

export const WIDTH = 760;
export const HEIGHT = 440;
const MARGIN = { left: 66, right: 18, top: 40, bottom: 50 };

export const PALETTE = [
  "#1f6fb4",
  "#c23b3b",
  "#2d8a4e",
  "#7d5bbd",
  "#d98321",
  "#5b7a8c",
];

/** Fixed-precision coordinate text so output never depends on locale. */
export function px(v: number): string {
  const r = Math.round(v * 100) / 100;
  return Object.is(r, -0) ? "0" : String(r);
}

/** Compact tick label: up to six significant digits, no trailing zeros. */
export function fmt(v: number): string {
  if (v === 0) return "0";
  const s = Number(v.toPrecision(6)).toString();
  return s === "-0" ? "0" : s;
}

export function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Tick positions at a 1/2/5 step covering [lo, hi]. */
export function niceTicks(lo: number, hi: number, target = 6): number[] {
  if (!(hi > lo)) return [lo];
  const raw = (hi - lo) / Math.max(2, target);
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  let step = mag;
  for (const m of [1, 2, 5, 10]) {
    if (raw <= m * mag) {
      step = m * mag;
      break;
    }
  }
  const ticks: number[] = [];
  const first = Math.ceil(lo / step - 1e-9) * step;
  for (let v = first; v <= hi + step * 1e-9; v += step) {
    // snap to a clean multiple so 0.30000000000000004 prints as 0.3
    ticks.push(Number((Math.round(v / step) * step).toPrecision(12)));
  }
  return ticks;
}

export interface Scale {
  (v: number): number;
  domain: [number, number];
}

function linearScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const span = d1 - d0 || 1;
  const fn = ((v: number) => r0 + ((v - d0) / span) * (r1 - r0)) as Scale;
  fn.domain = [d0, d1];
  return fn;
}

function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!Number.isFinite(lo)) return [0, 1];
  return [lo, hi];
}

export interface LegendEntry {
  label: string;
  color: string;
  dash?: string;
}

/**
 * One cartesian panel. Order of calls is the paint order; shaded regions
 * should be added before lines so they sit underneath.
 */
export class Panel {
  private body: string[] = [];
  private legendEntries: LegendEntry[] = [];
  readonly x: Scale;
  readonly y: Scale;

  constructor(
    xDomain: [number, number],
    yDomain: [number, number],
    private title: string,
    private xLabel: string,
    private yLabel: string,
  ) {
    const padY = (yDomain[1] - yDomain[0] || 1) * 0.06;
    this.x = linearScale(xDomain[0], xDomain[1], MARGIN.left, WIDTH - MARGIN.right);
    this.y = linearScale(
      yDomain[0] - padY,
      yDomain[1] + padY,
      HEIGHT - MARGIN.bottom,
      MARGIN.top,
    );
  }

  /** Shaded x interval, used for rows the producer marked invalid. */
  vband(x0: number, x1: number, role: string): void {
    const a = this.x(x0);
    const b = this.x(x1);
    const w = Math.max(Math.abs(b - a), 2);
    this.body.push(
      `<rect data-role="${esc(role)}" x="${px(Math.min(a, b))}" y="${px(MARGIN.top)}" ` +
        `width="${px(w)}" height="${px(HEIGHT - MARGIN.top - MARGIN.bottom)}" ` +
        `fill="#d9534f" opacity="0.12"/>`,
    );
  }

  /** Horizontal reference line across the panel at data height v. */
  hline(v: number, role: string, label: string, color = "#444444"): void {
    const yy = px(this.y(v));
    this.body.push(
      `<line data-role="${esc(role)}" x1="${px(MARGIN.left)}" y1="${yy}" ` +
        `x2="${px(WIDTH - MARGIN.right)}" y2="${yy}" stroke="${color}" ` +
        `stroke-width="1" stroke-dasharray="6 3"/>`,
      `<text x="${px(WIDTH - MARGIN.right - 4)}" y="${px(this.y(v) - 4)}" ` +
        `font-size="10" text-anchor="end" fill="${color}">${esc(label)}</text>`,
    );
  }

  line(
    xs: number[],
    ys: number[],
    color: string,
    label?: string,
    dash?: string,
    width = 1.6,
  ): void {
    const pts = xs.map((v, i) => `${px(this.x(v))},${px(this.y(ys[i]!))}`).join(" ");
    const dashAttr = dash ? ` stroke-dasharray="${dash}"` : "";
    this.body.push(
      `<polyline points="${pts}" fill="none" stroke="${color}" ` +
        `stroke-width="${width}"${dashAttr}/>`,
    );
    if (label) this.legendEntries.push({ label, color, dash });
  }

  /** Filled band between lo and hi, for mean plus/minus stderr. */
  band(xs: number[], lo: number[], hi: number[], color: string): void {
    const fwd = xs.map((v, i) => `${px(this.x(v))},${px(this.y(hi[i]!))}`);
    const back = xs
      .map((v, i) => `${px(this.x(v))},${px(this.y(lo[i]!))}`)
      .reverse();
    this.body.push(
      `<polygon points="${fwd.concat(back).join(" ")}" fill="${color}" ` +
        `opacity="0.15" stroke="none"/>`,
    );
  }

  markers(xs: number[], ys: number[], color: string, label?: string): void {
    for (let i = 0; i < xs.length; i++) {
      this.body.push(
        `<circle cx="${px(this.x(xs[i]!))}" cy="${px(this.y(ys[i]!))}" r="3" ` +
          `fill="${color}"/>`,
      );
    }
    if (label) this.legendEntries.push({ label, color });
  }

  errorBars(xs: number[], ys: number[], err: number[], color: string): void {
    for (let i = 0; i < xs.length; i++) {
      const cx = px(this.x(xs[i]!));
      const y0 = px(this.y(ys[i]! - err[i]!));
      const y1 = px(this.y(ys[i]! + err[i]!));
      this.body.push(
        `<line x1="${cx}" y1="${y0}" x2="${cx}" y2="${y1}" stroke="${color}" ` +
          `stroke-width="1.2"/>`,
      );
    }
  }

  private frame(): string[] {
    const out: string[] = [];
    const x0 = MARGIN.left;
    const x1 = WIDTH - MARGIN.right;
    const y0 = HEIGHT - MARGIN.bottom;
    const y1 = MARGIN.top;
    for (const t of niceTicks(this.x.domain[0], this.x.domain[1])) {
      const tx = px(this.x(t));
      out.push(
        `<line x1="${tx}" y1="${px(y0)}" x2="${tx}" y2="${px(y1)}" ` +
          `stroke="#dddddd" stroke-width="0.6"/>`,
        `<text x="${tx}" y="${px(y0 + 16)}" font-size="11" ` +
          `text-anchor="middle">${esc(fmt(t))}</text>`,
      );
    }
    for (const t of niceTicks(this.y.domain[0], this.y.domain[1])) {
      const ty = px(this.y(t));
      out.push(
        `<line x1="${px(x0)}" y1="${ty}" x2="${px(x1)}" y2="${ty}" ` +
          `stroke="#dddddd" stroke-width="0.6"/>`,
        `<text x="${px(x0 - 6)}" y="${px(this.y(t) + 4)}" font-size="11" ` +
          `text-anchor="end">${esc(fmt(t))}</text>`,
      );
    }
    out.push(
      `<rect x="${px(x0)}" y="${px(y1)}" width="${px(x1 - x0)}" ` +
        `height="${px(y0 - y1)}" fill="none" stroke="#333333" stroke-width="1"/>`,
      `<text x="${px((x0 + x1) / 2)}" y="${px(HEIGHT - 12)}" font-size="12" ` +
        `text-anchor="middle">${esc(this.xLabel)}</text>`,
      `<text x="16" y="${px((y0 + y1) / 2)}" font-size="12" text-anchor="middle" ` +
        `transform="rotate(-90 16 ${px((y0 + y1) / 2)})">${esc(this.yLabel)}</text>`,
      `<text x="${px(x0)}" y="24" font-size="14" font-weight="bold">` +
        `${esc(this.title)}</text>`,
    );
    return out;
  }

  private legend(): string[] {
    const out: string[] = [];
    let row = 0;
    for (const e of this.legendEntries) {
      const y = MARGIN.top + 14 + row * 16;
      const x = WIDTH - MARGIN.right - 150;
      const dashAttr = e.dash ? ` stroke-dasharray="${e.dash}"` : "";
      out.push(
        `<line x1="${px(x)}" y1="${px(y - 4)}" x2="${px(x + 22)}" y2="${px(y - 4)}" ` +
          `stroke="${e.color}" stroke-width="2"${dashAttr}/>`,
        `<text x="${px(x + 28)}" y="${px(y)}" font-size="11">${esc(e.label)}</text>`,
      );
      row += 1;
    }
    return out;
  }

  toSvg(): string {
    const parts = [
      `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
        `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="Helvetica, Arial, sans-serif">`,
      `<rect width="${WIDTH}" height="${HEIGHT}" fill="#ffffff"/>`,
      ...this.frame(),
      ...this.body,
      ...this.legend(),
      `</svg>`,
    ];
    return parts.join("\n") + "\n";
  }
}

/** Domain of a set of series plus any values that must stay in view. */
export function domainOf(series: number[][], pad: number[] = []): [number, number] {
  const all: number[] = [];
  for (const s of series) all.push(...s);
  all.push(...pad);
  return extent(all);
}
