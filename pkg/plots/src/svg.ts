/**
 * Minimal deterministic SVG chart builder: linear or log axes, polylines,
 * markers, shaded min/max bands, dashed guides. No timestamps, no
 * randomness, so re-rendering a figure from the same inputs is
 * byte-stable.
 */

export interface Series {
  x: number[];
  y: number[];
  color: string;
  label: string;
  dashed?: boolean;
  markers?: boolean;
}

export interface Band {
  x: number[];
  lo: number[];
  hi: number[];
  color: string;
  label?: string;
}

export interface ChartSpec {
  title: string;
  subtitle?: string;
  xLabel: string;
  yLabel: string;
  logY?: boolean;
  series: Series[];
  bands?: Band[];
}

const W = 760;
const H = 480;
const MARGIN = { left: 72, right: 24, top: 56, bottom: 52 };

function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 0.01 && a < 10000) {
    return Number(v.toPrecision(4)).toString();
  }
  return v.toExponential(1);
}

class Scale {
  constructor(
    private readonly lo: number,
    private readonly hi: number,
    private readonly outLo: number,
    private readonly outHi: number,
    private readonly log: boolean,
  ) {}

  to(v: number): number {
    const [a, b] = this.log
      ? [Math.log(this.lo), Math.log(this.hi)]
      : [this.lo, this.hi];
    const t = ((this.log ? Math.log(v) : v) - a) / (b - a || 1);
    return this.outLo + t * (this.outHi - this.outLo);
  }

  ticks(n = 6): number[] {
    if (this.log) {
      const lo = Math.ceil(Math.log10(this.lo));
      const hi = Math.floor(Math.log10(this.hi));
      const out: number[] = [];
      for (let e = lo; e <= hi; e++) out.push(10 ** e);
      if (out.length === 0) out.push(this.lo, this.hi);
      return out;
    }
    const step = (this.hi - this.lo) / (n - 1);
    return Array.from({ length: n }, (_, i) => this.lo + i * step);
  }
}

function extent(values: number[], logY: boolean): [number, number] {
  const finite = values.filter((v) => Number.isFinite(v) && (!logY || v > 0));
  if (finite.length === 0) return logY ? [1e-6, 1] : [0, 1];
  let lo = Math.min(...finite);
  let hi = Math.max(...finite);
  if (lo === hi) {
    lo = logY ? lo / 2 : lo - 1;
    hi = logY ? hi * 2 : hi + 1;
  }
  return [lo, hi];
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function renderChart(spec: ChartSpec): string {
  const xs = spec.series.flatMap((s) => s.x).concat((spec.bands ?? []).flatMap((b) => b.x));
  const ys = spec.series
    .flatMap((s) => s.y)
    .concat((spec.bands ?? []).flatMap((b) => b.lo.concat(b.hi)));
  const [xLo, xHi] = extent(xs, false);
  const [yLo, yHi] = extent(ys, spec.logY ?? false);

  const sx = new Scale(xLo, xHi, MARGIN.left, W - MARGIN.right, false);
  const sy = new Scale(yLo, yHi, H - MARGIN.bottom, MARGIN.top, spec.logY ?? false);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${H}" viewBox="0 0 ${W} ${H}">`,
    `<rect width="${W}" height="${H}" fill="white"/>`,
    `<text x="${MARGIN.left}" y="24" font-size="16" font-family="sans-serif" font-weight="bold">${esc(spec.title)}</text>`,
  );
  if (spec.subtitle) {
    parts.push(
      `<text x="${MARGIN.left}" y="42" font-size="11" font-family="sans-serif" fill="#555">${esc(spec.subtitle)}</text>`,
    );
  }

  // axes + grid
  for (const t of sx.ticks()) {
    const px = sx.to(t);
    parts.push(
      `<line x1="${px.toFixed(2)}" y1="${MARGIN.top}" x2="${px.toFixed(2)}" y2="${H - MARGIN.bottom}" stroke="#eee"/>`,
      `<text x="${px.toFixed(2)}" y="${H - MARGIN.bottom + 18}" font-size="10" font-family="sans-serif" text-anchor="middle">${fmt(t)}</text>`,
    );
  }
  for (const t of sy.ticks()) {
    const py = sy.to(t);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${py.toFixed(2)}" x2="${W - MARGIN.right}" y2="${py.toFixed(2)}" stroke="#eee"/>`,
      `<text x="${MARGIN.left - 6}" y="${(py + 3).toFixed(2)}" font-size="10" font-family="sans-serif" text-anchor="end">${fmt(t)}</text>`,
    );
  }
  parts.push(
    `<line x1="${MARGIN.left}" y1="${H - MARGIN.bottom}" x2="${W - MARGIN.right}" y2="${H - MARGIN.bottom}" stroke="#333"/>`,
    `<line x1="${MARGIN.left}" y1="${MARGIN.top}" x2="${MARGIN.left}" y2="${H - MARGIN.bottom}" stroke="#333"/>`,
    `<text x="${(MARGIN.left + W - MARGIN.right) / 2}" y="${H - 12}" font-size="12" font-family="sans-serif" text-anchor="middle">${esc(spec.xLabel)}</text>`,
    `<text x="16" y="${(MARGIN.top + H - MARGIN.bottom) / 2}" font-size="12" font-family="sans-serif" text-anchor="middle" transform="rotate(-90 16 ${(MARGIN.top + H - MARGIN.bottom) / 2})">${esc(spec.yLabel)}</text>`,
  );

  for (const band of spec.bands ?? []) {
    const fwd = band.x.map((x, i) => `${sx.to(x).toFixed(2)},${sy.to(band.hi[i]).toFixed(2)}`);
    const back = [...band.x]
      .map((x, i) => `${sx.to(x).toFixed(2)},${sy.to(band.lo[i]).toFixed(2)}`)
      .reverse();
    parts.push(
      `<polygon points="${fwd.concat(back).join(" ")}" fill="${band.color}" fill-opacity="0.25" stroke="none"/>`,
    );
  }

  for (const s of spec.series) {
    const pts = s.x
      .map((x, i) => [x, s.y[i]] as const)
      .filter(([, y]) => Number.isFinite(y) && (!spec.logY || y > 0));
    const path = pts.map(([x, y]) => `${sx.to(x).toFixed(2)},${sy.to(y).toFixed(2)}`).join(" ");
    parts.push(
      `<polyline points="${path}" fill="none" stroke="${s.color}" stroke-width="1.6"${s.dashed ? ' stroke-dasharray="6 4"' : ""}/>`,
    );
    if (s.markers) {
      for (const [x, y] of pts) {
        parts.push(
          `<circle cx="${sx.to(x).toFixed(2)}" cy="${sy.to(y).toFixed(2)}" r="2.6" fill="${s.color}"/>`,
        );
      }
    }
  }

  // legend
  let ly = MARGIN.top + 4;
  const legendItems = spec.series
    .map((s) => ({ label: s.label, color: s.color, dashed: s.dashed ?? false }))
    .concat(
      (spec.bands ?? [])
        .filter((b) => b.label)
        .map((b) => ({ label: b.label as string, color: b.color, dashed: false })),
    );
  for (const item of legendItems) {
    const lx = W - MARGIN.right - 190;
    parts.push(
      `<line x1="${lx}" y1="${ly}" x2="${lx + 22}" y2="${ly}" stroke="${item.color}" stroke-width="2"${item.dashed ? ' stroke-dasharray="6 4"' : ""}/>`,
      `<text x="${lx + 28}" y="${ly + 4}" font-size="11" font-family="sans-serif">${esc(item.label)}</text>`,
    );
    ly += 16;
  }

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
