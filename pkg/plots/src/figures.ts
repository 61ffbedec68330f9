/**
 * The four figure kinds over confrec reports.
 *
 * Each renderer declares the columns it consumes; rendering reads every
 * one of them (the tests verify this through the access log on CsvTable),
 * so schema drift in the reports fails loudly instead of silently
 * producing a stale figure.
 */

import { writeFileSync } from "fs";
import { CsvTable, readReport } from "./csv";
import { Band, ChartSpec, Series, renderChart } from "./svg";

export type FigureKind = "hit-curve" | "ratio-band" | "ce-growth" | "cover-tail";

export interface FigureSpec {
  kind: FigureKind;
  inputs: string[];
  output: string;
  linearY?: boolean;
}

export const REQUIRED_COLUMNS: Record<FigureKind, string[]> = {
  "hit-curve": ["n", "hit_rate", "unknown_rate", "phi_gamma", "rate_ratio"],
  "ratio-band": [
    "n", "members", "nu_En", "phi_gamma", "ratio",
    "nu_lo", "nu_hi", "ratio_lo", "ratio_hi",
  ],
  "ce-growth": [
    "n", "S", "S2", "ce_lower",
    "S_lo", "S_hi", "S2_lo", "S2_hi", "ce_lo", "ce_hi", "c_fit",
  ],
  "cover-tail": ["n", "term", "tail", "term_lo", "term_hi", "tail_lo", "tail_hi"],
};

const COLORS = ["#1f6fb2", "#c95f02", "#208f4e", "#8b4ac2"];

function sourceName(table: CsvTable, index: number): string {
  const rate = table.comments.find((c) => c.startsWith("rate="));
  const root = table.comments.find((c) => c.startsWith("root="));
  const bits = [rate, root].filter(Boolean).join(", ");
  return bits || `input ${index + 1}`;
}

function hitCurve(tables: CsvTable[], linearY: boolean): ChartSpec {
  const series: Series[] = [];
  const bands: Band[] = [];
  const notes: string[] = [];
  tables.forEach((t, i) => {
    const n = t.column("n");
    const hit = t.column("hit_rate");
    const phiG = t.column("phi_gamma");
    const ratio = t.column("rate_ratio");
    const unk = t.column("unknown_rate");
    const finiteRatios = ratio.filter((v) => Number.isFinite(v) && v > 0);
    const cLo = Math.min(...finiteRatios);
    const cHi = Math.max(...finiteRatios);
    series.push({
      x: n, y: hit, color: COLORS[(2 * i) % COLORS.length],
      label: `hit rate (${sourceName(t, i)})`, markers: true,
    });
    bands.push({
      x: n,
      lo: phiG.map((p) => cLo * p),
      hi: phiG.map((p) => cHi * p),
      color: COLORS[(2 * i) % COLORS.length],
      label: `guides ${fmtShort(cLo)}..${fmtShort(cHi)} x phi^gamma`,
    });
    notes.push(`max unknown rate ${fmtShort(Math.max(...unk))}`);
  });
  return {
    title: "Per-time hit rate against the phi^gamma guide band",
    subtitle: notes.join("; "),
    xLabel: "return time n",
    yLabel: "fraction of sampled points with |T^n x - x| < phi(n)",
    logY: !linearY,
    series,
    bands,
  };
}

function ratioBand(tables: CsvTable[], linearY: boolean): ChartSpec {
  const series: Series[] = [];
  const bands: Band[] = [];
  const notes: string[] = [];
  tables.forEach((t, i) => {
    const n = t.column("n");
    const ratio = t.column("ratio");
    const rLo = t.column("ratio_lo");
    const rHi = t.column("ratio_hi");
    const members = t.column("members");
    const nu = t.column("nu_En");
    const nuLo = t.column("nu_lo");
    const nuHi = t.column("nu_hi");
    const phiG = t.column("phi_gamma");
    series.push({
      x: n, y: ratio, color: COLORS[i % COLORS.length],
      label: `series ratio (${sourceName(t, i)})`, markers: true,
    });
    bands.push({ x: n, lo: rLo, hi: rHi, color: COLORS[i % COLORS.length] });
    const spread = Math.max(...ratio) / Math.min(...ratio);
    const widest = Math.max(...nuHi.map((hi, j) => hi - nuLo[j]));
    notes.push(
      `band max/min ${fmtShort(spread)}; last level: ${members[members.length - 1]} members, ` +
        `nu ${fmtShort(nu[nu.length - 1])} vs phi^gamma ${fmtShort(phiG[phiG.length - 1])}` +
        (widest > 0 ? `; max nu width ${fmtShort(widest)}` : ""),
    );
  });
  return {
    title: "Cumulative measure of the recurrence families vs the rate sums",
    subtitle: notes.join(" | "),
    xLabel: "level Q",
    yLabel: "sum nu(E_n) / (nu(root) * sum phi^gamma)",
    logY: false,
    series,
    bands,
  };
}

function ceGrowth(tables: CsvTable[], linearY: boolean): ChartSpec {
  const series: Series[] = [];
  const bands: Band[] = [];
  const notes: string[] = [];
  tables.forEach((t, i) => {
    const n = t.column("n");
    const ce = t.column("ce_lower");
    const ceLo = t.column("ce_lo");
    const ceHi = t.column("ce_hi");
    const s = t.column("S");
    const s2 = t.column("S2");
    const sLo = t.column("S_lo");
    const sHi = t.column("S_hi");
    const s2Lo = t.column("S2_lo");
    const s2Hi = t.column("S2_hi");
    const cFit = t.column("c_fit");
    series.push({
      x: n, y: ce, color: COLORS[i % COLORS.length],
      label: `second-moment lower bound (${sourceName(t, i)})`, markers: true,
    });
    bands.push({ x: n, lo: ceLo, hi: ceHi, color: COLORS[i % COLORS.length] });
    series.push({
      x: n, y: s, color: COLORS[(i + 2) % COLORS.length],
      label: "S = sum nu(E_n)", dashed: true,
    });
    const s2Width = Math.max(...s2Hi.map((hi, j) => hi - s2Lo[j]));
    const sWidth = Math.max(...sHi.map((hi, j) => hi - sLo[j]));
    notes.push(
      `final S2 ${fmtShort(s2[s2.length - 1])}, fitted C ${fmtShort(cFit[cFit.length - 1])}` +
        `, interval widths <= ${fmtShort(Math.max(s2Width, sWidth))}`,
    );
  });
  return {
    title: "Growth of the union lower bound S^2/S2",
    subtitle: notes.join(" | "),
    xLabel: "window end Q",
    yLabel: "measure lower bound",
    logY: false,
    series,
    bands,
  };
}

function coverTail(tables: CsvTable[], linearY: boolean): ChartSpec {
  const series: Series[] = [];
  const bands: Band[] = [];
  const notes: string[] = [];
  tables.forEach((t, i) => {
    const n = t.column("n");
    const term = t.column("term");
    const tail = t.column("tail");
    const termLo = t.column("term_lo");
    const termHi = t.column("term_hi");
    const tailLo = t.column("tail_lo");
    const tailHi = t.column("tail_hi");
    series.push({
      x: n, y: tail, color: COLORS[i % COLORS.length],
      label: `covering tail (${sourceName(t, i)})`, markers: true,
    });
    bands.push({ x: n, lo: tailLo, hi: tailHi, color: COLORS[i % COLORS.length] });
    series.push({
      x: n, y: term, color: COLORS[(i + 1) % COLORS.length],
      label: "per-level term", dashed: true,
    });
    bands.push({ x: n, lo: termLo, hi: termHi, color: COLORS[(i + 1) % COLORS.length] });
    notes.push(`window total ${fmtShort(tail[0])}`);
  });
  return {
    title: "Covering-side tail sums",
    subtitle: notes.join(" | "),
    xLabel: "starting level n",
    yLabel: "sum over the window of (2K ||phi'|| phi)^gamma",
    logY: !linearY,
    series,
    bands,
  };
}

function fmtShort(v: number): string {
  if (!Number.isFinite(v)) return String(v);
  const a = Math.abs(v);
  if (a !== 0 && (a < 0.01 || a >= 10000)) return v.toExponential(2);
  return Number(v.toPrecision(3)).toString();
}

const BUILDERS: Record<FigureKind, (t: CsvTable[], linearY: boolean) => ChartSpec> = {
  "hit-curve": hitCurve,
  "ratio-band": ratioBand,
  "ce-growth": ceGrowth,
  "cover-tail": coverTail,
};

export function renderFigure(spec: FigureSpec): { svg: string; tables: CsvTable[] } {
  if (!(spec.kind in BUILDERS)) {
    throw new Error(`unknown figure kind '${spec.kind}'`);
  }
  if (spec.inputs.length === 0) {
    throw new Error("at least one --in report is required");
  }
  const tables = spec.inputs.map(readReport);
  const chart = BUILDERS[spec.kind](tables, spec.linearY ?? false);
  const svg = renderChart(chart);
  // every declared column must actually have been consumed
  for (const table of tables) {
    const seen = new Set(table.accessedColumns());
    for (const col of REQUIRED_COLUMNS[spec.kind]) {
      if (!seen.has(col)) {
        throw new Error(`figure ${spec.kind} did not consume declared column '${col}'`);
      }
    }
  }
  return { svg, tables };
}

export function renderFigureToFile(spec: FigureSpec): void {
  const { svg } = renderFigure(spec);
  writeFileSync(spec.output, svg, "utf8");
}
