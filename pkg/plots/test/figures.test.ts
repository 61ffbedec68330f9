import { mkdtempSync, readFileSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { describe, expect, it } from "vitest";

import { EmptyReportError, MissingColumnError, readReport } from "../src/csv";
import { FigureKind, REQUIRED_COLUMNS, renderFigure, renderFigureToFile } from "../src/figures";
import { main } from "../src/cli";

const FIXTURES = join(__dirname, "..", "fixtures");

const FIXTURE_FOR: Record<FigureKind, string[]> = {
  "hit-curve": [join(FIXTURES, "recur_divergent.csv")],
  "ratio-band": [
    join(FIXTURES, "en_root_empty.csv"),
    join(FIXTURES, "en_root_0.csv"),
  ],
  "ce-growth": [join(FIXTURES, "corr_divergent.csv")],
  "cover-tail": [join(FIXTURES, "cover_convergent.csv")],
};

function tmpOut(name: string): string {
  return join(mkdtempSync(join(tmpdir(), "confrec-plots-")), name);
}

describe("csv reader", () => {
  it("parses fixtures and skips comments", () => {
    const t = readReport(FIXTURE_FOR["hit-curve"][0]);
    expect(t.header).toContain("hit_rate");
    expect(t.rowCount).toBe(25);
    expect(t.comments.some((c) => c.startsWith("schema_version"))).toBe(true);
  });

  it("reports a missing column by name", () => {
    const t = readReport(FIXTURE_FOR["hit-curve"][0]);
    expect(() => t.column("nope")).toThrow(MissingColumnError);
  });

  it("rejects an empty body", () => {
    const p = tmpOut("empty.csv");
    writeFileSync(p, "# comment only\nn,hit_rate\n");
    expect(() => readReport(p)).toThrow(EmptyReportError);
    expect(() => readReport(p)).toThrow(/no rows/);
  });
});

describe("figure rendering", () => {
  for (const kind of Object.keys(FIXTURE_FOR) as FigureKind[]) {
    it(`renders ${kind} and consumes every declared column`, () => {
      const out = tmpOut(`${kind}.svg`);
      const { svg, tables } = renderFigure({
        kind,
        inputs: FIXTURE_FOR[kind],
        output: out,
      });
      expect(svg.startsWith("<svg")).toBe(true);
      expect(svg).toContain("<polyline");
      expect(svg).toContain("</svg>");
      for (const table of tables) {
        const seen = new Set(table.accessedColumns());
        for (const col of REQUIRED_COLUMNS[kind]) {
          expect(seen.has(col), `${kind} must read ${col}`).toBe(true);
        }
      }
    });
  }

  it("is byte-stable across re-renders", () => {
    const a = renderFigure({
      kind: "hit-curve",
      inputs: FIXTURE_FOR["hit-curve"],
      output: "unused.svg",
    }).svg;
    const b = renderFigure({
      kind: "hit-curve",
      inputs: FIXTURE_FOR["hit-curve"],
      output: "unused.svg",
    }).svg;
    expect(a).toBe(b);
  });

  it("overlays two ratio-band inputs with comparable bands", () => {
    const { svg } = renderFigure({
      kind: "ratio-band",
      inputs: FIXTURE_FOR["ratio-band"],
      output: "unused.svg",
    });
    expect((svg.match(/<polygon/g) ?? []).length).toBeGreaterThanOrEqual(2);
    expect(svg).toContain("root=(empty)");
    expect(svg).toContain("root=0");
  });

  it("fails descriptively when a column is missing", () => {
    const p = tmpOut("broken.csv");
    writeFileSync(p, "n,hit_rate\n1,0.5\n2,0.25\n");
    expect(() =>
      renderFigure({ kind: "hit-curve", inputs: [p], output: "unused.svg" }),
    ).toThrow(/column 'phi_gamma' not found/);
  });

  it("writes the SVG file", () => {
    const out = tmpOut("cover.svg");
    renderFigureToFile({ kind: "cover-tail", inputs: FIXTURE_FOR["cover-tail"], output: out });
    const content = readFileSync(out, "utf8");
    expect(content).toContain("Covering-side tail sums");
  });
});

describe("cli", () => {
  it("renders through the command line", () => {
    const out = tmpOut("cli.svg");
    const rc = main(["hit-curve", "--in", FIXTURE_FOR["hit-curve"][0], "--out", out]);
    expect(rc).toBe(0);
    expect(readFileSync(out, "utf8")).toContain("<svg");
  });

  it("rejects unknown kinds and missing flags", () => {
    expect(main(["nope", "--in", "x", "--out", "y"])).toBe(2);
    expect(main(["hit-curve", "--in", "x"])).toBe(2);
    expect(main(["hit-curve", "--out", "y"])).toBe(2);
  });

  it("propagates render errors with nonzero exit", () => {
    const p = tmpOut("broken.csv");
    writeFileSync(p, "n,hit_rate\n1,0.5\n");
    const out = tmpOut("broken.svg");
    expect(main(["hit-curve", "--in", p, "--out", out])).toBe(1);
  });
});
