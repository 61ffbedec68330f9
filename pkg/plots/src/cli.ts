#!/usr/bin/env node
/**
 * Usage: confrec-plot <kind> --in report.csv [--in report2.csv] --out fig.svg
 *                     [--linear-y]
 *
 * Kinds: hit-curve | ratio-band | ce-growth | cover-tail
 */

import { FigureKind, REQUIRED_COLUMNS, renderFigureToFile } from "./figures";

function usage(): string {
  return (
    "usage: confrec-plot <kind> --in PATH [--in PATH2] --out PATH [--linear-y]\n" +
    `kinds: ${Object.keys(REQUIRED_COLUMNS).join(" | ")}`
  );
}

export function main(argv: string[]): number {
  const args = [...argv];
  const kind = args.shift();
  if (kind === undefined || kind === "--help" || kind === "-h") {
    console.error(usage());
    return kind === undefined ? 2 : 0;
  }
  if (!(kind in REQUIRED_COLUMNS)) {
    console.error(`error: unknown figure kind '${kind}'\n${usage()}`);
    return 2;
  }
  const inputs: string[] = [];
  let output: string | undefined;
  let linearY = false;
  while (args.length > 0) {
    const flag = args.shift();
    if (flag === "--in") {
      const v = args.shift();
      if (!v) {
        console.error("error: --in needs a path");
        return 2;
      }
      inputs.push(v);
    } else if (flag === "--out") {
      output = args.shift();
      if (!output) {
        console.error("error: --out needs a path");
        return 2;
      }
    } else if (flag === "--linear-y") {
      linearY = true;
    } else {
      console.error(`error: unknown flag '${flag}'\n${usage()}`);
      return 2;
    }
  }
  if (inputs.length === 0 || output === undefined) {
    console.error(`error: --in and --out are required\n${usage()}`);
    return 2;
  }
  try {
    renderFigureToFile({ kind: kind as FigureKind, inputs, output, linearY });
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : String(err)}`);
    return 1;
  }
  console.log(`wrote ${output}`);
  return 0;
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
