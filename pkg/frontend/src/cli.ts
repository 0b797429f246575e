#!/usr/bin/env node
/**
 * tripletdc-render --input run.csv --kind timeseries --out fig.svg
 *
 * Reads one CSV produced by the simulation CLI and writes one SVG. The
 * output file is only written after rendering succeeds, so a bad input
 * never leaves a truncated or stale figure behind.
 */

import { readFileSync, realpathSync, writeFileSync } from "node:fs";
import { basename } from "node:path";
import { parseArgs } from "node:util";
import { pathToFileURL } from "node:url";

import { DataError, parseCsv } from "./csv.js";
import { KINDS, render } from "./figures.js";

const USAGE =
  "usage: tripletdc-render --input FILE.csv --kind KIND --out FILE.svg\n" +
  `  KIND is one of: ${KINDS.join(", ")}`;

export function runCli(argv: string[]): number {
  let values: { input?: string; kind?: string; out?: string; help?: boolean };
  try {
    values = parseArgs({
      args: argv,
      options: {
        input: { type: "string" },
        kind: { type: "string" },
        out: { type: "string" },
        help: { type: "boolean", short: "h" },
      },
    }).values;
  } catch (err) {
    process.stderr.write(`error: ${(err as Error).message}\n${USAGE}\n`);
    return 2;
  }
  if (values.help) {
    process.stdout.write(USAGE + "\n");
    return 0;
  }
  if (!values.input || !values.kind || !values.out) {
    process.stderr.write(`error: --input, --kind and --out are all required\n${USAGE}\n`);
    return 2;
  }
  if (!(KINDS as readonly string[]).includes(values.kind)) {
    process.stderr.write(
      `error: unknown figure kind "${values.kind}"; expected one of ${KINDS.join(", ")}\n`,
    );
    return 2;
  }

  let text: string;
  try {
    text = readFileSync(values.input, "utf8");
  } catch (err) {
    process.stderr.write(`error: cannot read ${values.input}: ${(err as Error).message}\n`);
    return 1;
  }

  let svg: string;
  try {
    svg = render(values.kind, parseCsv(text, basename(values.input)), basename(values.input));
  } catch (err) {
    if (err instanceof DataError) {
      process.stderr.write(`error: ${err.message}\n`);
      return 1;
    }
    throw err;
  }

  writeFileSync(values.out, svg, "utf8");
  process.stdout.write(`wrote ${values.out}\n`);
  return 0;
}

// run only when invoked directly (node dist/cli.js or the bin link),
// not when imported by tests or by the library entry point
let isMain = false;
if (process.argv[1]) {
  try {
    isMain = import.meta.url === pathToFileURL(realpathSync(process.argv[1])).href;
  } catch {
    isMain = false;
  }
}
if (isMain) {
  process.exit(runCli(process.argv.slice(2)));
}
