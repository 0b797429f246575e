export { DataError, parseCsv, requireColumns, numberColumn, textColumn, boolColumn } from "./csv.js";
export type { Table } from "./csv.js";
export { KINDS, render } from "./figures.js";
export type { FigureKind } from "./figures.js";
export { runCli } from "./cli.js";
