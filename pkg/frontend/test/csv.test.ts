import { describe, expect, it } from "vitest";

import {
  boolColumn,
  DataError,
  numberColumn,
  parseCsv,
  requireColumns,
  textColumn,
} from "../src/csv.js";

describe("parseCsv", () => {
  it("splits header and rows", () => {
    const t = parseCsv("a,b,c\n1,2.5,true\n-3,0.001,false\n");
    expect(t.columns).toEqual(["a", "b", "c"]);
    expect(t.rows).toHaveLength(2);
    expect(t.rows[1]).toEqual(["-3", "0.001", "false"]);
  });

  it("accepts CRLF line endings and skips blank lines", () => {
    const t = parseCsv("a,b\r\n1,2\r\n\r\n3,4\r\n");
    expect(t.rows).toEqual([
      ["1", "2"],
      ["3", "4"],
    ]);
  });

  it("rejects an empty file", () => {
    expect(() => parseCsv("", "run.csv")).toThrow(/empty CSV: run.csv/);
  });

  it("rejects a header with no data rows", () => {
    expect(() => parseCsv("a,b\n", "run.csv")).toThrow(/no data rows/);
  });

  it("rejects ragged rows with the line number", () => {
    expect(() => parseCsv("a,b\n1,2\n1,2,3\n", "run.csv")).toThrow(
      /line 3: 3 fields, header has 2/,
    );
  });
});

describe("column access", () => {
  const table = parseCsv("omega,V_Ya,valid,name\n0.5,0.9,true,upper\n1.5,1.1,false,lower\n");

  it("missing column errors name the column and what needed it", () => {
    let message = "";
    try {
      requireColumns(table, ["omega", "DS_plus"], 'kind "ds" (run.csv)');
    } catch (err) {
      message = (err as Error).message;
    }
    expect(message).toContain('missing column "DS_plus"');
    expect(message).toContain('kind "ds"');
    expect(message).toContain("omega, V_Ya, valid, name");
  });

  it("number column parses and validates", () => {
    expect(numberColumn(table, "V_Ya", "test")).toEqual([0.9, 1.1]);
    expect(() => numberColumn(table, "name", "test")).toThrow(
      /column "name" row 1: "upper" is not a finite number/,
    );
  });

  it("bool and text columns", () => {
    expect(boolColumn(table, "valid", "test")).toEqual([true, false]);
    expect(textColumn(table, "name", "test")).toEqual(["upper", "lower"]);
  });

  it("errors are DataError instances", () => {
    expect(() => parseCsv("")).toThrow(DataError);
    expect(() => requireColumns(table, ["nope"], "test")).toThrow(DataError);
  });
});
