import { existsSync, mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";

import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { runCli } from "../src/cli.js";

const FIXTURES = fileURLToPath(new URL("./fixtures", import.meta.url));

let dir: string;
let stderrText: string;

beforeEach(() => {
  dir = mkdtempSync(join(tmpdir(), "render-"));
  stderrText = "";
  vi.spyOn(process.stderr, "write").mockImplementation((chunk) => {
    stderrText += String(chunk);
    return true;
  });
  vi.spyOn(process.stdout, "write").mockImplementation(() => true);
});

afterEach(() => {
  vi.restoreAllMocks();
});

describe("runCli", () => {
  it("renders a fixture to the requested path", () => {
    const out = join(dir, "fig.svg");
    const code = runCli([
      "--input", join(FIXTURES, "spectrum.csv"),
      "--kind", "spectrum",
      "--out", out,
    ]);
    expect(code).toBe(0);
    const svg = readFileSync(out, "utf8");
    expect(svg.startsWith("<svg ")).toBe(true);
    expect(svg).toContain('data-role="ref-vacuum"');
  });

  it("two invocations write byte-identical files", () => {
    const a = join(dir, "a.svg");
    const b = join(dir, "b.svg");
    const argv = ["--input", join(FIXTURES, "spectrum.csv"), "--kind", "ds"];
    expect(runCli([...argv, "--out", a])).toBe(0);
    expect(runCli([...argv, "--out", b])).toBe(0);
    expect(readFileSync(a)).toEqual(readFileSync(b));
  });

  it("requires all three flags", () => {
    expect(runCli(["--input", "x.csv"])).toBe(2);
    expect(stderrText).toContain("--input, --kind and --out are all required");
  });

  it("rejects an unknown kind before touching the input", () => {
    const out = join(dir, "fig.svg");
    const code = runCli([
      "--input", join(FIXTURES, "spectrum.csv"),
      "--kind", "pie",
      "--out", out,
    ]);
    expect(code).toBe(2);
    expect(stderrText).toContain('unknown figure kind "pie"');
    expect(existsSync(out)).toBe(false);
  });

  it("empty CSV errors and writes no file", () => {
    const input = join(dir, "empty.csv");
    const out = join(dir, "fig.svg");
    writeFileSync(input, "");
    const code = runCli(["--input", input, "--kind", "spectrum", "--out", out]);
    expect(code).toBe(1);
    expect(stderrText).toContain("empty CSV");
    expect(existsSync(out)).toBe(false);
  });

  it("header-only CSV errors and writes no file", () => {
    const input = join(dir, "hdr.csv");
    const out = join(dir, "fig.svg");
    writeFileSync(input, "omega,V_Xa\n");
    const code = runCli(["--input", input, "--kind", "spectrum", "--out", out]);
    expect(code).toBe(1);
    expect(stderrText).toContain("no data rows");
    expect(existsSync(out)).toBe(false);
  });

  it("missing column errors name the column and write no file", () => {
    const input = join(dir, "cut.csv");
    const out = join(dir, "fig.svg");
    writeFileSync(input, "omega,V_Xa\n0,1\n1,1\n");
    const code = runCli(["--input", input, "--kind", "spectrum", "--out", out]);
    expect(code).toBe(1);
    expect(stderrText).toContain('missing column "V_Ya"');
    expect(existsSync(out)).toBe(false);
  });

  it("unreadable input reports the path", () => {
    const code = runCli([
      "--input", join(dir, "nope.csv"),
      "--kind", "spectrum",
      "--out", join(dir, "fig.svg"),
    ]);
    expect(code).toBe(1);
    expect(stderrText).toContain("cannot read");
  });
});
