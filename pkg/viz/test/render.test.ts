import { createHash } from "node:crypto";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { readCellStream } from "../src/jsonl.js";
import { maxViolation, sliceToPlane } from "../src/polygon.js";
import { renderJob, renderToFile } from "../src/render.js";
import type { PlotJob } from "../src/types.js";

const here = path.dirname(fileURLToPath(import.meta.url));
const fixtures = path.join(here, "..", "fixtures");

function job(overrides: Partial<PlotJob>): PlotJob {
  return {
    inputPath: path.join(fixtures, "arrangement_cells.jsonl"),
    summaryPath: path.join(fixtures, "arrangement_summary.json"),
    outputPath: path.join(os.tmpdir(), `viz-test-${Date.now()}.svg`),
    which: "cells",
    plane: [0, 1],
    slice: {},
    seed: 0,
    ...overrides,
  };
}

const sha = (p: string) => createHash("sha256").update(fs.readFileSync(p)).digest("hex");

describe("arrangement fixture", () => {
  it("draws 7 regions whose vertices satisfy their H-reps within 1e-6", () => {
    const res = renderJob(job({}));
    expect(res.drawn).toBe(7);
    expect(res.skipped).toBe(0);
    for (let i = 0; i < res.loops.length; i++) {
      expect(res.loops[i].length).toBeGreaterThanOrEqual(3);
      expect(maxViolation(res.systems[i], res.loops[i])).toBeLessThanOrEqual(1e-6);
    }
  });

  it("clips unbounded cells to the recorded domain box", () => {
    // several arrangement cells are unbounded before clipping; with the domain
    // appended every drawn loop stays inside the box
    const res = renderJob(job({}));
    for (const loop of res.loops) {
      for (const [x, y] of loop) {
        expect(Math.abs(x)).toBeLessThanOrEqual(2 + 1e-9);
        expect(Math.abs(y)).toBeLessThanOrEqual(2 + 1e-9);
      }
    }
  });

  it("writes an svg with one polygon element per region", () => {
    const j = job({});
    const res = renderToFile(j);
    const text = fs.readFileSync(j.outputPath, "utf8");
    expect((text.match(/<polygon /g) ?? []).length).toBe(res.drawn);
    fs.unlinkSync(j.outputPath);
  });

  it("is read-only on its inputs", () => {
    const j = job({});
    const before = [sha(j.inputPath), sha(j.summaryPath)];
    renderToFile(j);
    expect([sha(j.inputPath), sha(j.summaryPath)]).toEqual(before);
    fs.unlinkSync(j.outputPath);
  });

  it("renders deterministically for a fixed seed", () => {
    const a = renderJob(job({ seed: 9 }));
    const b = renderJob(job({ seed: 9 }));
    expect(a.svg).toBe(b.svg);
  });
});

describe("backward fixture", () => {
  it("shades only cells with nonempty payloads", () => {
    const res = renderJob(
      job({
        inputPath: path.join(fixtures, "backward_cells.jsonl"),
        summaryPath: path.join(fixtures, "backward_summary.json"),
        which: "backward-payloads",
      }),
    );
    const records = readCellStream(path.join(fixtures, "backward_cells.jsonl"));
    const nonempty = records.filter((r) => r.payload != null).length;
    expect(res.drawn).toBe(nonempty);
    expect(res.skipped).toBe(records.length - nonempty);
  });
});

describe("plane validation", () => {
  it("rejects out-of-range plane indices", () => {
    expect(() => renderJob(job({ plane: [0, 5] }))).toThrow(/out of range/);
  });
});

describe("multi-set payloads", () => {
  it("draws every nonempty entry of a payload list", () => {
    const tmpDir = fs.mkdtempSync(path.join(os.tmpdir(), "viz-multi-"));
    const boxRep = (lo: number, hi: number) => ({
      A: [
        [1, 0], [-1, 0],
        [0, 1], [0, -1],
      ],
      b: [hi, -lo, hi, -lo],
    });
    const rec = {
      ap: "AA==",
      hrep: boxRep(0, 1),
      C: [[1, 0]],
      d: [0],
      payload: [boxRep(0.1, 0.4), null, boxRep(0.6, 0.9)],
    };
    fs.writeFileSync(path.join(tmpDir, "cells.jsonl"), JSON.stringify(rec) + "\n");
    fs.writeFileSync(
      path.join(tmpDir, "summary.json"),
      JSON.stringify({ command: "backward", status: "COMPLETE", cells: 1, domain: null }),
    );
    const res = renderJob(
      job({
        inputPath: path.join(tmpDir, "cells.jsonl"),
        summaryPath: path.join(tmpDir, "summary.json"),
        which: "backward-payloads",
      }),
    );
    expect(res.drawn).toBe(2);
    fs.rmSync(tmpDir, { recursive: true });
  });
});

describe("malformed input", () => {
  it("skips bad lines with a warning", () => {
    const tmp = path.join(os.tmpdir(), `viz-bad-${Date.now()}.jsonl`);
    const good = fs
      .readFileSync(path.join(fixtures, "arrangement_cells.jsonl"), "utf8")
      .split("\n")[0];
    fs.writeFileSync(tmp, `${good}\nnot json\n{"ap":"AA=="}\n`);
    const warnings: string[] = [];
    const records = readCellStream(tmp, (m) => warnings.push(m));
    expect(records).toHaveLength(1);
    expect(warnings).toHaveLength(2);
    fs.unlinkSync(tmp);
  });
});

describe("slices", () => {
  it("renders a 3D box through a 2D plane", () => {
    const tmpDir = fs.mkdtempSync(path.join(os.tmpdir(), "viz-slice-"));
    const cube = {
      ap: "AA==",
      hrep: {
        A: [
          [1, 0, 0], [-1, 0, 0],
          [0, 1, 0], [0, -1, 0],
          [0, 0, 1], [0, 0, -1],
        ],
        b: [1, 0, 1, 0, 1, 0],
      },
      C: [[1, 0, 0]],
      d: [0],
      payload: null,
    };
    fs.writeFileSync(path.join(tmpDir, "cells.jsonl"), JSON.stringify(cube) + "\n");
    fs.writeFileSync(
      path.join(tmpDir, "summary.json"),
      JSON.stringify({ command: "enumerate", status: "COMPLETE", cells: 1, domain: null }),
    );
    const res = renderJob(
      job({
        inputPath: path.join(tmpDir, "cells.jsonl"),
        summaryPath: path.join(tmpDir, "summary.json"),
        plane: [0, 1],
        slice: { 2: 0.5 },
      }),
    );
    expect(res.drawn).toBe(1);
    expect(res.loops[0]).toHaveLength(4);

    // a slice outside the cube draws nothing
    const miss = renderJob(
      job({
        inputPath: path.join(tmpDir, "cells.jsonl"),
        summaryPath: path.join(tmpDir, "summary.json"),
        plane: [0, 1],
        slice: { 2: 2.0 },
      }),
    );
    expect(miss.drawn).toBe(0);
    fs.rmSync(tmpDir, { recursive: true });
  });
});
