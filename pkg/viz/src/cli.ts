#!/usr/bin/env node
/** polyreach-viz: render a cell stream to SVG.
 *
 *   polyreach-viz --input cells.jsonl --summary summary.json --output out.svg \
 *                 [--which cells|forward-payloads|backward-payloads] \
 *                 [--plane 0,1] [--slice 2=0.5,3=-1] [--seed 7]
 */

import { renderToFile } from "./render.js";
import type { PlotJob, Which } from "./types.js";

function parseArgs(argv: string[]): PlotJob {
  const opts = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    if (!key.startsWith("--") || i + 1 >= argv.length) {
      throw new Error(`bad argument: ${key}`);
    }
    opts.set(key.slice(2), argv[i + 1]);
  }
  const need = (k: string): string => {
    const v = opts.get(k);
    if (!v) throw new Error(`--${k} is required`);
    return v;
  };
  const planeText = opts.get("plane") ?? "0,1";
  const [p0, p1] = planeText.split(",").map(Number);
  if (!Number.isInteger(p0) || !Number.isInteger(p1) || p0 === p1) {
    throw new Error(`--plane needs two distinct indices, got ${planeText}`);
  }
  const slice: Record<number, number> = {};
  for (const part of (opts.get("slice") ?? "").split(",")) {
    if (!part) continue;
    const [k, v] = part.split("=");
    slice[Number(k)] = Number(v);
  }
  const which = (opts.get("which") ?? "cells") as Which;
  if (!["cells", "forward-payloads", "backward-payloads"].includes(which)) {
    throw new Error(`unknown --which ${which}`);
  }
  return {
    inputPath: need("input"),
    summaryPath: need("summary"),
    outputPath: need("output"),
    which,
    plane: [p0, p1],
    slice,
    seed: Number(opts.get("seed") ?? 0),
  };
}

export function main(argv: string[]): number {
  try {
    const job = parseArgs(argv);
    const res = renderToFile(job);
    console.log(
      `${res.drawn} polygons (${res.skipped} records skipped) -> ${job.outputPath}`,
    );
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

process.exit(main(process.argv.slice(2)));
