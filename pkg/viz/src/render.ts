import * as fs from "node:fs";

import { colorStream } from "./colors.js";
import { payloadParts, readCellStream, readSummary } from "./jsonl.js";
import { Halfspace, polygonVertices, sliceToPlane } from "./polygon.js";
import { Drawable, renderSvg } from "./svg.js";
import type { HRep, PlotJob } from "./types.js";

export interface RenderResult {
  svg: string;
  drawn: number;
  skipped: number;
  loops: [number, number][][];
  /** halfspace systems aligned with loops, for fidelity checks */
  systems: Halfspace[][];
}

function toPlane(
  hrep: HRep,
  job: PlotJob,
  clip: Halfspace[] | null,
): Halfspace[] | null {
  const hs = sliceToPlane(hrep.A, hrep.b, job.plane, job.slice);
  if (hs === null) return null;
  return clip ? hs.concat(clip) : hs;
}

/** Render one plot job; pure apart from reading the two input files. */
export function renderJob(
  job: PlotJob,
  warn: (msg: string) => void = (m) => console.warn(m),
): RenderResult {
  const records = readCellStream(job.inputPath, warn);
  const summary = readSummary(job.summaryPath);

  const width = records[0]?.hrep.A[0]?.length;
  if (width !== undefined) {
    for (const idx of job.plane) {
      if (idx < 0 || idx >= width) {
        throw new Error(`plane index ${idx} out of range for ${width}-dimensional cells`);
      }
    }
  }

  // unbounded sets in view are clipped to the domain box recorded in the summary
  let clip: Halfspace[] | null = null;
  if (summary.domain && job.which === "cells") {
    clip = sliceToPlane(summary.domain.A, summary.domain.b, job.plane, job.slice);
  }

  const nextColor = colorStream(job.seed);
  const drawables: Drawable[] = [];
  const loops: [number, number][][] = [];
  const systems: Halfspace[][] = [];
  let skipped = 0;

  for (const rec of records) {
    const sources: HRep[] =
      job.which === "cells" ? [rec.hrep] : payloadParts(rec);
    if (sources.length === 0) {
      skipped += 1;
      continue;
    }
    let drewAny = false;
    for (const src of sources) {
      const hs = toPlane(src, job, clip);
      if (hs === null) continue;
      const loop = polygonVertices(hs);
      if (loop.length < 3) continue;
      drawables.push({ loop, fill: nextColor() });
      loops.push(loop);
      systems.push(hs);
      drewAny = true;
    }
    if (!drewAny) skipped += 1;
  }

  const svg = renderSvg(drawables);
  return { svg, drawn: drawables.length, skipped, loops, systems };
}

export function renderToFile(job: PlotJob, warn?: (msg: string) => void): RenderResult {
  const result = renderJob(job, warn);
  fs.writeFileSync(job.outputPath, result.svg);
  return result;
}
