/** Wire formats emitted by the polyreach CLI (JSONL cell stream + summary). */

export interface HRep {
  A: number[][];
  b: number[];
  provenance?: string[][];
}

export interface CellRecord {
  ap: string; // base64-packed activation bits
  hrep: HRep;
  C: number[][];
  d: number[];
  /** null, a single polyhedron, or one entry per output set */
  payload: HRep | (HRep | null)[] | null;
}

export interface Summary {
  command: string;
  status: string;
  cells: number;
  domain: HRep | null;
  [key: string]: unknown;
}

export type Which = "cells" | "forward-payloads" | "backward-payloads";

export interface PlotJob {
  inputPath: string;
  summaryPath: string;
  outputPath: string;
  which: Which;
  /** pair of input-dimension indices to draw */
  plane: [number, number];
  /** fixed values for the remaining dimensions, keyed by dimension index */
  slice: Record<number, number>;
  seed: number;
}
