import * as fs from "node:fs";

import type { CellRecord, HRep, Summary } from "./types.js";

/** Parse a JSONL cell stream; malformed lines are skipped with a warning. */
export function readCellStream(
  path: string,
  warn: (msg: string) => void = (m) => console.warn(m),
): CellRecord[] {
  const text = fs.readFileSync(path, "utf8");
  const out: CellRecord[] = [];
  const lines = text.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (!line) continue;
    try {
      const rec = JSON.parse(line) as CellRecord;
      if (!rec.hrep || !Array.isArray(rec.hrep.A) || !Array.isArray(rec.hrep.b)) {
        throw new Error("missing hrep");
      }
      out.push(rec);
    } catch (err) {
      warn(`line ${i + 1}: skipping malformed record (${(err as Error).message})`);
    }
  }
  return out;
}

export function readSummary(path: string): Summary {
  return JSON.parse(fs.readFileSync(path, "utf8")) as Summary;
}

/** Payload entries of a record as a flat list of non-null polyhedra. */
export function payloadParts(rec: CellRecord): HRep[] {
  if (rec.payload == null) return [];
  if (Array.isArray(rec.payload)) {
    return rec.payload.filter((p): p is HRep => p != null);
  }
  return [rec.payload];
}
