/** 2D halfspace intersection: recover an ordered vertex loop from A x <= b.
 *
 * Cells are small (a handful of constraints), so the O(m^2) pairwise line
 * intersection is fine and keeps the core toolkit free of vertex output.
 */

export interface Halfspace {
  a: [number, number];
  b: number;
}

const DEFAULT_TOL = 1e-9;

/** Restrict an n-dimensional halfspace system to a 2D plane.
 *
 * Keeps coordinates `plane`, substitutes fixed `slice` values elsewhere.
 * Returns null when a constraint becomes unsatisfiable on the slice (the
 * cell does not meet the slice plane).
 */
export function sliceToPlane(
  A: number[][],
  b: number[],
  plane: [number, number],
  slice: Record<number, number>,
  tol = 1e-9,
): Halfspace[] | null {
  const out: Halfspace[] = [];
  for (let i = 0; i < A.length; i++) {
    const row = A[i];
    let rhs = b[i];
    const a: [number, number] = [row[plane[0]] ?? 0, row[plane[1]] ?? 0];
    for (let k = 0; k < row.length; k++) {
      if (k === plane[0] || k === plane[1]) continue;
      const v = slice[k];
      if (v === undefined) {
        throw new Error(`dimension ${k} needs a slice value`);
      }
      rhs -= row[k] * v;
    }
    if (Math.abs(a[0]) <= tol && Math.abs(a[1]) <= tol) {
      if (rhs < -tol) return null; // slice misses the cell
      continue; // vacuous on this plane
    }
    out.push({ a, b: rhs });
  }
  return out;
}

function satisfiesAll(hs: Halfspace[], x: number, y: number, tol: number): boolean {
  for (const h of hs) {
    if (h.a[0] * x + h.a[1] * y > h.b + tol) return false;
  }
  return true;
}

/** Vertices of the (bounded) intersection, ordered counterclockwise. */
export function polygonVertices(hs: Halfspace[], tol = 1e-7): [number, number][] {
  const pts: [number, number][] = [];
  for (let i = 0; i < hs.length; i++) {
    for (let j = i + 1; j < hs.length; j++) {
      const [a1, b1] = [hs[i].a, hs[i].b];
      const [a2, b2] = [hs[j].a, hs[j].b];
      const det = a1[0] * a2[1] - a2[0] * a1[1];
      if (Math.abs(det) < DEFAULT_TOL) continue;
      const x = (b1 * a2[1] - b2 * a1[1]) / det;
      const y = (a1[0] * b2 - a2[0] * b1) / det;
      if (satisfiesAll(hs, x, y, tol)) pts.push([x, y]);
    }
  }
  // dedupe
  const uniq: [number, number][] = [];
  for (const p of pts) {
    if (!uniq.some((q) => Math.hypot(q[0] - p[0], q[1] - p[1]) < 1e-9)) {
      uniq.push(p);
    }
  }
  if (uniq.length < 3) return [];
  const cx = uniq.reduce((s, p) => s + p[0], 0) / uniq.length;
  const cy = uniq.reduce((s, p) => s + p[1], 0) / uniq.length;
  uniq.sort(
    (p, q) => Math.atan2(p[1] - cy, p[0] - cx) - Math.atan2(q[1] - cy, q[0] - cx),
  );
  return uniq;
}

/** Max violation of A x <= b over the loop (0 for a loop on its polyhedron). */
export function maxViolation(hs: Halfspace[], loop: [number, number][]): number {
  let worst = 0;
  for (const [x, y] of loop) {
    for (const h of hs) {
      worst = Math.max(worst, h.a[0] * x + h.a[1] * y - h.b);
    }
  }
  return worst;
}
