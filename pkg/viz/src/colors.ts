/** Deterministic random cell colors (seeded, so renders are reproducible). */

export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a |= 0;
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function colorStream(seed: number): () => string {
  const rand = mulberry32(seed);
  return () => {
    const h = Math.floor(rand() * 360);
    const s = 45 + Math.floor(rand() * 40);
    const l = 55 + Math.floor(rand() * 25);
    return `hsl(${h},${s}%,${l}%)`;
  };
}
