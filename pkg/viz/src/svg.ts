/** Minimal SVG output: filled polygon loops in math coordinates (y up). */

export interface Drawable {
  loop: [number, number][];
  fill: string;
}

export function renderSvg(
  polys: Drawable[],
  width = 800,
  height = 800,
  margin = 20,
): string {
  const xs = polys.flatMap((p) => p.loop.map((v) => v[0]));
  const ys = polys.flatMap((p) => p.loop.map((v) => v[1]));
  const [minX, maxX] = xs.length ? [Math.min(...xs), Math.max(...xs)] : [0, 1];
  const [minY, maxY] = ys.length ? [Math.min(...ys), Math.max(...ys)] : [0, 1];
  const spanX = maxX - minX || 1;
  const spanY = maxY - minY || 1;
  const scale = Math.min((width - 2 * margin) / spanX, (height - 2 * margin) / spanY);
  const tx = (x: number) => margin + (x - minX) * scale;
  const ty = (y: number) => height - margin - (y - minY) * scale;

  const shapes = polys
    .map((p) => {
      const pts = p.loop.map(([x, y]) => `${tx(x).toFixed(2)},${ty(y).toFixed(2)}`);
      return `<polygon points="${pts.join(" ")}" fill="${p.fill}" stroke="#333" stroke-width="0.6"/>`;
    })
    .join("\n  ");
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}">\n` +
    `  <rect width="${width}" height="${height}" fill="white"/>\n` +
    `  ${shapes}\n</svg>\n`
  );
}
