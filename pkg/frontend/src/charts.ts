/**
 * Dependency-free SVG chart fragments. These map service numbers to pixel
 * geometry; the numbers shown in labels are always the verbatim document
 * strings.
 */

export interface Series {
  name: string;
  values: number[];
  color: string;
}

const WIDTH = 560;
const HEIGHT = 220;
const PAD = 36;

function escapeXml(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}

function scale(values: number[], logScale: boolean): (v: number) => number {
  const transform = logScale ? (v: number) => Math.log10(Math.max(v, 1e-9)) : (v: number) => v;
  const transformed = values.map(transform);
  const lo = Math.min(...transformed, logScale ? Infinity : 0);
  const hi = Math.max(...transformed);
  const span = hi - lo || 1;
  return (v) => HEIGHT - PAD - ((transform(v) - lo) / span) * (HEIGHT - 2 * PAD);
}

export function lineChart(series: Series[], options: { logScale?: boolean; markerX?: number } = {}): string {
  const all = series.flatMap((s) => s.values);
  if (all.length === 0) return `<svg class="chart" viewBox="0 0 ${WIDTH} ${HEIGHT}"></svg>`;
  const y = scale(all, options.logScale ?? false);
  const maxLen = Math.max(...series.map((s) => s.values.length));
  const x = (i: number) => PAD + (i / Math.max(maxLen - 1, 1)) * (WIDTH - 2 * PAD);

  const paths = series
    .map((s) => {
      const points = s.values.map((v, i) => `${x(i).toFixed(1)},${y(v).toFixed(1)}`).join(" ");
      return `<polyline fill="none" stroke="${s.color}" stroke-width="2" points="${points}"/>`;
    })
    .join("");
  const legend = series
    .map(
      (s, i) =>
        `<text x="${PAD + i * 140}" y="16" fill="${s.color}" font-size="12">${escapeXml(s.name)}</text>`,
    )
    .join("");
  let marker = "";
  if (options.markerX !== undefined && maxLen > 1) {
    const mx = x(options.markerX).toFixed(1);
    marker =
      `<line x1="${mx}" y1="${PAD}" x2="${mx}" y2="${HEIGHT - PAD}" stroke="#888" stroke-dasharray="4 3"/>` +
      `<text x="${mx}" y="${HEIGHT - PAD + 14}" fill="#888" font-size="11" text-anchor="middle">n*</text>`;
  }
  const axis = `<line x1="${PAD}" y1="${HEIGHT - PAD}" x2="${WIDTH - PAD}" y2="${HEIGHT - PAD}" stroke="#ccc"/>`;
  return `<svg class="chart" viewBox="0 0 ${WIDTH} ${HEIGHT}">${axis}${paths}${marker}${legend}</svg>`;
}

/** Horizontal band per strategy: min..max daily cost across grid cells. */
export function bandChart(bands: Array<{ name: string; lo: number; hi: number; color: string }>): string {
  if (bands.length === 0) return `<svg class="chart" viewBox="0 0 ${WIDTH} 120"></svg>`;
  const hi = Math.max(...bands.map((b) => b.hi)) || 1;
  const rowH = 28;
  const height = bands.length * rowH + 24;
  const x = (v: number) => PAD + (v / hi) * (WIDTH - 2 * PAD);
  const rows = bands
    .map((b, i) => {
      const top = 12 + i * rowH;
      const left = x(b.lo);
      const width = Math.max(x(b.hi) - left, 2);
      return (
        `<rect x="${left.toFixed(1)}" y="${top}" width="${width.toFixed(1)}" height="14" fill="${b.color}" opacity="0.5"/>` +
        `<text x="${PAD}" y="${top + 11}" font-size="11" fill="#333">${escapeXml(b.name)}</text>`
      );
    })
    .join("");
  return `<svg class="chart" viewBox="0 0 ${WIDTH} ${height}">${rows}</svg>`;
}

/** Budget bar segmented by the five components, colored by health level. */
export function budgetBar(
  segments: Array<{ name: string; tokens: number }>,
  contextWindow: number,
  level: string,
): string {
  const levelColor: Record<string, string> = { low: "#2e7d32", medium: "#f9a825", high: "#c62828" };
  const color = levelColor[level] ?? "#666";
  const x = (tokens: number) => (tokens / contextWindow) * (WIDTH - 2 * PAD);
  let cursor = PAD;
  const opacities = [0.95, 0.75, 0.6, 0.45, 0.3];
  const rects = segments
    .map((seg, i) => {
      const w = x(seg.tokens);
      const rect = `<rect x="${cursor.toFixed(1)}" y="20" width="${Math.max(w, 0).toFixed(1)}" height="26" fill="${color}" opacity="${opacities[i % opacities.length]}"><title>${escapeXml(seg.name)}: ${seg.tokens}</title></rect>`;
      cursor += w;
      return rect;
    })
    .join("");
  const frame = `<rect x="${PAD}" y="20" width="${WIDTH - 2 * PAD}" height="26" fill="none" stroke="#999"/>`;
  const sixty = PAD + 0.6 * (WIDTH - 2 * PAD);
  const eightyFive = PAD + 0.85 * (WIDTH - 2 * PAD);
  const guides =
    `<line x1="${sixty}" y1="14" x2="${sixty}" y2="52" stroke="#f9a825" stroke-dasharray="3 3"/>` +
    `<line x1="${eightyFive}" y1="14" x2="${eightyFive}" y2="52" stroke="#c62828" stroke-dasharray="3 3"/>` +
    `<text x="${sixty}" y="12" font-size="10" text-anchor="middle" fill="#666">60%</text>` +
    `<text x="${eightyFive}" y="12" font-size="10" text-anchor="middle" fill="#666">85%</text>`;
  return `<svg class="chart" viewBox="0 0 ${WIDTH} 64">${rects}${frame}${guides}</svg>`;
}

export { escapeXml };
