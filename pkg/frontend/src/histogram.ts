/** Pure SVG builders for the counts histogram and telemetry sparklines.
 *
 * Both return markup strings so they can be unit-tested without a DOM and
 * injected with innerHTML. Bars carry data-bitstring/data-count attributes;
 * tests and the CSV view read those back instead of measuring pixels.
 */

export interface HistogramOptions {
  width?: number;
  barHeight?: number;
  gap?: number;
}

const FONT = 'font-family="ui-monospace, monospace" font-size="12"';

export function histogramSvg(counts: Record<string, number>, options: HistogramOptions = {}): string {
  const width = options.width ?? 460;
  const barHeight = options.barHeight ?? 22;
  const gap = options.gap ?? 6;
  const entries = Object.entries(counts).sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0));
  if (entries.length === 0) {
    return `<svg class="histogram" role="img" width="${width}" height="30" xmlns="http://www.w3.org/2000/svg">` +
      `<text x="0" y="20" ${FONT}>no counts</text></svg>`;
  }
  const total = entries.reduce((acc, [, n]) => acc + n, 0);
  const max = Math.max(...entries.map(([, n]) => n));
  const labelWidth = Math.max(...entries.map(([k]) => k.length)) * 8 + 12;
  const valueWidth = 110;
  const barSpan = width - labelWidth - valueWidth;
  const height = entries.length * (barHeight + gap) + gap;

  const rows = entries.map(([bits, count], index) => {
    const y = gap + index * (barHeight + gap);
    const w = max === 0 ? 0 : Math.max(1, Math.round((count / max) * barSpan));
    const share = total === 0 ? 0 : (count / total) * 100;
    return (
      `<g class="bar" data-bitstring="${bits}" data-count="${count}">` +
      `<text x="0" y="${y + barHeight - 6}" ${FONT}>${bits}</text>` +
      `<rect x="${labelWidth}" y="${y}" width="${w}" height="${barHeight}" rx="2"></rect>` +
      `<text x="${labelWidth + w + 6}" y="${y + barHeight - 6}" ${FONT}>` +
      `${count} (${share.toFixed(1)}%)</text></g>`
    );
  });
  return (
    `<svg class="histogram" role="img" width="${width}" height="${height}" ` +
    `xmlns="http://www.w3.org/2000/svg">${rows.join("")}</svg>`
  );
}

export interface SparklineOptions {
  width?: number;
  height?: number;
  label?: string;
}

/** Polyline over a numeric series; nulls (failed readings) break the line. */
export function sparklineSvg(values: Array<number | null>, options: SparklineOptions = {}): string {
  const width = options.width ?? 220;
  const height = options.height ?? 48;
  const pad = 4;
  const present = values.filter((v): v is number => v !== null);
  const points = present.length;
  if (points === 0) {
    return `<svg class="sparkline" data-points="0" width="${width}" height="${height}" ` +
      `xmlns="http://www.w3.org/2000/svg"><text x="4" y="${height - 8}" ${FONT}>n/a</text></svg>`;
  }
  const lo = Math.min(...present);
  const hi = Math.max(...present);
  const span = hi - lo || 1;
  const step = values.length > 1 ? (width - 2 * pad) / (values.length - 1) : 0;
  const segments: string[] = [];
  let current: string[] = [];
  values.forEach((value, index) => {
    if (value === null) {
      if (current.length > 0) {
        segments.push(current.join(" "));
        current = [];
      }
      return;
    }
    const x = pad + index * step;
    const y = height - pad - ((value - lo) / span) * (height - 2 * pad);
    current.push(`${x.toFixed(1)},${y.toFixed(1)}`);
  });
  if (current.length > 0) {
    segments.push(current.join(" "));
  }
  const lines = segments
    .map((pts) => `<polyline fill="none" stroke-width="1.5" points="${pts}"></polyline>`)
    .join("");
  const label = options.label
    ? `<text x="4" y="12" ${FONT}>${options.label}</text>`
    : "";
  return (
    `<svg class="sparkline" data-points="${points}" width="${width}" height="${height}" ` +
    `xmlns="http://www.w3.org/2000/svg">${label}${lines}</svg>`
  );
}
