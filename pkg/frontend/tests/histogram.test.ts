import { describe, expect, it } from "vitest";

import { histogramSvg, sparklineSvg } from "../src/histogram.js";

function barAttrs(svg: string): Array<{ bitstring: string; count: number; width: number }> {
  const bars: Array<{ bitstring: string; count: number; width: number }> = [];
  const pattern =
    /data-bitstring="([01]*)" data-count="(\d+)"[\s\S]*?<rect [^>]*width="(\d+)"/g;
  let match;
  while ((match = pattern.exec(svg)) !== null) {
    bars.push({ bitstring: match[1], count: Number(match[2]), width: Number(match[3]) });
  }
  return bars;
}

describe("histogramSvg", () => {
  it("renders one bar per bitstring with the exact counts", () => {
    const svg = histogramSvg({ "00": 504, "11": 520 });
    const bars = barAttrs(svg);
    expect(bars.map((b) => b.bitstring)).toEqual(["00", "11"]);
    expect(bars.map((b) => b.count)).toEqual([504, 520]);
  });

  it("sorts bars by bitstring regardless of input order", () => {
    const svg = histogramSvg({ "11": 1, "00": 2, "01": 3 });
    expect(barAttrs(svg).map((b) => b.bitstring)).toEqual(["00", "01", "11"]);
  });

  it("scales bar widths with the count and gives the max the full span", () => {
    const svg = histogramSvg({ "0": 250, "1": 1000 });
    const [small, big] = barAttrs(svg);
    expect(big.width).toBeGreaterThan(small.width);
    expect(Math.abs(small.width * 4 - big.width)).toBeLessThanOrEqual(4);
  });

  it("keeps tiny nonzero counts visible", () => {
    const svg = histogramSvg({ "0": 1, "1": 100000 });
    expect(barAttrs(svg)[0].width).toBeGreaterThanOrEqual(1);
  });

  it("shows a placeholder when there are no counts", () => {
    const svg = histogramSvg({});
    expect(svg).toContain("no counts");
    expect(barAttrs(svg)).toHaveLength(0);
  });

  it("includes percentage labels", () => {
    const svg = histogramSvg({ "0": 1, "1": 3 });
    expect(svg).toContain("(25.0%)");
    expect(svg).toContain("(75.0%)");
  });
});

describe("sparklineSvg", () => {
  it("reports the number of plotted points", () => {
    const svg = sparklineSvg([1, 2, 3, 4]);
    expect(svg).toContain('data-points="4"');
    expect(svg).toContain("<polyline");
  });

  it("breaks the line at null readings without dropping points", () => {
    const svg = sparklineSvg([1, null, 3, 4]);
    expect(svg).toContain('data-points="3"');
    expect(svg.match(/<polyline/g)).toHaveLength(2);
  });

  it("handles an all-null series with a placeholder", () => {
    const svg = sparklineSvg([null, null]);
    expect(svg).toContain('data-points="0"');
    expect(svg).not.toContain("<polyline");
  });

  it("renders a flat series without dividing by zero", () => {
    const svg = sparklineSvg([5, 5, 5]);
    expect(svg).toContain('data-points="3"');
    expect(svg).not.toContain("NaN");
  });
});
