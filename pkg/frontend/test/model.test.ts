import { describe, expect, it } from "vitest";

import {
  isTextRegion,
  orderProblems,
  regionById,
  textRegionIds,
  type RegionModel,
  type Segmentation,
} from "../src/model.js";

function region(id: string, kind: RegionModel["kind"]): RegionModel {
  return {
    id,
    kind,
    boundary: [[0, 0], [10, 0], [10, 10], [0, 10]],
    lines: kind === "image" ? null : [{ bbox: [0, 0, 10, 10], index: 0 }],
  };
}

function seg(regions: RegionModel[], order: string[]): Segmentation {
  return {
    page_id: "p0001",
    width: 600,
    height: 800,
    revision: 0,
    regions,
    reading_order: order,
  };
}

describe("isTextRegion", () => {
  it("treats everything except images as text", () => {
    expect(isTextRegion(region("r0001", "heading"))).toBe(true);
    expect(isTextRegion(region("r0002", "page-number"))).toBe(true);
    expect(isTextRegion(region("r0003", "image"))).toBe(false);
  });
});

describe("textRegionIds", () => {
  it("filters images out", () => {
    const s = seg(
      [region("r0001", "image"), region("r0002", "paragraph"), region("r0003", "heading")],
      ["r0003", "r0002"],
    );
    expect(textRegionIds(s)).toEqual(["r0002", "r0003"]);
  });
});

describe("orderProblems", () => {
  it("accepts a clean page", () => {
    const s = seg(
      [region("r0001", "heading"), region("r0002", "paragraph"), region("r0003", "image")],
      ["r0001", "r0002"],
    );
    expect(orderProblems(s)).toEqual([]);
  });

  it("flags an image in the order", () => {
    const s = seg([region("r0001", "image"), region("r0002", "paragraph")], ["r0001", "r0002"]);
    expect(orderProblems(s)).toEqual(["order entry r0001 is not a text region"]);
  });

  it("flags duplicates and missing regions", () => {
    const s = seg(
      [region("r0001", "heading"), region("r0002", "paragraph")],
      ["r0001", "r0001"],
    );
    const problems = orderProblems(s);
    expect(problems).toContain("order visits r0001 twice");
    expect(problems).toContain("text region r0002 missing from order");
  });
});

describe("regionById", () => {
  it("finds regions and reports misses as undefined", () => {
    const s = seg([region("r0001", "paragraph")], ["r0001"]);
    expect(regionById(s, "r0001")?.kind).toBe("paragraph");
    expect(regionById(s, "r0099")).toBeUndefined();
  });
});
