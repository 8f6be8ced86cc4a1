import { describe, expect, it } from "vitest";
import { join } from "node:path";

import { projectGaussian } from "../src/projection";
import { REPO_ROOT, readJson } from "./helpers";

// The frozen vector file is the cross-implementation contract: the same
// cases are asserted against the Python renderer, so passing here proves
// both splat pipelines project identically.
const doc = readJson(join(REPO_ROOT, "shared", "project_gaussian_vectors.json"));

describe("shared projection vectors", () => {
  it("has the expected shape", () => {
    expect(doc.format).toBe("project-gaussian-vectors/1");
    expect(doc.cases.length).toBeGreaterThanOrEqual(12);
  });

  for (const testCase of doc.cases) {
    it(`reproduces ${testCase.name}`, () => {
      const g = testCase.gaussian;
      const out = projectGaussian(
        {
          center: g.center,
          scale: g.scale,
          rotation: g.rotation,
        },
        {
          rotation: testCase.pose.rotation.flat(),
          translation: testCase.pose.translation,
        },
        testCase.intrinsics,
      );
      if (testCase.expected === null) {
        expect(out).toBeNull();
        return;
      }
      expect(out).not.toBeNull();
      const tol = doc.tolerance;
      const close = (got: number, want: number) =>
        Math.abs(got - want) <= tol * Math.max(1, Math.abs(want));

      expect(close(out!.mean2d[0], testCase.expected.mean2d[0])).toBe(true);
      expect(close(out!.mean2d[1], testCase.expected.mean2d[1])).toBe(true);
      const want = testCase.expected.cov2d;
      expect(close(out!.cov2d[0], want[0][0])).toBe(true);
      expect(close(out!.cov2d[1], want[0][1])).toBe(true);
      expect(close(out!.cov2d[1], want[1][0])).toBe(true);
      expect(close(out!.cov2d[2], want[1][1])).toBe(true);
      expect(close(out!.z, testCase.expected.z)).toBe(true);
    });
  }
});
