import { describe, expect, it } from "vitest";

import { buildFormModel, collectRequest, withTarget } from "../src/form.js";
import type { ModelInfo, RecommendRequest } from "../src/types.js";

import modelInfoJson from "./fixtures/model_info.json";
import requestAJson from "./fixtures/request_a.json";
import requestCJson from "./fixtures/request_c.json";

const info = modelInfoJson as unknown as ModelInfo;
const requestA = requestAJson as unknown as RecommendRequest;
const requestC = requestCJson as unknown as RecommendRequest;

describe("buildFormModel", () => {
  const model = buildFormModel(info);

  it("creates one control per served feature, in service order", () => {
    expect(model.fields.map((f) => f.name)).toEqual(
      info.features.map((f) => f.name),
    );
    expect(model.fields.map((f) => f.kind)).toEqual([
      "numerical",
      "categorical",
      "categorical",
      "boolean",
    ]);
  });

  it("offers exactly the encoder's known categories as options", () => {
    const before = model.fields.find((f) => f.name === "class_before");
    expect(before?.options).toEqual(["A+", "A", "B", "C", "D", "E", "F"]);
  });

  it("marks the target column and carries its classes", () => {
    const flags = model.fields.map((f) => f.isTarget);
    expect(flags).toEqual([false, false, true, false]);
    expect(model.targetColumn).toBe("class_after");
    expect(model.targetClasses).toEqual(info.target?.classes);
  });

  it("labels fields from their name and unit", () => {
    expect(model.fields[0]?.label).toBe("Area (m2)");
    expect(model.fields[1]?.label).toBe("Class before");
  });
});

describe("collectRequest", () => {
  const model = buildFormModel(info);
  const goodRaw = {
    area: "150.0",
    class_before: "E",
    class_after: "A",
    insulated: false,
  };

  it("assembles the typed request the service expects", () => {
    const { request, errors } = collectRequest(model, goodRaw);
    expect(errors).toEqual([]);
    expect(request).toEqual(requestA);
  });

  it("enforces required fields before any round trip", () => {
    const { request, errors } = collectRequest(model, {
      ...goodRaw,
      area: "",
    });
    expect(request).toBeUndefined();
    expect(errors).toEqual([
      { field: "area", message: "Area (m2) is required" },
    ]);
  });

  it("rejects unparseable numbers with the field named", () => {
    const { errors } = collectRequest(model, { ...goodRaw, area: "big" });
    expect(errors[0]?.field).toBe("area");
    expect(errors[0]?.message).toContain("must be a number");
  });

  it("rejects a categorical value outside the served options", () => {
    const { errors } = collectRequest(model, {
      ...goodRaw,
      class_before: "G",
    });
    expect(errors[0]?.field).toBe("class_before");
  });

  it("treats an untouched toggle as false rather than missing", () => {
    const { request } = collectRequest(model, {
      area: "150.0",
      class_before: "E",
      class_after: "A",
    });
    expect(request?.features["insulated"]).toBe(false);
  });
});

describe("withTarget", () => {
  it("changes the target class and nothing else", () => {
    const swapped = withTarget(requestA, "class_after", "C");
    expect(swapped).toEqual(requestC);
    const { class_after: _a, ...restA } = requestA.features;
    const { class_after: _b, ...restSwapped } = swapped.features;
    expect(restSwapped).toEqual(restA);
    // the original request is left alone
    expect(requestA.features["class_after"]).toBe("A");
  });
});
