import { describe, expect, it } from "vitest";
import { ApiClient, ApiError, encodingLength, Meta } from "../src/api.js";

const META: Meta = {
  layout: [
    { label: "global", offset: 0, length: 2 },
    { label: "front", offset: 2, length: 3 },
  ],
  min: [0, 0, 0, 0, 0],
  max: [1, 2, 3, 4, 5],
  n_vertices: 4,
  n_faces: 0,
  faces: [],
  model_id: "abc",
};

function jsonResponse(doc: unknown, status = 200): Response {
  return new Response(JSON.stringify(doc), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

describe("encodingLength", () => {
  it("sums segment lengths", () => {
    expect(encodingLength(META)).toBe(5);
  });
});

describe("ApiClient.meta", () => {
  it("maps layout tuples from the wire format to objects", async () => {
    const wire = {
      ...META,
      layout: [
        ["global", 0, 2],
        ["front", 2, 3],
      ],
    };
    const client = new ApiClient("http://x", async () => jsonResponse(wire));
    const meta = await client.meta();
    expect(meta.layout).toEqual(META.layout);
    expect(meta.min).toEqual(META.min);
  });

  it("throws ApiError on a non-2xx response", async () => {
    const client = new ApiClient("http://x", async () => jsonResponse({}, 500));
    await expect(client.meta()).rejects.toBeInstanceOf(ApiError);
  });
});

describe("ApiClient.health", () => {
  it("returns false when the service is unreachable", async () => {
    const client = new ApiClient("http://x", async () => {
      throw new TypeError("fetch failed");
    });
    expect(await client.health()).toBe(false);
  });

  it("returns true on 200", async () => {
    const client = new ApiClient("http://x", async () => jsonResponse({ status: "ok" }));
    expect(await client.health()).toBe(true);
  });
});

describe("ApiClient.reconstruct", () => {
  it("never sends an encoding of the wrong length", async () => {
    let called = 0;
    const client = new ApiClient("http://x", async () => {
      called += 1;
      return jsonResponse({ vertices: [] });
    });
    await expect(client.reconstruct([1, 2, 3], META)).rejects.toThrow(/length/);
    expect(called).toBe(0);
  });

  it("rejects non-finite or negative values before dispatch", async () => {
    let called = 0;
    const client = new ApiClient("http://x", async () => {
      called += 1;
      return jsonResponse({ vertices: [] });
    });
    await expect(client.reconstruct([1, 2, 3, 4, -1], META)).rejects.toThrow(/nonnegative/);
    await expect(client.reconstruct([1, 2, 3, 4, NaN], META)).rejects.toThrow(/finite/);
    expect(called).toBe(0);
  });

  it("posts the values and parses the vertices", async () => {
    let body: string | undefined;
    const client = new ApiClient("http://x", async (_url, init) => {
      body = init?.body as string;
      return jsonResponse({ vertices: [[1, 2, 3]] });
    });
    const result = await client.reconstruct([1, 2, 3, 4, 5], META);
    expect(JSON.parse(body!)).toEqual({ values: [1, 2, 3, 4, 5] });
    expect(result.vertices).toEqual([[1, 2, 3]]);
  });

  it("aborts the in-flight request when a newer one starts (latest wins)", async () => {
    const signals: AbortSignal[] = [];
    const client = new ApiClient("http://x", (_url, init) => {
      const signal = init!.signal!;
      signals.push(signal);
      return new Promise<Response>((resolve, reject) => {
        signal.addEventListener("abort", () =>
          reject(Object.assign(new Error("aborted"), { name: "AbortError" })),
        );
        setTimeout(() => resolve(jsonResponse({ vertices: [[0, 0, 0]] })), 20);
      });
    });
    const first = client.reconstruct([1, 1, 1, 1, 1], META);
    const second = client.reconstruct([2, 2, 2, 2, 2], META);
    await expect(first).rejects.toHaveProperty("name", "AbortError");
    expect(signals[0].aborted).toBe(true);
    const result = await second;
    expect(result.vertices).toEqual([[0, 0, 0]]);
    expect(signals[1].aborted).toBe(false);
  });
});
