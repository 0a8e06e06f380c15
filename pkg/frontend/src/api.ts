/** HTTP client for the inference service: /meta, /reconstruct, /health. */

export interface SegmentInfo {
  label: string;
  offset: number;
  length: number;
}

export interface Meta {
  layout: SegmentInfo[];
  min: number[];
  max: number[];
  n_vertices: number;
  n_faces: number;
  faces: number[][];
  model_id: string;
}

export interface ReconstructResult {
  vertices: number[][];
}

export class ApiError extends Error {
  constructor(message: string, public readonly status?: number) {
    super(message);
  }
}

export function encodingLength(meta: Meta): number {
  return meta.layout.reduce((sum, seg) => sum + seg.length, 0);
}

export class ApiClient {
  private inflight: AbortController | null = null;

  constructor(private readonly baseUrl: string, private readonly fetchFn: typeof fetch = fetch) {}

  async meta(): Promise<Meta> {
    const resp = await this.fetchFn(`${this.baseUrl}/meta`);
    if (!resp.ok) throw new ApiError(`meta failed: ${resp.status}`, resp.status);
    const doc = await resp.json();
    const layout: SegmentInfo[] = (doc.layout as [string, number, number][]).map(
      ([label, offset, length]) => ({ label, offset, length }),
    );
    return { ...doc, layout };
  }

  async health(): Promise<boolean> {
    try {
      const resp = await this.fetchFn(`${this.baseUrl}/health`);
      return resp.ok;
    } catch {
      return false;
    }
  }

  /**
   * Request a reconstruction. Values are validated against the service's
   * declared encoding length before dispatch; an in-flight request is
   * aborted so only the latest edit wins.
   */
  async reconstruct(values: number[], meta: Meta): Promise<ReconstructResult> {
    const expected = encodingLength(meta);
    if (values.length !== expected) {
      throw new ApiError(`encoding length ${values.length} does not match service (${expected})`);
    }
    if (values.some((v) => !Number.isFinite(v) || v < 0)) {
      throw new ApiError("encoding values must be finite and nonnegative");
    }
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    const resp = await this.fetchFn(`${this.baseUrl}/reconstruct`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ values }),
      signal: controller.signal,
    });
    if (this.inflight === controller) this.inflight = null;
    if (!resp.ok) throw new ApiError(`reconstruct failed: ${resp.status}`, resp.status);
    return (await resp.json()) as ReconstructResult;
  }
}
