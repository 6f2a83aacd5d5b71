/** Typed client for the explorer service.
 *
 * Reads are plain fetches; sample posts are serialized through a FIFO
 * queue so the session has at most one in-flight sample request — later
 * clicks wait for the earlier response instead of racing it.
 */

import type {
  FrontPayload,
  HistoryEntry,
  SampleRequest,
  SampleResponse,
  SnapshotInfo,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

export type FetchLike = (
  url: string,
  init?: RequestInit,
) => Promise<Response>;

function formatDetail(body: unknown): string {
  if (typeof body === "object" && body !== null && "detail" in body) {
    const detail = (body as { detail: unknown }).detail;
    return typeof detail === "string" ? detail : JSON.stringify(detail);
  }
  return JSON.stringify(body);
}

export class ExplorerClient {
  private tail: Promise<unknown> = Promise.resolve();

  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) =>
      globalThis.fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let resp: Response;
    try {
      resp = await this.fetchImpl(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError(0, `service unreachable: ${String(err)}`);
    }
    let body: unknown;
    try {
      body = await resp.json();
    } catch {
      throw new ApiError(resp.status, "service returned non-JSON body");
    }
    if (!resp.ok) {
      throw new ApiError(resp.status, formatDetail(body));
    }
    return body as T;
  }

  listSnapshots(): Promise<SnapshotInfo[]> {
    return this.request<SnapshotInfo[]>("/snapshots");
  }

  getFront(id: string): Promise<FrontPayload> {
    return this.request<FrontPayload>(
      `/snapshots/${encodeURIComponent(id)}/front`,
    );
  }

  getHistory(id: string): Promise<HistoryEntry[]> {
    return this.request<HistoryEntry[]>(
      `/snapshots/${encodeURIComponent(id)}/history`,
    );
  }

  /** POST a sample request; requests are queued FIFO with one in flight.
   *
   * The returned promise settles with that request's own result even when
   * earlier queued requests fail.
   */
  sample(id: string, req: SampleRequest): Promise<SampleResponse> {
    const hasU = req.u_star !== undefined && req.u_star !== null;
    const hasY = req.y_star !== undefined && req.y_star !== null;
    if (hasU === hasY) {
      return Promise.reject(
        new ApiError(0, "provide exactly one of u_star or y_star"),
      );
    }
    const run = () =>
      this.request<SampleResponse>(
        `/snapshots/${encodeURIComponent(id)}/sample`,
        {
          method: "POST",
          headers: { "content-type": "application/json" },
          body: JSON.stringify(req),
        },
      );
    const result = this.tail.then(run, run);
    this.tail = result.catch(() => undefined);
    return result;
  }
}
