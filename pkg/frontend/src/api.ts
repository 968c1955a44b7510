/**
 * api.ts — typed HTTP client for the review service.
 *
 * Thin fetch wrapper: builds URLs (item ids may contain slashes), attaches
 * the optimistic-concurrency headers, validates every response body, and
 * converts error bodies into typed exceptions.
 */

import {
  errorBodySchema,
  exportResponseSchema,
  historyResponseSchema,
  itemViewSchema,
  listResponseSchema,
  verdictResponseSchema,
  type ExportResponse,
  type HistoryResponse,
  type ItemView,
  type ListResponse,
  type VerdictInput,
  type VerdictResponse,
} from "./types.js";

export type FetchLike = (
  url: string,
  init?: RequestInit,
) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly errorType: string,
    public readonly detail: string,
  ) {
    super(`${errorType}: ${detail}`);
    this.name = "ApiError";
  }
}

/** 404: the item id is not part of the review set. */
export class NotFoundError extends ApiError {
  constructor(status: number, errorType: string, detail: string) {
    super(status, errorType, detail);
    this.name = "NotFoundError";
  }
}

/**
 * 409 with a token mismatch: someone else reviewed the item since it was
 * loaded. The store state is untouched; re-read and retry.
 */
export class ConflictError extends ApiError {
  constructor(status: number, errorType: string, detail: string) {
    super(status, errorType, detail);
    this.name = "ConflictError";
  }
}

export interface ListQuery {
  category?: string;
  status?: string;
  limit?: number;
  offset?: number;
}

function encodeItemPath(itemId: string): string {
  // Item ids embed slashes ("stream/category/kind/n") and the server routes
  // them as raw path segments, so encode each segment but keep the slashes.
  return itemId.split("/").map(encodeURIComponent).join("/");
}

export class ReviewApi {
  private readonly fetchImpl: FetchLike;

  constructor(
    public readonly baseUrl: string,
    public readonly reviewerId: string,
    fetchImpl?: FetchLike,
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  async listItems(query: ListQuery = {}): Promise<ListResponse> {
    const params = new URLSearchParams();
    if (query.category) params.set("category", query.category);
    if (query.status) params.set("status", query.status);
    if (query.limit !== undefined) params.set("limit", String(query.limit));
    if (query.offset !== undefined) params.set("offset", String(query.offset));
    const suffix = params.size > 0 ? `?${params.toString()}` : "";
    const body = await this.request(`/items${suffix}`);
    return listResponseSchema.parse(body);
  }

  async getItem(itemId: string): Promise<ItemView> {
    const body = await this.request(`/items/${encodeItemPath(itemId)}`);
    return itemViewSchema.parse(body);
  }

  async getVerdicts(itemId: string): Promise<HistoryResponse> {
    const body = await this.request(
      `/items/${encodeItemPath(itemId)}/verdicts`,
    );
    return historyResponseSchema.parse(body);
  }

  async submitVerdict(
    itemId: string,
    verdict: VerdictInput,
    versionToken: string,
  ): Promise<VerdictResponse> {
    const body = await this.request(
      `/items/${encodeItemPath(itemId)}/verdict`,
      {
        method: "POST",
        headers: {
          "Content-Type": "application/json",
          "X-Review-Token": versionToken,
          "X-Reviewer-Id": this.reviewerId,
        },
        body: JSON.stringify(verdict),
      },
    );
    return verdictResponseSchema.parse(body);
  }

  async exportReviewed(): Promise<ExportResponse> {
    const body = await this.request("/export");
    return exportResponseSchema.parse(body);
  }

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    let body: unknown = null;
    try {
      body = await response.json();
    } catch {
      body = null;
    }
    if (!response.ok) {
      throw toApiError(response.status, body);
    }
    return body;
  }
}

function toApiError(status: number, body: unknown): ApiError {
  const parsed = errorBodySchema.safeParse(body);
  const errorType = parsed.success ? parsed.data.error : "HttpError";
  const detail = parsed.success
    ? parsed.data.detail
    : `request failed with status ${status}`;
  if (status === 404) return new NotFoundError(status, errorType, detail);
  if (status === 409 && errorType === "ConcurrentEditConflict") {
    return new ConflictError(status, errorType, detail);
  }
  return new ApiError(status, errorType, detail);
}
