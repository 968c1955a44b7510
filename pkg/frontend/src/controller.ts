/**
 * controller.ts — review-desk state machine, free of DOM concerns.
 *
 * Holds one page of items plus filter/selection state. Verdicts are applied
 * optimistically: the row flips immediately, then reconciles with the server
 * response. A stale-token conflict rolls the row back, re-reads the item so
 * the reviewer sees what actually happened, and surfaces a notice — the
 * other reviewer's verdict is never overwritten silently.
 */

import {
  ApiError,
  ConflictError,
  type ReviewApi,
} from "./api.js";
import type {
  ItemView,
  RejectReason,
  ReviewStatus,
  VerdictInput,
} from "./types.js";

export interface Filter {
  category: string | null;
  status: ReviewStatus | null;
}

export interface ConflictNotice {
  itemId: string;
  detail: string;
}

export interface DeskState {
  phase: "idle" | "loading" | "ready" | "error";
  items: ItemView[];
  total: number;
  limit: number;
  offset: number;
  filter: Filter;
  selectedId: string | null;
  /** Item id with an in-flight verdict, if any. */
  pendingVerdict: string | null;
  conflict: ConflictNotice | null;
  error: string | null;
}

export interface ControllerOptions {
  pageSize?: number;
  onChange?: (state: DeskState) => void;
}

const VERDICT_STATUS: Record<VerdictInput["action"], ReviewStatus> = {
  accept: "accepted",
  reject: "rejected",
  edit: "edited",
};

export class ReviewDeskController {
  private readonly onChange?: (state: DeskState) => void;
  private current: DeskState;

  constructor(
    private readonly api: ReviewApi,
    options: ControllerOptions = {},
  ) {
    this.onChange = options.onChange;
    this.current = {
      phase: "idle",
      items: [],
      total: 0,
      limit: options.pageSize ?? 50,
      offset: 0,
      filter: { category: null, status: null },
      selectedId: null,
      pendingVerdict: null,
      conflict: null,
      error: null,
    };
  }

  get state(): DeskState {
    return this.current;
  }

  /** Fetch the current page under the current filter. */
  async load(): Promise<void> {
    this.patch({ phase: "loading", error: null });
    try {
      const page = await this.api.listItems({
        category: this.current.filter.category ?? undefined,
        status: this.current.filter.status ?? undefined,
        limit: this.current.limit,
        offset: this.current.offset,
      });
      const ids = new Set(page.items.map((view) => view.item.id));
      this.patch({
        phase: "ready",
        items: page.items,
        total: page.total,
        limit: page.limit,
        offset: page.offset,
        selectedId:
          this.current.selectedId !== null && ids.has(this.current.selectedId)
            ? this.current.selectedId
            : null,
      });
    } catch (err) {
      this.patch({ phase: "error", error: messageOf(err) });
      throw err;
    }
  }

  /** Change the filter and reload from the first page. */
  async setFilter(patch: Partial<Filter>): Promise<void> {
    this.patch({
      filter: { ...this.current.filter, ...patch },
      offset: 0,
    });
    await this.load();
  }

  async nextPage(): Promise<void> {
    if (this.current.offset + this.current.limit >= this.current.total) return;
    this.patch({ offset: this.current.offset + this.current.limit });
    await this.load();
  }

  async prevPage(): Promise<void> {
    if (this.current.offset === 0) return;
    this.patch({ offset: Math.max(0, this.current.offset - this.current.limit) });
    await this.load();
  }

  select(itemId: string | null): void {
    if (
      itemId !== null &&
      !this.current.items.some((view) => view.item.id === itemId)
    ) {
      return;
    }
    this.patch({ selectedId: itemId, conflict: null });
  }

  selected(): ItemView | null {
    return (
      this.current.items.find(
        (view) => view.item.id === this.current.selectedId,
      ) ?? null
    );
  }

  accept(itemId: string, note = ""): Promise<boolean> {
    return this.submit(itemId, { action: "accept", note });
  }

  reject(itemId: string, reason: RejectReason, note = ""): Promise<boolean> {
    return this.submit(itemId, { action: "reject", reason, note });
  }

  edit(
    itemId: string,
    payload: Record<string, unknown>,
    note = "",
  ): Promise<boolean> {
    return this.submit(itemId, { action: "edit", payload, note });
  }

  /**
   * Apply a verdict optimistically and reconcile. Resolves true on success;
   * false when the server refused (conflict or illegal transition), with the
   * refusal recorded on the state. The row keeps its server-confirmed status
   * even if it no longer matches the active status filter; the next load()
   * re-slices the page.
   */
  private async submit(
    itemId: string,
    verdict: VerdictInput,
  ): Promise<boolean> {
    const index = this.current.items.findIndex(
      (view) => view.item.id === itemId,
    );
    if (index < 0) {
      this.patch({ error: `item ${itemId} is not on this page` });
      return false;
    }
    const snapshot = this.current.items[index]!;
    const optimistic: ItemView = {
      ...snapshot,
      review: {
        ...snapshot.review,
        status: VERDICT_STATUS[verdict.action],
        verdict_note: verdict.note ?? "",
        reject_reason: verdict.action === "reject" ? verdict.reason ?? null : null,
        edited_payload: verdict.action === "edit" ? verdict.payload ?? null : null,
        reviewer_id: this.api.reviewerId,
      },
    };
    this.replaceItem(index, optimistic);
    this.patch({ pendingVerdict: itemId, conflict: null, error: null });

    try {
      const confirmed = await this.api.submitVerdict(
        itemId,
        verdict,
        snapshot.version_token,
      );
      this.replaceItem(index, {
        ...snapshot,
        review: confirmed.review,
        version_token: confirmed.version_token,
      });
      this.patch({ pendingVerdict: null });
      return true;
    } catch (err) {
      this.replaceItem(index, snapshot);
      if (err instanceof ConflictError) {
        // Someone else got there first: show their verdict and a fresh token.
        const fresh = await this.api.getItem(itemId);
        this.replaceItem(index, fresh);
        this.patch({
          pendingVerdict: null,
          conflict: { itemId, detail: err.detail },
        });
        return false;
      }
      if (err instanceof ApiError) {
        this.patch({ pendingVerdict: null, error: err.message });
        return false;
      }
      this.patch({ pendingVerdict: null, error: messageOf(err) });
      throw err;
    }
  }

  private replaceItem(index: number, view: ItemView): void {
    const items = this.current.items.slice();
    items[index] = view;
    this.patch({ items });
  }

  private patch(patch: Partial<DeskState>): void {
    this.current = { ...this.current, ...patch };
    this.onChange?.(this.current);
  }
}

function messageOf(err: unknown): string {
  return err instanceof Error ? err.message : String(err);
}
