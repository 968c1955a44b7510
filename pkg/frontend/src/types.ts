/**
 * types.ts — wire format of the review service, as zod schemas.
 *
 * Every response the client consumes is validated against these schemas, so
 * a drifting server fails loudly at the boundary instead of deep in the UI.
 */

import { z } from "zod";

export const REVIEW_STATUSES = [
  "pending",
  "accepted",
  "rejected",
  "edited",
] as const;
export type ReviewStatus = (typeof REVIEW_STATUSES)[number];

export const REJECT_REASONS = [
  "not answerable",
  "wrong answer",
  "bad clip",
  "ambiguous options",
] as const;
export type RejectReason = (typeof REJECT_REASONS)[number];

export const VERDICT_ACTIONS = ["accept", "reject", "edit"] as const;
export type VerdictAction = (typeof VERDICT_ACTIONS)[number];

/** Body of POST /items/{id}/verdict. */
export interface VerdictInput {
  action: VerdictAction;
  note?: string;
  reason?: RejectReason;
  payload?: Record<string, unknown>;
}

export const reviewRecordSchema = z.object({
  item_id: z.string(),
  status: z.enum(REVIEW_STATUSES),
  verdict_note: z.string(),
  reject_reason: z.string().nullable(),
  edited_payload: z.record(z.string(), z.unknown()).nullable(),
  reviewer_id: z.string(),
  timestamp: z.number().nullable(),
  version_token: z.string(),
});
export type ReviewRecord = z.infer<typeof reviewRecordSchema>;

const clipSchema = z.object({
  stream_id: z.string(),
  start: z.number(),
  end: z.number(),
  category: z.string(),
  anchor: z.object({ timestamp: z.number(), kind: z.string() }),
  goal_object_id: z.string().nullable().optional(),
});

export const mcqItemSchema = z.object({
  id: z.string(),
  category: z.string(),
  proximity_kind: z.enum(["approximate", "relative"]),
  question: z.string(),
  options: z.record(z.string(), z.string()),
  answer_label: z.string(),
  answer_payload: z.record(z.string(), z.unknown()),
  clip: clipSchema,
  provenance: z.record(z.string(), z.unknown()),
});
export type McqItemRecord = z.infer<typeof mcqItemSchema>;

const keystepSchema = z.object({
  id: z.number().int(),
  text: z.string(),
  start: z.number(),
  end: z.number(),
  location: z.array(z.number()).length(3),
});

export const chainItemSchema = z.object({
  id: z.string(),
  category: z.literal("chain_of_actions"),
  clip: clipSchema,
  goal: z.string(),
  candidates: z.array(keystepSchema),
  k: z.number().int(),
  valid_chains: z.array(
    z.tuple([z.array(z.number().int()), z.array(z.string())]),
  ),
  provenance: z.record(z.string(), z.unknown()),
});
export type ChainItemRecord = z.infer<typeof chainItemSchema>;

export const itemRecordSchema = z.union([chainItemSchema, mcqItemSchema]);
export type ItemRecord = z.infer<typeof itemRecordSchema>;

export function isChainItem(item: ItemRecord): item is ChainItemRecord {
  return item.category === "chain_of_actions";
}

export const itemViewSchema = z.object({
  item: itemRecordSchema,
  review: reviewRecordSchema,
  version_token: z.string(),
  frame_refs: z.array(z.string()),
});
export type ItemView = z.infer<typeof itemViewSchema>;

export const listResponseSchema = z.object({
  items: z.array(itemViewSchema),
  total: z.number().int(),
  limit: z.number().int(),
  offset: z.number().int(),
});
export type ListResponse = z.infer<typeof listResponseSchema>;

export const verdictResponseSchema = z.object({
  review: reviewRecordSchema,
  version_token: z.string(),
});
export type VerdictResponse = z.infer<typeof verdictResponseSchema>;

export const historyResponseSchema = z.object({
  item_id: z.string(),
  history: z.array(z.record(z.string(), z.unknown())),
});
export type HistoryResponse = z.infer<typeof historyResponseSchema>;

export const exportResponseSchema = z.object({
  items: z.array(
    z.object({ item: itemRecordSchema, review: reviewRecordSchema }),
  ),
});
export type ExportResponse = z.infer<typeof exportResponseSchema>;

export const errorBodySchema = z.object({
  error: z.string(),
  detail: z.string(),
});
export type ErrorBody = z.infer<typeof errorBodySchema>;
