/**
 * ui.ts — minimal framework-free DOM shell over the review-desk controller.
 *
 * Re-renders the whole desk on every state change; at review-set sizes that
 * is well under a millisecond and keeps the rendering honest (the DOM is a
 * pure function of DeskState).
 */

import { ReviewApi } from "./api.js";
import { ReviewDeskController, type DeskState } from "./controller.js";
import {
  REJECT_REASONS,
  REVIEW_STATUSES,
  isChainItem,
  type ItemView,
  type RejectReason,
  type ReviewStatus,
} from "./types.js";

const CATEGORIES = [
  "intention",
  "exploration",
  "exploitation",
  "chain_of_actions",
];

type Child = Node | string;

function el(
  tag: string,
  attrs: Record<string, string> = {},
  children: Child[] = [],
): HTMLElement {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  for (const child of children) {
    node.append(child);
  }
  return node;
}

function select(
  name: string,
  choices: readonly string[],
  current: string | null,
  onPick: (value: string | null) => void,
): HTMLElement {
  const node = el("select", { "data-role": name }) as HTMLSelectElement;
  node.append(el("option", { value: "" }, ["all"]));
  for (const choice of choices) {
    const option = el("option", { value: choice }, [choice]);
    node.append(option);
  }
  node.value = current ?? "";
  node.addEventListener("change", () => {
    onPick(node.value === "" ? null : node.value);
  });
  return node;
}

function isStatus(value: string): value is ReviewStatus {
  return (REVIEW_STATUSES as readonly string[]).includes(value);
}

function isReason(value: string): value is RejectReason {
  return (REJECT_REASONS as readonly string[]).includes(value);
}

export interface MountOptions {
  pageSize?: number;
}

/** Build the desk inside `root` and return its controller. */
export function mount(
  root: HTMLElement,
  api: ReviewApi,
  options: MountOptions = {},
): ReviewDeskController {
  const controller = new ReviewDeskController(api, {
    pageSize: options.pageSize,
    onChange: (state) => render(root, controller, state),
  });
  render(root, controller, controller.state);
  void controller.load();
  return controller;
}

function render(
  root: HTMLElement,
  controller: ReviewDeskController,
  state: DeskState,
): void {
  root.replaceChildren(
    banner(state),
    filterBar(controller, state),
    itemTable(controller, state),
    pager(controller, state),
    detailPane(controller, state),
  );
}

function banner(state: DeskState): HTMLElement {
  if (state.conflict) {
    return el("div", { class: "banner conflict", role: "alert" }, [
      `Review conflict on ${state.conflict.itemId}: ${state.conflict.detail} ` +
        "The item was refreshed; review it again.",
    ]);
  }
  if (state.error) {
    return el("div", { class: "banner error", role: "alert" }, [state.error]);
  }
  return el("div", { class: "banner empty" });
}

function filterBar(
  controller: ReviewDeskController,
  state: DeskState,
): HTMLElement {
  return el("div", { class: "filters" }, [
    select("category-filter", CATEGORIES, state.filter.category, (value) => {
      void controller.setFilter({ category: value });
    }),
    select("status-filter", REVIEW_STATUSES, state.filter.status, (value) => {
      void controller.setFilter({
        status: value !== null && isStatus(value) ? value : null,
      });
    }),
  ]);
}

function itemTable(
  controller: ReviewDeskController,
  state: DeskState,
): HTMLElement {
  const rows = state.items.map((view) => {
    const row = el(
      "tr",
      {
        "data-item-id": view.item.id,
        class: view.item.id === state.selectedId ? "selected" : "",
      },
      [
        el("td", {}, [view.item.id]),
        el("td", {}, [view.item.category]),
        el("td", {}, [view.review.status]),
        el("td", {}, [view.review.reviewer_id]),
      ],
    );
    row.addEventListener("click", () => controller.select(view.item.id));
    return row;
  });
  return el("table", { class: "items" }, [
    el("thead", {}, [
      el("tr", {}, [
        el("th", {}, ["item"]),
        el("th", {}, ["category"]),
        el("th", {}, ["status"]),
        el("th", {}, ["reviewer"]),
      ]),
    ]),
    el("tbody", {}, rows),
  ]);
}

function pager(
  controller: ReviewDeskController,
  state: DeskState,
): HTMLElement {
  const from = state.total === 0 ? 0 : state.offset + 1;
  const to = Math.min(state.offset + state.items.length, state.total);
  const prev = el("button", { "data-role": "prev" }, ["previous"]);
  prev.addEventListener("click", () => void controller.prevPage());
  const next = el("button", { "data-role": "next" }, ["next"]);
  next.addEventListener("click", () => void controller.nextPage());
  return el("div", { class: "pager" }, [
    prev,
    el("span", {}, [`${from}-${to} of ${state.total}`]),
    next,
  ]);
}

function detailPane(
  controller: ReviewDeskController,
  state: DeskState,
): HTMLElement {
  const view = state.items.find((v) => v.item.id === state.selectedId);
  if (!view) {
    return el("div", { class: "detail empty" }, ["Select an item to review."]);
  }
  return el("div", { class: "detail" }, [
    itemSummary(view),
    verdictForm(controller, view, state),
  ]);
}

function itemSummary(view: ItemView): HTMLElement {
  const children: Child[] = [el("h2", {}, [view.item.id])];
  if (isChainItem(view.item)) {
    children.push(el("p", {}, [`Goal: ${view.item.goal} (k=${view.item.k})`]));
    children.push(
      el(
        "ol",
        { class: "candidates" },
        view.item.candidates.map((step) =>
          el("li", { value: String(step.id) }, [step.text]),
        ),
      ),
    );
    children.push(
      el("p", {}, [
        `Accepted orderings: ${view.item.valid_chains
          .map(([nodes, letters]) => `${nodes.join("-")} / ${letters.join("")}`)
          .join(", ")}`,
      ]),
    );
  } else {
    children.push(el("p", { class: "question" }, [view.item.question]));
    children.push(
      el(
        "ul",
        { class: "options" },
        Object.entries(view.item.options).map(([label, text]) =>
          el("li", {}, [
            `${label}. ${text}` +
              (label === (view.item as { answer_label: string }).answer_label
                ? " (keyed)"
                : ""),
          ]),
        ),
      ),
    );
  }
  children.push(
    el("p", { class: "clip" }, [
      `Clip ${view.item.clip.stream_id} [${view.item.clip.start}, ` +
        `${view.item.clip.end}) — ${view.frame_refs.length} reference frames`,
    ]),
  );
  children.push(
    el("p", { class: "review-state" }, [
      `Status: ${view.review.status}` +
        (view.review.reviewer_id ? ` by ${view.review.reviewer_id}` : ""),
    ]),
  );
  return el("section", { class: "summary" }, children);
}

function verdictForm(
  controller: ReviewDeskController,
  view: ItemView,
  state: DeskState,
): HTMLElement {
  const busy = state.pendingVerdict !== null;
  const note = el("input", {
    type: "text",
    placeholder: "note",
    "data-role": "note",
  }) as HTMLInputElement;

  const acceptButton = el("button", { "data-role": "accept" }, ["accept"]);
  acceptButton.addEventListener("click", () => {
    void controller.accept(view.item.id, note.value);
  });

  const reasonPick = el("select", {
    "data-role": "reject-reason",
  }) as HTMLSelectElement;
  for (const reason of REJECT_REASONS) {
    reasonPick.append(el("option", { value: reason }, [reason]));
  }
  const rejectButton = el("button", { "data-role": "reject" }, ["reject"]);
  rejectButton.addEventListener("click", () => {
    const reason = reasonPick.value;
    if (isReason(reason)) {
      void controller.reject(view.item.id, reason, note.value);
    }
  });

  const payloadBox = el("textarea", {
    "data-role": "edited-payload",
    placeholder: '{"type": "direction", "value": "left"}',
  }) as HTMLTextAreaElement;
  const editButton = el("button", { "data-role": "edit" }, ["save edit"]);
  editButton.addEventListener("click", () => {
    let payload: Record<string, unknown>;
    try {
      payload = JSON.parse(payloadBox.value) as Record<string, unknown>;
    } catch {
      payloadBox.setAttribute("aria-invalid", "true");
      return;
    }
    void controller.edit(view.item.id, payload, note.value);
  });

  for (const button of [acceptButton, rejectButton, editButton]) {
    if (busy) button.setAttribute("disabled", "");
  }
  return el("form", { class: "verdict" }, [
    note,
    acceptButton,
    reasonPick,
    rejectButton,
    payloadBox,
    editButton,
  ]);
}
