import { describe, expect, it } from "vitest";

import { ReviewApi } from "../src/api.js";
import { ReviewDeskController, type DeskState } from "../src/controller.js";
import type { RejectReason } from "../src/types.js";
import {
  FakeReviewService,
  makeChainRecord,
  makeMcqRecord,
} from "./fakeServer.js";

function makeService(count = 8): FakeReviewService {
  const records = [];
  for (let i = 0; i < count - 2; i++) {
    records.push(makeMcqRecord(i));
  }
  records.push(makeChainRecord(0), makeChainRecord(1));
  return new FakeReviewService(records);
}

function makeController(
  service: FakeReviewService,
  reviewer = "alice",
  pageSize = 50,
): ReviewDeskController {
  return new ReviewDeskController(new ReviewApi("http://fake", reviewer, service.fetch), {
    pageSize,
  });
}

describe("paging and filtering", () => {
  it("loads the first page and reports the total", async () => {
    const controller = makeController(makeService(), "alice", 3);
    await controller.load();
    expect(controller.state.phase).toBe("ready");
    expect(controller.state.items).toHaveLength(3);
    expect(controller.state.total).toBe(8);
  });

  it("walks pages within bounds", async () => {
    const controller = makeController(makeService(), "alice", 3);
    await controller.load();
    await controller.nextPage();
    expect(controller.state.offset).toBe(3);
    await controller.nextPage();
    expect(controller.state.items).toHaveLength(2);
    await controller.nextPage(); // already on the last page
    expect(controller.state.offset).toBe(6);
    await controller.prevPage();
    await controller.prevPage();
    await controller.prevPage(); // already on the first page
    expect(controller.state.offset).toBe(0);
  });

  it("filter changes reset to the first page", async () => {
    const service = makeService();
    const controller = makeController(service, "alice", 3);
    await controller.load();
    await controller.nextPage();
    await controller.setFilter({ category: "chain_of_actions" });
    expect(controller.state.offset).toBe(0);
    expect(controller.state.total).toBe(2);
    expect(
      controller.state.items.every((v) => v.item.category === "chain_of_actions"),
    ).toBe(true);
  });

  it("status filter sees server-confirmed verdicts after a reload", async () => {
    const controller = makeController(makeService());
    await controller.load();
    await controller.accept("s0/intention/relative/0");
    await controller.setFilter({ status: "accepted" });
    expect(controller.state.total).toBe(1);
    expect(controller.state.items[0]!.item.id).toBe("s0/intention/relative/0");
  });

  it("selection tracks page membership", async () => {
    const controller = makeController(makeService(), "alice", 3);
    await controller.load();
    controller.select("s0/intention/relative/1");
    expect(controller.selected()?.item.id).toBe("s0/intention/relative/1");
    controller.select("not/on/this/page");
    expect(controller.selected()?.item.id).toBe("s0/intention/relative/1");
    await controller.nextPage();
    expect(controller.selected()).toBeNull();
  });
});

describe("verdicts", () => {
  it("applies an accept optimistically, then reconciles the token", async () => {
    const controller = makeController(makeService());
    await controller.load();
    const promise = controller.accept("s0/intention/relative/0", "looks right");

    // Synchronous optimistic flip: row already accepted, submit in flight.
    const optimistic = controller.state.items[0]!;
    expect(optimistic.review.status).toBe("accepted");
    expect(optimistic.version_token).toBe("0");
    expect(controller.state.pendingVerdict).toBe("s0/intention/relative/0");

    await expect(promise).resolves.toBe(true);
    const confirmed = controller.state.items[0]!;
    expect(confirmed.version_token).toBe("1");
    expect(confirmed.review.reviewer_id).toBe("alice");
    expect(confirmed.review.verdict_note).toBe("looks right");
    expect(controller.state.pendingVerdict).toBeNull();
  });

  it("stores reject reasons and edited payloads", async () => {
    const controller = makeController(makeService());
    await controller.load();
    await controller.reject("s0/intention/relative/1", "ambiguous options");
    await controller.edit("s0/intention/relative/2", {
      type: "direction",
      value: "back",
    });
    const [, rejected, edited] = controller.state.items;
    expect(rejected!.review.status).toBe("rejected");
    expect(rejected!.review.reject_reason).toBe("ambiguous options");
    expect(edited!.review.status).toBe("edited");
    expect(edited!.review.edited_payload).toEqual({
      type: "direction",
      value: "back",
    });
  });

  it("rolls back when the server refuses the verdict", async () => {
    const controller = makeController(makeService());
    await controller.load();
    const ok = await controller.reject(
      "s0/intention/relative/0",
      "spam" as RejectReason, // not in the taxonomy; server answers 422
    );
    expect(ok).toBe(false);
    expect(controller.state.items[0]!.review.status).toBe("pending");
    expect(controller.state.error).toContain("unknown reason");
  });

  it("reports verdicts on items outside the page without a request", async () => {
    const controller = makeController(makeService());
    await controller.load();
    const ok = await controller.accept("never/heard/of/it");
    expect(ok).toBe(false);
    expect(controller.state.error).toContain("never/heard/of/it");
  });
});

describe("two-tab conflict", () => {
  it("second tab rolls back, refreshes, and retries without losing the first verdict", async () => {
    const service = makeService();
    const tabA = makeController(service, "alice");
    const tabB = makeController(service, "bob");
    await tabA.load();
    await tabB.load();
    const itemId = "s0/intention/relative/0";

    await expect(tabA.accept(itemId, "fine")).resolves.toBe(true);

    // Tab B still holds token "0"; its reject must not overwrite A's accept.
    const ok = await tabB.reject(itemId, "bad clip");
    expect(ok).toBe(false);
    expect(tabB.state.conflict?.itemId).toBe(itemId);
    const refreshed = tabB.state.items[0]!;
    expect(refreshed.review.status).toBe("accepted");
    expect(refreshed.review.reviewer_id).toBe("alice");
    expect(refreshed.version_token).toBe("1");
    expect(service.historyOf(itemId)).toHaveLength(1);

    // With the fresh token the retry is an explicit, ordered override.
    await expect(tabB.reject(itemId, "bad clip")).resolves.toBe(true);
    expect(service.historyOf(itemId)).toHaveLength(2);
    const final = tabB.state.items[0]!;
    expect(final.review.status).toBe("rejected");
    expect(final.review.reviewer_id).toBe("bob");
    expect(final.version_token).toBe("2");
  });
});

describe("twenty-item round trip", () => {
  it("accept/reject/edit across twenty items; export is accepted plus edited", async () => {
    const records = Array.from({ length: 20 }, (_, i) => makeMcqRecord(i));
    const service = new FakeReviewService(records);
    const api = new ReviewApi("http://fake", "carol", service.fetch);
    const controller = new ReviewDeskController(api, { pageSize: 20 });
    await controller.load();
    expect(controller.state.items).toHaveLength(20);

    const states: DeskState[] = [];
    for (let i = 0; i < 20; i++) {
      const id = records[i]!.id;
      let ok: boolean;
      if (i % 3 === 0) {
        ok = await controller.accept(id, `pass ${i}`);
      } else if (i % 3 === 1) {
        ok = await controller.reject(id, "wrong answer", `fail ${i}`);
      } else {
        ok = await controller.edit(id, { type: "direction", value: "left" });
      }
      expect(ok).toBe(true);
      states.push(controller.state);
    }

    expect(
      controller.state.items.every((view) => view.version_token === "1"),
    ).toBe(true);
    expect(states.every((s) => s.error === null && s.conflict === null)).toBe(
      true,
    );

    const exported = await api.exportReviewed();
    const expected = records
      .map((record, i) => ({ id: record.id, keep: i % 3 !== 1 }))
      .filter((entry) => entry.keep)
      .map((entry) => entry.id);
    expect(exported.items.map((entry) => entry.item.id)).toEqual(expected);
    expect(
      exported.items.every(
        (entry) =>
          entry.review.status === "accepted" || entry.review.status === "edited",
      ),
    ).toBe(true);
  });
});
