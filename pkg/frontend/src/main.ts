/**
 * main.ts — browser entry point.
 *
 * Reads the service base URL and reviewer id from query parameters
 * (?api=http://127.0.0.1:8000&reviewer=alice) and mounts the desk.
 */

import { ReviewApi } from "./api.js";
import { mount } from "./ui.js";

const params = new URLSearchParams(window.location.search);
const base = params.get("api") ?? "http://127.0.0.1:8000";
const reviewer = params.get("reviewer") ?? "anonymous";

const root = document.getElementById("review-desk");
if (!root) {
  throw new Error('missing <div id="review-desk"> mount point');
}
mount(root, new ReviewApi(base, reviewer));
