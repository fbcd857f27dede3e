// DOM glue: wires the controller and the renderers to the page. Logic
// lives in controller.ts and views.ts; this file only routes events.

import { ApiClient } from "./api.js";
import { API_BASE } from "./config.js";
import { QueueController } from "./controller.js";
import { renderError, renderReport } from "./views.js";

const params = new URLSearchParams(window.location.search);
const api = new ApiClient(API_BASE, params.get("token"));

const queueEl = document.getElementById("queue") as HTMLElement;
const reportEl = document.getElementById("report") as HTMLElement;
const toastEl = document.getElementById("toast") as HTMLElement;

let toastTimer: number | undefined;
function toast(message: string): void {
  toastEl.textContent = message;
  toastEl.classList.add("show");
  window.clearTimeout(toastTimer);
  toastTimer = window.setTimeout(() => toastEl.classList.remove("show"), 4000);
}

const controller = new QueueController(
  api,
  { render: (html) => (queueEl.innerHTML = html), toast },
  { reviewer: params.get("reviewer") ?? "" },
);

queueEl.addEventListener("click", (event) => {
  const target = event.target as HTMLElement;
  const button = target.closest("button");
  if (!button) return;
  const pageAttr = button.dataset.page;
  if (pageAttr !== undefined && !button.disabled) {
    void controller.load(Number(pageAttr)).catch((e) => toast(String(e)));
    return;
  }
  const row = button.closest("tr");
  const id = row?.dataset.id;
  if (!id) return;
  switch (button.dataset.action) {
    case "approve":
      void controller.approve(id);
      break;
    case "reject":
      void controller.reject(id);
      break;
    case "edit":
      controller.beginEdit(id);
      break;
    case "cancel-edit":
      controller.cancelEdit();
      break;
  }
});

queueEl.addEventListener("submit", (event) => {
  const form = event.target as HTMLFormElement;
  if (!form.classList.contains("edit-form")) return;
  event.preventDefault();
  const id = form.dataset.id;
  if (!id) return;
  const value = (name: string) =>
    (form.elements.namedItem(name) as HTMLInputElement).value;
  const terms = {
    subject: value("subject"),
    predicate: value("predicate"),
    object: value("object"),
  };
  void controller.submitEdit(id, terms).then((error) => {
    if (error === null) return;
    const slot = form.querySelector(".field-error");
    if (slot) slot.textContent = error;
  });
});

const mediaInput = document.getElementById("media-id") as HTMLInputElement;
const loadReport = document.getElementById("load-report") as HTMLButtonElement;

loadReport.addEventListener("click", () => {
  const mediaId = mediaInput.value.trim();
  if (!mediaId) {
    reportEl.innerHTML = renderError("enter a media id first");
    return;
  }
  api
    .report(mediaId)
    .then((report) => (reportEl.innerHTML = renderReport(report)))
    .catch((error) => (reportEl.innerHTML = renderError(String(error))));
});

// Tab switching: two panes, one visible at a time.
for (const tab of document.querySelectorAll<HTMLElement>("[data-tab]")) {
  tab.addEventListener("click", () => {
    for (const other of document.querySelectorAll("[data-tab]")) {
      other.classList.toggle("active", other === tab);
    }
    const showQueue = tab.dataset.tab === "queue";
    queueEl.closest("section")?.classList.toggle("hidden", !showQueue);
    reportEl.closest("section")?.classList.toggle("hidden", showQueue);
  });
}

void controller.load().catch((error) => {
  queueEl.innerHTML = renderError(String(error));
});
