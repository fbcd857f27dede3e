// Pure HTML-string renderers. No DOM access and no state in here, so
// every view is testable as a plain function. All dynamic text goes
// through esc(); scores and references are shown exactly as the API
// sent them.

import { formatScore, verdictColor } from "./verdict.js";
import type {
  AccuracyReport,
  GroundTruthRef,
  Statement,
  StatementRow,
  Verdict,
} from "./types.js";

export function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function refLine(ref: GroundTruthRef): string {
  const triple = `${esc(ref.s)} ${esc(ref.p)} ${esc(ref.o)}`;
  const sources = ref.provenance.map(esc).join(", ");
  const cite = sources ? ` <span class="ref-sources">[${sources}]</span>` : "";
  return `<li>${triple}${cite}</li>`;
}

// Ground-truth block: the explanation for a non-red verdict. NoEvidence
// has no references and gets no block at all.
function renderRefs(verdict: Verdict): string {
  if (verdict.refs.length === 0) return "";
  const items = verdict.refs.map(refLine).join("");
  return `<div class="refs"><span class="refs-label">ground truth</span><ul>${items}</ul></div>`;
}

function renderBadge(verdict: Verdict): string {
  const color = verdictColor(verdict.kind);
  const pathNote =
    verdict.path && verdict.path.length > 0
      ? `<span class="path">${verdict.path.map(esc).join(" → ")}</span>`
      : "";
  return (
    `<span class="badge badge-${color}">${esc(verdict.kind)}</span>` +
    `<span class="score">${formatScore(verdict.score)}</span>${pathNote}`
  );
}

function renderFlags(statement: Statement): string {
  const flags = [...statement.flags, ...statement.veracity.flags];
  if (flags.length === 0) return "";
  const items = flags.map((f) => `<span class="flag">${esc(f)}</span>`).join("");
  return `<div class="flags">${items}</div>`;
}

export function renderStatementRow(
  statement: Statement,
  options: { id?: string; actions?: boolean } = {},
): string {
  const color = verdictColor(statement.veracity.kind);
  const idAttr = options.id ? ` data-id="${esc(options.id)}"` : "";
  const triple =
    `<span class="term">${esc(statement.subject)}</span> ` +
    `<span class="term term-pred">${esc(statement.predicate)}</span> ` +
    `<span class="term">${esc(statement.object)}</span>`;
  const actions = options.actions
    ? `<td class="actions">` +
      `<button data-action="approve">Approve</button>` +
      `<button data-action="reject">Reject</button>` +
      `<button data-action="edit">Edit</button></td>`
    : "";
  return (
    `<tr class="row-${color}"${idAttr}>` +
    `<td class="statement">${triple}${renderFlags(statement)}</td>` +
    `<td class="verdict">${renderBadge(statement.veracity)}${renderRefs(statement.veracity)}</td>` +
    `${actions}</tr>`
  );
}

// Inline replacement for a queue row while its terms are being edited.
export function renderEditForm(row: StatementRow): string {
  const field = (name: string, value: string) =>
    `<input name="${name}" value="${esc(value)}" placeholder="${name}">`;
  return (
    `<tr class="row-edit" data-id="${esc(row.id)}"><td colspan="3">` +
    `<form class="edit-form" data-id="${esc(row.id)}">` +
    field("subject", row.subject) +
    field("predicate", row.predicate) +
    field("object", row.object) +
    `<button type="submit">Save</button>` +
    `<button type="button" data-action="cancel-edit">Cancel</button>` +
    `<span class="field-error"></span>` +
    `</form></td></tr>`
  );
}

function renderPager(page: number, pageSize: number, total: number): string {
  const pages = Math.max(1, Math.ceil(total / pageSize));
  const prev = page <= 1 ? " disabled" : "";
  const next = page >= pages ? " disabled" : "";
  return (
    `<div class="pager">` +
    `<button data-page="${page - 1}"${prev}>&laquo; prev</button>` +
    `<span>page ${page} of ${pages} (${total} pending)</span>` +
    `<button data-page="${page + 1}"${next}>next &raquo;</button>` +
    `</div>`
  );
}

export function renderQueue(
  rows: StatementRow[],
  page: number,
  pageSize: number,
  total: number,
  editingId: string | null = null,
): string {
  if (total === 0) {
    return `<p class="empty">Nothing waiting for review.</p>`;
  }
  const body = rows
    .map((row) =>
      row.id === editingId
        ? renderEditForm(row)
        : renderStatementRow(row, { id: row.id, actions: true }),
    )
    .join("\n");
  return (
    `<table class="review-table">` +
    `<thead><tr><th>statement</th><th>verdict</th><th></th></tr></thead>` +
    `<tbody>${body}</tbody></table>` +
    renderPager(page, pageSize, total)
  );
}

export function renderReport(report: AccuracyReport): string {
  const counts = report.counts;
  const rows = report.statements
    .map((statement) => renderStatementRow(statement))
    .join("\n");
  const metrics = Object.entries(report.per_metric)
    .map(([name, value]) => `${esc(name)} ${formatScore(value)}`)
    .join(", ");
  return (
    `<div class="report-head">` +
    `<h2>${esc(report.media_id)}</h2>` +
    `<p class="s-acc">accuracy <strong>${formatScore(report.s_acc)}</strong>` +
    ` <span class="policy">(${esc(report.policy)}, ${metrics})</span></p>` +
    `<p class="breakdown">` +
    `<span class="badge badge-green">exact ${counts.exact}</span>` +
    `<span class="badge badge-amber">path ${counts.path}</span>` +
    `<span class="badge badge-red">none ${counts.none}</span></p>` +
    `</div>` +
    `<table class="review-table">` +
    `<thead><tr><th>statement</th><th>verdict</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>`
  );
}

export function renderError(message: string): string {
  return `<p class="error">${esc(message)}</p>`;
}
