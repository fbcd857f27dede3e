import { ApiClient, ApiError } from "./api.js";
import { renderQueue } from "./views.js";
import type { EditTerms, ReviewRequest, StatementRow } from "./types.js";

/** Where rendered HTML and error toasts go; app.ts binds this to the DOM. */
export interface QueueView {
  render(html: string): void;
  toast(message: string): void;
}

export interface QueueOptions {
  pageSize?: number;
  reviewer?: string;
}

// Review queue state machine. Rows come from the server and go back to
// it unchanged; the only client-side state is which page is shown and
// which row has its edit form open. Actions remove the row optimistically
// and put it back if the server says no.
export class QueueController {
  private rows: StatementRow[] = [];
  private page = 1;
  private total = 0;
  private editingId: string | null = null;
  private readonly pageSize: number;
  private readonly reviewer: string;

  constructor(
    private readonly api: ApiClient,
    private readonly view: QueueView,
    options: QueueOptions = {},
  ) {
    this.pageSize = options.pageSize ?? 20;
    this.reviewer = options.reviewer ?? "";
  }

  get pendingRows(): readonly StatementRow[] {
    return this.rows;
  }

  get pendingTotal(): number {
    return this.total;
  }

  async load(page: number = this.page): Promise<void> {
    const data = await this.api.pendingStatements(Math.max(1, page), this.pageSize);
    this.rows = data.items;
    this.page = data.page;
    this.total = data.total;
    this.editingId = null;
    this.rerender();
  }

  approve(id: string): Promise<boolean> {
    return this.act(id, this.withReviewer({ action: "Approve" }));
  }

  reject(id: string): Promise<boolean> {
    return this.act(id, this.withReviewer({ action: "Reject" }));
  }

  beginEdit(id: string): void {
    if (!this.rows.some((row) => row.id === id)) return;
    this.editingId = id;
    this.rerender();
  }

  cancelEdit(): void {
    this.editingId = null;
    this.rerender();
  }

  /**
   * Validate and submit an Edit. A blank field is rejected locally and
   * returned as the error message; no request leaves the client.
   */
  async submitEdit(id: string, terms: EditTerms): Promise<string | null> {
    for (const field of ["subject", "predicate", "object"] as const) {
      if (terms[field].trim() === "") {
        return `${field} must not be blank`;
      }
    }
    this.editingId = null;
    const ok = await this.act(
      id,
      this.withReviewer({ action: "Edit", ...terms }),
    );
    return ok ? null : "edit rejected";
  }

  private withReviewer(body: ReviewRequest): ReviewRequest {
    return this.reviewer ? { ...body, reviewer: this.reviewer } : body;
  }

  // Optimistic removal: the row leaves the table before the server
  // answers and is spliced back at its old position on any failure.
  private async act(id: string, body: ReviewRequest): Promise<boolean> {
    const index = this.rows.findIndex((row) => row.id === id);
    if (index < 0) return false;
    const [row] = this.rows.splice(index, 1);
    this.rerender();
    try {
      await this.api.review(id, body);
    } catch (error) {
      this.rows.splice(index, 0, row);
      this.rerender();
      this.view.toast(describe(error));
      return false;
    }
    this.total -= 1;
    if (this.rows.length === 0 && this.total > 0) {
      const lastPage = Math.max(1, Math.ceil(this.total / this.pageSize));
      await this.load(Math.min(this.page, lastPage));
    } else {
      this.rerender();
    }
    return true;
  }

  private rerender(): void {
    this.view.render(
      renderQueue(this.rows, this.page, this.pageSize, this.total, this.editingId),
    );
  }
}

function describe(error: unknown): string {
  if (error instanceof ApiError) return `${error.status}: ${error.message}`;
  if (error instanceof Error) return error.message;
  return String(error);
}
