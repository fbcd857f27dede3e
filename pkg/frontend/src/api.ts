import type {
  AccuracyReport,
  ReviewRequest,
  StatementPage,
  StatementRow,
} from "./types.js";

/** Non-2xx response, carrying the server's detail message. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly token: string | null = null,
  ) {}

  pendingStatements(page: number, pageSize: number): Promise<StatementPage> {
    const query = new URLSearchParams({
      status: "Pending",
      page: String(page),
      page_size: String(pageSize),
    });
    return this.request<StatementPage>("GET", `/statements?${query}`);
  }

  review(statementId: string, body: ReviewRequest): Promise<StatementRow> {
    const path = `/statements/${encodeURIComponent(statementId)}/review`;
    return this.request<StatementRow>("POST", path, body);
  }

  report(mediaId: string): Promise<AccuracyReport> {
    return this.request<AccuracyReport>(
      "GET",
      `/media/${encodeURIComponent(mediaId)}/report`,
    );
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const headers: Record<string, string> = {};
    if (this.token) headers["X-API-Token"] = this.token;
    if (body !== undefined) headers["Content-Type"] = "application/json";
    const response = await fetch(this.base + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      throw new ApiError(response.status, await detailOf(response));
    }
    return (await response.json()) as T;
  }
}

async function detailOf(response: Response): Promise<string> {
  try {
    const data: unknown = await response.json();
    if (
      typeof data === "object" &&
      data !== null &&
      typeof (data as { detail?: unknown }).detail === "string"
    ) {
      return (data as { detail: string }).detail;
    }
  } catch {
    // fall through to the status line
  }
  return `request failed with status ${response.status}`;
}
