// Shapes of the JSON API payloads this client consumes. Field names
// mirror the service responses exactly; nothing here is recomputed on
// the client side.

export type VerdictKind = "ExactMatch" | "PathIndication" | "NoEvidence";

export type ReviewStatus = "Pending" | "Approved" | "Rejected" | "Edited";

export interface GroundTruthRef {
  s: string;
  p: string;
  o: string;
  provenance: string[];
}

export interface Verdict {
  kind: VerdictKind;
  score: number;
  path: string[] | null;
  refs: GroundTruthRef[];
  flags: string[];
}

export interface Candidate {
  media_id: string;
  sentence_index: number;
  raw_subject: string;
  raw_predicate: string;
  raw_object: string;
  extractor: string;
  grounded: boolean;
  reproducible: boolean | null;
}

export interface Statement {
  subject: string;
  predicate: string;
  object: string;
  provenance: string[];
  candidates: Candidate[];
  review_status: ReviewStatus;
  veracity: Verdict;
  flags: string[];
}

// Rows from GET /statements carry identity on top of the statement body.
export interface StatementRow extends Statement {
  id: string;
  media_id: string;
  trusted: boolean;
}

export interface StatementPage {
  items: StatementRow[];
  page: number;
  page_size: number;
  total: number;
}

export interface AccuracyReport {
  media_id: string;
  s_acc: number;
  policy: string;
  per_metric: Record<string, number>;
  counts: { exact: number; path: number; none: number };
  statements: Statement[];
}

// POST /statements/{id}/review body. Edit carries the replacement terms
// flat beside the action.
export type ReviewRequest =
  | { action: "Approve" | "Reject"; reviewer?: string }
  | {
      action: "Edit";
      reviewer?: string;
      subject: string;
      predicate: string;
      object: string;
    };

export interface EditTerms {
  subject: string;
  predicate: string;
  object: string;
}
