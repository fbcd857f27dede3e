import type {
  AccuracyReport,
  Statement,
  StatementRow,
  Verdict,
  VerdictKind,
} from "../src/types.js";

export function makeVerdict(kind: VerdictKind, over: Partial<Verdict> = {}): Verdict {
  const base: Record<VerdictKind, Verdict> = {
    ExactMatch: {
      kind: "ExactMatch",
      score: 1.0,
      path: null,
      refs: [{ s: "co2", p: "cause", o: "warming", provenance: ["report-a"] }],
      flags: [],
    },
    PathIndication: {
      kind: "PathIndication",
      score: 0.4765,
      path: ["co2", "warming", "sea level"],
      refs: [
        { s: "co2", p: "cause", o: "warming", provenance: ["report-a"] },
        { s: "warming", p: "raise", o: "sea level", provenance: ["report-b"] },
      ],
      flags: [],
    },
    NoEvidence: {
      kind: "NoEvidence",
      score: 0.0,
      path: null,
      refs: [],
      flags: ["no path found"],
    },
  };
  return { ...base[kind], ...over };
}

export function makeStatement(
  kind: VerdictKind,
  over: Partial<Statement> = {},
): Statement {
  return {
    subject: "co2",
    predicate: "cause",
    object: "warming",
    provenance: ["ep1"],
    candidates: [],
    review_status: "Pending",
    veracity: makeVerdict(kind),
    flags: [],
    ...over,
  };
}

export function makeRow(
  id: string,
  kind: VerdictKind,
  over: Partial<StatementRow> = {},
): StatementRow {
  return {
    ...makeStatement(kind),
    id,
    media_id: "ep1",
    trusted: false,
    ...over,
  };
}

// One statement per verdict kind, s_acc chosen so rounding matters.
export function makeReport(over: Partial<AccuracyReport> = {}): AccuracyReport {
  return {
    media_id: "ep1",
    s_acc: 0.4921666666,
    policy: "MeanScore",
    per_metric: { veracity: 0.4921666666 },
    counts: { exact: 1, path: 1, none: 1 },
    statements: [
      makeStatement("ExactMatch"),
      makeStatement("PathIndication", {
        subject: "co2",
        predicate: "threaten",
        object: "sea level",
      }),
      makeStatement("NoEvidence", {
        subject: "unicorns",
        predicate: "cause",
        object: "rainbows",
      }),
    ],
    ...over,
  };
}
