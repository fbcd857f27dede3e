import type { VerdictKind } from "./types.js";

export type RowColor = "green" | "amber" | "red";

// exhaustive on purpose: a new verdict kind must fail compilation here
export function verdictColor(kind: VerdictKind): RowColor {
  switch (kind) {
    case "ExactMatch":
      return "green";
    case "PathIndication":
      return "amber";
    case "NoEvidence":
      return "red";
    default:
      return unreachable(kind);
  }
}

function unreachable(kind: never): never {
  throw new Error(`unhandled verdict kind: ${String(kind)}`);
}

/** Display form of a score; always the API value, never recomputed. */
export function formatScore(value: number): string {
  return value.toFixed(2);
}
