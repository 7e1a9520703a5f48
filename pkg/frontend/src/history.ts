// Evaluation history: named snapshots and the comparison table. Every
// number is carried verbatim from the service response; formatting to
// three decimals happens only at display time, matching the CLI.

import type { MetricValues } from "./model.js";
import { fmt3 } from "./util.js";

export interface Snapshot {
  name: string;
  metrics: MetricValues;
}

export function snapshotRow(s: Snapshot): string[] {
  return [
    s.name,
    fmt3(s.metrics.coverage),
    fmt3(s.metrics.occlusion),
    fmt3(s.metrics.information_gain),
    fmt3(s.metrics.score),
  ];
}

// index of the snapshot with the best fused score; -1 when no snapshot
// has a score at all
export function bestIndex(snaps: Snapshot[]): number {
  let best = -1;
  for (let i = 0; i < snaps.length; i++) {
    const s = snaps[i].metrics.score;
    if (s === null || s === undefined) continue;
    if (best === -1 || s > (snaps[best].metrics.score as number)) best = i;
  }
  return best;
}

// descending by score, unlabeled (null score) rows last, ties stable:
// the same ordering the CLI comparison table prints
export function orderedByScore(snaps: Snapshot[]): Snapshot[] {
  return snaps
    .map((s, i) => [s, i] as [Snapshot, number])
    .sort((a, b) => {
      const sa = a[0].metrics.score;
      const sb = b[0].metrics.score;
      if (sa === null && sb === null) return a[1] - b[1];
      if (sa === null) return 1;
      if (sb === null) return -1;
      if (sa !== sb) return sb - sa;
      return a[1] - b[1];
    })
    .map(([s]) => s);
}
