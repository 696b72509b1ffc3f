/** Pure view-model builders.
 *
 * Every number these produce is copied verbatim from an API payload; the
 * only arithmetic here is for the colour scale, and the raw payoff is kept
 * next to it so colour is never the data.
 */

import type {
  ActionsPayload,
  EventPayload,
  GameStatePayload,
  PrematchApproach,
  PrematchPayload,
  SessionPayload,
  WhatIfComparison,
  WhatIfPayload,
} from "./types.js";

export const DISPLAY_DECIMALS = 4;

export function display(value: number): string {
  return value.toFixed(DISPLAY_DECIMALS);
}

// ---------------------------------------------------------------------------
// Pre-match heatmap

export interface HeatmapCell {
  formation: string;
  style: number;
  key: string;
  payoff: number; // verbatim expected_payoffs[key]
  winProb: number; // verbatim expected_win_probs[key]
  displayPayoff: string;
  /** per-table normalized colour intensity in [0, 1] */
  intensity: number;
  highlighted: boolean;
}

export interface PrematchView {
  approach: string;
  venue: string;
  modelVersion: string;
  recommendedKey: string;
  formations: string[]; // row order
  styles: number[]; // column order
  cells: HeatmapCell[][]; // [formation][style]
  /** opponent belief in the payload's support order */
  beliefColumns: { key: string; mass: number }[];
}

function splitKey(key: string): { formation: string; style: number } {
  const at = key.lastIndexOf("|");
  return { formation: key.slice(0, at), style: Number(key.slice(at + 1)) };
}

export function buildPrematchView(payload: PrematchPayload): PrematchView {
  const keys = Object.keys(payload.expected_payoffs);
  const formations: string[] = [];
  const styles: number[] = [];
  for (const k of keys) {
    const { formation, style } = splitKey(k);
    if (!formations.includes(formation)) formations.push(formation);
    if (!styles.includes(style)) styles.push(style);
  }
  const values = keys.map((k) => payload.expected_payoffs[k]!);
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  const span = hi > lo ? hi - lo : 1;
  const recommendedKey = `${payload.choice.formation}|${payload.choice.style}`;

  const cells = formations.map((formation) =>
    styles.map((style) => {
      const key = `${formation}|${style}`;
      const payoff = payload.expected_payoffs[key];
      if (payoff === undefined) {
        throw new Error(`payoff table is missing cell ${key}`);
      }
      return {
        formation,
        style,
        key,
        payoff,
        winProb: payload.expected_win_probs[key] ?? NaN,
        displayPayoff: display(payoff),
        intensity: (payoff - lo) / span,
        highlighted: key === recommendedKey,
      };
    }),
  );
  return {
    approach: payload.approach,
    venue: payload.venue,
    modelVersion: payload.model_version,
    recommendedKey,
    formations,
    styles,
    cells,
    beliefColumns: Object.entries(payload.belief).map(([key, mass]) => ({ key, mass })),
  };
}

/** One view per criterion, so the operator can compare recommendations. */
export function buildPrematchComparison(
  payloads: Record<PrematchApproach, PrematchPayload>,
): Record<PrematchApproach, PrematchView> {
  return {
    best_response: buildPrematchView(payloads.best_response),
    spiteful: buildPrematchView(payloads.spiteful),
    minmax: buildPrematchView(payloads.minmax),
  };
}

// ---------------------------------------------------------------------------
// Ranked in-match actions

export interface RankedAction {
  rank: number;
  key: string;
  pairs: [string, string][];
  payoff: number; // verbatim
  displayPayoff: string;
  recommended: boolean;
}

export interface ActionsView {
  side: string;
  approach: string;
  objective: string;
  modelVersion: string;
  sessionVersion: number;
  actions: RankedAction[]; // sorted by payoff, descending
  terminal: false;
}

export interface TerminalView {
  terminal: true;
  side: string;
  result: "win" | "draw" | "loss";
  holdAchieved: boolean;
  scoreline: string;
}

export function buildActionsView(payload: ActionsPayload): ActionsView {
  const rec = payload.recommendation;
  const sorted = [...rec.all_payoffs].sort(
    (a, b) => b.payoff - a.payoff || a.pairs.length - b.pairs.length || (a.action < b.action ? -1 : 1),
  );
  return {
    side: payload.side,
    approach: payload.approach,
    objective: rec.objective,
    modelVersion: payload.model_version,
    sessionVersion: payload.session_version,
    actions: sorted.map((entry, i) => ({
      rank: i + 1,
      key: entry.action,
      pairs: entry.pairs,
      payoff: entry.payoff,
      displayPayoff: display(entry.payoff),
      recommended: entry.action === rec.action.key,
    })),
    terminal: false,
  };
}

/** At full time the action list collapses to the hold verdict. */
export function buildTerminalView(
  state: GameStatePayload,
  side: "home" | "away",
): TerminalView {
  const diff =
    side === "home"
      ? state.home_goals - state.away_goals
      : state.away_goals - state.home_goals;
  const result = diff > 0 ? "win" : diff < 0 ? "loss" : "draw";
  return {
    terminal: true,
    side,
    result,
    holdAchieved: diff >= 0,
    scoreline: `${state.home_goals}-${state.away_goals}`,
  };
}

// ---------------------------------------------------------------------------
// Decision history timeline

export interface TimelineEntry {
  index: number;
  label: string;
  event: EventPayload;
}

export function buildTimeline(session: SessionPayload): TimelineEntry[] {
  return session.events.map((event, index) => {
    let label: string;
    switch (event.type) {
      case "goal":
        label = `goal (${event.side})`;
        break;
      case "minute":
        label = `minute ${event.minute}`;
        break;
      case "substitution":
        label = `sub ${event.player_in} on (${event.side})`;
        break;
      default:
        label = event.type;
    }
    return { index, label, event };
  });
}

export function scorelineBadge(state: GameStatePayload): string {
  return `${state.home_goals}-${state.away_goals}`;
}

// ---------------------------------------------------------------------------
// What-if panel

export interface WhatIfRow {
  approach: string;
  hypothetical: number;
  doNothing: number;
  best: number;
  bestAction: string;
  displayHypothetical: string;
  displayDoNothing: string;
  displayBest: string;
}

export function buildWhatIfPanel(payload: WhatIfPayload): WhatIfRow[] {
  return Object.entries(payload.comparison).map(([approach, c]: [string, WhatIfComparison]) => ({
    approach,
    hypothetical: c.hypothetical_payoff,
    doNothing: c.do_nothing_payoff,
    best: c.best_payoff,
    bestAction: c.best_action,
    displayHypothetical: display(c.hypothetical_payoff),
    displayDoNothing: display(c.do_nothing_payoff),
    displayBest: display(c.best_payoff),
  }));
}
