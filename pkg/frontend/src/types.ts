/** Payload shapes of the tactics engine HTTP API, mirrored verbatim. */

export interface GameStatePayload {
  home_goals: number;
  away_goals: number;
  minute: number;
}

export interface StrategyPayload {
  formation: string;
  style: number;
  lineup: string[];
  bench: string[];
  subs_remaining: number;
  mean_contribution: number;
}

export interface SessionPayload {
  id: string;
  home_team: string;
  away_team: string;
  state: GameStatePayload;
  home_strategy: StrategyPayload;
  away_strategy: StrategyPayload;
  version: number;
  model_version: string;
  events: EventPayload[];
}

export interface EventPayload {
  type: string;
  side?: string;
  minute?: number;
  player_in?: string;
  player_out?: string;
}

export type PrematchApproach = "best_response" | "spiteful" | "minmax";
export type InmatchApproach = "aggressive" | "reserved";

export interface PrematchPayload {
  model_version: string;
  choice: { formation: string; style: number };
  approach: string;
  /** keyed by "formation|style" */
  expected_payoffs: Record<string, number>;
  expected_win_probs: Record<string, number>;
  belief: Record<string, number>;
  venue: string;
}

export interface ActionEntryPayload {
  action: string;
  pairs: [string, string][];
  payoff: number;
}

export interface ActionsPayload {
  model_version: string;
  session_version: number;
  side: string;
  approach: string;
  recommendation: {
    action: { pairs: [string, string][]; key: string };
    payoff: number;
    objective: string;
    all_payoffs: ActionEntryPayload[];
  };
}

export interface WhatIfComparison {
  hypothetical_payoff: number;
  do_nothing_payoff: number;
  best_payoff: number;
  best_action: string;
}

export interface WhatIfPayload {
  model_version: string;
  session_version: number;
  side: string;
  comparison: Record<string, WhatIfComparison>;
}

export interface ModelsPayload {
  model_version: string;
  trained_through_round: number;
  styles: number;
  formations: string[];
  transition_states: string[];
}

export interface SubstitutionRequest {
  player_in: string;
  player_out?: string | null;
}
