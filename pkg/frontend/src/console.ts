/** Orchestrates one operator session against the service.
 *
 * State handling follows the API's event-sourcing model: the console holds
 * the latest session snapshot, posts events with the optimistic version it
 * last saw, and on a 409 refreshes and asks the operator to retry.
 */

import { ApiClient, ApiError, ConflictError } from "./api.js";
import type {
  EventPayload,
  InmatchApproach,
  SessionPayload,
  SubstitutionRequest,
} from "./types.js";
import {
  ActionsView,
  TerminalView,
  TimelineEntry,
  buildActionsView,
  buildTerminalView,
  buildTimeline,
  scorelineBadge,
} from "./viewmodel.js";

export const DEFAULT_DURATION_MINUTES = 94;

export interface ConsoleView {
  session: SessionPayload;
  scoreline: string;
  timeline: TimelineEntry[];
  actions: ActionsView | TerminalView;
}

export type StepResult =
  | { kind: "applied"; view: ConsoleView }
  | { kind: "rejected"; reason: string }
  | { kind: "conflict"; prompt: string; view: ConsoleView };

export class MatchConsole {
  private session: SessionPayload | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly side: "home" | "away" = "home",
    private readonly approach: InmatchApproach = "aggressive",
    private readonly durationMinutes: number = DEFAULT_DURATION_MINUTES,
  ) {}

  get snapshot(): SessionPayload {
    if (!this.session) throw new Error("no session open");
    return this.session;
  }

  async open(homeTeam: string, awayTeam: string): Promise<ConsoleView> {
    this.session = await this.api.createSession(homeTeam, awayTeam);
    return this.view();
  }

  async refresh(): Promise<ConsoleView> {
    this.session = await this.api.getSession(this.snapshot.id);
    return this.view();
  }

  /** Post a live event; payoffs are re-fetched on success. */
  async step(event: EventPayload): Promise<StepResult> {
    const current = this.snapshot;
    try {
      this.session = await this.api.postEvent(current.id, event, current.version);
      return { kind: "applied", view: await this.view() };
    } catch (err) {
      if (err instanceof ConflictError) {
        const view = await this.refresh();
        return {
          kind: "conflict",
          prompt: "session changed elsewhere; refreshed — please retry",
          view,
        };
      }
      if (err instanceof ApiError && err.status === 422) {
        return { kind: "rejected", reason: err.detail };
      }
      throw err;
    }
  }

  whatIf(substitutions: SubstitutionRequest[]) {
    return this.api.whatIf(this.snapshot.id, this.side, substitutions);
  }

  async view(): Promise<ConsoleView> {
    const session = this.snapshot;
    const actions =
      session.state.minute >= this.durationMinutes
        ? buildTerminalView(session.state, this.side)
        : buildActionsView(await this.api.getActions(session.id, this.side, this.approach));
    return {
      session,
      scoreline: scorelineBadge(session.state),
      timeline: buildTimeline(session),
      actions,
    };
  }
}
