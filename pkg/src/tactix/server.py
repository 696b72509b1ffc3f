"""HTTP service: pre-match recommendations and live in-match sessions.

Sessions are event-sourced: the canonical state is the append-only event
log, and every write carries an optimistic version check (409 on a stale
version).  What-if queries run on hypothetical copies and never touch the
log.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from pydantic import BaseModel

from .domain import DataError, GameState
from .inmatch import (
    InMatchStrategy,
    StateModelBank,
    SubstitutionAction,
    action_payoff,
    apply_action,
    choose_action,
)
from .prematch import APPROACHES, ModelBundle, recommend_prematch
from .strength import outcome_probs
from .synthetic import lineup_for


class EventBody(BaseModel):
    type: str  # goal | minute | substitution
    side: str | None = None
    minute: float | None = None
    player_in: str | None = None
    player_out: str | None = None
    expected_version: int | None = None


class WhatIfBody(BaseModel):
    side: str = "home"
    substitutions: list[dict] = []


class SessionCreate(BaseModel):
    home_team: str
    away_team: str
    home_formation: str | None = None
    away_formation: str | None = None


@dataclass
class Session:
    id: str
    home_team: str
    away_team: str
    events: list[dict] = field(default_factory=list)
    version: int = 0


@dataclass
class SessionStore:
    sessions: dict[str, Session] = field(default_factory=dict)


def _fold_events(session: Session, base: dict) -> dict:
    """Replay the event log into (state, strategies)."""
    state = GameState(0, 0, 0.0)
    home_s: InMatchStrategy = base["home"]
    away_s: InMatchStrategy = base["away"]
    for ev in session.events:
        if ev["type"] == "goal":
            if ev["side"] == "home":
                state = GameState(state.home_goals + 1, state.away_goals, state.minute)
            else:
                state = GameState(state.home_goals, state.away_goals + 1, state.minute)
        elif ev["type"] == "minute":
            state = GameState(state.home_goals, state.away_goals, float(ev["minute"]))
        elif ev["type"] == "substitution":
            action = SubstitutionAction(((ev["player_in"], ev.get("player_out") or ""),))
            if ev["side"] == "home":
                home_s = apply_action(home_s, action)
            else:
                away_s = apply_action(away_s, action)
    return {"state": state, "home": home_s, "away": away_s}


def create_app(data_dir: Path) -> FastAPI:
    from .cli import _load_fixtures, _load_styles, _models_dir, load_bundle
    from .synthetic import squads_from_json

    data_dir = Path(data_dir)
    bundle, bank = load_bundle(_models_dir(data_dir))
    matches = _load_fixtures(data_dir)
    features = _load_styles(data_dir)
    squads = squads_from_json((data_dir / "squads.json").read_text())
    players = {p.id: p for squad in squads.values() for p in squad}

    app = FastAPI(title="tactics engine")
    store = SessionStore()
    app.state.store = store

    def base_strategies(session: Session) -> dict:
        def strategy(team: str, formation_key: str | None) -> InMatchStrategy:
            from .domain import Formation, TacticChoice

            if formation_key:
                formation = Formation.parse(formation_key)
            else:
                formation = matches[0].home_tactic.formation
            style = bundle.cluster_set.assignments.get(team, 0)
            lineup, bench = lineup_for(squads[team], formation)
            return InMatchStrategy(
                tactic=TacticChoice(formation, style), lineup=lineup, bench=bench
            )

        meta = session.events[0]
        return {
            "home": strategy(session.home_team, meta.get("home_formation")),
            "away": strategy(session.away_team, meta.get("away_formation")),
        }

    def get_session(session_id: str) -> Session:
        s = store.sessions.get(session_id)
        if s is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        return s

    def folded(session: Session) -> dict:
        return _fold_events(session, base_strategies(session))

    def session_payload(session: Session) -> dict:
        f = folded(session)
        state: GameState = f["state"]
        return {
            "id": session.id,
            "home_team": session.home_team,
            "away_team": session.away_team,
            "state": {
                "home_goals": state.home_goals,
                "away_goals": state.away_goals,
                "minute": state.minute,
            },
            "home_strategy": _strategy_payload(f["home"]),
            "away_strategy": _strategy_payload(f["away"]),
            "version": session.version,
            "model_version": bundle.version,
            "events": session.events[1:],
        }

    def _strategy_payload(s: InMatchStrategy) -> dict:
        return {
            "formation": s.tactic.formation.key,
            "style": s.tactic.style,
            "lineup": [p.id for p in s.lineup],
            "bench": [p.id for p in s.bench],
            "subs_remaining": s.subs_remaining,
            "mean_contribution": s.mean_contribution(),
        }

    @app.get("/models")
    def models():
        return {
            "model_version": bundle.version,
            "trained_through_round": bundle.trained_through_round,
            "styles": bundle.cluster_set.k,
            "formations": bundle.encoder.formation_vocab,
            "transition_states": sorted(bank.models),
        }

    @app.post("/sessions", status_code=201)
    def create_session(body: SessionCreate):
        for team in (body.home_team, body.away_team):
            if team not in squads:
                raise HTTPException(status_code=422, detail=f"unknown team {team!r}")
        sid = uuid.uuid4().hex[:12]
        session = Session(id=sid, home_team=body.home_team, away_team=body.away_team)
        session.events.append(
            {
                "type": "created",
                "home_formation": body.home_formation,
                "away_formation": body.away_formation,
            }
        )
        store.sessions[sid] = session
        return session_payload(session)

    @app.get("/sessions/{session_id}")
    def read_session(session_id: str):
        return session_payload(get_session(session_id))

    @app.post("/sessions/{session_id}/events")
    def post_event(session_id: str, body: EventBody):
        session = get_session(session_id)
        if body.expected_version is not None and body.expected_version != session.version:
            raise HTTPException(
                status_code=409,
                detail=f"stale version {body.expected_version}, "
                f"current is {session.version}",
            )
        ev = {k: v for k, v in body.model_dump().items() if v is not None}
        ev.pop("expected_version", None)
        if body.type not in ("goal", "minute", "substitution"):
            raise HTTPException(status_code=422, detail=f"unknown event type {body.type!r}")
        if body.type in ("goal", "substitution") and body.side not in ("home", "away"):
            raise HTTPException(status_code=422, detail="event needs side home|away")
        if body.type == "minute" and body.minute is None:
            raise HTTPException(status_code=422, detail="minute event needs a minute")
        f = folded(session)
        if body.type == "minute" and body.minute < f["state"].minute:
            raise HTTPException(status_code=422, detail="minute cannot decrease")
        if body.type == "substitution":
            strat: InMatchStrategy = f[body.side]
            if strat.subs_remaining < 1:
                raise HTTPException(status_code=422, detail="no substitutions remaining")
            try:
                apply_action(
                    strat,
                    SubstitutionAction(((body.player_in, body.player_out or ""),)),
                )
            except DataError as exc:
                raise HTTPException(status_code=422, detail=str(exc))
        session.events.append(ev)
        session.version += 1
        return session_payload(session)

    @app.get("/sessions/{session_id}/prematch")
    def prematch(session_id: str, approach: str = Query("best_response")):
        session = get_session(session_id)
        if approach not in APPROACHES:
            raise HTTPException(status_code=422, detail=f"unknown approach {approach!r}")
        rec = recommend_prematch(
            bundle,
            session.home_team,
            session.away_team,
            "home",
            history=matches,
            team_features=features,
            approach=approach,
        )
        return {"model_version": bundle.version, **rec.to_dict()}

    def _decision(session: Session, side: str, approach: str, hypothetical=None):
        f = folded(session)
        home_s, away_s = f["home"], f["away"]
        if hypothetical is not None:
            action = SubstitutionAction(
                tuple((p["player_in"], p.get("player_out") or "") for p in hypothetical)
            )
            try:
                if side == "home":
                    home_s = apply_action(home_s, action)
                else:
                    away_s = apply_action(away_s, action)
            except DataError as exc:
                raise HTTPException(status_code=422, detail=str(exc))
        state: GameState = f["state"]
        sp = outcome_probs(bundle.strengths, session.home_team, session.away_team)
        remaining = max(bank.encoder.total_duration - state.minute, 0.0)
        return choose_action(
            bank, state, side, home_s, away_s, sp.as_tuple(), remaining, approach
        )

    @app.get("/sessions/{session_id}/actions")
    def actions(
        session_id: str,
        approach: str = Query("aggressive"),
        side: str = Query("home"),
    ):
        session = get_session(session_id)
        if approach not in ("aggressive", "reserved"):
            raise HTTPException(status_code=422, detail=f"unknown approach {approach!r}")
        if side not in ("home", "away"):
            raise HTTPException(status_code=422, detail="side must be home|away")
        decision = _decision(session, side, approach)
        return {
            "model_version": bundle.version,
            "session_version": session.version,
            "side": side,
            "approach": approach,
            "recommendation": decision.to_dict(),
        }

    @app.post("/sessions/{session_id}/whatif")
    def whatif(session_id: str, body: WhatIfBody):
        """Payoffs after a hypothetical action, without mutating the session."""
        session = get_session(session_id)
        if body.side not in ("home", "away"):
            raise HTTPException(status_code=422, detail="side must be home|away")
        results = {}
        for approach in ("aggressive", "reserved"):
            baseline = _decision(session, body.side, approach)
            after = _decision(session, body.side, approach, hypothetical=body.substitutions)
            f = folded(session)
            state: GameState = f["state"]
            sp = outcome_probs(bundle.strengths, session.home_team, session.away_team)
            remaining = max(bank.encoder.total_duration - state.minute, 0.0)
            objective = "advance" if approach == "aggressive" else "hold"
            action = SubstitutionAction(
                tuple((p["player_in"], p.get("player_out") or "") for p in body.substitutions)
            )
            try:
                hypo_payoff = action_payoff(
                    bank, state, action, body.side, f["home"], f["away"],
                    sp.as_tuple(), remaining, objective,
                )
            except DataError as exc:
                raise HTTPException(status_code=422, detail=str(exc))
            do_nothing = next(
                p for a, p in baseline.all_payoffs if a.n_subs == 0
            )
            results[approach] = {
                "hypothetical_payoff": hypo_payoff,
                "do_nothing_payoff": do_nothing,
                "best_payoff": baseline.payoff,
                "best_action": baseline.action.key(),
            }
        return {
            "model_version": bundle.version,
            "session_version": session.version,
            "side": body.side,
            "comparison": results,
        }

    return app
