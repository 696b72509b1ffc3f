import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { buildWhatIfPanel } from "../src/viewmodel.js";
import type { ActionsPayload, SessionPayload, WhatIfPayload } from "../src/types.js";
import { ok, routedFetch } from "./helpers.js";

import sessionMidgame from "./fixtures/session_midgame.json";
import actionsMidgame from "./fixtures/actions_midgame.json";
import whatifDoNothing from "./fixtures/whatif_donothing.json";
import whatifTop from "./fixtures/whatif_top_action.json";

const midgame = sessionMidgame as SessionPayload;
const actions = actionsMidgame as ActionsPayload;

describe("what-if panel", () => {
  it("shows both objectives side by side, verbatim", () => {
    const rows = buildWhatIfPanel(whatifTop as WhatIfPayload);
    expect(rows.map((r) => r.approach).sort()).toEqual(["aggressive", "reserved"]);
    for (const row of rows) {
      const c = (whatifTop as WhatIfPayload).comparison[row.approach]!;
      expect(row.hypothetical).toBe(c.hypothetical_payoff);
      expect(row.doNothing).toBe(c.do_nothing_payoff);
      expect(row.best).toBe(c.best_payoff);
      expect(row.displayHypothetical).toBe(c.hypothetical_payoff.toFixed(4));
    }
  });

  it("do-nothing hypothetical equals the baseline row exactly", () => {
    const rows = buildWhatIfPanel(whatifDoNothing as WhatIfPayload);
    for (const row of rows) {
      expect(row.hypothetical).toBe(row.doNothing);
    }
  });

  it("top-ranked action agrees with the /actions recommendation", () => {
    const aggressive = (whatifTop as WhatIfPayload).comparison["aggressive"]!;
    expect(aggressive.best_action).toBe(actions.recommendation.action.key);
    expect(aggressive.best_payoff).toBe(actions.recommendation.payoff);
    expect(aggressive.hypothetical_payoff).toBe(actions.recommendation.payoff);
  });

  it("leaves the session untouched (audited via GET)", async () => {
    const { fetch, calls } = routedFetch({
      [`GET /sessions/${midgame.id}`]: ok(midgame),
      [`POST /sessions/${midgame.id}/whatif`]: ok(whatifTop),
    });
    const api = new ApiClient("http://engine", fetch);
    const before = await api.getSession(midgame.id);
    await api.whatIf(midgame.id, "home", [{ player_in: "T02_DEF4" }]);
    const after = await api.getSession(midgame.id);
    expect(after).toEqual(before);
    expect(after.version).toBe(midgame.version);
    const writes = calls.filter((c) => c.method === "POST" && c.url.endsWith("/events"));
    expect(writes).toHaveLength(0);
  });
});
