"""Command-line surface for the tactics engine pipeline."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from .clustering import clusters_from_json, clusters_to_json
from .domain import (
    DataError,
    dump_matches_jsonl,
    dump_style_csv,
    load_matches_jsonl,
    load_style_csv,
    match_to_dict,
)
from .figures import (
    save_loss_curve,
    save_replay_comparison,
    save_state_accuracy_heatmap,
)
from .harness import (
    FitOptions,
    accuracy_grid_csv,
    fit_bundle,
    replay_inmatch,
    replay_prematch,
    report_to_csv,
    report_to_json,
    state_accuracy_grid,
)
from .inmatch import bank_from_json, bank_to_json, train_transition_bank
from .opposition import formation_clf_from_json, formation_clf_to_json
from .payoffnet import loss_log_csv, net_from_json, net_to_json
from .prematch import FeatureEncoder, ModelBundle, recommendation_to_json, recommend_prematch
from .strength import strength_from_json, strength_to_json
from .synthetic import (
    GeneratorConfig,
    simulate_league,
    simulate_match,
    squads_from_json,
    squads_to_json,
    truth_from_json,
    truth_to_json,
)
from .synthetic import League, generate_league


def _data_dir(value: str | None) -> Path:
    if value is None:
        raise click.UsageError("no data directory; pass --data-dir or set TACTICS_DATA_DIR")
    return Path(value)


def _load_fixtures(data_dir: Path):
    path = data_dir / "fixtures.jsonl"
    if not path.exists():
        raise DataError(f"no fixtures at {path}; run `tactix gen` first")
    return load_matches_jsonl(path.read_text())


def _load_styles(data_dir: Path) -> dict:
    path = data_dir / "styles.csv"
    if not path.exists():
        raise DataError(f"no style features at {path}; run `tactix gen` first")
    return dict(load_style_csv(path.read_text()))


def _load_players(data_dir: Path) -> dict:
    path = data_dir / "squads.json"
    if not path.exists():
        raise DataError(f"no squads at {path}; run `tactix gen` first")
    squads = squads_from_json(path.read_text())
    return {p.id: p for squad in squads.values() for p in squad}


def _models_dir(data_dir: Path, version: str | None = None) -> Path:
    root = data_dir / "models"
    if version:
        return root / version
    if not root.exists():
        raise DataError("models not fitted; run `tactix fit` first")
    versions = sorted(d.name for d in root.iterdir() if d.is_dir())
    if not versions:
        raise DataError("models not fitted; run `tactix fit` first")
    return root / versions[-1]


def _save_bundle(bundle: ModelBundle, bank, out: Path):
    out.mkdir(parents=True, exist_ok=True)
    (out / "strengths.json").write_text(strength_to_json(bundle.strengths))
    (out / "clusters.json").write_text(clusters_to_json(bundle.cluster_set))
    (out / "formation_clf.json").write_text(formation_clf_to_json(bundle.formation_clf))
    (out / "payoff_net.json").write_text(net_to_json(bundle.payoff_net))
    (out / "payoff_loss.csv").write_text(loss_log_csv(bundle.payoff_net))
    (out / "encoder.json").write_text(json.dumps(bundle.encoder.to_dict(), indent=2))
    (out / "bank.json").write_text(bank_to_json(bank))
    (out / "meta.json").write_text(
        json.dumps(
            {
                "version": bundle.version,
                "trained_through_round": bundle.trained_through_round,
            },
            indent=2,
        )
    )
    save_loss_curve(bundle.payoff_net.loss_log, out / "payoff_loss.png")


def load_bundle(models_dir: Path) -> tuple[ModelBundle, object]:
    meta = json.loads((models_dir / "meta.json").read_text())
    bundle = ModelBundle(
        strengths=strength_from_json((models_dir / "strengths.json").read_text()),
        cluster_set=clusters_from_json((models_dir / "clusters.json").read_text()),
        formation_clf=formation_clf_from_json(
            (models_dir / "formation_clf.json").read_text()
        ),
        payoff_net=net_from_json((models_dir / "payoff_net.json").read_text()),
        encoder=FeatureEncoder.from_dict(
            json.loads((models_dir / "encoder.json").read_text())
        ),
        version=meta["version"],
        trained_through_round=meta["trained_through_round"],
    )
    bank = bank_from_json((models_dir / "bank.json").read_text())
    return bundle, bank


@click.group()
def cli():
    """Football tactics engine: synthetic leagues, model fitting, tactic
    recommendations, replay evaluation and a live match service."""


data_dir_option = click.option(
    "--data-dir",
    envvar="TACTICS_DATA_DIR",
    default=None,
    help="Working directory for fixtures, models and reports "
    "(default: $TACTICS_DATA_DIR).",
)
seed_option = click.option("--seed", default=0, show_default=True, type=int)
out_option = click.option("--out", default=None, help="Override the output location.")


@cli.command()
@click.option("--teams", default=20, show_default=True, type=int)
@click.option("--seasons", default=2, show_default=True, type=int)
@click.option("--styles", default=4, show_default=True, type=int)
@click.option("--habit", default="cluster_favorite", show_default=True,
              type=click.Choice(["cluster_favorite", "repeat_last", "random"]))
@click.option("--separation", default="well_separated", show_default=True,
              type=click.Choice(["well_separated", "overlapping"]))
@click.option("--homogeneous", is_flag=True,
              help="Disable the trailing-side scoring boost so analytic "
              "outcome probabilities exist.")
@click.option("--sub-policy", default="best_bench", show_default=True,
              type=click.Choice(["best_bench", "random", "none"]))
@data_dir_option
@seed_option
@out_option
def gen(teams, seasons, styles, habit, separation, homogeneous, sub_policy,
        data_dir, seed, out):
    """Generate a synthetic league with planted ground truth."""
    target = Path(out) if out else _data_dir(data_dir)
    target.mkdir(parents=True, exist_ok=True)
    config = GeneratorConfig(
        n_teams=teams,
        seasons=seasons,
        n_styles=styles,
        habit=habit,
        separation=separation,
        scoreline_boost=1.0 if homogeneous else 1.2,
        sub_policy=sub_policy,
        seed=seed,
    )
    league, matches = simulate_league(config)
    (target / "fixtures.jsonl").write_text(dump_matches_jsonl(matches))
    (target / "styles.csv").write_text(
        dump_style_csv([(t, league.features[t]) for t in league.teams])
    )
    (target / "squads.json").write_text(squads_to_json(league))
    (target / "truth.json").write_text(truth_to_json(league))
    click.echo(f"wrote {len(matches)} fixtures for {teams} teams to {target}")


@cli.command()
@click.option("--through-round", default=None, type=int,
              help="Fit only on rounds <= this (for walk-forward use); "
              "default: all rounds.")
@click.option("--styles", default=None, type=int,
              help="Style cluster count; default: elbow-selected.")
@click.option("--version", "version_", default=None,
              help="Model bundle version label; default: derived from the cut.")
@data_dir_option
@seed_option
def fit(through_round, styles, version_, data_dir, seed):
    """Fit strengths, style clusters, formation model, payoff net and the
    transition bank; write a versioned model bundle."""
    dd = _data_dir(data_dir)
    matches = _load_fixtures(dd)
    features = _load_styles(dd)
    players = _load_players(dd)
    if through_round is not None:
        matches = [m for m in matches if m.round <= through_round]
        if not matches:
            raise DataError(f"no matches at rounds <= {through_round}")
    version = version_ or f"r{max(m.round for m in matches):03d}-s{seed}"
    bundle = fit_bundle(
        matches, features, FitOptions(n_styles=styles, seed=seed), version=version
    )
    bank = train_transition_bank(
        matches, bundle.strengths, players, n_styles=bundle.cluster_set.k, seed=seed
    )
    out = dd / "models" / version
    _save_bundle(bundle, bank, out)
    click.echo(
        f"fitted bundle {version} on {len(matches)} matches "
        f"(k={bundle.cluster_set.k}) -> {out}"
    )


@cli.command()
@click.option("--team", required=True)
@click.option("--opponent", required=True)
@click.option("--venue", default="home", show_default=True,
              type=click.Choice(["home", "away"]))
@click.option("--approach", default="best", show_default=True,
              type=click.Choice(["best", "spiteful", "minmax"]))
@click.option("--point-mass", is_flag=True,
              help="Collapse the belief to the single most likely opponent tactic.")
@data_dir_option
@seed_option
@out_option
def recommend(team, opponent, venue, approach, point_mass, data_dir, seed, out):
    """Recommend a pre-match tactic for a fixture."""
    dd = _data_dir(data_dir)
    bundle, _bank = load_bundle(_models_dir(dd))
    matches = _load_fixtures(dd)
    features = _load_styles(dd)
    full = {"best": "best_response", "spiteful": "spiteful", "minmax": "minmax"}[approach]
    rec = recommend_prematch(
        bundle, team, opponent, venue,
        history=matches, team_features=features,
        approach=full, point_mass=point_mass,
    )
    text = recommendation_to_json(rec)
    if out:
        Path(out).write_text(text)
        click.echo(f"wrote recommendation to {out}")
    else:
        click.echo(text)


@cli.command()
@click.option("--stage", default="prematch", show_default=True,
              type=click.Choice(["prematch", "inmatch"]))
@click.option("--approach", default=None,
              help="prematch: best|spiteful|minmax (default best); "
              "inmatch: aggressive|reserved (default aggressive).")
@click.option("--split-round", default=None, type=int,
              help="Fit on rounds < split, replay rounds >= split "
              "(default: halfway).")
@click.option("--heatmap", is_flag=True,
              help="Also emit the per-state transition accuracy grid.")
@data_dir_option
@seed_option
@out_option
def replay(stage, approach, split_round, heatmap, data_dir, seed, out):
    """Walk-forward replay of the dataset with fresh models fitted on the
    rounds before the split."""
    dd = _data_dir(data_dir)
    matches = _load_fixtures(dd)
    features = _load_styles(dd)
    players = _load_players(dd)
    max_round = max(m.round for m in matches)
    split = split_round if split_round is not None else (max_round + 1) // 2
    train = [m for m in matches if m.round < split]
    test = [m for m in matches if m.round >= split]
    if not train or not test:
        raise DataError(f"split round {split} leaves an empty train or replay set")

    out_dir = Path(out) if out else dd / "reports"
    out_dir.mkdir(parents=True, exist_ok=True)

    if stage == "prematch":
        approach_full = {
            None: "best_response", "best": "best_response",
            "best_response": "best_response",
            "spiteful": "spiteful", "minmax": "minmax",
        }.get(approach)
        if approach_full is None:
            raise DataError(f"unknown prematch approach {approach!r}")
        bundle = fit_bundle(train, features, FitOptions(seed=seed),
                            version=f"replay-r{split:03d}-s{seed}")
        report = replay_prematch(test, bundle, features, approach=approach_full)
        summary = report.summary()
        stem = f"replay_prematch_{approach_full}"
        save_replay_comparison(
            ["win probability"],
            [summary["mean_win_prob_recommended"]],
            [summary["mean_win_prob_actual"]],
            "mean P(win)", f"Pre-match replay ({approach_full})",
            out_dir / f"{stem}.png",
        )
    else:
        approach_full = approach or "aggressive"
        if approach_full not in ("aggressive", "reserved"):
            raise DataError(f"unknown inmatch approach {approach!r}")
        from .strength import fit_strengths

        strengths = fit_strengths(train)
        from .clustering import kmeans

        cluster_set = kmeans(sorted(features.items()), 4, seed=seed)
        bank = train_transition_bank(
            train, strengths, players, n_styles=cluster_set.k, seed=seed
        )
        report = replay_inmatch(test, bank, strengths, players, approach=approach_full)
        summary = report.summary()
        stem = f"replay_inmatch_{approach_full}"
        save_replay_comparison(
            [approach_full],
            [summary["mean_optimized_payoff"]],
            [summary["mean_actual_payoff"]],
            "mean payoff", "In-match replay payoffs",
            out_dir / f"{stem}.png",
        )
        if heatmap:
            acc, counts = state_accuracy_grid(bank, test, strengths, players)
            (out_dir / "state_accuracy.csv").write_text(accuracy_grid_csv(acc, counts))
            save_state_accuracy_heatmap(acc, counts, out_dir / "state_accuracy.png")

    (out_dir / f"{stem}.json").write_text(report_to_json(summary))
    (out_dir / f"{stem}.csv").write_text(report_to_csv(summary))
    click.echo(report_to_json(summary))


@cli.command()
@click.option("--home", required=True)
@click.option("--away", required=True)
@click.option("--round", "round_", default=0, show_default=True, type=int)
@data_dir_option
@seed_option
@out_option
def simulate(home, away, round_, data_dir, seed, out):
    """Simulate one match under the generated league's ground truth."""
    dd = _data_dir(data_dir)
    truth_path = dd / "truth.json"
    if not truth_path.exists():
        raise DataError(f"no ground truth at {truth_path}; run `tactix gen` first")
    truth = truth_from_json(truth_path.read_text())
    squads = squads_from_json((dd / "squads.json").read_text())
    features = _load_styles(dd)
    league = League(
        teams=sorted(truth.attack), features=features, squads=squads, truth=truth
    )
    rng = np.random.default_rng(seed)
    from .synthetic import pick_tactic

    ht = pick_tactic(truth, home, None, rng)
    at = pick_tactic(truth, away, None, rng)
    record = simulate_match(league, home, away, ht, at, round_, seed)
    text = json.dumps(match_to_dict(record), indent=2)
    if out:
        Path(out).write_text(text)
        click.echo(f"wrote simulated match to {out}")
    else:
        click.echo(text)


@cli.command()
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@data_dir_option
def serve(port, host, data_dir):
    """Serve recommendations and live-session state over HTTP."""
    import uvicorn

    from .server import create_app

    dd = _data_dir(data_dir)
    app = create_app(dd)
    uvicorn.run(app, host=host, port=port)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        click.echo(cli.get_help(click.Context(cli)), err=True)
        return 2
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except (DataError, FileNotFoundError, KeyError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 1


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
