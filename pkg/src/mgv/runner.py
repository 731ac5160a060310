"""Run orchestration: named random substreams, JSONL traces, summaries, reports.

Every run derives its generator from the user seed plus a stream name, so
adding a new consumer never shifts the draws of an existing one.  Trace files
hold one canonical-JSON record per line; ``timestamp`` is a logical sequence
number, not wall time, so traces for a given (config, seed) are byte-identical
across machines and reruns.
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

import numpy as np

from . import acquisition, bandit, flavell, planning, recall, retrieval
from .config import RunConfig, RunMode
from .envs import (CueRetrievalEnvironment, FeatureBanditEnvironment,
                   StationaryBanditEnvironment, SyntheticTaskEnvironment)
from .errors import MissingFile, ParseError
from .knowledge import KnowledgeItem, KnowledgeStore


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def substream(seed: int, name: str) -> np.random.Generator:
    """Independent generator for a named consumer under one user seed."""
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    key = int.from_bytes(digest[:8], "big")
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(key,)))


def run_id_for(config: RunConfig) -> str:
    """Stable 12-hex id of the experiment: mode, seed, and params.

    The output path is deliberately left out so moving a run's files never
    changes its identity or its trace bytes.
    """
    doc = config.to_dict()
    doc.pop("out", None)
    return hashlib.sha256(canonical_json(doc).encode("utf-8")).hexdigest()[:12]


def _write_trace(path: str | Path, run_id: str, mode: str, payloads: list[dict]) -> None:
    lines = []
    for i, payload in enumerate(payloads):
        lines.append(canonical_json({
            "run_id": run_id,
            "cycle": i,
            "module": mode,
            "payload": payload,
            "timestamp": i,
        }))
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def summary_path_for(trace_path: str | Path) -> Path:
    p = Path(trace_path)
    return p.with_name(p.stem + ".summary.json")


def _build_store(params: dict) -> KnowledgeStore:
    return KnowledgeStore(access_prob=params["access_prob"],
                          encoding_rate=params["encoding_rate"])


def _run_flavell(config: RunConfig, rng) -> tuple[list[dict], dict]:
    p = config.params
    store = _build_store(p)
    for s in p["strategies"]:
        store.add(KnowledgeItem(
            id=s["id"], category=flavell.KnowledgeCategory.STRATEGY,
            tags=set(s["tags"]), successes=s["successes"], failures=s["failures"]))
    env = SyntheticTaskEnvironment({s["id"]: s["quality"] for s in p["strategies"]},
                                   completeness=p["completeness"], noise=p["noise"])
    goal = flavell.GoalSpec(
        success_threshold=p["success_threshold"], max_cycles=p["max_cycles"],
        failure_streak_limit=p["failure_streak_limit"],
        resource_budget=p["resource_budget"] if p["resource_budget"] is not None else math.inf)
    fc = flavell.FlavellConfig(feel_prob=p["feel_prob"],
                               resources_per_cycle=p["resources_per_cycle"],
                               prune_margin=p["prune_margin"])
    state, trace = flavell.run_cycle(set(p["task_tags"]), goal, env, store, fc, rng)
    payloads = [t.to_dict() for t in trace]
    summary = {
        "status": state.status.value,
        "abandon_reason": state.abandon_reason.value if state.abandon_reason else None,
        "cycles": state.cycle,
        "resources_spent": state.resources_spent(),
        "final_outcome": trace[-1].outcome_quality if trace else None,
    }
    return payloads, summary


def _run_acquire(config: RunConfig, rng) -> tuple[list[dict], dict]:
    p = config.params
    store = _build_store(p)
    acq = acquisition.AcquisitionConfig(
        target_performance=p["target_performance"],
        retention_discount=p["retention_discount"],
        total_resources_per_cycle=p["total_resources_per_cycle"],
        items=[acquisition.LearnItem(e["id"], e["latent_difficulty"], e["mastery"])
               for e in p["items"]],
        max_cycles=p["max_cycles"],
        feel_prob=p["feel_prob"],
        jol_noise_sigma=p["jol_noise_sigma"],
        signal_floor=p["signal_floor"],
        mastery_gain=p["mastery_gain"],
    )
    state, trace = acquisition.run_acquisition(acq, store, rng)
    payloads = [t.to_dict() for t in trace]
    summary = {
        "status": "finished" if state.finished else "unfinished",
        "cycles": state.cycle,
        "norm_of_study": state.norm_of_study,
        "remaining_items": sorted(state.active_items),
        "jols": {str(k): v for k, v in sorted(state.jols.items())},
        "resources_spent": sum(t.resources for t in trace),
    }
    return payloads, summary


def _run_retrieve(config: RunConfig, rng) -> tuple[list[dict], dict]:
    p = config.params
    store = _build_store(p)
    for d in p["seed_items"]:
        store.add(KnowledgeItem.from_dict(d), activate=d.get("in_stm", False))
    env = CueRetrievalEnvironment(
        target=p["target"], match_prob=p["match_prob"], cue_samples=p["cue_samples"],
        evidence_scale=p["evidence_scale"], min_matches=p["min_matches"],
        confidence_gain=p["confidence_gain"])
    rc = retrieval.RetrievalConfig(
        satisficing_rate=p["satisficing_rate"],
        default_lambda_fok=p["default_lambda_fok"],
        default_lambda_confidence=p["default_lambda_confidence"],
        max_cycles=p["max_cycles"], compound_decay=p["compound_decay"])
    result, trace = retrieval.run_retrieval(set(p["query"]), store, env, rc, rng)
    payloads = [t.to_dict() for t in trace]
    summary = {"status": result.decision, **result.to_dict()}
    summary["resources_spent"] = sum(t.resources for t in trace)
    return payloads, summary


def _run_bandit(config: RunConfig, rng) -> tuple[list[dict], dict]:
    p = config.params
    if p["env"] == "stationary":
        env = StationaryBanditEnvironment(
            utilities=p["utilities"], times=p["times"],
            reward_noise=p["reward_noise"], time_noise=p["time_noise"])
    else:
        env = FeatureBanditEnvironment(
            utility_weights=np.array(p["utility_weights"]),
            time_weights=np.array(p["time_weights"]),
            reward_noise=p["reward_noise"])
    state = bandit.BanditState.create(
        num_strategies=env.num_arms, feature_dim=env.feature_dim,
        prior_variance=p["prior_variance"], noise_variance=p["noise_variance"],
        gamma_prior=tuple(p["gamma_prior"]))
    records = bandit.run_bandit_episodes(env, state, p["episodes"], rng)
    pulls = [0] * env.num_arms
    regret = 0.0
    for r in records:
        pulls[r["chosen"]] += 1
        regret += r["true_voc_best"] - r["true_voc_chosen"]
    summary = {
        "status": "finished",
        "episodes": len(records),
        "pulls": pulls,
        "cumulative_regret": regret,
        "gamma": state.gamma,
        "cumulative_reward": state.cumulative_reward,
        "cumulative_time": state.cumulative_time,
    }
    return records, summary


def _run_plan(config: RunConfig, rng) -> tuple[list[dict], dict]:
    p = config.params
    priors = tuple(planning.DiscretePrior.from_dict(d) for d in p["priors"])
    state = planning.make_initial_state(p["parents"], priors)
    result = planning.run_myopic_planner(state, p["expansion_cost"], rng)
    payloads = [{"step": i, "node": node, "revealed_value": value}
                for i, (node, value) in enumerate(result.expansions)]
    summary = {
        "status": "finished",
        "expansions": result.num_expansions,
        "plan_value": planning.plan_value(result.state),
        "net_reward": result.net_reward,
        "expansion_cost": p["expansion_cost"],
    }
    return payloads, summary


def _run_recall(config: RunConfig, rng) -> tuple[list[dict], dict]:
    p = config.params
    mdp = recall.RecallMdpConfig(
        drift_prior_mean=p["drift_prior_mean"],
        drift_prior_variance=p["drift_prior_variance"],
        evidence_variance=p["evidence_variance"],
        recall_threshold=p["recall_threshold"],
        recall_utility=p["recall_utility"],
        search_cost=p["search_cost"],
        horizon=p["horizon"],
        z_min=p["z_min"], z_step=p["z_step"])
    policy = recall.solve_recall_mdp(mdp)
    thresholds = recall.stopping_threshold(policy)
    payloads: list[dict] = []
    by_drift = {}
    if p["simulate"] is not None:
        sim = p["simulate"]
        for drift in sim["drifts"]:
            result = recall.simulate_recall(policy, mdp, drift, sim["episodes"],
                                            rng, start=sim["start"])
            by_drift[str(drift)] = {
                "recall_rate": result.recall_rate,
                "mean_recall_time": result.mean_recall_time(),
                "mean_giveup_time": result.mean_giveup_time(),
            }
            for episode in range(sim["episodes"]):
                payloads.append({
                    "episode": episode,
                    "drift": drift,
                    "recalled": bool(result.recalled[episode]),
                    "steps": int(result.steps[episode]),
                })
    summary = {
        "status": "finished",
        "horizon": mdp.horizon,
        "grid_cells": int(policy.z_values.size),
        "stopping_threshold": {str(t): thresholds[t] for t in sorted(thresholds)},
        "simulated": by_drift or None,
    }
    return payloads, summary, policy, thresholds


_RUNNERS = {
    RunMode.FLAVELL: _run_flavell,
    RunMode.ACQUIRE: _run_acquire,
    RunMode.RETRIEVE: _run_retrieve,
    RunMode.BANDIT: _run_bandit,
    RunMode.PLAN: _run_plan,
}


def run(config: RunConfig, emit_policy: str | None = None,
        emit_threshold: str | None = None, stream_name: str | None = None) -> dict:
    """Execute one run: solve/simulate, write the trace, return the summary.

    The trace goes to ``config.out`` when set.  ``emit_policy`` and
    ``emit_threshold`` only apply to the stopping-problem mode and write the
    solved policy table (JSON) and per-step thresholds (CSV).  ``stream_name``
    overrides the substream label (used by repeat fan-out).
    """
    rng = substream(config.seed, stream_name or config.mode.value)
    run_id = run_id_for(config)
    if config.mode is RunMode.RECALL_MDP:
        payloads, summary, policy, thresholds = _run_recall(config, rng)
        if emit_policy:
            Path(emit_policy).write_text(
                json.dumps(policy.to_dict(), sort_keys=True, indent=2) + "\n")
        if emit_threshold:
            lines = ["t,threshold"]
            lines += [f"{t},{'' if thresholds[t] is None else repr(thresholds[t])}"
                      for t in sorted(thresholds)]
            Path(emit_threshold).write_text("\n".join(lines) + "\n")
    else:
        payloads, summary = _RUNNERS[config.mode](config, rng)
    summary = {"run_id": run_id, "mode": config.mode.value, "seed": config.seed,
               **summary}
    if config.out:
        _write_trace(config.out, run_id, config.mode.value, payloads)
        summary_path_for(config.out).write_text(
            json.dumps(summary, sort_keys=True, indent=2) + "\n")
    return summary


def _suffixed(path: str | None, i: int) -> str | None:
    if not path:
        return path
    p = Path(path)
    return str(p.with_name(f"{p.stem}.{i}{p.suffix}"))


def run_repeated(config: RunConfig, repeat: int,
                 emit_policy: str | None = None,
                 emit_threshold: str | None = None) -> list[dict]:
    """Fan a run out over independent substreams.

    Repeat i runs under stream name ``<mode>/<i>`` with its output files
    suffixed ``.<i>``; a single repeat runs the plain stream with paths
    unchanged.
    """
    if repeat <= 1:
        return [run(config, emit_policy, emit_threshold)]
    summaries = []
    for i in range(repeat):
        sub = RunConfig(mode=config.mode, seed=config.seed,
                        params=config.params, out=_suffixed(config.out, i))
        summary = run(sub, _suffixed(emit_policy, i), _suffixed(emit_threshold, i),
                      stream_name=f"{config.mode.value}/{i}")
        summary["repeat_index"] = i
        summaries.append(summary)
    return summaries


def _read_trace(path: str | Path) -> list[dict]:
    p = Path(path)
    if not p.exists():
        raise MissingFile(str(p))
    records = []
    for line_no, line in enumerate(p.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise ParseError(f"{p}:{line_no}: {exc}") from exc
    return records


def _metrics_for(path: Path, records: list[dict]) -> dict:
    module = records[0]["module"] if records else "unknown"
    run_id = records[0]["run_id"] if records else "-"
    metrics = {"trace": str(path), "run_id": run_id, "module": module,
               "records": len(records), "status": "unknown",
               "resources_spent": None, "extra": {}}
    sp = summary_path_for(path)
    if sp.exists():
        try:
            summary = json.loads(sp.read_text())
        except json.JSONDecodeError:
            summary = {}
        metrics["status"] = summary.get("status", "unknown")
        if "resources_spent" in summary:
            metrics["resources_spent"] = summary["resources_spent"]
    payloads = [r.get("payload", {}) for r in records]
    if module in ("flavell", "acquire", "retrieve"):
        spent = sum(p.get("resources", 0.0) for p in payloads)
        metrics["resources_spent"] = spent
        metrics["extra"]["cycles"] = (max((p.get("cycle", 0) for p in payloads),
                                          default=-1) + 1)
    elif module == "bandit":
        regret = sum(p["true_voc_best"] - p["true_voc_chosen"] for p in payloads
                     if "true_voc_best" in p)
        metrics["extra"]["cumulative_regret"] = regret
        if payloads:
            metrics["extra"]["final_gamma"] = payloads[-1].get("gamma")
    elif module == "recall_mdp":
        drifts: dict[float, list[dict]] = {}
        for p_ in payloads:
            drifts.setdefault(p_["drift"], []).append(p_)
        per_drift = {}
        for drift in sorted(drifts):
            eps = drifts[drift]
            succ = [e["steps"] for e in eps if e["recalled"]]
            fail = [e["steps"] for e in eps if not e["recalled"]]
            per_drift[str(drift)] = {
                "episodes": len(eps),
                "recall_rate": len(succ) / len(eps),
                "mean_recall_time": float(np.mean(succ)) if succ else None,
                "mean_giveup_time": float(np.mean(fail)) if fail else None,
            }
        metrics["extra"]["by_drift"] = per_drift
    elif module == "plan":
        metrics["extra"]["expansions"] = len(payloads)
    return metrics


def report(trace_paths: list[str | Path]) -> tuple[dict, str]:
    """Per-run metrics for a set of traces, as a dict and an aligned table."""
    runs = [_metrics_for(Path(p), _read_trace(p)) for p in trace_paths]
    header = ["run_id", "module", "records", "status", "resources"]
    rows = [header]
    for m in runs:
        spent = m["resources_spent"]
        rows.append([m["run_id"], m["module"], str(m["records"]), m["status"],
                     "-" if spent is None else f"{spent:.3f}"])
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    lines = []
    for i, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return {"runs": runs}, "\n".join(lines)
