"""Run configuration: loading, validation, canonical save.

A run document is ``{"mode": ..., "seed": ..., "params": {...}, "out": ...}``.
Validation fills documented defaults, rejects unknown fields, and reports the
offending field by name.  Saving always emits canonical JSON (sorted keys) so
a load/save round trip is byte-stable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .errors import MissingFile, ParseError, ValidationError


class RunMode(Enum):
    FLAVELL = "flavell"
    ACQUIRE = "acquire"
    RETRIEVE = "retrieve"
    BANDIT = "bandit"
    PLAN = "plan"
    RECALL_MDP = "recall_mdp"


@dataclass
class RunConfig:
    mode: RunMode
    seed: int
    params: dict
    out: str | None = None

    def to_dict(self) -> dict:
        return {"mode": self.mode.value, "seed": self.seed,
                "params": self.params, "out": self.out}


def _require(params: dict, name: str, kinds, where: str):
    if name not in params:
        raise ValidationError(f"{where}.{name}", "required field missing")
    return _typed(params[name], name, kinds, where)


def _optional(params: dict, name: str, kinds, where: str, default):
    if name not in params or params[name] is None:
        return default
    return _typed(params[name], name, kinds, where)


def _typed(value, name: str, kinds, where: str):
    # JSON booleans parse as Python bools, which are ints; keep them out of
    # numeric fields.
    if kinds is float:
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
        label = "number"
    elif kinds is int:
        ok = isinstance(value, int) and not isinstance(value, bool)
        label = "integer"
    else:
        ok = isinstance(value, kinds)
        label = getattr(kinds, "__name__", str(kinds))
    if not ok:
        raise ValidationError(f"{where}.{name}", f"expected {label}, got {type(value).__name__}")
    return value


def _check(ok: bool, name: str, where: str, message: str):
    if not ok:
        raise ValidationError(f"{where}.{name}", message)


def _no_unknown(params: dict, allowed: set[str], where: str):
    unknown = set(params) - allowed
    if unknown:
        raise ValidationError(f"{where}.{sorted(unknown)[0]}", "unknown field")


def _unit(value, name, where, lo=0.0, hi=1.0, lo_open=False, hi_open=False):
    above = value > lo if lo_open else value >= lo
    below = value < hi if hi_open else value <= hi
    _check(above and below, name, where,
           f"must lie in {'(' if lo_open else '['}{lo}, {hi}{')' if hi_open else ']'}")
    return float(value)


def _validate_flavell(params: dict) -> dict:
    where = "params"
    _no_unknown(params, {"task_tags", "success_threshold", "max_cycles",
                         "failure_streak_limit", "resource_budget", "feel_prob",
                         "resources_per_cycle", "prune_margin", "access_prob",
                         "encoding_rate", "strategies", "completeness", "noise"}, where)
    tags = _require(params, "task_tags", list, where)
    _check(bool(tags) and all(isinstance(t, str) for t in tags),
           "task_tags", where, "must be a non-empty list of strings")
    out = {
        "task_tags": sorted(set(tags)),
        "success_threshold": _unit(_require(params, "success_threshold", float, where),
                                   "success_threshold", where, lo=-1.0),
        "max_cycles": _require(params, "max_cycles", int, where),
        "failure_streak_limit": _optional(params, "failure_streak_limit", int, where, 3),
        "resource_budget": _optional(params, "resource_budget", float, where, None),
        "feel_prob": _unit(_optional(params, "feel_prob", float, where, 0.5),
                           "feel_prob", where),
        "resources_per_cycle": _optional(params, "resources_per_cycle", float, where, 1.0),
        "prune_margin": _optional(params, "prune_margin", int, where, 5),
        "access_prob": _unit(_optional(params, "access_prob", float, where, 1.0),
                             "access_prob", where),
        "encoding_rate": _unit(_optional(params, "encoding_rate", float, where, 1.0),
                               "encoding_rate", where),
        "completeness": _unit(_optional(params, "completeness", float, where, 1.0),
                              "completeness", where),
        "noise": _optional(params, "noise", float, where, 0.0),
    }
    _check(out["max_cycles"] >= 1, "max_cycles", where, "must be at least 1")
    _check(out["failure_streak_limit"] >= 1, "failure_streak_limit", where, "must be at least 1")
    _check(out["resource_budget"] is None or out["resource_budget"] > 0,
           "resource_budget", where, "must be positive or null")
    _check(out["resources_per_cycle"] > 0, "resources_per_cycle", where, "must be positive")
    _check(out["prune_margin"] >= 0, "prune_margin", where, "must be nonnegative")
    _check(out["noise"] >= 0, "noise", where, "must be nonnegative")

    strategies = _require(params, "strategies", list, where)
    _check(bool(strategies), "strategies", where, "must be non-empty")
    cleaned = []
    for i, entry in enumerate(strategies):
        sw = f"{where}.strategies[{i}]"
        _typed(entry, f"strategies[{i}]", dict, where)
        _no_unknown(entry, {"id", "tags", "quality", "successes", "failures"}, sw)
        sid = _require(entry, "id", str, sw)
        _check(bool(sid), "id", sw, "must be non-empty")
        stags = _optional(entry, "tags", list, sw, list(out["task_tags"]))
        cleaned.append({
            "id": sid,
            "tags": sorted(set(stags)),
            "quality": _unit(_require(entry, "quality", float, sw), "quality", sw, lo=-1.0),
            "successes": _optional(entry, "successes", int, sw, 0),
            "failures": _optional(entry, "failures", int, sw, 0),
        })
    ids = [s["id"] for s in cleaned]
    _check(len(ids) == len(set(ids)), "strategies", where, "ids must be unique")
    out["strategies"] = cleaned
    return out


def _validate_acquire(params: dict) -> dict:
    where = "params"
    _no_unknown(params, {"target_performance", "retention_discount",
                         "total_resources_per_cycle", "max_cycles", "items",
                         "feel_prob", "jol_noise_sigma", "signal_floor",
                         "mastery_gain", "access_prob", "encoding_rate"}, where)
    out = {
        "target_performance": _unit(_require(params, "target_performance", float, where),
                                    "target_performance", where),
        "retention_discount": _require(params, "retention_discount", float, where),
        "total_resources_per_cycle": _require(params, "total_resources_per_cycle", float, where),
        "max_cycles": _require(params, "max_cycles", int, where),
        "feel_prob": _unit(_optional(params, "feel_prob", float, where, 0.5),
                           "feel_prob", where),
        "jol_noise_sigma": _optional(params, "jol_noise_sigma", float, where, 0.05),
        "signal_floor": _optional(params, "signal_floor", float, where, 1e-6),
        "mastery_gain": _optional(params, "mastery_gain", float, where, 0.2),
        "access_prob": _unit(_optional(params, "access_prob", float, where, 1.0),
                             "access_prob", where),
        "encoding_rate": _unit(_optional(params, "encoding_rate", float, where, 1.0),
                               "encoding_rate", where),
    }
    _check(out["retention_discount"] >= 0, "retention_discount", where, "must be nonnegative")
    _check(out["total_resources_per_cycle"] > 0, "total_resources_per_cycle", where,
           "must be positive")
    _check(out["max_cycles"] >= 1, "max_cycles", where, "must be at least 1")
    _check(out["jol_noise_sigma"] >= 0, "jol_noise_sigma", where, "must be nonnegative")
    _check(out["signal_floor"] > 0, "signal_floor", where, "must be positive")
    _check(out["mastery_gain"] > 0, "mastery_gain", where, "must be positive")

    items = _require(params, "items", list, where)
    _check(bool(items), "items", where, "must be non-empty")
    cleaned = []
    for i, entry in enumerate(items):
        iw = f"{where}.items[{i}]"
        _typed(entry, f"items[{i}]", dict, where)
        _no_unknown(entry, {"id", "latent_difficulty", "mastery"}, iw)
        cleaned.append({
            "id": _require(entry, "id", int, iw),
            "latent_difficulty": _unit(_require(entry, "latent_difficulty", float, iw),
                                       "latent_difficulty", iw, lo_open=True),
            "mastery": _unit(_optional(entry, "mastery", float, iw, 0.0), "mastery", iw),
        })
    ids = [e["id"] for e in cleaned]
    _check(len(ids) == len(set(ids)), "items", where, "ids must be unique")
    out["items"] = cleaned
    return out


def _validate_retrieve(params: dict) -> dict:
    where = "params"
    _no_unknown(params, {"query", "satisficing_rate", "default_lambda_fok",
                         "default_lambda_confidence", "max_cycles", "compound_decay",
                         "target", "match_prob", "cue_samples", "evidence_scale",
                         "min_matches", "confidence_gain", "access_prob",
                         "encoding_rate", "seed_items"}, where)
    query = _require(params, "query", list, where)
    _check(bool(query) and all(isinstance(t, str) for t in query),
           "query", where, "must be a non-empty list of strings")
    out = {
        "query": sorted(set(query)),
        "satisficing_rate": _optional(params, "satisficing_rate", float, where, 0.1),
        "default_lambda_fok": _optional(params, "default_lambda_fok", float, where, 0.5),
        "default_lambda_confidence": _unit(
            _optional(params, "default_lambda_confidence", float, where, 0.5),
            "default_lambda_confidence", where, lo_open=True),
        "max_cycles": _optional(params, "max_cycles", int, where, 25),
        "compound_decay": _optional(params, "compound_decay", bool, where, False),
        "target": params.get("target"),
        "match_prob": _unit(_require(params, "match_prob", float, where),
                            "match_prob", where),
        "cue_samples": _optional(params, "cue_samples", int, where, 4),
        "evidence_scale": _optional(params, "evidence_scale", float, where, 0.25),
        "min_matches": _optional(params, "min_matches", int, where, 6),
        "confidence_gain": _optional(params, "confidence_gain", float, where, 1.0),
        "access_prob": _unit(_optional(params, "access_prob", float, where, 1.0),
                             "access_prob", where),
        "encoding_rate": _unit(_optional(params, "encoding_rate", float, where, 1.0),
                               "encoding_rate", where),
        "seed_items": _optional(params, "seed_items", list, where, []),
    }
    _check(out["satisficing_rate"] >= 0, "satisficing_rate", where, "must be nonnegative")
    _check(out["default_lambda_fok"] > 0, "default_lambda_fok", where, "must be positive")
    _check(out["max_cycles"] >= 1, "max_cycles", where, "must be at least 1")
    if out["target"] is not None:
        _typed(out["target"], "target", str, where)
    _check(out["cue_samples"] >= 1, "cue_samples", where, "must be at least 1")
    _check(out["evidence_scale"] > 0, "evidence_scale", where, "must be positive")
    _check(out["min_matches"] >= 0, "min_matches", where, "must be nonnegative")
    _check(out["confidence_gain"] > 0, "confidence_gain", where, "must be positive")
    for i, entry in enumerate(out["seed_items"]):
        _typed(entry, f"seed_items[{i}]", dict, where)
        if "id" not in entry or "category" not in entry:
            raise ValidationError(f"{where}.seed_items[{i}]", "needs id and category")
    return out


def _validate_bandit(params: dict) -> dict:
    where = "params"
    _no_unknown(params, {"env", "utilities", "times", "reward_noise", "time_noise",
                         "utility_weights", "time_weights", "episodes",
                         "prior_variance", "noise_variance", "gamma_prior"}, where)
    kind = _optional(params, "env", str, where, "stationary")
    _check(kind in ("stationary", "feature"), "env", where,
           "must be 'stationary' or 'feature'")
    out = {
        "env": kind,
        "episodes": _require(params, "episodes", int, where),
        "reward_noise": _optional(params, "reward_noise", float, where, 0.1),
        "prior_variance": _optional(params, "prior_variance", float, where, 1.0),
        "noise_variance": _optional(params, "noise_variance", float, where, 1.0),
        "gamma_prior": _optional(params, "gamma_prior", list, where, [0.0, 1.0]),
    }
    _check(out["episodes"] >= 1, "episodes", where, "must be at least 1")
    _check(out["reward_noise"] >= 0, "reward_noise", where, "must be nonnegative")
    _check(out["prior_variance"] > 0, "prior_variance", where, "must be positive")
    _check(out["noise_variance"] > 0, "noise_variance", where, "must be positive")
    gp = out["gamma_prior"]
    _check(len(gp) == 2 and all(isinstance(x, (int, float)) for x in gp) and gp[1] > 0,
           "gamma_prior", where, "must be [pseudo_reward, pseudo_time > 0]")
    out["gamma_prior"] = [float(gp[0]), float(gp[1])]

    if kind == "stationary":
        utilities = _require(params, "utilities", list, where)
        times = _require(params, "times", list, where)
        _check(bool(utilities) and len(utilities) == len(times), "utilities", where,
               "utilities and times must be non-empty and align")
        _check(all(isinstance(u, (int, float)) for u in utilities), "utilities", where,
               "must be numbers")
        _check(all(isinstance(t, (int, float)) and t > 0 for t in times), "times", where,
               "must be positive numbers")
        out["utilities"] = [float(u) for u in utilities]
        out["times"] = [float(t) for t in times]
        out["time_noise"] = _optional(params, "time_noise", float, where, 0.0)
        _check(out["time_noise"] >= 0, "time_noise", where, "must be nonnegative")
    else:
        uw = _require(params, "utility_weights", list, where)
        tw = _require(params, "time_weights", list, where)
        _check(bool(uw) and all(isinstance(r, list) and r for r in uw),
               "utility_weights", where, "must be a non-empty matrix")
        _check(len(tw) == len(uw) and all(
            isinstance(r, list) and len(r) == len(uw[0]) for r in tw),
            "time_weights", where, "must match utility_weights' shape")
        widths = {len(r) for r in uw}
        _check(len(widths) == 1, "utility_weights", where, "rows must share a length")
        out["utility_weights"] = [[float(x) for x in row] for row in uw]
        out["time_weights"] = [[float(x) for x in row] for row in tw]
    return out


def _validate_plan(params: dict) -> dict:
    where = "params"
    _no_unknown(params, {"parents", "priors", "expansion_cost"}, where)
    parents = _require(params, "parents", list, where)
    priors = _require(params, "priors", list, where)
    _check(bool(parents) and parents[0] is None, "parents", where,
           "first entry must be null (the root)")
    for i, p in enumerate(parents[1:], start=1):
        _check(isinstance(p, int) and 0 <= p < len(parents) and p != i,
               f"parents[{i}]", where, "must index another node")
    _check(len(priors) == len(parents), "priors", where, "must align with parents")
    cleaned = []
    for i, entry in enumerate(priors):
        pw = f"{where}.priors[{i}]"
        _typed(entry, f"priors[{i}]", dict, where)
        _no_unknown(entry, {"support", "probs"}, pw)
        support = _require(entry, "support", list, pw)
        probs = _require(entry, "probs", list, pw)
        _check(bool(support) and len(support) == len(probs), "support", pw,
               "support and probs must be non-empty and align")
        _check(all(isinstance(x, (int, float)) for x in support), "support", pw,
               "must be numbers")
        _check(all(isinstance(p, (int, float)) and p >= 0 for p in probs), "probs", pw,
               "must be nonnegative numbers")
        _check(abs(sum(probs) - 1.0) <= 1e-9, "probs", pw, "must sum to 1")
        cleaned.append({"support": [float(x) for x in support],
                        "probs": [float(p) for p in probs]})
    cost = _require(params, "expansion_cost", float, where)
    _check(cost >= 0, "expansion_cost", where, "must be nonnegative")
    return {"parents": list(parents), "priors": cleaned, "expansion_cost": float(cost)}


def _validate_recall(params: dict) -> dict:
    where = "params"
    _no_unknown(params, {"drift_prior_mean", "drift_prior_variance", "evidence_variance",
                         "recall_threshold", "recall_utility", "search_cost", "horizon",
                         "z_min", "z_step", "simulate"}, where)
    out = {
        "drift_prior_mean": float(_require(params, "drift_prior_mean", float, where)),
        "drift_prior_variance": float(_require(params, "drift_prior_variance", float, where)),
        "evidence_variance": float(_require(params, "evidence_variance", float, where)),
        "recall_threshold": float(_require(params, "recall_threshold", float, where)),
        "recall_utility": float(_require(params, "recall_utility", float, where)),
        "search_cost": float(_require(params, "search_cost", float, where)),
        "horizon": _require(params, "horizon", int, where),
        "z_min": _optional(params, "z_min", float, where, None),
        "z_step": _optional(params, "z_step", float, where, None),
        "simulate": None,
    }
    _check(out["drift_prior_variance"] > 0, "drift_prior_variance", where, "must be positive")
    _check(out["evidence_variance"] > 0, "evidence_variance", where, "must be positive")
    _check(out["recall_threshold"] > 0, "recall_threshold", where, "must be positive")
    _check(out["search_cost"] >= 0, "search_cost", where, "must be nonnegative")
    _check(out["horizon"] >= 1, "horizon", where, "must be at least 1")
    sim = params.get("simulate")
    if sim is not None:
        sw = f"{where}.simulate"
        _typed(sim, "simulate", dict, where)
        _no_unknown(sim, {"drifts", "episodes", "start"}, sw)
        drifts = _require(sim, "drifts", list, sw)
        _check(bool(drifts) and all(isinstance(d, (int, float)) for d in drifts),
               "drifts", sw, "must be a non-empty list of numbers")
        episodes = _require(sim, "episodes", int, sw)
        _check(episodes >= 1, "episodes", sw, "must be at least 1")
        out["simulate"] = {"drifts": [float(d) for d in drifts],
                           "episodes": episodes,
                           "start": float(_optional(sim, "start", float, sw, 0.0))}
    return out


_VALIDATORS = {
    RunMode.FLAVELL: _validate_flavell,
    RunMode.ACQUIRE: _validate_acquire,
    RunMode.RETRIEVE: _validate_retrieve,
    RunMode.BANDIT: _validate_bandit,
    RunMode.PLAN: _validate_plan,
    RunMode.RECALL_MDP: _validate_recall,
}


def validate_config(doc: dict) -> RunConfig:
    """Check a run document and return it with defaults filled in."""
    if not isinstance(doc, dict):
        raise ValidationError("document", "must be a JSON object")
    _no_unknown(doc, {"mode", "seed", "params", "out"}, "config")
    mode_raw = _require(doc, "mode", str, "config")
    try:
        mode = RunMode(mode_raw)
    except ValueError:
        raise ValidationError("config.mode", f"unknown mode {mode_raw!r}") from None
    seed = _require(doc, "seed", int, "config")
    _check(seed >= 0, "seed", "config", "must be nonnegative")
    params = _require(doc, "params", dict, "config")
    out = doc.get("out")
    if out is not None:
        _typed(out, "out", str, "config")
    return RunConfig(mode=mode, seed=seed, params=_VALIDATORS[mode](params), out=out)


def validate_params(mode: RunMode, params: dict) -> dict:
    """Validate a bare mode-specific params block."""
    if not isinstance(params, dict):
        raise ValidationError("params", "must be a JSON object")
    return _VALIDATORS[mode](params)


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise MissingFile(str(path))
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return validate_config(doc)


def save_config(config: RunConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(config.to_dict(), sort_keys=True, indent=2) + "\n")
