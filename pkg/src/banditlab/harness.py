"""Experiment orchestration: matches, replicates, exponent fits, exports.

A run is fully determined by (config, seed): instance noise comes from the
stream [seed, 0] and algorithm randomness from [seed, 1], so the same seed
exposes identical noise to every algorithm.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import bandits, experts, instances, spaces as sp
from .errors import BanditLabError, ValidationError


# ---------------------------------------------------------------------------
# traces


@dataclass
class RegretTrace:
    algorithm: str
    instance: str
    seed: int
    horizon: int
    mu_star: float
    rewards: np.ndarray
    means: np.ndarray
    cum_regret: np.ndarray
    actions: list | None = None
    info: dict = field(default_factory=dict)

    def checkpoints(self):
        """Round indices 2^0, 2^1, ..., capped at the horizon."""
        return [2 ** j for j in range(int(math.log2(self.horizon)) + 1)]

    def checkpoint_series(self):
        ts = np.array(self.checkpoints(), dtype=float)
        rs = np.array([self.cum_regret[t - 1] for t in self.checkpoints()])
        return ts, rs

    def cum_pseudo_regret(self):
        """Regret against expected (not realized) rewards of the choices."""
        t = np.arange(1, self.horizon + 1)
        return self.mu_star * t - np.cumsum(self.means)

    def to_payload(self):
        return {
            "algorithm": self.algorithm,
            "instance": self.instance,
            "seed": self.seed,
            "horizon": self.horizon,
            "mu_star": float(self.mu_star).hex(),
            "rewards": [float(v).hex() for v in self.rewards],
            "means": [float(v).hex() for v in self.means],
        }

    @staticmethod
    def from_payload(d):
        rewards = np.array([float.fromhex(v) for v in d["rewards"]])
        means = np.array([float.fromhex(v) for v in d["means"]])
        mu_star = float.fromhex(d["mu_star"])
        t = np.arange(1, d["horizon"] + 1)
        return RegretTrace(
            d["algorithm"], d["instance"], d["seed"], d["horizon"],
            mu_star, rewards, means, mu_star * t - np.cumsum(rewards))


def _regret_from(mu_star, rewards):
    t = np.arange(1, len(rewards) + 1)
    return mu_star * t - np.cumsum(rewards)


# ---------------------------------------------------------------------------
# algorithm registry


def build_algorithm(descriptor, space, rng):
    name = descriptor.get("name")
    params = {k: v for k, v in descriptor.items() if k != "name"}
    if name == "ucb1":
        return bandits.ucb1(params["arms"])
    if name == "well_ordered_bandit":
        return bandits.well_ordered_bandit(space, params.get("f", "log_power:1"))
    if name == "cb_bandit":
        return bandits.cb_bandit(space, params.get("f", "log_power:1"))
    if name == "phased_ucb1":
        return bandits.phased_ucb1(space)
    if name == "completion_adapter":
        inner = build_algorithm(params["inner"], space, rng)
        rule = params.get("rounding", "dyadic:20")
        if rule == "identity":
            rounding = bandits.identity_rounding
        elif rule.startswith("dyadic"):
            _, _, arg = rule.partition(":")
            rounding = bandits.dyadic_rounding(int(arg) if arg else 20)
        else:
            raise ValidationError(f"unknown rounding rule {rule!r}")
        return bandits.completion_adapter(inner, rounding, rng)
    if name == "double_feedback_expert":
        return experts.double_feedback_expert(space)
    if name == "naive_experts":
        return experts.naive_experts(
            space, params["b"], uniform=params.get("uniform", False))
    if name == "maxminlcd_experts":
        return experts.maxminlcd_experts(
            space, params["b"], uniform=params.get("uniform", False),
            active_cap=params.get("active_cap", 4096))
    raise ValidationError(f"unknown algorithm {name!r}")


# ---------------------------------------------------------------------------
# coherent per-round sampling for expert feedback


class _RoundSampler:
    """Vectorized feedback for a fixed query tuple plus the current bet.
    The per-point structure is cached while the session reuses the same
    query tuple, which phased algorithms do for whole phases."""

    def __init__(self, instance, rng):
        self.instance = instance
        self.rng = rng
        self._queries = None
        self._bet = None
        self._cache = None

    def _prepare(self, queries, bet):
        points = list(queries) + [bet]
        if self.instance.uniformly_lipschitz:
            keys = {}
            rows = []
            biases = []
            for p in points:
                row = []
                for key, value, bias in self.instance.active_terms(p):
                    if key not in keys:
                        keys[key] = len(keys)
                        biases.append(bias)
                    row.append((keys[key], value))
                rows.append(row)
            matrix = np.zeros((len(points), len(keys)))
            for i, row in enumerate(rows):
                for j, value in row:
                    matrix[i, j] = value
            self._cache = ("signs", matrix,
                           (1.0 + np.array(biases)) / 2.0 if keys else None)
        else:
            mu = self.instance.mean_vector(points)
            self._cache = ("mean", mu, None)

    def rewards(self, queries, bet):
        """(query feedback array, bet reward) from one coherent round."""
        # holding the tuple keeps the identity check free of id reuse
        if queries is not self._queries or bet != self._bet:
            self._prepare(queries, bet)
            self._queries, self._bet = queries, bet
        tag, a, b = self._cache
        if tag == "signs":
            if b is None:
                values = np.full(a.shape[0], 0.5)
            else:
                signs = np.where(self.rng.random(len(b)) < b, 1.0, -1.0)
                values = 0.5 + a @ signs
        elif self.instance.noise == "none":
            values = a
        else:
            values = (self.rng.random(len(a)) < a).astype(float)
        return values[:-1], float(values[-1])


# ---------------------------------------------------------------------------
# match running


@dataclass
class ExperimentConfig:
    space: dict
    instance: dict
    algorithm: dict
    horizon: int
    seed: int = 0
    mode: str | None = None
    record_actions: bool = False

    def __post_init__(self):
        if self.horizon < 1:
            raise ValidationError("horizon must be >= 1")

    def to_dict(self):
        return {"space": self.space, "instance": self.instance,
                "algorithm": self.algorithm, "horizon": self.horizon,
                "seed": self.seed, "mode": self.mode,
                "record_actions": self.record_actions}

    @staticmethod
    def from_dict(d):
        return ExperimentConfig(
            d["space"], d["instance"], d["algorithm"], d["horizon"],
            seed=d.get("seed", 0), mode=d.get("mode"),
            record_actions=d.get("record_actions", False))


def _materialize(config, seed):
    instance = instances.instance_from_descriptor(config.instance)
    space = instance.space
    inst_rng = np.random.default_rng([seed, 0])
    alg_rng = np.random.default_rng([seed, 1])
    session = build_algorithm(config.algorithm, space, alg_rng)
    if config.mode is not None and config.mode != session.mode:
        raise ValidationError(
            f"config mode {config.mode!r} but algorithm runs {session.mode!r}")
    return instance, session, inst_rng


def run_match(config, seed=None):
    seed = config.seed if seed is None else seed
    instance, session, inst_rng = _materialize(config, seed)
    horizon = config.horizon
    rewards = np.empty(horizon)
    means = np.empty(horizon)
    actions = [] if config.record_actions else None
    if session.mode == "bandit":
        for t in range(horizon):
            x = session.choose()
            reward = instance.bandit_reward(x, inst_rng)
            session.observe(reward)
            rewards[t] = reward
            means[t] = instance.mean(x)
            if actions is not None:
                actions.append(x)
    elif session.mode == "double":
        sampler = _RoundSampler(instance, inst_rng)
        for t in range(horizon):
            action = session.choose()
            peeks, bet_reward = sampler.rewards((action.peek,), action.bet)
            session.observe((bet_reward, float(peeks[0])))
            rewards[t] = bet_reward
            means[t] = instance.mean(action.bet)
            if actions is not None:
                actions.append(action.bet)
    elif session.mode == "full":
        sampler = _RoundSampler(instance, inst_rng)
        mean_cache = {}
        for t in range(horizon):
            action = session.choose()
            feedback, bet_reward = sampler.rewards(action.queries, action.bet)
            session.observe(feedback)
            rewards[t] = bet_reward
            mu = mean_cache.get(action.bet)
            if mu is None:
                mu = instance.mean(action.bet)
                mean_cache[action.bet] = mu
            means[t] = mu
            if actions is not None:
                actions.append(action.bet)
    else:
        raise ValidationError(f"unknown session mode {session.mode!r}")
    return RegretTrace(
        algorithm=config.algorithm.get("name", "unknown"),
        instance=config.instance.get("kind", "unknown"),
        seed=seed, horizon=horizon, mu_star=instance.mu_star,
        rewards=rewards, means=means,
        cum_regret=_regret_from(instance.mu_star, rewards),
        actions=actions, info=dict(session.info))


# ---------------------------------------------------------------------------
# replicates


def _replicate_worker(config_dict, seed):
    return run_match(ExperimentConfig.from_dict(config_dict), seed=seed)


@dataclass
class Aggregate:
    checkpoints: np.ndarray
    mean: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    q10: np.ndarray
    q90: np.ndarray
    n: int

    def checkpoint_series(self):
        return self.checkpoints.astype(float), self.mean


def aggregate_traces(traces):
    if not traces:
        raise ValidationError("no traces to aggregate")
    cps = traces[0].checkpoints()
    rows = np.array([[tr.cum_regret[t - 1] for t in cps] for tr in traces])
    return Aggregate(
        checkpoints=np.array(cps), mean=rows.mean(axis=0),
        lo=rows.min(axis=0), hi=rows.max(axis=0),
        q10=np.quantile(rows, 0.1, axis=0),
        q90=np.quantile(rows, 0.9, axis=0), n=len(traces))


def run_replicates(config, seeds, parallelism=1):
    """One trace per seed plus checkpoint aggregates; results are identical
    for any parallelism degree."""
    seeds = list(seeds)
    if len(set(seeds)) != len(seeds):
        raise ValidationError("replicate seeds must be distinct")
    cd = config.to_dict()
    if parallelism <= 1 or len(seeds) == 1:
        traces = [_replicate_worker(cd, s) for s in seeds]
    else:
        failures = []
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            futures = [(s, pool.submit(_replicate_worker, cd, s))
                       for s in seeds]
            traces = []
            for s, fut in futures:
                try:
                    traces.append(fut.result())
                except Exception as exc:  # noqa: BLE001 - reported below
                    failures.append((s, exc))
        if failures:
            raise BanditLabError(
                f"{len(failures)} replicate(s) failed, first: "
                f"seed {failures[0][0]}: {failures[0][1]}")
    return traces, aggregate_traces(traces)


# ---------------------------------------------------------------------------
# exponent fitting


@dataclass
class ExponentFit:
    slope: float
    intercept: float
    window: tuple
    residual: float
    degenerate: bool = False


def fit_exponent(source, window):
    """Least-squares slope of log regret against log t over the checkpoints
    inside [window[0], window[1]]."""
    if isinstance(source, tuple):
        ts, rs = np.asarray(source[0], float), np.asarray(source[1], float)
    else:
        ts, rs = source.checkpoint_series()
    lo, hi = window
    mask = (ts >= lo) & (ts <= hi)
    ts, rs = ts[mask], rs[mask]
    if len(ts) < 3 or np.any(rs <= 0):
        return ExponentFit(0.0, 0.0, (lo, hi), math.inf, degenerate=True)
    x, y = np.log(ts), np.log(rs)
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return ExponentFit(float(slope), float(intercept), (lo, hi), residual)


# ---------------------------------------------------------------------------
# export


_CSV_COLUMNS = ["t", "cum_regret", "replicate", "algorithm", "instance", "seed"]


def export_csv(traces, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_COLUMNS)
        for rep, tr in enumerate(traces):
            for t in tr.checkpoints():
                writer.writerow([t, repr(tr.cum_regret[t - 1]), rep,
                                 tr.algorithm, tr.instance, tr.seed])


def export_json(traces, path, extra=None):
    payload = {"traces": [tr.to_payload() for tr in traces]}
    if extra:
        payload.update(extra)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)


def import_json(path):
    with open(path) as fh:
        payload = json.load(fh)
    return [RegretTrace.from_payload(d) for d in payload["traces"]]
