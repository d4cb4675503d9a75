"""Experiment orchestration: trial fan-out, bound verification, sweeps, reports.

Every trial is a pure function of ``(config, n, r, trial_index)``; its random
numbers come from the ``SeedSpec(master_seed, trial_index)`` substream, so the
worker count never changes a result. Rows are merged and sorted by
``(n, r, trial_index)`` before the report is assembled.
"""

from __future__ import annotations

import math
import os
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import io as rio
from .bounds import (
    BoundParams,
    bound_report,
    connectivity_threshold,
    diameter_bound,
    reference_prior_diameter,
    upper_applicability_radius,
)
from .concentration import LOWER, UPPER, TailQuery, failure_probability_upper, monte_carlo_tail
from .geometry import StripInfeasible, fit_strip, strip_frame
from .sampler import SeedSpec, sample_uniform
from .spatial_graph import (
    AUTO,
    BOUNDED,
    EXACT,
    EXACT_DIAMETER_CUTOFF,
    build_graph,
    corner_vertices,
    diameter,
    is_connected,
)
from .strip_path import (
    PROOF_CONSTANTS,
    default_delta,
    greedy_strip_path,
    lower_alpha,
    lower_chain_certificate,
)

VERIFY = "verify-bounds"
THRESHOLD = "threshold-sweep"
DIAMETER = "diameter"
STRIP_PATH = "strip-path"
TAILS = "tails"
CERTIFICATE = "certificate"
EXPERIMENTS = (VERIFY, THRESHOLD, DIAMETER, STRIP_PATH, TAILS, CERTIFICATE)

UNREACHABLE = "UNREACHABLE"
JOBS_ENV = "RGGHOPS_JOBS"

# tags for the per-trial random streams (tag 0 is the point sampler)
_PAIR_TAG = 1
_TAIL_TAG_BASE = 100


def default_jobs() -> int:
    raw = os.environ.get(JOBS_ENV)
    if not raw:
        return 1
    try:
        jobs = int(raw)
    except ValueError:
        raise ValueError(f"{JOBS_ENV}={raw!r} is not an integer") from None
    if jobs < 1:
        raise ValueError(f"{JOBS_ENV} must be >= 1")
    return jobs


_TOKEN = re.compile(
    r"^\s*(?:(?P<pre>[0-9.eE+-]+)\s*\*\s*)?(?P<sym>rc|70sqrtlog)(?:\s*\*\s*(?P<post>[0-9.eE+-]+))?\s*$"
)


def resolve_radius(token, n: float) -> float:
    """Turn ``"2.5"``, ``"rc"``, ``"rc*2"``, ``"0.5*rc"`` or ``"70sqrtlog"`` into a length."""
    if isinstance(token, (int, float)):
        value = float(token)
    else:
        text = str(token).strip()
        m = _TOKEN.match(text)
        if m is None:
            try:
                value = float(text)
            except ValueError:
                raise ValueError(f"cannot resolve radius token {token!r}") from None
        else:
            base = connectivity_threshold(n) if m["sym"] == "rc" else upper_applicability_radius(n)
            mult = float(m["pre"] or 1.0) * float(m["post"] or 1.0)
            value = base * mult
    if not (value > 0 and math.isfinite(value)):
        raise ValueError(f"radius token {token!r} resolves to {value}, need a positive length")
    return value


@dataclass
class ExperimentConfig:
    experiment: str
    n_list: list = field(default_factory=lambda: [1000])
    r_list: list = field(default_factory=lambda: ["rc"])
    trials: int = 1
    pairs_per_trial: int = 20
    master_seed: int = 0
    output_path: Optional[str] = None
    format: str = "json"
    # experiment-specific knobs
    corner_pairs: bool = True
    diameter_mode: str = AUTO
    max_bfs: int = 64
    prior_c: float = 1.0
    delta: Optional[float] = None
    tail_N: list = field(default_factory=lambda: [1, 10, 50, 200])
    tail_delta: list = field(default_factory=lambda: [0.1, 0.5, 1.0])
    tail_trials: int = 100_000

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.pairs_per_trial < 0:
            raise ValueError("pairs_per_trial must be >= 0")
        if self.format not in ("csv", "json"):
            raise ValueError(f"format must be csv or json, got {self.format!r}")
        if not self.n_list:
            raise ValueError("n_list is empty")
        for n in self.n_list:
            if int(n) != n or n < 2:
                raise ValueError(f"n must be an integer >= 2, got {n}")
            for tok in self.r_list:
                resolve_radius(tok, n)

    def cells(self) -> list[tuple[int, str, float]]:
        return [(int(n), str(tok), resolve_radius(tok, n)) for n in self.n_list for tok in self.r_list]

    def result_fields(self) -> dict:
        """Everything that can influence a result; output plumbing is left out."""
        d = asdict(self)
        for k in ("output_path", "format"):
            d.pop(k)
        return d


# -- per-trial workers -----------------------------------------------------


def _row_base(cfg: ExperimentConfig, n: int, token: str, r: float, trial: int) -> dict:
    return {
        "experiment": cfg.experiment,
        "n": n,
        "r": r,
        "r_token": token,
        "master_seed": cfg.master_seed,
        "trial_index": trial,
    }


def _random_pairs(rng: np.random.Generator, m: int, count: int) -> list[tuple[int, int]]:
    pairs = []
    while len(pairs) < count and m > 1:
        u, v = (int(x) for x in rng.integers(0, m, size=2))
        if u != v:
            pairs.append((u, v))
    return pairs


def _corner_pairs(g) -> list[tuple[int, int]]:
    present = [c for c in corner_vertices(g) if c is not None]
    present = list(dict.fromkeys(present))
    return [(present[i], present[j]) for i in range(len(present)) for j in range(i + 1, len(present))]


def _verify_trial(cfg: ExperimentConfig, n: int, token: str, r: float, trial: int) -> list[dict]:
    seed = SeedSpec(cfg.master_seed, trial)
    inst = sample_uniform(n, r, seed)
    g = build_graph(inst)
    rng = seed.rng(tag=_PAIR_TAG)
    pairs = [("random", u, v) for u, v in _random_pairs(rng, len(g), cfg.pairs_per_trial)]
    if cfg.corner_pairs:
        pairs += [("corner", u, v) for u, v in _corner_pairs(g)]

    by_source: dict[int, list[int]] = {}
    for _, u, v in pairs:
        by_source.setdefault(u, []).append(v)
    levels, elapsed = {}, {}
    for u, targets in by_source.items():
        t0 = time.perf_counter()
        levels[u] = g.bfs_levels(u, target=targets[0] if len(targets) == 1 else None)
        elapsed[u] = (time.perf_counter() - t0) * 1e3

    rows = []
    for kind, u, v in pairs:
        d_e = float(math.dist(g.points[u], g.points[v]))
        hop = int(levels[u][v])
        d_g = hop if hop >= 0 else None
        rep = bound_report(BoundParams(n, r, d_e), d_g).to_dict()
        floor = math.ceil(d_e / r)
        row = _row_base(cfg, n, token, r, trial)
        row.update(
            pair_kind=kind,
            u=u,
            v=v,
            status="ok" if d_g is not None else UNREACHABLE,
            d_E=d_e,
            d_G=d_g,
            hop_floor=floor,
            deterministic_ok=None if d_g is None else d_g >= floor,
            gamma=rep["gamma"],
            lower=rep["lower"],
            upper=rep["upper"],
            wall_ms=elapsed[u],
        )
        rows.append(row)
    return rows


def _threshold_trial(cfg: ExperimentConfig, n: int, token: str, r: float, trial: int) -> list[dict]:
    # The same substream for every r couples the sweep: the point set is shared,
    # so connectivity is monotone in r within a trial.
    t0 = time.perf_counter()
    inst = sample_uniform(n, r, SeedSpec(cfg.master_seed, trial))
    connected = is_connected(build_graph(inst))
    row = _row_base(cfg, n, token, r, trial)
    row.update(connected=connected, wall_ms=(time.perf_counter() - t0) * 1e3)
    return [row]


def _diameter_trial(cfg: ExperimentConfig, n: int, token: str, r: float, trial: int) -> list[dict]:
    t0 = time.perf_counter()
    inst = sample_uniform(n, r, SeedSpec(cfg.master_seed, trial))
    g = build_graph(inst)
    bound = diameter_bound(n, r)
    prior = reference_prior_diameter(n, r, cfg.prior_c) if n >= 16 else None
    row = _row_base(cfg, n, token, r, trial)
    row.update(
        bound_value=bound.value,
        bound_ceiling=bound.ceiling,
        bound_applicable=bound.applicable,
        prior_reference=prior,
    )
    mode = cfg.diameter_mode
    if mode == AUTO:
        mode = EXACT if len(g) <= EXACT_DIAMETER_CUTOFF else BOUNDED
    if not is_connected(g):
        row.update(status="DISCONNECTED", mode=mode, lower=None, upper=None, bfs_runs=0, within_bound=None)
    else:
        est = diameter(g, mode=mode, max_bfs=cfg.max_bfs)
        row.update(
            status="ok",
            mode=est.mode,
            lower=est.lower,
            upper=est.upper,
            bfs_runs=est.bfs_runs,
            within_bound=(est.upper <= bound.ceiling) if bound.applicable else None,
        )
    row["wall_ms"] = (time.perf_counter() - t0) * 1e3
    return [row]


def _strip_alpha(delta: float, r: float) -> tuple[float, bool]:
    """``B sqrt(delta) r^{1/3}``, capped at ``B sqrt(F) r`` when ``delta`` is past ``F r^{4/3}``."""
    c = PROOF_CONSTANTS
    lo, hi = c.delta_range(r)
    alpha = c.B * math.sqrt(min(delta, hi)) * r ** (1 / 3)
    return alpha, lo <= delta <= hi


def _strip_trial(cfg: ExperimentConfig, n: int, token: str, r: float, trial: int) -> list[dict]:
    seed = SeedSpec(cfg.master_seed, trial)
    g = build_graph(sample_uniform(n, r, seed))
    rng = seed.rng(tag=_PAIR_TAG)
    rows = []
    attempts = 0
    while len(rows) < cfg.pairs_per_trial and attempts < 1000 * max(1, cfg.pairs_per_trial):
        attempts += 1
        u, v = (int(x) for x in rng.integers(0, len(g), size=2))
        t = float(math.dist(g.points[u], g.points[v]))
        if u == v or t <= r:
            continue
        t0 = time.perf_counter()
        delta = cfg.delta if cfg.delta is not None else default_delta(n, r, t)
        alpha, admissible = _strip_alpha(delta, r)
        row = _row_base(cfg, n, token, r, trial)
        row.update(u=u, v=v, t=t, delta=delta, alpha=alpha, delta_admissible=admissible)
        fail_log = failure_probability_upper(t, r, n, delta, enforce_range=False).log_value
        try:
            placement = fit_strip(g.points[u], g.points[v], alpha, n)
        except StripInfeasible:
            row.update(status="infeasible-placement", hops=None, budget_k=None, d_G=None,
                       valid=None, failure_log_bound=fail_log)
            row["wall_ms"] = (time.perf_counter() - t0) * 1e3
            rows.append(row)
            continue
        res = greedy_strip_path(g, placement, delta, u=u, v=v, enforce_range=False)
        lv = g.bfs_levels(u, target=v)
        d_g = int(lv[v]) if lv[v] >= 0 else None
        valid = None
        if res.success:
            pts = g.points[res.path]
            hop_len = np.hypot(*np.diff(pts, axis=0).T) if len(pts) > 1 else np.zeros(0)
            valid = bool(
                res.hops <= res.budget_k
                and np.all(hop_len ** 2 <= g.r2)
                and res.path[0] == u
                and res.path[-1] == v
                and d_g is not None
                and d_g <= res.hops
            )
        row.update(
            status=res.status,
            hops=res.hops,
            budget_k=res.budget_k,
            d_G=d_g,
            valid=valid,
            failure_log_bound=fail_log,
            wall_ms=(time.perf_counter() - t0) * 1e3,
        )
        rows.append(row)
    return rows


def _certificate_trial(cfg: ExperimentConfig, n: int, token: str, r: float, trial: int) -> list[dict]:
    seed = SeedSpec(cfg.master_seed, trial)
    g = build_graph(sample_uniform(n, r, seed))
    rng = seed.rng(tag=_PAIR_TAG)
    rows = []
    for u, v in _random_pairs(rng, len(g), cfg.pairs_per_trial):
        t0 = time.perf_counter()
        t = float(math.dist(g.points[u], g.points[v]))
        lv = g.bfs_levels(u, target=v)
        d_g = int(lv[v]) if lv[v] >= 0 else None
        ks = {max(1, math.ceil(t / r))}
        if d_g is not None:
            ks |= {k for k in (d_g - 1, d_g) if k >= 1}
        for k in sorted(ks):
            alpha = lower_alpha(t, r, k)
            placement = strip_frame(g.points[u], g.points[v], alpha)
            cert = lower_chain_certificate(g, placement, k)
            proves = cert.proves_distance_exceeds_k
            row = _row_base(cfg, n, token, r, trial)
            row.update(
                u=u, v=v, t=t, k=k, alpha=alpha, d_G=d_g,
                precondition=cert.precondition,
                certified=cert.certified,
                proves_exceeds_k=proves,
                sound=not (proves and d_g is not None and d_g <= k),
                wall_ms=(time.perf_counter() - t0) * 1e3,
            )
            rows.append(row)
    return rows


def _tails_trial(cfg: ExperimentConfig, n: int, token: str, r: float, trial: int) -> list[dict]:
    rows = []
    cell = 0
    for N in cfg.tail_N:
        for delta in cfg.tail_delta:
            for side in (UPPER, LOWER):
                if side == LOWER and not delta < 1:
                    continue
                t0 = time.perf_counter()
                q = TailQuery(int(N), float(delta), side=side)
                res = monte_carlo_tail(
                    q, cfg.tail_trials,
                    SeedSpec(cfg.master_seed, _TAIL_TAG_BASE * trial + cell),
                )
                cell += 1
                row = {"experiment": cfg.experiment, "master_seed": cfg.master_seed,
                       "trial_index": trial}
                row.update(res.to_dict())
                row["wall_ms"] = (time.perf_counter() - t0) * 1e3
                rows.append(row)
    return rows


_WORKERS = {
    VERIFY: _verify_trial,
    THRESHOLD: _threshold_trial,
    DIAMETER: _diameter_trial,
    STRIP_PATH: _strip_trial,
    CERTIFICATE: _certificate_trial,
    TAILS: _tails_trial,
}


def _run_task(task):
    cfg, n, token, r, trial = task
    return _WORKERS[cfg.experiment](cfg, n, token, r, trial)


def _run_trials(cfg: ExperimentConfig, jobs: int) -> list[dict]:
    if cfg.experiment == TAILS:
        tasks = [(cfg, 0, "", 0.0, trial) for trial in range(cfg.trials)]
    else:
        tasks = [(cfg, n, tok, r, trial) for n, tok, r in cfg.cells() for trial in range(cfg.trials)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_run_task, tasks))
    else:
        chunks = [_run_task(t) for t in tasks]
    # map() already preserves task order; the stable sort makes the merge rule explicit.
    indexed = sorted(enumerate(chunks), key=lambda it: (tasks[it[0]][1], tasks[it[0]][3], tasks[it[0]][4]))
    return [row for _, chunk in indexed for row in chunk]


# -- summaries -------------------------------------------------------------


def _group(rows, keys=("n", "r")):
    out: dict = {}
    for row in rows:
        out.setdefault(tuple(row[k] for k in keys), []).append(row)
    return out


def _summ_verify(rows):
    cells = []
    for (n, r), grp in _group(rows).items():
        reach = [x for x in grp if x["status"] == "ok"]
        lo = [x for x in reach if x["lower"]["applicable"]]
        hi = [x for x in reach if x["upper"]["applicable"]]
        cells.append({
            "n": n, "r": r, "r_token": grp[0]["r_token"],
            "pairs": len(grp),
            "unreachable": len(grp) - len(reach),
            "deterministic_violations": sum(not x["deterministic_ok"] for x in reach),
            "lower_applicable": len(lo),
            "lower_violations": sum(not x["lower"]["satisfied"] for x in lo),
            "lower_violation_rate": (sum(not x["lower"]["satisfied"] for x in lo) / len(lo)) if lo else None,
            "upper_applicable": len(hi),
            "upper_violations": sum(not x["upper"]["satisfied"] for x in hi),
            "upper_violation_rate": (sum(not x["upper"]["satisfied"] for x in hi) / len(hi)) if hi else None,
        })
    failures = sum(c["deterministic_violations"] + c["lower_violations"] + c["upper_violations"] for c in cells)
    return {"cells": cells, "failures": failures}


def _summ_threshold(rows):
    cells = []
    for n, grp in _group(rows, ("n",)).items():
        sweep = []
        for (r,), sub in sorted(_group(grp, ("r",)).items()):
            freq = sum(x["connected"] for x in sub) / len(sub)
            sweep.append({"r": r, "r_token": sub[0]["r_token"], "trials": len(sub), "connected_frequency": freq})
        violations = []
        for a, b in zip(sweep, sweep[1:]):
            p = (a["connected_frequency"] + b["connected_frequency"]) / 2
            tol = 3 * math.sqrt(p * (1 - p) * (1 / a["trials"] + 1 / b["trials"]))
            if a["connected_frequency"] - b["connected_frequency"] > tol:
                violations.append([a["r"], b["r"]])
        cells.append({"n": n[0], "sweep": sweep, "monotone": not violations, "monotone_violations": violations})
    failures = sum(len(c["monotone_violations"]) for c in cells)
    return {"cells": cells, "failures": failures}


def _summ_diameter(rows):
    cells = []
    for (n, r), grp in _group(rows).items():
        ok = [x for x in grp if x["status"] == "ok"]
        app = [x for x in ok if x["within_bound"] is not None]
        cells.append({
            "n": n, "r": r, "r_token": grp[0]["r_token"],
            "trials": len(grp),
            "disconnected": len(grp) - len(ok),
            "bound_ceiling": grp[0]["bound_ceiling"],
            "bound_applicable": grp[0]["bound_applicable"],
            "max_upper": max((x["upper"] for x in ok), default=None),
            "violations": sum(not x["within_bound"] for x in app),
        })
    return {"cells": cells, "failures": sum(c["violations"] for c in cells)}


def _summ_strip(rows):
    cells = []
    for (n, r), grp in _group(rows).items():
        succ = [x for x in grp if x["status"] == "success"]
        logs = [x["failure_log_bound"] for x in grp]
        cells.append({
            "n": n, "r": r, "r_token": grp[0]["r_token"],
            "pairs": len(grp),
            "successes": len(succ),
            "success_frequency": len(succ) / len(grp) if grp else None,
            "invalid_successes": sum(not x["valid"] for x in succ),
            "infeasible_placements": sum(x["status"] == "infeasible-placement" for x in grp),
            "failure_bound_max": math.exp(max(logs)) if logs else None,
        })
    return {"cells": cells, "failures": sum(c["invalid_successes"] for c in cells)}


def _summ_certificate(rows):
    bad = sum(not x["sound"] for x in rows)
    return {
        "rows": len(rows),
        "certified_with_precondition": sum(x["proves_exceeds_k"] for x in rows),
        "counterexamples": bad,
        "failures": bad,
    }


def _summ_tails(rows):
    bad = sum(not x["passed"] for x in rows)
    return {"cells": len(rows), "failed_cells": bad, "failures": bad}


_SUMMARIES = {
    VERIFY: _summ_verify,
    THRESHOLD: _summ_threshold,
    DIAMETER: _summ_diameter,
    STRIP_PATH: _summ_strip,
    CERTIFICATE: _summ_certificate,
    TAILS: _summ_tails,
}

# Fixed CSV headers, one per experiment type.
CSV_HEADERS = {
    VERIFY: [
        "experiment", "n", "r", "r_token", "master_seed", "trial_index", "pair_kind", "u", "v",
        "status", "d_E", "d_G", "hop_floor", "deterministic_ok",
        "gamma.term_log", "gamma.term_poly", "gamma.term_const",
        "lower.applicable", "lower.value", "lower.satisfied",
        "upper.applicable", "upper.value", "upper.satisfied", "wall_ms",
    ],
    THRESHOLD: ["experiment", "n", "r", "r_token", "master_seed", "trial_index", "connected", "wall_ms"],
    DIAMETER: [
        "experiment", "n", "r", "r_token", "master_seed", "trial_index", "status", "mode",
        "lower", "upper", "bfs_runs", "bound_value", "bound_ceiling", "bound_applicable",
        "prior_reference", "within_bound", "wall_ms",
    ],
    STRIP_PATH: [
        "experiment", "n", "r", "r_token", "master_seed", "trial_index", "u", "v", "t",
        "delta", "alpha", "delta_admissible", "status", "hops", "budget_k", "d_G", "valid",
        "failure_log_bound", "wall_ms",
    ],
    CERTIFICATE: [
        "experiment", "n", "r", "r_token", "master_seed", "trial_index", "u", "v", "t", "k",
        "alpha", "d_G", "precondition", "certified", "proves_exceeds_k", "sound", "wall_ms",
    ],
    TAILS: [
        "experiment", "master_seed", "trial_index", "N", "delta", "rate", "side",
        "analytic_bound", "empirical", "trials", "ci_radius", "passed", "wall_ms",
    ],
}


def run_experiment(cfg: ExperimentConfig, jobs: Optional[int] = None) -> dict:
    """Run every trial of ``cfg`` and return the report dict (written to disk if
    ``cfg.output_path`` is set)."""
    jobs = default_jobs() if jobs is None else int(jobs)
    if jobs < 1:
        raise ValueError("jobs must be >= 1")
    rows = _run_trials(cfg, jobs)
    summary = _SUMMARIES[cfg.experiment](rows)
    config = cfg.result_fields()
    report = {
        "experiment": cfg.experiment,
        "config": config,
        "rows": rows,
        "summary": summary,
        "canonical_sha256": rio.canonical_hash(config, rows, summary),
    }
    if cfg.output_path:
        rio.write_report(report, cfg.output_path, cfg.format, CSV_HEADERS[cfg.experiment])
    return report


def verify_bounds(cfg: ExperimentConfig, jobs: Optional[int] = None) -> dict:
    return run_experiment(_as(cfg, VERIFY), jobs)


def threshold_sweep(cfg: ExperimentConfig, jobs: Optional[int] = None) -> dict:
    return run_experiment(_as(cfg, THRESHOLD), jobs)


def diameter_experiment(cfg: ExperimentConfig, jobs: Optional[int] = None) -> dict:
    return run_experiment(_as(cfg, DIAMETER), jobs)


def _as(cfg: ExperimentConfig, kind: str) -> ExperimentConfig:
    if cfg.experiment != kind:
        raise ValueError(f"config is for {cfg.experiment!r}, expected {kind!r}")
    return cfg
