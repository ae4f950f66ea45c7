"""Command line front end: ``compare``, ``trajectory``, ``verify`` and ``threshold``.

Exit codes: 0 success, 1 verification (or I/O) failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from . import bipartite, multipartite, oracle
from .errors import BelowThresholdError, CapExceededError, OracleCapError, UnreachableTargetError
from .states import max_delta, q_from_delta

CSV_HEADER = ["n", "delta", "epsilon", "k_bi", "cost_bi", "k_multi", "cost_multi", "log2_ratio", "status"]
N_SWEEP_RANGE = (3, 20)
N_SWEEP_DELTA = 0.2
DELTA_SWEEP_N = 10
DELTA_SWEEP_RANGE = (0.01, 0.9, 30)
DEFAULT_SEED = 20110512


class UsageError(Exception):
    pass


@dataclass
class ComparisonRecord:
    n: int
    delta: float
    epsilon: float
    k_bipartite: Optional[int] = None
    cost_bipartite: Optional[float] = None
    k_multipartite: Optional[int] = None
    cost_multipartite: Optional[float] = None
    log2_ratio: Optional[float] = None
    status: str = "ok"

    def row(self) -> List[str]:
        return [
            str(self.n),
            _fmt(self.delta),
            _fmt(self.epsilon),
            _fmt(self.k_bipartite),
            _fmt(self.cost_bipartite),
            _fmt(self.k_multipartite),
            _fmt(self.cost_multipartite),
            _fmt(self.log2_ratio),
            self.status,
        ]

    def as_json(self) -> dict:
        return dict(zip(CSV_HEADER, [self.n, self.delta, self.epsilon, self.k_bipartite, self.cost_bipartite,
                                     self.k_multipartite, self.cost_multipartite, self.log2_ratio, self.status]))


@dataclass
class RunConfig:
    subcommand: str
    epsilon: float = 0.01
    cost_model: str = "paper"
    recurrence: str = "exact"
    out: Optional[str] = None
    fmt: str = "csv"
    seed: int = DEFAULT_SEED
    oracle_cap: int = oracle.DEFAULT_CAP
    tol: float = 1e-10
    n_values: List[int] = field(default_factory=list)
    delta_values: List[float] = field(default_factory=list)
    protocol: str = "multipartite"
    q0: float = 0.8
    k: int = 5
    samples: int = 100


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


# ---------------------------------------------------------------------------
# compare


def compare_point(n: int, delta: float, epsilon: float, cost_model: str = "paper",
                  recurrence: str = "exact") -> ComparisonRecord:
    rec = ComparisonRecord(n=n, delta=delta, epsilon=epsilon)
    q0 = q_from_delta(n, delta)
    status = []
    try:
        bp = bipartite.plan_bipartite(n, q0, epsilon)
        rec.k_bipartite, rec.cost_bipartite = bp.k, bp.expected_cost
    except UnreachableTargetError:
        status.append("bipartite_unreachable")
    except CapExceededError:
        status.append("bipartite_cap_exceeded")
    try:
        mp = multipartite.plan_multipartite(n, q0, epsilon, recurrence=recurrence)
        rec.k_multipartite = mp.k
        rec.cost_multipartite = mp.cost_paper if cost_model == "paper" else mp.cost_expected
    except BelowThresholdError:
        status.append("multipartite_below_threshold")
    except UnreachableTargetError:
        status.append("multipartite_unreachable")
    except CapExceededError:
        status.append("multipartite_cap_exceeded")
    if rec.cost_bipartite is not None and rec.cost_multipartite is not None:
        ratio = math.log2(rec.cost_bipartite / rec.cost_multipartite)
        if math.isfinite(ratio):
            rec.log2_ratio = ratio
        else:
            status.append("overflow")
    rec.status = ";".join(status) if status else "ok"
    return rec


def run_compare(config: RunConfig) -> List[ComparisonRecord]:
    """One record per sweep point, in sweep order."""
    records = []
    for n in config.n_values:
        for d in config.delta_values:
            records.append(compare_point(n, d, config.epsilon, config.cost_model, config.recurrence))
    return records


def render_records(records: Sequence[ComparisonRecord], fmt: str) -> str:
    if fmt == "json":
        return json.dumps([r.as_json() for r in records], indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow(r.row())
    return buf.getvalue()


# ---------------------------------------------------------------------------
# trajectory / threshold


def run_trajectory(config: RunConfig) -> List[dict]:
    n, q0, k = config.n_values[0], config.q0, config.k
    rows = []
    if config.protocol == "bipartite":
        q, cost = q0, float(n - 1)
        for i in range(k + 1):
            row = {"round": i, "q": q, "delta_pair": 1.0 - q,
                   "fidelity": bipartite.teleport_fidelity(q, n), "expected_cost": cost}
            rows.append(row)
            if i < k:
                step = bipartite.bbpssw_step(q)
                row["p_success"] = step.p_success
                cost *= step.cost_factor
                q = step.q_next
        return rows
    traj = multipartite.run_rounds(n, q0, k, config.recurrence)
    expected = 1.0
    for i, st in enumerate(traj.states):
        if i:
            expected *= 2.0 / traj.success_probs[i - 1]
        rows.append({"round": i, "q": st.q, "r": st.r, "s": st.s, "trace": st.trace,
                     "fidelity": traj.fidelities[i],
                     "p_success": traj.success_probs[i - 1] if i else None,
                     "cost_paper": 1.0 / st.trace, "cost_expected": expected})
    return rows


def run_threshold(config: RunConfig) -> List[dict]:
    rows = []
    for n in config.n_values:
        closed, numeric = multipartite.distillability_threshold(n, tol=min(config.tol, 1e-12))
        rows.append({"n": n, "closed_form": closed, "numeric": numeric,
                     "abs_diff": abs(closed - numeric), "tolerated_noise": 1.0 - closed})
    return rows


def render_table(rows: List[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    keys: List[str] = []
    for r in rows:
        keys += [k for k in r if k not in keys]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(keys)
    for r in rows:
        w.writerow([_fmt(r.get(k)) for k in keys])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# verify


def run_verify(config: RunConfig, stream=None) -> int:
    """Run the oracle suite; return 0 if every check passes, else 1."""
    stream = stream or sys.stdout
    report = oracle.VerificationReport()
    for n in config.n_values:
        report.extend(oracle.verify_lambda_identities(
            n, config.tol, samples=config.samples, seed=config.seed,
            cap=config.oracle_cap, recurrence=config.recurrence))
    prep_n = [n for n in config.n_values if n >= 3]
    report.extend(oracle.verify_bipartite(config.tol, n_values=prep_n, cap=config.oracle_cap))
    for c in report.checks:
        stream.write(f"{'PASS' if c.passed else 'FAIL'}  {c.max_error:.3e} <= {c.tol:.1e}  {c.name}\n")
    bad = report.failures()
    stream.write(f"{len(report.checks) - len(bad)}/{len(report.checks)} checks passed\n")
    return 0 if not bad else 1


# ---------------------------------------------------------------------------
# argument handling


def _positive_float(s: str) -> float:
    v = float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {s}")
    return v


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--epsilon", type=float, default=0.01, help="target in-fidelity")
    shared.add_argument("--out", help="output path (default: stdout)")
    shared.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    shared.add_argument("--cost-model", choices=("paper", "expected"), default="paper",
                        help="multipartite cost: 1/(q+r+s) or 2^k/prod(P_i)")
    shared.add_argument("--recurrence", choices=multipartite.RECURRENCES, default="exact",
                        help="multipartite s-weight update")
    shared.add_argument("--seed", type=int, default=DEFAULT_SEED)
    shared.add_argument("--oracle-cap", type=int, default=oracle.DEFAULT_CAP, help="dense-simulation qubit cap")
    shared.add_argument("--tol", type=_positive_float, default=1e-10)

    p = argparse.ArgumentParser(prog="ghzpurify", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="subcommand", required=True)

    c = sub.add_parser("compare", parents=[shared], help="bipartite vs multipartite cost sweep")
    c.add_argument("--delta", type=float, help="fixed input in-fidelity (sweep over n)")
    c.add_argument("--n-min", type=int)
    c.add_argument("--n-max", type=int)
    c.add_argument("--n", type=int, help="fixed party count (sweep over delta)")
    c.add_argument("--delta-min", type=float)
    c.add_argument("--delta-max", type=float)
    c.add_argument("--delta-points", type=int)

    t = sub.add_parser("trajectory", parents=[shared], help="round-by-round state dump")
    t.add_argument("--protocol", choices=("bipartite", "multipartite"), default="multipartite")
    t.add_argument("--n", type=int, required=True)
    t.add_argument("--q0", type=float, required=True)
    t.add_argument("--k", type=int, default=5)

    v = sub.add_parser("verify", parents=[shared], help="dense-matrix oracle suite")
    v.add_argument("--n", type=int, nargs="+", action="extend", help="party counts (default: 2 3 4 5)")
    v.add_argument("--samples", type=int, default=100)

    h = sub.add_parser("threshold", parents=[shared], help="distillability threshold table")
    h.add_argument("--n-min", type=int, default=3)
    h.add_argument("--n-max", type=int, default=12)
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(subcommand=ns.subcommand, epsilon=ns.epsilon, cost_model=ns.cost_model,
                    recurrence=ns.recurrence, out=ns.out, fmt=ns.fmt, seed=ns.seed,
                    oracle_cap=ns.oracle_cap, tol=ns.tol)
    if not 0.0 < cfg.epsilon < 1.0:
        raise UsageError("--epsilon must lie in (0, 1)")

    if ns.subcommand == "compare":
        by_n = any(x is not None for x in (ns.delta, ns.n_min, ns.n_max))
        by_delta = any(x is not None for x in (ns.n, ns.delta_min, ns.delta_max, ns.delta_points))
        if by_n and by_delta:
            raise UsageError("use either --delta/--n-min/--n-max or --n/--delta-min/--delta-max/--delta-points")
        if by_delta:
            n = DELTA_SWEEP_N if ns.n is None else ns.n
            lo = DELTA_SWEEP_RANGE[0] if ns.delta_min is None else ns.delta_min
            hi = DELTA_SWEEP_RANGE[1] if ns.delta_max is None else ns.delta_max
            pts = DELTA_SWEEP_RANGE[2] if ns.delta_points is None else ns.delta_points
            if not (0.0 < lo <= hi) or pts < 1 or (pts > 1 and lo == hi):
                raise UsageError("need 0 < --delta-min < --delta-max and --delta-points >= 1")
            cfg.n_values = [n]
            cfg.delta_values = [float(d) for d in np.geomspace(lo, hi, pts)] if pts > 1 else [lo]
        else:
            lo = N_SWEEP_RANGE[0] if ns.n_min is None else ns.n_min
            hi = N_SWEEP_RANGE[1] if ns.n_max is None else ns.n_max
            if lo > hi:
                raise UsageError("--n-min must not exceed --n-max")
            cfg.n_values = list(range(lo, hi + 1))
            cfg.delta_values = [N_SWEEP_DELTA if ns.delta is None else ns.delta]
        if min(cfg.n_values) < 2:
            raise UsageError("party counts start at 2")
        for n in cfg.n_values:
            if any(not 0.0 <= d <= max_delta(n) for d in cfg.delta_values):
                raise UsageError(f"delta must lie in [0, 1 - 2^-n] (n={n})")
    elif ns.subcommand == "trajectory":
        if ns.n < 2 or not 0.0 <= ns.q0 <= 1.0 or ns.k < 0:
            raise UsageError("need --n >= 2, --q0 in [0, 1], --k >= 0")
        cfg.protocol, cfg.n_values, cfg.q0, cfg.k = ns.protocol, [ns.n], ns.q0, ns.k
    elif ns.subcommand == "verify":
        if ns.n is None:
            ns.n = [2, 3, 4, 5]
        if min(ns.n) < 2:
            raise UsageError("party counts start at 2")
        too_big = [n for n in ns.n if 2 * n > cfg.oracle_cap]
        if too_big:
            raise UsageError(f"n={too_big} needs {2 * max(too_big)} qubits; raise --oracle-cap to allow it")
        cfg.n_values, cfg.samples = list(ns.n), ns.samples
    elif ns.subcommand == "threshold":
        if ns.n_min < 2 or ns.n_min > ns.n_max:
            raise UsageError("need 2 <= --n-min <= --n-max")
        cfg.n_values = list(range(ns.n_min, ns.n_max + 1))
    return cfg


def _emit(text: str, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", newline="") as fh:
        fh.write(text)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = config_from_args(ns)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"ghzpurify: error: {exc}\n")
        return 2

    try:
        if cfg.subcommand == "compare":
            _emit(render_records(run_compare(cfg), cfg.fmt), cfg.out)
        elif cfg.subcommand == "trajectory":
            _emit(render_table(run_trajectory(cfg), cfg.fmt), cfg.out)
        elif cfg.subcommand == "threshold":
            _emit(render_table(run_threshold(cfg), cfg.fmt), cfg.out)
        else:
            buf = io.StringIO()
            code = run_verify(cfg, buf)
            _emit(buf.getvalue(), cfg.out)
            return code
    except OracleCapError as exc:
        sys.stderr.write(f"ghzpurify: error: {exc}\n")
        return 2
    except OSError as exc:
        sys.stderr.write(f"ghzpurify: I/O error: {exc}\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
