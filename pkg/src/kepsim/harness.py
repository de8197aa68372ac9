"""Experiment orchestration: replications, metrics, table-shaped reports, sweeps.

A replication is one seeded market history: per period, arrivals join the
pool, the exchange graph is rebuilt, every feasible cycle and chain is
enumerated and scored, the packing is solved exactly, matched nodes leave,
and the queue is snapshotted.  Experiments average replications; sweeps rerun
the same replication seeds for each value of one axis (common random
numbers), so only the decision layer differs between rows.
"""

from __future__ import annotations

import dataclasses
import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .compat import CompatibilityCache, build_graph
from .enumeration import (
    EnumerationBudgetExceeded,
    EnumerationLimits,
    enumerate_candidates,
)
from .fairness import WelfareScores, ZeroQueueWarning, welfare_scores
from .model import CHAIN, PairType
from .pool import PoolConfig, WaitingPool
from .solver import DEFAULT_TIMEOUT, PackingInstance, SolverTimeout, solve
from .weights import (
    KPD,
    LEARNED,
    MYOPIC,
    Scheme,
    load_weight_table,
)

PATH_BUCKETS = ((1, 5), (6, 10), (11, 15), (16, 20))


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one experiment byte for byte."""

    scheme: str = MYOPIC  # myopic | kpd | learned
    weights_file: str | None = None  # required when scheme == learned
    ndad_penalty: float = 0.0  # W
    max_cycle: int = 5  # C
    max_chain: int = 5  # P
    pool: PoolConfig = PoolConfig()
    replications: int = 50
    base_seed: int = 0
    solver_timeout: float = DEFAULT_TIMEOUT
    candidate_budget: int = 5_000_000
    workers: int = 1
    baseline_welfare: tuple[float, float, float] | None = None

    def __post_init__(self) -> None:
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if self.scheme not in (MYOPIC, KPD, LEARNED):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.scheme == LEARNED and not self.weights_file:
            raise ValueError("a learned scheme needs --weights-file")

    def limits(self) -> EnumerationLimits:
        return EnumerationLimits(
            max_cycle=self.max_cycle,
            max_chain=self.max_chain,
            candidate_budget=self.candidate_budget,
        )

    def make_scheme(self) -> Scheme:
        if self.scheme == MYOPIC:
            return Scheme.myopic(self.ndad_penalty)
        if self.scheme == KPD:
            return Scheme.kpd(self.ndad_penalty)
        table = load_weight_table(self.weights_file)
        return Scheme.learned(table, self.ndad_penalty)


@dataclass(frozen=True)
class ReplicationRow:
    """Serializable metrics of one replication."""

    replication: int
    pairs_arrived: int
    ndads_arrived: int
    participants: int
    matches: int
    pct_match: float
    wait_recipients_months: float
    wait_all_months: float
    ndads_used: int
    altruist_pct_usage: float
    n_paths: int
    paths_by_bucket: tuple[int, int, int, int]
    cycles_by_length: dict[int, int]
    patients_in_paths: int
    pct_path_matches: float
    queue_by_band: tuple[int, int, int, int, int]
    queue_ndads: int
    welfare: tuple[float, float, float]
    warnings: tuple[str, ...] = ()


@dataclass
class ReplicationResult:
    """Rich single-run outcome; the row plus data the report does not carry."""

    row: ReplicationRow
    type_proportions: dict[PairType, float]
    type_history: list[dict[PairType, float]] | None = None


@dataclass(frozen=True)
class Aggregate:
    """Means over the completed replications."""

    replications: int
    pairs_arrived: float
    ndads_arrived: float
    participants: float
    matches: float
    pct_match: float
    wait_recipients_months: float
    wait_all_months: float
    ndads_used: float
    altruist_pct_usage: float
    n_paths: float
    paths_by_bucket: tuple[float, float, float, float]
    cycles_by_length: dict[int, float]
    patients_in_paths: float
    pct_path_matches: float
    queue_by_band: tuple[float, float, float, float, float]
    queue_ndads: float
    welfare_mean_of_scores: tuple[float, float, float]
    welfare_of_mean_queue: tuple[float, float, float]
    fairness_measures: tuple[float, float, float] | None


@dataclass(frozen=True)
class RunReport:
    """Per-replication metrics plus their aggregate for one experiment."""

    config: dict
    rows: tuple[ReplicationRow, ...]
    aggregate: Aggregate | None
    incomplete: bool = False
    failures: tuple[str, ...] = ()


def simulate_replication(
    scheme: Scheme,
    pool_cfg: PoolConfig,
    limits: EnumerationLimits,
    seed: int | np.random.SeedSequence,
    replication: int = 0,
    solver_timeout: float | None = DEFAULT_TIMEOUT,
    track_type_history: bool = False,
) -> ReplicationResult:
    """One full seeded market history under one weighting scheme.

    Arrival draws and crossmatch draws come from two independent child
    streams of the seed, so arrival histories are identical across schemes
    and penalties for the same seed.
    """
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    arrivals_ss, crossmatch_ss = ss.spawn(2)
    arrivals_rng = np.random.default_rng(arrivals_ss)
    crossmatch_rng = np.random.default_rng(crossmatch_ss)

    pool = WaitingPool()
    cache = CompatibilityCache()

    matches = 0
    ndads_used = 0
    n_paths = 0
    patients_in_paths = 0
    paths_by_bucket = [0, 0, 0, 0]
    cycles_by_length = {k: 0 for k in range(2, limits.max_cycle + 1)}
    history: list[dict[PairType, float]] = []

    for period in range(pool_cfg.periods):
        pool.arrivals(pool_cfg, period, arrivals_rng)
        graph = build_graph(pool, cache, crossmatch_rng)
        candidates = enumerate_candidates(graph, limits, scheme)
        inst = PackingInstance.from_graph(graph, candidates)
        sel = solve(inst, timeout=solver_timeout)
        for cand in sel.candidates:
            matches += cand.n_patients
            if cand.kind == CHAIN:
                ndads_used += 1
                n_paths += 1
                patients_in_paths += cand.n_patients
                bucket = min((cand.n_patients - 1) // 5, 3)
                paths_by_bucket[bucket] += 1
            else:
                cycles_by_length[len(cand.node_ids)] += 1
        pool.remove_matched(sel, period)
        if track_type_history:
            history.append(pool.type_proportions())

    horizon = pool_cfg.periods
    ledger = pool.ledger
    recipient_waits = [ledger.wait_months(nid, horizon) for nid in ledger.matched]
    all_waits = [ledger.wait_months(nid, horizon) for nid in ledger.arrival]
    comp = pool.queue_composition()

    caught: list[str] = []
    with warnings.catch_warnings(record=True) as wlist:
        warnings.simplefilter("always", ZeroQueueWarning)
        welfare = welfare_scores(comp.by_band)
    caught.extend(str(w.message) for w in wlist if issubclass(w.category, ZeroQueueWarning))

    pairs_arrived = pool.pairs_arrived
    ndads_arrived = pool.ndads_arrived
    row = ReplicationRow(
        replication=replication,
        pairs_arrived=pairs_arrived,
        ndads_arrived=ndads_arrived,
        participants=pairs_arrived + ndads_arrived,
        matches=matches,
        pct_match=100.0 * matches / pairs_arrived if pairs_arrived else 0.0,
        wait_recipients_months=float(np.mean(recipient_waits)) if recipient_waits else 0.0,
        wait_all_months=float(np.mean(all_waits)) if all_waits else 0.0,
        ndads_used=ndads_used,
        altruist_pct_usage=100.0 * ndads_used / ndads_arrived if ndads_arrived else 0.0,
        n_paths=n_paths,
        paths_by_bucket=tuple(paths_by_bucket),
        cycles_by_length=cycles_by_length,
        patients_in_paths=patients_in_paths,
        pct_path_matches=100.0 * patients_in_paths / matches if matches else 0.0,
        queue_by_band=comp.by_band,
        queue_ndads=comp.n_ndads,
        welfare=welfare.as_tuple(),
        warnings=tuple(caught),
    )
    return ReplicationResult(
        row=row,
        type_proportions=pool.type_proportions(),
        type_history=history if track_type_history else None,
    )


def _run_one(args: tuple) -> tuple[str, ReplicationRow | str]:
    """Worker wrapper: returns ("ok", row) or ("err", message)."""
    scheme, pool_cfg, limits, ss, r, timeout = args
    try:
        res = simulate_replication(
            scheme, pool_cfg, limits, ss, replication=r, solver_timeout=timeout
        )
        return ("ok", res.row)
    except (SolverTimeout, EnumerationBudgetExceeded) as exc:
        return ("err", f"replication {r}: {exc}")


def _aggregate(rows: Sequence[ReplicationRow], baseline) -> Aggregate:
    n = len(rows)

    def mean(get) -> float:
        return math.fsum(get(r) for r in rows) / n

    def mean_vec(get, length) -> tuple[float, ...]:
        return tuple(math.fsum(get(r)[i] for r in rows) / n for i in range(length))

    cycle_keys = sorted({k for r in rows for k in r.cycles_by_length})
    cycles = {
        k: math.fsum(r.cycles_by_length.get(k, 0) for r in rows) / n for k in cycle_keys
    }
    mean_queue = mean_vec(lambda r: r.queue_by_band, 5)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ZeroQueueWarning)
        of_mean = welfare_scores(mean_queue)
    measures = None
    if baseline is not None:
        base = WelfareScores(*baseline)
        measures = of_mean.scaled_by(base).as_tuple()
    return Aggregate(
        replications=n,
        pairs_arrived=mean(lambda r: r.pairs_arrived),
        ndads_arrived=mean(lambda r: r.ndads_arrived),
        participants=mean(lambda r: r.participants),
        matches=mean(lambda r: r.matches),
        pct_match=mean(lambda r: r.pct_match),
        wait_recipients_months=mean(lambda r: r.wait_recipients_months),
        wait_all_months=mean(lambda r: r.wait_all_months),
        ndads_used=mean(lambda r: r.ndads_used),
        altruist_pct_usage=mean(lambda r: r.altruist_pct_usage),
        n_paths=mean(lambda r: r.n_paths),
        paths_by_bucket=mean_vec(lambda r: r.paths_by_bucket, 4),
        cycles_by_length=cycles,
        patients_in_paths=mean(lambda r: r.patients_in_paths),
        pct_path_matches=mean(lambda r: r.pct_path_matches),
        queue_by_band=mean_queue,
        queue_ndads=mean(lambda r: r.queue_ndads),
        welfare_mean_of_scores=mean_vec(lambda r: r.welfare, 3),
        welfare_of_mean_queue=of_mean.as_tuple(),
        fairness_measures=measures,
    )


def run_experiment(cfg: ExperimentConfig) -> RunReport:
    """Run every replication of one configuration and aggregate the metrics."""
    scheme = cfg.make_scheme()
    limits = cfg.limits()
    root = np.random.SeedSequence(cfg.base_seed)
    children = root.spawn(cfg.replications)
    jobs = [
        (scheme, cfg.pool, limits, children[r], r, cfg.solver_timeout)
        for r in range(cfg.replications)
    ]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool_exec:
            results = list(pool_exec.map(_run_one, jobs))
    else:
        results = [_run_one(job) for job in jobs]
    rows = [payload for status, payload in results if status == "ok"]
    failures = [payload for status, payload in results if status == "err"]
    aggregate = _aggregate(rows, cfg.baseline_welfare) if rows else None
    return RunReport(
        config=config_to_dict(cfg),
        rows=tuple(rows),
        aggregate=aggregate,
        incomplete=bool(failures),
        failures=tuple(failures),
    )


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

SWEEP_AXES = ("W", "C", "P", "ndad_rate")


@dataclass(frozen=True)
class SweepResult:
    axis: str
    values: tuple[float, ...]
    reports: tuple[RunReport, ...]
    # Finite differences between consecutive rows; only meaningful for the
    # altruist arrival-rate axis, None-padded at the first row.
    marginal_matches_per_altruist: tuple[float | None, ...] = ()
    donors_per_altruist: tuple[float | None, ...] = ()


def _with_axis_value(cfg: ExperimentConfig, axis: str, value: float) -> ExperimentConfig:
    if axis == "W":
        return replace(cfg, ndad_penalty=value)
    if axis == "C":
        return replace(cfg, max_cycle=int(value))
    if axis == "P":
        return replace(cfg, max_chain=int(value))
    if axis == "ndad_rate":
        return replace(cfg, pool=replace(cfg.pool, ndad_rate=value))
    raise ValueError(f"unknown sweep axis {axis!r}; pick one of {SWEEP_AXES}")


def sweep(cfg: ExperimentConfig, axis: str, values: Sequence[float]) -> SweepResult:
    """One report per axis value, all sharing the same replication seeds."""
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; pick one of {SWEEP_AXES}")
    if not values:
        raise ValueError("sweep needs at least one value")
    if list(values) != sorted(values):
        raise ValueError("sweep values must be sorted ascending")
    reports = tuple(run_experiment(_with_axis_value(cfg, axis, v)) for v in values)
    marginal: list[float | None] = []
    donors: list[float | None] = []
    if axis == "ndad_rate":
        prev = None
        for rep in reports:
            agg = rep.aggregate
            if agg is None:
                marginal.append(None)
                donors.append(None)
                prev = None
                continue
            if prev is not None and agg.ndads_arrived != prev.ndads_arrived:
                marginal.append(
                    (agg.matches - prev.matches)
                    / (agg.ndads_arrived - prev.ndads_arrived)
                )
            else:
                marginal.append(None)
            donors.append(
                agg.n_paths / agg.ndads_arrived if agg.ndads_arrived else None
            )
            prev = agg
    return SweepResult(
        axis=axis,
        values=tuple(float(v) for v in values),
        reports=reports,
        marginal_matches_per_altruist=tuple(marginal),
        donors_per_altruist=tuple(donors),
    )


def instance_at_period(
    scheme: Scheme,
    pool_cfg: PoolConfig,
    limits: EnumerationLimits,
    seed: int,
    period: int,
    solver_timeout: float | None = DEFAULT_TIMEOUT,
) -> PackingInstance:
    """The packing instance a run would solve at ``period`` (earlier rounds played out)."""
    if not 0 <= period < pool_cfg.periods:
        raise ValueError(f"period must be in [0, {pool_cfg.periods})")
    ss = np.random.SeedSequence(seed)
    arrivals_ss, crossmatch_ss = ss.spawn(2)
    arrivals_rng = np.random.default_rng(arrivals_ss)
    crossmatch_rng = np.random.default_rng(crossmatch_ss)
    pool = WaitingPool()
    cache = CompatibilityCache()
    for t in range(period + 1):
        pool.arrivals(pool_cfg, t, arrivals_rng)
        graph = build_graph(pool, cache, crossmatch_rng)
        candidates = enumerate_candidates(graph, limits, scheme)
        inst = PackingInstance.from_graph(graph, candidates)
        if t == period:
            return inst
        sel = solve(inst, timeout=solver_timeout)
        pool.remove_matched(sel, t)
    raise AssertionError("unreachable")


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def config_to_dict(cfg: ExperimentConfig) -> dict:
    d = dataclasses.asdict(cfg)
    d["pool"] = dataclasses.asdict(cfg.pool)
    # Normalize tuples to lists so the echo compares equal after a json trip.
    return json.loads(json.dumps(d))


def report_to_dict(report: RunReport) -> dict:
    d = {
        "config": report.config,
        "rows": [dataclasses.asdict(r) for r in report.rows],
        "aggregate": dataclasses.asdict(report.aggregate) if report.aggregate else None,
        "incomplete": report.incomplete,
        "failures": list(report.failures),
    }
    for row in d["rows"]:
        row["cycles_by_length"] = {str(k): v for k, v in row["cycles_by_length"].items()}
    if d["aggregate"]:
        d["aggregate"]["cycles_by_length"] = {
            str(k): v for k, v in d["aggregate"]["cycles_by_length"].items()
        }
    return d


def report_to_json(report: RunReport) -> str:
    return json.dumps(report_to_dict(report), indent=2) + "\n"


def _row_from_dict(d: dict) -> ReplicationRow:
    return ReplicationRow(
        replication=d["replication"],
        pairs_arrived=d["pairs_arrived"],
        ndads_arrived=d["ndads_arrived"],
        participants=d["participants"],
        matches=d["matches"],
        pct_match=d["pct_match"],
        wait_recipients_months=d["wait_recipients_months"],
        wait_all_months=d["wait_all_months"],
        ndads_used=d["ndads_used"],
        altruist_pct_usage=d["altruist_pct_usage"],
        n_paths=d["n_paths"],
        paths_by_bucket=tuple(d["paths_by_bucket"]),
        cycles_by_length={int(k): v for k, v in d["cycles_by_length"].items()},
        patients_in_paths=d["patients_in_paths"],
        pct_path_matches=d["pct_path_matches"],
        queue_by_band=tuple(d["queue_by_band"]),
        queue_ndads=d["queue_ndads"],
        welfare=tuple(d["welfare"]),
        warnings=tuple(d["warnings"]),
    )


def report_from_json(text: str) -> RunReport:
    d = json.loads(text)
    agg = None
    if d["aggregate"] is not None:
        a = d["aggregate"]
        agg = Aggregate(
            replications=a["replications"],
            pairs_arrived=a["pairs_arrived"],
            ndads_arrived=a["ndads_arrived"],
            participants=a["participants"],
            matches=a["matches"],
            pct_match=a["pct_match"],
            wait_recipients_months=a["wait_recipients_months"],
            wait_all_months=a["wait_all_months"],
            ndads_used=a["ndads_used"],
            altruist_pct_usage=a["altruist_pct_usage"],
            n_paths=a["n_paths"],
            paths_by_bucket=tuple(a["paths_by_bucket"]),
            cycles_by_length={int(k): v for k, v in a["cycles_by_length"].items()},
            patients_in_paths=a["patients_in_paths"],
            pct_path_matches=a["pct_path_matches"],
            queue_by_band=tuple(a["queue_by_band"]),
            queue_ndads=a["queue_ndads"],
            welfare_mean_of_scores=tuple(a["welfare_mean_of_scores"]),
            welfare_of_mean_queue=tuple(a["welfare_of_mean_queue"]),
            fairness_measures=(
                tuple(a["fairness_measures"]) if a["fairness_measures"] else None
            ),
        )
    return RunReport(
        config=d["config"],
        rows=tuple(_row_from_dict(r) for r in d["rows"]),
        aggregate=agg,
        incomplete=d["incomplete"],
        failures=tuple(d["failures"]),
    )


# ---------------------------------------------------------------------------
# Table-shaped CSV mirrors.  Two decimals like the published tables, five for
# raw welfare scores; \n endings; stable column order.
# ---------------------------------------------------------------------------


def _fmt(x: float | None, nd: int = 2) -> str:
    return "" if x is None else f"{x:.{nd}f}"


def _csv(path: str, header: list[str], rows: Iterable[list[str]]) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def emit_report(report: RunReport, out: str, format: str = "both") -> list[str]:
    """Write the report files; returns the paths written."""
    if format not in ("csv", "json", "both"):
        raise ValueError(f"unknown format {format!r}")
    written: list[str] = []
    if format in ("json", "both"):
        path = f"{out}.json"
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(report_to_json(report))
        written.append(path)
    if format not in ("csv", "both"):
        return written

    agg = report.aggregate
    cfg = report.config
    alg = cfg.get("scheme", "?")
    w = cfg.get("ndad_penalty", 0.0)
    egal_measure = (
        agg.fairness_measures[2] if agg and agg.fairness_measures else None
    )

    path = f"{out}_summary.csv"
    _csv(
        path,
        ["Alg", "W", "#Matches", "%Match", "WaitRecip", "Wait", "EgalFairness"],
        [
            [
                alg,
                _fmt(w, 1),
                _fmt(agg.matches if agg else None),
                _fmt(agg.pct_match if agg else None),
                _fmt(agg.wait_recipients_months if agg else None),
                _fmt(agg.wait_all_months if agg else None),
                _fmt(egal_measure),
            ]
        ]
        if agg
        else [],
    )
    written.append(path)

    if agg:
        path = f"{out}_paths.csv"
        _csv(
            path,
            [
                "P", "#Matches", "%Match", "Altruist%Usage",
                "Paths1-5", "Paths6-10", "Paths11-15", "Paths16-20", "%PathMatches",
            ],
            [
                [
                    str(cfg.get("max_chain", "")),
                    _fmt(agg.matches),
                    _fmt(agg.pct_match),
                    _fmt(agg.altruist_pct_usage),
                    *[_fmt(x) for x in agg.paths_by_bucket],
                    _fmt(agg.pct_path_matches),
                ]
            ],
        )
        written.append(path)

        path = f"{out}_cycles.csv"
        cycle_cols = sorted(agg.cycles_by_length)
        _csv(
            path,
            ["C", "#Matches", "%Match"]
            + [f"Cycles{k}" for k in cycle_cols]
            + ["#Paths", "PatientsInPaths", "%PathMatches"],
            [
                [
                    str(cfg.get("max_cycle", "")),
                    _fmt(agg.matches),
                    _fmt(agg.pct_match),
                    *[_fmt(agg.cycles_by_length[k]) for k in cycle_cols],
                    _fmt(agg.n_paths),
                    _fmt(agg.patients_in_paths),
                    _fmt(agg.pct_path_matches),
                ]
            ],
        )
        written.append(path)

        path = f"{out}_queue.csv"
        _csv(
            path,
            ["Model", "G1", "G2", "G3", "G4", "G5"],
            [[alg, *[_fmt(x) for x in agg.queue_by_band]]],
        )
        written.append(path)

        path = f"{out}_fairness.csv"
        measures = agg.fairness_measures or (None, None, None)
        _csv(
            path,
            [
                "Model", "Utilitarian", "Nash", "Egalitarian",
                "UtilitarianMeasure", "NashMeasure", "EgalitarianMeasure",
            ],
            [
                [
                    alg,
                    *[_fmt(x, 5) for x in agg.welfare_of_mean_queue],
                    *[_fmt(x) for x in measures],
                ]
            ],
        )
        written.append(path)

    path = f"{out}_replications.csv"
    _csv(
        path,
        [
            "Rep", "PairsArrived", "NdadsArrived", "#Matches", "%Match",
            "WaitRecip", "Wait", "NdadsUsed", "Altruist%Usage", "#Paths",
            "PatientsInPaths", "%PathMatches",
            "G1", "G2", "G3", "G4", "G5", "QueueNdads",
            "Utilitarian", "Nash", "Egalitarian", "Warnings",
        ],
        [
            [
                str(r.replication),
                str(r.pairs_arrived),
                str(r.ndads_arrived),
                str(r.matches),
                _fmt(r.pct_match),
                _fmt(r.wait_recipients_months),
                _fmt(r.wait_all_months),
                str(r.ndads_used),
                _fmt(r.altruist_pct_usage),
                str(r.n_paths),
                str(r.patients_in_paths),
                _fmt(r.pct_path_matches),
                *[str(x) for x in r.queue_by_band],
                str(r.queue_ndads),
                *[_fmt(x, 5) for x in r.welfare],
                str(len(r.warnings)),
            ]
            for r in report.rows
        ],
    )
    written.append(path)
    return written


def emit_sweep(result: SweepResult, out: str, format: str = "both") -> list[str]:
    """Write the sweep table; one row per axis value."""
    if format not in ("csv", "json", "both"):
        raise ValueError(f"unknown format {format!r}")
    written: list[str] = []
    if format in ("json", "both"):
        payload = {
            "axis": result.axis,
            "values": list(result.values),
            "marginal_matches_per_altruist": list(result.marginal_matches_per_altruist),
            "donors_per_altruist": list(result.donors_per_altruist),
            "reports": [report_to_dict(r) for r in result.reports],
        }
        path = f"{out}.json"
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(json.dumps(payload, indent=2) + "\n")
        written.append(path)
    if format not in ("csv", "both"):
        return written

    header = [
        result.axis, "#Matches", "%Match", "WaitRecip", "Wait",
        "Altruist%Usage", "#Paths", "PatientsInPaths", "%PathMatches", "Egalitarian",
    ]
    extra = result.axis == "ndad_rate"
    if extra:
        header += ["#Altruists", "Matches/Altruist", "Donors/Altruist"]
    rows = []
    for i, (v, rep) in enumerate(zip(result.values, result.reports)):
        agg = rep.aggregate
        if agg is None:
            rows.append([_fmt(v)] + [""] * (len(header) - 1))
            continue
        row = [
            _fmt(v),
            _fmt(agg.matches),
            _fmt(agg.pct_match),
            _fmt(agg.wait_recipients_months),
            _fmt(agg.wait_all_months),
            _fmt(agg.altruist_pct_usage),
            _fmt(agg.n_paths),
            _fmt(agg.patients_in_paths),
            _fmt(agg.pct_path_matches),
            _fmt(agg.welfare_of_mean_queue[2], 5),
        ]
        if extra:
            row += [
                _fmt(agg.ndads_arrived),
                _fmt(result.marginal_matches_per_altruist[i]),
                _fmt(result.donors_per_altruist[i]),
            ]
        rows.append(row)
    path = f"{out}_sweep.csv"
    _csv(path, header, rows)
    written.append(path)
    return written
