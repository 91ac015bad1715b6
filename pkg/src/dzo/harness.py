"""Experiment configuration, CSV persistence, and comparison suites.

Config files are INI text with typed sections (documented in the README):

    [topology]  kind, n, seed, prob (erdos_renyi only)
    [objective] kind, dim, seed
    [algorithm] name, step_size, p (vrgt), counting_mode (vrgt)
    [schedule]  u0, u_decay, step_decay
    [stop]      kind (rounds | queries), limit
    [run]       seed, x0_scale, x0_mode (shared | heterogeneous), out

The CSV contract: header ``k,m,stat_gap,consensus_err,tracking_err``, 17
significant digits, LF line endings, empty tracking field when the
algorithm has no tracker.  ``m`` counts fresh oracle queries summed over
all agents.  Each run writes a normalized config echo next to its CSV so
any result can be replayed bit for bit.

Comparison suites mirror the three standard experiment families:

* fig1 -- the tracked variance-reduced method (p=0.1) against both
  baselines on the 50-agent, 64-dimensional benchmark, shared query axis;
* fig2 -- refresh-probability sweep p in {0.2, 0.5, 0.8, 1.0};
* fig3 -- dimension sweep d in {30, 100, 200, 300} with the refresh
  probability lowered as min(0.1, 8/d).

Suite budgets are per-agent sampling numbers (the natural x-axis for
cross-algorithm comparisons); the stop rule they compile to multiplies by
the number of agents, since MetricsRow.m counts queries network-wide.
"""

from __future__ import annotations

import configparser
import io
import warnings
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .algorithms import ALGORITHMS, Schedule, StopRule, run
from .metrics import MetricsRow
from .network import Topology, TopologyKind, build_topology
from .oracle import ObjectiveSpec, make_benchmark, make_linear, make_quadratic

SUITES = ("fig1", "fig2", "fig3")
CSV_HEADER = "k,m,stat_gap,consensus_err,tracking_err"

_SUITE_AGENTS = 50
_SUITE_DIM = 64
_SUITE_TOPOLOGY = ("erdos_renyi", 0.2)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one run, file-round-trippable."""

    topology_kind: str
    topology_n: int
    topology_seed: int
    objective_kind: str
    objective_dim: int
    objective_seed: int
    algorithm: str
    step_size: float
    stop_kind: str
    stop_limit: int
    seed: int
    topology_prob: float | None = None
    p: float = 0.1
    counting_mode: str = "paper_faithful"
    u0: float = 3.0
    u_decay: float = 0.75
    step_decay: float = 0.0
    x0_scale: float = 1.0
    x0_mode: str = "shared"
    out: str = "run.csv"

    def __post_init__(self) -> None:
        if self.topology_kind not in TopologyKind:
            raise ValueError(f"unknown topology kind {self.topology_kind!r}")
        if self.objective_kind not in ("benchmark", "quadratic", "linear"):
            raise ValueError(f"unknown objective kind {self.objective_kind!r}")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.x0_mode not in ("shared", "heterogeneous"):
            raise ValueError(f"x0_mode must be shared or heterogeneous, got {self.x0_mode!r}")
        StopRule(self.stop_kind, self.stop_limit)  # validates

    def build_topology(self) -> Topology:
        return build_topology(self.topology_kind, self.topology_n,
                              seed=self.topology_seed, prob=self.topology_prob)

    def build_objective(self) -> ObjectiveSpec:
        n, d, s = self.topology_n, self.objective_dim, self.objective_seed
        if self.objective_kind == "benchmark":
            return make_benchmark(n, d, seed=s)
        if self.objective_kind == "quadratic":
            return make_quadratic(n, d, seed=s)
        return make_linear(n, d, seed=s)

    def build_schedule(self) -> Schedule:
        return Schedule(step_size=self.step_size, step_decay=self.step_decay,
                        u0=self.u0, u_decay=self.u_decay)


def config_to_text(cfg: ExperimentConfig) -> str:
    """Normalized INI rendering; floats use repr so parsing round-trips."""
    parser = configparser.ConfigParser()
    parser["topology"] = {"kind": cfg.topology_kind, "n": str(cfg.topology_n),
                          "seed": str(cfg.topology_seed)}
    if cfg.topology_prob is not None:
        parser["topology"]["prob"] = repr(cfg.topology_prob)
    parser["objective"] = {"kind": cfg.objective_kind, "dim": str(cfg.objective_dim),
                           "seed": str(cfg.objective_seed)}
    parser["algorithm"] = {"name": cfg.algorithm, "step_size": repr(cfg.step_size)}
    if cfg.algorithm == "vrgt":
        parser["algorithm"]["p"] = repr(cfg.p)
        parser["algorithm"]["counting_mode"] = cfg.counting_mode
    parser["schedule"] = {"u0": repr(cfg.u0), "u_decay": repr(cfg.u_decay),
                          "step_decay": repr(cfg.step_decay)}
    parser["stop"] = {"kind": cfg.stop_kind, "limit": str(cfg.stop_limit)}
    parser["run"] = {"seed": str(cfg.seed), "x0_scale": repr(cfg.x0_scale),
                     "x0_mode": cfg.x0_mode, "out": cfg.out}
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def config_from_text(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser()
    parser.read_string(text)
    try:
        topo = parser["topology"]
        obj = parser["objective"]
        alg = parser["algorithm"]
        sched = parser["schedule"]
        stop = parser["stop"]
        runsec = parser["run"]
        return ExperimentConfig(
            topology_kind=topo["kind"],
            topology_n=int(topo["n"]),
            topology_seed=int(topo["seed"]),
            topology_prob=float(topo["prob"]) if "prob" in topo else None,
            objective_kind=obj["kind"],
            objective_dim=int(obj["dim"]),
            objective_seed=int(obj["seed"]),
            algorithm=alg["name"],
            step_size=float(alg["step_size"]),
            p=float(alg.get("p", "0.1")),
            counting_mode=alg.get("counting_mode", "paper_faithful"),
            u0=float(sched["u0"]),
            u_decay=float(sched["u_decay"]),
            step_decay=float(sched.get("step_decay", "0.0")),
            stop_kind=stop["kind"],
            stop_limit=int(stop["limit"]),
            seed=int(runsec["seed"]),
            x0_scale=float(runsec.get("x0_scale", "1.0")),
            x0_mode=runsec.get("x0_mode", "shared"),
            out=runsec.get("out", "run.csv"),
        )
    except (KeyError, ValueError) as err:
        raise ValueError(f"malformed experiment config: {err}") from err


def load_config(path: str | Path) -> ExperimentConfig:
    return config_from_text(Path(path).read_text())


def _fmt(value: float) -> str:
    return "%.17g" % value


def rows_to_csv(rows: list[MetricsRow]) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        tracking = "" if r.tracking_err is None else _fmt(r.tracking_err)
        lines.append(f"{r.k},{r.m},{_fmt(r.stat_gap)},{_fmt(r.consensus_err)},{tracking}")
    return "\n".join(lines) + "\n"


def write_csv(rows: list[MetricsRow], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(rows_to_csv(rows))
    return path


def read_csv(path: str | Path) -> list[MetricsRow]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path} is not a metrics CSV")
    rows = []
    for line in lines[1:]:
        k, m, stat, cons, track = line.split(",")
        rows.append(MetricsRow(k=int(k), m=int(m), stat_gap=float(stat),
                               consensus_err=float(cons),
                               tracking_err=float(track) if track else None))
    return rows


def run_config(cfg: ExperimentConfig) -> list[MetricsRow]:
    """Execute a config in memory and return its rows."""
    return run(algorithm=cfg.algorithm,
               topology=cfg.build_topology(),
               spec=cfg.build_objective(),
               schedule=cfg.build_schedule(),
               stop=StopRule(cfg.stop_kind, cfg.stop_limit),
               seed=cfg.seed,
               p=cfg.p,
               counting_mode=cfg.counting_mode,
               x0_scale=cfg.x0_scale,
               heterogeneous_x0=cfg.x0_mode == "heterogeneous")


def run_experiment(cfg: ExperimentConfig, out_dir: str | Path | None = None) -> Path:
    """Run a config and persist its CSV plus a config echo sidecar.

    The sidecar (``<out>.config``) is the normalized config; feeding it back
    through ``run_experiment`` reproduces the CSV byte for byte.
    """
    rows = run_config(cfg)
    out = Path(cfg.out)
    if out_dir is not None and not out.is_absolute():
        out = Path(out_dir) / out
    path = write_csv(rows, out)
    sidecar = path.with_suffix(path.suffix + ".config")
    with open(sidecar, "w", newline="\n") as fh:
        fh.write(config_to_text(cfg))
    return path


def _suite_base(seed: int, dim: int = _SUITE_DIM, n: int = _SUITE_AGENTS) -> ExperimentConfig:
    kind, prob = _SUITE_TOPOLOGY
    return ExperimentConfig(
        topology_kind=kind, topology_n=n, topology_seed=seed, topology_prob=prob,
        objective_kind="benchmark", objective_dim=dim, objective_seed=seed,
        algorithm="vrgt", step_size=0.02, u0=3.0, u_decay=0.75,
        stop_kind="queries", stop_limit=1, seed=seed, x0_scale=0.25,
    )


def suite_configs(suite: str, seed: int, budget: int) -> list[ExperimentConfig]:
    """Configs for one comparison suite.

    ``budget`` is the per-agent sampling number; every config in a suite
    shares the same seed (hence the same objective draw, topology, and
    initial point) and the same query axis.
    """
    if suite not in SUITES:
        raise ValueError(f"suite must be one of {SUITES}, got {suite!r}")
    if budget < 1:
        raise ValueError("budget must be positive")
    if suite == "fig1":
        base = _suite_base(seed)
        total = budget * base.topology_n
        return [
            replace(base, algorithm="vrgt", p=0.1, stop_limit=total, out="fig1_vrgt.csv"),
            replace(base, algorithm="dgd2p", stop_limit=total, out="fig1_dgd2p.csv"),
            replace(base, algorithm="gt2d", stop_limit=total, out="fig1_gt2d.csv"),
        ]
    if suite == "fig2":
        base = _suite_base(seed)
        total = budget * base.topology_n
        return [
            replace(base, p=p, stop_limit=total, out=f"fig2_vrgt_p{p:g}.csv")
            for p in (0.2, 0.5, 0.8, 1.0)
        ]
    configs = []
    for d in (30, 100, 200, 300):
        base = _suite_base(seed, dim=d)
        p = min(0.1, 8.0 / d)
        configs.append(replace(base, p=p, stop_limit=budget * base.topology_n,
                               out=f"fig3_vrgt_d{d}.csv"))
    return configs


def run_comparison(suite: str, seed: int, budget: int,
                   out_dir: str | Path = ".") -> list[Path]:
    """Run a whole suite and return its CSV paths (sidecars alongside)."""
    return [run_experiment(cfg, out_dir=out_dir) for cfg in suite_configs(suite, seed, budget)]


def fit_decay_rate(rows: list[MetricsRow]) -> float:
    """Least-squares slope of log(running average of stat_gap) against
    log(k), over the last half of the series.  A series decaying like 1/k
    fits a slope of -1."""
    if len(rows) < 50:
        raise ValueError(f"need at least 50 rows to fit, got {len(rows)}")
    gaps = np.array([r.stat_gap for r in rows])
    if np.any(gaps <= 0.0):
        warnings.warn("clamping non-positive stationarity gaps before log fit",
                      stacklevel=2)
        gaps = np.maximum(gaps, 1e-300)
    k = np.arange(1, len(gaps) + 1, dtype=float)
    running = np.cumsum(gaps) / k
    half = len(gaps) // 2
    slope = np.polyfit(np.log(k[half:]), np.log(running[half:]), 1)[0]
    return float(slope)
