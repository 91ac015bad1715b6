"""Synchronous-round distributed algorithms over a zeroth-order oracle.

Three algorithms, all advancing every agent in lockstep per round:

* ``dgd2p`` -- decentralized gradient descent driven by the random-direction
  two-point estimator; 2 queries per agent per round.
* ``gt2d``  -- gradient tracking driven by the full coordinate sweep; 2d
  queries per agent per round (the previous sweep is retained, and the
  tracker is seeded with the round-0 sweep so its network mean matches the
  mean estimate from the start).
* ``vrgt``  -- gradient tracking driven by the variance-reduced estimator
  with Bernoulli(p) snapshot refreshes; 4 + 2dp expected queries per agent
  per round in ``paper_faithful`` accounting (2 + 2dp in ``cached``), plus
  one 2d sweep per agent at initialization to seed the snapshots.

Per round, vrgt: (1) mix-and-descend the iterates, (2) draw a uniform
coordinate per agent, (3) draw the Bernoulli refresh indicator, (4) refresh
fired snapshots at the new iterate, (5) build the variance-reduced estimate,
(6) mix the tracker with the estimate increment.  Trackers start at zero
together with the previous-estimate register, so mean(s) == mean(g) holds
from round 0 and telescopes exactly.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .estimators import SnapshotState, _check_mode
from .metrics import MetricsRow, compute_metrics
from .network import MixingMatrix, Topology, metropolis_weights
from .oracle import ObjectiveSpec, ZerothOrderOracle

ALGORITHMS = ("dgd2p", "gt2d", "vrgt")


@dataclass(frozen=True)
class Schedule:
    """Step-size and smoothing-radius schedules.

    step at round k is step_size / max(k, 1)**step_decay (constant when
    step_decay == 0; the decaying option is meant for dgd2p).  The smoothing
    radius is u0 / max(k, 1)**u_decay, non-increasing, finite at k == 0.
    Squared radii scaled by the dimension are summable only when
    u_decay > 1/2; a smaller exponent voids the convergence guarantee, so
    the constructor warns.
    """

    step_size: float
    step_decay: float = 0.0
    u0: float = 3.0
    u_decay: float = 0.75

    def __post_init__(self) -> None:
        if self.step_size < 0.0:
            raise ValueError("step_size must be nonnegative")
        if self.step_decay < 0.0:
            raise ValueError("step_decay must be nonnegative")
        if self.u0 <= 0.0:
            raise ValueError("u0 must be positive")
        if not 0.0 < self.u_decay <= 1.0:
            raise ValueError("u_decay must lie in (0, 1]")
        if self.u_decay <= 0.5:
            warnings.warn("u_decay <= 1/2: squared smoothing radii are not summable",
                          stacklevel=2)

    def step_size_at(self, k: int) -> float:
        if self.step_decay == 0.0:
            return self.step_size
        return self.step_size / max(k, 1) ** self.step_decay

    def smoothing_at(self, k: int) -> float:
        return self.u0 / max(k, 1) ** self.u_decay


@dataclass(frozen=True)
class StopRule:
    """rounds: run exactly `limit` rounds.  queries: run whole rounds until
    the cumulative fresh-query count reaches `limit`."""

    kind: str
    limit: int

    def __post_init__(self) -> None:
        if self.kind not in ("rounds", "queries"):
            raise ValueError(f"stop kind must be 'rounds' or 'queries', got {self.kind!r}")
        if self.limit < 1:
            raise ValueError("stop limit must be at least 1")


class SnapshotBlock:
    """Stacked per-agent snapshots backing the variance-reduced estimator."""

    def __init__(self, oracle: ZerothOrderOracle, x: np.ndarray, u: float):
        n, d = x.shape
        self.x_tilde = x.copy()
        self.u_tilde = np.full(n, float(u))
        self.f_plus = np.empty((n, d))
        self.f_minus = np.empty((n, d))
        self.full = np.empty((n, d))
        self.capture_rows(oracle, np.arange(n), x, u)

    def capture_rows(self, oracle: ZerothOrderOracle, rows: np.ndarray,
                     x_rows: np.ndarray, u: float) -> None:
        """Refresh the given agents' snapshots at (x_rows, u); 2d queries each."""
        d = x_rows.shape[1]
        pts = np.repeat(x_rows[:, None, :], 2 * d, axis=1)
        idx = np.arange(d)
        pts[:, idx, idx] += u
        pts[:, d + idx, idx] -= u
        vals = oracle.evaluate_rows(rows, pts)
        self.x_tilde[rows] = x_rows
        self.u_tilde[rows] = u
        self.f_plus[rows] = vals[:, :d]
        self.f_minus[rows] = vals[:, d:]
        self.full[rows] = (vals[:, :d] - vals[:, d:]) / (2.0 * u)

    def get(self, agent: int) -> SnapshotState:
        return SnapshotState(x_tilde=self.x_tilde[agent].copy(),
                             u_tilde=float(self.u_tilde[agent]),
                             f_plus=self.f_plus[agent].copy(),
                             f_minus=self.f_minus[agent].copy(),
                             full=self.full[agent].copy())


@dataclass
class RunState:
    """Mutable state of one run.  A run owns its oracle and rng stream."""

    k: int
    x: np.ndarray                      # (N, d) iterates
    oracle: ZerothOrderOracle
    rng: np.random.Generator
    s: np.ndarray | None = None        # (N, d) trackers
    g_prev: np.ndarray | None = None   # (N, d) previous estimates
    snapshots: SnapshotBlock | None = None
    last_refreshes: int = field(default=0)


def _coord_quotients(oracle: ZerothOrderOracle, x: np.ndarray, u: np.ndarray,
                     l: np.ndarray) -> np.ndarray:
    """Central-difference quotients along coordinate l[i] at row i; 2 queries
    per agent.  u is per-agent."""
    n, d = x.shape
    rows = np.arange(n)
    pts = np.repeat(x[:, None, :], 2, axis=1)
    pts[rows, 0, l] += u
    pts[rows, 1, l] -= u
    vals = oracle.evaluate_rows(rows, pts)
    return (vals[:, 0] - vals[:, 1]) / (2.0 * u)


def init_dgd2p(oracle: ZerothOrderOracle, x0: np.ndarray,
               rng: np.random.Generator) -> RunState:
    return RunState(k=0, x=x0.copy(), oracle=oracle, rng=rng)


def init_gt2d(oracle: ZerothOrderOracle, x0: np.ndarray, schedule: Schedule,
              rng: np.random.Generator) -> RunState:
    """Seed the tracker with the round-0 sweep (2d queries per agent) so the
    tracking identity holds from the start."""
    n, d = x0.shape
    u0 = schedule.smoothing_at(0)
    pts = np.repeat(x0[:, None, :], 2 * d, axis=1)
    idx = np.arange(d)
    pts[:, idx, idx] += u0
    pts[:, d + idx, idx] -= u0
    vals = oracle.evaluate_block(pts)
    g0 = (vals[:, :d] - vals[:, d:]) / (2.0 * u0)
    return RunState(k=0, x=x0.copy(), oracle=oracle, rng=rng, s=g0.copy(), g_prev=g0)


def init_vrgt(oracle: ZerothOrderOracle, x0: np.ndarray, schedule: Schedule,
              rng: np.random.Generator) -> RunState:
    """Snapshots start at the initial iterate (one 2d sweep per agent);
    trackers and previous estimates start at zero."""
    n, d = x0.shape
    snapshots = SnapshotBlock(oracle, x0, schedule.smoothing_at(0))
    return RunState(k=0, x=x0.copy(), oracle=oracle, rng=rng,
                    s=np.zeros((n, d)), g_prev=np.zeros((n, d)), snapshots=snapshots)


def dgd2p_step(state: RunState, w: MixingMatrix, oracle: ZerothOrderOracle,
               schedule: Schedule) -> RunState:
    """Mixed descent along fresh two-point estimates; 2 queries per agent."""
    n, d = state.x.shape
    u = schedule.smoothing_at(state.k)
    eta = schedule.step_size_at(state.k)
    z = state.rng.standard_normal((n, d))
    norms = np.linalg.norm(z, axis=1, keepdims=True)
    while np.any(norms == 0.0):  # probability-zero guard
        bad = norms[:, 0] == 0.0
        z[bad] = state.rng.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(z, axis=1, keepdims=True)
    z /= norms
    pts = np.stack([state.x + u * z, state.x - u * z], axis=1)
    vals = oracle.evaluate_block(pts)
    grad_est = d * ((vals[:, 0] - vals[:, 1]) / (2.0 * u))[:, None] * z
    state.x = w.w @ (state.x - eta * grad_est)
    state.k += 1
    return state


def gt2d_step(state: RunState, w: MixingMatrix, oracle: ZerothOrderOracle,
              schedule: Schedule) -> RunState:
    """Tracked descent with a fresh full sweep at the new iterate; 2d queries
    per agent (the previous sweep is reused, not recomputed)."""
    if state.s is None or state.g_prev is None:
        raise ValueError("gt2d state not initialized; use init_gt2d")
    n, d = state.x.shape
    alpha = schedule.step_size_at(state.k)
    u_next = schedule.smoothing_at(state.k + 1)
    x_new = w.w @ (state.x - alpha * state.s)
    pts = np.repeat(x_new[:, None, :], 2 * d, axis=1)
    idx = np.arange(d)
    pts[:, idx, idx] += u_next
    pts[:, d + idx, idx] -= u_next
    vals = oracle.evaluate_block(pts)
    g_new = (vals[:, :d] - vals[:, d:]) / (2.0 * u_next)
    state.s = w.w @ (state.s + g_new - state.g_prev)
    state.x = x_new
    state.g_prev = g_new
    state.k += 1
    return state


def vrgt_step(state: RunState, w: MixingMatrix, oracle: ZerothOrderOracle,
              schedule: Schedule, p: float,
              counting_mode: str = "paper_faithful") -> RunState:
    """One variance-reduced gradient-tracking round."""
    _check_mode(counting_mode)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"refresh probability must lie in [0, 1], got {p}")
    if state.s is None or state.g_prev is None or state.snapshots is None:
        raise ValueError("vrgt state not initialized; use init_vrgt")
    n, d = state.x.shape
    snap = state.snapshots
    alpha = schedule.step_size_at(state.k)
    u_next = schedule.smoothing_at(state.k + 1)
    rows = np.arange(n)

    x_new = w.w @ (state.x - alpha * state.s)
    l = state.rng.integers(0, d, size=n)
    fired = state.rng.random(n) < p
    hit = np.flatnonzero(fired)
    if hit.size:
        snap.capture_rows(oracle, hit, x_new[hit], u_next)

    q_x = _coord_quotients(oracle, x_new, np.full(n, u_next), l)
    if counting_mode == "paper_faithful":
        q_snap = _coord_quotients(oracle, snap.x_tilde, snap.u_tilde, l)
    else:
        q_snap = (snap.f_plus[rows, l] - snap.f_minus[rows, l]) / (2.0 * snap.u_tilde)
    g = snap.full.copy()
    g[rows, l] += d * q_x - d * q_snap

    state.s = w.w @ (state.s + g - state.g_prev)
    state.x = x_new
    state.g_prev = g
    state.k += 1
    state.last_refreshes = int(hit.size)
    return state


def run(algorithm: str, topology: Topology, spec: ObjectiveSpec,
        schedule: Schedule, stop: StopRule, seed: int, p: float = 0.1,
        counting_mode: str = "paper_faithful", x0_scale: float = 1.0,
        heterogeneous_x0: bool = False) -> list[MetricsRow]:
    """Run one algorithm to its stop rule and return per-round metrics.

    The trajectory is fully determined by the arguments: the master seed
    derives one stream for the initial point and one consumed by the rounds
    in a fixed order.  All agents start from the same point unless
    heterogeneous_x0 is set.
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {algorithm!r}")
    if topology.n_agents != spec.n_agents:
        raise ValueError("topology and objective disagree on the number of agents")
    if algorithm == "vrgt" and not 0.0 <= p <= 1.0:
        raise ValueError(f"refresh probability must lie in [0, 1], got {p}")

    w = metropolis_weights(topology)
    oracle = ZerothOrderOracle(spec)
    ss_init, ss_rounds = np.random.SeedSequence(seed).spawn(2)
    rng_init = np.random.default_rng(ss_init)
    if heterogeneous_x0:
        x0 = x0_scale * rng_init.standard_normal((spec.n_agents, spec.dim))
    else:
        x0 = np.tile(x0_scale * rng_init.standard_normal(spec.dim), (spec.n_agents, 1))
    rng = np.random.default_rng(ss_rounds)

    if algorithm == "dgd2p":
        state = init_dgd2p(oracle, x0, rng)
    elif algorithm == "gt2d":
        state = init_gt2d(oracle, x0, schedule, rng)
    else:
        state = init_vrgt(oracle, x0, schedule, rng)

    rows: list[MetricsRow] = []
    while True:
        if stop.kind == "rounds":
            if state.k >= stop.limit:
                break
        elif oracle.total_queries >= stop.limit:
            break
        if algorithm == "dgd2p":
            dgd2p_step(state, w, oracle, schedule)
        elif algorithm == "gt2d":
            gt2d_step(state, w, oracle, schedule)
        else:
            vrgt_step(state, w, oracle, schedule, p, counting_mode)
        rows.append(compute_metrics(state, spec))
    return rows
