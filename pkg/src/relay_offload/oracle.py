"""Brute-force and generic-descent reference solvers.

The grid references re-derive the objectives and constraints from the raw
physical formulas instead of reusing the closed-form solver code, so they
stay meaningful as independent cross-checks.  They are deliberately slow
and simple.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .model import Scenario


class NoFeasiblePoint(Exception):
    """The grid contains no point satisfying the constraints."""


@dataclass(frozen=True)
class GridAxis:
    lo: float
    hi: float
    points: int

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise ValueError("grid axis requires lo < hi")
        if self.points < 2:
            raise ValueError("grid axis requires at least 2 points")


@dataclass(frozen=True)
class GridSpec:
    axes: tuple[GridAxis, ...]
    rounds: int = 1
    shrink: float = 5.0

    def __post_init__(self) -> None:
        if self.rounds < 1:
            raise ValueError("at least one refinement round required")


@dataclass
class GridResult:
    point: np.ndarray
    value: float
    round_values: list[float]


def grid_minimize(
    objective: Callable,
    feasible: Callable | None,
    spec: GridSpec,
    *,
    vectorized: bool = False,
    chunk_size: int = 1 << 18,
) -> GridResult:
    """Best feasible grid point after iterative shrink-refinement.

    Each round re-grids a window shrunk ``spec.shrink``-fold around the
    incumbent, clipped to the original bounds.  In vectorized mode the
    callables receive a (k, n) array and return length-k arrays.
    """
    bounds = [(ax.lo, ax.hi) for ax in spec.axes]
    windows = list(bounds)
    counts = [ax.points for ax in spec.axes]
    ndim = len(spec.axes)

    best_point: np.ndarray | None = None
    best_value = math.inf
    round_values: list[float] = []

    for _ in range(spec.rounds):
        grids = [np.linspace(lo, hi, pts) for (lo, hi), pts in zip(windows, counts)]
        shape = tuple(counts)
        total = int(np.prod(shape))
        if vectorized:
            for start in range(0, total, chunk_size):
                flat = np.arange(start, min(start + chunk_size, total))
                coords = np.unravel_index(flat, shape)
                points = np.column_stack(
                    [grids[d][coords[d]] for d in range(ndim)]
                )
                mask = (
                    np.asarray(feasible(points), dtype=bool)
                    if feasible is not None
                    else np.ones(len(points), dtype=bool)
                )
                if not mask.any():
                    continue
                candidates = points[mask]
                with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
                    values = np.asarray(objective(candidates), dtype=float)
                values = np.where(np.isfinite(values), values, np.inf)
                k = int(np.argmin(values))
                if values[k] < best_value:
                    best_value = float(values[k])
                    best_point = candidates[k].copy()
        else:
            for combo in itertools.product(*grids):
                x = np.array(combo, dtype=float)
                if feasible is not None and not feasible(x):
                    continue
                value = objective(x)
                if math.isfinite(value) and value < best_value:
                    best_value = value
                    best_point = x.copy()

        if best_point is None:
            raise NoFeasiblePoint("no feasible point found on the grid")
        round_values.append(best_value)

        new_windows = []
        for d in range(ndim):
            lo, hi = windows[d]
            width = hi - lo
            cell = width / (counts[d] - 1)
            center = float(best_point[d])
            if center - lo <= 1.01 * cell or hi - center <= 1.01 * cell:
                # incumbent on the window edge: the optimum may lie just
                # outside, so recenter and shrink gently to keep tracking
                half = width / (2.0 * math.sqrt(spec.shrink))
            else:
                half = width / (2.0 * spec.shrink)
            nlo = max(bounds[d][0], center - half)
            nhi = min(bounds[d][1], center + half)
            if nhi <= nlo:
                nlo, nhi = bounds[d]
            new_windows.append((nlo, nhi))
        windows = new_windows

    assert best_point is not None
    return GridResult(point=best_point, value=best_value, round_values=round_values)


# --- projections -----------------------------------------------------------


@dataclass(frozen=True)
class Box:
    """Componentwise bounds lo <= x <= hi."""

    lo: np.ndarray
    hi: np.ndarray

    def project(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, self.lo, self.hi)

    def violation(self, x: np.ndarray) -> float:
        return float(
            max(np.max(self.lo - x, initial=0.0), np.max(x - self.hi, initial=0.0))
        )


@dataclass(frozen=True)
class Halfspace:
    """Linear inequality a @ x <= b."""

    a: np.ndarray
    b: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "_norm_sq", float(self.a @ self.a))

    def project(self, x: np.ndarray) -> np.ndarray:
        excess = float(self.a @ x) - self.b
        if excess <= 0.0:
            return x
        return x - self.a * (excess / self._norm_sq)

    def violation(self, x: np.ndarray) -> float:
        return max(0.0, float(self.a @ x) - self.b) / math.sqrt(self._norm_sq)


ConvexSet = Box | Halfspace


def max_violation(sets: Sequence[ConvexSet], x: np.ndarray) -> float:
    return max((s.violation(x) for s in sets), default=0.0)


def dykstra_project(
    sets: Sequence[ConvexSet],
    x: np.ndarray,
    *,
    max_sweeps: int = 200,
    tol: float = 1e-12,
) -> np.ndarray:
    """Project onto the intersection of convex sets (Dykstra's algorithm)."""
    x = np.asarray(x, dtype=float).copy()
    corrections = [np.zeros_like(x) for _ in sets]
    for _ in range(max_sweeps):
        previous = x.copy()
        for i, s in enumerate(sets):
            shifted = x + corrections[i]
            projected = s.project(shifted)
            corrections[i] = shifted - projected
            x = projected
        drift = float(np.linalg.norm(x - previous))
        if max_violation(sets, x) <= tol and drift <= 1e-10 * (
            1.0 + float(np.linalg.norm(x))
        ):
            break
    return x


def cyclic_project(
    sets: Sequence[ConvexSet],
    x: np.ndarray,
    *,
    max_sweeps: int = 60,
    tol: float = 1e-12,
) -> np.ndarray:
    """Cheap feasibility projection: cyclic sweeps without corrections.

    Lands on a nearby feasible point rather than the nearest one; good
    enough inside descent line searches where only feasibility matters.
    """
    x = np.asarray(x, dtype=float).copy()
    for _ in range(max_sweeps):
        for s in sets:
            x = s.project(x)
        if max_violation(sets, x) <= tol:
            break
    return x


class _PolytopeProjector:
    """Cyclic projector for small box-plus-halfspace systems.

    Plain-float inner loops over the nonzero coefficients: for the
    handful of dimensions the solvers use, numpy's per-call overhead
    dominates the arithmetic.  Halfspace reflections are over-relaxed
    while far from the intersection, which breaks the slow zig-zag that
    plain alternating projections exhibit at acute constraint angles.
    """

    _OMEGA = 1.7

    def __init__(
        self, sets: Sequence[ConvexSet], tol: float, max_sweeps: int
    ) -> None:
        self._tol = tol
        self._max_sweeps = max_sweeps
        boxes = [s for s in sets if isinstance(s, Box)]
        if not boxes:
            raise ValueError("projector requires a bounding box")
        self._n = len(boxes[0].lo)
        self._lo = [max(float(b.lo[j]) for b in boxes) for j in range(self._n)]
        self._hi = [min(float(b.hi[j]) for b in boxes) for j in range(self._n)]
        self._planes = []
        for s in sets:
            if isinstance(s, Halfspace):
                nonzero = tuple(
                    (j, float(c)) for j, c in enumerate(s.a) if c != 0.0
                )
                norm_sq = sum(c * c for _, c in nonzero)
                self._planes.append(
                    (nonzero, float(s.b), 1.0 / norm_sq, math.sqrt(norm_sq))
                )

    def _violation(self, x: list[float]) -> float:
        worst = 0.0
        lo, hi = self._lo, self._hi
        for j in range(self._n):
            v = x[j]
            if lo[j] - v > worst:
                worst = lo[j] - v
            if v - hi[j] > worst:
                worst = v - hi[j]
        for nonzero, bound, _, norm in self._planes:
            excess = -bound
            for j, c in nonzero:
                excess += c * x[j]
            if excess > worst * norm:
                worst = excess / norm
        return worst

    def __call__(self, point: np.ndarray) -> np.ndarray:
        x = [float(v) for v in point]
        lo, hi = self._lo, self._hi
        n = self._n
        relax = self._OMEGA
        for sweep in range(self._max_sweeps):
            for j in range(n):
                v = x[j]
                if v < lo[j]:
                    x[j] = lo[j]
                elif v > hi[j]:
                    x[j] = hi[j]
            worst_plane = 0.0
            for nonzero, bound, inv_norm_sq, norm in self._planes:
                excess = -bound
                for j, c in nonzero:
                    excess += c * x[j]
                if excess > 0.0:
                    shift = excess * inv_norm_sq * relax
                    for j, c in nonzero:
                        x[j] -= c * shift
                    if excess > worst_plane * norm:
                        worst_plane = excess / norm
            if worst_plane <= 0.25 * self._tol:
                # planes satisfied before relaxation; one exact box pass
                for j in range(n):
                    v = x[j]
                    if v < lo[j]:
                        x[j] = lo[j]
                    elif v > hi[j]:
                        x[j] = hi[j]
                if self._violation(x) <= self._tol:
                    break
            relax = self._OMEGA if worst_plane > 100.0 * self._tol else 1.0
        return np.array(x)


def make_projection(
    sets: Sequence[ConvexSet],
    *,
    exact: bool = False,
    max_sweeps: int | None = None,
    tol: float = 1e-12,
) -> Callable[[np.ndarray], np.ndarray]:
    if exact:
        sweeps = max_sweeps if max_sweeps is not None else 200
        return lambda x: dykstra_project(sets, x, max_sweeps=sweeps, tol=tol)
    sweeps = max_sweeps if max_sweeps is not None else 60
    return _PolytopeProjector(sets, tol, sweeps)


# --- projected gradient descent --------------------------------------------


@dataclass
class DescentResult:
    point: np.ndarray
    value: float
    iterations: int
    converged: bool


def numeric_gradient(
    objective: Callable[[np.ndarray], float],
    x: np.ndarray,
    f_x: float | None = None,
    *,
    rel_step: float = 1e-8,
) -> np.ndarray:
    """Central-difference gradient, h_i = max(1e-8, rel|x_i|).

    Falls back to one-sided differences where a probe point leaves the
    objective's domain (returns +/-inf or NaN).
    """
    if f_x is None:
        f_x = objective(x)
    grad = np.zeros_like(x)
    for i in range(len(x)):
        h = max(1e-8, rel_step * abs(float(x[i])))
        forward = x.copy()
        forward[i] += h
        backward = x.copy()
        backward[i] -= h
        f_fwd = objective(forward)
        f_bwd = objective(backward)
        fwd_ok = math.isfinite(f_fwd)
        bwd_ok = math.isfinite(f_bwd)
        if fwd_ok and bwd_ok:
            grad[i] = (f_fwd - f_bwd) / (2.0 * h)
        elif fwd_ok:
            grad[i] = (f_fwd - f_x) / h
        elif bwd_ok:
            grad[i] = (f_x - f_bwd) / h
        else:
            grad[i] = 0.0
    return grad


def projected_descent(
    objective: Callable[[np.ndarray], float],
    project: Callable[[np.ndarray], np.ndarray],
    start: np.ndarray,
    *,
    max_iter: int = 100_000,
    step_tol: float = 1e-12,
    initial_step: float | None = None,
    stall_iters: int = 200,
    stall_rel_tol: float = 1e-12,
) -> DescentResult:
    """Numeric-gradient descent with backtracking and per-step projection.

    Steps move a fixed length along the normalized negative gradient; the
    length adapts multiplicatively (shrinks on failure, grows on success).
    Stops on the step tolerance, after ``stall_iters`` iterations whose
    relative improvement stays under ``stall_rel_tol`` (projected zig-zag
    near a constrained optimum), or on the iteration cap; always returns
    the best point found with a convergence flag rather than failing.
    """
    x = project(np.asarray(start, dtype=float))
    f_x = objective(x)
    scale = max(1.0, float(np.linalg.norm(x)))
    step = initial_step if initial_step is not None else 0.05 * scale

    iterations = 0
    converged = False
    since_improvement = 0
    while iterations < max_iter:
        iterations += 1
        grad = numeric_gradient(objective, x, f_x)
        norm = float(np.linalg.norm(grad))
        if not math.isfinite(norm) or norm == 0.0:
            converged = True
            break
        direction = grad / norm

        improved = False
        while step >= step_tol:
            trial = project(x - step * direction)
            f_trial = objective(trial)
            if math.isfinite(f_trial) and f_trial < f_x:
                improved = True
                break
            step *= 0.5
        if not improved:
            converged = True
            break

        moved = float(np.linalg.norm(trial - x))
        if f_x - f_trial <= stall_rel_tol * max(abs(f_x), 1e-300):
            since_improvement += 1
        else:
            since_improvement = 0
        x, f_x = trial, f_trial
        step = min(step * 1.6, 10.0 * scale)
        if moved < step_tol * (1.0 + float(np.linalg.norm(x))):
            converged = True
            break
        if since_improvement >= stall_iters:
            converged = True
            break

    return DescentResult(point=x, value=f_x, iterations=iterations, converged=converged)


# --- composed reference solvers --------------------------------------------


@dataclass
class ReferenceSolution:
    """Grid-oracle output: objective value plus the labeled assignment."""

    value: float
    assignment: dict[str, float]


def case1_lower_reference(
    n1: int,
    n2: int,
    scenario: Scenario,
    *,
    points: int = 15,
    rounds: int = 9,
) -> ReferenceSolution:
    """Grid-search the relay-idle fixed-split problem.

    Every task keeps its own free CPU frequency (capped by its site), so
    the single-frequency-per-site structure of the production solver is
    itself under test.  Transmit durations for zero-data tasks are pinned
    to zero and excluded from the grid.
    """
    chain = scenario.device_chain
    n = chain.n
    if not (1 <= n1 <= n2 <= n + 1):
        raise ValueError("invalid split")
    ch = scenario.channel
    co = scenario.compute
    deadline = scenario.deadlines.t_s
    if deadline is None:
        raise ValueError("scenario lacks the relay-idle deadline")

    d1 = chain.data(n1)
    d2 = chain.data(n2)
    work = [chain.cycles(i) for i in range(1, n + 1)]

    # the deadline binds at any optimum (energy falls as every duration
    # grows), so one transmit duration absorbs the residual budget in
    # closed form and the grid runs over the remaining variables; BS
    # frequencies carry no energy and only help feasibility, so they sit
    # at the cap by dominance
    absorber = "tau2" if d2 > 0.0 else ("tau1" if d1 > 0.0 else None)
    bs_time = sum(
        work[i - 1] / co.f_bs_max for i in range(n2, n + 1) if work[i - 1] > 0.0
    )

    labels: list[str] = []
    axes: list[GridAxis] = []
    if d1 > 0.0 and absorber != "tau1":
        labels.append("tau1")
        axes.append(GridAxis(deadline * 1e-6, deadline, points))
    freq_tasks: list[int] = []
    for i in range(1, n2):
        if work[i - 1] <= 0.0:
            continue
        cap = co.f_md_max if i < n1 else co.f_relay_max
        # any feasible f_n satisfies f_n >= l_n / deadline, so 5% of that is
        # safely below the optimum; clamp in case the split is hopeless
        lo = min(max(work[i - 1] / deadline * 0.05, cap * 1e-9), cap * 0.5)
        labels.append(f"f_{i}")
        axes.append(GridAxis(lo, cap, points))
        freq_tasks.append(i)

    col = {label: idx for idx, label in enumerate(labels)}
    sigma2, bandwidth = ch.noise, ch.bandwidth
    h, g = ch.gain_md_relay, ch.gain_relay_bs

    def elapsed_without_absorber(x: np.ndarray) -> np.ndarray:
        elapsed = np.full(len(x), bs_time)
        if "tau1" in col:
            elapsed = elapsed + x[:, col["tau1"]]
        for i in freq_tasks:
            elapsed = elapsed + work[i - 1] / x[:, col[f"f_{i}"]]
        return elapsed

    def absorbed_duration(x: np.ndarray) -> np.ndarray:
        return deadline - elapsed_without_absorber(x)

    def tx_energy(d: float, tau: np.ndarray, gain: float) -> np.ndarray:
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            return np.where(
                tau > 0.0,
                sigma2 * tau / gain * np.expm1(d / (tau * bandwidth)),
                np.inf,
            )

    def objective(x: np.ndarray) -> np.ndarray:
        total = np.zeros(len(x))
        if "tau1" in col:
            total = total + tx_energy(d1, x[:, col["tau1"]], h)
        if absorber == "tau1":
            total = total + tx_energy(d1, absorbed_duration(x), h)
        elif absorber == "tau2":
            total = total + tx_energy(d2, absorbed_duration(x), g)
        for i in freq_tasks:
            freq = x[:, col[f"f_{i}"]]
            if i < n1:
                total = total + co.kappa_md * work[i - 1] * freq**2
            elif i < n2:
                total = total + co.kappa_relay * work[i - 1] * freq**2
        return total

    def feasible(x: np.ndarray) -> np.ndarray:
        if absorber is not None:
            return absorbed_duration(x) > 0.0
        return elapsed_without_absorber(x) <= deadline * (1.0 + 1e-12)

    if not axes and absorber is None:
        # nothing to choose: all work at the BS cap for free
        return ReferenceSolution(value=0.0, assignment={})
    if not axes:
        # single transmit duration takes the whole remaining budget
        tau = deadline - bs_time
        if tau <= 0.0:
            raise NoFeasiblePoint("deadline consumed by the BS block")
        gain = g if absorber == "tau2" else h
        d = d2 if absorber == "tau2" else d1
        value = float(sigma2 * tau / gain * math.expm1(d / (tau * bandwidth)))
        assignment = {absorber: tau}
        for i in range(n2, n + 1):
            if work[i - 1] > 0.0:
                assignment[f"f_{i}"] = co.f_bs_max
        return ReferenceSolution(value=value, assignment=assignment)

    result = grid_minimize(
        objective,
        feasible,
        GridSpec(tuple(axes), rounds=rounds),
        vectorized=True,
    )
    assignment = {label: float(result.point[col[label]]) for label in labels}
    if absorber is not None:
        slack = deadline - float(
            elapsed_without_absorber(result.point[None, :])[0]
        )
        assignment[absorber] = slack
    for i in range(n2, n + 1):
        if work[i - 1] > 0.0:
            assignment[f"f_{i}"] = co.f_bs_max
    return ReferenceSolution(value=result.value, assignment=assignment)


def case2_lower_reference(
    scheme: str,
    n1: int,
    n2: int,
    m1: int,
    scenario: Scenario,
    *,
    points: int = 13,
    rounds: int = 5,
) -> ReferenceSolution:
    """Grid-search a relay-busy scheme at a fixed split.

    Variables are the three transmit durations and three compute-block
    durations; the BS slot for device tasks is pinned to its minimum.
    Scheme is "S1", "S2", or "S3".
    """
    if scheme not in {"S1", "S2", "S3"}:
        raise ValueError(f"unknown scheme {scheme!r}")
    device = scenario.device_chain
    relay = scenario.relay_chain
    if relay is None:
        raise ValueError("relay-busy reference requires a relay chain")
    ch, co, dl = scenario.channel, scenario.compute, scenario.deadlines
    if dl.t0 is None or dl.t_s_th is None or dl.t_r_th is None:
        raise ValueError("scenario lacks relay-busy deadlines")
    t0, ts, tr = dl.t0, dl.t_s_th, dl.t_r_th

    d1, d2 = device.data(n1), device.data(n2)
    d3 = relay.data(m1)
    ls = device.cycles_between(1, n1)
    rs = device.cycles_between(n1, n2)
    es = device.cycles_between(n2, device.n + 1)
    lr = relay.cycles_between(1, m1)
    er = relay.cycles_between(m1, relay.n + 1)
    tau_s = es / co.f_bs_max

    device_hi = ts
    relay_hi = max(tr - t0, ts * 1e-3)

    # the objective falls strictly as tau2 grows, so given the other
    # variables the optimal tau2 is the smallest of its linear upper
    # bounds (exact coordinate elimination); scheme 1's budget-only
    # structure admits the same move for its other device-side variables
    absorber = None
    if d2 > 0.0:
        absorber = "tau2"
    elif scheme == "S1":
        if d1 > 0.0:
            absorber = "tau1"
        elif rs > 0.0:
            absorber = "T2"
        elif ls > 0.0:
            absorber = "T1"

    # in scheme 1 the own-compute block likewise takes the largest value
    # its ordering and window rows allow, so it never needs a grid axis
    eliminate_t3 = scheme == "S1" and lr > 0.0

    labels: list[str] = []
    axes: list[GridAxis] = []

    def add_axis(label: str, hi: float, work_like: float) -> None:
        if label == absorber or (label == "T3" and eliminate_t3):
            return
        lo = hi * 1e-6 if work_like > 0.0 else 0.0
        # GridAxis requires lo < hi; a zero lower bound is fine here
        axes.append(GridAxis(lo if lo > 0.0 else hi * 1e-12, hi, points))
        labels.append(label)

    if d1 > 0.0:
        add_axis("tau1", device_hi, d1)
    if d2 > 0.0:
        add_axis("tau2", device_hi, d2)
    if d3 > 0.0:
        add_axis("tau3", relay_hi, d3)
    add_axis("T1", device_hi, ls)
    add_axis("T2", device_hi, rs)
    add_axis("T3", relay_hi, lr)

    col = {label: idx for idx, label in enumerate(labels)}
    sigma2, bandwidth = ch.noise, ch.bandwidth
    h, g = ch.gain_md_relay, ch.gain_relay_bs

    def pick(x: np.ndarray, label: str) -> np.ndarray:
        if label in col:
            return x[:, col[label]]
        if label == absorber:
            used = np.zeros(len(x))
            for other in ("tau1", "tau2", "T1", "T2"):
                if other != absorber and other in col:
                    used = used + x[:, col[other]]
            bound = ts - tau_s - used
            if scheme == "S2" and absorber == "tau2":
                t3_values = (
                    x[:, col["T3"]] if "T3" in col else np.zeros(len(x))
                )
                bound = np.minimum(bound, t0 + t3_values - used)
                bound = np.minimum(bound, tr - er / co.f_bs_max - tau_s - used)
            return bound
        if label == "T3" and eliminate_t3:
            tau3_values = pick(x, "tau3")
            ordering_room = pick(x, "T1") - t0 - tau3_values
            window_room = tr - t0 - tau3_values - tau_s - er / co.f_bs_max
            return np.minimum(ordering_room, window_room)
        return np.zeros(len(x))

    def objective(x: np.ndarray) -> np.ndarray:
        total = np.zeros(len(x))
        for d, gain, label in ((d1, h, "tau1"), (d2, g, "tau2"), (d3, g, "tau3")):
            if d > 0.0:
                tau = pick(x, label)
                with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
                    total = total + np.where(
                        tau > 0.0,
                        sigma2 * tau / gain * np.expm1(d / (tau * bandwidth)),
                        np.inf,
                    )
        for cycles, kappa, label in (
            (ls, co.kappa_md, "T1"),
            (rs, co.kappa_relay, "T2"),
            (lr, co.kappa_relay, "T3"),
        ):
            if cycles > 0.0:
                block = pick(x, label)
                with np.errstate(divide="ignore", invalid="ignore"):
                    total = total + np.where(
                        block > 0.0, kappa * cycles**3 / block**2, np.inf
                    )
        return total

    tol = 1e-12 * max(1.0, tr)

    def feasible(x: np.ndarray) -> np.ndarray:
        tau1 = pick(x, "tau1")
        tau2 = pick(x, "tau2")
        tau3 = pick(x, "tau3")
        t1 = pick(x, "T1")
        t2 = pick(x, "T2")
        t3 = pick(x, "T3")
        device_busy = t1 + tau1 + t2 + tau2
        ok = device_busy + tau_s <= ts + tol
        if absorber is not None:
            ok &= pick(x, absorber) > 0.0
        if scheme == "S1":
            ok &= t0 + t3 + tau3 <= t1 + tol
            ok &= tau_s + er / co.f_bs_max <= tr - t0 - t3 - tau3 + tol
        elif scheme == "S2":
            ok &= device_busy <= t0 + t3 + tol
            completion = np.maximum(device_busy + tau_s, t0 + t2 + t3 + tau3)
            ok &= completion + er / co.f_bs_max <= tr + tol
        else:
            ok &= t1 + tau1 <= t0 + t3 + tol
            ok &= t0 + t3 + tau3 <= t1 + tau1 + t2 + tol
            ok &= t0 + t3 + tau3 + tau_s + er / co.f_bs_max <= tr + tol
        return ok

    result = grid_minimize(
        objective,
        feasible,
        GridSpec(tuple(axes), rounds=rounds),
        vectorized=True,
    )
    point = result.point[None, :]
    assignment = {label: float(result.point[col[label]]) for label in labels}
    if absorber is not None:
        assignment[absorber] = float(pick(point, absorber)[0])
    for label in ("tau1", "tau2", "tau3", "T1", "T2", "T3"):
        assignment.setdefault(label, 0.0)
    assignment["tau_s"] = tau_s
    return ReferenceSolution(value=result.value, assignment=assignment)
