"""Solver for the relay-idle case.

Bi-level decomposition: for a fixed split (n1, n2) the continuous problem
collapses, through its first-order optimality system, to a single dual
multiplier found by bisection; the integer split is then enumerated with a
monotonicity-based pruning rule on offloaded data sizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import model
from ._search import bisect_decreasing
from .lambertw import lambert_w0
from .model import ChannelParams, Infeasible, ModelDomainError, Scenario


@dataclass(frozen=True)
class SplitIndices:
    """Device-chain split: first task at the relay (n1), first at the BS (n2)."""

    n1: int
    n2: int


@dataclass(frozen=True)
class Case1LowerSolution:
    """Optimal continuous variables for a fixed split.

    One CPU frequency per site suffices at the optimum, so ``f_local`` and
    ``f_relay`` are scalars (zero when the corresponding task group is
    empty).  ``slack`` is the residual deadline margin, ~0 when the
    deadline binds.
    """

    tau1: float
    tau2: float
    f_local: float
    f_relay: float
    lam: float
    energy: float
    slack: float


@dataclass(frozen=True)
class Case1Solution:
    split: SplitIndices
    lower: Case1LowerSolution
    energy_breakdown: dict[str, float]


@dataclass(frozen=True)
class Case1Options:
    bisect_rel: float = 1e-9
    max_bisect_iter: int = 200
    max_doublings: int = 200
    tie_rel: float = 1e-12
    feas_rel: float = 1e-12


@dataclass(frozen=True)
class _SplitSums:
    local_cycles: float
    relay_cycles: float
    bs_cycles: float
    d1: float
    d2: float


def _split_sums(split: SplitIndices, scenario: Scenario) -> _SplitSums:
    chain = scenario.device_chain
    n = chain.n
    if not (1 <= split.n1 <= split.n2 <= n + 1):
        raise ValueError(f"split {split} violates 1 <= n1 <= n2 <= {n + 1}")
    return _SplitSums(
        local_cycles=chain.cycles_between(1, split.n1),
        relay_cycles=chain.cycles_between(split.n1, split.n2),
        bs_cycles=chain.cycles_between(split.n2, n + 1),
        d1=chain.data(split.n1),
        d2=chain.data(split.n2),
    )


def tau_from_lambda(
    lam: float, data_nats: float, gain: float, channel: ChannelParams
) -> float:
    """Optimal transmit duration for dual value ``lam``.

    d / (B * (W0((lam*gain/sigma2 - 1)/e) + 1)); strictly decreasing in
    ``lam``.  Zero data transmits in zero time.
    """
    if data_nats == 0.0:
        return 0.0
    if lam <= 0.0:
        raise ModelDomainError("dual multiplier must be positive for nonzero data")
    ratio = lam * gain / channel.noise
    if ratio < 1e-8:
        # the W argument sits within rounding of the branch point; its
        # offset is ratio/e exactly, so expand W0 + 1 = p - p^2/3 + ...
        # with p = sqrt(2*ratio) instead of evaluating W0 directly
        p = math.sqrt(2.0 * ratio)
        w_plus_1 = p - 2.0 * ratio / 3.0
    else:
        w_plus_1 = lambert_w0((ratio - 1.0) / math.e) + 1.0
    if w_plus_1 <= 0.0:
        return math.inf
    return data_nats / (channel.bandwidth * w_plus_1)


def freq_from_lambda(lam: float, kappa: float, f_cap: float) -> float:
    """Optimal shared CPU frequency min{(lam/2k)^(1/3), cap}."""
    if lam < 0.0:
        raise ModelDomainError("dual multiplier must be nonnegative")
    return min((lam / (2.0 * kappa)) ** (1.0 / 3.0), f_cap)


def deadline_lhs(lam: float, split: SplitIndices, scenario: Scenario) -> float:
    """Total completion time at dual value ``lam`` (BS pinned to its cap).

    Non-increasing in ``lam``: raising the multiplier speeds up every
    CPU group and shortens both transmissions.
    """
    if lam <= 0.0:
        raise ModelDomainError("dual multiplier must be positive")
    sums = _split_sums(split, scenario)
    compute = scenario.compute
    channel = scenario.channel
    total = sums.bs_cycles / compute.f_bs_max
    if sums.local_cycles > 0.0:
        total += sums.local_cycles / freq_from_lambda(
            lam, compute.kappa_md, compute.f_md_max
        )
    if sums.relay_cycles > 0.0:
        total += sums.relay_cycles / freq_from_lambda(
            lam, compute.kappa_relay, compute.f_relay_max
        )
    total += tau_from_lambda(lam, sums.d1, channel.gain_md_relay, channel)
    total += tau_from_lambda(lam, sums.d2, channel.gain_relay_bs, channel)
    return total


def _assemble_lower(
    lam: float, split: SplitIndices, scenario: Scenario, deadline: float
) -> Case1LowerSolution:
    sums = _split_sums(split, scenario)
    compute = scenario.compute
    channel = scenario.channel
    f_local = (
        freq_from_lambda(lam, compute.kappa_md, compute.f_md_max)
        if sums.local_cycles > 0.0
        else 0.0
    )
    f_relay = (
        freq_from_lambda(lam, compute.kappa_relay, compute.f_relay_max)
        if sums.relay_cycles > 0.0
        else 0.0
    )
    tau1 = tau_from_lambda(lam, sums.d1, channel.gain_md_relay, channel)
    tau2 = tau_from_lambda(lam, sums.d2, channel.gain_relay_bs, channel)
    energy = (
        model.transmission_energy(sums.d1, tau1, channel.gain_md_relay, channel)
        + model.transmission_energy(sums.d2, tau2, channel.gain_relay_bs, channel)
        + model.compute_energy(sums.local_cycles, f_local, compute.kappa_md)
        + model.compute_energy(sums.relay_cycles, f_relay, compute.kappa_relay)
    )
    slack = deadline - deadline_lhs(lam, split, scenario)
    return Case1LowerSolution(
        tau1=tau1,
        tau2=tau2,
        f_local=f_local,
        f_relay=f_relay,
        lam=lam,
        energy=energy,
        slack=slack,
    )


def solve_lower_case1(
    split: SplitIndices,
    scenario: Scenario,
    options: Case1Options = Case1Options(),
) -> Case1LowerSolution:
    """Solve the fixed-split continuous subproblem.

    The deadline constraint is active at any optimum with nonzero work, so
    the dual multiplier is bisected until the completion time meets the
    deadline.  Raises :class:`Infeasible` when even frequency caps plus
    vanishing transmit times overshoot the deadline.
    """
    deadline = scenario.deadlines.t_s
    if deadline is None or deadline <= 0.0:
        raise model.ScenarioError("relay-idle case requires a positive t_s deadline")
    sums = _split_sums(split, scenario)
    compute = scenario.compute
    channel = scenario.channel

    lhs_cap = sums.bs_cycles / compute.f_bs_max
    if sums.local_cycles > 0.0:
        lhs_cap += sums.local_cycles / compute.f_md_max
    if sums.relay_cycles > 0.0:
        lhs_cap += sums.relay_cycles / compute.f_relay_max
    if lhs_cap > deadline * (1.0 + options.feas_rel):
        raise Infeasible(
            f"split ({split.n1}, {split.n2}) cannot meet the deadline even at "
            "frequency caps with instantaneous transmission",
            ("deadline",),
        )

    lam_free = (
        sums.local_cycles == 0.0
        and sums.relay_cycles == 0.0
        and sums.d1 == 0.0
        and sums.d2 == 0.0
    )
    if lam_free:
        # nothing depends on the multiplier: all work sits at the BS cap
        return Case1LowerSolution(
            tau1=0.0,
            tau2=0.0,
            f_local=0.0,
            f_relay=0.0,
            lam=0.0,
            energy=0.0,
            slack=deadline - lhs_cap,
        )

    def lhs(lam: float) -> float:
        return deadline_lhs(lam, split, scenario)

    lam_hi = 2.0 * max(
        compute.kappa_md * compute.f_md_max**3,
        compute.kappa_relay * compute.f_relay_max**3,
        channel.noise / min(channel.gain_md_relay, channel.gain_relay_bs),
    )
    for _ in range(options.max_doublings):
        if lhs(lam_hi) <= deadline:
            break
        lam_hi *= 2.0
    else:
        raise Infeasible(
            f"split ({split.n1}, {split.n2}): deadline cannot be reached within "
            "the multiplier search range",
            ("deadline",),
        )

    lam_lo = 1e-18
    for _ in range(options.max_doublings):
        if lam_lo >= lam_hi or lhs(lam_lo) >= deadline:
            break
        lam_lo *= 0.5

    lam = bisect_decreasing(
        lhs,
        deadline,
        min(lam_lo, lam_hi),
        lam_hi,
        rel_tol=options.bisect_rel,
        max_iter=options.max_bisect_iter,
    )
    return _assemble_lower(lam, split, scenario, deadline)


def kkt_residuals(
    split: SplitIndices, solution: Case1LowerSolution, scenario: Scenario
) -> dict[str, float]:
    """Relative stationarity and primal residuals at a returned solution.

    Frequency stationarity is only meaningful off the cap (interior); at
    the cap the inactive entry is omitted.
    """
    sums = _split_sums(split, scenario)
    channel = scenario.channel
    compute = scenario.compute
    lam = solution.lam
    out: dict[str, float] = {}

    def tx_residual(d: float, tau: float, gain: float) -> float:
        s = d / (channel.bandwidth * tau)
        t1 = lam
        t2 = channel.noise / gain * math.expm1(s)
        t3 = -channel.noise * d * math.exp(s) / (channel.bandwidth * gain * tau)
        scale = max(abs(t1), abs(t2), abs(t3), 1e-300)
        return (t1 + t2 + t3) / scale

    if sums.d1 > 0.0 and solution.tau1 > 0.0:
        out["tau1"] = tx_residual(sums.d1, solution.tau1, channel.gain_md_relay)
    if sums.d2 > 0.0 and solution.tau2 > 0.0:
        out["tau2"] = tx_residual(sums.d2, solution.tau2, channel.gain_relay_bs)

    def freq_residual(f: float, kappa: float) -> float:
        t1 = 2.0 * kappa * f
        t2 = -lam / (f * f)
        scale = max(abs(t1), abs(t2), 1e-300)
        return (t1 + t2) / scale

    if sums.local_cycles > 0.0 and solution.f_local < compute.f_md_max * (1 - 1e-12):
        out["f_local"] = freq_residual(solution.f_local, compute.kappa_md)
    if sums.relay_cycles > 0.0 and solution.f_relay < compute.f_relay_max * (1 - 1e-12):
        out["f_relay"] = freq_residual(solution.f_relay, compute.kappa_relay)

    deadline = scenario.deadlines.t_s
    if deadline:
        out["primal"] = -solution.slack / deadline
    return out


def _breakdown(
    split: SplitIndices, lower: Case1LowerSolution, scenario: Scenario
) -> dict[str, float]:
    sums = _split_sums(split, scenario)
    channel = scenario.channel
    compute = scenario.compute
    return {
        "tx_md": model.transmission_energy(
            sums.d1, lower.tau1, channel.gain_md_relay, channel
        ),
        "tx_relay": model.transmission_energy(
            sums.d2, lower.tau2, channel.gain_relay_bs, channel
        ),
        "cpu_md": model.compute_energy(
            sums.local_cycles, lower.f_local, compute.kappa_md
        ),
        "cpu_relay": model.compute_energy(
            sums.relay_cycles, lower.f_relay, compute.kappa_relay
        ),
    }


def solve_case1(
    scenario: Scenario,
    options: Case1Options = Case1Options(),
    *,
    prune: bool = True,
) -> Case1Solution:
    """Enumerate splits and return the minimum-energy plan.

    Pruning uses the data-size monotonicity of the relay's offloaded task:
    at fixed n1, a candidate n2 whose data size does not drop below its
    predecessor's cannot beat the predecessor, so its lower-level solve is
    skipped.  The argument only holds when the BS frequency cap dominates
    the relay's, so pruning is disabled otherwise.  Ties are broken toward
    the lexicographically smallest (n1, n2).
    """
    if scenario.relay_chain is not None:
        raise model.ScenarioError(
            "solve_case1 applies only when the relay has no tasks of its own"
        )
    chain = scenario.device_chain
    n = chain.n
    can_prune = prune and scenario.compute.f_relay_max <= scenario.compute.f_bs_max * (
        1.0 + 1e-12
    )

    best: Case1Solution | None = None
    for n1 in range(1, n + 2):
        for n2 in range(n1, n + 2):
            if (
                can_prune
                and n2 > n1
                and chain.data(n2) > 0.0
                and chain.data(n2) >= chain.data(n2 - 1)
            ):
                # inherits the predecessor's value as a lower bound; the
                # predecessor was already considered, so skip the solve
                continue
            split = SplitIndices(n1, n2)
            try:
                lower = solve_lower_case1(split, scenario, options)
            except Infeasible:
                continue
            if best is None or lower.energy < best.lower.energy * (
                1.0 - options.tie_rel
            ):
                best = Case1Solution(
                    split=split,
                    lower=lower,
                    energy_breakdown=_breakdown(split, lower, scenario),
                )
    if best is None:
        raise Infeasible(
            "globally infeasible: every split violates the deadline", ("deadline",)
        )
    return best
