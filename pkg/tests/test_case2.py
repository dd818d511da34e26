import math

import numpy as np
import pytest

from relay_offload import (
    ChannelParams,
    ComputeParams,
    Deadlines,
    Infeasible,
    Scenario,
    Task,
    TaskChain,
    oracle,
)
from relay_offload.case1 import SplitIndices, solve_lower_case1
from relay_offload.case2 import (
    Case2Indices,
    SchemeId,
    kkt_residuals_scheme1,
    scheme1_evaluate,
    scheme_objective,
    solve_case2,
    solve_scheme,
    solve_scheme1,
    solve_scheme_numeric,
    t3_from_tau3,
    tau_s_minimal,
)
from relay_offload.model import ModelDomainError

from scenario_tools import exit_only_relay_scenario, random_case2_scenario


def basic_scenario(t0=0.05, t_s_th=0.5, t_r_th=0.9):
    return Scenario(
        device_chain=TaskChain((Task(5e4, 2e8),)),
        relay_chain=TaskChain((Task(3e4, 1e8),)),
        channel=ChannelParams(1e6, 1e-6, 2e-6, 1e-9),
        compute=ComputeParams(1e-27, 5e-28, 1e9, 2e9, 5e9),
        deadlines=Deadlines(t0=t0, t_s_th=t_s_th, t_r_th=t_r_th),
    )


class TestBalanceEquation:
    def test_empty_own_block_bypasses(self):
        assert t3_from_tau3(0.7, 1, basic_scenario()) == 0.0

    def test_unit_anchor(self):
        # sigma2 = g = B = kappa_r = 1, d = own cycles = 1, tau3 = 1:
        # the marginal side is e*1 - (e-1) = 1, so T3 = 2^(1/3)
        scenario = Scenario(
            device_chain=TaskChain((Task(1.0, 1.0),)),
            relay_chain=TaskChain((Task(1.0, 1.0), Task(1.0, 1.0))),
            channel=ChannelParams(1.0, 1.0, 1.0, 1.0),
            compute=ComputeParams(1.0, 1.0, 1.0, 1.0, 1.0),
            deadlines=Deadlines(t0=0.0, t_s_th=10.0, t_r_th=10.0),
        )
        t3 = t3_from_tau3(1.0, 2, scenario)
        assert t3 == pytest.approx(2.0 ** (1.0 / 3.0), rel=1e-12)
        # substitute back into the balance: both sides must agree
        lhs = 2.0 * 1.0 * 1.0 / t3**3
        rhs = math.e - (math.e - 1.0)
        assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_zero_data_is_degenerate(self):
        scenario = basic_scenario()
        with pytest.raises(ModelDomainError):
            t3_from_tau3(0.5, 2, _with_relay_task(scenario, Task(0.0, 1e8)))

    def test_monotone_in_tau3(self):
        scenario = _with_relay_chain(
            basic_scenario(), (Task(2e4, 8e7), Task(3e4, 5e7))
        )
        taus = np.linspace(0.01, 0.5, 30)
        blocks = [t3_from_tau3(float(t), 2, scenario) for t in taus]
        assert all(a < b for a, b in zip(blocks, blocks[1:]))


def _with_relay_task(scenario, task):
    return _with_relay_chain(scenario, (task,))


def _with_relay_chain(scenario, tasks):
    return Scenario(
        device_chain=scenario.device_chain,
        relay_chain=TaskChain(tuple(tasks)),
        channel=scenario.channel,
        compute=scenario.compute,
        deadlines=scenario.deadlines,
    )


class TestTauS:
    def test_no_bs_work(self):
        assert tau_s_minimal(Case2Indices(1, 2, 1), basic_scenario()) == 0.0

    def test_direct_ratio(self):
        scenario = basic_scenario()
        assert tau_s_minimal(Case2Indices(1, 1, 1), scenario) == pytest.approx(
            2e8 / 5e9, rel=1e-14
        )


class TestScheme1Evaluate:
    def test_floor_branch_is_exact(self):
        scenario = basic_scenario()
        # large psi shrinks the interior block below the waiting floor
        candidate = scheme1_evaluate(1e3, 0.05, Case2Indices(1, 1, 1), scenario)
        assert candidate is not None
        assert candidate.t1 == scenario.deadlines.t0 + candidate.t3 + 0.05
        assert candidate.lam > 0.0

    def test_energy_terms_grow_with_psi(self):
        scenario = basic_scenario(t_s_th=5.0, t_r_th=9.0)
        indices = Case2Indices(1, 2, 1)
        energies = []
        for psi in np.logspace(-6, 2, 16):
            candidate = scheme1_evaluate(float(psi), 0.05, indices, scenario)
            if candidate is None:
                # durations exceed the window at small psi
                assert not energies
                continue
            energies.append(candidate.energy)
        assert len(energies) >= 8
        assert all(a <= b + 1e-15 for a, b in zip(energies, energies[1:]))

    def test_window_violation_returns_none(self):
        scenario = basic_scenario(t_r_th=0.5001, t_s_th=0.5)
        # tau3 consuming nearly the whole relay window leaves no room
        assert (
            scheme1_evaluate(1.0, 0.45, Case2Indices(1, 1, 1), scenario) is None
        )

    def test_reports_relaxed_cap_violations(self):
        scenario = basic_scenario(t_s_th=5.0, t_r_th=9.0)
        candidate = scheme1_evaluate(1e6, 0.05, Case2Indices(1, 2, 1), scenario)
        assert candidate is not None
        assert "relay_cpu_cap_device_block" in candidate.cap_violations


class TestSolveScheme1:
    def test_matches_relay_idle_solver_when_relay_trivial(self):
        rng = np.random.default_rng(41)
        for _ in range(4):
            scenario = exit_only_relay_scenario(rng, n_tasks=2)
            relay_idle = Scenario(
                device_chain=scenario.device_chain,
                relay_chain=None,
                channel=scenario.channel,
                compute=scenario.compute,
                deadlines=Deadlines(t_s=scenario.deadlines.t_s_th),
            )
            n = scenario.device_chain.n
            for (n1, n2) in ((1, 1), (1, n + 1), (n + 1, n + 1)):
                lower2 = solve_scheme1(Case2Indices(n1, n2, 1), scenario)
                lower1 = solve_lower_case1(SplitIndices(n1, n2), relay_idle)
                assert lower2.energy == pytest.approx(lower1.energy, rel=1e-6)

    def test_against_grid_reference(self):
        rng = np.random.default_rng(43)
        checked = 0
        while checked < 2:
            scenario = random_case2_scenario(rng)
            indices = Case2Indices(1, 1, 1)
            try:
                lower = solve_scheme1(indices, scenario)
            except Infeasible:
                continue
            reference = oracle.case2_lower_reference(
                "S1", 1, 1, 1, scenario, points=11, rounds=5
            )
            assert lower.energy <= reference.value * (1 + 5e-3)
            checked += 1

    def test_degenerate_keep_everything_uses_numeric_path(self):
        scenario = basic_scenario(t_s_th=1.0, t_r_th=2.0)
        lower = solve_scheme1(Case2Indices(1, 1, 2), scenario)
        assert lower.tau3 == 0.0
        assert math.isnan(lower.psi)  # numeric path does not recover duals
        reference = oracle.case2_lower_reference(
            "S1", 1, 1, 2, scenario, points=11, rounds=5
        )
        assert lower.energy <= reference.value * (1 + 5e-3)

    def test_impossible_device_deadline(self):
        scenario = basic_scenario(t_s_th=2e8 / 5e9 / 2, t_r_th=1.0)
        with pytest.raises(Infeasible):
            solve_scheme1(Case2Indices(1, 1, 1), scenario)

    def test_tightening_relay_deadline_never_helps(self):
        scenario = basic_scenario()
        tight = basic_scenario(t_r_th=0.62)
        loose_energy = solve_scheme1(Case2Indices(1, 1, 1), scenario).energy
        tight_energy = solve_scheme1(Case2Indices(1, 1, 1), tight).energy
        assert tight_energy >= loose_energy * (1 - 1e-9)

    def test_kkt_residuals_on_interior_solutions(self):
        # the stationarity system applies on the interior-T1 branch
        # (waiting-floor solutions carry a positive ordering multiplier
        # whose complementary conditions the checker does not model)
        rng = np.random.default_rng(47)
        checked = 0
        while checked < 6:
            scenario = random_case2_scenario(rng, n_tasks=2)
            m = scenario.relay_chain.n
            n = scenario.device_chain.n
            n1 = int(rng.integers(1, n + 2))
            n2 = int(rng.integers(n1, n + 2))
            indices = Case2Indices(n1, n2, int(rng.integers(1, m + 1)))
            try:
                lower = solve_scheme1(indices, scenario)
            except Infeasible:
                continue
            if math.isnan(lower.psi) or lower.lam != 0.0:
                continue
            residuals = kkt_residuals_scheme1(lower, indices, scenario)
            for name, value in residuals.items():
                assert abs(value) <= 1e-4, (name, value, indices)
            checked += 1


class TestNumericSchemes:
    def test_do_nothing_chains_cost_nothing(self):
        scenario = Scenario(
            device_chain=TaskChain((Task(0.0, 0.0),)),
            relay_chain=TaskChain((Task(0.0, 0.0),)),
            channel=ChannelParams(1e6, 1e-6, 1e-6, 1e-9),
            compute=ComputeParams(1e-27, 1e-27, 1e9, 1e9, 1e9),
            deadlines=Deadlines(t0=0.1, t_s_th=1.0, t_r_th=2.0),
        )
        for scheme in (SchemeId.S2, SchemeId.S3):
            lower = solve_scheme_numeric(scheme, Case2Indices(1, 1, 1), scenario)
            assert lower.energy == pytest.approx(0.0, abs=1e-12)
        solution = solve_case2(scenario)
        assert solution.lower.energy == pytest.approx(0.0, abs=1e-12)

    def test_descent_agrees_with_grid_on_scheme2(self):
        # deep refinement: the two-sided check needs the grid itself to be
        # accurate to ~1e-9 absolute
        rng = np.random.default_rng(53)
        checked = 0
        while checked < 1:
            scenario = random_case2_scenario(rng)
            indices = Case2Indices(1, 1, 1)
            try:
                lower = solve_scheme_numeric(SchemeId.S2, indices, scenario)
            except Infeasible:
                continue
            reference = oracle.case2_lower_reference(
                "S2", 1, 1, 1, scenario, points=13, rounds=9
            )
            assert lower.energy >= reference.value - 1e-9
            assert lower.energy <= reference.value * (1 + 5e-3)
            checked += 1

    def test_late_busy_relay_favors_device_first(self):
        # the relay generates its chain late; making the device wait for
        # the relay's upload (scheme 1) wastes most of its budget
        scenario = Scenario(
            device_chain=TaskChain((Task(5e4, 2e8),)),
            relay_chain=TaskChain((Task(3e4, 1e7),)),
            channel=ChannelParams(1e6, 1e-6, 1e-6, 1e-9),
            compute=ComputeParams(1e-27, 5e-28, 1e9, 2e9, 5e9),
            deadlines=Deadlines(t0=0.25, t_s_th=0.5, t_r_th=1.2),
        )
        indices = Case2Indices(1, 1, 1)
        energy_s2 = solve_scheme_numeric(SchemeId.S2, indices, scenario).energy
        energy_s1 = solve_scheme1(indices, scenario).energy
        assert energy_s2 < energy_s1

    def test_free_tau0_never_improves(self):
        rng = np.random.default_rng(59)
        checked = 0
        while checked < 3:
            scenario = random_case2_scenario(rng)
            indices = Case2Indices(1, 1, 1)
            try:
                pinned = solve_scheme_numeric(SchemeId.S3, indices, scenario)
            except Infeasible:
                continue
            freed = solve_scheme_numeric(
                SchemeId.S3,
                indices,
                scenario,
                free_tau0=True,
                warm_start=pinned,
                warm_only=True,
            )
            assert freed.energy >= pinned.energy * (1 - 1e-6)
            checked += 1

    def test_scheme1_rejected(self):
        with pytest.raises(ValueError):
            solve_scheme_numeric(SchemeId.S1, Case2Indices(1, 1, 1), basic_scenario())


class TestSolveCase2:
    def test_exit_only_relay_matches_case1(self):
        from relay_offload.case1 import solve_case1

        rng = np.random.default_rng(61)
        scenario = exit_only_relay_scenario(rng, n_tasks=2)
        relay_idle = Scenario(
            device_chain=scenario.device_chain,
            relay_chain=None,
            channel=scenario.channel,
            compute=scenario.compute,
            deadlines=Deadlines(t_s=scenario.deadlines.t_s_th),
        )
        busy = solve_case2(scenario)
        idle = solve_case1(relay_idle)
        assert busy.lower.energy == pytest.approx(idle.lower.energy, rel=5e-3)

    def test_dominates_every_scheme(self):
        scenario = basic_scenario()
        best = solve_case2(scenario)
        n = scenario.device_chain.n
        m = scenario.relay_chain.n
        for scheme in SchemeId:
            for n1 in range(1, n + 2):
                for n2 in range(n1, n + 2):
                    for m1 in range(1, m + 2):
                        try:
                            lower = solve_scheme(
                                scheme, Case2Indices(n1, n2, m1), scenario
                            )
                        except Infeasible:
                            continue
                        assert best.lower.energy <= lower.energy * (1 + 1e-9)

    def test_objective_is_scheme_independent(self):
        scenario = basic_scenario()
        best = solve_case2(scenario)
        assignment = {
            "tau1": best.lower.tau1,
            "tau2": best.lower.tau2,
            "tau3": best.lower.tau3,
            "T1": best.lower.t1,
            "T2": best.lower.t2,
            "T3": best.lower.t3,
        }
        value = scheme_objective(assignment, best.indices, scenario)
        assert value == pytest.approx(best.lower.energy, rel=1e-9)
        assert sum(best.energy_breakdown.values()) == pytest.approx(
            best.lower.energy, rel=1e-9
        )

    def test_matches_composed_brute_force(self):
        # full traversal of the grid references over schemes and splits
        scenario = basic_scenario()
        best = solve_case2(scenario)
        oracle_best = math.inf
        for scheme in ("S1", "S2", "S3"):
            for n1 in range(1, 3):
                for n2 in range(n1, 3):
                    for m1 in range(1, 3):
                        try:
                            reference = oracle.case2_lower_reference(
                                scheme, n1, n2, m1, scenario, points=11, rounds=6
                            )
                        except oracle.NoFeasiblePoint:
                            continue
                        oracle_best = min(oracle_best, reference.value)
        assert best.lower.energy == pytest.approx(oracle_best, rel=5e-3)

    def test_impossible_deadlines(self):
        scenario = basic_scenario(t_s_th=1e-9, t_r_th=1e-9)
        with pytest.raises(Infeasible, match="globally infeasible"):
            solve_case2(scenario)

    def test_warm_start_keeps_quality(self):
        scenario = basic_scenario()
        cold = solve_case2(scenario)
        warm = solve_case2(scenario, warm_start=cold)
        assert warm.lower.energy <= cold.lower.energy * (1 + 1e-9)

    def test_deadline_ordering_enforced(self):
        from relay_offload.model import ScenarioError

        scenario = basic_scenario(t_s_th=1.0, t_r_th=0.5)
        with pytest.raises(ScenarioError, match="deadline ordering"):
            solve_case2(scenario)
