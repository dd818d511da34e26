"""Physical model of the relay-aided offloading system.

Task chains, channel and CPU parameters, the Shannon transmission-energy
formula, the cubic CPU energy model, scenario validation, and the scenario
JSON wire format.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

# exp() overflows IEEE doubles just above 709; keep headroom
EXP_ARG_MAX = 700.0


class ScenarioError(ValueError):
    """Malformed or structurally inconsistent scenario input."""


class ModelDomainError(ValueError):
    """A model formula was evaluated outside its domain."""


class DurationTooSmall(ModelDomainError):
    """Transmit duration so small that the energy exponent overflows."""


class Infeasible(Exception):
    """No feasible plan exists for the requested scenario or split.

    Distinct from malformed input: the instance is well formed but the
    constraint set cannot be satisfied.  ``constraints`` names the
    violated constraint family for reporting.
    """

    def __init__(self, message: str, constraints: tuple[str, ...] = ()) -> None:
        super().__init__(message)
        self.constraints = constraints


@dataclass(frozen=True)
class Task:
    """One sequential task: input data size (nats) and CPU work (cycles)."""

    data_nats: float
    cycles: float


@dataclass(frozen=True)
class TaskChain:
    """Ordered task chain with 1-based indexing.

    Index ``n + 1`` (one past the stored tasks) addresses the implicit
    zero-data, zero-cycle exit task, so "never offload the remainder" is
    representable by split indices.
    """

    tasks: tuple[Task, ...]

    def __post_init__(self) -> None:
        if len(self.tasks) < 1:
            raise ScenarioError("task chain must contain at least one task")
        object.__setattr__(self, "tasks", tuple(self.tasks))

    @property
    def n(self) -> int:
        return len(self.tasks)

    def data(self, index: int) -> float:
        """Input data size of task ``index`` (1-based); 0 for the exit task."""
        if not 1 <= index <= self.n + 1:
            raise IndexError(f"task index {index} outside 1..{self.n + 1}")
        if index == self.n + 1:
            return 0.0
        return self.tasks[index - 1].data_nats

    def cycles(self, index: int) -> float:
        """CPU cycles of task ``index`` (1-based); 0 for the exit task."""
        if not 1 <= index <= self.n + 1:
            raise IndexError(f"task index {index} outside 1..{self.n + 1}")
        if index == self.n + 1:
            return 0.0
        return self.tasks[index - 1].cycles

    def cycles_between(self, lo: int, hi: int) -> float:
        """Total cycles of tasks lo..hi-1 (1-based, half open)."""
        return float(sum(self.cycles(i) for i in range(lo, hi)))

    @property
    def total_cycles(self) -> float:
        return self.cycles_between(1, self.n + 1)


@dataclass(frozen=True)
class ChannelParams:
    """Shared-band channel: bandwidth B (nats/s), gains, noise power."""

    bandwidth: float
    gain_md_relay: float
    gain_relay_bs: float
    noise: float


@dataclass(frozen=True)
class ComputeParams:
    """CPU energy coefficients (J/cycle/Hz^2) and frequency caps (Hz)."""

    kappa_md: float
    kappa_relay: float
    f_md_max: float
    f_relay_max: float
    f_bs_max: float


@dataclass(frozen=True)
class Deadlines:
    """Completion deadlines; which fields apply depends on the case.

    ``t_s`` is the single deadline when the relay has no own tasks.  When
    it does, the device chain starts at 0 with deadline ``t_s_th``, the
    relay chain starts at ``t0`` with deadline ``t_r_th``.
    """

    t_s: float | None = None
    t0: float | None = None
    t_s_th: float | None = None
    t_r_th: float | None = None


@dataclass(frozen=True)
class Scenario:
    """Full problem instance. ``relay_chain`` is None when the relay is idle."""

    device_chain: TaskChain
    relay_chain: TaskChain | None
    channel: ChannelParams
    compute: ComputeParams
    deadlines: Deadlines

    @property
    def has_relay_tasks(self) -> bool:
        return self.relay_chain is not None


@dataclass(frozen=True)
class Violation:
    """One validation finding. ``severity`` is 'error' or 'warning'."""

    where: str
    message: str
    severity: str = "error"

    def __str__(self) -> str:
        return f"{self.severity}: {self.where}: {self.message}"


def transmission_energy(
    data_nats: float, duration_s: float, gain: float, channel: ChannelParams
) -> float:
    """Energy to push ``data_nats`` through the channel in ``duration_s``.

    Evaluates (noise * duration / gain) * (e^{d/(duration*B)} - 1).  Zero
    data costs nothing for any nonnegative duration (exit-task convention).
    """
    if gain <= 0.0:
        raise ModelDomainError("channel gain must be positive")
    if data_nats < 0.0:
        raise ModelDomainError("data size must be nonnegative")
    if data_nats == 0.0:
        if duration_s < 0.0:
            raise ModelDomainError("transmit duration must be nonnegative")
        return 0.0
    if duration_s <= 0.0:
        raise ModelDomainError("transmit duration must be positive for nonzero data")
    arg = data_nats / (duration_s * channel.bandwidth)
    if arg > EXP_ARG_MAX:
        raise DurationTooSmall(
            f"duration infeasibly small: exponent {arg:.3g} overflows"
        )
    return channel.noise * duration_s / gain * math.expm1(arg)


def compute_energy(cycles: float, frequency_hz: float, kappa: float) -> float:
    """CPU energy kappa * cycles * f^2; zero work costs nothing."""
    if kappa <= 0.0:
        raise ModelDomainError("energy coefficient must be positive")
    if cycles < 0.0:
        raise ModelDomainError("cycle count must be nonnegative")
    if cycles == 0.0:
        return 0.0
    if frequency_hz <= 0.0:
        raise ModelDomainError("frequency must be positive for nonzero work")
    return kappa * cycles * frequency_hz * frequency_hz


def compute_time(cycles: float, frequency_hz: float) -> float:
    """CPU time cycles / f; zero work takes no time."""
    if cycles < 0.0:
        raise ModelDomainError("cycle count must be nonnegative")
    if cycles == 0.0:
        return 0.0
    if frequency_hz <= 0.0:
        raise ModelDomainError("frequency must be positive for nonzero work")
    return cycles / frequency_hz


def _check_chain(name: str, chain: TaskChain, out: list[Violation]) -> None:
    for i, task in enumerate(chain.tasks, start=1):
        if task.data_nats < 0.0:
            out.append(Violation(f"{name}[{i}]", "data size must be nonnegative"))
        if task.cycles < 0.0:
            out.append(Violation(f"{name}[{i}]", "cycle count must be nonnegative"))
        if task.data_nats == 0.0 and task.cycles == 0.0:
            out.append(
                Violation(
                    f"{name}[{i}]",
                    "task carries no data and no work; exit tasks are implicit",
                    severity="warning",
                )
            )


def validate_scenario(scenario: Scenario) -> list[Violation]:
    """Check all type invariants; returns findings instead of raising.

    Also screens for trivially hopeless instances: if even the base
    station at its frequency cap cannot chew through the device chain
    within the deadline, the instance is flagged with a warning (the
    solver's feasibility check is authoritative).
    """
    out: list[Violation] = []
    _check_chain("device_tasks", scenario.device_chain, out)
    if scenario.relay_chain is not None:
        _check_chain("relay_tasks", scenario.relay_chain, out)

    ch = scenario.channel
    for field_name, value in (
        ("B", ch.bandwidth),
        ("h", ch.gain_md_relay),
        ("g", ch.gain_relay_bs),
        ("sigma2", ch.noise),
    ):
        if value <= 0.0:
            label = {
                "B": "bandwidth",
                "h": "device-relay gain",
                "g": "relay-BS gain",
                "sigma2": "noise",
            }[field_name]
            out.append(Violation(f"channel.{field_name}", f"{label} must be positive"))

    co = scenario.compute
    for field_name, value in (
        ("kappa_md", co.kappa_md),
        ("kappa_relay", co.kappa_relay),
        ("f_md_max", co.f_md_max),
        ("f_relay_max", co.f_relay_max),
        ("f_bs_max", co.f_bs_max),
    ):
        if value <= 0.0:
            out.append(Violation(f"compute.{field_name}", "must be positive"))

    dl = scenario.deadlines
    if scenario.relay_chain is None:
        if dl.t_s is None:
            out.append(Violation("deadlines.t_s", "required when the relay is idle"))
        elif dl.t_s <= 0.0:
            out.append(Violation("deadlines.t_s", "must be positive"))
        horizon = dl.t_s
    else:
        if dl.t0 is None:
            out.append(Violation("deadlines.t0", "required when the relay has tasks"))
        elif dl.t0 < 0.0:
            out.append(Violation("deadlines.t0", "must be nonnegative"))
        for field_name, value in (("t_s_th", dl.t_s_th), ("t_r_th", dl.t_r_th)):
            if value is None:
                out.append(
                    Violation(f"deadlines.{field_name}", "required when the relay has tasks")
                )
            elif value <= 0.0:
                out.append(Violation(f"deadlines.{field_name}", "must be positive"))
        if dl.t_s_th is not None and dl.t_r_th is not None and dl.t_s_th > dl.t_r_th:
            out.append(
                Violation(
                    "deadlines",
                    "deadline ordering: the device chain must finish no later "
                    "than the relay chain (t_s_th <= t_r_th)",
                )
            )
        horizon = dl.t_s_th

    if horizon is not None and horizon > 0.0 and co.f_bs_max > 0.0:
        if scenario.device_chain.total_cycles / co.f_bs_max > horizon:
            out.append(
                Violation(
                    "deadlines",
                    "even the base station at its cap cannot finish the device "
                    "chain within the deadline; instance is likely infeasible",
                    severity="warning",
                )
            )
    return out


# --- scenario JSON wire format -------------------------------------------

_TASK_KEYS = {"d_nats", "cycles"}
_CHANNEL_KEYS = {"B", "h", "g", "sigma2"}
_COMPUTE_KEYS = {"kappa_md", "kappa_relay", "f_md_max", "f_relay_max", "f_bs_max"}
_DEADLINE_KEYS = {"t_s", "t0", "t_s_th", "t_r_th"}
_TOP_KEYS = {"device_tasks", "relay_tasks", "channel", "compute", "deadlines"}


def _require_number(section: str, key: str, raw: dict) -> float:
    if key not in raw:
        raise ScenarioError(f"{section}: missing required key '{key}'")
    value = raw[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{section}.{key}: expected a number, got {value!r}")
    return float(value)


def _reject_unknown(section: str, raw: dict, allowed: set[str]) -> None:
    unknown = set(raw) - allowed
    if unknown:
        raise ScenarioError(f"{section}: unknown keys {sorted(unknown)}")


def _parse_tasks(section: str, raw: object) -> TaskChain:
    if not isinstance(raw, list) or not raw:
        raise ScenarioError(f"{section}: expected a non-empty array of tasks")
    tasks = []
    for i, entry in enumerate(raw, start=1):
        if not isinstance(entry, dict):
            raise ScenarioError(f"{section}[{i}]: expected an object")
        _reject_unknown(f"{section}[{i}]", entry, _TASK_KEYS)
        tasks.append(
            Task(
                data_nats=_require_number(f"{section}[{i}]", "d_nats", entry),
                cycles=_require_number(f"{section}[{i}]", "cycles", entry),
            )
        )
    return TaskChain(tuple(tasks))


def scenario_from_dict(doc: dict) -> Scenario:
    """Build a Scenario from a parsed JSON document; unknown keys rejected."""
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a JSON object")
    _reject_unknown("scenario", doc, _TOP_KEYS)
    for key in ("device_tasks", "channel", "compute", "deadlines"):
        if key not in doc:
            raise ScenarioError(f"scenario: missing required key '{key}'")

    device_chain = _parse_tasks("device_tasks", doc["device_tasks"])
    relay_chain = None
    if "relay_tasks" in doc and doc["relay_tasks"] is not None:
        relay_chain = _parse_tasks("relay_tasks", doc["relay_tasks"])

    raw_channel = doc["channel"]
    if not isinstance(raw_channel, dict):
        raise ScenarioError("channel: expected an object")
    _reject_unknown("channel", raw_channel, _CHANNEL_KEYS)
    channel = ChannelParams(
        bandwidth=_require_number("channel", "B", raw_channel),
        gain_md_relay=_require_number("channel", "h", raw_channel),
        gain_relay_bs=_require_number("channel", "g", raw_channel),
        noise=_require_number("channel", "sigma2", raw_channel),
    )

    raw_compute = doc["compute"]
    if not isinstance(raw_compute, dict):
        raise ScenarioError("compute: expected an object")
    _reject_unknown("compute", raw_compute, _COMPUTE_KEYS)
    compute = ComputeParams(
        kappa_md=_require_number("compute", "kappa_md", raw_compute),
        kappa_relay=_require_number("compute", "kappa_relay", raw_compute),
        f_md_max=_require_number("compute", "f_md_max", raw_compute),
        f_relay_max=_require_number("compute", "f_relay_max", raw_compute),
        f_bs_max=_require_number("compute", "f_bs_max", raw_compute),
    )

    raw_deadlines = doc["deadlines"]
    if not isinstance(raw_deadlines, dict):
        raise ScenarioError("deadlines: expected an object")
    _reject_unknown("deadlines", raw_deadlines, _DEADLINE_KEYS)
    deadline_values = {
        key: _require_number("deadlines", key, raw_deadlines)
        for key in _DEADLINE_KEYS
        if key in raw_deadlines
    }
    deadlines = Deadlines(**deadline_values)

    return Scenario(
        device_chain=device_chain,
        relay_chain=relay_chain,
        channel=channel,
        compute=compute,
        deadlines=deadlines,
    )


def scenario_to_dict(scenario: Scenario) -> dict:
    """Inverse of :func:`scenario_from_dict` (used by sweeps)."""
    doc: dict = {
        "device_tasks": [
            {"d_nats": t.data_nats, "cycles": t.cycles}
            for t in scenario.device_chain.tasks
        ],
        "channel": {
            "B": scenario.channel.bandwidth,
            "h": scenario.channel.gain_md_relay,
            "g": scenario.channel.gain_relay_bs,
            "sigma2": scenario.channel.noise,
        },
        "compute": {
            "kappa_md": scenario.compute.kappa_md,
            "kappa_relay": scenario.compute.kappa_relay,
            "f_md_max": scenario.compute.f_md_max,
            "f_relay_max": scenario.compute.f_relay_max,
            "f_bs_max": scenario.compute.f_bs_max,
        },
        "deadlines": {
            key: value
            for key, value in (
                ("t_s", scenario.deadlines.t_s),
                ("t0", scenario.deadlines.t0),
                ("t_s_th", scenario.deadlines.t_s_th),
                ("t_r_th", scenario.deadlines.t_r_th),
            )
            if value is not None
        },
    }
    if scenario.relay_chain is not None:
        doc["relay_tasks"] = [
            {"d_nats": t.data_nats, "cycles": t.cycles}
            for t in scenario.relay_chain.tasks
        ]
    return doc


def load_scenario(path: str | Path) -> Scenario:
    """Load a scenario JSON file.

    json.JSONDecodeError (with line/column) propagates for malformed
    documents; ScenarioError for schema problems.
    """
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    return scenario_from_dict(doc)
