"""Guarded mechanisms, periodic triggers, nerve signals, and the step kernel.

A mechanism is a Petri-net-style transition: a pure guard over world state
and an ordered effect that runs only when the guard holds. Independent
subsystems are driven by periodic triggers; the kernel interleaves them.

Two execution modes:

* deterministic (default): everything due at a tick runs in a canonical
  order - triggers sorted by (period, name), then signal deliveries in
  emission order, then any leftover batch commit, then validation. The whole
  run is a pure function of (model, seed, periods, phases).
* concurrent: one worker thread per subsystem fires that subsystem's due
  mechanisms; the world is mutated only under a shared lock, and signal
  delivery, commits, and validation stay on the kernel thread. Only causal
  ordering is guaranteed, not a reproducible line sequence.
"""
from __future__ import annotations

import random
import threading
from dataclasses import dataclass, field
from typing import Callable

from . import topology, validation
from .errors import (
    CapacityExceeded,
    DuplicateMover,
    DuplicateNameError,
    FiredWhileDisabled,
    ModelError,
    NoNervePath,
    PortionNotPresent,
    PushWithoutConnection,
    TraceVocabularyError,
    UnknownEntityError,
)
from .topology import Circuit, MoveBatch
from .world import World

MODES = ("deterministic", "concurrent")


@dataclass(frozen=True)
class Condition:
    """One readable conjunct of a guard."""

    description: str
    test: Callable[[World], bool]


@dataclass
class Mechanism:
    name: str
    guard: tuple[Condition, ...]
    effect: Callable[["FireContext"], None]
    side_effects: tuple[Callable[["FireContext"], None], ...] = ()
    subsystem: str = "core"
    on_signal: str | None = None  # compartment this mechanism listens on
    requires: tuple[str, ...] = ()  # compartments/entities the guard and effect read


@dataclass
class Trigger:
    """An independent periodic source that fires one mechanism."""

    name: str
    period: int
    target: str
    phase: int = 0
    enabled: bool = True

    def __post_init__(self):
        if self.period < 1:
            raise ModelError(f"trigger {self.name!r} needs period >= 1")

    def due(self, tick: int) -> bool:
        return self.enabled and tick >= self.phase and (tick - self.phase) % self.period == 0


@dataclass(frozen=True)
class Signal:
    """A nerve-style message between compartments."""

    sender: str
    receiver: str
    payload: str
    via: tuple[str, str, str] | None = None  # the nerve connection key, set on send


@dataclass(frozen=True)
class TraceEvent:
    step: int
    line: str


@dataclass
class FiringRecord:
    mechanism: str
    subsystem: str
    via: str  # "trigger:<name>" or "signal:<payload>"
    guard_values: dict[str, bool]


@dataclass
class GuardFailure:
    mechanism: str
    via: str
    failed: list[str]  # descriptions of the failing conditions


@dataclass
class StepReport:
    step: int
    fired: list[FiringRecord] = field(default_factory=list)
    guard_failures: list[GuardFailure] = field(default_factory=list)
    traces: list[TraceEvent] = field(default_factory=list)
    validation: validation.ValidationReport | None = None

    def describe(self) -> str:
        fired = ", ".join(f.mechanism for f in self.fired) or "-"
        skipped = ", ".join(
            f"{g.mechanism}[{'; '.join(g.failed)}]" for g in self.guard_failures
        )
        nviol = len(self.validation.violations) if self.validation else 0
        text = f"step {self.step}: fired={fired} violations={nviol}"
        if skipped:
            text += f" guard_failed={skipped}"
        return text


def register_mechanism(world: World, mechanism: Mechanism) -> Mechanism:
    if mechanism.name in world.mechanisms:
        raise DuplicateNameError(f"mechanism {mechanism.name!r} already registered")
    if mechanism.on_signal is not None and mechanism.on_signal not in world.compartments:
        raise UnknownEntityError(
            f"mechanism {mechanism.name!r} listens on unknown compartment "
            f"{mechanism.on_signal!r}"
        )
    for ref in mechanism.requires:
        if ref not in world.compartments and not world.has_entity(ref) and ref not in world.circuits:
            raise UnknownEntityError(
                f"mechanism {mechanism.name!r} references unknown element {ref!r}"
            )
    world.mechanisms[mechanism.name] = mechanism
    return mechanism


def register_trigger(world: World, trigger: Trigger) -> Trigger:
    if trigger.name in world.triggers:
        raise DuplicateNameError(f"trigger {trigger.name!r} already registered")
    if trigger.target not in world.mechanisms:
        raise UnknownEntityError(f"trigger target {trigger.target!r} is not a mechanism")
    world.triggers[trigger.name] = trigger
    return trigger


def guard_report(mechanism: Mechanism, world: World) -> dict[str, bool]:
    return {cond.description: bool(cond.test(world)) for cond in mechanism.guard}


def enabled(mechanism: Mechanism, world: World) -> bool:
    return all(cond.test(world) for cond in mechanism.guard)


class FireContext:
    """Handed to an effect; every primitive action goes through it."""

    def __init__(self, kernel: "Kernel", mechanism: Mechanism):
        self.kernel = kernel
        self.world = kernel.world
        self.mechanism = mechanism

    def emit(self, line: str):
        self.kernel.emit_trace(line)

    def set_state(self, entity_id: str, variable: str, label: str):
        return self.world.set_state(entity_id, variable, label)

    def apply(self, transitional):
        return self.world.apply_transitional(transitional)

    def emit_signal(self, sender: str, receiver: str, payload: str):
        return send_signal(self.kernel, Signal(sender, receiver, payload))

    def new_batch(self) -> MoveBatch:
        batch = MoveBatch()
        self.kernel.pending_batches.append(batch)
        return batch

    def stage(self, batch: MoveBatch, portion: str, src: str, dst: str):
        topology.stage_move(self.world, batch, portion, src, dst)

    def ring_push(self, circuit: Circuit) -> MoveBatch:
        batch = topology.ring_push(self.world, circuit)
        self.kernel.pending_batches.append(batch)
        return batch

    def commit(self, batch: MoveBatch, circuit: Circuit | None = None, traced: bool = True):
        record = topology.commit(self.world, batch, circuit)
        if batch in self.kernel.pending_batches:
            self.kernel.pending_batches.remove(batch)
        if traced:
            for line in record.trace_lines:
                self.emit(line)
        return record

    def move(self, portion: str, src: str, dst: str):
        """Stage and commit a single move, silently."""
        batch = MoveBatch()
        topology.stage_move(self.world, batch, portion, src, dst)
        return topology.commit(self.world, batch)

    def fire_if_enabled(self, mechanism_name: str) -> bool:
        """Delegate to a registered sub-mechanism; False when its guard fails."""
        sub = self.world.mechanisms[mechanism_name]
        if not enabled(sub, self.world):
            self.kernel._log_guard_failure(sub, "nested")
            return False
        fire(sub, self.world, self.kernel, via="nested")
        return True


def fire(mechanism: Mechanism, world: World, kernel: "Kernel", via: str = "direct"):
    """Run the effect (and side effects, unless stripped) of an enabled mechanism."""
    values = guard_report(mechanism, world)
    if not all(values.values()):
        failing = [d for d, ok in values.items() if not ok]
        raise FiredWhileDisabled(f"{mechanism.name}: guard failed on {failing}")
    record = FiringRecord(mechanism.name, mechanism.subsystem, via, values)
    kernel.current_report.fired.append(record)
    ctx = FireContext(kernel, mechanism)
    mechanism.effect(ctx)
    if kernel.include_side_effects:
        for action in mechanism.side_effects:
            action(ctx)
    return record


def send_signal(kernel: "Kernel", signal: Signal) -> Signal:
    """Queue a signal for delivery at the next tick over a nerve connection."""
    world = kernel.world
    for cid in (signal.sender, signal.receiver):
        if cid not in world.compartments:
            raise UnknownEntityError(f"no compartment {cid!r} for signal")
    if not world.is_connected(signal.sender, signal.receiver, "nerve"):
        raise NoNervePath(f"no nerve connection {signal.sender!r} -> {signal.receiver!r}")
    routed = Signal(
        signal.sender, signal.receiver, signal.payload,
        via=(signal.sender, signal.receiver, "nerve"),
    )
    kernel.pending_signals.append((kernel.tick + 1, routed))
    return routed


class Kernel:
    """Owns the tick counter, the trace, and the per-step reports."""

    def __init__(
        self,
        world: World,
        seed: int = 0,
        mode: str = "deterministic",
        validate_policy: str = "halt",
        include_side_effects: bool = True,
    ):
        if mode not in MODES:
            raise ModelError(f"mode must be one of {MODES}")
        self.world = world
        self.seed = seed
        self.mode = mode
        self.validate_policy = validate_policy
        self.include_side_effects = include_side_effects
        self.rng = random.Random(seed)
        self.tick = 0
        self.trace: list[TraceEvent] = []
        self.reports: list[StepReport] = []
        self.rules: dict[str, validation.AssertionRule] = {}
        self.pending_signals: list[tuple[int, Signal]] = []
        self.pending_batches: list[MoveBatch] = []
        self.halted = False
        self.halted_at: int | None = None
        self.current_report = StepReport(step=0)
        self._lock = threading.RLock()
        self._wiring_errors: list[tuple[str, str]] = []

    # ------------------------------------------------------------------

    def add_rule(self, rule: validation.AssertionRule):
        return validation.register_rule(self.rules, rule)

    def emit_trace(self, line: str):
        if not self.world.vocabulary.allows(line):
            raise TraceVocabularyError(
                f"line {line!r} is not in the declared vocabulary of "
                f"{self.world.name!r}"
            )
        with self._lock:
            event = TraceEvent(self.tick, line)
            self.trace.append(event)
            self.current_report.traces.append(event)

    def trace_lines(self) -> list[str]:
        return [e.line for e in self.trace]

    def _log_guard_failure(self, mechanism: Mechanism, via: str):
        values = guard_report(mechanism, self.world)
        failed = [d for d, ok in values.items() if not ok]
        self.current_report.guard_failures.append(
            GuardFailure(mechanism.name, via, failed)
        )

    def _dispatch(self, mechanism: Mechanism, via: str):
        """Guard-check and fire one mechanism; wiring bugs become violations."""
        batches_before = len(self.pending_batches)
        try:
            if enabled(mechanism, self.world):
                fire(mechanism, self.world, self, via=via)
            else:
                self._log_guard_failure(mechanism, via)
        except (
            PushWithoutConnection,
            PortionNotPresent,
            DuplicateMover,
            CapacityExceeded,
            NoNervePath,
        ) as exc:
            # Anything this firing staged but never committed is abandoned.
            del self.pending_batches[batches_before:]
            self._wiring_errors.append((type(exc).__name__, f"{mechanism.name}: {exc}"))

    # ------------------------------------------------------------------

    def step(self) -> StepReport:
        """Run everything due at the current tick, then validate."""
        self.world.clock = self.tick
        self.world.last_commits = []
        self._wiring_errors = []
        self.current_report = StepReport(step=self.tick)

        due = [t for t in self.world.triggers.values() if t.due(self.tick)]
        due.sort(key=lambda t: (t.period, t.name))

        if self.mode == "deterministic":
            for trig in due:
                self._dispatch(self.world.mechanisms[trig.target], f"trigger:{trig.name}")
        else:
            self._step_concurrent(due)

        # Signal deliveries, in emission order.
        deliveries = [s for due_at, s in self.pending_signals if due_at <= self.tick]
        self.pending_signals = [
            (due_at, s) for due_at, s in self.pending_signals if due_at > self.tick
        ]
        for signal in deliveries:
            receivers = [
                m for m in self.world.mechanisms.values() if m.on_signal == signal.receiver
            ]
            if not receivers:
                raise UnknownEntityError(
                    f"signal to {signal.receiver!r} has no receiving mechanism"
                )
            for mech in receivers:
                self._dispatch(mech, f"signal:{signal.payload}")

        # Any batch staged but never committed by its mechanism commits now.
        for batch in list(self.pending_batches):
            if batch.status == "staging":
                record = topology.commit(self.world, batch)
                for line in record.trace_lines:
                    self.emit_trace(line)
            self.pending_batches.remove(batch)

        report = self.current_report
        report.validation = validation.validate(
            self.world, self.tick, self.rules, self.validate_policy
        )
        for name, detail in self._wiring_errors:
            report.validation.violations.insert(
                0, validation.Violation(name, {"detail": detail})
            )
        self.reports.append(report)

        if self.validate_policy == "halt" and report.validation.violations:
            self.halted = True
            self.halted_at = self.tick
        self.tick += 1
        return report

    def _step_concurrent(self, due_triggers):
        """Fire this tick's mechanisms from one worker thread per subsystem."""
        by_subsystem: dict[str, list] = {}
        for trig in due_triggers:
            mech = self.world.mechanisms[trig.target]
            by_subsystem.setdefault(mech.subsystem, []).append((trig, mech))
        groups = list(by_subsystem.items())
        self.rng.shuffle(groups)

        def worker(entries):
            for trig, mech in entries:
                with self._lock:
                    self._dispatch(mech, f"trigger:{trig.name}")

        threads = [
            threading.Thread(target=worker, args=(entries,), name=f"subsystem-{name}")
            for name, entries in groups
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()

    def run(self, n_ticks: int) -> list[StepReport]:
        if n_ticks < 0:
            raise ModelError("n_ticks must be >= 0")
        out = []
        for _ in range(n_ticks):
            if self.halted:
                break
            out.append(self.step())
        return out
