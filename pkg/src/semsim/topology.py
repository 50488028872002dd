"""Compartment graph and stage-then-commit portion movement.

Moves are recorded against the pre-move world and applied all at once, so a
batch behaves as a single simultaneous update: a portion can arrive in a
compartment that is vacated by the same batch. Staging never touches
compartment contents.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    BatchStateError,
    CapacityExceeded,
    DuplicateMover,
    PortionNotPresent,
    PushWithoutConnection,
)

MEDIA = ("blood_path", "air_path", "other")
CONDUIT_KINDS = ("fluid", "nerve")


@dataclass
class Compartment:
    """A node that holds portions; capacity is enforced after every commit."""

    id: str
    name: str
    medium: str = "other"
    capacity: int | None = 1  # None means unbounded (reservoir)
    structure: str | None = None
    region: str | None = None
    contents: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class Connection:
    from_id: str
    to_id: str
    conduit_kind: str = "fluid"

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.from_id, self.to_id, self.conduit_kind)


@dataclass(frozen=True)
class Circuit:
    """A declared ordered ring over compartments, with branch/merge points."""

    name: str
    order: tuple[str, ...]
    successors: dict[str, tuple[str, ...]] = field(default_factory=dict)


@dataclass(frozen=True)
class Move:
    portion: str
    src: str
    dst: str


@dataclass(frozen=True)
class SplitPlan:
    """A branch-point intent: split the portion at commit, one child per dst."""

    portion: str
    src: str
    dsts: tuple[str, ...]


@dataclass(eq=False)
class MoveBatch:
    moves: list[Move] = field(default_factory=list)
    splits: list[SplitPlan] = field(default_factory=list)
    status: str = "staging"

    @property
    def move_count(self) -> int:
        return len(self.moves) + len(self.splits)

    def movers(self) -> set[str]:
        return {m.portion for m in self.moves} | {s.portion for s in self.splits}


@dataclass
class CommitRecord:
    """What one commit did, kept for validation rules and tests."""

    step: int
    applied: list[tuple[str, str, str]]  # (portion, src, dst) incl. split children
    vacated: list[str]
    merges: list[str]  # merged result portion ids
    split_parents: list[str]
    trace_lines: list[str]


def _check_stageable(world, batch: MoveBatch, portion: str, src: str, dst: str):
    if batch.status != "staging":
        raise BatchStateError("batch already committed")
    if portion in batch.movers():
        raise DuplicateMover(f"portion {portion!r} already staged in this batch")
    p = world.portions.get(portion)
    if p is None or not p.alive:
        raise PortionNotPresent(f"no live portion {portion!r}")
    if p.compartment != src or portion not in world.compartments[src].contents:
        raise PortionNotPresent(f"portion {portion!r} is not in {src!r}")
    if not world.is_connected(src, dst, "fluid"):
        raise PushWithoutConnection(f"no fluid connection {src!r} -> {dst!r}")


def stage_move(world, batch: MoveBatch, portion: str, src: str, dst: str) -> MoveBatch:
    """Record one move. The world is left untouched."""
    _check_stageable(world, batch, portion, src, dst)
    batch.moves.append(Move(portion, src, dst))
    return batch


def stage_split(
    world, batch: MoveBatch, portion: str, src: str, dsts: tuple[str, ...]
) -> MoveBatch:
    """Record a branch-point move: the portion splits at commit, one child per dst."""
    if len(dsts) < 2:
        raise PushWithoutConnection("a split needs at least two destinations")
    for dst in dsts:
        if not world.is_connected(src, dst, "fluid"):
            raise PushWithoutConnection(f"no fluid connection {src!r} -> {dst!r}")
    _check_stageable(world, batch, portion, src, dsts[0])
    batch.splits.append(SplitPlan(portion, src, tuple(dsts)))
    return batch


def commit(world, batch: MoveBatch, circuit: Circuit | None = None) -> CommitRecord:
    """Apply every staged move as one simultaneous update.

    Two portions landing in a capacity-1 compartment merge when the medium is
    blood_path and raise CapacityExceeded otherwise. Returns the record of
    what happened; trace lines ("pushed <X>Blood" per vacated blood
    compartment, then "trigger updates") are on the record for the caller to
    emit, so silent commits stay possible.
    """
    if batch.status != "staging":
        raise BatchStateError("batch already committed")

    # Work out departures and arrivals against the pre-commit world.
    record = CommitRecord(world.clock, [], [], [], [], [])
    arrivals: dict[str, list[str]] = {}

    for move in batch.moves:
        p = world.portions.get(move.portion)
        if p is None or not p.alive or p.compartment != move.src:
            raise PortionNotPresent(f"portion {move.portion!r} left {move.src!r}")
        arrivals.setdefault(move.dst, []).append(move.portion)

    split_children: list[tuple[str, str, str]] = []  # (child, src, dst)
    for plan in batch.splits:
        children = world.split_portion(plan.portion, len(plan.dsts))
        record.split_parents.append(plan.portion)
        for child, dst in zip(children, plan.dsts):
            arrivals.setdefault(dst, []).append(child.id)
            split_children.append((child.id, plan.src, dst))

    # Departures: remove movers (split parents were retired by split_portion).
    vacated: list[str] = []
    for move in batch.moves:
        world.compartments[move.src].contents.remove(move.portion)
        world.portions[move.portion].compartment = None
        vacated.append(move.src)
    for plan in batch.splits:
        src_comp = world.compartments[plan.src]
        for child, src, _dst in split_children:
            if src == plan.src and child in src_comp.contents:
                src_comp.contents.remove(child)
                world.portions[child].compartment = None
        vacated.append(plan.src)

    # Arrivals, with merge-on-collision where the medium permits it.
    for dst, incoming in arrivals.items():
        comp = world.compartments[dst]
        stayers = [pid for pid in comp.contents if world.portions[pid].alive]
        occupancy = len(stayers) + len(incoming)
        if comp.capacity is not None and occupancy > comp.capacity:
            if comp.medium != "blood_path":
                raise CapacityExceeded(
                    f"{occupancy} portions for {dst!r} (capacity {comp.capacity}, "
                    f"merging disallowed for {comp.medium})"
                )
            merged = world.merge_portions(tuple(stayers + incoming))
            record.merges.append(merged.id)
            incoming = [merged.id]
        for pid in incoming:
            world.place_portion(pid, dst)

    record.applied = [(m.portion, m.src, m.dst) for m in batch.moves] + split_children

    # Vacated compartments report in circuit order when one is given.
    if circuit is not None:
        pos = {cid: i for i, cid in enumerate(circuit.order)}
        vacated.sort(key=lambda cid: pos.get(cid, len(pos)))
    record.vacated = vacated

    for cid in vacated:
        comp = world.compartments[cid]
        if comp.medium == "blood_path":
            record.trace_lines.append(f"pushed {comp.name}Blood")
    record.trace_lines.append("trigger updates")

    batch.status = "committed"
    world.last_commits.append(record)
    return record


def ring_push(world, circuit: Circuit) -> MoveBatch:
    """Stage one move per occupied compartment toward its successor(s)."""
    batch = MoveBatch()
    for cid in circuit.order:
        succ = circuit.successors.get(cid, ())
        if not succ:
            raise PushWithoutConnection(f"circuit {circuit.name!r} dead-ends at {cid!r}")
        for pid in list(world.compartments[cid].contents):
            if not world.portions[pid].alive:
                continue
            if len(succ) == 1:
                stage_move(world, batch, pid, cid, succ[0])
            else:
                stage_split(world, batch, pid, cid, tuple(succ))
    return batch
