"""Frame layer: structured definitions bound onto executable mechanism templates.

A frame names its core and non-core elements; a binding maps every core
element to a model entity (or a path description) and can then be turned
into a runnable mechanism. Three frames ship: a generic Motion parent,
Fluidic_Motion, and Natural_Features.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .engine import Condition, Mechanism, register_mechanism
from .errors import (
    DuplicateNameError,
    MissingCoreElement,
    ModelError,
    UnknownEntityError,
)
from .topology import Circuit
from .world import World


@dataclass(frozen=True)
class Frame:
    name: str
    core_elements: tuple[str, ...]
    non_core_elements: tuple[str, ...] = ()
    definition_text: str = ""

    def __post_init__(self):
        if not self.core_elements:
            raise ModelError(f"frame {self.name!r} needs at least one core element")
        overlap = set(self.core_elements) & set(self.non_core_elements)
        if overlap:
            raise ModelError(
                f"frame {self.name!r}: elements {sorted(overlap)} are both core and non-core"
            )


@dataclass(frozen=True)
class LexicalEntry:
    word: str
    frame: str
    definition_text: str = ""


@dataclass(frozen=True)
class PathSegment:
    """One leg of a path. slope is a (rise, run) pair in ordinal units, so a
    unit of traversal displaces the mover by (run, rise)."""

    length: int
    width: int = 1
    slope: tuple[int, int] = (0, 1)
    label: str | None = None  # location label while on this segment

    def __post_init__(self):
        if self.length <= 0:
            raise ModelError("segment length must be positive")

    @property
    def unit_delta(self) -> tuple[int, int]:
        rise, run = self.slope
        return (run, rise)


@dataclass(frozen=True)
class PathSpec:
    segments: tuple[PathSegment, ...]

    def __post_init__(self):
        if not self.segments:
            raise ModelError("a path needs at least one segment")

    def total_displacement(self) -> tuple[int, int]:
        dx = sum(seg.length * seg.unit_delta[0] for seg in self.segments)
        dy = sum(seg.length * seg.unit_delta[1] for seg in self.segments)
        return (dx, dy)


@dataclass
class FrameBinding:
    frame: Frame
    element_map: dict[str, object] = field(default_factory=dict)
    produced_mechanism: str | None = None


def standard_frames() -> dict[str, Frame]:
    return {
        "Motion": Frame(
            "Motion",
            core_elements=("Theme", "Source", "Goal", "Path"),
            definition_text="Some entity starts out in one place and ends up in another.",
        ),
        "Fluidic_Motion": Frame(
            "Fluidic_Motion",
            core_elements=("Fluid", "Source", "Goal", "Path"),
            non_core_elements=("Configuration",),
            definition_text="A fluid moves from a source to a goal along a path or within an area.",
        ),
        "Natural_Features": Frame(
            "Natural_Features",
            core_elements=("Locale",),
            non_core_elements=("Constituent_parts", "Container_possessor"),
            definition_text="A geographical location defined by shape, including bodies of water.",
        ),
    }


def define_frame(
    world: World,
    name: str,
    core: tuple[str, ...],
    non_core: tuple[str, ...] = (),
    text: str = "",
) -> Frame:
    if name in world.frames:
        raise DuplicateNameError(f"frame {name!r} already defined")
    frame = Frame(name, tuple(core), tuple(non_core), text)
    world.frames[name] = frame
    return frame


def add_lexical_entry(world: World, word: str, frame: str, text: str = "") -> LexicalEntry:
    if frame not in world.frames:
        raise UnknownEntityError(f"no frame {frame!r} for lexical entry {word!r}")
    entry = LexicalEntry(word, frame, text)
    world.lexicon[word] = entry
    return entry


def _element_resolvable(world: World, value) -> bool:
    if isinstance(value, (PathSpec, Circuit, dict)):
        return True
    if isinstance(value, str):
        return (
            world.has_entity(value)
            or value in world.compartments
            or value in world.circuits
        )
    return False


def bind(world: World, frame_name: str, element_map: dict[str, object]) -> FrameBinding:
    """Bind frame elements to model entities; every core element is required."""
    frame = world.frames.get(frame_name)
    if frame is None:
        raise UnknownEntityError(f"no frame {frame_name!r}")
    for element in frame.core_elements:
        if element not in element_map:
            raise MissingCoreElement(element)
    known = set(frame.core_elements) | set(frame.non_core_elements)
    for element, value in element_map.items():
        if element not in known:
            raise ModelError(f"frame {frame_name!r} has no element {element!r}")
        if not _element_resolvable(world, value):
            raise UnknownEntityError(
                f"element {element!r} maps to unresolvable value {value!r}"
            )
    binding = FrameBinding(frame, dict(element_map))
    world.bindings.append(binding)
    return binding


def _fluid_guard(world_substance: str) -> Condition:
    return Condition(
        f"{world_substance} is fluid",
        lambda w, s=world_substance: w.substances[s].is_fluid,
    )


def instantiate_fluidic_motion(
    world: World,
    binding: FrameBinding,
    name: str | None = None,
    n_portions: int | None = None,
    portion_kind: str | None = None,
) -> Mechanism:
    """Turn a Fluidic_Motion binding into a runnable mechanism.

    Path bound to a PathSpec gives coordinate motion: each firing advances
    the active portion one unit, pooling it at the goal. Path bound to a
    declared circuit gives one simultaneous hop for every portion per firing.
    Source and Goal bound to directly connected compartments give a
    single-portion hop per firing.
    """
    if binding.frame.name != "Fluidic_Motion":
        raise ModelError("only Fluidic_Motion bindings instantiate here")
    fluid = binding.element_map["Fluid"]
    if not isinstance(fluid, str) or fluid not in world.substances:
        raise ModelError(f"Fluid must name a substance, got {fluid!r}")
    path = binding.element_map.get("Path")
    mech_name = name or f"Flow({fluid})"

    if isinstance(path, PathSpec):
        mech = _coordinate_flow(world, binding, mech_name, fluid, path, n_portions, portion_kind)
    else:
        circuit = None
        if isinstance(path, Circuit):
            circuit = path
        elif isinstance(path, str) and path in world.circuits:
            circuit = world.circuits[path]
        if circuit is not None:
            mech = _circuit_flow(world, mech_name, fluid, circuit)
        else:
            source = binding.element_map.get("Source")
            goal = binding.element_map.get("Goal")
            if source in world.compartments and goal in world.compartments:
                mech = _hop_flow(world, mech_name, fluid, source, goal)
            else:
                raise ModelError(
                    "binding satisfies neither path mode: need a PathSpec, a "
                    "declared circuit, or Source/Goal compartments"
                )
    binding.produced_mechanism = mech.name
    world.mechanism_specs.append(
        {
            "name": mech.name,
            "builtin": "fluidic_motion",
            "params": {
                "binding": world.bindings.index(binding),
                "n_portions": n_portions,
                "portion_kind": portion_kind,
            },
        }
    )
    return mech


def _coordinate_flow(world, binding, mech_name, fluid, path, n_portions, portion_kind):
    goal = binding.element_map.get("Goal")
    goal_label = goal if isinstance(goal, str) else "pool"

    # Traversal cursor, shared across firings of this one mechanism.
    state = {"index": 0, "portion": None, "segment": 0, "unit": 0}

    def remaining(w) -> bool:
        return n_portions is None or state["index"] < n_portions or state["portion"] is not None

    def effect(ctx):
        w = ctx.world
        if state["portion"] is None:
            pid = f"{fluid}-{state['index']}"
            if portion_kind is not None:
                portion = w.instantiate(portion_kind, entity_id=pid)
            else:
                portion = w.create_portion(fluid, entity_id=pid)
            if portion.x is None:
                portion.x, portion.y = 0, 0
            state["portion"] = portion.id
            state["segment"] = 0
            state["unit"] = 0
        portion = w.portions[state["portion"]]
        seg = path.segments[state["segment"]]
        if state["unit"] == 0 and seg.label is not None:
            w.set_state(portion.id, "Location", seg.label)
        dx, dy = seg.unit_delta
        portion.x += dx
        portion.y += dy
        state["unit"] += 1
        if state["unit"] >= seg.length:
            state["segment"] += 1
            state["unit"] = 0
            if state["segment"] >= len(path.segments):
                w.set_state(portion.id, "Location", goal_label)
                ctx.emit(f"{state['index']} {goal_label}")
                state["portion"] = None
                state["index"] += 1

    return register_mechanism(
        world,
        Mechanism(
            mech_name,
            guard=(_fluid_guard(fluid), Condition("portions remain", remaining)),
            effect=effect,
            subsystem="flow",
            requires=(fluid,),
        ),
    )


def _circuit_flow(world, mech_name, fluid, circuit):
    def effect(ctx):
        batch = ctx.ring_push(circuit)
        ctx.commit(batch, circuit=circuit)

    return register_mechanism(
        world,
        Mechanism(
            mech_name,
            guard=(_fluid_guard(fluid),),
            effect=effect,
            subsystem="flow",
            requires=(fluid, circuit.name),
        ),
    )


def _hop_flow(world, mech_name, fluid, source, goal):
    if not world.is_connected(source, goal, "fluid"):
        raise ModelError(f"no fluid connection {source!r} -> {goal!r} for hop flow")

    def occupied(w) -> bool:
        return w.occupant(source) is not None

    def effect(ctx):
        portion = ctx.world.occupant(source)
        ctx.move(portion.id, source, goal)

    return register_mechanism(
        world,
        Mechanism(
            mech_name,
            guard=(_fluid_guard(fluid), Condition(f"{source} occupied", occupied)),
            effect=effect,
            subsystem="flow",
            requires=(fluid, source, goal),
        ),
    )
