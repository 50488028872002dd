"""The model container: every registry plus the entity-level operations.

All mutation during a run happens inside kernel steps; the world itself is a
plain in-memory structure with no locking of its own.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .entities import (
    SUPPORTED_SCALE_KINDS,
    FunctionAssertion,
    KindDef,
    PartSpec,
    Portion,
    QualValue,
    SemObject,
    StateSpace,
    Substance,
    Transitional,
)
from .errors import (
    CyclicInheritanceError,
    DeadSubjectError,
    DuplicateNameError,
    MissingContextError,
    ModelError,
    StateError,
    TransitionalError,
    UnknownEntityError,
)
from .topology import CONDUIT_KINDS, MEDIA, Circuit, Compartment, Connection

AMBIENT_PROPERTIES = ("temperature", "pressure", "humidity", "gravity")

AMBIENT_SCALES = {
    "temperature": StateSpace(
        "temperature", ("below_freezing", "cold", "standard", "warm", "hot"), "ordinal"
    ),
    "pressure": StateSpace("pressure", ("low", "standard", "high"), "ordinal"),
    "humidity": StateSpace("humidity", ("dry", "standard", "humid"), "ordinal"),
    "gravity": StateSpace("gravity", ("none", "low", "standard", "high"), "ordinal"),
}


def stp_ambient() -> dict[str, QualValue]:
    """Standard temperature and pressure: every ambient property at 'standard'."""
    return {name: QualValue(scale, "standard") for name, scale in AMBIENT_SCALES.items()}


@dataclass
class Microworld:
    """Ambient properties of the idealized world frame; defaults at STP."""

    ambient: dict[str, QualValue] = field(default_factory=stp_ambient)

    def __post_init__(self):
        missing = [k for k in AMBIENT_PROPERTIES if k not in self.ambient]
        if missing:
            raise ModelError(f"microworld missing ambient properties {missing}")


ANNOTATION_KINDS = (
    "simplification",
    "idealization",
    "continuous_approximation",
    "cross_granular",
    "stochastic_approximation",
    "typical_example",
    "user_comment",
)


@dataclass(frozen=True)
class Annotation:
    """How the model knowingly departs from reality, pinned to an element."""

    kind: str
    target: str
    note: str

    def __post_init__(self):
        if self.kind not in ANNOTATION_KINDS:
            raise ModelError(f"unknown annotation kind {self.kind!r}")


@dataclass(frozen=True)
class System:
    """A complex object made of interacting mechanisms."""

    name: str
    members: tuple[str, ...]
    feedback: bool = False


@dataclass
class Vocabulary:
    """The closed set of trace lines a model may emit."""

    literals: frozenset[str] = frozenset()
    patterns: tuple[str, ...] = ()

    def allows(self, line: str) -> bool:
        if line in self.literals:
            return True
        return any(re.fullmatch(pat, line) for pat in self.patterns)


class World:
    """Registries for one model plus the operations that mutate them."""

    def __init__(self, name: str):
        self.name = name
        self.kinds: dict[str, KindDef] = {}
        self.substances: dict[str, Substance] = {}
        self.scales: dict[str, StateSpace] = {}
        self.objects: dict[str, SemObject] = {}
        self.portions: dict[str, Portion] = {}
        self.compartments: dict[str, Compartment] = {}
        self.connections: dict[tuple[str, str, str], Connection] = {}
        self.circuits: dict[str, Circuit] = {}
        self.mechanisms: dict = {}  # name -> Mechanism (engine module)
        self.mechanism_specs: list[dict] = []  # declarative build records
        self.triggers: dict = {}  # name -> Trigger
        self.systems: dict[str, System] = {}
        self.scenarios: dict[str, object] = {}
        self.frames: dict = {}
        self.lexicon: dict = {}
        self.bindings: list = []
        self.microworld = Microworld()
        self.annotations: list[Annotation] = []
        self.assertions: list[FunctionAssertion] = []
        self.transitional_log: list[Transitional] = []
        self.vocabulary = Vocabulary()
        self.clock = 0
        self.last_commits: list = []  # CommitRecords, cleared per kernel step
        self._counters: dict[str, int] = {}

    # ------------------------------------------------------------------
    # identifiers

    def next_id(self, prefix: str) -> str:
        n = self._counters.get(prefix, 0)
        candidate = f"{prefix}-{n}"
        while self.has_entity(candidate):  # explicit ids may have claimed slots
            n += 1
            candidate = f"{prefix}-{n}"
        self._counters[prefix] = n + 1
        return candidate

    def entity(self, entity_id: str):
        """Resolve an id to an object, portion, or substance."""
        for registry in (self.objects, self.portions, self.substances):
            if entity_id in registry:
                return registry[entity_id]
        raise UnknownEntityError(f"no entity {entity_id!r}")

    def has_entity(self, entity_id: str) -> bool:
        return (
            entity_id in self.objects
            or entity_id in self.portions
            or entity_id in self.substances
        )

    # ------------------------------------------------------------------
    # scales and substances

    def define_scale(self, space: StateSpace) -> StateSpace:
        if space.scale_kind not in SUPPORTED_SCALE_KINDS:
            raise ModelError(
                f"scale kind {space.scale_kind!r} is declared but not supported; "
                f"use one of {SUPPORTED_SCALE_KINDS}"
            )
        if space.variable in self.scales:
            raise DuplicateNameError(f"scale {space.variable!r} already defined")
        self.scales[space.variable] = space
        return space

    def define_substance(
        self,
        name: str,
        phases: tuple[str, ...] = ("solid", "liquid", "gas"),
        phase: str = "liquid",
        default_properties: dict[str, QualValue] | None = None,
        merge_policy: dict[str, str] | None = None,
    ) -> Substance:
        if name in self.substances:
            raise DuplicateNameError(f"substance {name!r} already defined")
        space = StateSpace("phase", tuple(phases), "nominal")
        sub = Substance(name, space, phase, default_properties or {}, merge_policy or {})
        self.substances[name] = sub
        return sub

    # ------------------------------------------------------------------
    # kinds

    def define_kind(
        self,
        name: str,
        parent: str | None = None,
        state_spaces: tuple[StateSpace, ...] = (),
        part_schema: tuple[PartSpec, ...] = (),
        granularity: str = "object",
        substance: str | None = None,
    ) -> KindDef:
        if name in self.kinds:
            raise DuplicateNameError(f"kind {name!r} already defined")
        if parent is not None:
            if parent == name:
                raise CyclicInheritanceError(f"kind {name!r} cannot be its own parent")
            if parent not in self.kinds:
                raise UnknownEntityError(f"parent kind {parent!r} not defined")
        for space in state_spaces:
            if space.scale_kind not in SUPPORTED_SCALE_KINDS:
                raise ModelError(
                    f"kind {name!r} uses unsupported scale kind {space.scale_kind!r}"
                )
        for spec in part_schema:
            if spec.part_kind not in self.kinds and spec.part_kind != name:
                raise UnknownEntityError(
                    f"part kind {spec.part_kind!r} of role {spec.role_name!r} not defined"
                )
        if substance is not None and substance not in self.substances:
            raise UnknownEntityError(f"substance {substance!r} not defined")
        kind = KindDef(name, parent, tuple(state_spaces), tuple(part_schema), granularity, substance)
        self.kinds[name] = kind
        self._check_acyclic(kind)
        return kind

    def _check_acyclic(self, kind: KindDef):
        seen = set()
        cur: KindDef | None = kind
        while cur is not None:
            if cur.name in seen:
                del self.kinds[kind.name]
                raise CyclicInheritanceError(f"inheritance cycle through {cur.name!r}")
            seen.add(cur.name)
            cur = self.kinds.get(cur.parent) if cur.parent else None

    def ancestry(self, kind_name: str) -> list[KindDef]:
        """Root-first chain of kinds ending at kind_name."""
        chain = []
        cur = self.kinds.get(kind_name)
        if cur is None:
            raise UnknownEntityError(f"no kind {kind_name!r}")
        while cur is not None:
            chain.append(cur)
            cur = self.kinds.get(cur.parent) if cur.parent else None
        chain.reverse()
        return chain

    def effective_state_spaces(self, kind_name: str) -> dict[str, StateSpace]:
        spaces: dict[str, StateSpace] = {}
        for kind in self.ancestry(kind_name):
            for space in kind.state_spaces:  # child overrides by variable name
                spaces[space.variable] = space
        return spaces

    def effective_part_schema(self, kind_name: str) -> dict[str, PartSpec]:
        schema: dict[str, PartSpec] = {}
        for kind in self.ancestry(kind_name):
            for spec in kind.part_schema:  # child overrides by role name
                schema[spec.role_name] = spec
        return schema

    def effective_substance(self, kind_name: str) -> str | None:
        sub = None
        for kind in self.ancestry(kind_name):
            if kind.substance is not None:
                sub = kind.substance
        return sub

    # ------------------------------------------------------------------
    # instantiation

    def instantiate(self, kind_name: str, entity_id: str | None = None, _stack=()):
        """Create an instance: states at their first labels, parts at minimum counts.

        Kinds tied to a substance instantiate as Portions at (0, 0) with the
        first location label; everything else becomes a SemObject.
        """
        if kind_name not in self.kinds:
            raise UnknownEntityError(f"no kind {kind_name!r}")
        substance = self.effective_substance(kind_name)
        if substance is not None:
            return self._instantiate_portion(kind_name, substance, entity_id)

        if kind_name in _stack:
            raise ModelError(
                f"part schema recursion: {kind_name!r} contains itself with minimum > 0"
            )
        obj_id = entity_id or self.next_id(kind_name)
        if self.has_entity(obj_id):
            raise DuplicateNameError(f"entity id {obj_id!r} already in use")
        states = {
            var: space.first for var, space in self.effective_state_spaces(kind_name).items()
        }
        obj = SemObject(obj_id, kind_name, [], states, {})
        self.objects[obj_id] = obj
        for role, spec in self.effective_part_schema(kind_name).items():
            for _ in range(spec.minimum):
                child = self.instantiate(spec.part_kind, _stack=_stack + (kind_name,))
                obj.parts.append((role, child.id))
        self._log(Transitional("birth", (obj_id,), (kind_name,), self.clock))
        return obj

    def _instantiate_portion(self, kind_name, substance_name, entity_id):
        sub = self.substances[substance_name]
        pid = entity_id or self.next_id(substance_name)
        if self.has_entity(pid):
            raise DuplicateNameError(f"entity id {pid!r} already in use")
        spaces = self.effective_state_spaces(kind_name)
        location = spaces["Location"].first if "Location" in spaces else "null"
        portion = Portion(
            pid,
            substance_name,
            kind=kind_name,
            properties=dict(sub.default_properties),
            x=0,
            y=0,
            location_state=location,
        )
        self.portions[pid] = portion
        self._log(Transitional("birth", (pid,), (kind_name,), self.clock))
        return portion

    def create_portion(
        self,
        substance_name: str,
        entity_id: str | None = None,
        compartment: str | None = None,
        properties: dict[str, str] | None = None,
    ) -> Portion:
        """Create a portion directly (no kind), optionally placed in a compartment."""
        if substance_name not in self.substances:
            raise UnknownEntityError(f"no substance {substance_name!r}")
        sub = self.substances[substance_name]
        pid = entity_id or self.next_id(substance_name)
        if self.has_entity(pid):
            raise DuplicateNameError(f"entity id {pid!r} already in use")
        props = dict(sub.default_properties)
        for key, label in (properties or {}).items():
            props[key] = QualValue(self._property_scale(key), label)
        portion = Portion(pid, substance_name, properties=props)
        self.portions[pid] = portion
        if compartment is not None:
            self.place_portion(pid, compartment)
        self._log(Transitional("birth", (pid,), (substance_name,), self.clock))
        return portion

    def _property_scale(self, prop: str) -> StateSpace:
        if prop not in self.scales:
            raise StateError(f"no scale defined for property {prop!r}")
        return self.scales[prop]

    # ------------------------------------------------------------------
    # state changes

    def set_state(self, entity_id: str, variable: str, label: str) -> Transitional:
        """Move one state variable to a new label, recording the transitional."""
        ent = self.entity(entity_id)
        if isinstance(ent, Substance):
            if variable not in ("phase", "Phase"):
                raise StateError(f"substances only have a phase, not {variable!r}")
            ent.phase_space.index(label)
            ent.phase = label
        elif isinstance(ent, Portion):
            if not ent.alive:
                raise DeadSubjectError(f"portion {entity_id!r} is dead")
            self._set_portion_state(ent, variable, label)
        else:
            if not ent.alive:
                raise DeadSubjectError(f"object {entity_id!r} is dead")
            spaces = self.effective_state_spaces(ent.kind)
            if variable not in spaces:
                raise StateError(
                    f"variable {variable!r} not declared for kind {ent.kind!r}"
                )
            spaces[variable].index(label)
            ent.states[variable] = label
        t = Transitional("state_change", (entity_id,), ((variable, label),), self.clock)
        self._log(t)
        return t

    def _set_portion_state(self, portion: Portion, variable: str, label: str):
        if variable == "Location":
            if portion.kind is not None:
                spaces = self.effective_state_spaces(portion.kind)
                if "Location" in spaces:
                    spaces["Location"].index(label)
            portion.location_state = label
        elif variable in portion.properties:
            scale = portion.properties[variable].scale
            portion.properties[variable] = QualValue(scale, label)
        else:
            raise StateError(
                f"portion {portion.id!r} has no property or location variable {variable!r}"
            )

    # ------------------------------------------------------------------
    # transitionals

    def apply_transitional(self, t: Transitional):
        """Apply a birth/death/split/merge/state_change described as data."""
        if t.kind == "state_change":
            applied = [self.set_state(s, t.results[0][0], t.results[0][1]) for s in t.subjects]
            return applied
        if t.kind == "birth":
            kind_or_sub = t.results[0]
            if kind_or_sub in self.kinds:
                return self.instantiate(kind_or_sub)
            return self.create_portion(kind_or_sub)
        self._require_live(t.subjects)
        if t.kind == "death":
            return [self.kill(s) for s in t.subjects]
        if t.kind == "split":
            return self.split_portion(t.subjects[0], len(t.results))
        if t.kind == "merge":
            # The single result names a destination compartment when it is
            # one; otherwise it is a placeholder for the portion to come.
            dest = t.results[0] if t.results and t.results[0] in self.compartments else None
            return self.merge_portions(t.subjects, dest)
        raise TransitionalError(f"cannot apply transitional kind {t.kind!r}")

    def _require_live(self, subjects):
        for s in subjects:
            ent = self.entity(s)
            if not getattr(ent, "alive", True):
                raise DeadSubjectError(f"subject {s!r} is dead")

    def kill(self, entity_id: str) -> Transitional:
        ent = self.entity(entity_id)
        if not getattr(ent, "alive", True):
            raise DeadSubjectError(f"subject {entity_id!r} is already dead")
        ent.alive = False
        if isinstance(ent, Portion) and ent.compartment is not None:
            self.compartments[ent.compartment].contents.remove(ent.id)
            ent.compartment = None
        t = Transitional("death", (entity_id,), (), self.clock)
        self._log(t)
        return t

    def split_portion(self, portion_id: str, n_children: int) -> list[Portion]:
        """Retire the portion; children copy its properties, provenance links back."""
        if n_children < 2:
            raise TransitionalError("split needs at least two results")
        parent = self.portions.get(portion_id)
        if parent is None:
            raise UnknownEntityError(f"no portion {portion_id!r}")
        if not parent.alive:
            raise DeadSubjectError(f"portion {portion_id!r} is dead")
        children = []
        for _ in range(n_children):
            child = Portion(
                self.next_id(parent.substance),
                parent.substance,
                kind=parent.kind,
                properties=dict(parent.properties),
                x=parent.x,
                y=parent.y,
                compartment=parent.compartment,
                location_state=parent.location_state,
                provenance=(parent.id,),
            )
            self.portions[child.id] = child
            if parent.compartment is not None:
                self.compartments[parent.compartment].contents.append(child.id)
            children.append(child)
        parent.alive = False
        if parent.compartment is not None:
            self.compartments[parent.compartment].contents.remove(parent.id)
            parent.compartment = None
        self._log(
            Transitional(
                "split", (portion_id,), tuple(c.id for c in children), self.clock
            )
        )
        return children

    def merge_portions(self, portion_ids, destination: str | None = None) -> Portion:
        """Retire the inputs and create one result.

        Qualitative properties follow the substance's merge policy per
        property (min/max by ordinal rank, or the first parent's value).
        """
        ids = tuple(portion_ids)
        if len(ids) < 2:
            raise TransitionalError("merge needs at least two subjects")
        parents = []
        for pid in ids:
            p = self.portions.get(pid)
            if p is None:
                raise UnknownEntityError(f"no portion {pid!r}")
            if not p.alive:
                raise DeadSubjectError(f"portion {pid!r} is dead")
            parents.append(p)
        substance = parents[0].substance
        if any(p.substance != substance for p in parents):
            raise TransitionalError("cannot merge portions of different substances")
        policy = self.substances[substance].merge_policy

        merged_props: dict[str, QualValue] = {}
        keys: list[str] = []
        for p in parents:
            for key in p.properties:
                if key not in keys:
                    keys.append(key)
        for key in keys:
            values = [p.properties[key] for p in parents if key in p.properties]
            rule = policy.get(key, "first")
            if rule == "min":
                merged_props[key] = min(values, key=lambda v: v.rank())
            elif rule == "max":
                merged_props[key] = max(values, key=lambda v: v.rank())
            else:
                merged_props[key] = values[0]

        result = Portion(
            self.next_id(substance),
            substance,
            kind=parents[0].kind,
            properties=merged_props,
            x=parents[0].x,
            y=parents[0].y,
            location_state=parents[0].location_state,
            provenance=ids,
        )
        self.portions[result.id] = result
        for p in parents:
            p.alive = False
            if p.compartment is not None:
                self.compartments[p.compartment].contents.remove(p.id)
                p.compartment = None
        if destination is not None:
            self.place_portion(result.id, destination)
        self._log(Transitional("merge", ids, (result.id,), self.clock))
        return result

    def _log(self, t: Transitional):
        self.transitional_log.append(t)

    # ------------------------------------------------------------------
    # parts and cardinality

    def add_part(self, parent_id: str, role: str, child_id: str):
        obj = self.objects[parent_id]
        self.entity(child_id)
        obj.parts.append((role, child_id))

    def remove_part(self, parent_id: str, role: str, child_id: str):
        self.objects[parent_id].parts.remove((role, child_id))

    def check_cardinality(self, object_id: str) -> list[tuple[str, int, frozenset[int]]]:
        """Report (role, actual count, allowed set) for every violated role."""
        obj = self.objects.get(object_id)
        if obj is None:
            raise UnknownEntityError(f"no object {object_id!r}")
        violations = []
        for role, spec in self.effective_part_schema(obj.kind).items():
            count = len(obj.parts_in_role(role))
            if count not in spec.cardinality:
                violations.append((role, count, spec.cardinality))
        return violations

    # ------------------------------------------------------------------
    # functions in context

    def assert_function(self, subject: str, label: str, context: str | None) -> FunctionAssertion:
        if not self.has_entity(subject) and subject not in self.compartments:
            raise UnknownEntityError(f"no subject {subject!r}")
        valid_context = context is not None and (
            context in self.mechanisms
            or context in self.systems
            or context in self.scenarios
        )
        if not valid_context:
            raise MissingContextError(
                f"function {label!r} needs a mechanism, system, or scenario context; "
                f"got {context!r}"
            )
        fa = FunctionAssertion(subject, label, context)
        self.assertions.append(fa)
        return fa

    # ------------------------------------------------------------------
    # topology registry

    def add_compartment(
        self,
        name: str,
        medium: str = "other",
        capacity: int | None = 1,
        structure: str | None = None,
        region: str | None = None,
    ) -> Compartment:
        if name in self.compartments:
            raise DuplicateNameError(f"compartment {name!r} already defined")
        if medium not in MEDIA:
            raise ModelError(f"medium must be one of {MEDIA}")
        if capacity is not None and capacity < 1:
            raise ModelError("capacity must be at least 1 (or None for unbounded)")
        comp = Compartment(name, name, medium, capacity, structure, region)
        self.compartments[name] = comp
        return comp

    def connect(self, from_id: str, to_id: str, conduit_kind: str = "fluid") -> Connection:
        for cid in (from_id, to_id):
            if cid not in self.compartments:
                raise UnknownEntityError(f"no compartment {cid!r}")
        if conduit_kind not in CONDUIT_KINDS:
            raise ModelError(f"conduit kind must be one of {CONDUIT_KINDS}")
        conn = Connection(from_id, to_id, conduit_kind)
        if conn.key in self.connections:
            raise DuplicateNameError(f"connection {conn.key} already exists")
        self.connections[conn.key] = conn
        return conn

    def is_connected(self, from_id: str, to_id: str, conduit_kind: str = "fluid") -> bool:
        return (from_id, to_id, conduit_kind) in self.connections

    def remove_connection(self, from_id: str, to_id: str, conduit_kind: str = "fluid"):
        key = (from_id, to_id, conduit_kind)
        if key not in self.connections:
            raise UnknownEntityError(f"no connection {key}")
        del self.connections[key]

    def define_circuit(self, name: str, order, successors) -> Circuit:
        if name in self.circuits:
            raise DuplicateNameError(f"circuit {name!r} already defined")
        circuit = Circuit(name, tuple(order), {k: tuple(v) for k, v in successors.items()})
        for src, dsts in circuit.successors.items():
            for dst in dsts:
                if not self.is_connected(src, dst, "fluid"):
                    raise ModelError(
                        f"circuit {name!r} references missing connection {src!r} -> {dst!r}"
                    )
        self.circuits[name] = circuit
        return circuit

    def place_portion(self, portion_id: str, compartment_id: str):
        """Put a portion in a compartment, keeping position fields coherent."""
        portion = self.portions[portion_id]
        comp = self.compartments[compartment_id]
        if portion.compartment is not None:
            self.compartments[portion.compartment].contents.remove(portion_id)
        comp.contents.append(portion_id)
        portion.compartment = compartment_id
        portion.location_state = comp.name

    def occupant(self, compartment_id: str) -> Portion | None:
        """The single live portion in a compartment, or None."""
        for pid in self.compartments[compartment_id].contents:
            p = self.portions[pid]
            if p.alive:
                return p
        return None

    def live_portions(self, substance: str | None = None) -> list[Portion]:
        return [
            p
            for p in self.portions.values()
            if p.alive and (substance is None or p.substance == substance)
        ]

    # ------------------------------------------------------------------
    # microworld, annotations, systems

    def set_ambient(self, prop: str, label: str) -> Microworld:
        if prop not in AMBIENT_PROPERTIES:
            raise ModelError(
                f"unknown ambient property {prop!r}; expected one of {AMBIENT_PROPERTIES}"
            )
        self.microworld.ambient[prop] = QualValue(AMBIENT_SCALES[prop], label)
        return self.microworld

    def ambient(self, prop: str) -> str:
        if prop not in AMBIENT_PROPERTIES:
            raise ModelError(f"unknown ambient property {prop!r}")
        return self.microworld.ambient[prop].level

    def _element_exists(self, target: str) -> bool:
        return (
            self.has_entity(target)
            or target in self.compartments
            or target in self.kinds
            or target in self.mechanisms
            or target in self.systems
            or target in self.circuits
            or target == self.name
        )

    def annotate(self, target: str, kind: str, note: str) -> Annotation:
        if not self._element_exists(target):
            raise UnknownEntityError(f"annotation target {target!r} does not exist")
        ann = Annotation(kind, target, note)
        self.annotations.append(ann)
        return ann

    def list_annotations(self, target: str | None = None, kind: str | None = None):
        return [
            a
            for a in self.annotations
            if (target is None or a.target == target) and (kind is None or a.kind == kind)
        ]

    def define_system(self, name: str, members, feedback: bool = False) -> System:
        if name in self.systems:
            raise DuplicateNameError(f"system {name!r} already defined")
        for m in members:
            if m not in self.mechanisms:
                raise UnknownEntityError(f"system member {m!r} is not a mechanism")
        system = System(name, tuple(members), feedback)
        self.systems[name] = system
        return system
