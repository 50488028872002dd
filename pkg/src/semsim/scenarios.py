"""Scenarios: targeted override sets applied to a model before or during a run."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ScenarioError, UnknownEntityError
from .world import Annotation, World

DIRECTIVE_OPS = ("disable_trigger", "set_ambient", "set_state", "remove_connection")


@dataclass(frozen=True)
class Directive:
    op: str
    args: tuple

    def __post_init__(self):
        if self.op not in DIRECTIVE_OPS:
            raise ScenarioError(f"unknown scenario directive {self.op!r}")


@dataclass
class Scenario:
    name: str
    overrides: list[Directive] = field(default_factory=list)


def disable_trigger(name: str) -> Directive:
    return Directive("disable_trigger", (name,))


def set_ambient(prop: str, label: str) -> Directive:
    return Directive("set_ambient", (prop, label))


def set_state(entity: str, variable: str, label: str) -> Directive:
    return Directive("set_state", (entity, variable, label))


def remove_connection(src: str, dst: str, conduit_kind: str = "fluid") -> Directive:
    return Directive("remove_connection", (src, dst, conduit_kind))


def apply_scenario(world: World, scenario: Scenario) -> Annotation:
    """Apply every override; returns the annotation recording the scenario."""
    for directive in scenario.overrides:
        if directive.op == "disable_trigger":
            (name,) = directive.args
            if name not in world.triggers:
                raise UnknownEntityError(f"scenario disables unknown trigger {name!r}")
            world.triggers[name].enabled = False
        elif directive.op == "set_ambient":
            world.set_ambient(*directive.args)
        elif directive.op == "set_state":
            world.set_state(*directive.args)
        elif directive.op == "remove_connection":
            world.remove_connection(*directive.args)
    world.scenarios[scenario.name] = scenario
    note = f"scenario {scenario.name!r} applied at step {world.clock}"
    annotation = world.annotate(world.name, "user_comment", note)
    return annotation


def scenario_from_dict(data: dict) -> Scenario:
    if not isinstance(data, dict) or "name" not in data:
        raise ScenarioError("scenario file needs a top-level object with a name")
    overrides = []
    for i, entry in enumerate(data.get("overrides", [])):
        op = entry.get("op")
        if op == "disable_trigger":
            overrides.append(disable_trigger(entry["target"]))
        elif op == "set_ambient":
            overrides.append(set_ambient(entry["property"], entry["label"]))
        elif op == "set_state":
            overrides.append(set_state(entry["target"], entry["variable"], entry["label"]))
        elif op == "remove_connection":
            overrides.append(
                remove_connection(entry["from"], entry["to"], entry.get("kind", "fluid"))
            )
        else:
            raise ScenarioError(f"overrides[{i}]: unknown op {op!r}")
    return Scenario(data["name"], overrides)


def load_scenario(path: str | Path) -> Scenario:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc
    return scenario_from_dict(data)


def heart_stop() -> Scenario:
    """The pacemaker trigger goes silent; breathing keeps its own clock."""
    return Scenario("heart-stop", [disable_trigger("SANode")])


def waterfall_freeze() -> Scenario:
    return Scenario("freeze", [set_state("water", "phase", "solid")])
