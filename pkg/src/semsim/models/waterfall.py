"""Waterfall reference model: water portions traverse a shallow bed, then a drop.

Each firing of the flow mechanism carries one portion through its whole
journey (the next portion is only created once the previous one pooled), so
a run of n ticks pools exactly n portions and prints "<i> pool" for each.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..engine import Condition, Mechanism, Trigger, register_mechanism, register_trigger
from ..entities import StateSpace
from ..frames import (
    FrameBinding,
    PathSegment,
    PathSpec,
    add_lexical_entry,
    bind,
    instantiate_fluidic_motion,
    standard_frames,
)
from ..world import Vocabulary, World

LOCATION_LABELS = ("null", "upper", "drop", "pool")


@dataclass(frozen=True)
class WaterfallConfig:
    upper_bed_length: int = 1000
    vertical_drop: int = 100
    upper_delta: tuple[int, int] = (10, -1)  # (dx, dy) per unit on the bed
    drop_delta: tuple[int, int] = (1, -10)  # (dx, dy) per unit on the drop
    labels: tuple[str, str, str] = ("upper", "drop", "pool")

    def __post_init__(self):
        if self.upper_bed_length <= 0 or self.vertical_drop <= 0:
            raise ValueError("bed length and drop must be positive")


def water_flowing_mechanism(world: World, params: dict) -> Mechanism:
    """Factory for the hand-built flow; also used when loading model files."""
    config = WaterfallConfig(
        upper_bed_length=params.get("upper_bed_length", 1000),
        vertical_drop=params.get("vertical_drop", 100),
        upper_delta=tuple(params.get("upper_delta", (10, -1))),
        drop_delta=tuple(params.get("drop_delta", (1, -10))),
        labels=tuple(params.get("labels", ("upper", "drop", "pool"))),
    )
    n_portions = params.get("n_portions")
    upper_label, drop_label, pool_label = config.labels

    def remaining(w) -> bool:
        created = len([p for p in w.portions.values() if p.substance == "water"])
        return n_portions is None or created < n_portions

    def water_is_fluid(w) -> bool:
        return w.substances["water"].is_fluid

    def effect(ctx):
        w = ctx.world
        i = len([p for p in w.portions.values() if p.substance == "water"])
        portion = w.instantiate("WaterPortion", entity_id=f"water-{i}")
        w.set_state(portion.id, "Location", upper_label)
        dx, dy = config.upper_delta
        for _ in range(config.upper_bed_length):
            portion.x += dx
            portion.y += dy
        w.set_state(portion.id, "Location", drop_label)
        dx, dy = config.drop_delta
        for _ in range(config.vertical_drop):
            portion.x += dx
            portion.y += dy
        w.set_state(portion.id, "Location", pool_label)
        ctx.emit(f"{i} {pool_label}")

    mech = Mechanism(
        params.get("name", "WaterFlowing"),
        guard=(
            Condition("water is fluid", water_is_fluid),
            Condition("portions remain", remaining),
        ),
        effect=effect,
        subsystem="flow",
        requires=("water",),
    )
    register_mechanism(world, mech)
    world.mechanism_specs.append(
        {"name": mech.name, "builtin": "water_flowing", "params": dict(params)}
    )
    return mech


def freeze_watch_mechanism(world: World, params: dict) -> Mechanism:
    """Water turns solid whenever the ambient temperature is below freezing."""
    substance = params.get("substance", "water")

    def freezing(w) -> bool:
        return w.ambient("temperature") == "below_freezing"

    def not_solid(w, s=substance) -> bool:
        return w.substances[s].phase != "solid"

    def effect(ctx):
        ctx.set_state(substance, "phase", "solid")

    mech = Mechanism(
        params.get("name", "FreezeWatch"),
        guard=(
            Condition("ambient temperature below freezing", freezing),
            Condition(f"{substance} not yet solid", not_solid),
        ),
        effect=effect,
        subsystem="ambient",
        requires=(substance,),
    )
    register_mechanism(world, mech)
    world.mechanism_specs.append(
        {"name": mech.name, "builtin": "freeze_watch", "params": dict(params)}
    )
    return mech


def _base_world(config: WaterfallConfig, name: str) -> World:
    world = World(name)
    world.vocabulary = Vocabulary(patterns=(r"\d+ pool",))
    world.define_substance("water", phase="liquid")
    world.define_kind(
        "WaterPortion",
        state_spaces=(StateSpace("Location", ("null",) + config.labels),),
        granularity="portion",
        substance="water",
    )
    world.frames.update(standard_frames())
    add_lexical_entry(world, "flowing", "Fluidic_Motion",
                      "to move with a continual change of place among the constituent particles")
    add_lexical_entry(world, "waterfall", "Natural_Features")
    world.annotate(
        "WaterPortion",
        "idealization",
        "portions stay unified while they move; real fluid would not retain continuity",
    )
    return world


def build_waterfall(
    config: WaterfallConfig = WaterfallConfig(), n_portions: int | None = None
) -> World:
    """Hand-built flow: one firing takes one portion from birth to the pool."""
    if n_portions is not None and n_portions < 0:
        raise ValueError("n_portions must be >= 0")
    world = _base_world(config, "waterfall")
    water_flowing_mechanism(
        world,
        {
            "upper_bed_length": config.upper_bed_length,
            "vertical_drop": config.vertical_drop,
            "upper_delta": list(config.upper_delta),
            "drop_delta": list(config.drop_delta),
            "labels": list(config.labels),
            "n_portions": n_portions,
        },
    )
    register_trigger(world, Trigger("Flow", period=1, target="WaterFlowing"))
    world.define_system("waterfall-flow", ["WaterFlowing"])
    return world


def waterfall_path(config: WaterfallConfig = WaterfallConfig()) -> PathSpec:
    """The two-segment path implied by the per-unit deltas."""
    upper_label, drop_label, _ = config.labels
    return PathSpec(
        (
            PathSegment(
                config.upper_bed_length,
                slope=(config.upper_delta[1], config.upper_delta[0]),
                label=upper_label,
            ),
            PathSegment(
                config.vertical_drop,
                slope=(config.drop_delta[1], config.drop_delta[0]),
                label=drop_label,
            ),
        )
    )


def build_waterfall_from_frames(
    config: WaterfallConfig = WaterfallConfig(), n_portions: int | None = None
) -> tuple[World, FrameBinding]:
    """The same waterfall, defined through a Fluidic_Motion binding.

    The frame mechanism advances one unit per firing, so it needs
    n_portions * (bed + drop + 1) ticks to pool everything; the emitted
    "<i> pool" lines and final coordinates match the hand-built model.
    """
    world = _base_world(config, "waterfall")
    world.define_kind("Place")
    world.instantiate("Place", entity_id="bedInlet")
    world.instantiate("Place", entity_id=config.labels[2])
    binding = bind(
        world,
        "Fluidic_Motion",
        {
            "Fluid": "water",
            "Source": "bedInlet",
            "Goal": config.labels[2],
            "Path": waterfall_path(config),
            "Configuration": {"volume": "high", "speed": "moderate"},
        },
    )
    instantiate_fluidic_motion(
        world, binding, name="WaterFlowing", n_portions=n_portions,
        portion_kind="WaterPortion",
    )
    register_trigger(world, Trigger("Flow", period=1, target="WaterFlowing"))
    return world, binding


def ticks_to_pool(config: WaterfallConfig, n_portions: int) -> int:
    """Firings the frame-built flow needs to pool n portions (birth shares the
    first advance's firing, so each portion takes bed + drop firings)."""
    return n_portions * (config.upper_bed_length + config.vertical_drop)
