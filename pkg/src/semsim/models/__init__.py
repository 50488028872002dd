"""Reference models and the registry of model/mechanism builders by name."""
from __future__ import annotations

from .cardio import (
    BLOOD_ORDER,
    CardioConfig,
    build_cardio,
    cell_respiration,
    diffusion_check,
    gas_exchange_alv,
    heartbeat_push,
    inhale_cycle,
    medulla_sense,
    mix_external_air,
)
from .waterfall import (
    WaterfallConfig,
    build_waterfall,
    build_waterfall_from_frames,
    freeze_watch_mechanism,
    ticks_to_pool,
    water_flowing_mechanism,
    waterfall_path,
)

#: Mechanism factories addressable from model files: name -> f(world, params).
BUILTIN_MECHANISMS = {
    "heartbeat_push": heartbeat_push,
    "gas_exchange_alv": gas_exchange_alv,
    "cell_respiration": cell_respiration,
    "diffusion_check": diffusion_check,
    "medulla_sense": medulla_sense,
    "inhale_cycle": inhale_cycle,
    "mix_external_air": mix_external_air,
    "water_flowing": water_flowing_mechanism,
    "freeze_watch": freeze_watch_mechanism,
}


def build_builtin(name: str, portions: int | None = None):
    """Construct a bundled model by name."""
    if name == "cardio":
        return build_cardio()
    if name == "waterfall":
        return build_waterfall(n_portions=portions)
    if name == "waterfall-frames":
        world, _ = build_waterfall_from_frames(n_portions=portions)
        return world
    raise KeyError(name)


BUILTIN_MODEL_NAMES = ("cardio", "waterfall", "waterfall-frames")
