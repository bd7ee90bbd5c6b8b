"""Seeded generators for the benchmark families and for random micro problems."""

from .carpool import cars_for_instance, gen_carpool, gen_carpool_instance
from .generator import gen_generator
from .micro import gen_micro
from .pump import gen_pump, gen_pump_instance, pump_ladder

FAMILIES = ("carpool", "pump", "generator")


def gen_instance(family: str, n: int, seed: int = 0) -> tuple[str, str]:
    """Instance ``n`` of a family's ladder."""
    if family == "carpool":
        return gen_carpool_instance(n, seed)
    if family == "pump":
        return gen_pump_instance(n, seed)
    if family == "generator":
        return gen_generator(n, seed)
    raise ValueError(f"unknown family {family}")


__all__ = ["FAMILIES", "cars_for_instance", "gen_carpool", "gen_carpool_instance", "gen_generator",
           "gen_instance", "gen_micro", "gen_pump", "gen_pump_instance", "pump_ladder"]
