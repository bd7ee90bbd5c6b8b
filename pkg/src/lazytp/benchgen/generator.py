"""Linear generator family with flexible-duration refuelling.

Instance ``k`` has ``k`` single-use tanks.  The generator burns one unit of
fuel per time unit for ``10 + 12k`` time units and starts with exactly that
much fuel, so finishing with at least 10 units left requires draining every
tank while the generator runs.
"""

from __future__ import annotations

from ._text import fmt

DOMAIN = """\
(define (domain linear-generator)
  (:requirements :typing :durative-actions :duration-inequalities :fluents
                 :continuous-effects :negative-preconditions)
  (:types generator tank)
  (:predicates (generator-ran) (generating ?g - generator) (available ?t - tank))
  (:functions (fuelLevel ?g - generator) (gen-duration ?g - generator)
              (tank-volume ?t - tank) (refuel-rate ?t - tank))
  (:durative-action generate
    :parameters (?g - generator)
    :duration (= ?duration (gen-duration ?g))
    :condition (and (at start (not (generator-ran)))
                    (over all (>= (fuelLevel ?g) 0)))
    :effect (and (at start (generating ?g))
                 (at end (not (generating ?g)))
                 (at end (generator-ran))
                 (decrease (fuelLevel ?g) (* #t 1))))
  (:durative-action refuel
    :parameters (?g - generator ?t - tank)
    :duration (and (>= ?duration 8) (<= ?duration 15))
    :condition (and (at start (available ?t))
                    (at start (generating ?g))
                    (over all (generating ?g))
                    (over all (>= (tank-volume ?t) 0)))
    :effect (and (at start (not (available ?t)))
                 (increase (fuelLevel ?g) (* #t (refuel-rate ?t)))
                 (decrease (tank-volume ?t) (* #t (refuel-rate ?t))))))
"""


def instance_numbers(tanks: int, capped_volume: float | None = None) -> dict:
    """Numeric data of instance ``tanks``; ``capped_volume`` overrides tank size."""
    drain = 10.0 + 12.0 * tanks
    if tanks == 0:
        return {"duration": drain, "fuel": drain + 10.0, "volume": 0.0, "rate": 0.0}
    volume = 10.0 / tanks + 1.0 / tanks**2 if capped_volume is None else capped_volume
    return {"duration": drain, "fuel": drain, "volume": volume, "rate": volume / 12.0}


def gen_generator(tanks: int, seed: int = 0, capped_volume: float | None = None
                  ) -> tuple[str, str]:
    """Domain and problem text.  The family has no random data; ``seed`` only
    labels the instance so every family shares one signature."""
    if tanks < 0:
        raise ValueError("tanks must be >= 0")
    nums = instance_numbers(tanks, capped_volume)
    names = [f"tank{i}" for i in range(1, tanks + 1)]
    objects = "    gen - generator\n"
    if names:
        objects += "    " + " ".join(names) + " - tank\n"
    init = [f"    (= (fuelLevel gen) {fmt(nums['fuel'])})",
            f"    (= (gen-duration gen) {fmt(nums['duration'])})"]
    for t in names:
        init.append(f"    (available {t})")
        init.append(f"    (= (tank-volume {t}) {fmt(nums['volume'])})")
        init.append(f"    (= (refuel-rate {t}) {fmt(nums['rate'])})")
    problem = (f"(define (problem generator-{tanks})\n"
               f"  (:domain linear-generator)\n"
               f"  (:objects\n{objects}  )\n"
               f"  (:init\n" + "\n".join(init) + ")\n"
               "  (:goal (and (generator-ran)\n"
               "              (>= (fuelLevel gen) 10))))\n")
    return DOMAIN, problem
