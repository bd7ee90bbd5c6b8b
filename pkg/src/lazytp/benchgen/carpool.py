"""Carpool family: cars drive over a road graph to serve passenger trips.

The road graph is a ring over all locations plus random chords, which keeps
it connected with small degree.  Distances and average speeds are drawn from
a seeded generator; fuel is sized from shortest-path lengths so that serving
the trips in order with any single car is always affordable.
"""

from __future__ import annotations

import random

import networkx as nx

from ._text import fmt

DOMAIN = """\
(define (domain carpool)
  (:requirements :typing :durative-actions :fluents :continuous-effects)
  (:types car location trip)
  (:predicates (driving-at ?c - car ?l - location) (parked-at ?c - car ?l - location)
               (trip-from ?t - trip ?l - location) (trip-to ?t - trip ?l - location)
               (waiting ?t - trip) (in-car ?t - trip ?c - car) (fulfilled ?t - trip))
  (:functions (distance ?from ?to - location) (avg-speed ?from ?to - location)
              (fuel ?c - car) (total-traveled ?c - car)
              (passengers ?t - trip) (capacity ?c - car) (load ?c - car))
  (:durative-action drive
    :parameters (?c - car ?from ?to - location)
    :duration (= ?duration (/ (distance ?from ?to) (avg-speed ?from ?to)))
    :condition (and
      (at start (driving-at ?c ?from))
      (at start (> (distance ?from ?to) 0))
      (over all (>= (fuel ?c) 1)))
    :effect (and
      (at start (not (driving-at ?c ?from)))
      (at end (driving-at ?c ?to))
      (increase (total-traveled ?c) (* #t (avg-speed ?from ?to)))
      (decrease (fuel ?c) (* #t (/ (avg-speed ?from ?to) 100)))))
  (:durative-action depart
    :parameters (?c - car ?l - location)
    :duration (= ?duration 1)
    :condition (at start (parked-at ?c ?l))
    :effect (and (at start (not (parked-at ?c ?l))) (at end (driving-at ?c ?l))))
  (:durative-action park
    :parameters (?c - car ?l - location)
    :duration (= ?duration 1)
    :condition (at start (driving-at ?c ?l))
    :effect (and (at start (not (driving-at ?c ?l))) (at end (parked-at ?c ?l))))
  (:durative-action pickup-trip
    :parameters (?c - car ?t - trip ?l - location)
    :duration (= ?duration (passengers ?t))
    :condition (and (at start (parked-at ?c ?l)) (at start (trip-from ?t ?l))
                    (at start (waiting ?t))
                    (at start (<= (+ (load ?c) (passengers ?t)) (capacity ?c)))
                    (over all (parked-at ?c ?l)))
    :effect (and (at start (not (waiting ?t)))
                 (at start (increase (load ?c) (passengers ?t)))
                 (at end (in-car ?t ?c))))
  (:durative-action dropoff-trip
    :parameters (?c - car ?t - trip ?l - location)
    :duration (= ?duration (passengers ?t))
    :condition (and (at start (parked-at ?c ?l)) (at start (trip-to ?t ?l))
                    (at start (in-car ?t ?c))
                    (over all (parked-at ?c ?l)))
    :effect (and (at start (not (in-car ?t ?c)))
                 (at end (decrease (load ?c) (passengers ?t)))
                 (at end (fulfilled ?t)))))
"""


def cars_for_instance(n: int) -> int:
    """One car, plus one more at instances 6, 11 and 16."""
    return 1 + (n >= 6) + (n >= 11) + (n >= 16)


def road_graph(locations: int, rng: random.Random) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(range(locations))
    if locations > 1:
        for i in range(locations):
            j = (i + 1) % locations
            if i != j:
                g.add_edge(i, j)
        for i in range(locations):
            if g.degree(i) >= 4 or rng.random() < 0.5:
                continue
            j = rng.randrange(locations)
            if j != i and not g.has_edge(i, j) and g.degree(j) < 4:
                g.add_edge(i, j)
    for u, v in g.edges:
        g.edges[u, v]["distance"] = rng.randint(10, 100)
        g.edges[u, v]["speed"] = rng.randint(40, 100)
    return g


def gen_carpool(trips: int, cars: int, locations: int = 100, seed: int = 0) -> tuple[str, str]:
    if trips < 1 or cars < 1 or locations < 1:
        raise ValueError("trips, cars and locations must be >= 1")
    rng = random.Random(seed)
    g = road_graph(locations, rng)
    dist = dict(nx.all_pairs_dijkstra_path_length(g, weight="distance"))
    car_home = [rng.randrange(locations) for _ in range(cars)]
    trip_data = []
    for _ in range(trips):
        src = rng.randrange(locations)
        dst = rng.randrange(locations)
        while locations > 1 and dst == src:
            dst = rng.randrange(locations)
        trip_data.append((src, dst, rng.randint(1, 3)))
    # any car serving every trip in sequence never drops below the reserve
    worst = 0.0
    for home in car_home:
        here, need = home, 0.0
        for src, dst, _ in trip_data:
            need += dist[here][src] + dist[src][dst]
            here = dst
        worst = max(worst, need)
    fuel = 2.0 + 1.5 * worst / 100.0

    loc = [f"l{i}" for i in range(locations)]
    car = [f"car{i}" for i in range(1, cars + 1)]
    trip = [f"trip{i}" for i in range(1, trips + 1)]
    init = []
    for c, home in zip(car, car_home):
        init.append(f"(parked-at {c} {loc[home]})")
        init.append(f"(= (fuel {c}) {fmt(round(fuel, 3))})")
        init.append(f"(= (total-traveled {c}) 0)")
        init.append(f"(= (capacity {c}) 4)")
        init.append(f"(= (load {c}) 0)")
    for t, (src, dst, pax) in zip(trip, trip_data):
        init.append(f"(trip-from {t} {loc[src]})")
        init.append(f"(trip-to {t} {loc[dst]})")
        init.append(f"(waiting {t})")
        init.append(f"(= (passengers {t}) {pax})")
    for u, v in sorted(g.edges):
        d, s = g.edges[u, v]["distance"], g.edges[u, v]["speed"]
        for a, b in ((u, v), (v, u)):
            init.append(f"(= (distance {loc[a]} {loc[b]}) {d})")
            init.append(f"(= (avg-speed {loc[a]} {loc[b]}) {s})")
    goal = " ".join(f"(fulfilled {t})" for t in trip)
    problem = (f"(define (problem carpool-{trips}-{cars}-{locations})\n"
               f"  (:domain carpool)\n"
               f"  (:objects {' '.join(car)} - car\n"
               f"            {' '.join(trip)} - trip\n"
               f"            {' '.join(loc)} - location)\n"
               f"  (:init\n    " + "\n    ".join(init) + ")\n"
               f"  (:goal (and {goal})))\n")
    return DOMAIN, problem


def gen_carpool_instance(n: int, seed: int = 0, locations: int = 100) -> tuple[str, str]:
    """Instance ``n`` of the ladder: ``n`` trips and the matching car count."""
    return gen_carpool(n, cars_for_instance(n), locations, seed)
