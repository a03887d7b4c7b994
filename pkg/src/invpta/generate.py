"""Random models for tests and benchmarks. Deterministic for a given seed."""

from __future__ import annotations

import random
import re

from invpta.model import Edge, Inequality, LinearBound, Location, PtaModel, Relation

PROFILES = ("invariant-free-pta", "pta-iu", "closed-ta", "chain(n)")

_CHAIN = re.compile(r"chain\((\d+)\)$")


def _inequality(rng, n_clocks, n_params, rels, max_const, min_const=0):
    params = frozenset(p for p in range(n_params) if rng.random() < 0.4)
    return Inequality(rng.randrange(n_clocks), rng.choice(rels), LinearBound(params, rng.randint(min_const, max_const)))


def _constraint(rng, n_clocks, n_params, rels, max_const, max_len=2):
    if not n_clocks:
        return ()
    return tuple(_inequality(rng, n_clocks, n_params, rels, max_const) for _ in range(rng.randint(0, max_len)))


def _resets(rng, n_clocks):
    return frozenset(x for x in range(n_clocks) if rng.random() < 0.3)


def _random(rng, n_locs, n_clocks, n_params, n_edges, *, inv_rels, guard_rels, max_const, labels=()):
    clocks = tuple(f"x{i}" for i in range(n_clocks))
    params = tuple(f"p{i}" for i in range(n_params))
    locations = []
    for i in range(n_locs):
        inv = _constraint(rng, n_clocks, n_params, inv_rels, max_const) if inv_rels else ()
        lab = frozenset(l for l in labels if rng.random() < 0.25)
        locations.append(Location(f"l{i}", inv, lab))
    edges = []
    for _ in range(n_edges):
        guard = _constraint(rng, n_clocks, n_params, guard_rels, max_const) if guard_rels else ()
        action = rng.choice(["a", "b", None])
        edges.append(Edge(rng.randrange(n_locs), rng.randrange(n_locs), guard, action, _resets(rng, n_clocks)))
    return PtaModel(
        clocks=clocks,
        params=params,
        locations=tuple(locations),
        initial=0,
        edges=tuple(edges),
        actions=frozenset(e.action for e in edges if e.action is not None),
    )


def chain(n: int) -> PtaModel:
    """``l0 -> l1 -> ... -> l{n-1}``; every location has invariant ``x < p``."""
    inv = (Inequality(0, Relation.LT, LinearBound(frozenset([0]), 0)),)
    locations = tuple(Location(f"l{i}", inv) for i in range(n))
    edges = tuple(Edge(i, i + 1) for i in range(n - 1))
    return PtaModel(clocks=("x",), params=("p",), locations=locations, initial=0, edges=edges)


def random_model(profile: str, seed=None, *, max_locations=None, n_clocks=None, n_params=None,
                 max_constant=None) -> PtaModel:
    """Generate a model.

    ``invariant-free-pta``: guards only, any relation, constants 0..5
    (up to 8 locations, 2 clocks, 2 parameters). ``pta-iu``: no guards,
    ``<``/``<=`` invariants with constants 0..3 (up to 10 locations,
    3 clocks, 3 parameters). ``closed-ta``: no parameters, non-strict
    guards and invariants, constants 0..4 (up to 6 locations, 2 clocks).
    ``chain(n)``: see :func:`chain`.
    """
    m = _CHAIN.match(profile)
    if m:
        return chain(int(m.group(1)))
    rng = random.Random(seed)
    if profile == "invariant-free-pta":
        n = rng.randint(1, max_locations or 8)
        return _random(rng, n, 2 if n_clocks is None else n_clocks, 2 if n_params is None else n_params,
                       rng.randint(0, 2 * n), inv_rels=(), guard_rels=tuple(Relation),
                       max_const=5 if max_constant is None else max_constant)
    if profile == "pta-iu":
        n = rng.randint(1, max_locations or 10)
        return _random(rng, n, rng.randint(1, n_clocks or 3), rng.randint(0, 3) if n_params is None else n_params,
                       rng.randint(0, 2 * n), inv_rels=(Relation.LT, Relation.LE), guard_rels=(),
                       max_const=3 if max_constant is None else max_constant, labels=("goal",))
    if profile == "closed-ta":
        n = rng.randint(1, max_locations or 6)
        return _random(rng, n, 2 if n_clocks is None else n_clocks, 0, rng.randint(0, 2 * n),
                       inv_rels=(Relation.LE,), guard_rels=(Relation.LE, Relation.GE, Relation.EQ),
                       max_const=4 if max_constant is None else max_constant)
    raise ValueError(f"unknown profile {profile!r}; expected one of {', '.join(PROFILES)}")
