import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from invpta.dsl import parse
from invpta.generate import random_model
from invpta.model import Goal, Relation, substitute
from invpta.zones import (
    INF,
    Dbm,
    and_ineq,
    bound,
    canonical,
    includes,
    is_empty,
    normalize,
    oracle_reachable,
    reset,
    ta_reachable,
    up,
    zero_zone,
)

from oracles import integer_bfs_reachable, zone_points


def random_zone(rng, n, lo=-4, hi=4):
    rows = []
    for i in range(n + 1):
        row = []
        for j in range(n + 1):
            if i == j:
                row.append(bound(0, False))
            elif rng.random() < 0.25:
                row.append(INF)
            else:
                row.append(bound(rng.randint(lo, hi), rng.random() < 0.5))
        rows.append(tuple(row))
    # clocks are nonnegative
    rows[0] = tuple(min(b, bound(0, False)) for b in rows[0])
    return Dbm(tuple(rows))


def test_zero_zone_is_canonical():
    z = zero_zone(2)
    assert canonical(z) == z


def test_contradiction_is_empty():
    z = and_ineq(up(zero_zone(1)), 0, Relation.LE, 2)
    z = and_ineq(z, 0, Relation.GE, 3)
    assert z is None or is_empty(z)


def test_up_of_zero_point():
    z = up(zero_zone(2))
    assert z.contains((F(3), F(3))) and not z.contains((F(3), F(2)))


def test_reset_facet():
    z = up(zero_zone(2))
    z = reset(and_ineq(z, 0, Relation.LE, 5), [0])
    assert z.contains((F(0), F(4))) and not z.contains((F(1), F(4)))


def test_and_strict_zero_empty():
    assert is_empty(and_ineq(up(zero_zone(1)), 0, Relation.LT, 0))


def test_and_rejects_fraction():
    with pytest.raises(ValueError):
        and_ineq(zero_zone(1), 0, Relation.LE, F(1, 2))


def test_reach_examples():
    m = parse("clocks x; loc a inv { x <= 3 }; loc b; init a; edge a -> b guard { x >= 5 };")
    assert ta_reachable(m, "a") and not ta_reachable(m, "b")


def test_oracle_needs_integer_constants():
    m = parse("clocks x; params p; loc a inv { x <= p }; init a;")
    with pytest.raises(ValueError):
        ta_reachable(substitute(m, (F(1, 2),)), "a")
    assert oracle_reachable(m, (F(1, 2),), "a")


@pytest.mark.parametrize("seed", range(100))
def test_agrees_with_integer_bfs(seed):
    m = random_model("closed-ta", seed)
    for i in range(len(m.locations)):
        assert ta_reachable(m, Goal(location=m.locations[i].name)) == integer_bfs_reachable(m, {i})


@pytest.mark.parametrize("seed", range(200))
def test_canonical_idempotent_and_solution_preserving(seed):
    rng = random.Random(seed)
    z = random_zone(rng, 2)
    c = canonical(z)
    grid = [F(k, 2) for k in range(0, 11)]
    if c is None:
        assert zone_points(z.rows, 2, grid) == []
        return
    assert canonical(c) == c
    assert zone_points(z.rows, 2, grid) == zone_points(c.rows, 2, grid)


@pytest.mark.parametrize("seed", range(100))
def test_includes_partial_order(seed):
    rng = random.Random(seed)
    zs = [canonical(random_zone(rng, 2)) for _ in range(3)]
    zs = [z for z in zs if z is not None]
    for a in zs:
        assert includes(a, a)
        for b in zs:
            if includes(a, b) and includes(b, a):
                assert a == b
            for c in zs:
                if includes(a, b) and includes(b, c):
                    assert includes(a, c)


@pytest.mark.parametrize("seed", range(50))
def test_normalize_keeps_bounded_points(seed):
    rng = random.Random(seed)
    z = canonical(random_zone(rng, 2, 0, 6))
    if z is None:
        return
    nz = normalize(z, 3)
    assert includes(nz, z)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 5000), bump=st.integers(1, 3))
def test_monotone_in_upper_constants(seed, bump):
    m = random_model("pta-iu", seed)
    v = m.unit_valuation()
    ta = substitute(m, v)
    from dataclasses import replace

    raised = replace(ta, locations=tuple(
        replace(loc, invariant=tuple(
            replace(i, bound=replace(i.bound, constant=i.bound.constant + bump)) for i in loc.invariant
        ))
        for loc in ta.locations
    ))
    for loc in ta.locations:
        if oracle_reachable(ta, (), loc.name):
            assert oracle_reachable(raised, (), loc.name)
