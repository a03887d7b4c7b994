"""Difference-bound matrices and zone-graph reachability for timed automata.

Only for non-parametric models with integer constants (use
:func:`invpta.model.substitute` then :func:`invpta.model.rescale`). This is
the reference oracle the parametric algorithms are tested against.

Bounds are encoded as integers: ``(m, <=)`` is ``2m + 1`` and ``(m, <)`` is
``2m``, so integer order is bound order. ``INF`` is ``(+inf, <)``.
Index 0 of a matrix is the reference clock; entry ``[i][j]`` bounds
``x_i - x_j``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from invpta.model import PtaModel, Relation, as_goal, max_constant

INF = float("inf")
LE_ZERO = 1
LT_ZERO = 0


def bound(value: int, strict: bool) -> int:
    return 2 * value + (0 if strict else 1)


def bound_value(b) -> int:
    return b >> 1


def bound_is_strict(b) -> bool:
    return b != INF and not (b & 1)


def add_bounds(a, b):
    if a == INF or b == INF:
        return INF
    return ((a & ~1) + (b & ~1)) | (a & b & 1)


class Bound(NamedTuple):
    """Readable view of an encoded bound."""

    value: object
    strict: bool

    @classmethod
    def decode(cls, raw) -> "Bound":
        if raw == INF:
            return cls(INF, True)
        return cls(bound_value(raw), bound_is_strict(raw))


@dataclass(frozen=True)
class Dbm:
    """An immutable square matrix of encoded bounds (tuple of rows)."""

    rows: tuple

    @property
    def dim(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def contains(self, point) -> bool:
        """Membership of a clock valuation (sequence of numbers, no reference clock)."""
        vals = (0,) + tuple(point)
        for i, row in enumerate(self.rows):
            for j, b in enumerate(row):
                if b == INF:
                    continue
                diff = Fraction(vals[i]) - Fraction(vals[j])
                m = bound_value(b)
                if diff > m or (diff == m and bound_is_strict(b)):
                    return False
        return True


def zero_zone(n_clocks: int) -> Dbm:
    n = n_clocks + 1
    return Dbm(tuple(tuple(LE_ZERO for _ in range(n)) for _ in range(n)))


def universe(n_clocks: int) -> Dbm:
    n = n_clocks + 1
    rows = []
    for i in range(n):
        row = [INF] * n
        row[i] = LE_ZERO
        row[0] = LE_ZERO if i == 0 else INF
        rows.append(row)
    rows[0] = [LE_ZERO] * n  # clocks are nonnegative: 0 - x <= 0
    return Dbm(tuple(tuple(r) for r in rows))


def _close(m: list) -> bool:
    """Floyd-Warshall in place; returns False when a negative cycle appears."""
    n = len(m)
    for k in range(n):
        mk = m[k]
        for i in range(n):
            mik = m[i][k]
            if mik == INF:
                continue
            mi = m[i]
            for j in range(n):
                mkj = mk[j]
                if mkj == INF:
                    continue
                s = add_bounds(mik, mkj)
                if s < mi[j]:
                    mi[j] = s
        if m[k][k] < LE_ZERO:
            return False
    return all(m[i][i] >= LE_ZERO for i in range(n))


EMPTY = None


def canonical(z: Dbm):
    """Tightest equivalent matrix, or ``None`` when the zone is empty."""
    if z is None:
        return None
    m = [list(r) for r in z.rows]
    if not _close(m):
        return None
    return Dbm(tuple(tuple(r) for r in m))


def is_empty(z) -> bool:
    return z is None or canonical(z) is None


def up(z):
    """Delay closure: remove the upper bounds of all clocks."""
    if z is None:
        return None
    rows = [list(r) for r in z.rows]
    for i in range(1, len(rows)):
        rows[i][0] = INF
    return Dbm(tuple(tuple(r) for r in rows))


def reset(z, clocks):
    """Set every clock in ``clocks`` (ids without the reference offset) to 0."""
    if z is None or not clocks:
        return z
    rows = [list(r) for r in z.rows]
    n = len(rows)
    for x in clocks:
        i = x + 1
        for j in range(n):
            rows[i][j] = rows[0][j]
            rows[j][i] = rows[j][0]
        rows[i][i] = LE_ZERO
    return Dbm(tuple(tuple(r) for r in rows))


def and_ineq(z, clock: int, rel: Relation, constant):
    """Intersect with ``x rel constant`` and return the canonical result."""
    if z is None:
        return None
    if isinstance(constant, Fraction):
        if constant.denominator != 1:
            raise ValueError(f"non-integer constant {constant}; rescale the model first")
        constant = int(constant)
    elif not isinstance(constant, int):
        raise ValueError(f"non-integer constant {constant!r}; rescale the model first")
    rows = [list(r) for r in z.rows]
    i = clock + 1
    if rel in (Relation.LT, Relation.LE, Relation.EQ):
        b = bound(constant, rel is Relation.LT)
        if b < rows[i][0]:
            rows[i][0] = b
    if rel in (Relation.GT, Relation.GE, Relation.EQ):
        b = bound(-constant, rel is Relation.GT)
        if b < rows[0][i]:
            rows[0][i] = b
    m = rows
    if not _close(m):
        return None
    return Dbm(tuple(tuple(r) for r in m))


def and_constraint(z, constraint):
    for ineq in constraint:
        if ineq.bound.params:
            raise ValueError("parametric constraint; substitute a valuation first")
        z = and_ineq(z, ineq.clock, ineq.rel, ineq.bound.constant)
        if z is None:
            return None
    if constraint:
        return z
    return canonical(z)


def includes(z1, z2) -> bool:
    """True when the solution set of ``z1`` contains that of ``z2`` (both canonical)."""
    if z2 is None:
        return True
    if z1 is None:
        return False
    return all(b2 <= b1 for r1, r2 in zip(z1.rows, z2.rows) for b1, b2 in zip(r1, r2))


def normalize(z, k: int):
    """Classic extrapolation with one global maximal constant ``k``."""
    if z is None:
        return None
    hi = bound(k, False)
    lo = bound(-k, True)
    rows = [list(r) for r in z.rows]
    changed = False
    for i, row in enumerate(rows):
        for j, b in enumerate(row):
            if i == j or b == INF:
                continue
            if b > hi:
                row[j] = INF
                changed = True
            elif b < lo:
                row[j] = lo
                changed = True
    if not changed:
        return z
    return canonical(Dbm(tuple(tuple(r) for r in rows)))


def _check_integer(model: PtaModel) -> None:
    if model.params:
        raise ValueError("the zone oracle needs a valuated model (no parameters)")
    for loc in model.locations:
        for i in loc.invariant:
            if Fraction(i.bound.constant).denominator != 1:
                raise ValueError("non-integer constant; rescale the model first")
    for e in model.edges:
        for i in e.guard:
            if Fraction(i.bound.constant).denominator != 1:
                raise ValueError("non-integer constant; rescale the model first")


def explore(model: PtaModel):
    """Reachable symbolic states: yields ``(location, zone)`` pairs (BFS order)."""
    _check_integer(model)
    k = max_constant(model)
    invariants = [loc.invariant for loc in model.locations]
    outgoing = model.outgoing()
    z0 = and_constraint(zero_zone(model.n_clocks), invariants[model.initial])
    if z0 is None:
        return
    z0 = normalize(and_constraint(up(z0), invariants[model.initial]), k)
    passed = [[] for _ in model.locations]
    passed[model.initial].append(z0)
    waiting = deque([(model.initial, z0)])
    yield model.initial, z0
    while waiting:
        loc, z = waiting.popleft()
        if not any(w is z for w in passed[loc]):
            continue  # superseded by a larger zone
        for eid in outgoing[loc]:
            e = model.edges[eid]
            nz = and_constraint(z, e.guard)
            if nz is None:
                continue
            nz = reset(nz, e.resets)
            nz = and_constraint(nz, invariants[e.target])
            if nz is None:
                continue
            nz = and_constraint(up(nz), invariants[e.target])
            nz = normalize(nz, k)
            seen = passed[e.target]
            if any(includes(old, nz) for old in seen):
                continue
            seen[:] = [old for old in seen if not includes(nz, old)]
            seen.append(nz)
            waiting.append((e.target, nz))
            yield e.target, nz


def reachable_locations(model: PtaModel) -> set:
    return {loc for loc, _ in explore(model)}


def ta_reachable(model: PtaModel, goal) -> bool:
    """Location/label reachability in a valuated, integer-constant model."""
    targets = as_goal(goal).resolve(model)
    for loc, _ in explore(model):
        if loc in targets:
            return True
    return False


def oracle_reachable(model: PtaModel, valuation, goal) -> bool:
    """Substitute ``valuation``, rescale to integers and run :func:`ta_reachable`."""
    from invpta.model import rescale, substitute

    ta, _ = rescale(substitute(model, valuation))
    return ta_reachable(ta, goal)
