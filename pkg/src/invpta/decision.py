"""Reachability emptiness and exact synthesis for upper-bound-invariant PTAs.

With only upper-bound invariants and no guards, any run can be replayed with
all delays set to 0: every clock then stays at 0, and a location can be
entered iff its invariant accepts the all-zero clock valuation. With
nonnegative constants, ``0 < sum(p) + d`` only fails when ``d = 0`` and every
parameter of the sum is 0, so reachability depends on a valuation only
through which parameters are zero. Emptiness is one graph search at the
all-ones valuation; synthesis is one search per zero/positive sign pattern.
"""

from __future__ import annotations

import contextlib
import enum
import gc
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from invpta.model import (
    Goal,
    ModelClassError,
    PtaModel,
    Relation,
    as_goal,
    require_pta_iu,
)
from invpta.semantics import ConcreteState, Run, Step, initial_state

DEFAULT_MAX_PARAMS = 20


class Sign(enum.IntEnum):
    ZERO = 0
    POS = 1


@dataclass(frozen=True, order=True)
class SignRegion:
    """Valuations agreeing on which parameters are 0 (``signs[i]`` for parameter ``i``)."""

    signs: tuple

    @classmethod
    def of(cls, valuation) -> "SignRegion":
        return cls(tuple(Sign.POS if x > 0 else Sign.ZERO for x in valuation))

    @classmethod
    def from_mask(cls, mask: int, n: int) -> "SignRegion":
        return cls(tuple(Sign((mask >> i) & 1) for i in range(n)))

    @property
    def mask(self) -> int:
        return sum(1 << i for i, s in enumerate(self.signs) if s is Sign.POS)

    def representative(self) -> tuple:
        return tuple(Fraction(int(s)) for s in self.signs)

    def describe(self, params) -> str:
        return " & ".join(f"{p} {'> 0' if s is Sign.POS else '= 0'}" for p, s in zip(params, self.signs))


@dataclass
class SynthesisResult:
    params: tuple
    goal: Goal
    accepted: tuple  # sorted, distinct SignRegions
    witnesses: dict  # SignRegion -> Run (0-delay, valid under the region representative)
    regions_enumerated: int = 0
    regions_checked: int = 0
    skipped: list = field(default_factory=list)

    @property
    def empty(self) -> bool:
        return not self.accepted


class TooManyParameters(ValueError):
    pass


def passable_at_zero(invariant, valuation) -> bool:
    """Whether the all-zero clock valuation satisfies the valuated invariant."""
    for ineq in invariant:
        if not ineq.rel.holds(0, ineq.bound.evaluate(valuation)):
            return False
    return True


def _blocking_masks(invariant) -> list:
    """Parameter masks of the inequalities that block time 0 when all their
    parameters are 0. Raises on negative constants."""
    masks = []
    for ineq in invariant:
        if ineq.bound.constant < 0:
            raise ModelClassError(
                "negative constant: zero-delay passability is not uniform on sign regions"
            )
        if ineq.rel is Relation.LT and ineq.bound.constant == 0:
            m = 0
            for p in ineq.bound.params:
                m |= 1 << p
            masks.append(m)
        elif not ineq.rel.is_upper:
            raise ModelClassError(f"{ineq.rel.value} is not an upper-bound relation")
    return masks


def passable_in_region(invariant, region: SignRegion) -> bool:
    mask = region.mask
    return all(m & mask for m in _blocking_masks(invariant))


def _search(model: PtaModel, passable, targets, outgoing) -> Optional[list]:
    """BFS over passable locations; returns the edge path to the first target."""
    start = model.initial
    if not passable[start]:
        return None
    if start in targets:
        return []
    edges = model.edges
    parent = [None] * len(passable)  # edge id that discovered each location
    parent[start] = -1
    queue = deque([start])
    found = None
    while queue and found is None:
        loc = queue.popleft()
        for eid in outgoing[loc]:
            tgt = edges[eid].target
            if parent[tgt] is not None or not passable[tgt]:
                continue
            parent[tgt] = eid
            if tgt in targets:
                found = tgt
                break
            queue.append(tgt)
    if found is None:
        return None
    path = []
    loc = found
    while loc != start:
        eid = parent[loc]
        path.append(eid)
        loc = edges[eid].source
    path.reverse()
    return path


def _zero_run(model: PtaModel, path) -> Run:
    init = initial_state(model)
    zeros = init.clocks
    zero = Fraction(0)
    edges = model.edges
    new = tuple.__new__  # skips the keyword handling of the named-tuple constructors
    return Run(init, tuple(new(Step, (zero, eid, new(ConcreteState, (edges[eid].target, zeros)))) for eid in path))


@contextlib.contextmanager
def _gc_paused():
    # Building a witness allocates millions of small acyclic tuples on large
    # models; the cyclic collector would otherwise rescan them repeatedly.
    enabled = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if enabled:
            gc.enable()


def ef_emptiness(model: PtaModel, goal) -> tuple:
    """Decide whether no parameter valuation lets a run reach ``goal``.

    Returns ``(empty, witness)``; ``witness`` is a 0-delay run under the
    all-ones valuation when the answer is nonempty, else ``None``.
    """
    with _gc_paused():
        return _ef_emptiness(model, goal)


def _ef_emptiness(model: PtaModel, goal) -> tuple:
    require_pta_iu(model)
    targets = as_goal(goal).resolve(model)
    ones = model.unit_valuation()
    cache = {}  # locations often share one invariant tuple
    passable = []
    for loc in model.locations:
        inv = loc.invariant
        ok = cache.get(id(inv))
        if ok is None:
            ok = cache[id(inv)] = passable_at_zero(inv, ones)
        passable.append(ok)
    path = _search(model, passable, targets, model.outgoing())
    if path is None:
        return True, None
    return False, _zero_run(model, path)


def _gray_codes(n: int):
    for i in range(1 << n):
        yield i ^ (i >> 1)


def region_representative(model: PtaModel, region: SignRegion) -> Optional[tuple]:
    """0/1 valuation of the region, clamped into the parameter bounds;
    ``None`` when the bounds exclude the region."""
    rep = region.representative()
    if model.param_bounds is None:
        return rep
    out = []
    for x, (lo, hi) in zip(rep, model.param_bounds):
        if x == 0:
            if lo > 0:
                return None
            out.append(Fraction(0))
        else:
            if hi < 1:
                return None
            out.append(Fraction(max(1, lo)))
    return tuple(out)


def ef_synthesis(model: PtaModel, goal, max_params: int = DEFAULT_MAX_PARAMS,
                 n_jobs: Optional[int] = None) -> SynthesisResult:
    """All sign regions whose valuations let some run reach ``goal``.

    Enumerates the ``2**n_params`` regions, so ``max_params`` caps the
    parameter count. ``n_jobs > 1`` checks regions on a thread pool; the
    merged result is the same as the sequential one.
    """
    require_pta_iu(model)
    n = model.n_params
    if n > max_params:
        raise TooManyParameters(
            f"{n} parameters means 2^{n} sign regions to enumerate; raise max_params (now {max_params}) to proceed"
        )
    goal = as_goal(goal)
    targets = goal.resolve(model)
    outgoing = model.outgoing()
    masks = [_blocking_masks(loc.invariant) for loc in model.locations]
    always = [not m for m in masks]

    def check(mask: int):
        passable = [a or all(b & mask for b in ms) for a, ms in zip(always, masks)]
        return _search(model, passable, targets, outgoing)

    regions = []
    skipped = []
    for code in _gray_codes(n):
        region = SignRegion.from_mask(code, n)
        if region_representative(model, region) is None:
            skipped.append(f"region {region.describe(model.params)} lies outside the parameter bounds")
            continue
        regions.append(region)
    if n_jobs is not None and n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            paths = list(pool.map(lambda r: check(r.mask), regions))
    else:
        paths = [check(r.mask) for r in regions]
    accepted = []
    witnesses = {}
    for region, path in zip(regions, paths):
        if path is not None:
            accepted.append(region)
            witnesses[region] = _zero_run(model, path)
    return SynthesisResult(
        params=model.params,
        goal=goal,
        accepted=tuple(sorted(accepted)),
        witnesses=witnesses,
        regions_enumerated=1 << n,
        regions_checked=len(regions),
        skipped=skipped,
    )


def membership(result: SynthesisResult, valuation) -> bool:
    return SignRegion.of(valuation) in set(result.accepted)


_ATOMS = {
    frozenset([Sign.ZERO, Sign.POS]): ">= 0",
    frozenset([Sign.POS]): "> 0",
    frozenset([Sign.ZERO]): "= 0",
}


@dataclass(frozen=True)
class RenderedConstraint:
    """Either a product of per-parameter sign sets or a disjunction of regions."""

    kind: str  # "product", "disjunction" or "false"
    params: tuple
    atoms: tuple = ()  # product: frozenset of Sign per parameter
    disjuncts: tuple = ()  # disjunction: SignRegions

    def __str__(self) -> str:
        if self.kind == "false":
            return "false"
        if self.kind == "product":
            if not self.params:
                return "true"
            return " & ".join(f"{p} {_ATOMS[a]}" for p, a in zip(self.params, self.atoms))
        parts = sorted(f"({r.describe(self.params)})" for r in self.disjuncts)
        return " | ".join(parts)

    def contains(self, valuation) -> bool:
        signs = SignRegion.of(valuation).signs
        if self.kind == "false":
            return False
        if self.kind == "product":
            return all(s in a for s, a in zip(signs, self.atoms))
        return any(r.signs == signs for r in self.disjuncts)


def render(result: SynthesisResult) -> RenderedConstraint:
    if not result.accepted:
        return RenderedConstraint("false", result.params)
    n = len(result.params)
    atoms = tuple(frozenset(r.signs[i] for r in result.accepted) for i in range(n))
    size = 1
    for a in atoms:
        size *= len(a)
    if size == len(result.accepted):
        return RenderedConstraint("product", result.params, atoms=atoms)
    return RenderedConstraint("disjunction", result.params, disjuncts=result.accepted)
