"""Parametric timed automata: data model, class membership and substitution.

Clocks, parameters and locations are interned to integer ids (their position
in the owning model); names are kept only for reporting and serialization.
All constants are exact (``int`` or :class:`fractions.Fraction`).
"""

from __future__ import annotations

import enum
import math
from functools import cached_property
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Union

Number = Union[int, Fraction]


class ModelError(ValueError):
    """A structurally invalid model. ``errors`` lists every violation found."""

    def __init__(self, errors: Sequence[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class ModelClassError(ValueError):
    """The model is well formed but outside the class an algorithm requires."""

    def __init__(self, message: str, violations: Sequence[str] = ()):
        self.violations = list(violations)
        super().__init__(message if not violations else f"{message}: " + "; ".join(self.violations))


class Relation(enum.Enum):
    LT = "<"
    LE = "<="
    EQ = "="
    GE = ">="
    GT = ">"

    @property
    def is_upper(self) -> bool:
        return self in (Relation.LT, Relation.LE)

    def holds(self, lhs: Number, rhs: Number) -> bool:
        if self is Relation.LT:
            return lhs < rhs
        if self is Relation.LE:
            return lhs <= rhs
        if self is Relation.EQ:
            return lhs == rhs
        if self is Relation.GE:
            return lhs >= rhs
        return lhs > rhs

    @classmethod
    def parse(cls, text: str) -> "Relation":
        for rel in cls:
            if rel.value == text:
                return rel
        raise ValueError(f"unknown relation {text!r}")


@dataclass(frozen=True, slots=True)
class LinearBound:
    """``sum(params) + constant``; each parameter appears with coefficient 1."""

    params: frozenset = frozenset()
    constant: Number = 0

    @classmethod
    def of(cls, params: Iterable[int] = (), constant: Number = 0) -> "LinearBound":
        params = list(params)
        if len(set(params)) != len(params):
            raise ValueError("duplicate parameter in linear bound (coefficients must be 0 or 1)")
        return cls(frozenset(params), constant)

    def evaluate(self, valuation: Sequence[Number]) -> Number:
        return sum((valuation[p] for p in self.params), self.constant)


@dataclass(frozen=True, slots=True)
class Inequality:
    clock: int
    rel: Relation
    bound: LinearBound


Constraint = tuple
"""A conjunction of :class:`Inequality`; the empty tuple is ``true``."""

TRUE: Constraint = ()


@dataclass(frozen=True, slots=True)
class Location:
    name: str
    invariant: Constraint = TRUE
    labels: frozenset = frozenset()


@dataclass(frozen=True, slots=True)
class Edge:
    source: int
    target: int
    guard: Constraint = TRUE
    action: Optional[str] = None  # None is the silent action
    resets: frozenset = frozenset()


@dataclass(frozen=True)
class PtaModel:
    clocks: tuple
    params: tuple
    locations: tuple
    initial: int
    edges: tuple
    actions: frozenset = frozenset()
    param_bounds: Optional[tuple] = None  # ((lo, hi), ...) indexed by parameter id

    @property
    def n_clocks(self) -> int:
        return len(self.clocks)

    @property
    def n_params(self) -> int:
        return len(self.params)

    @cached_property
    def _location_index(self) -> dict:
        return {loc.name: i for i, loc in enumerate(self.locations)}

    def location_id(self, name: str) -> int:
        try:
            return self._location_index[name]
        except KeyError:
            raise KeyError(f"no location named {name!r}") from None

    def clock_id(self, name: str) -> int:
        return self.clocks.index(name)

    def param_id(self, name: str) -> int:
        return self.params.index(name)

    def valuation(self, values: Union[Mapping[str, object], Sequence[object]]) -> tuple:
        """Build a parameter valuation (a tuple indexed by parameter id).

        ``values`` is either a mapping from parameter name to a number or a
        sequence in declaration order. Numbers are converted to exact
        fractions; strings such as ``"3/4"`` are accepted.
        """
        if isinstance(values, Mapping):
            missing = [p for p in self.params if p not in values]
            if missing:
                raise ValueError(f"valuation misses parameter(s) {', '.join(missing)}")
            unknown = sorted(set(values) - set(self.params))
            if unknown:
                raise ValueError(f"valuation names unknown parameter(s) {', '.join(unknown)}")
            seq = [values[p] for p in self.params]
        else:
            seq = list(values)
            if len(seq) != self.n_params:
                raise ValueError(f"expected {self.n_params} parameter values, got {len(seq)}")
        out = tuple(to_fraction(x) for x in seq)
        for name, x in zip(self.params, out):
            if x < 0:
                raise ValueError(f"parameter {name} must be nonnegative, got {x}")
        if self.param_bounds is not None:
            for name, x, (lo, hi) in zip(self.params, out, self.param_bounds):
                if not lo <= x <= hi:
                    raise ValueError(f"parameter {name}={x} outside its bounds [{lo},{hi}]")
        return out

    def unit_valuation(self) -> tuple:
        """The valuation assigning 1 to every parameter."""
        return (Fraction(1),) * self.n_params

    @cached_property
    def _outgoing(self) -> list:
        out = [[] for _ in self.locations]
        for k, e in enumerate(self.edges):
            out[e.source].append(k)
        return out

    def outgoing(self) -> list:
        """Edge ids grouped by source location, in declaration order.
        Cached on the model; do not mutate."""
        return self._outgoing


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        # Route through repr so 0.1 means 1/10, not its binary expansion.
        return Fraction(repr(x))
    return Fraction(x)


@dataclass
class ClassReport:
    is_pta_i: bool
    is_pta_iu: bool
    is_bounded: bool
    has_nonnegative_constants: bool
    violations: list = field(default_factory=list)


def _render_ineq(model: PtaModel, ineq: Inequality) -> str:
    from invpta.dsl import format_inequality

    return format_inequality(model, ineq)


def validate_model(model: PtaModel) -> ClassReport:
    """Check that ``model`` is a well-formed tuple and classify it.

    Raises :class:`ModelError` listing every structural problem; nothing is
    repaired silently.
    """
    errors = []
    n_loc, n_clk, n_par = len(model.locations), model.n_clocks, model.n_params
    if len(set(model.clocks)) != n_clk:
        errors.append("duplicate clock name")
    if len(set(model.params)) != n_par:
        errors.append("duplicate parameter name")
    names = [loc.name for loc in model.locations]
    if len(set(names)) != len(names):
        dup = sorted({n for n in names if names.count(n) > 1})
        errors.append(f"duplicate location name(s): {', '.join(dup)}")
    if not 0 <= model.initial < n_loc:
        errors.append(f"initial location id {model.initial} does not exist")

    def check_constraint(where: str, constraint) -> None:
        for ineq in constraint:
            if not 0 <= ineq.clock < n_clk:
                errors.append(f"{where}: undeclared clock id {ineq.clock}")
            for p in ineq.bound.params:
                if not 0 <= p < n_par:
                    errors.append(f"{where}: undeclared parameter id {p}")
            if not isinstance(ineq.bound.params, frozenset):
                errors.append(f"{where}: parameter sum is not a set")

    for loc in model.locations:
        check_constraint(f"invariant of {loc.name}", loc.invariant)
    for k, e in enumerate(model.edges):
        label = _edge_label(model, k)
        if not 0 <= e.source < n_loc:
            errors.append(f"edge {label}: source id {e.source} does not exist")
        if not 0 <= e.target < n_loc:
            errors.append(f"edge {label}: target id {e.target} does not exist")
        check_constraint(f"guard of edge {label}", e.guard)
        for x in e.resets:
            if not 0 <= x < n_clk:
                errors.append(f"edge {label}: reset of undeclared clock id {x}")
        if e.action is not None and model.actions and e.action not in model.actions:
            errors.append(f"edge {label}: action {e.action!r} not in the action set")
    if model.param_bounds is not None:
        if len(model.param_bounds) != n_par:
            errors.append("parameter bounds must cover every parameter")
        for name, (lo, hi) in zip(model.params, model.param_bounds):
            if int(lo) != lo or int(hi) != hi or lo < 0:
                errors.append(f"bounds of {name} must be natural numbers")
            elif lo > hi:
                errors.append(f"bounds of {name} are empty: [{lo},{hi}]")
    if errors:
        raise ModelError(errors)
    return classify(model)


def _edge_label(model: PtaModel, k: int) -> str:
    e = model.edges[k]
    try:
        return f"{model.locations[e.source].name}->{model.locations[e.target].name}#{k}"
    except IndexError:
        return f"#{k}"


def classify(model: PtaModel) -> ClassReport:
    """Syntactic class membership.

    PTA_I: every guard is empty. PTA_I^U: PTA_I, and every invariant
    inequality is ``x < ...`` or ``x <= ...`` with a nonnegative constant.
    A negative constant makes zero-delay passability depend on the exact
    parameter values rather than on their signs, so such models are kept out
    of the upper-bound class.
    """
    violations = []
    is_pta_i = True
    upper_only = True
    nonneg = True
    for k, e in enumerate(model.edges):
        if e.guard:
            is_pta_i = False
            violations.append(f"edge {_edge_label(model, k)} has a guard")
        for ineq in e.guard:
            if ineq.bound.constant < 0:
                nonneg = False
                violations.append(
                    f"edge {_edge_label(model, k)}: negative constant in {_render_ineq(model, ineq)}"
                )
    for loc in model.locations:
        for ineq in loc.invariant:
            if not ineq.rel.is_upper:
                upper_only = False
                violations.append(
                    f"location {loc.name}: lower-bound or equality invariant {_render_ineq(model, ineq)}"
                )
            if ineq.bound.constant < 0:
                nonneg = False
                violations.append(
                    f"location {loc.name}: negative constant in {_render_ineq(model, ineq)}"
                )
    return ClassReport(
        is_pta_i=is_pta_i,
        is_pta_iu=is_pta_i and upper_only and nonneg,
        is_bounded=model.param_bounds is not None,
        has_nonnegative_constants=nonneg,
        violations=violations,
    )


def require_pta_iu(model: PtaModel) -> None:
    report = classify(model)
    if not report.is_pta_iu:
        raise ModelClassError("model is not an upper-bound-invariant PTA", report.violations)


def _substitute_constraint(constraint, valuation) -> tuple:
    return tuple(
        Inequality(i.clock, i.rel, LinearBound(frozenset(), Fraction(i.bound.evaluate(valuation))))
        for i in constraint
    )


def substitute(model: PtaModel, valuation: Sequence[Number]) -> PtaModel:
    """Replace every parameter by its value; the result has no parameters."""
    if len(valuation) != model.n_params:
        raise ValueError(f"valuation has {len(valuation)} values, model has {model.n_params} parameters")
    locations = tuple(
        replace(loc, invariant=_substitute_constraint(loc.invariant, valuation))
        for loc in model.locations
    )
    edges = tuple(
        replace(e, guard=_substitute_constraint(e.guard, valuation)) if e.guard else e
        for e in model.edges
    )
    return replace(model, params=(), locations=locations, edges=edges, param_bounds=None)


def _constants(model: PtaModel):
    for loc in model.locations:
        for i in loc.invariant:
            yield i.bound.constant
    for e in model.edges:
        for i in e.guard:
            yield i.bound.constant


def rescale(model: PtaModel) -> tuple:
    """Multiply all constants by the LCM of their denominators.

    Returns ``(integer_model, scale)``. Location reachability is unchanged
    since time is stretched uniformly.
    """
    if model.params:
        raise ValueError("rescale needs a model without parameters; substitute first")
    scale = 1
    for c in _constants(model):
        scale = math.lcm(scale, Fraction(c).denominator)

    def scaled(constraint):
        return tuple(
            Inequality(i.clock, i.rel, LinearBound(frozenset(), int(Fraction(i.bound.constant) * scale)))
            for i in constraint
        )

    locations = tuple(replace(loc, invariant=scaled(loc.invariant)) for loc in model.locations)
    edges = tuple(replace(e, guard=scaled(e.guard)) if e.guard else e for e in model.edges)
    return replace(model, locations=locations, edges=edges), scale


def max_constant(model: PtaModel) -> int:
    return max((abs(c) for c in _constants(model)), default=0)


@dataclass(frozen=True)
class Goal:
    """A reachability target: a location name or an atomic-proposition label."""

    location: Optional[str] = None
    label: Optional[str] = None

    def __post_init__(self):
        if (self.location is None) == (self.label is None):
            raise ValueError("a goal names exactly one of a location or a label")

    def resolve(self, model: PtaModel) -> frozenset:
        """Ids of the locations satisfying the goal."""
        if self.location is not None:
            return frozenset([model.location_id(self.location)])
        return frozenset(i for i, loc in enumerate(model.locations) if self.label in loc.labels)

    def __str__(self):
        return self.location if self.location is not None else f"label:{self.label}"


def as_goal(goal) -> Goal:
    if isinstance(goal, Goal):
        return goal
    if isinstance(goal, str):
        return Goal(location=goal)
    raise TypeError(f"cannot interpret {goal!r} as a goal")
