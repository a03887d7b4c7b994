"""Turn the guards of an invariant-free PTA into invariants.

Each edge ``l1 --g, a, R--> l2`` becomes ``l1 --a--> m --eps, R--> l2`` where
``m`` is a fresh location whose invariant is ``g``. Runs correspond one to
two: see :func:`map_run_forward` and :func:`map_run_backward`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from invpta.model import Edge, Location, ModelClassError, PtaModel
from invpta.semantics import ConcreteState, Run, Step, validate_run


class RunShapeError(ValueError):
    pass


@dataclass(frozen=True)
class TransformMap:
    source: PtaModel
    result: PtaModel
    edge_map: tuple  # original edge id -> (first edge id, fresh location id, second edge id)

    def is_fresh(self, location: int) -> bool:
        return location >= len(self.source.locations)


def fresh_name(model: PtaModel, edge_id: int) -> str:
    return f"{model.locations[model.edges[edge_id].source].name}__via__{edge_id}"


def guards_to_invariants(model: PtaModel) -> TransformMap:
    bad = [loc.name for loc in model.locations if loc.invariant]
    if bad:
        raise ModelClassError(
            "guards can only be moved into a model without invariants",
            [f"location {n} has an invariant" for n in bad],
        )
    n = len(model.locations)
    locations = list(model.locations)
    edges = []
    edge_map = []
    for k, e in enumerate(model.edges):
        mid = n + k
        locations.append(Location(fresh_name(model, k), e.guard, frozenset()))
        edges.append(Edge(e.source, mid, (), e.action, frozenset()))
        edges.append(Edge(mid, e.target, (), None, e.resets))
        edge_map.append((2 * k, mid, 2 * k + 1))
    names = {loc.name for loc in model.locations}
    clash = [loc.name for loc in locations[n:] if loc.name in names]
    if clash:
        raise ValueError(f"fresh location name(s) clash with existing ones: {', '.join(clash)}")
    result = PtaModel(
        clocks=model.clocks,
        params=model.params,
        locations=tuple(locations),
        initial=model.initial,
        edges=tuple(edges),
        actions=model.actions,
        param_bounds=model.param_bounds,
    )
    return TransformMap(model, result, tuple(edge_map))


def map_run_forward(tm: TransformMap, valuation, run: Run) -> Run:
    """Run of the source model -> run of twice the length in the result.

    Each step ``(d, e)`` becomes ``(d, e')`` into the fresh location followed
    by ``(0, e'')``; even-indexed states coincide with the original ones.
    """
    report = validate_run(tm.source, valuation, run)
    if not report:
        raise RunShapeError(f"input run is invalid at step {report.index}: {report.reason}")
    steps = []
    prev = run.initial
    for delay, eid, state in run.steps:
        first, mid, second = tm.edge_map[eid]
        delayed = tuple(c + delay for c in prev.clocks)
        steps.append(Step(delay, first, ConcreteState(mid, delayed)))
        steps.append(Step(Fraction(0), second, state))
        prev = state
    return Run(run.initial, tuple(steps))


def map_run_backward(tm: TransformMap, valuation, run: Run) -> Run:
    """Inverse of :func:`map_run_forward`: merge each pair of steps into one
    step of the source model with the summed delay."""
    report = validate_run(tm.result, valuation, run)
    if not report:
        raise RunShapeError(f"input run is invalid at step {report.index}: {report.reason}")
    if len(run.steps) % 2:
        raise RunShapeError("run must have even length to end in an original location")
    owner = {}
    for k, (first, _, second) in enumerate(tm.edge_map):
        owner[first] = (k, 0)
        owner[second] = (k, 1)
    steps = []
    for i in range(0, len(run.steps), 2):
        (d1, e1, _), (d2, e2, s2) = run.steps[i], run.steps[i + 1]
        k1, phase1 = owner[e1]
        k2, phase2 = owner[e2]
        if phase1 != 0 or phase2 != 1 or k1 != k2:
            raise RunShapeError(f"steps {i} and {i + 1} do not traverse one fresh location")
        steps.append(Step(d1 + d2, k1, s2))
    return Run(run.initial, tuple(steps))
