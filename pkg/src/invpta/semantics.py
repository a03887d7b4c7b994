"""Concrete semantics of valuated timed automata.

Clock valuations are tuples of fractions indexed by clock id. A run is an
initial state followed by combined steps: a delay, then an edge.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional, Sequence

from invpta.model import Constraint, PtaModel, as_goal

ZERO = Fraction(0)


class ConcreteState(NamedTuple):
    location: int
    clocks: tuple


class Step(NamedTuple):
    delay: Fraction
    edge: int
    state: ConcreteState


@dataclass(frozen=True)
class Run:
    initial: ConcreteState
    steps: tuple = ()

    def __len__(self) -> int:
        return len(self.steps)

    def states(self) -> list:
        return [self.initial] + [s.state for s in self.steps]

    @property
    def last(self) -> ConcreteState:
        return self.steps[-1].state if self.steps else self.initial


class SemanticsError(Exception):
    """A transition is not allowed. ``phase`` is ``"delay"``, ``"guard"`` or
    ``"target invariant"``."""

    phase = "delay"

    def __init__(self, message: str, inequality=None):
        super().__init__(message)
        self.inequality = inequality


class InvariantViolation(SemanticsError):
    phase = "delay"


class GuardViolation(SemanticsError):
    phase = "guard"


class TargetInvariantViolation(SemanticsError):
    phase = "target invariant"


@dataclass(frozen=True)
class RunReport:
    ok: bool
    index: Optional[int] = None  # index of the first failing step; -1 for the initial state
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def zero_clocks(model: PtaModel) -> tuple:
    return (ZERO,) * model.n_clocks


def initial_state(model: PtaModel) -> ConcreteState:
    return ConcreteState(model.initial, zero_clocks(model))


def first_violation(clocks: Sequence[Fraction], constraint: Constraint, valuation: Sequence[Fraction]):
    for ineq in constraint:
        if not ineq.rel.holds(clocks[ineq.clock], ineq.bound.evaluate(valuation)):
            return ineq
    return None


def satisfies(clocks: Sequence[Fraction], constraint: Constraint, valuation: Sequence[Fraction]) -> bool:
    return first_violation(clocks, constraint, valuation) is None


def _describe(model, ineq) -> str:
    from invpta.dsl import format_inequality

    return format_inequality(model, ineq)


def delay_successor(state: ConcreteState, delay, model: PtaModel, valuation) -> ConcreteState:
    """Let ``delay`` time units elapse in the current location.

    The set of delays satisfying one inequality is an interval, so the
    invariant holds on the whole of ``[0, delay]`` iff it holds at both ends.
    """
    delay = Fraction(delay)
    if delay < 0:
        raise ValueError("delays are nonnegative")
    inv = model.locations[state.location].invariant
    bad = first_violation(state.clocks, inv, valuation)
    if bad is None and delay:
        clocks = tuple(c + delay for c in state.clocks)
        bad = first_violation(clocks, inv, valuation)
    else:
        clocks = state.clocks
    if bad is not None:
        raise InvariantViolation(
            f"invariant {_describe(model, bad)} of {model.locations[state.location].name} "
            f"violated while delaying {delay}",
            bad,
        )
    return ConcreteState(state.location, clocks)


def discrete_successor(state: ConcreteState, edge_id: int, model: PtaModel, valuation) -> ConcreteState:
    edge = model.edges[edge_id]
    if edge.source != state.location:
        raise ValueError(
            f"edge #{edge_id} leaves {model.locations[edge.source].name}, "
            f"not {model.locations[state.location].name}"
        )
    bad = first_violation(state.clocks, edge.guard, valuation)
    if bad is not None:
        raise GuardViolation(f"guard {_describe(model, bad)} of edge #{edge_id} not satisfied", bad)
    if edge.resets:
        clocks = tuple(ZERO if x in edge.resets else c for x, c in enumerate(state.clocks))
    else:
        clocks = state.clocks
    bad = first_violation(clocks, model.locations[edge.target].invariant, valuation)
    if bad is not None:
        raise TargetInvariantViolation(
            f"target invariant {_describe(model, bad)} of {model.locations[edge.target].name} not satisfied",
            bad,
        )
    return ConcreteState(edge.target, clocks)


def step(state: ConcreteState, delay, edge_id: int, model: PtaModel, valuation) -> ConcreteState:
    return discrete_successor(delay_successor(state, delay, model, valuation), edge_id, model, valuation)


def validate_run(model: PtaModel, valuation, run: Run) -> RunReport:
    """Replay ``run`` and report the first step that is not a valid transition."""
    init = initial_state(model)
    if run.initial != init:
        return RunReport(False, -1, "run does not start in the initial state")
    bad = first_violation(init.clocks, model.locations[init.location].invariant, valuation)
    if bad is not None:
        return RunReport(False, -1, f"initial state violates invariant {_describe(model, bad)}")
    state = init
    for i, (delay, edge_id, expected) in enumerate(run.steps):
        if not 0 <= edge_id < len(model.edges):
            return RunReport(False, i, f"edge #{edge_id} does not exist")
        try:
            state = step(state, delay, edge_id, model, valuation)
        except (SemanticsError, ValueError) as exc:
            phase = getattr(exc, "phase", "edge")
            return RunReport(False, i, f"{phase}: {exc}")
        if state != expected:
            return RunReport(False, i, "recorded state differs from the replayed one")
    return RunReport(True)


def total_time(run: Run) -> Fraction:
    return sum((s.delay for s in run.steps), ZERO)


def build_run(model: PtaModel, valuation, moves) -> Run:
    """Run from the initial state along ``moves`` = [(delay, edge_id), ...];
    raises :class:`SemanticsError` on the first invalid move."""
    state = initial_state(model)
    if not satisfies(state.clocks, model.locations[state.location].invariant, valuation):
        raise InvariantViolation("initial state violates its invariant")
    steps = []
    for delay, edge_id in moves:
        state = step(state, delay, edge_id, model, valuation)
        steps.append(Step(Fraction(delay), edge_id, state))
    return Run(initial_state(model), tuple(steps))


def _candidate_delays(model: PtaModel, state: ConcreteState, valuation, out_edges) -> list:
    # Distances to invariant bounds (and halves), plus distances to the guard
    # bounds of enabled edges so that guarded models can be explored as well.
    cands = {ZERO}
    constraints = [model.locations[state.location].invariant]
    constraints.extend(model.edges[k].guard for k in out_edges)
    for constraint in constraints:
        for ineq in constraint:
            dist = ineq.bound.evaluate(valuation) - state.clocks[ineq.clock]
            if dist >= 0:
                cands.add(Fraction(dist))
                cands.add(Fraction(dist) / 2)
                cands.add(Fraction(dist) + Fraction(1, 2))
    return sorted(cands)


def random_explore(model: PtaModel, valuation, goal, budget: int = 1000, seed=None,
                   max_queue: int = 256) -> Optional[Run]:
    """Randomized, incomplete search for a run reaching ``goal``.

    A returned run is valid and ends in a goal location; ``None`` proves
    nothing about reachability.
    """
    goal = as_goal(goal)
    targets = goal.resolve(model)
    rng = random.Random(seed)
    init = initial_state(model)
    if not satisfies(init.clocks, model.locations[init.location].invariant, valuation):
        return None
    if init.location in targets:
        return Run(init)
    if not targets:
        return None
    outgoing = model.outgoing()
    queue = [(init, ())]
    for _ in range(budget):
        if not queue:
            return None
        state, steps = queue[rng.randrange(len(queue))]
        out = outgoing[state.location]
        if not out:
            continue
        edge_id = rng.choice(out)
        delay = rng.choice(_candidate_delays(model, state, valuation, [edge_id]))
        try:
            nxt = step(state, delay, edge_id, model, valuation)
        except SemanticsError:
            continue
        new_steps = steps + (Step(delay, edge_id, nxt),)
        if nxt.location in targets:
            return Run(init, new_steps)
        if len(queue) < max_queue:
            queue.append((nxt, new_steps))
        else:
            queue[rng.randrange(max_queue)] = (nxt, new_steps)
    return None
