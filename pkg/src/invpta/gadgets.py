"""Two-counter machines and their encoding as a bounded upper-bound PTA.

The encoding uses clocks ``x1``, ``x2``, ``z`` and one parameter ``a`` in
``[0, 1]``. In the anchor location of machine state ``q`` with ``z = 0``,
counter ``c_i`` is stored as ``x_i = 1 - a * c_i``.

Every gadget is a chain alternating *waiting* locations (no invariant) and
*bounded* locations whose ``<=`` invariant plays the role of an equality
guard when entered at the last possible moment. Each bounded location is
paired with a strict twin that leads to ``error``; waiting locations also
have an edge to ``error``.

Increment of ``c`` (own clock ``xc``, other clock ``xo``), upper branch::

    anchor -> E[z<=0] -> W -> B[xo<=1] -reset xo-> W -> B[xc<=a+1] -reset xc->
    W -> B[z<=1] -reset z-> next anchor

The lower branch bounds ``xc <= a+1`` first, then ``xo <= 1``; it is the one
to take when ``xc`` would pass ``a+1`` before ``xo`` reaches 1.

Decrement of ``c``: the entry has ``{z<=0, xc<1}`` (so ``c > 0``), the
branches bound ``xc <= 1`` and ``xo <= a+1`` (in either order) and end with
``z <= a+1``; the whole gadget lasts ``1 + a``. The zero test is a single
location ``{z<=0, xc<=1}`` between the two anchors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Union

from invpta.model import Edge, Inequality, LinearBound, Location, PtaModel, Relation
from invpta.semantics import ConcreteState, Run, Step, step

X1, X2, Z = 0, 1, 2
A = 0  # the single parameter
CIRCLE = "circle"
WHITE = "white"


class Inc(NamedTuple):
    counter: int
    next: str


class DecOrZero(NamedTuple):
    counter: int
    next_if_dec: str
    next_if_zero: str


Instruction = Union[Inc, DecOrZero]


@dataclass(frozen=True)
class TwoCounterMachine:
    initial: str
    halt: str
    instructions: dict  # state -> Instruction; the halting state has none

    def __post_init__(self):
        if self.halt in self.instructions:
            raise ValueError(f"halting state {self.halt!r} must not have an instruction")
        known = set(self.instructions) | {self.halt}
        if self.initial not in known:
            raise ValueError(f"initial state {self.initial!r} has no instruction")
        for state, instr in self.instructions.items():
            if instr.counter not in (1, 2):
                raise ValueError(f"state {state!r}: counter must be 1 or 2")
            targets = [instr.next] if isinstance(instr, Inc) else [instr.next_if_dec, instr.next_if_zero]
            for t in targets:
                if t not in known:
                    raise ValueError(f"state {state!r} jumps to unknown state {t!r}")

    @property
    def states(self) -> list:
        """States in a stable order: initial first, then instruction order, halt last."""
        out = [self.initial] if self.initial != self.halt else []
        out += [s for s in self.instructions if s != self.initial]
        return out + [self.halt]

    @classmethod
    def from_program(cls, program) -> "TwoCounterMachine":
        """Build a straight-line machine from ``[("inc", 1), ("dec", 1), ...]``.

        States are ``q0, q1, ...``; a ``dec`` on a zero counter falls through
        to the next state as well.
        """
        instructions = {}
        n = len(program)
        for i, (op, counter) in enumerate(program):
            nxt = f"q{i + 1}" if i + 1 < n else "halt"
            if op == "inc":
                instructions[f"q{i}"] = Inc(counter, nxt)
            elif op == "dec":
                instructions[f"q{i}"] = DecOrZero(counter, nxt, nxt)
            else:
                raise ValueError(f"unknown operation {op!r}")
        return cls("q0" if n else "halt", "halt", instructions)


class MachineConfig(NamedTuple):
    state: str
    c1: int
    c2: int

    def counter(self, i: int) -> int:
        return self.c1 if i == 1 else self.c2


def simulate_2cm(machine: TwoCounterMachine, max_steps: int) -> list:
    """Configurations from ``(initial, 0, 0)``; stops at halt or after ``max_steps`` instructions."""
    config = MachineConfig(machine.initial, 0, 0)
    trace = [config]
    for _ in range(max_steps):
        if config.state == machine.halt:
            break
        instr = machine.instructions[config.state]
        c = [config.c1, config.c2]
        if isinstance(instr, Inc):
            c[instr.counter - 1] += 1
            state = instr.next
        elif c[instr.counter - 1] == 0:
            state = instr.next_if_zero
        else:
            c[instr.counter - 1] -= 1
            state = instr.next_if_dec
        config = MachineConfig(state, c[0], c[1])
        trace.append(config)
    return trace


def _le(clock, const, with_a=False):
    return Inequality(clock, Relation.LE, LinearBound(frozenset([A]) if with_a else frozenset(), const))


def _strict(constraint):
    return tuple(Inequality(i.clock, Relation.LT, i.bound) for i in constraint)


@dataclass
class GadgetModel:
    model: PtaModel
    machine: TwoCounterMachine
    anchors: dict  # machine state -> anchor location id
    circle: frozenset
    white: frozenset
    error: int
    halt: int
    init_path: tuple = ()  # edge ids from the initial location to the first anchor
    branches: dict = field(default_factory=dict)  # (state, "upper"|"lower"|"zero") -> edge ids


class _Builder:
    def __init__(self):
        self.locations = []
        self.edges = []
        self.waits = []

    def loc(self, name, invariant=(), circle=True):
        self.locations.append(Location(name, tuple(invariant), frozenset([CIRCLE if circle else WHITE])))
        i = len(self.locations) - 1
        if not invariant:
            self.waits.append(i)
        return i

    def edge(self, src, dst, resets=()):
        self.edges.append(Edge(src, dst, (), None, frozenset(resets)))
        return len(self.edges) - 1

    def chain(self, prefix, entry, bounds, final, target):
        """``entry -> w0 -> b0 -> w1 -> b1 -> ... -> end -> target``; each
        bounded location resets its clock on exit, ``end`` resets ``z``."""
        path = []
        prev, prev_reset = entry, ()
        for k, (clock, with_a) in enumerate(bounds):
            w = self.loc(f"{prefix}_w{k}")
            path.append(self.edge(prev, w, prev_reset))
            bl = self.loc(f"{prefix}_b{k}", [_le(clock, 1, with_a)])
            path.append(self.edge(w, bl))
            prev, prev_reset = bl, (clock,)
        w = self.loc(f"{prefix}_w{len(bounds)}")
        path.append(self.edge(prev, w, prev_reset))
        end = self.loc(f"{prefix}_end", [final])
        path.append(self.edge(w, end))
        path.append(self.edge(end, target, (Z,)))
        return path


def encode(machine: TwoCounterMachine) -> GadgetModel:
    """Build the upper-bound PTA simulating ``machine`` (see module docs)."""
    b = _Builder()
    init_wait = b.loc("start")
    init_bound = b.loc("start_b", [_le(X1, 1), _le(X2, 1)])
    anchors = {}
    for state in machine.states:
        # the halting anchor lets time elapse so that runs can stay there forever
        anchors[state] = b.loc("halt" if state == machine.halt else f"q_{state}",
                               () if state == machine.halt else [_le(Z, 0)])
    b.waits.remove(anchors[machine.halt])
    error = b.loc("error", circle=False)
    b.waits.remove(error)
    init_path = (b.edge(init_wait, init_bound), b.edge(init_bound, anchors[machine.initial], (Z,)))
    branches = {}
    for state in machine.states:
        if state == machine.halt:
            continue
        instr = machine.instructions[state]
        own, other = (X1, X2) if instr.counter == 1 else (X2, X1)
        pre = f"q_{state}"
        if isinstance(instr, Inc):
            entry = b.loc(f"{pre}_inc", [_le(Z, 0)])
            orders = {"upper": [(other, False), (own, True)], "lower": [(own, True), (other, False)]}
            final, target = _le(Z, 1), anchors[instr.next]
        else:
            zero = b.loc(f"{pre}_zero", [_le(Z, 0), _le(own, 1)])
            branches[(state, "zero")] = (b.edge(anchors[state], zero), b.edge(zero, anchors[instr.next_if_zero]))
            entry = b.loc(f"{pre}_dec", [_le(Z, 0), Inequality(own, Relation.LT, LinearBound(frozenset(), 1))])
            orders = {"upper": [(own, False), (other, True)], "lower": [(other, True), (own, False)]}
            final, target = _le(Z, 1, with_a=True), anchors[instr.next_if_dec]
        entry_edge = b.edge(anchors[state], entry)
        for kind, bounds in orders.items():
            branches[(state, kind)] = (entry_edge,) + tuple(b.chain(f"{pre}_{kind}", entry, bounds, final, target))

    n_original = len(b.locations)
    for src in range(n_original):
        loc = b.locations[src]
        if any(i.rel is Relation.LE for i in loc.invariant):
            twin = len(b.locations)
            b.locations.append(Location(f"{loc.name}_lt", _strict(loc.invariant), frozenset([WHITE])))
            b.edge(src, twin)
            b.edge(twin, error)
    for w in b.waits:
        b.edge(w, error)

    model = PtaModel(
        clocks=("x1", "x2", "z"),
        params=("a",),
        locations=tuple(b.locations),
        initial=init_wait,
        edges=tuple(b.edges),
        actions=frozenset(),
        param_bounds=((0, 1),),
    )
    circle = frozenset(i for i, loc in enumerate(b.locations) if CIRCLE in loc.labels)
    white = frozenset(i for i, loc in enumerate(b.locations) if WHITE in loc.labels)
    return GadgetModel(model, machine, anchors, circle, white, error, anchors[machine.halt],
                       init_path, branches)


class FaithfulRunError(ValueError):
    """``a`` is too large for the counter values reached by the machine."""

    def __init__(self, message: str, step_index: int):
        super().__init__(message)
        self.step_index = step_index


def _last_moment_delay(model: PtaModel, state: ConcreteState, edge_id: int, valuation):
    """0 when leaving a bounded location; otherwise wait until the target's
    invariant is tight."""
    edge = model.edges[edge_id]
    if model.locations[edge.source].invariant:
        return Fraction(0)
    inv = model.locations[edge.target].invariant
    if not inv:
        return Fraction(0)
    return min(i.bound.evaluate(valuation) - state.clocks[i.clock] for i in inv)


def _follow(model, state, path, valuation):
    steps = []
    for eid in path:
        delay = _last_moment_delay(model, state, eid, valuation)
        if delay < 0:
            return None
        state = step(state, delay, eid, model, valuation)
        steps.append(Step(delay, eid, state))
    return steps


def faithful_run(gadget: GadgetModel, v_a, steps: int) -> Run:
    """The run taking every transition into a bounded location at the last
    moment, following the machine for ``steps`` instructions (or to halt)."""
    v_a = Fraction(v_a)
    if not 0 < v_a < 1:
        raise ValueError("the parameter value must lie strictly between 0 and 1")
    model = gadget.model
    valuation = (v_a,)
    trace = simulate_2cm(gadget.machine, steps)
    for i, config in enumerate(trace):
        for c in (config.c1, config.c2):
            if v_a * c >= 1:
                raise FaithfulRunError(
                    f"machine step {i} reaches counter value {c}: a*c = {v_a * c} is not below 1, "
                    "so the counter no longer fits in a clock",
                    i,
                )
    state = ConcreteState(model.initial, (Fraction(0),) * 3)
    run_steps = _follow(model, state, gadget.init_path, valuation)
    state = run_steps[-1].state
    for i, (config, nxt) in enumerate(zip(trace, trace[1:])):
        instr = gadget.machine.instructions[config.state]
        if isinstance(instr, DecOrZero) and config.counter(instr.counter) == 0:
            kinds = ["zero"]
        else:
            kinds = ["upper", "lower"]
        for kind in kinds:
            seg = _follow(model, state, gadget.branches[(config.state, kind)], valuation)
            if seg is not None:
                break
        else:
            raise FaithfulRunError(f"no branch of the gadget for machine step {i} can be followed", i)
        run_steps.extend(seg)
        state = seg[-1].state
    return Run(ConcreteState(model.initial, (Fraction(0),) * 3), tuple(run_steps))


def anchor_visits(gadget: GadgetModel, run: Run) -> list:
    """States of ``run`` at anchor locations with ``z = 0``, in order."""
    anchors = set(gadget.anchors.values())
    return [s for s in run.states() if s.location in anchors and s.clocks[Z] == 0]
