"""Text format for models and counter machines.

Model files are line-oriented statements terminated by ``;``::

    clocks x y;
    params p q;
    bounds p in [0,1];
    actions go stop;
    loc idle labels start,quiet inv { x < p, y <= p + q + 1 };
    init idle;
    edge idle -> busy action go guard { x >= 2 } reset x, y;

``#`` and ``//`` start comments. ``actions`` is optional (it defaults to the
actions used on edges); an edge without ``action`` is silent. Bounds are
parameter names joined by ``+`` with an optional integer ``+ d`` / ``- d``.

Counter machine files hold one instruction per line::

    q0 INC 1 q1
    q1 DECZ 1 q2 q3
    HALT q3
"""

from __future__ import annotations

import re
from fractions import Fraction

from invpta.model import (
    Edge,
    Inequality,
    LinearBound,
    Location,
    ModelError,
    PtaModel,
    Relation,
    validate_model,
)


class ParseError(ValueError):
    kind = "syntax"

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message = message
        self.line = line
        self.col = col
        super().__init__(f"{line}:{col}: {self.kind} error: {message}")


class LexError(ParseError):
    kind = "lexical"


class DslSyntaxError(ParseError):
    kind = "syntax"


class SemanticError(ParseError):
    kind = "semantic"


_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>(?:\#|//)[^\n]*)
  | (?P<arrow>->)
  | (?P<rel><=|>=|<|>|=)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[;{},\[\]+\-])
    """,
    re.VERBOSE,
)

KEYWORDS = {"clocks", "params", "bounds", "actions", "loc", "init", "edge",
            "labels", "inv", "action", "guard", "reset", "in"}


class _Tok:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind, self.text, self.line, self.col = kind, text, line, col

    def __repr__(self):
        return f"{self.kind}:{self.text!r}@{self.line}:{self.col}"


def tokenize(text: str) -> list:
    toks = []
    pos, line, line_start = 0, 1, 0
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        if m is None:
            raise LexError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            toks.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, toks):
        self.toks = toks
        self.i = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        raise DslSyntaxError(msg, tok.line, tok.col)

    def next(self):
        tok = self.toks[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def accept(self, text):
        if self.tok.text == text and self.tok.kind != "eof":
            return self.next()
        return None

    def expect(self, text):
        tok = self.accept(text)
        if tok is None:
            self.error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return tok

    def ident(self, what="identifier"):
        tok = self.tok
        if tok.kind != "ident" or tok.text in KEYWORDS:
            self.error(f"expected {what}, found {tok.text or 'end of input'!r}")
        return self.next()

    def integer(self):
        neg = self.accept("-") is not None
        tok = self.tok
        if tok.kind != "int":
            self.error(f"expected an integer, found {tok.text or 'end of input'!r}")
        self.next()
        return -int(tok.text) if neg else int(tok.text)

    def ident_list(self, what, stop=";"):
        out = []
        while self.tok.text != stop:
            out.append(self.ident(what))
            self.accept(",")
        return out

    def bound_expr(self):
        """Returns a list of parameter tokens and an integer constant."""
        params, const = [], 0
        sign = -1 if self.accept("-") else 1
        while True:
            tok = self.tok
            if tok.kind == "int":
                self.next()
                const += sign * int(tok.text)
            elif tok.kind == "ident" and tok.text not in KEYWORDS:
                if sign < 0:
                    self.error("parameters can only be added", tok)
                self.next()
                params.append(tok)
            else:
                self.error(f"expected a parameter or an integer, found {tok.text or 'end of input'!r}")
            if self.accept("+"):
                sign = 1
            elif self.accept("-"):
                sign = -1
            else:
                return params, const

    def constraint(self):
        self.expect("{")
        items = []
        while not self.accept("}"):
            clock = self.ident("clock name")
            rel = self.tok
            if rel.kind != "rel":
                self.error(f"expected a relation, found {rel.text or 'end of input'!r}")
            self.next()
            params, const = self.bound_expr()
            items.append((clock, Relation.parse(rel.text), params, const))
            if not self.accept(","):
                self.expect("}")
                break
        return items


def parse(text) -> PtaModel:
    """Parse model text; raises a :class:`ParseError` subclass with position."""
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise LexError(f"input is not UTF-8 ({exc.reason})", 1, exc.start + 1) from None
    p = _Parser(tokenize(text))
    clocks, params, actions = [], [], None
    bounds, locs, edges, init = [], [], [], None
    while p.tok.kind != "eof":
        kw = p.tok
        if kw.kind != "ident" or kw.text not in KEYWORDS:
            p.error(f"expected a statement keyword, found {kw.text!r}")
        p.next()
        if kw.text == "clocks":
            clocks.extend(p.ident_list("clock name"))
        elif kw.text == "params":
            params.extend(p.ident_list("parameter name"))
        elif kw.text == "actions":
            actions = (actions or []) + p.ident_list("action name")
        elif kw.text == "bounds":
            name = p.ident("parameter name")
            p.expect("in")
            p.expect("[")
            lo = p.integer()
            p.expect(",")
            hi = p.integer()
            p.expect("]")
            bounds.append((name, lo, hi))
        elif kw.text == "loc":
            name = p.ident("location name")
            labels, inv = [], []
            while p.tok.text != ";":
                if p.accept("labels"):
                    labels.extend(_label_list(p))
                elif p.accept("inv"):
                    inv.extend(p.constraint())
                else:
                    p.error(f"unexpected {p.tok.text or 'end of input'!r} in location declaration")
            locs.append((name, labels, inv))
        elif kw.text == "init":
            if init is not None:
                p.error("duplicate init statement", kw)
            init = p.ident("location name")
        elif kw.text == "edge":
            src = p.ident("location name")
            p.expect("->")
            dst = p.ident("location name")
            action, guard, resets = None, [], []
            while p.tok.text != ";":
                if p.accept("action"):
                    action = p.ident("action name")
                elif p.accept("guard"):
                    guard.extend(p.constraint())
                elif p.accept("reset"):
                    resets.extend(_label_list(p))
                else:
                    p.error(f"unexpected {p.tok.text or 'end of input'!r} in edge declaration")
            edges.append((src, dst, action, guard, resets))
        else:
            p.error(f"{kw.text!r} cannot start a statement", kw)
        p.expect(";")
    return _build(clocks, params, actions, bounds, locs, init, edges)


def _label_list(p):
    out = [p.ident("name")]
    while p.accept(","):
        out.append(p.ident("name"))
    return out


def _build(clocks, params, actions, bounds, locs, init, edges) -> PtaModel:
    def semantic(msg, tok):
        raise SemanticError(msg, tok.line, tok.col)

    def index(names, what):
        table = {}
        for tok in names:
            if tok.text in table:
                semantic(f"duplicate {what} {tok.text!r}", tok)
            table[tok.text] = len(table)
        return table

    clock_ix = index(clocks, "clock")
    param_ix = index(params, "parameter")
    loc_ix = index([n for n, _, _ in locs], "location")
    clash = set(clock_ix) & set(param_ix)
    if clash:
        tok = next(t for t in params if t.text in clash)
        semantic(f"{tok.text!r} is both a clock and a parameter", tok)

    def constraint(items):
        out = []
        for clock, rel, ps, const in items:
            if clock.text not in clock_ix:
                semantic(f"undeclared clock {clock.text!r}", clock)
            ids = []
            for tok in ps:
                if tok.text not in param_ix:
                    what = "clock" if tok.text in clock_ix else "parameter"
                    semantic(f"undeclared parameter {tok.text!r}" if what == "parameter"
                             else f"clock {tok.text!r} used in a bound", tok)
                if param_ix[tok.text] in ids:
                    semantic(f"duplicate parameter {tok.text!r} in a bound", tok)
                ids.append(param_ix[tok.text])
            out.append(Inequality(clock_ix[clock.text], rel, LinearBound(frozenset(ids), const)))
        return tuple(out)

    def loc_id(tok):
        if tok.text not in loc_ix:
            semantic(f"undeclared location {tok.text!r}", tok)
        return loc_ix[tok.text]

    locations = tuple(
        Location(n.text, constraint(inv), frozenset(l.text for l in labels)) for n, labels, inv in locs
    )
    if not locations:
        raise SemanticError("model declares no location", 1, 1)
    if init is None:
        raise SemanticError("missing init statement", 1, 1)
    built_edges = []
    for src, dst, action, guard, resets in edges:
        for r in resets:
            if r.text not in clock_ix:
                semantic(f"undeclared clock {r.text!r} in reset", r)
        built_edges.append(Edge(
            loc_id(src), loc_id(dst), constraint(guard),
            action.text if action else None,
            frozenset(clock_ix[r.text] for r in resets),
        ))
    if actions is None:
        action_set = frozenset(e.action for e in built_edges if e.action is not None)
    else:
        action_set = frozenset(a.text for a in actions)
        for (_, _, action, _, _) in edges:
            if action is not None and action.text not in action_set:
                semantic(f"undeclared action {action.text!r}", action)
    param_bounds = None
    if bounds:
        seen = {}
        for name, lo, hi in bounds:
            if name.text not in param_ix:
                semantic(f"undeclared parameter {name.text!r}", name)
            if name.text in seen:
                semantic(f"duplicate bounds for {name.text!r}", name)
            if lo < 0 or lo > hi:
                semantic(f"invalid bounds [{lo},{hi}] for {name.text!r}", name)
            seen[name.text] = (lo, hi)
        missing = [p.text for p in params if p.text not in seen]
        if missing:
            semantic(f"bounds missing for {', '.join(missing)}", bounds[0][0])
        param_bounds = tuple(seen[p.text] for p in params)
    model = PtaModel(
        clocks=tuple(t.text for t in clocks),
        params=tuple(t.text for t in params),
        locations=locations,
        initial=loc_id(init),
        edges=tuple(built_edges),
        actions=action_set,
        param_bounds=param_bounds,
    )
    try:
        validate_model(model)
    except ModelError as exc:
        raise SemanticError("; ".join(exc.errors), 1, 1) from None
    return model


def parse_file(path) -> PtaModel:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def format_constant(c) -> str:
    c = Fraction(c)
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_bound(model: PtaModel, bound: LinearBound) -> str:
    names = [model.params[p] if p < len(model.params) else f"?p{p}" for p in sorted(bound.params)]
    c = bound.constant
    if not names:
        return format_constant(c)
    text = " + ".join(names)
    if c > 0:
        text += f" + {format_constant(c)}"
    elif c < 0:
        text += f" - {format_constant(-c)}"
    return text


def format_inequality(model: PtaModel, ineq: Inequality) -> str:
    clock = model.clocks[ineq.clock] if 0 <= ineq.clock < len(model.clocks) else f"?x{ineq.clock}"
    return f"{clock} {ineq.rel.value} {format_bound(model, ineq.bound)}"


def format_constraint(model: PtaModel, constraint) -> str:
    return "{ " + ", ".join(format_inequality(model, i) for i in constraint) + " }" if constraint else "{ }"


_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")


def _check_names(model: PtaModel) -> None:
    names = [*model.clocks, *model.params, *model.actions]
    names += [loc.name for loc in model.locations]
    names += [lab for loc in model.locations for lab in loc.labels]
    bad = sorted({n for n in names if not _IDENT.match(n) or n in KEYWORDS})
    if bad:
        raise ValueError(f"names not expressible in the model language: {', '.join(bad)}")


def serialize(model: PtaModel) -> str:
    """Model text that :func:`parse` reads back to an equal model. Raises
    ``ValueError`` for names the grammar cannot express."""
    _check_names(model)
    lines = []
    if model.clocks:
        lines.append("clocks " + " ".join(model.clocks) + ";")
    if model.params:
        lines.append("params " + " ".join(model.params) + ";")
    if model.param_bounds is not None:
        for p, (lo, hi) in zip(model.params, model.param_bounds):
            lines.append(f"bounds {p} in [{lo},{hi}];")
    if model.actions:
        lines.append("actions " + " ".join(sorted(model.actions)) + ";")
    for loc in model.locations:
        parts = [f"loc {loc.name}"]
        if loc.labels:
            parts.append("labels " + ",".join(sorted(loc.labels)))
        if loc.invariant:
            parts.append("inv " + format_constraint(model, loc.invariant))
        lines.append(" ".join(parts) + ";")
    lines.append(f"init {model.locations[model.initial].name};")
    for e in model.edges:
        parts = [f"edge {model.locations[e.source].name} -> {model.locations[e.target].name}"]
        if e.action is not None:
            parts.append(f"action {e.action}")
        if e.guard:
            parts.append("guard " + format_constraint(model, e.guard))
        if e.resets:
            parts.append("reset " + ", ".join(model.clocks[x] for x in sorted(e.resets)))
        lines.append(" ".join(parts) + ";")
    return "\n".join(lines) + "\n"


def edge_ref(model: PtaModel, edge_id: int) -> str:
    e = model.edges[edge_id]
    return f"{model.locations[e.source].name}->{model.locations[e.target].name}#{edge_id}"


# -- counter machines --------------------------------------------------------

def parse_machine(text: str):
    """Parse the three-column counter machine format; the first state named
    is the initial one."""
    from invpta.gadgets import DecOrZero, Inc, TwoCounterMachine

    instructions = {}
    order = []
    halt = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        cols = line.split()
        if cols[0].upper() == "HALT":
            if len(cols) != 2:
                raise DslSyntaxError("expected 'HALT state'", lineno, 1)
            if halt is not None:
                raise SemanticError("more than one HALT line", lineno, 1)
            halt = cols[1]
            order.append(halt)
            continue
        if len(cols) < 2:
            raise DslSyntaxError("expected an instruction", lineno, 1)
        state, op = cols[0], cols[1].upper()
        if state in instructions:
            raise SemanticError(f"state {state!r} has two instructions", lineno, 1)
        try:
            if op == "INC" and len(cols) == 4:
                instr = Inc(_counter(cols[2]), cols[3])
            elif op == "DECZ" and len(cols) == 5:
                instr = DecOrZero(_counter(cols[2]), cols[3], cols[4])
            else:
                raise DslSyntaxError(f"malformed {op} instruction", lineno, 1)
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise DslSyntaxError(str(exc), lineno, 1) from None
        instructions[state] = instr
        order.append(state)
    if halt is None:
        raise SemanticError("missing HALT line", 1, 1)
    try:
        return TwoCounterMachine(order[0], halt, instructions)
    except ValueError as exc:
        raise SemanticError(str(exc), 1, 1) from None


def _counter(text: str) -> int:
    t = text.lower().lstrip("c")
    if t not in ("1", "2"):
        raise ValueError(f"counter must be 1 or 2, got {text!r}")
    return int(t)


def serialize_machine(machine) -> str:
    from invpta.gadgets import Inc

    lines = []
    for state in machine.states:
        if state == machine.halt:
            continue
        instr = machine.instructions[state]
        if isinstance(instr, Inc):
            lines.append(f"{state} INC {instr.counter} {instr.next}")
        else:
            lines.append(f"{state} DECZ {instr.counter} {instr.next_if_dec} {instr.next_if_zero}")
    lines.append(f"HALT {machine.halt}")
    return "\n".join(lines) + "\n"
