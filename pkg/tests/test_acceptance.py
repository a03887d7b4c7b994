"""Acceptance gate. Each test prints one PASS/FAIL line for its criterion."""

from __future__ import annotations

import json
import random
import subprocess
import sys
import time
from fractions import Fraction as F
from itertools import product

import pytest

import invpta.decision as decision
from invpta.decision import ef_emptiness, ef_synthesis, render
from invpta.dsl import parse
from invpta.gadgets import TwoCounterMachine, anchor_visits, encode, faithful_run, simulate_2cm
from invpta.generate import chain, random_model
from invpta.model import Goal, classify, rescale, substitute
from invpta.semantics import random_explore, validate_run
from invpta.transform import guards_to_invariants, map_run_forward
from invpta.zones import canonical, reachable_locations, ta_reachable

from conftest import DATA
from oracles import integer_bfs_reachable
from test_zones import random_zone

RTP_ANSWER = "p_s >= 0 & p_v >= 0 & p_send > 0 & p_rced > 0"


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")
    return emit


def oracle_locations(model, v):
    ta, _ = rescale(substitute(model, v))
    return reachable_locations(ta)


def cli(*args):
    return subprocess.run([sys.executable, "-m", "invpta.cli", *args], capture_output=True)


def test_rtp_case_study(report):
    path = str(DATA / "rtp.pta")
    start = time.perf_counter()
    proc = cli("ef-synth", path, "--goal", "askMore_notSending")
    elapsed = time.perf_counter() - start
    doc = json.loads(cli("ef-synth", path, "--goal", "askMore_notSending", "--format", "structured").stdout)
    answer = doc["answer"]
    ok = (
        proc.returncode == 0
        and proc.stdout == (RTP_ANSWER + "\n").encode()
        and answer["regions_enumerated"] == 16
        and answer["regions_checked"] == 16
        and len(answer["regions"]) == 4
        and elapsed < 1.0
    )
    report(1, ok, f"RTP output {proc.stdout.decode().strip()!r}, {answer['regions_checked']} regions, "
                  f"{len(answer['regions'])} accepted, {elapsed:.3f}s")
    assert ok


def _valuation(rng, n):
    return tuple(F(rng.randint(0, 20), rng.randint(1, 4)) for _ in range(n))


def test_transformation_suite(report):
    rng = random.Random(2024)
    start = time.perf_counter()
    failures = []
    runs_checked = 0
    for seed in range(500):
        m = random_model("invariant-free-pta", seed)
        tm = guards_to_invariants(m)
        for _ in range(3):
            v = _valuation(rng, m.n_params)
            target = m.locations[rng.randrange(len(m.locations))].name
            run = random_explore(m, v, target, budget=100, seed=rng.random())
            if run is not None:
                runs_checked += 1
                out = map_run_forward(tm, v, run)
                states, mapped = run.states(), out.states()
                if not (validate_run(tm.result, v, out) and len(out) == 2 * len(run)
                        and all(mapped[2 * i] == s for i, s in enumerate(states))):
                    failures.append((seed, v, "forward run"))
            original = oracle_locations(m, v)
            transformed = {l for l in oracle_locations(tm.result, v) if l < len(m.locations)}
            if original != transformed:
                failures.append((seed, v, "reachability"))
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 120
    report(2, ok, f"500 models x 3 valuations, {runs_checked} mapped runs, "
                  f"{len(failures)} disagreements, {elapsed:.1f}s")
    assert ok, failures[:5]


def _sample_valuations(n):
    vals = [(F(1),) * n, (F(1, 2),) * n, (F(10),) * n]
    vals += [tuple(F(b) for b in bits) for bits in list(product((0, 1), repeat=n))[:8]]
    return vals


def test_emptiness_suite(report):
    start = time.perf_counter()
    failures = []
    nonempty = 0
    for seed in range(500):
        m = random_model("pta-iu", seed)
        reach = [oracle_locations(m, v) for v in _sample_valuations(m.n_params)]
        ones = m.unit_valuation()
        for loc in range(len(m.locations)):
            empty, witness = ef_emptiness(m, Goal(location=m.locations[loc].name))
            if not empty:
                nonempty += 1
                if not (validate_run(m, ones, witness) and witness.last.location == loc
                        and all(s.delay == 0 for s in witness.steps) and loc in reach[0]):
                    failures.append((seed, loc, "witness"))
            elif any(loc in r for r in reach):
                failures.append((seed, loc, "missed"))
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 120
    report(3, ok, f"500 models, {nonempty} nonempty goals, {len(failures)} disagreements, {elapsed:.1f}s")
    assert ok, failures[:5]


def test_region_uniformity_suite(report):
    rng = random.Random(7)
    failures = []
    pairs = 0

    def positive():
        return F(rng.randint(1, 10 * (d := rng.randint(1, 4))), d)

    for seed in range(300):
        m = random_model("pta-iu", 10_000 + seed)
        for _ in range(5):
            signs = [rng.random() < 0.5 for _ in range(m.n_params)]
            v = tuple(positive() if s else F(0) for s in signs)
            w = tuple(positive() if s else F(0) for s in signs)
            pairs += 1
            if oracle_locations(m, v) != oracle_locations(m, w):
                failures.append((seed, v, w))
    ok = not failures
    report(4, ok, f"300 models x 5 sign-equivalent pairs ({pairs}), {len(failures)} disagreements")
    assert ok, failures[:5]


def _time(fn, repeat):
    best = float("inf")
    worst = 0.0
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        dt = time.perf_counter() - t
        best, worst = min(best, dt), max(worst, dt)
    return best, worst


def test_linear_scaling(report):
    sizes = [10**3, 10**4, 10**5, 10**6]
    best = {}
    worst = {}
    for n in sizes:
        m = chain(n)
        goal = Goal(location=f"l{n - 1}")
        empty, witness = ef_emptiness(m, goal)
        assert not empty and len(witness) == n - 1
        best[n], worst[n] = _time(lambda: ef_emptiness(m, goal), 7 if n < 10**6 else 3)
    ratios = [best[b] / best[a] for a, b in zip(sizes, sizes[1:])]
    ok = all(5 <= r <= 20 for r in ratios) and worst[10**6] < 5
    report(5, ok, "ratios " + ", ".join(f"{r:.1f}" for r in ratios)
           + f"; 10^6 locations in {best[10**6]:.2f}s (worst {worst[10**6]:.2f}s)")
    assert ok


def _single_use(n):
    # one location per parameter, each guarded by its own strict invariant
    locs = "\n".join(f"loc l{i} inv {{ x < p{i} }};" for i in range(n))
    edges = "\n".join("edge s -> l0;" if i == 0 else f"edge l{i - 1} -> l{i};" for i in range(n))
    params = " ".join(f"p{i}" for i in range(n))
    return parse(f"clocks x; params {params}; loc s; {locs} init s; {edges}")


def test_region_enumeration(report, monkeypatch):
    calls = []
    real = decision._search

    def counting(*args):
        calls.append(1)
        return real(*args)

    monkeypatch.setattr(decision, "_search", counting)
    counts = {}
    elapsed = 0.0
    shapes_ok = True
    for n in range(1, 13):
        m = _single_use(n)
        calls.clear()
        start = time.perf_counter()
        result = ef_synthesis(m, Goal(location=f"l{n - 1}"))
        elapsed = time.perf_counter() - start
        counts[n] = len(calls)
        expected = " & ".join(f"p{i} > 0" for i in range(n))
        shapes_ok &= len(result.accepted) == 1 and str(render(result)) == expected
    ok = all(counts[n] == 2**n for n in counts) and shapes_ok and elapsed < 10
    report(6, ok, f"region checks {[counts[n] for n in sorted(counts)]}, |P|=12 in {elapsed:.2f}s")
    assert ok


def test_gadget_arithmetic(report):
    v_a = F(1, 8)
    machine = TwoCounterMachine.from_program([("inc", 1), ("inc", 1), ("inc", 2), ("dec", 1)])
    gadget = encode(machine)
    cls = classify(gadget.model)
    run = faithful_run(gadget, v_a, 100)
    valid = validate_run(gadget.model, (v_a,), run)
    trace = simulate_2cm(machine, 100)
    visits = anchor_visits(gadget, run)
    exact = len(visits) == len(trace) and all(
        s.clocks == (1 - F(c.c1, 8), 1 - F(c.c2, 8), 0) for s, c in zip(visits, trace)
    )
    final = visits[-1].clocks
    ok = bool(valid) and exact and final == (F(7, 8), F(7, 8), 0) and visits[1].clocks == (F(7, 8), 1, 0) \
        and cls.is_pta_iu and cls.is_bounded
    report(7, ok, f"{len(visits)} anchors, final ({', '.join(str(F(x)) for x in final)}), "
                  f"run valid: {bool(valid)}, PTA_I^U: {cls.is_pta_iu}, bounded: {cls.is_bounded}")
    assert ok


def test_oracle_self_check(report):
    mismatches = 0
    queries = 0
    for seed in range(300):
        m = random_model("closed-ta", 50_000 + seed)
        for i, loc in enumerate(m.locations):
            queries += 1
            if ta_reachable(m, Goal(location=loc.name)) != integer_bfs_reachable(m, {i}):
                mismatches += 1
    rng = random.Random(99)
    non_idem = 0
    for _ in range(1000):
        c = canonical(random_zone(rng, rng.randint(1, 3)))
        if c is not None and canonical(c) != c:
            non_idem += 1
    ok = mismatches == 0 and non_idem == 0
    report(8, ok, f"{queries} reachability queries on 300 closed TAs, {mismatches} mismatches; "
                  f"canonical not idempotent on {non_idem}/1000 zones")
    assert ok
