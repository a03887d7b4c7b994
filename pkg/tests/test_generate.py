import pytest

from invpta.generate import chain, random_model
from invpta.model import classify


@pytest.mark.parametrize("seed", range(50))
def test_pta_iu_profile(seed):
    m = random_model("pta-iu", seed)
    assert classify(m).is_pta_iu


def test_deterministic():
    for profile in ("pta-iu", "invariant-free-pta", "closed-ta"):
        assert random_model(profile, 7) == random_model(profile, 7)


def test_chain_counts():
    m = random_model("chain(100000)")
    assert len(m.locations) == 100000 and len(m.edges) == 99999
    assert chain(3).locations[2].name == "l2"


def test_profile_limits():
    for seed in range(30):
        m = random_model("invariant-free-pta", seed)
        assert len(m.locations) <= 8 and len(m.clocks) == 2 and len(m.params) == 2
        assert all(not loc.invariant for loc in m.locations)
        m = random_model("closed-ta", seed)
        assert len(m.locations) <= 6 and not m.params
        assert all(0 <= i.bound.constant <= 4 for loc in m.locations for i in loc.invariant)


def test_unknown_profile():
    with pytest.raises(ValueError):
        random_model("nope", 0)
