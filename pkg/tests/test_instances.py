import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from linematch.core import DomainError, Instance, Matching, OrdinalProfile, check_consistency, derive_profile
from linematch.instances import (
    K1,
    KGEQ2,
    GenSpec,
    ParseError,
    adversarial_ratio,
    adversarial_suite,
    common_ranking_profile,
    dumps,
    from_json,
    gen_lower_bound,
    gen_random,
    gen_tiebreak_pathology,
    load,
    loads,
    save,
    to_json,
)
from linematch.optimal import greedy_optimal
from linematch.twosided import TwoSidedInstance
from strategies import instances, rational_coords

EPS = Fraction(1, 100)


def test_random_is_deterministic():
    spec = GenSpec(5, seed=3)
    assert gen_random(spec, index=4) == gen_random(spec, index=4)
    assert gen_random(spec, index=4) != gen_random(spec, index=5)
    inst = gen_random(spec)
    assert inst.n == 5


def test_distinct_flag():
    for i in range(50):
        inst = gen_random(GenSpec(6, seed=1, distinct=True, high=40), index=i)
        pts = inst.agents + inst.items
        assert len(set(pts)) == 12


def test_two_sided_and_clustered():
    inst = gen_random(GenSpec(4, seed=2, side="two", distinct=True))
    assert isinstance(inst, TwoSidedInstance)
    inst = gen_random(GenSpec(8, seed=2, distribution="clustered", clusters=2, spread=1))
    assert len(set(inst.agents + inst.items)) <= 6


def test_spec_errors():
    with pytest.raises(DomainError):
        GenSpec(0)
    with pytest.raises(DomainError):
        GenSpec(3, distribution="normal")
    with pytest.raises(DomainError):
        gen_random(GenSpec(5, distinct=True, high=5))


def test_lower_bound_family_values():
    inst = gen_lower_bound(4, K1, EPS, slot=0)
    assert greedy_optimal(inst).cost(1) == 1
    # the g_n recipient sits at 0, away from the slot
    m = Matching([0, 1, 2, 3])
    _, ratio = adversarial_ratio(common_ranking_profile(4), m, K1, EPS)
    assert ratio == 3 - EPS
    _, ratio = adversarial_ratio(common_ranking_profile(4), m, KGEQ2, EPS)
    assert ratio == 3 - 2 * EPS
    # the slot agent got g_n: the metric is answered with that agent in the slot
    _, ratio = adversarial_ratio(common_ranking_profile(4), m, K1, EPS, slot=3)
    assert ratio == 1


def test_lower_bound_errors():
    with pytest.raises(DomainError):
        gen_lower_bound(1)
    with pytest.raises(DomainError):
        gen_lower_bound(3, K1, EPS, victim=0, slot=0)
    with pytest.raises(DomainError):
        gen_lower_bound(3, K1, Fraction(2))
    with pytest.raises(DomainError):
        gen_lower_bound(3, "k3")
    with pytest.raises(DomainError):
        adversarial_ratio(OrdinalProfile([[1, 0], [0, 1]]), Matching([0, 1]))


def test_tiebreak_family_shapes():
    inst = gen_tiebreak_pathology(5, K1, EPS)
    assert inst.items == (0, 2 - EPS, 2 - EPS, 4 - 3 * EPS, 6 - 6 * EPS)
    assert inst.agents == (1, 2 - EPS, 2 - EPS, 4 - 3 * EPS, 5 - 5 * EPS)
    spread = gen_tiebreak_pathology(5, K1, EPS, delta=EPS / 10)
    assert len(set(spread.agents + spread.items)) == 10
    with pytest.raises(DomainError):
        gen_tiebreak_pathology(3, K1)
    with pytest.raises(DomainError):
        gen_tiebreak_pathology(2, KGEQ2)


def test_adversarial_suite_is_consistent():
    for _, inst in adversarial_suite():
        assert check_consistency(derive_profile(inst), inst)
    for n in range(2, 7):
        for mode in (K1, KGEQ2):
            assert check_consistency(common_ranking_profile(n), gen_lower_bound(n, mode, EPS, slot=0))


def test_json_formats():
    inst = Instance([0, "1/3"], [2, -1])
    data = to_json(inst)
    assert data == {"agents": [0, "1/3"], "items": [2, -1]}
    assert from_json(data) == inst
    assert to_json(OrdinalProfile([[1, 0], [0, 1]])) == {"rankings": [[2, 1], [1, 2]]}
    assert to_json(Matching([1, 0])) == {"matching": [[1, 2], [2, 1]]}
    assert loads(dumps(Matching([1, 0]))) == Matching([1, 0])
    ts = TwoSidedInstance([1], [2])
    assert loads(dumps(ts)) == ts


def test_file_round_trip(tmp_path):
    inst = Instance(["1/3", 2], [5, "-7/2"])
    save(tmp_path / "i.json", inst)
    assert load(tmp_path / "i.json") == inst


@pytest.mark.parametrize(
    "text, fragment",
    [
        ('{"agents": [0, 1], "items": [2]}', "agents but"),
        ('{"agents": [0.5], "items": [1]}', "agents[0]"),
        ('{"agents": ["x"], "items": [1]}', "not a rational"),
        ('{"rankings": [[1, 1], [1, 2]]}', "not a permutation"),
        ('{"rankings": [[1, "2"], [1, 2]]}', "rankings[0][1]"),
        ('{"matching": [[1, 1], [1, 2]]}', "repeated"),
        ('{"other": 1}', "no 'agents'"),
        ("[1, 2]", "JSON object"),
        ('{"agents": [0,\n', "2:1"),
    ],
)
def test_parse_errors(text, fragment):
    with pytest.raises(ParseError) as err:
        loads(text, source="f.json")
    assert fragment in str(err.value)


@given(instances(coord=rational_coords))
def test_round_trip(inst):
    assert loads(dumps(inst)) == inst
    p = derive_profile(inst)
    assert loads(dumps(p)) == p
    assert json.loads(dumps(inst)) == to_json(inst)


@given(st.integers(0, 2**32), st.integers(1, 8), st.integers(0, 100))
def test_seeded_generation_is_reproducible(seed, n, index):
    spec = GenSpec(n, seed)
    assert gen_random(spec, index) == gen_random(spec, index)
