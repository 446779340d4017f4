import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stormforge.boolean import evaluate_skeleton
from stormforge.instancegen import (
    FuzzConfig,
    Instance,
    check_prefixes,
    fuzz,
    generate_incremental_instance,
    generate_instance,
    is_balanced,
    restrict,
    scale_budget,
)
from stormforge.oracle import TruthValue
from stormforge.pools import Pool, populate_construction_pool
from stormforge.runner import SAT, UNSAT, SolverOutcome
from stormforge.smtlib import BOOL, Assert, CheckSat, Pop, Push, parse_script
from stormforge.smtlib.terms import Var, mk_not

SEED = parse_script("(set-logic QF_UF)(declare-fun p0 () Bool)(declare-fun p1 () Bool)(declare-fun p2 () Bool)"
                    "(assert (or p0 p1 p2))")


def pools(values=(True, False, True), nc=200, d_max=64, seed=0):
    init = Pool("initial", d_max)
    for i, v in enumerate(values):
        init.add(Var(f"p{i}", BOOL), TruthValue.of(v))
    constr = populate_construction_pool(init, nc, d_max, random.Random(seed))
    return init, constr


def lookup(init):
    env = {t: bool(v) for t, v in init.items()}
    return lambda t: env.get(t)


def test_scale_budget_endpoints_and_clamp():
    assert scale_budget(10) == (200, 300)
    assert scale_budget(2000) == (1500, 1000)
    assert scale_budget(1) == (200, 300)
    assert scale_budget(10 ** 6) == (1500, 1000)
    nc, nm = scale_budget(1005)
    assert 200 < nc < 1500 and 300 < nm < 1000


def test_fuzz_config_validation():
    with pytest.raises(ValueError):
        FuzzConfig(d_max=0)
    assert FuzzConfig().with_(nm=5).nm == 5


def test_generate_instance_shape_and_truth():
    init, constr = pools()
    rng = random.Random(1)
    for _ in range(200):
        inst = generate_instance(init, constr, 8, rng, SEED.declarations, "QF_UF")
        assert 1 <= inst.n_assertions <= 8
        assert isinstance(inst.commands[-1], CheckSat)
        assert all(evaluate_skeleton(a, lookup(init)) for a in inst.assertions)


def test_false_draws_are_negated():
    init = Pool("initial", 64)
    p = Var("p0", BOOL)
    init.add(p, TruthValue.FALSE)
    inst = generate_instance(init, Pool("construction"), 1, random.Random(0))
    assert inst.assertions == [mk_not(p)]


def test_instance_depth_bound():
    init, constr = pools(d_max=5)
    rng = random.Random(2)
    for _ in range(100):
        inst = generate_instance(init, constr, 16, rng)
        assert inst.max_depth <= 6  # negation adds one level


def test_generate_instance_rejects_zero_bound():
    init, constr = pools()
    with pytest.raises(ValueError):
        generate_instance(init, constr, 0, random.Random(0))


def test_instance_text_carries_provenance():
    init, constr = pools()
    inst = generate_instance(init, constr, 4, random.Random(0), SEED.declarations, "QF_UF")
    inst.seed_id, inst.rng_seed, inst.iteration = "s1", 9, 3
    text = inst.to_smtlib()
    assert text.startswith("(set-logic QF_UF)\n(set-info :storm-provenance \"seed=s1 rng=9 iter=3\")\n")
    again = Instance.from_script(parse_script(text))
    assert again.assertions == inst.assertions


def test_incremental_instances_are_sound():
    init, constr = pools()
    rng = random.Random(5)
    for _ in range(500):
        inst = generate_incremental_instance(init, constr, 12, rng)
        assert is_balanced(inst.commands)
        assert any(isinstance(c, Push) for c in inst.commands)
        prefixes = check_prefixes(inst.commands)
        assert 1 <= len(prefixes) <= 4
        for active in prefixes:
            assert all(evaluate_skeleton(a, lookup(init)) for a in active)


def test_check_prefixes_detects_underflow():
    a = Assert(Var("p0", BOOL))
    assert check_prefixes([Push(1), a, CheckSat(), Pop(1), CheckSat()]) == [[a.term], []]
    with pytest.raises(ValueError):
        check_prefixes([Pop(1)])
    assert not is_balanced([Push(1)])
    assert not is_balanced([Pop(1), Push(1)])


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32), st.integers(1, 64))
def test_incremental_generation_property(seed, a_max):
    init, constr = pools(nc=50)
    inst = generate_incremental_instance(init, constr, a_max, random.Random(seed))
    assert is_balanced(inst.commands)
    assert isinstance(inst.commands[-1], CheckSat)
    assert inst.n_assertions <= a_max


def test_restrict_filters_deep_terms():
    init, constr = pools(d_max=10)
    small = restrict(constr, 3)
    assert all(t.depth <= 3 for t in small)


class FakeRunner:
    def __init__(self, answer):
        self.answer = answer
        self.seen = []

    def __call__(self, inst, path=None):
        self.seen.append(inst.to_smtlib())
        return SolverOutcome(self.answer(inst))


def test_fuzz_reports_unsat_answers():
    init, _ = pools()
    runner = FakeRunner(lambda inst: UNSAT if inst.n_assertions > 3 else SAT)
    bugs = fuzz(SEED, FuzzConfig(nc=50, nm=40, a_max=8, rng_seed=1), None, runner, p_init=init, seed_id="s")
    assert len(runner.seen) == 40
    assert bugs and all(b.bug_class == "A" and b.instance.n_assertions > 3 for b in bugs)
    assert all(b.seed_id == "s" and b.logic == "QF_UF" for b in bugs)


def test_fuzz_replay_is_deterministic(tmp_path):
    init, _ = pools()
    cfg = FuzzConfig(nc=50, nm=20, rng_seed=42)
    r1, r2 = FakeRunner(lambda i: SAT), FakeRunner(lambda i: SAT)
    fuzz(SEED, cfg, None, r1, p_init=init, out_dir=str(tmp_path / "a"))
    fuzz(SEED, cfg, None, r2, p_init=init, out_dir=str(tmp_path / "b"))
    assert r1.seen == r2.seen
    for i in range(20):
        a = (tmp_path / "a" / f"mutant-{i}.smt2").read_text()
        assert a == (tmp_path / "b" / f"mutant-{i}.smt2").read_text() == r1.seen[i]


def test_fuzz_zero_iterations():
    init, _ = pools()
    runner = FakeRunner(lambda i: SAT)
    assert fuzz(SEED, FuzzConfig(nm=0), None, runner, p_init=init) == []
    assert runner.seen == []


def test_fuzz_requires_pool_source():
    with pytest.raises(ValueError):
        fuzz(SEED, FuzzConfig(nm=1), None, FakeRunner(lambda i: SAT))
