import random

import pytest

from conftest import corpus_files, needs_z3, read_corpus
from stormforge.boolean import evaluate_skeleton
from stormforge.errors import OracleUnavailable, SeedRejected
from stormforge.oracle import (
    OracleClient,
    TruthValue,
    complete_assignment,
    default_oracle_profile,
    default_value,
    model_satisfies,
    parse_model,
)
from stormforge.runner import z3_profile
from stormforge.smtlib import BOOL, INT, Assignment, Sort, bitvec, parse_script, parse_term, print_term
from stormforge.smtlib.sorts import array
from stormforge.smtlib.terms import App, Var

pytestmark = needs_z3


@pytest.fixture(scope="module")
def oracle():
    return OracleClient()


def test_truth_value_algebra():
    assert ~TruthValue.TRUE is TruthValue.FALSE
    assert ~TruthValue.UNDETERMINED is TruthValue.UNDETERMINED
    assert TruthValue.of(True) is TruthValue.TRUE
    with pytest.raises(ValueError):
        bool(TruthValue.UNDETERMINED)


def test_env_var_overrides_oracle(monkeypatch):
    monkeypatch.setenv("STORM_ORACLE", "/opt/other-z3")
    assert default_oracle_profile().binary == "/opt/other-z3"


def test_assignment_satisfies_seed(oracle):
    s = parse_script(read_corpus("lia_02.smt2"))
    m = oracle.generate_assignment(s, 11)
    assert set(m.values) == {"a", "b", "c"}
    assert model_satisfies(oracle, s, m)
    assert m.provenance.endswith(":pos")


def test_unsat_seed_uses_negation(oracle):
    s = parse_script("(declare-fun x () Int)(assert (> x 0))(assert (< x 0))")
    m = oracle.generate_assignment(s, 0)
    assert m.provenance.endswith(":neg")
    assert oracle.evaluate(parse_term("(and (> x 0) (< x 0))", s), m) is TruthValue.FALSE


def test_assignment_deterministic(oracle):
    s = parse_script(read_corpus("bv_02.smt2"))
    a = oracle.generate_assignment(s, 5)
    b = oracle.generate_assignment(s, 5)
    assert {k: print_term(v) for k, v in a.values.items()} == {k: print_term(v) for k, v in b.values.items()}


def test_no_assertions_gives_defaults(oracle):
    s = parse_script("(declare-fun x () Int)(declare-fun v () (_ BitVec 4))(declare-fun f (Int) Bool)")
    m = oracle.generate_assignment(s, 0)
    assert print_term(m.values["x"]) == "0"
    assert print_term(m.values["v"]) == "#b0000"
    assert print_term(m.functions["f"].body) == "false"


def test_default_values():
    m = Assignment()
    assert print_term(default_value(array(INT, bitvec(2)), m, {})) == "((as const (Array Int (_ BitVec 2))) #b00)"
    w = default_value(Sort("U"), m, {})
    assert isinstance(w, Var) and w.name == "U!val!0"
    assert m.universe[Sort("U")] == ("U!val!0",)


@pytest.mark.parametrize("name", [p.rsplit("/", 1)[-1] for p in corpus_files()
                                  if "nra_" not in p])
def test_corpus_models_are_valid(oracle, name):
    s = parse_script(read_corpus(name))
    m = oracle.generate_assignment(s, 3)
    if m.provenance.endswith(":pos"):
        assert model_satisfies(oracle, s, m)


def test_algebraic_model_rejected(oracle):
    with pytest.raises(SeedRejected):
        oracle.generate_assignment(parse_script(read_corpus("nra_01.smt2")), 0)


def test_parse_model_with_universe_and_functions():
    s = parse_script("(declare-sort U 0)(declare-fun a () U)(declare-fun g (Int) Int)(declare-fun r () Real)")
    text = """(
      (declare-fun U!val!0 () U)
      (forall ((x U)) (= x U!val!0))
      (define-fun a () U U!val!0)
      (define-fun r () Real (/ 4.0 3.0))
      (define-fun g ((x!0 Int)) Int (ite (= x!0 1) 5 (g!1 x!0)))
      (define-fun g!1 ((x!0 Int)) Int 7)
    )"""
    m = parse_model(text, s)
    assert m.universe[Sort("U")] == ("U!val!0",)
    assert print_term(m.values["r"]) == "(/ 4.0 3.0)"
    assert "g" in m.functions and "g!1" not in m.functions


def test_evaluate_examples(oracle):
    s = parse_script("(declare-fun x () Int)(declare-fun y () Int)")
    m = Assignment(values={"x": parse_term("3"), "y": parse_term("5")})
    preds = [parse_term(t, s) for t in ("(< x y)", "(> x y)", "(= (+ x 2) y)")]
    assert oracle.evaluate_many(preds, m) == [TruthValue.TRUE, TruthValue.FALSE, TruthValue.TRUE]


def test_division_by_zero_is_undetermined(oracle):
    s = parse_script("(declare-fun x () Int)")
    m = Assignment(values={"x": parse_term("0")})
    assert oracle.evaluate(parse_term("(= (div 1 x) 0)", s), m) is TruthValue.UNDETERMINED
    assert oracle.evaluate(parse_term("(= (div 1 x) (div 1 x))", s), m) is TruthValue.TRUE


def test_quantified_predicate(oracle):
    s = parse_script("(declare-fun c () Int)")
    m = Assignment(values={"c": parse_term("2")})
    t = parse_term("(forall ((z Int)) (=> (> z c) (> z 1)))", s)
    assert oracle.evaluate(t, m) is TruthValue.TRUE


def test_uninterpreted_sort_witnesses(oracle):
    s = parse_script(read_corpus("uf_01.smt2"))
    m = oracle.generate_assignment(s, 1)
    preds = [parse_term(t, s) for t in ("(= (f a) b)", "(distinct a (f b))", "(= a a)")]
    assert oracle.evaluate_many(preds, m) == [TruthValue.TRUE] * 3


def test_unavailable_binary():
    client = OracleClient(z3_profile(binary="/nonexistent/z3"))
    s = parse_script("(declare-fun x () Int)(assert (> x 0))")
    with pytest.raises(OracleUnavailable):
        client.generate_assignment(s, 0)


def test_ground_truth(oracle):
    assert oracle.check_ground_truth("(assert true)(check-sat)") == "sat"
    assert oracle.check_ground_truth("(assert false)(check-sat)") == "unsat"


def _random_skeleton(rng, atoms, depth):
    if depth == 0 or rng.random() < 0.25:
        return rng.choice(atoms)
    op = rng.choice(["not", "and", "or", "xor", "=>", "=", "ite"])
    if op == "not":
        return App("not", (_random_skeleton(rng, atoms, depth - 1),), BOOL)
    arity = 3 if op == "ite" else 2
    return App(op, tuple(_random_skeleton(rng, atoms, depth - 1) for _ in range(arity)), BOOL)


def test_oracle_agrees_with_truth_table(oracle):
    rng = random.Random(7)
    atoms = [Var(f"p{i}", BOOL) for i in range(4)]
    env = {a: rng.random() < 0.5 for a in atoms}
    m = Assignment(values={a.name: parse_term("true" if v else "false") for a, v in env.items()})
    sks = [_random_skeleton(rng, atoms, 5) for _ in range(200)]
    got = oracle.evaluate_many(sks, m)
    assert got == [TruthValue.of(evaluate_skeleton(f, env)) for f in sks]


def test_complete_assignment_fills_missing():
    s = parse_script("(declare-fun p () Bool)(declare-fun q () Bool)")
    m = complete_assignment(Assignment(values={"p": parse_term("true")}), s)
    assert print_term(m.values["q"]) == "false"
