import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stormforge.boolean import NotASkeleton, bool_atoms, evaluate_skeleton, truth_table
from stormforge.smtlib import BOOL, INT, parse_script, parse_term
from stormforge.smtlib.terms import App, Var

S = parse_script("(declare-fun p () Bool)(declare-fun q () Bool)(declare-fun r () Bool)(declare-fun x () Int)")
P, Q, R = (Var(n, BOOL) for n in "pqr")


def t(text):
    return parse_term(text, S)


@pytest.mark.parametrize("text,rows", [
    ("(and p q)", {(True, True): True, (True, False): False, (False, True): False, (False, False): False}),
    ("(or p q)", {(True, True): True, (True, False): True, (False, True): True, (False, False): False}),
    ("(=> p q)", {(True, True): True, (True, False): False, (False, True): True, (False, False): True}),
    ("(xor p q)", {(True, True): False, (True, False): True, (False, True): True, (False, False): False}),
    ("(= p q)", {(True, True): True, (True, False): False, (False, True): False, (False, False): True}),
])
def test_binary_connectives(text, rows):
    assert truth_table(t(text), [P, Q]) == rows


def test_ite_and_nary():
    f = t("(ite p q r)")
    for a, b, c in itertools.product((False, True), repeat=3):
        assert evaluate_skeleton(f, {P: a, Q: b, R: c}) == (b if a else c)
    g = t("(=> p q r)")
    for a, b, c in itertools.product((False, True), repeat=3):
        assert evaluate_skeleton(g, {P: a, Q: b, R: c}) == (not (a and b) or c)
    h = t("(distinct p q r)")
    assert not any(truth_table(h, [P, Q, R]).values())


def test_atoms_take_precedence_over_structure():
    conj = t("(and p q)")
    assert evaluate_skeleton(t("(not (and p q))"), {conj: False, P: True, Q: True}) is True


def test_theory_atom_needs_valuation():
    atom = t("(> x 0)")
    with pytest.raises(NotASkeleton):
        evaluate_skeleton(t("(and p (> x 0))"), {P: True})
    assert evaluate_skeleton(t("(and p (> x 0))"), {P: True, atom: True}) is True


def test_bool_atoms_order():
    assert bool_atoms(t("(or q (and p q) r)")) == [Q, P, R]


def _reference(op, vals):
    if op == "and":
        return all(vals)
    if op == "or":
        return any(vals)
    if op == "xor":
        return sum(vals) % 2 == 1
    if op == "=>":
        return not vals[0] or vals[1]
    raise AssertionError(op)


@st.composite
def formula(draw, depth=4):
    if depth == 0 or draw(st.booleans()):
        i = draw(st.integers(0, 2))
        return [P, Q, R][i], (lambda env, i=i: env[i])
    op = draw(st.sampled_from(["not", "and", "or", "xor", "=>"]))
    if op == "not":
        a, fa = draw(formula(depth - 1))
        return App("not", (a,), BOOL), (lambda env: not fa(env))
    (a, fa), (b, fb) = draw(formula(depth - 1)), draw(formula(depth - 1))
    return App(op, (a, b), BOOL), (lambda env: _reference(op, [fa(env), fb(env)]))


@settings(max_examples=300, deadline=None)
@given(formula())
def test_interpreter_matches_python_semantics(pair):
    f, ref = pair
    for env in itertools.product((False, True), repeat=3):
        assert evaluate_skeleton(f, dict(zip([P, Q, R], env))) == ref(env)


def test_int_sort_is_not_a_skeleton():
    with pytest.raises(NotASkeleton):
        evaluate_skeleton(Var("x", INT), {})
