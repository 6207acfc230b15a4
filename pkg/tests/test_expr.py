import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trigbvp.errors import EvaluationError
from trigbvp.expr import (
    Binary,
    Call,
    ExpressionError,
    ExprSyntaxError,
    Num,
    Unary,
    Var,
    compile_expression,
    differentiate,
    evaluate,
    parse_expression,
    to_source,
)

# (expression, environment, value worked out by hand)
REFERENCE = [
    ("1 + 2 * 3", {}, 7.0),
    ("(1 + 2) * 3", {}, 9.0),
    ("2 ^ 3 ^ 2", {}, 512.0),
    ("-2 ^ 2", {}, -4.0),
    ("(-2) ^ 2", {}, 4.0),
    ("2 ^ -1", {}, 0.5),
    ("8 / 4 / 2", {}, 1.0),
    ("10 - 4 - 3", {}, 3.0),
    ("--3", {}, 3.0),
    ("+x", {"x": 2.5}, 2.5),
    ("pi", {}, 3.141592653589793),
    ("e", {}, 2.718281828459045),
    ("2*pi*u + 1.25*pi^2*v", {"v": 1.0, "u": 0.0}, 12.337005501361698),
    ("x*cos(1.5707963*x)", {"x": 0.0}, 0.0),
    ("sin(pi/6)", {}, 0.5),
    ("exp(log(3))", {}, 3.0),
    ("sqrt(16) + abs(-2.5)", {}, 6.5),
    ("tan(pi/4) * 4", {}, 4.0),
    ("1.5e2 + .5", {}, 150.5),
    ("x^2 - 2*x*v + v^2", {"x": 5.0, "v": 3.0}, 4.0),
]


@pytest.mark.parametrize("text, env, value", REFERENCE)
def test_reference_values(text, env, value):
    got = evaluate(parse_expression(text), env)
    assert got == pytest.approx(value, rel=1e-12, abs=1e-15)


def test_structure_of_product():
    tree = parse_expression("x*cos(1.5707963*x)", ("x",))
    assert tree == Binary("*", Var("x"), Call("cos", Binary("*", Num(1.5707963), Var("x"))))


def test_power_binds_tighter_than_unary_minus():
    assert parse_expression("-x^2") == Unary("-", Binary("^", Var("x"), Num(2.0)))
    assert parse_expression("x^-2") == Binary("^", Var("x"), Unary("-", Num(2.0)))


def test_open_call_reports_column_5():
    with pytest.raises(ExprSyntaxError) as exc:
        parse_expression("sin(")
    assert (exc.value.line, exc.value.column) == (1, 5)


def test_positions_span_lines():
    with pytest.raises(ExprSyntaxError) as exc:
        parse_expression("1 +\n  * 2")
    assert (exc.value.line, exc.value.column) == (2, 3)


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("y + 1", "unknown identifier"),
        ("foo(1)", "unknown function"),
        ("sin(1, 2)", "exactly one argument"),
        ("sin", "needs an argument"),
        ("1 2", "unexpected"),
        ("(1 + 2", "expected ')'"),
        ("3 $ 4", "unexpected character"),
        ("   ", "empty"),
    ],
)
def test_parse_errors(text, fragment):
    with pytest.raises(ExpressionError) as exc:
        parse_expression(text)
    assert fragment in str(exc.value)


def test_coefficient_context_rejects_state_variables():
    with pytest.raises(ExpressionError):
        parse_expression("x + v", ("x",))


@pytest.mark.parametrize(
    "text, env, col",
    [("log(x)", {"x": 0.0}, 1), ("1 + sqrt(x)", {"x": -1.0}, 5), ("1/(x-1)", {"x": np.array([0.0, 1.0])}, 2)],
)
def test_domain_errors_carry_position(text, env, col):
    with pytest.raises(EvaluationError) as exc:
        evaluate(parse_expression(text), env)
    assert f"column {col}" in str(exc.value)


def test_vectorized_evaluation():
    fn = compile_expression("x^2 + 1", ("x",))
    x = np.linspace(0.0, 1.0, 5)
    assert np.allclose(fn(x), x**2 + 1)
    const = compile_expression("3", ("x",))
    assert const(x).shape == x.shape


_leaf = st.one_of(
    st.floats(0, 1e6, allow_nan=False, allow_infinity=False).map(Num),
    st.sampled_from(["x", "v", "u", "pi", "e"]).map(Var),
)


def _extend(children):
    return st.one_of(
        st.tuples(st.sampled_from("+-*/^"), children, children).map(lambda t: Binary(*t)),
        st.tuples(st.sampled_from("-+"), children).map(lambda t: Unary(*t)),
        st.tuples(st.sampled_from(["sin", "cos", "exp", "abs"]), children).map(lambda t: Call(*t)),
    )


trees = st.recursive(_leaf, _extend, max_leaves=12)


@settings(max_examples=200, deadline=None)
@given(trees)
def test_print_parse_roundtrip(tree):
    assert parse_expression(to_source(tree)) == tree


_smooth = st.recursive(
    _leaf.filter(lambda n: not isinstance(n, Num) or n.value < 10),
    lambda c: st.one_of(
        st.tuples(st.sampled_from("+-*"), c, c).map(lambda t: Binary(*t)),
        st.tuples(st.sampled_from(["sin", "cos"]), c).map(lambda t: Call(*t)),
        c.map(lambda n: Binary("^", n, Num(2.0))),
    ),
    max_leaves=6,
)


@settings(max_examples=100, deadline=None)
@given(_smooth, st.sampled_from(["x", "v", "u"]))
def test_derivative_matches_finite_differences(tree, var):
    env = {"x": 0.3, "v": -0.7, "u": 0.45}
    d = evaluate(differentiate(tree, var), env)
    h = 1e-6
    up = dict(env, **{var: env[var] + h})
    dn = dict(env, **{var: env[var] - h})
    fd = (evaluate(tree, up) - evaluate(tree, dn)) / (2 * h)
    scale = max(1.0, abs(float(d)), abs(float(evaluate(tree, env))))
    assert abs(float(d) - float(fd)) <= 1e-5 * scale


def test_derivative_rules():
    f = parse_expression("exp(2*v) + u^3 + log(v) + sqrt(v) + tan(u) + x^v")
    env = {"x": 1.7, "v": 0.8, "u": 0.3}
    dv = evaluate(differentiate(f, "v"), env)
    du = evaluate(differentiate(f, "u"), env)
    assert dv == pytest.approx(2 * math.exp(1.6) + 1 / 0.8 + 0.5 / math.sqrt(0.8) + math.log(1.7) * 1.7**0.8)
    assert du == pytest.approx(3 * 0.09 + 1 / math.cos(0.3) ** 2)
    assert differentiate(parse_expression("x + 1"), "v") == Num(0.0)
