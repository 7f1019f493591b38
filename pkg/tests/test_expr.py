import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crowdlens.expr import (
    BinOp,
    ExprSyntaxError,
    MetricCycleError,
    MetricRef,
    Neg,
    Number,
    UnboundIdentifierError,
    UnknownMetricError,
    evaluate,
    parse_expression,
    resolve_metric_graph,
    to_text,
)
from crowdlens.model import MetricDef

from .oracles import eval_expr_oracle, random_expr


def test_precedence_shape():
    tree = parse_expression("a + b * 2")
    assert tree == BinOp("+", MetricRef("a"), BinOp("*", MetricRef("b"), Number(2.0)))


def test_parenthesized_shape():
    tree = parse_expression("(a + b) / capacity")
    assert tree == BinOp("/", BinOp("+", MetricRef("a"), MetricRef("b")), MetricRef("capacity"))


def test_unary_minus():
    assert parse_expression("-a * b") == BinOp("*", Neg(MetricRef("a")), MetricRef("b"))
    assert parse_expression("-3") == Number(-3.0)


def test_syntax_error_offset():
    with pytest.raises(ExprSyntaxError) as exc:
        parse_expression("a + * b")
    assert exc.value.offset == 4


def test_empty_input_rejected():
    with pytest.raises(ExprSyntaxError):
        parse_expression("")
    with pytest.raises(ExprSyntaxError):
        parse_expression("   ")


def test_trailing_garbage_rejected():
    with pytest.raises(ExprSyntaxError) as exc:
        parse_expression("a b")
    assert exc.value.offset == 2


def test_evaluate_arithmetic():
    assert evaluate(parse_expression("a + b * 2"), {"a": 1.0, "b": 2.0}) == 5.0


def test_evaluate_precedence_values():
    assert evaluate(parse_expression("2+3*4"), {}) == 14.0
    assert evaluate(parse_expression("(2+3)*4"), {}) == 20.0


def test_division_by_zero_is_missing():
    tree = parse_expression("roaming / capacity")
    assert evaluate(tree, {"roaming": 50.0, "capacity": 0.0}) is None


def test_missing_operand_absorbs():
    tree = parse_expression("a + b")
    assert evaluate(tree, {"a": None, "b": 2.0}) is None


def test_overflow_is_missing():
    tree = parse_expression("a * a")
    assert evaluate(tree, {"a": 1e308}) is None


def test_unbound_identifier_raises():
    with pytest.raises(UnboundIdentifierError):
        evaluate(parse_expression("ghost + 1"), {"a": 1.0})


def test_evaluator_matches_oracle():
    rng = random.Random(20240619)
    names = ["a", "b", "c", "capacity"]
    for _ in range(100):
        tree = random_expr(rng, names, depth=6)
        bindings = {}
        for name in names:
            roll = rng.random()
            if roll < 0.15:
                bindings[name] = None
            elif roll < 0.3:
                bindings[name] = 0.0
            else:
                bindings[name] = rng.uniform(-100, 100)
        assert evaluate(tree, bindings) == eval_expr_oracle(tree, bindings)


def test_print_round_trip_random_trees():
    rng = random.Random(7)
    for _ in range(200):
        tree = random_expr(rng, ["a", "b", "roaming", "total"], depth=5)
        assert parse_expression(to_text(tree)) == tree


@settings(max_examples=150)
@given(st.recursive(
    st.one_of(
        st.floats(min_value=0, max_value=1e6, allow_nan=False).map(Number),
        st.sampled_from(["a", "b", "cap_x", "_v1"]).map(MetricRef),
    ),
    lambda children: st.one_of(
        children.map(Neg),
        st.tuples(st.sampled_from("+-*/"), children, children).map(lambda t: BinOp(*t)),
    ),
    max_leaves=12,
))
def test_round_trip_is_fixed_point(tree):
    text = to_text(tree)
    reparsed = parse_expression(text)
    assert parse_expression(to_text(reparsed)) == reparsed


def test_never_nan_on_zero_over_zero():
    assert evaluate(parse_expression("a / b"), {"a": 0.0, "b": 0.0}) is None


def _defs(*pairs) -> list[MetricDef]:
    return [
        MetricDef(id=mid, label=mid, unit="u", cap=1.0, expression=expr)
        for mid, expr in pairs
    ]


def test_graph_order_base_first_stable():
    defs = _defs(("total", None), ("roaming", None), ("ratio", "roaming / total"))
    assert resolve_metric_graph(defs) == ["total", "roaming", "ratio"]


def test_graph_chained_derived():
    defs = _defs(
        ("d2", "d1 * 2"),
        ("total", None),
        ("d1", "total / capacity"),
    )
    order = resolve_metric_graph(defs)
    assert order.index("total") < order.index("d1") < order.index("d2")


def test_graph_cycle_reported():
    defs = _defs(("a", "b + 1"), ("b", "a + 1"))
    with pytest.raises(MetricCycleError) as exc:
        resolve_metric_graph(defs)
    assert exc.value.cycle_ids == ["a", "b"]


def test_graph_unknown_reference():
    defs = _defs(("total", None), ("bad", "ghost * 2"))
    with pytest.raises(UnknownMetricError) as exc:
        resolve_metric_graph(defs)
    assert "ghost" in str(exc.value)


def test_capacity_is_builtin_not_dependency():
    defs = _defs(("total", None), ("density", "total / capacity"))
    assert resolve_metric_graph(defs) == ["total", "density"]
