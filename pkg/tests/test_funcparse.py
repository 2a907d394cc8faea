import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairalloc.errors import (
    ExpressionError,
    ExpressionEvalError,
    ExpressionSyntaxError,
)
from fairalloc.funcparse import (
    BinOp,
    Call,
    Neg,
    Num,
    Var,
    check_increasing,
    evaluate_expression,
    format_expression,
    parse_expression,
)


class TestParsing:
    def test_single_call(self):
        assert parse_expression("ln(x)") == Call("ln", Var())

    def test_precedence(self):
        assert parse_expression("3*ln(x)+2") == BinOp(
            "+", BinOp("*", Num(Fraction(3)), Call("ln", Var())), Num(Fraction(2))
        )

    def test_power_is_right_associative(self):
        hand_built = BinOp("^", Num(Fraction(2)), BinOp("^", Num(Fraction(3)), Num(Fraction(2))))
        assert parse_expression("2^3^2") == hand_built
        assert evaluate_expression(hand_built, 1.0) == 512
        assert evaluate_expression(parse_expression("2^3^2"), 7.5) == 512

    def test_unary_binds_looser_than_power(self):
        assert parse_expression("-x^2") == Neg(BinOp("^", Var(), Num(Fraction(2))))

    def test_neg_function_form(self):
        assert parse_expression("neg(x)") == Neg(Var())

    def test_decimal_literals_are_exact(self):
        assert parse_expression("0.5") == Num(Fraction(1, 2))

    def test_unknown_identifier(self):
        with pytest.raises(ExpressionSyntaxError, match="unknown identifier 'y'"):
            parse_expression("y + 1")

    def test_syntax_error_carries_position(self):
        with pytest.raises(ExpressionSyntaxError) as excinfo:
            parse_expression("1 + ")
        assert excinfo.value.position == 4

    def test_trailing_garbage(self):
        with pytest.raises(ExpressionSyntaxError, match="after the expression"):
            parse_expression("x 2")

    def test_unbalanced_parens(self):
        with pytest.raises(ExpressionSyntaxError):
            parse_expression("ln(x")


class TestEvaluation:
    def test_identity(self):
        assert evaluate_expression(parse_expression("x"), 5) == 5.0

    def test_ln_at_one(self):
        assert evaluate_expression(parse_expression("ln(x)"), 1) == 0.0

    def test_square(self):
        assert evaluate_expression(parse_expression("x^2"), 1.5) == 2.25

    def test_ln_at_zero_is_neg_inf(self):
        assert evaluate_expression(parse_expression("ln(x)"), 0) == -math.inf

    def test_division_by_zero(self):
        with pytest.raises(ExpressionEvalError, match="division by zero"):
            evaluate_expression(parse_expression("1/x"), 0)

    def test_sqrt_of_negative_intermediate(self):
        with pytest.raises(ExpressionEvalError, match="sqrt"):
            evaluate_expression(parse_expression("sqrt(x - 5)"), 1)

    def test_plus_inf_result_rejected(self):
        # -ln(x) at 0 gives -(-inf) = +inf
        with pytest.raises(ExpressionEvalError, match=r"\+inf"):
            evaluate_expression(parse_expression("-ln(x)"), 0)

    def test_nan_result_rejected(self):
        # ln(x) - ln(x) at 0 is (-inf) - (-inf)
        with pytest.raises(ExpressionEvalError, match="NaN"):
            evaluate_expression(parse_expression("ln(x) - ln(x)"), 0)

    def test_exp_overflow(self):
        with pytest.raises(ExpressionEvalError, match="overflow"):
            evaluate_expression(parse_expression("exp(x)"), 1000)

    def test_agrees_with_math_on_composite(self):
        expr = parse_expression("3*ln(x)+2")
        for x in (0.5, 1, 2, 7.25):
            assert evaluate_expression(expr, x) == pytest.approx(
                3 * math.log(x) + 2, abs=1e-12
            )


# hypothesis strategy for random well-formed trees; Num values stick to what
# numeric literals can spell (integers and exact decimals)
def expression_trees(max_depth=4):
    leaves = st.one_of(
        st.builds(
            Num,
            st.fractions(min_value=0, max_value=9, max_denominator=8).filter(
                lambda f: f.denominator in (1, 2, 4, 5, 8)
            ),
        ),
        st.just(Var()),
    )

    def extend(children):
        return st.one_of(
            st.builds(Neg, children),
            st.builds(Call, st.sampled_from(["ln", "exp", "sqrt"]), children),
            st.builds(BinOp, st.sampled_from(["+", "-", "*", "/", "^"]), children, children),
        )

    return st.recursive(leaves, extend, max_leaves=12)


class TestPrinter:
    @settings(max_examples=200)
    @given(expression_trees())
    def test_print_parse_reconstructs_tree(self, tree):
        assert parse_expression(format_expression(tree)) == tree

    def test_decimal_literals_round_trip_exactly(self):
        assert format_expression(Num(Fraction(1, 2))) == "0.5"
        assert parse_expression("0.5") == Num(Fraction(1, 2))
        assert format_expression(Num(Fraction(3, 8))) == "0.375"

    def test_unspellable_fraction_prints_as_division(self):
        text = format_expression(Num(Fraction(1, 3)))
        assert text == "1/3"
        reparsed = parse_expression(text)
        assert evaluate_expression(reparsed, 0.0) == pytest.approx(1 / 3)
        assert format_expression(parse_expression(text)) == text

    def test_unspellable_fraction_parenthesized_in_context(self):
        tree = BinOp("*", Num(Fraction(3)), Num(Fraction(1, 3)))
        text = format_expression(tree)
        assert text == "3*(1/3)"
        assert evaluate_expression(parse_expression(text), 0.0) == pytest.approx(1.0)

    @pytest.mark.parametrize(
        "text",
        [
            "ln(x)",
            "3*ln(x)+2",
            "2^3^2",
            "-x^2",
            "x^2 - 4*x",
            "(x+1)*(x+2)",
            "1/2",
            "sqrt(x)/x",
            "exp(-x)",
            "neg(x)+x",
        ],
    )
    def test_string_fixed_point(self, text):
        once = format_expression(parse_expression(text))
        assert format_expression(parse_expression(once)) == once


class TestFuzz:
    def test_mutated_corpus_never_crashes(self):
        rng = random.Random(4242)
        corpus = ["3*ln(x)+2", "2^3^2", "sqrt(x)+exp(x)", "(x+1)/(x+2)", "-x^0.5"]
        alphabet = "x0123456789+-*/^()lnexpsqrt. "
        for _ in range(500):
            text = list(rng.choice(corpus))
            for _ in range(rng.randint(1, 4)):
                op = rng.randrange(3)
                pos = rng.randrange(len(text) + 1)
                if op == 0 and text:
                    del text[min(pos, len(text) - 1)]
                elif op == 1:
                    text.insert(pos, rng.choice(alphabet))
                elif text:
                    text[min(pos, len(text) - 1)] = rng.choice(alphabet)
            mutated = "".join(text)
            try:
                parse_expression(mutated)
            except ExpressionError:
                pass  # rejecting is fine; any other exception is a bug

    @settings(max_examples=200)
    @given(st.text(alphabet="x0123456789+-*/^()lnexpsqrt. ", max_size=25))
    def test_arbitrary_text_never_crashes(self, text):
        try:
            parse_expression(text)
        except ExpressionError:
            pass


class TestIncreasingCheck:
    def test_ln_is_increasing(self):
        grid = [i / 10 for i in range(1, 101)]
        assert check_increasing(parse_expression("ln(x)"), grid).increasing

    def test_negated_identity_fails_with_witness(self):
        report = check_increasing(parse_expression("-x"), [1.0, 2.0])
        assert not report.increasing
        assert report.failure == (1.0, 2.0)

    def test_dipping_parabola_fails_at_first_pair(self):
        # f(1) = -3 > f(2) = -4
        report = check_increasing(parse_expression("x^2 - 4*x"), [1.0, 2.0, 3.0])
        assert not report.increasing
        assert report.failure == (1.0, 2.0)

    def test_grid_validation(self):
        expr = parse_expression("x")
        with pytest.raises(ValueError):
            check_increasing(expr, [])
        with pytest.raises(ValueError):
            check_increasing(expr, [0.0, 1.0])
        with pytest.raises(ValueError):
            check_increasing(expr, [2.0, 1.0])

    def test_evaluation_errors_propagate(self):
        with pytest.raises(ExpressionEvalError):
            check_increasing(parse_expression("sqrt(x-10)"), [1.0, 2.0])
