"""Welfare functions, extended-real welfare, and exact welfare maximization.

An additive welfarist rule applies an increasing function ``f`` to each
agent's bundle utility and picks an allocation maximizing the sum.  The
log-affine family (maximum Nash welfare) gets a dedicated solver that
compares exact rational products instead of float log sums, so its argmax is
immune to rounding.  Every solver breaks ties by the lexicographically
smallest assignment vector.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from itertools import product

from .errors import EnumerationBudgetError, InvalidWelfareFunctionError
from .funcparse import (
    Expression,
    check_increasing,
    evaluate_expression,
    parse_expression,
)
from .model import (
    DEFAULT_ENUMERATION_BUDGET,
    Allocation,
    Profile,
    allocation_count,
    allocation_utilities,
    check_allocation,
)

NEG_INF = float("-inf")

#: Absolute tolerance on float welfare used to detect ties; ordering itself
#: is strict comparison.
TIE_TOLERANCE = 1e-9

#: Grid on which custom expressions are validated to be strictly increasing.
INCREASING_VALIDATION_GRID = tuple(i / 10 for i in range(1, 101))


def _format_param(value: float) -> str:
    return f"{value:g}"


def _finite_above(result: float, description: str) -> float:
    if math.isnan(result):
        raise InvalidWelfareFunctionError(f"{description} evaluated to NaN")
    if result == math.inf:
        raise InvalidWelfareFunctionError(f"{description} evaluated to +inf")
    return result


def _as_float(x) -> float:
    try:
        return float(x)
    except OverflowError:
        raise InvalidWelfareFunctionError(
            f"utility {x!r} is too large for float arithmetic"
        ) from None


class WelfareFunction:
    """An increasing function from [0, inf) into [-inf, inf).

    ``value`` accepts exact rationals (or floats) and returns a float;
    ``-inf`` is allowed only at 0.  Instances are immutable and safe to
    share.
    """

    def value(self, x) -> float:
        raise NotImplementedError

    def is_concave(self) -> bool:
        """Whether the solver may use the concavity-based pruning bound."""
        return False


@dataclass(frozen=True)
class LogAffine(WelfareFunction):
    """f(x) = a*ln(x) + b with a > 0; f(0) = -inf."""

    a: float = 1.0
    b: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        if not self.a > 0:
            raise InvalidWelfareFunctionError(
                f"log-affine slope must be positive, got {self.a!r}"
            )

    def value(self, x) -> float:
        if x < 0:
            raise ValueError(f"welfare functions are defined on x >= 0, got {x!r}")
        if x == 0:
            return NEG_INF
        fx = _as_float(x)
        if fx <= 0:
            raise InvalidWelfareFunctionError(
                f"utility {x!r} underflows float precision"
            )
        return _finite_above(self.a * math.log(fx) + self.b, "log-affine function")

    def is_concave(self) -> bool:
        return True

    def __str__(self):
        if (self.a, self.b) == (1.0, 0.0):
            return "log"
        return f"log:{_format_param(self.a)},{_format_param(self.b)}"


@dataclass(frozen=True)
class Affine(WelfareFunction):
    """f(x) = a*x + b with a > 0 (a = 1, b = 0 is utilitarian welfare)."""

    a: float = 1.0
    b: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        if not self.a > 0:
            raise InvalidWelfareFunctionError(
                f"affine slope must be positive, got {self.a!r}"
            )

    def value(self, x) -> float:
        if x < 0:
            raise ValueError(f"welfare functions are defined on x >= 0, got {x!r}")
        return _finite_above(self.a * _as_float(x) + self.b, "affine function")

    def is_concave(self) -> bool:
        return True

    def __str__(self):
        return f"affine:{_format_param(self.a)},{_format_param(self.b)}"


@dataclass(frozen=True)
class Power(WelfareFunction):
    """f(x) = x**p with p > 0."""

    p: float

    def __post_init__(self):
        object.__setattr__(self, "p", float(self.p))
        if not self.p > 0:
            raise InvalidWelfareFunctionError(
                f"power exponent must be positive, got {self.p!r}"
            )

    def value(self, x) -> float:
        if x < 0:
            raise ValueError(f"welfare functions are defined on x >= 0, got {x!r}")
        try:
            result = math.pow(_as_float(x), self.p)
        except OverflowError:
            raise InvalidWelfareFunctionError(
                f"power function overflowed at {x!r}"
            ) from None
        return _finite_above(result, "power function")

    def is_concave(self) -> bool:
        return self.p <= 1

    def __str__(self):
        return f"power:{_format_param(self.p)}"


@dataclass(frozen=True)
class Exp(WelfareFunction):
    """f(x) = e**x."""

    def value(self, x) -> float:
        if x < 0:
            raise ValueError(f"welfare functions are defined on x >= 0, got {x!r}")
        try:
            return math.exp(_as_float(x))
        except OverflowError:
            raise InvalidWelfareFunctionError(
                f"exp overflowed at {x!r}"
            ) from None

    def __str__(self):
        return "exp"


@dataclass(frozen=True)
class CustomExpression(WelfareFunction):
    """A user-supplied expression in x, validated to be strictly increasing
    on a sample grid at construction time."""

    expression: Expression
    source: str

    def __post_init__(self):
        report = check_increasing(self.expression, INCREASING_VALIDATION_GRID)
        if not report.increasing:
            x1, x2 = report.failure
            raise InvalidWelfareFunctionError(
                f"expression {self.source!r} is not increasing: "
                f"f({x1:g}) >= f({x2:g})"
            )

    @classmethod
    def from_text(cls, text: str) -> "CustomExpression":
        return cls(parse_expression(text), text)

    def value(self, x) -> float:
        if x < 0:
            raise ValueError(f"welfare functions are defined on x >= 0, got {x!r}")
        try:
            return evaluate_expression(self.expression, x)
        except InvalidWelfareFunctionError:
            raise
        except ValueError as exc:
            raise InvalidWelfareFunctionError(
                f"expression {self.source!r} failed at x={x!r}: {exc}"
            ) from exc

    def __str__(self):
        return f"expr:{self.source}"


def welfare_function_from_spec(spec: str) -> WelfareFunction:
    """Build a welfare function from a CLI-style spec string.

    Accepted forms: ``log``, ``log:a,b``, ``affine:a,b`` (or bare
    ``affine``), ``power:p``, ``exp``, ``expr:<expression in x>``.  Numeric
    parameters may be integers, decimals, or ``p/q`` rationals.
    """
    name, sep, args = spec.partition(":")
    name = name.strip().lower()
    if name == "expr":
        if not sep or not args.strip():
            raise InvalidWelfareFunctionError(
                "expr needs a body, e.g. expr:3*ln(x)+2"
            )
        return CustomExpression.from_text(args)
    if name in ("log", "affine"):
        a, b = _parse_params(spec, args, count=2, defaults=(1, 0))
        return LogAffine(a, b) if name == "log" else Affine(a, b)
    if name == "power":
        if not args.strip():
            raise InvalidWelfareFunctionError("power needs an exponent, e.g. power:2")
        (p,) = _parse_params(spec, args, count=1, defaults=())
        return Power(p)
    if name == "exp":
        if args.strip():
            raise InvalidWelfareFunctionError("exp takes no parameters")
        return Exp()
    raise InvalidWelfareFunctionError(f"unknown welfare function spec {spec!r}")


def _parse_params(spec, args, count, defaults):
    text = args.strip()
    if not text:
        return defaults
    pieces = [piece.strip() for piece in text.split(",")]
    if len(pieces) != count:
        raise InvalidWelfareFunctionError(
            f"{spec!r} should have {count} comma-separated parameters"
        )
    values = []
    for piece in pieces:
        try:
            values.append(float(Fraction(piece)))
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidWelfareFunctionError(
                f"bad numeric parameter {piece!r} in {spec!r}"
            ) from exc
    return tuple(values)


@total_ordering
@dataclass(frozen=True)
class ExtendedWelfare:
    """Welfare with -inf terms counted separately.

    Fewer -inf terms is strictly greater; equal counts compare by the finite
    sum.  This is a total order.
    """

    neg_inf_count: int
    finite_part: float

    def __post_init__(self):
        if self.neg_inf_count < 0:
            raise ValueError("neg_inf_count must be nonnegative")

    def __lt__(self, other):
        if not isinstance(other, ExtendedWelfare):
            return NotImplemented
        if self.neg_inf_count != other.neg_inf_count:
            return self.neg_inf_count > other.neg_inf_count
        return self.finite_part < other.finite_part

    @property
    def finite(self) -> bool:
        return self.neg_inf_count == 0


def allocation_welfare(
    profile: Profile, allocation: Allocation, f: WelfareFunction
) -> ExtendedWelfare:
    """Sum of ``f`` over the agents' bundle utilities, -inf terms counted apart."""
    check_allocation(profile, allocation)
    neg_inf = 0
    finite = 0.0
    for utility in allocation_utilities(profile, allocation):
        term = f.value(utility)
        if term == NEG_INF:
            neg_inf += 1
        else:
            finite += term
    return ExtendedWelfare(neg_inf, finite)


@dataclass(frozen=True)
class SolveResult:
    """A welfare-maximizing allocation.

    ``maximizer_set_size`` counts every allocation attaining the maximum; for
    float-valued welfare, "attaining" means within :data:`TIE_TOLERANCE` of
    the maximum finite part (with the same number of -inf terms), while the
    maximum itself is found by strict comparison.
    """

    allocation: Allocation
    welfare: ExtendedWelfare
    maximizer_set_size: int


class _TieTracker:
    """Running maximum plus a census of welfare values still within the tie band.

    Values below the running maximum's band can never re-enter it (the
    maximum only grows), so dropping them on each improvement is safe.
    """

    def __init__(self, tolerance, keep_members=False):
        self.tolerance = tolerance
        self.best = None
        self.best_assignment = None
        self.near = {}  # (neg_inf_count, finite_part) -> count
        self.members = [] if keep_members else None  # (welfare, assignment)

    def _in_band(self, welfare):
        return (
            welfare.neg_inf_count == self.best.neg_inf_count
            and welfare.finite_part >= self.best.finite_part - self.tolerance
        )

    def offer(self, assignment, welfare):
        if self.best is None or welfare > self.best:
            self.best = welfare
            self.best_assignment = assignment
            self.near = {
                key: count for key, count in self.near.items()
                if key[0] == welfare.neg_inf_count
                and key[1] >= welfare.finite_part - self.tolerance
            }
            if self.members is not None:
                self.members = [m for m in self.members if self._in_band(m[0])]
        if self._in_band(welfare):
            key = (welfare.neg_inf_count, welfare.finite_part)
            self.near[key] = self.near.get(key, 0) + 1
            if self.members is not None:
                self.members.append((welfare, assignment))

    def result(self):
        return SolveResult(
            Allocation(self.best_assignment), self.best, sum(self.near.values())
        )

    def band_allocations(self):
        return tuple(Allocation(assignment) for _, assignment in self.members)


def _iter_assignment_welfares(profile, f, budget):
    """Yield ``(assignment, welfare)`` over the full lexicographic scan.

    Accumulation order (goods ascending, then agents ascending) matches
    :func:`allocation_welfare` bit for bit.
    """
    total = allocation_count(profile)
    if total > budget:
        raise EnumerationBudgetError(total, budget)
    n, m = profile.n, profile.m
    utilities = profile.utilities
    zero = Fraction(0)
    for assignment in product(range(n), repeat=m):
        totals = [zero] * n
        for good, agent in enumerate(assignment):
            totals[agent] += utilities[agent][good]
        neg_inf = 0
        finite = 0.0
        for value in totals:
            term = f.value(value)
            if term == NEG_INF:
                neg_inf += 1
            else:
                finite += term
        yield assignment, ExtendedWelfare(neg_inf, finite)


def maximize_welfare(
    profile: Profile,
    f: WelfareFunction,
    *,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
    tie_tolerance: float = TIE_TOLERANCE,
    method: str = "exhaustive",
) -> SolveResult:
    """Maximize the additive welfare over all allocations.

    ``method`` is ``"exhaustive"`` (plain scan) or ``"branch-and-bound"``;
    both return identical results, the latter merely prunes assignments that
    provably cannot reach the running maximum's tie band.
    """
    if method == "exhaustive":
        return _maximize_scan(profile, f, budget, tie_tolerance)
    if method == "branch-and-bound":
        return _maximize_branch_and_bound(profile, f, budget, tie_tolerance)
    raise ValueError(f"unknown solve method {method!r}")


def _maximize_scan(profile, f, budget, tolerance):
    tracker = _TieTracker(tolerance)
    for assignment, welfare in _iter_assignment_welfares(profile, f, budget):
        tracker.offer(assignment, welfare)
    return tracker.result()


def welfare_maximizers(
    profile: Profile,
    f: WelfareFunction,
    *,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
    tie_tolerance: float = TIE_TOLERANCE,
) -> tuple[SolveResult, tuple[Allocation, ...]]:
    """Like :func:`maximize_welfare`, but also return the whole maximizer set.

    The second element lists every allocation within the tie band, in
    lexicographic order; its length equals ``maximizer_set_size``.
    """
    tracker = _TieTracker(tie_tolerance, keep_members=True)
    for assignment, welfare in _iter_assignment_welfares(profile, f, budget):
        tracker.offer(assignment, welfare)
    return tracker.result(), tracker.band_allocations()


def _maximize_branch_and_bound(profile, f, budget, tolerance):
    total = allocation_count(profile)
    if total > budget:
        raise EnumerationBudgetError(total, budget)
    if not f.is_concave():
        # the per-good gain bound below is only an upper bound for concave f
        return _maximize_scan(profile, f, budget, tolerance)

    n, m = profile.n, profile.m
    utilities = profile.utilities
    # rest[i][t] = agent i's value for goods t..m-1
    rest = [[Fraction(0)] * (m + 1) for _ in range(n)]
    for i in range(n):
        for t in range(m - 1, -1, -1):
            rest[i][t] = rest[i][t + 1] + utilities[i][t]

    tracker = _TieTracker(tolerance)
    bundle = [Fraction(0)] * n
    assignment = [0] * m

    def optimistic_bound(t):
        # Upper-bounds any completion of goods t..m-1: an agent whose term is
        # still -inf is credited with everything remaining; agents already
        # finite get their current term plus, per good, the best single-good
        # gain any of them could realize (valid since f is concave).
        neg_lower = 0
        finite_upper = 0.0
        finite_agents = []
        finite_terms = []
        for i in range(n):
            term = f.value(bundle[i])
            if term == NEG_INF:
                top = f.value(bundle[i] + rest[i][t])
                if top == NEG_INF:
                    neg_lower += 1
                else:
                    finite_upper += top
            else:
                finite_agents.append(i)
                finite_terms.append(term)
                finite_upper += term
        for good in range(t, m):
            gain = 0.0
            for idx, i in enumerate(finite_agents):
                candidate = f.value(bundle[i] + utilities[i][good]) - finite_terms[idx]
                if candidate > gain:
                    gain = candidate
            finite_upper += gain
        return neg_lower, finite_upper

    def prunable(t):
        best = tracker.best
        if best is None:
            return False
        neg_lower, finite_upper = optimistic_bound(t)
        if neg_lower > best.neg_inf_count:
            return True
        return (
            neg_lower == best.neg_inf_count
            and finite_upper < best.finite_part - tolerance
        )

    zero = Fraction(0)

    def visit_leaf():
        # recompute from scratch in the same order as the plain scan so the
        # float welfare is bit-identical
        totals = [zero] * n
        for good, agent in enumerate(assignment):
            totals[agent] += utilities[agent][good]
        neg_inf = 0
        finite = 0.0
        for value in totals:
            term = f.value(value)
            if term == NEG_INF:
                neg_inf += 1
            else:
                finite += term
        tracker.offer(tuple(assignment), ExtendedWelfare(neg_inf, finite))

    def descend(t):
        if t == m:
            visit_leaf()
            return
        for agent in range(n):
            assignment[t] = agent
            bundle[agent] += utilities[agent][t]
            if not prunable(t + 1):
                descend(t + 1)
            bundle[agent] -= utilities[agent][t]

    descend(0)
    return tracker.result()


def max_nash_welfare(
    profile: Profile, *, budget: int = DEFAULT_ENUMERATION_BUDGET
) -> SolveResult:
    """Maximum Nash welfare with exact arithmetic.

    First maximizes the number of agents with positive utility; among those
    allocations, maximizes the exact rational product of the positive
    utilities.  No logs, no floats, so strict comparisons cannot be flipped
    by rounding.  Ties break to the lexicographically smallest assignment
    vector, and ``maximizer_set_size`` is the exact count of optima.

    The reported welfare is the log-welfare of the winner (zero-utility
    agents contribute -inf terms), matching ``maximize_welfare`` with the
    plain logarithm.
    """
    total = allocation_count(profile)
    if total > budget:
        raise EnumerationBudgetError(total, budget)
    n, m = profile.n, profile.m
    utilities = profile.utilities
    zero = Fraction(0)
    best_key = None
    best_assignment = None
    ties = 0
    for assignment in product(range(n), repeat=m):
        totals = [zero] * n
        for good, agent in enumerate(assignment):
            totals[agent] += utilities[agent][good]
        positive_count = 0
        prod = Fraction(1)
        for value in totals:
            if value > 0:
                positive_count += 1
                prod *= value
        key = (positive_count, prod)
        if best_key is None or key > best_key:
            best_key, best_assignment, ties = key, assignment, 1
        elif key == best_key:
            ties += 1
    positive_count, _ = best_key
    best_allocation = Allocation(best_assignment)
    finite = sum(
        math.log(float(u))
        for u in allocation_utilities(profile, best_allocation)
        if u > 0
    )
    welfare = ExtendedWelfare(n - positive_count, finite)
    return SolveResult(best_allocation, welfare, ties)


def solve(
    profile: Profile,
    f: WelfareFunction,
    *,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
    tie_tolerance: float = TIE_TOLERANCE,
    method: str = "exhaustive",
) -> SolveResult:
    """Run the welfarist rule for ``f``, routing log-affine specs to the
    exact Nash solver (same rule, sturdier arithmetic).

    The reported welfare is always under ``f`` itself.
    """
    if isinstance(f, LogAffine):
        result = max_nash_welfare(profile, budget=budget)
        return SolveResult(
            result.allocation,
            allocation_welfare(profile, result.allocation, f),
            result.maximizer_set_size,
        )
    return maximize_welfare(
        profile, f, budget=budget, tie_tolerance=tie_tolerance, method=method
    )
