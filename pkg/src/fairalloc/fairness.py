"""Envy-freeness, EF1, and Pareto-optimality checks with auditable witnesses.

All comparisons are exact rational arithmetic.  Verdicts carry enough data to
re-check the decision by hand: an EF1 violation lists, for every single good
in the envied bundle, the value that remains after removing it.
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .errors import EnumerationBudgetError
from .model import (
    DEFAULT_ENUMERATION_BUDGET,
    Allocation,
    Profile,
    allocation_count,
    allocation_utilities,
    check_allocation,
)


@dataclass(frozen=True)
class EnvyWitness:
    """Agent ``envier`` strictly prefers agent ``envied``'s bundle to their own."""

    envier: int
    envied: int
    own_utility: Fraction
    envied_utility: Fraction


@dataclass(frozen=True)
class EfVerdict:
    holds: bool
    violations: tuple[EnvyWitness, ...] = ()


@dataclass(frozen=True)
class Ef1Violation:
    """Envy that no single-good removal eliminates.

    ``removal_gaps`` holds ``(good, remaining)`` pairs: for every good in the
    envied bundle, the envier's value for that bundle without the good.
    Every listed remainder strictly exceeds ``own_utility``.
    """

    envier: int
    envied: int
    own_utility: Fraction
    removal_gaps: tuple[tuple[int, Fraction], ...]


@dataclass(frozen=True)
class Ef1Verdict:
    holds: bool
    violations: tuple[Ef1Violation, ...] = ()


@dataclass(frozen=True)
class ParetoVerdict:
    """``dominator``, present iff not optimal, weakly improves every agent and
    strictly improves at least one."""

    optimal: bool
    dominator: Allocation | None = None


def is_ef(profile: Profile, allocation: Allocation) -> EfVerdict:
    """Envy-freeness: every agent weakly prefers their own bundle to every other."""
    check_allocation(profile, allocation)
    bundles = allocation.bundles(profile.n)
    own = allocation_utilities(profile, allocation)
    violations = []
    for i in range(profile.n):
        row = profile.utilities[i]
        for j in range(profile.n):
            if i == j:
                continue
            envied_value = sum((row[g] for g in bundles[j]), Fraction(0))
            if own[i] < envied_value:
                violations.append(EnvyWitness(i, j, own[i], envied_value))
    return EfVerdict(not violations, tuple(violations))


def is_ef1(profile: Profile, allocation: Allocation) -> Ef1Verdict:
    """Envy-freeness up to one good.

    Holds iff for every ordered pair ``(i, j)`` with a nonempty bundle
    ``A_j`` there is some good ``g`` in ``A_j`` with
    ``u_i(A_i) >= u_i(A_j \\ {g})``.  Pairs with an empty ``A_j`` are skipped,
    which keeps the removal step well-defined (with nonnegative utilities an
    empty bundle cannot be envied anyway).
    """
    check_allocation(profile, allocation)
    bundles = allocation.bundles(profile.n)
    own = allocation_utilities(profile, allocation)
    violations = []
    for i in range(profile.n):
        row = profile.utilities[i]
        for j in range(profile.n):
            if i == j or not bundles[j]:
                continue
            envied_value = sum((row[g] for g in bundles[j]), Fraction(0))
            best_removal = max(row[g] for g in bundles[j])
            if own[i] >= envied_value - best_removal:
                continue
            gaps = tuple((g, envied_value - row[g]) for g in sorted(bundles[j]))
            violations.append(Ef1Violation(i, j, own[i], gaps))
    return Ef1Verdict(not violations, tuple(violations))


def is_pareto_optimal(
    profile: Profile,
    allocation: Allocation,
    *,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
) -> ParetoVerdict:
    """Exhaustive Pareto check.

    Scans every allocation; returns the first dominator in lexicographic
    assignment order, so the result does not depend on how the scan might be
    partitioned.
    """
    check_allocation(profile, allocation)
    current = allocation_utilities(profile, allocation)
    total = allocation_count(profile)
    if total > budget:
        raise EnumerationBudgetError(total, budget)
    n, m = profile.n, profile.m
    rows = profile.utilities
    zero = Fraction(0)
    for assignment in product(range(n), repeat=m):
        totals = [zero] * n
        for good, agent in enumerate(assignment):
            totals[agent] += rows[agent][good]
        if all(u >= c for u, c in zip(totals, current)) and any(
            u > c for u, c in zip(totals, current)
        ):
            return ParetoVerdict(False, Allocation(assignment))
    return ParetoVerdict(True, None)
