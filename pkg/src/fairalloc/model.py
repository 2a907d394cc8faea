"""Profiles, allocations, and exhaustive allocation enumeration.

Utilities are exact rationals (`fractions.Fraction`).  Fairness checks and
the Nash-product solver never touch floats, so strict inequalities cannot be
flipped by rounding; floats enter only when a welfare function is applied.
"""

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Iterator

from .errors import (
    AllocationFormatError,
    AllocationMismatchError,
    EnumerationBudgetError,
    ProfileFormatError,
)

#: Upper bound on the number of allocations an exhaustive scan may visit.
DEFAULT_ENUMERATION_BUDGET = 10**7


def _to_utility(value, agent, good):
    if isinstance(value, bool):
        raise ValueError(f"bad utility for agent {agent}, good {good}: {value!r}")
    try:
        utility = Fraction(value)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise ValueError(
            f"bad utility for agent {agent}, good {good}: {value!r}"
        ) from exc
    if utility < 0:
        raise ValueError(
            f"negative utility for agent {agent}, good {good}: {value!r}"
        )
    return utility


@dataclass(frozen=True)
class Profile:
    """An allocation instance: one row of per-good utilities per agent.

    ``utilities[i][j]`` is agent ``i``'s value for good ``j``.  Rows may be
    given as any iterable of ints, ``Fraction``s, or strings such as
    ``"1/2"``; they are normalized to tuples of nonnegative ``Fraction``s.
    Bundle values are additive over goods.
    """

    utilities: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        rows = tuple(
            tuple(_to_utility(value, i, j) for j, value in enumerate(row))
            for i, row in enumerate(self.utilities)
        )
        if not rows:
            raise ValueError("a profile needs at least one agent")
        width = len(rows[0])
        for i, row in enumerate(rows):
            if len(row) != width:
                raise ValueError(
                    f"agent {i} has {len(row)} utilities, expected {width}"
                )
        object.__setattr__(self, "utilities", rows)

    @property
    def n(self) -> int:
        """Number of agents."""
        return len(self.utilities)

    @property
    def m(self) -> int:
        """Number of goods."""
        return len(self.utilities[0])

    def utility(self, agent: int, good: int) -> Fraction:
        if not 0 <= agent < self.n:
            raise IndexError(f"agent index {agent} out of range [0, {self.n})")
        if not 0 <= good < self.m:
            raise IndexError(f"good index {good} out of range [0, {self.m})")
        return self.utilities[agent][good]

    def bundle_utility(self, agent: int, goods: Iterable[int]) -> Fraction:
        """Exact value agent ``agent`` assigns to a set of goods.

        Duplicate indices collapse: a bundle is a set.
        """
        if not 0 <= agent < self.n:
            raise IndexError(f"agent index {agent} out of range [0, {self.n})")
        row = self.utilities[agent]
        total = Fraction(0)
        for good in set(goods):
            if not 0 <= good < self.m:
                raise IndexError(f"good index {good} out of range [0, {self.m})")
            total += row[good]
        return total


@dataclass(frozen=True)
class Allocation:
    """A total assignment of goods to agents.

    ``assignment[j]`` is the (0-based) agent that receives good ``j``.  The
    vector representation makes "every good goes to exactly one agent"
    structural; range validity against a profile is checked separately.
    """

    assignment: tuple[int, ...]

    def __post_init__(self):
        for j, agent in enumerate(self.assignment):
            if isinstance(agent, bool) or not isinstance(agent, int) or agent < 0:
                raise ValueError(f"good {j} assigned to invalid agent {agent!r}")
        object.__setattr__(self, "assignment", tuple(self.assignment))

    @property
    def m(self) -> int:
        return len(self.assignment)

    def bundles(self, n: int) -> tuple[frozenset[int], ...]:
        """The induced bundles ``(A_0, ..., A_{n-1})``; they partition the goods."""
        sets: list[set[int]] = [set() for _ in range(n)]
        for good, agent in enumerate(self.assignment):
            sets[agent].add(good)
        return tuple(frozenset(s) for s in sets)


def check_allocation(profile: Profile, allocation: Allocation) -> None:
    """Raise :class:`AllocationMismatchError` unless the allocation fits the profile."""
    if allocation.m != profile.m:
        raise AllocationMismatchError(
            f"allocation assigns {allocation.m} goods, profile has {profile.m}"
        )
    for good, agent in enumerate(allocation.assignment):
        if agent >= profile.n:
            raise AllocationMismatchError(
                f"good {good} assigned to agent {agent}, "
                f"but the profile has only {profile.n} agents"
            )


def allocation_utilities(profile: Profile, allocation: Allocation) -> tuple[Fraction, ...]:
    """Each agent's exact utility for their own bundle."""
    check_allocation(profile, allocation)
    totals = [Fraction(0)] * profile.n
    for good, agent in enumerate(allocation.assignment):
        totals[agent] += profile.utilities[agent][good]
    return tuple(totals)


def allocation_count(profile: Profile) -> int:
    """Number of distinct allocations: every good can go to every agent."""
    return profile.n**profile.m


def _assignment_at(n: int, m: int, index: int) -> tuple[int, ...]:
    digits = [0] * m
    for pos in range(m - 1, -1, -1):
        index, digits[pos] = divmod(index, n)
    return tuple(digits)


def enumerate_allocations(
    profile: Profile,
    *,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
    start: int = 0,
    stop: int | None = None,
) -> Iterator[Allocation]:
    """Yield every allocation exactly once, in lexicographic assignment order.

    The order is fixed: good 0 is the most significant position, agents are
    tried in increasing index.  ``start``/``stop`` select a half-open index
    range so the scan can be partitioned; concatenating adjacent ranges
    reproduces the full enumeration.

    Raises :class:`EnumerationBudgetError` before yielding anything if the
    total count exceeds ``budget``.
    """
    total = allocation_count(profile)
    if total > budget:
        raise EnumerationBudgetError(total, budget)
    if stop is None:
        stop = total
    if not 0 <= start <= stop <= total:
        raise ValueError(f"invalid enumeration range [{start}, {stop}) of {total}")
    if start == 0 and stop == total:
        for assignment in product(range(profile.n), repeat=profile.m):
            yield Allocation(assignment)
    else:
        for index in range(start, stop):
            yield Allocation(_assignment_at(profile.n, profile.m, index))


# ---------------------------------------------------------------------------
# File formats.
#
# A profile is a JSON object {"agents": n, "goods": m, "utilities": [[...]]}
# where each entry is an integer or a string rational such as "1/2".  Floats
# are rejected so that values survive a round trip bit for bit.  An
# allocation is {"assignment": [a_0, ..., a_{m-1}]} with 0-based agent
# indices, one per good.
# ---------------------------------------------------------------------------


def _entry_to_fraction(value, agent, good):
    if isinstance(value, bool):
        raise ProfileFormatError(
            f"utility for agent {agent}, good {good} must be an integer "
            f"or a \"p/q\" string, got {value!r}"
        )
    if isinstance(value, int):
        parsed = Fraction(value)
    elif isinstance(value, str):
        try:
            parsed = Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ProfileFormatError(
                f"unreadable utility for agent {agent}, good {good}: {value!r}"
            ) from exc
    elif isinstance(value, float):
        raise ProfileFormatError(
            f"utility for agent {agent}, good {good} is a float ({value!r}); "
            f"write non-integers as \"p/q\" strings to keep them exact"
        )
    else:
        raise ProfileFormatError(
            f"utility for agent {agent}, good {good} has unsupported type "
            f"{type(value).__name__}"
        )
    if parsed < 0:
        raise ProfileFormatError(
            f"negative utility for agent {agent}, good {good}: {value!r}"
        )
    return parsed


def loads_profile(text: str) -> Profile:
    """Parse profile JSON text, preserving rationals exactly."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProfileFormatError(
            f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(data, dict):
        raise ProfileFormatError("profile must be a JSON object")
    missing = {"agents", "goods", "utilities"} - data.keys()
    if missing:
        raise ProfileFormatError(f"profile is missing fields: {', '.join(sorted(missing))}")
    agents, goods, matrix = data["agents"], data["goods"], data["utilities"]
    if isinstance(agents, bool) or not isinstance(agents, int) or agents < 1:
        raise ProfileFormatError(f"\"agents\" must be a positive integer, got {agents!r}")
    if isinstance(goods, bool) or not isinstance(goods, int) or goods < 0:
        raise ProfileFormatError(f"\"goods\" must be a nonnegative integer, got {goods!r}")
    if not isinstance(matrix, list):
        raise ProfileFormatError("\"utilities\" must be a list of rows")
    if len(matrix) != agents:
        raise ProfileFormatError(
            f"\"agents\" is {agents} but \"utilities\" has {len(matrix)} rows"
        )
    rows = []
    for i, row in enumerate(matrix):
        if not isinstance(row, list):
            raise ProfileFormatError(f"utilities row for agent {i} must be a list")
        if len(row) != goods:
            raise ProfileFormatError(
                f"\"goods\" is {goods} but agent {i} has {len(row)} utilities"
            )
        rows.append(tuple(_entry_to_fraction(value, i, j) for j, value in enumerate(row)))
    return Profile(tuple(rows))


def _fraction_entry(value: Fraction):
    if value.denominator == 1:
        return int(value)
    return f"{value.numerator}/{value.denominator}"


def dumps_profile(profile: Profile) -> str:
    """Serialize a profile to JSON; :func:`loads_profile` inverts this exactly."""
    payload = {
        "agents": profile.n,
        "goods": profile.m,
        "utilities": [[_fraction_entry(v) for v in row] for row in profile.utilities],
    }
    return json.dumps(payload, indent=2) + "\n"


def loads_allocation(text: str) -> Allocation:
    """Parse allocation JSON text."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise AllocationFormatError(
            f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(data, dict) or "assignment" not in data:
        raise AllocationFormatError('allocation must be an object with an "assignment" list')
    assignment = data["assignment"]
    if not isinstance(assignment, list):
        raise AllocationFormatError('"assignment" must be a list of agent indices')
    for j, agent in enumerate(assignment):
        if isinstance(agent, bool) or not isinstance(agent, int) or agent < 0:
            raise AllocationFormatError(
                f"good {j} assigned to invalid agent {agent!r}"
            )
    return Allocation(tuple(assignment))


def dumps_allocation(allocation: Allocation) -> str:
    """Serialize an allocation to JSON."""
    return json.dumps({"assignment": list(allocation.assignment)}, indent=2) + "\n"
