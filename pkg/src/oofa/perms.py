"""Permutation enumeration and standardized-position arithmetic.

A run of an order-of-addition experiment is an ordering of m components,
identified internally as integers 1..m.  With q_c the 1-based position of
component c in a run, the standardized position is

    p_c = 2 q_c / (m (m + 1)),

which satisfies three exact constraints over any complete ordering:

    sum_c p_c          = 1
    sum_c p_c^2        = 2 (2m + 1) / (3 m (m + 1))
    sum_{c<d} p_c p_d  = (3 m^2 - m - 2) / (6 m (m + 1))

These identities are what make the reduced response-surface parameterizations
in :mod:`oofa.models` full rank without an explicit intercept; the test suite
asserts them to 1e-12 for every permutation up to m = 8.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import factorial
from typing import Iterable

from .errors import CapacityError, ValidationError

#: Hard cap on the component count: downstream modules materialize all m!
#: orders (40320 rows at m = 8), so larger m is refused outright.
MAX_COMPONENTS = 8


@dataclass(frozen=True)
class Permutation:
    """One ordering of the components 1..m.

    ``order[j]`` is the component applied at position j+1; it must be a
    bijection on {1, ..., m}.
    """

    order: tuple[int, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.order, tuple):
            object.__setattr__(self, "order", tuple(self.order))
        m = len(self.order)
        if m == 0:
            raise ValidationError("a permutation needs at least one component")
        if sorted(self.order) != list(range(1, m + 1)):
            raise ValidationError(
                f"order {self.order!r} is not a permutation of 1..{m}"
            )

    @property
    def m(self) -> int:
        return len(self.order)

    def position_of(self, c: int) -> int:
        """1-based position of component c."""
        try:
            return self.order.index(c) + 1
        except ValueError:
            raise ValidationError(
                f"component {c} is not part of this {self.m}-component run"
            ) from None

    def positions(self) -> tuple[int, ...]:
        """Positions q_c indexed by component: element c-1 is q_c."""
        q = [0] * self.m
        for pos, comp in enumerate(self.order, start=1):
            q[comp - 1] = pos
        return tuple(q)

    def reverse(self) -> "Permutation":
        return Permutation(self.order[::-1])

    def label(self, labels: tuple[str, ...] | None = None) -> str:
        """Space-separated external labels, e.g. ``"B C A"``."""
        if labels is None:
            return " ".join(str(c) for c in self.order)
        return " ".join(labels[c - 1] for c in self.order)


@dataclass(frozen=True)
class StdPositions:
    """Standardized positions p_c of one run, indexed by component."""

    p: tuple[float, ...]

    @property
    def m(self) -> int:
        return len(self.p)


def check_capacity(m: int) -> int:
    if not isinstance(m, int) or isinstance(m, bool):
        raise ValidationError(f"m must be an integer, got {m!r}")
    if not 1 <= m <= MAX_COMPONENTS:
        raise CapacityError(
            f"m must be between 1 and {MAX_COMPONENTS} (got {m}); "
            f"all m! orders are materialized, which is infeasible beyond "
            f"{MAX_COMPONENTS}! = {factorial(MAX_COMPONENTS)}"
        )
    return m


@lru_cache(maxsize=None)
def enumerate_permutations(m: int) -> tuple[Permutation, ...]:
    """All m! orderings of 1..m in lexicographic order.

    Deterministic and cached; the returned tuple (and its elements) are
    immutable, so sharing across threads is safe.
    """
    check_capacity(m)
    return tuple(
        Permutation(order) for order in itertools.permutations(range(1, m + 1))
    )


def standardize(perm: Permutation) -> StdPositions:
    """Map a run to its standardized positions p_c = 2 q_c / (m (m + 1))."""
    m = perm.m
    scale = 2.0 / (m * (m + 1))
    return StdPositions(tuple(q * scale for q in perm.positions()))


def signed_distance(perm: Permutation, c: int, d: int) -> int:
    """q_d - q_c: positive iff component c precedes component d."""
    if c == d:
        raise ValidationError(f"signed distance needs two distinct components, got c = d = {c}")
    return perm.position_of(d) - perm.position_of(c)


def as_permutations(runs: Iterable) -> tuple[Permutation, ...]:
    """Coerce an iterable of orderings (tuples or Permutations) to runs."""
    out = tuple(r if isinstance(r, Permutation) else Permutation(tuple(r)) for r in runs)
    if not out:
        raise ValidationError("at least one run is required")
    return out
