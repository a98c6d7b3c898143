"""Polycyclic generating sequences, prime refinement, and normal forms.

A polycyclic generating sequence for a finite solvable group is a list of
elements whose prefix subgroups form a normal tower with cyclic quotients.
This module computes such sequences by brute force on enumerated fixtures,
refines them with a descending prime-power exponent schedule so that every
quotient order is 1 or a known prime, and builds lookup tables mapping each
element of every prefix subgroup to its unique normal-form exponent tuple.
The tables double as classical stand-ins for decomposition and membership
queries that a computationally stronger party would answer.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass
from typing import Iterable, Sequence

from .groups import (
    DEFAULT_CLOSURE_CAP,
    ClosureOverflowError,
    ElementCode,
    GroupOracle,
    enumerate_closure,
)


class NotSolvableError(RuntimeError):
    """The group has no polycyclic generating sequence."""


class ChainError(RuntimeError):
    """A claimed polycyclic sequence fails normal-form uniqueness."""


class RefinementError(ValueError):
    """Prime refinement produced quotient orders outside {1, r_i}."""


@dataclass
class PolycyclicSequence:
    """Elements of a polycyclic generating sequence with optional annotations.

    ``primes[i]`` is the prime such that the i-th quotient order lies in
    {1, primes[i]}; ``quotient_orders[i]`` is that order when known.
    """

    elements: tuple[ElementCode, ...]
    primes: tuple[int, ...] | None = None
    quotient_orders: tuple[int, ...] | None = None

    def __len__(self) -> int:
        return len(self.elements)


# ---------------------------------------------------------------------------
# Small number-theory helpers (trial division is exact at desk scale)
# ---------------------------------------------------------------------------

def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def prime_factors(n: int) -> tuple[int, ...]:
    """Distinct prime factors of n in ascending order (trial division)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    factors = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            factors.append(d)
            while n % d == 0:
                n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        factors.append(n)
    return tuple(factors)


# ---------------------------------------------------------------------------
# Normal-form tables for a subgroup tower
# ---------------------------------------------------------------------------

class SubgroupChain:
    """Normal-form tables for the prefix subgroups of a polycyclic sequence.

    Level j holds every element of the subgroup generated by the first j
    sequence elements, keyed to its unique exponent tuple (a_1, ..., a_j)
    with a_i below the i-th quotient order.  Construction requires the
    sequence to be genuinely polycyclic (each prefix subgroup normal in the
    next); a uniqueness collision during the build raises ChainError, but
    callers feeding untrusted sequences must establish normality separately
    (see ``validate_normality``).
    """

    def __init__(
        self,
        G: GroupOracle,
        elements: Sequence[ElementCode],
        cap: int = DEFAULT_CLOSURE_CAP,
    ):
        self.G = G
        self.elements = tuple(elements)
        tables: list[dict[ElementCode, tuple[int, ...]]] = [{G.identity: ()}]
        orders: list[int] = []
        for h in self.elements:
            prev = tables[-1]
            m, cur = 1, h
            while cur not in prev:
                cur = G.product(cur, h)
                m += 1
                if m > cap:
                    raise ClosureOverflowError(
                        f"quotient order search exceeded cap of {cap}"
                    )
            if len(prev) * m > cap:
                raise ClosureOverflowError(
                    f"subgroup level exceeded cap of {cap} elements"
                )
            table: dict[ElementCode, tuple[int, ...]] = {}
            power = G.identity
            for a in range(m):
                if a == 0:
                    for u, exps in prev.items():
                        table[u] = exps + (0,)
                else:
                    power = h if a == 1 else G.product(power, h)
                    for u, exps in prev.items():
                        v = G.product(u, power)
                        if v in table:
                            raise ChainError(
                                "normal-form collision: sequence is not polycyclic"
                            )
                        table[v] = exps + (a,)
            tables.append(table)
            orders.append(m)
        self._tables = tables
        self._level_lists = [list(t) for t in tables]
        self.quotient_orders = tuple(orders)

    def __len__(self) -> int:
        return len(self.elements)

    def level_order(self, j: int) -> int:
        """Size of the j-th prefix subgroup (level 0 is the trivial group)."""
        return len(self._tables[j])

    def level_elements(self, j: int) -> list[ElementCode]:
        """All elements of the j-th prefix subgroup, in deterministic order."""
        return self._level_lists[j]

    def group_order(self) -> int:
        return len(self._tables[-1])

    def is_member(self, j: int, h: ElementCode) -> bool:
        return h in self._tables[j]

    def decompose(self, j: int, h: ElementCode) -> tuple[int, ...] | None:
        """Normal-form exponents of h over level j, or None if not a member."""
        return self._tables[j].get(h)

    def validate_normality(self) -> None:
        """Check each prefix subgroup is normal in the next; raise ChainError.

        Conjugates of every earlier sequence element by the new one must land
        in the previous level, which (the levels being finite) is equivalent
        to normality.
        """
        G = self.G
        for i in range(1, len(self.elements)):
            h = self.elements[i]
            h_inv = G.inverse(h)
            for earlier in self.elements[:i]:
                conj = G.product(G.product(h, earlier), h_inv)
                if not self.is_member(i, conj):
                    raise ChainError(f"prefix subgroup {i} is not normal in level {i + 1}")


_chain_cache: "weakref.WeakKeyDictionary[GroupOracle, dict]" = weakref.WeakKeyDictionary()


def get_chain(
    G: GroupOracle,
    elements: Sequence[ElementCode],
    cap: int = DEFAULT_CLOSURE_CAP,
) -> SubgroupChain:
    """Memoized SubgroupChain lookup (chains are immutable and shareable)."""
    per_group = _chain_cache.setdefault(G, {})
    key = (tuple(elements), cap)
    chain = per_group.get(key)
    if chain is None:
        chain = SubgroupChain(G, elements, cap)
        per_group[key] = chain
    return chain


_order_cache: "weakref.WeakKeyDictionary[GroupOracle, dict]" = weakref.WeakKeyDictionary()


def group_order(G: GroupOracle, cap: int = DEFAULT_CLOSURE_CAP) -> int:
    """Order of the full group by closure enumeration (memoized)."""
    per_group = _order_cache.setdefault(G, {})
    order = per_group.get(cap)
    if order is None:
        order = len(enumerate_closure(G, G.generators, cap))
        per_group[cap] = order
    return order


# ---------------------------------------------------------------------------
# Computing a polycyclic generating sequence by brute force
# ---------------------------------------------------------------------------

def _conjugation_closure(
    G: GroupOracle,
    seed_gens: list[ElementCode],
    conjugators: list[ElementCode],
    cap: int,
) -> tuple[list[ElementCode], list[ElementCode]]:
    """Smallest subgroup containing ``seed_gens`` closed under conjugation.

    Returns (generators, elements).  Used to take normal closures inside the
    subgroup generated by ``conjugators``.
    """
    gens = list(dict.fromkeys(seed_gens))
    conj_inverses = [G.inverse(c) for c in conjugators]
    while True:
        elements = enumerate_closure(G, gens, cap)
        element_set = set(elements)
        new_gens = []
        for c, c_inv in zip(conjugators, conj_inverses):
            for x in elements:
                y = G.product(G.product(c, x), c_inv)
                if y not in element_set:
                    new_gens.append(y)
        if not new_gens:
            return gens, elements
        gens.extend(dict.fromkeys(new_gens))


def _derived_series(
    G: GroupOracle, cap: int
) -> list[list[ElementCode]]:
    """Element lists of the derived series, ending with the trivial group."""
    level_gens = list(G.generators)
    elements = enumerate_closure(G, level_gens, cap)
    series = [elements]
    while len(elements) > 1:
        commutators = []
        inverses = {g: G.inverse(g) for g in level_gens}
        for a in level_gens:
            for b in level_gens:
                c = G.product(G.product(a, b), G.product(inverses[a], inverses[b]))
                commutators.append(c)
        next_gens, next_elements = _conjugation_closure(G, commutators, level_gens, cap)
        if len(next_elements) >= len(elements):
            raise NotSolvableError(
                "derived series stabilized above the trivial group"
            )
        series.append(next_elements)
        level_gens, elements = next_gens, next_elements
    return series


_pcgs_cache: "weakref.WeakKeyDictionary[GroupOracle, dict]" = weakref.WeakKeyDictionary()


def compute_pcgs(G: GroupOracle, cap: int = DEFAULT_CLOSURE_CAP) -> PolycyclicSequence:
    """Polycyclic generating sequence via the derived series (memoized).

    Walks the derived series from the bottom up; inside each abelian layer
    any greedy choice of new generators keeps every prefix subgroup normal
    in the next, and each addition at least doubles the prefix subgroup, so
    the sequence length is at most log2 of the group order per layer.
    Raises NotSolvableError when the derived series does not reach the
    trivial group.
    """
    per_group = _pcgs_cache.setdefault(G, {})
    cached = per_group.get(cap)
    if cached is not None:
        return cached

    series = _derived_series(G, cap)
    sequence: list[ElementCode] = []
    reached = {G.identity}
    for layer in reversed(series):
        target_size = len(layer)
        if len(reached) == target_size:
            continue
        for candidate in sorted(layer):
            if candidate in reached:
                continue
            sequence.append(candidate)
            reached = set(enumerate_closure(G, sequence, cap))
            if len(reached) == target_size:
                break
    chain = get_chain(G, sequence, cap)
    result = PolycyclicSequence(tuple(sequence), None, chain.quotient_orders)
    per_group[cap] = result
    return result


# ---------------------------------------------------------------------------
# Prime refinement
# ---------------------------------------------------------------------------

def refinement_exponents(primes: Iterable[int], n: int) -> tuple[int, ...]:
    """Strictly decreasing exponent schedule used to refine a sequence.

    For ascending primes p_1 < ... < p_l, the schedule lists, for each i and
    each a in 1..n, the value p_i^(n-a) times the product of p_j^n over all
    j > i.  The last entry is 1 and every ratio of consecutive entries is
    one of the primes, so replacing a generator k by its schedule powers
    k^e splits each cyclic quotient into prime-order steps.
    """
    listed = list(primes)
    ordered = sorted(set(listed))
    if not ordered:
        raise ValueError("prime set must be nonempty")
    if len(ordered) != len(listed):
        raise ValueError("prime set contains repeated entries")
    for p in ordered:
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
    if n < 1:
        raise ValueError("n must be >= 1")
    schedule = []
    for i, p in enumerate(ordered):
        tail = math.prod(q**n for q in ordered[i + 1:])
        for a in range(1, n + 1):
            schedule.append(p ** (n - a) * tail)
    return tuple(schedule)


_refine_cache: "weakref.WeakKeyDictionary[GroupOracle, dict]" = weakref.WeakKeyDictionary()


def refine_with_primes(
    G: GroupOracle,
    pcgs: PolycyclicSequence,
    primes: Iterable[int],
    n: int | None = None,
    cap: int = DEFAULT_CLOSURE_CAP,
) -> PolycyclicSequence:
    """Refine a polycyclic sequence so each quotient order is 1 or a prime.

    Each sequence element k is replaced by its powers k^e over the full
    exponent schedule, giving l*n entries per original element.  The prime
    attached to a refined position is the schedule ratio at that position;
    the first position of every block gets the smallest prime, which is the
    ratio the schedule would have continued with.  Requires ``primes`` to
    cover every prime factor of the group order: the result is validated
    against the quotient-order invariant and the enumerated group order,
    and a violation raises RefinementError.  Memoized per oracle (the
    computation is deterministic).
    """
    ordered = tuple(sorted(set(primes)))
    if n is None:
        n = G.encoding_length
    if not pcgs.elements:
        return PolycyclicSequence((), (), ())
    if not ordered:
        raise RefinementError("prime set must cover the group order; got an empty set")

    per_group = _refine_cache.setdefault(G, {})
    key = (pcgs.elements, ordered, n, cap)
    cached = per_group.get(key)
    if cached is not None:
        return cached

    schedule = refinement_exponents(ordered, n)
    elements: list[ElementCode] = []
    attached: list[int] = []
    for k in pcgs.elements:
        for j, exponent in enumerate(schedule):
            elements.append(G.power(k, exponent))
            attached.append(ordered[0] if j == 0 else schedule[j - 1] // schedule[j])

    chain = get_chain(G, elements, cap)
    orders = chain.quotient_orders
    for i, (m, r) in enumerate(zip(orders, attached)):
        if m not in (1, r):
            raise RefinementError(
                f"quotient order {m} at position {i + 1} is not in {{1, {r}}}; "
                f"the prime set {list(ordered)} may be missing a factor of the order"
            )
    expected = group_order(G, cap)
    if chain.group_order() != expected:
        raise RefinementError(
            f"refined sequence generates {chain.group_order()} of {expected} elements"
        )
    result = PolycyclicSequence(tuple(elements), tuple(attached), orders)
    per_group[key] = result
    return result


# ---------------------------------------------------------------------------
# Decomposition and membership (classical stand-ins)
# ---------------------------------------------------------------------------

def decompose(
    G: GroupOracle,
    pcgs: PolycyclicSequence,
    j: int,
    h: ElementCode,
    cap: int = DEFAULT_CLOSURE_CAP,
) -> tuple[int, ...] | None:
    """Exponents (a_1..a_j) with h equal to the normal-form word, else None."""
    if not 0 <= j <= len(pcgs.elements):
        raise ValueError(f"level {j} out of range 0..{len(pcgs.elements)}")
    return get_chain(G, pcgs.elements, cap).decompose(j, h)


def is_member(
    G: GroupOracle,
    pcgs: PolycyclicSequence,
    j: int,
    h: ElementCode,
    cap: int = DEFAULT_CLOSURE_CAP,
) -> bool:
    """Whether h lies in the j-th prefix subgroup."""
    if not 0 <= j <= len(pcgs.elements):
        raise ValueError(f"level {j} out of range 0..{len(pcgs.elements)}")
    return get_chain(G, pcgs.elements, cap).is_member(j, h)
