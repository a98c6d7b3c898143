"""Honest and adversarial provers for the order-verification protocols.

The honest prover simulates a computationally stronger party with exact
classical stand-ins: group order by closure enumeration, prime factors by
trial division, and decomposition/membership answers from normal-form
tables.  The adversaries implement the cheating strategies the soundness
experiments measure: inflating a trivial quotient by guessing the hidden
bit, trying to deflate a nontrivial quotient, tampering with a committed
sequence, answering with random bits, and committing to a deliberately
wrong subgroup tower.

All strategies are deterministic given their random stream, so experiment
campaigns are reproducible seed by seed.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass
from random import Random
from typing import Sequence

from .groups import DEFAULT_CLOSURE_CAP, ElementCode, GroupOracle
from .polycyclic import (
    PolycyclicSequence,
    SubgroupChain,
    compute_pcgs,
    get_chain,
    group_order,
    prime_factors,
    refine_with_primes,
)


class ProverError(RuntimeError):
    """The prover cannot produce the requested message."""


@dataclass(frozen=True)
class Commitment:
    """First message of the 3-message protocol.

    ``generator_exponents`` decomposes every group generator over the full
    committed sequence; ``power_exponents[i-2]`` decomposes the r_i-th power
    of the i-th element over the prefix before it (for i >= 2); and
    ``conjugate_exponents[i-2][l-1]`` decomposes the conjugate of the l-th
    element by the i-th one over the same prefix.
    """

    elements: tuple[ElementCode, ...]
    primes: tuple[int, ...]
    generator_exponents: tuple[tuple[int, ...], ...]
    power_exponents: tuple[tuple[int, ...], ...]
    conjugate_exponents: tuple[tuple[tuple[int, ...], ...], ...]

    @property
    def length(self) -> int:
        return len(self.elements)


@dataclass(frozen=True)
class Response:
    """Final prover message: one bit and one exponent row per round."""

    bits: tuple[int, ...]
    exponents: tuple[tuple[int, ...], ...]


def build_commitment(
    G: GroupOracle,
    elements: Sequence[ElementCode],
    primes: Sequence[int],
    cap: int = DEFAULT_CLOSURE_CAP,
) -> Commitment:
    """Assemble the decomposition tables committing to a polycyclic tower."""
    elements = tuple(elements)
    primes = tuple(primes)
    if len(elements) != len(primes):
        raise ProverError("need one prime per committed element")
    chain = get_chain(G, elements, cap)
    t = len(elements)

    generator_rows = []
    for g in G.generators:
        row = chain.decompose(t, g)
        if row is None:
            raise ProverError("committed sequence does not generate the group")
        generator_rows.append(row)

    power_rows = []
    conjugate_rows = []
    for i in range(2, t + 1):
        h = elements[i - 1]
        target = G.power(h, primes[i - 1])
        row = chain.decompose(i - 1, target)
        if row is None:
            raise ProverError(f"power of element {i} does not fall into its prefix")
        power_rows.append(row)
        h_inv = G.inverse(h)
        conj_block = []
        for l in range(1, i):
            conj = G.product(G.product(h, elements[l - 1]), h_inv)
            conj_row = chain.decompose(i - 1, conj)
            if conj_row is None:
                raise ProverError(f"conjugate of element {l} by element {i} escapes the prefix")
            conj_block.append(conj_row)
        conjugate_rows.append(tuple(conj_block))

    return Commitment(
        elements=elements,
        primes=primes,
        generator_exponents=tuple(generator_rows),
        power_exponents=tuple(power_rows),
        conjugate_exponents=tuple(conjugate_rows),
    )


_honest_commitment_cache: "weakref.WeakKeyDictionary[GroupOracle, dict]" = (
    weakref.WeakKeyDictionary()
)


def honest_commitment(G: GroupOracle, cap: int = DEFAULT_CLOSURE_CAP) -> Commitment:
    """The commitment an honest prover sends (memoized: it is deterministic).

    Computes the group order, factors it, refines a polycyclic sequence so
    every quotient order is 1 or a known prime, and decomposes everything
    the commitment must certify.  Raises NotSolvableError for groups with
    no polycyclic sequence (the honest prover gives up).
    """
    per_group = _honest_commitment_cache.setdefault(G, {})
    cached = per_group.get(cap)
    if cached is not None:
        return cached
    order = group_order(G, cap)
    factors = prime_factors(order)
    base = compute_pcgs(G, cap)
    refined = refine_with_primes(G, base, factors, cap=cap)
    commitment = build_commitment(G, refined.elements, refined.primes or (), cap)
    per_group[cap] = commitment
    return commitment


def honest_refined_sequence(
    G: GroupOracle, cap: int = DEFAULT_CLOSURE_CAP
) -> PolycyclicSequence:
    """The refined sequence behind the honest commitment."""
    order = group_order(G, cap)
    base = compute_pcgs(G, cap)
    return refine_with_primes(G, base, prime_factors(order), cap=cap)


# ---------------------------------------------------------------------------
# Prover strategies
# ---------------------------------------------------------------------------

class HonestProver:
    """Responds exactly as the completeness analysis prescribes.

    Per round: test whether the masked challenge element lies in the prefix
    subgroup; answer bit 0 and the decomposition of the round element when
    it does (all-zero exponents when no decomposition exists), else bit 1
    with all-zero exponents.
    """

    name = "honest"

    def __init__(self, G: GroupOracle, rng: Random, cap: int = DEFAULT_CLOSURE_CAP):
        self.G = G
        self.rng = rng
        self.cap = cap

    def commit(self) -> Commitment:
        return honest_commitment(self.G, self.cap)

    def _chain(self, elements: Sequence[ElementCode]) -> SubgroupChain:
        return get_chain(self.G, elements, self.cap)

    def _honest_row(
        self, chain: SubgroupChain, elements: Sequence[ElementCode], i: int,
        masked: ElementCode,
    ) -> tuple[int, tuple[int, ...]]:
        member = chain.is_member(i - 1, masked)
        if member:
            row = chain.decompose(i - 1, elements[i - 1])
            return 0, row if row is not None else (0,) * (i - 1)
        return 1, (0,) * (i - 1)

    def respond(
        self, elements: Sequence[ElementCode], masked: Sequence[ElementCode]
    ) -> Response:
        chain = self._chain(elements)
        bits, rows = [], []
        for i in range(1, len(elements) + 1):
            bit, row = self._honest_row(chain, elements, i, masked[i - 1])
            bits.append(bit)
            rows.append(row)
        return Response(tuple(bits), tuple(rows))


def _inflatable_rounds(chain: SubgroupChain) -> list[int]:
    """1-based trivial-quotient rounds where a wrong non-matching word exists."""
    return [
        i
        for i in range(1, len(chain) + 1)
        if chain.quotient_orders[i - 1] == 1 and chain.level_order(i - 1) >= 2
    ]


def _pick_other_element(
    chain: SubgroupChain, level: int, avoid: ElementCode, rng: Random
) -> ElementCode:
    """Deterministically pick a level element different from ``avoid``."""
    pool = chain.level_elements(level)
    avoid_index = pool.index(avoid)
    index = rng.randrange(len(pool) - 1)
    if index >= avoid_index:
        index += 1
    return pool[index]


class GuessInflateProver(HonestProver):
    """Claims a nontrivial quotient on trivial rounds by guessing the bit.

    On each targeted round it sends exponents decomposing a different
    element of the prefix subgroup (so the equality test cannot pass) and a
    uniformly random bit; everywhere else it plays honestly.  With an exact
    challenge sampler the guess succeeds with probability exactly 1/2 per
    targeted round.
    """

    name = "guess_inflate"

    def __init__(self, G, rng, cap=DEFAULT_CLOSURE_CAP, target_rounds: int = 1):
        super().__init__(G, rng, cap)
        self.target_rounds = target_rounds

    def _targets(self, chain: SubgroupChain) -> set[int]:
        return set(_inflatable_rounds(chain)[: self.target_rounds])

    def respond(self, elements, masked):
        chain = self._chain(elements)
        targets = self._targets(chain)
        bits, rows = [], []
        for i in range(1, len(elements) + 1):
            if i in targets:
                wrong = _pick_other_element(chain, i - 1, elements[i - 1], self.rng)
                row = chain.decompose(i - 1, wrong)
                bits.append(self.rng.getrandbits(1))
                rows.append(row)
            else:
                bit, row = self._honest_row(chain, elements, i, masked[i - 1])
                bits.append(bit)
                rows.append(row)
        return Response(tuple(bits), tuple(rows))


class DeflateProver(HonestProver):
    """Claims trivial quotients on nontrivial rounds with random exponents.

    No exponent row can make the equality test pass on a nontrivial round
    (the round element lies outside the prefix subgroup), so this strategy
    can only yield the true order or an abort, never a deflated order.
    """

    name = "deflate"

    def respond(self, elements, masked):
        chain = self._chain(elements)
        bits, rows = [], []
        for i in range(1, len(elements) + 1):
            if chain.quotient_orders[i - 1] > 1:
                row = tuple(
                    self.rng.randrange(chain.quotient_orders[j]) for j in range(i - 1)
                )
                bits.append(self.rng.getrandbits(1))
                rows.append(row)
            else:
                bit, row = self._honest_row(chain, elements, i, masked[i - 1])
                bits.append(bit)
                rows.append(row)
        return Response(tuple(bits), tuple(rows))


class RandomBitsProver(HonestProver):
    """Honest exponent rows with uniformly random bits (a chaos control)."""

    name = "random_bits"

    def respond(self, elements, masked):
        honest = super().respond(elements, masked)
        bits = tuple(self.rng.getrandbits(1) for _ in honest.bits)
        return Response(bits, honest.exponents)


class GarbageCommitmentProver(HonestProver):
    """Honest play except one committed exponent entry is bumped by one.

    The commitment equality checks are deterministic, so the tampered entry
    is caught before any challenge is issued.  Degenerates to honest play
    when the commitment has no exponent entries (the trivial group).
    """

    name = "garbage_commitment"

    def commit(self) -> Commitment:
        c = honest_commitment(self.G, self.cap)
        # Bumping an exponent changes the evaluated word exactly when the
        # base element in that column is not the identity, so only those
        # columns guarantee a detectable mismatch.
        identity = self.G.identity
        live = [j for j, h in enumerate(c.elements) if h != identity]
        live_set = set(live)
        paths = []
        for i, row in enumerate(c.generator_exponents):
            paths.extend(("generator", i, j) for j in range(len(row)) if j in live_set)
        for i, row in enumerate(c.power_exponents):
            paths.extend(("power", i, j) for j in range(len(row)) if j in live_set)
        for i, block in enumerate(c.conjugate_exponents):
            for l, row in enumerate(block):
                paths.extend(
                    ("conjugate", i, l, j) for j in range(len(row)) if j in live_set
                )
        if not paths:
            return c
        path = paths[self.rng.randrange(len(paths))]
        if path[0] == "generator":
            _, i, j = path
            rows = list(c.generator_exponents)
            rows[i] = rows[i][:j] + (rows[i][j] + 1,) + rows[i][j + 1:]
            return Commitment(c.elements, c.primes, tuple(rows),
                              c.power_exponents, c.conjugate_exponents)
        if path[0] == "power":
            _, i, j = path
            rows = list(c.power_exponents)
            rows[i] = rows[i][:j] + (rows[i][j] + 1,) + rows[i][j + 1:]
            return Commitment(c.elements, c.primes, c.generator_exponents,
                              tuple(rows), c.conjugate_exponents)
        _, i, l, j = path
        blocks = [list(block) for block in c.conjugate_exponents]
        row = blocks[i][l]
        blocks[i][l] = row[:j] + (row[j] + 1,) + row[j + 1:]
        return Commitment(c.elements, c.primes, c.generator_exponents,
                          c.power_exponents, tuple(tuple(b) for b in blocks))


class OrderForgerProver(HonestProver):
    """Commits to a tower misrepresenting the subgroup structure.

    In the 3-message protocol it appends one extra element of the full
    group to an otherwise honest commitment, claiming a further prime-order
    quotient.  Every commitment check still passes (the extra quotient is
    genuinely trivial, and triviality is exactly what the challenge rounds
    are there to detect), so forging the inflated order comes down to
    winning the guessing game on the appended round.  In the 2-message
    protocol, where the verifier owns the tower, it falls back to inflating
    every inflatable trivial round, which keeps its claimed wrong order
    consistent across repeated runs.
    """

    name = "order_forger"

    def __init__(self, G, rng, cap=DEFAULT_CLOSURE_CAP):
        super().__init__(G, rng, cap)
        self._forged_elements: tuple[ElementCode, ...] | None = None

    def commit(self) -> Commitment:
        honest = honest_commitment(self.G, self.cap)
        order = group_order(self.G, self.cap)
        if order < 2:
            return honest
        chain = get_chain(self.G, honest.elements, self.cap)
        extra = chain.level_elements(len(chain))[self.rng.randrange(order)]
        claimed_prime = prime_factors(order)[0]
        elements = honest.elements + (extra,)
        primes = honest.primes + (claimed_prime,)
        self._forged_elements = elements
        return build_commitment(self.G, elements, primes, self.cap)

    def respond(self, elements, masked):
        chain = self._chain(elements)
        if self._forged_elements == tuple(elements):
            targets = {len(elements)}
        else:
            targets = set(_inflatable_rounds(chain))
        bits, rows = [], []
        for i in range(1, len(elements) + 1):
            if i in targets and chain.level_order(i - 1) >= 2:
                wrong = _pick_other_element(chain, i - 1, elements[i - 1], self.rng)
                rows.append(chain.decompose(i - 1, wrong))
                bits.append(self.rng.getrandbits(1))
            else:
                bit, row = self._honest_row(chain, elements, i, masked[i - 1])
                bits.append(bit)
                rows.append(row)
        return Response(tuple(bits), tuple(rows))


PROVERS = {
    cls.name: cls
    for cls in (
        HonestProver,
        GuessInflateProver,
        DeflateProver,
        RandomBitsProver,
        GarbageCommitmentProver,
        OrderForgerProver,
    )
}


def list_adversaries() -> list[str]:
    """Names of the adversarial strategies (everything but honest)."""
    return [name for name in PROVERS if name != "honest"]


def make_prover(
    name: str, G: GroupOracle, rng: Random, cap: int = DEFAULT_CLOSURE_CAP, **params
) -> HonestProver:
    """Instantiate a prover strategy by registry name."""
    try:
        cls = PROVERS[name]
    except KeyError:
        known = ", ".join(sorted(PROVERS))
        raise ValueError(f"unknown prover {name!r}; known: {known}") from None
    return cls(G, rng, cap, **params)
