"""Verifier state machines and orchestration for both protocols.

Two interactive protocols compute the order of a solvable black-box group.
In the 2-message variant the verifier, knowing the prime factors of the
order, builds the refined polycyclic tower itself, sends the tower along
with one masked element per round, and turns the prover's reply into a
product of per-round factors.  In the 3-message variant the prover commits
to the tower first (with decomposition tables certifying it), the verifier
checks the commitment with deterministic equality tests, and the remaining
rounds proceed identically.

Every execution is seeded and reproducible: transcripts carry the full
message log in a canonical JSON form, so identical seeds yield
byte-identical transcripts.  Per-execution query counters cover the
verifier's interactive work (commitment checking, challenge masking,
response evaluation); deterministic precomputation shared across runs
(normal-form tables, the honest commitment) is amortized and excluded.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from random import Random
from typing import Callable, Sequence

from .groups import (
    DEFAULT_CLOSURE_CAP,
    ClosureOverflowError,
    ElementCode,
    GroupOracle,
    InvalidCodeError,
    QueryCounts,
    QueryMeter,
    eval_word,
)
from .polycyclic import (
    ChainError,
    NotSolvableError,
    RefinementError,
    SubgroupChain,
    compute_pcgs,
    get_chain,
    is_prime,
    refine_with_primes,
)
from .prover import Commitment, HonestProver, Response
from .sampling import SubproductSampler, as_rng, derive_seed

#: Subgroup levels up to this size are sampled exactly; larger levels fall
#: back to the subproduct sampler with per-element deviation 1/2^(2n).
EXACT_SAMPLER_MAX = 10_000

#: Guardrail on prover-committed tower length: t <= FACTOR * n * s * log2(cap).
COMMITMENT_LENGTH_FACTOR = 4

ProverFactory = Callable[[GroupOracle, Random], HonestProver]


# ---------------------------------------------------------------------------
# Message and outcome types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Challenge:
    """Masked round elements; the 2-message variant also carries the tower.

    The verifier's per-round secret bits and mask elements never appear in
    any message.
    """

    masked: tuple[ElementCode, ...]
    elements: tuple[ElementCode, ...] | None = None


@dataclass(frozen=True)
class Outcome:
    """Final verifier result: a claimed order, or an abort with a reason."""

    order: int | None
    reason: str | None = None

    @classmethod
    def of(cls, order: int) -> "Outcome":
        return cls(order=order)

    @classmethod
    def abort(cls, reason: str) -> "Outcome":
        return cls(order=None, reason=reason)

    @property
    def aborted(self) -> bool:
        return self.order is None


@dataclass(frozen=True)
class TranscriptMessage:
    direction: str  # "V->P" or "P->V"
    kind: str
    body: dict
    size_bytes: int


@dataclass
class Transcript:
    """Ordered message log of one execution plus accounting metadata."""

    protocol: str
    seed: int
    messages: list[TranscriptMessage] = field(default_factory=list)
    queries: QueryCounts = QueryCounts()
    outcome: Outcome = Outcome.abort("incomplete")

    def message_bytes(self) -> int:
        return sum(m.size_bytes for m in self.messages)

    def to_wire(self) -> dict:
        return {
            "protocol": self.protocol,
            "seed": self.seed,
            "messages": [
                {
                    "direction": m.direction,
                    "kind": m.kind,
                    "bytes": m.size_bytes,
                    "body": m.body,
                }
                for m in self.messages
            ],
            "queries": {"product": self.queries.product, "inverse": self.queries.inverse},
            "outcome": outcome_to_wire(self.outcome),
        }

    def canonical_bytes(self) -> bytes:
        return canonical_json_bytes(self.to_wire())


# ---------------------------------------------------------------------------
# Canonical wire encoding (self-describing JSON, hex codes, decimal ints)
# ---------------------------------------------------------------------------

def canonical_json_bytes(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()


def outcome_to_wire(outcome: Outcome) -> dict:
    return {"order": outcome.order, "reason": outcome.reason}


def challenge_to_wire(challenge: Challenge) -> dict:
    body = {"kind": "challenge", "masked": [c.hex() for c in challenge.masked]}
    if challenge.elements is not None:
        body["elements"] = [c.hex() for c in challenge.elements]
    return body


def challenge_from_wire(body: dict) -> Challenge:
    elements = body.get("elements")
    return Challenge(
        masked=tuple(bytes.fromhex(c) for c in body["masked"]),
        elements=None if elements is None else tuple(bytes.fromhex(c) for c in elements),
    )


def response_to_wire(response: Response) -> dict:
    return {
        "kind": "response",
        "bits": list(response.bits),
        "exponents": [list(row) for row in response.exponents],
    }


def response_from_wire(body: dict) -> Response:
    return Response(
        bits=tuple(body["bits"]),
        exponents=tuple(tuple(row) for row in body["exponents"]),
    )


def commitment_to_wire(commitment: Commitment) -> dict:
    return {
        "kind": "commitment",
        "elements": [c.hex() for c in commitment.elements],
        "primes": list(commitment.primes),
        "generator_exponents": [list(r) for r in commitment.generator_exponents],
        "power_exponents": [list(r) for r in commitment.power_exponents],
        "conjugate_exponents": [
            [list(r) for r in block] for block in commitment.conjugate_exponents
        ],
    }


def commitment_from_wire(body: dict) -> Commitment:
    return Commitment(
        elements=tuple(bytes.fromhex(c) for c in body["elements"]),
        primes=tuple(body["primes"]),
        generator_exponents=tuple(tuple(r) for r in body["generator_exponents"]),
        power_exponents=tuple(tuple(r) for r in body["power_exponents"]),
        conjugate_exponents=tuple(
            tuple(tuple(r) for r in block) for block in body["conjugate_exponents"]
        ),
    )


# ---------------------------------------------------------------------------
# Verifier internals
# ---------------------------------------------------------------------------

@dataclass
class VerifierState:
    """Private verifier state retained between challenge and response."""

    G: GroupOracle
    elements: tuple[ElementCode, ...]
    primes: tuple[int, ...]
    chain: SubgroupChain
    secret_bits: tuple[int, ...]
    masks: tuple[ElementCode, ...]
    reduce_exponents: bool  # 2-message: quotient orders known to the verifier


def _draw_subgroup_element(
    G: GroupOracle, chain: SubgroupChain, level: int, rng: Random
) -> ElementCode:
    """Near-uniform element of a prefix subgroup (exact below the threshold)."""
    pool = chain.level_elements(level)
    if len(pool) <= EXACT_SAMPLER_MAX:
        return pool[rng.randrange(len(pool))]
    epsilon = 2.0 ** -min(2 * G.encoding_length, 1000)
    sampler = SubproductSampler(G, chain.elements[:level], epsilon, rng)
    return sampler.draw()


def _issue_challenge(
    G: GroupOracle,
    chain: SubgroupChain,
    elements: Sequence[ElementCode],
    rng: Random,
) -> tuple[tuple[int, ...], tuple[ElementCode, ...], tuple[ElementCode, ...]]:
    """Draw per-round secret bits and masks; return (bits, masks, masked)."""
    bits, masks, masked = [], [], []
    for i in range(1, len(elements) + 1):
        s = rng.getrandbits(1)
        x = _draw_subgroup_element(G, chain, i - 1, rng)
        bits.append(s)
        masks.append(x)
        masked.append(G.product(G.power(elements[i - 1], s), x))
    return tuple(bits), tuple(masks), tuple(masked)


def verifier_setup_2msg(
    G: GroupOracle,
    primes: Sequence[int],
    seed_or_rng,
    cap: int = DEFAULT_CLOSURE_CAP,
) -> tuple[VerifierState, Challenge]:
    """Build the refined tower and issue the 2-message challenge.

    Raises NotSolvableError or RefinementError when the tower cannot be
    built; runners convert that into an abort before anything is sent.
    """
    rng = as_rng(seed_or_rng)
    base = compute_pcgs(G, cap)
    refined = refine_with_primes(G, base, primes, cap=cap)
    chain = get_chain(G, refined.elements, cap)
    bits, masks, masked = _issue_challenge(G, chain, refined.elements, rng)
    state = VerifierState(
        G=G,
        elements=refined.elements,
        primes=refined.primes or (),
        chain=chain,
        secret_bits=bits,
        masks=masks,
        reduce_exponents=True,
    )
    return state, Challenge(masked=masked, elements=refined.elements)


def verifier_check_commitment(
    G: GroupOracle,
    generators: Sequence[ElementCode],
    commitment: Commitment,
    cap: int = DEFAULT_CLOSURE_CAP,
) -> str | None:
    """Run the commitment checks; return an abort reason or None on pass.

    Shape validation first (lengths, integer ranges, primality, the tower
    length guardrail), then the three families of equality checks: each
    group generator decomposes over the full tower, each element's claimed
    prime power falls back into its prefix (with the first element's power
    equal to the identity), and each conjugate of an earlier element falls
    back into the prefix.  Passing certifies the committed sequence is a
    polycyclic tower for the whole group with quotient orders in {1, r_i}.
    """
    t = commitment.length
    n = G.encoding_length
    exponent_cap = 1 << n
    max_length = COMMITMENT_LENGTH_FACTOR * n * max(1, len(generators)) * max(
        1, math.ceil(math.log2(cap))
    )
    if t > max_length:
        return f"committed sequence length {t} exceeds guardrail {max_length}"
    if len(commitment.primes) != t:
        return "primes list length does not match the committed sequence"
    if any(not isinstance(code, bytes) for code in commitment.elements):
        return "committed element codes must be byte strings"
    for r in commitment.primes:
        if not isinstance(r, int) or not is_prime(r):
            return f"committed value {r!r} is not a prime"

    def bad_row(row, expected_len) -> bool:
        return len(row) != expected_len or any(
            not isinstance(a, int) or isinstance(a, bool) or a < 0 or a > exponent_cap
            for a in row
        )

    if len(commitment.generator_exponents) != len(generators):
        return "generator decomposition table has the wrong number of rows"
    for row in commitment.generator_exponents:
        if bad_row(row, t):
            return "malformed generator decomposition row"
    if len(commitment.power_exponents) != max(0, t - 1):
        return "power decomposition table has the wrong number of rows"
    for i, row in enumerate(commitment.power_exponents, start=2):
        if bad_row(row, i - 1):
            return "malformed power decomposition row"
    if len(commitment.conjugate_exponents) != max(0, t - 1):
        return "conjugate decomposition table has the wrong number of blocks"
    for i, block in enumerate(commitment.conjugate_exponents, start=2):
        if len(block) != i - 1 or any(bad_row(row, i - 1) for row in block):
            return "malformed conjugate decomposition block"

    h = commitment.elements
    try:
        for g, row in zip(generators, commitment.generator_exponents):
            if eval_word(G, h, row) != g:
                return "a group generator does not decompose over the committed tower"
        if t >= 1 and G.power(h[0], commitment.primes[0]) != G.identity:
            return "first element's prime power is not the identity"
        for i in range(2, t + 1):
            lhs = G.power(h[i - 1], commitment.primes[i - 1])
            if eval_word(G, h[: i - 1], commitment.power_exponents[i - 2]) != lhs:
                return f"prime power of element {i} does not match its decomposition"
        for i in range(2, t + 1):
            h_inv = G.inverse(h[i - 1])
            for l in range(1, i):
                conj = G.product(G.product(h[i - 1], h[l - 1]), h_inv)
                row = commitment.conjugate_exponents[i - 2][l - 1]
                if eval_word(G, h[: i - 1], row) != conj:
                    return f"conjugate of element {l} by element {i} fails its decomposition"
    except InvalidCodeError as exc:
        return f"committed element code is invalid: {exc}"
    return None


def verifier_finalize(state: VerifierState, response: Response) -> Outcome:
    """Apply the per-round trichotomy and produce the final outcome.

    Per round: a matching decomposition of the round element fixes the
    factor 1; otherwise a bit agreeing with the verifier's secret fixes the
    factor r_i; otherwise the protocol aborts.  Malformed responses (wrong
    shapes, non-integers, out-of-policy exponents) abort as well.  In the
    2-message protocol exponents are reduced modulo the verifier's known
    quotient orders; in the 3-message protocol they must lie in [0, 2^n].
    """
    G = state.G
    t = len(state.elements)
    if len(response.bits) != t or len(response.exponents) != t:
        return Outcome.abort("response shape does not match the round count")
    exponent_cap = 1 << G.encoding_length
    factors = []
    for i in range(1, t + 1):
        bit = response.bits[i - 1]
        row = response.exponents[i - 1]
        if bit not in (0, 1) or isinstance(bit, bool):
            return Outcome.abort(f"round {i}: bit is not 0 or 1")
        if len(row) != i - 1:
            return Outcome.abort(f"round {i}: exponent row has wrong length")
        if any(not isinstance(a, int) or isinstance(a, bool) for a in row):
            return Outcome.abort(f"round {i}: non-integer exponent")
        if state.reduce_exponents:
            row = tuple(a % state.chain.quotient_orders[j] for j, a in enumerate(row))
        elif any(a < 0 or a > exponent_cap for a in row):
            return Outcome.abort(f"round {i}: exponent outside [0, 2^n]")
        word = eval_word(G, state.elements[: i - 1], row)
        if word == state.elements[i - 1]:
            factors.append(1)
        elif bit == state.secret_bits[i - 1]:
            factors.append(state.primes[i - 1])
        else:
            return Outcome.abort(f"round {i}: no decomposition and the bit is wrong")
    return Outcome.of(math.prod(factors))


# ---------------------------------------------------------------------------
# Execution runners
# ---------------------------------------------------------------------------

def _log(transcript: Transcript, direction: str, kind: str, body: dict) -> None:
    transcript.messages.append(
        TranscriptMessage(direction, kind, body, len(canonical_json_bytes(body)))
    )


def run_protocol_2msg(
    G: GroupOracle,
    primes: Sequence[int],
    prover_factory: ProverFactory,
    seed: int,
    cap: int = DEFAULT_CLOSURE_CAP,
) -> tuple[Outcome, Transcript]:
    """One seeded execution of the 2-message protocol."""
    transcript = Transcript(protocol="2msg", seed=seed)
    rng_verifier = Random(derive_seed(seed, "verifier"))
    rng_prover = Random(derive_seed(seed, "prover"))
    meter = QueryMeter()

    # Warm the deterministic tower shared by every run of this (G, primes)
    # configuration, so per-run counters are replay-independent.
    try:
        refined = refine_with_primes(G, compute_pcgs(G, cap), primes, cap=cap)
        get_chain(G, refined.elements, cap)
    except (NotSolvableError, RefinementError, ClosureOverflowError) as exc:
        transcript.outcome = Outcome.abort(f"verifier tower construction failed: {exc}")
        transcript.queries = meter.snapshot()
        return transcript.outcome, transcript

    with meter.measuring():
        state, challenge = verifier_setup_2msg(G, primes, rng_verifier, cap)
    _log(transcript, "V->P", "challenge", challenge_to_wire(challenge))

    prover = prover_factory(G, rng_prover)
    response = prover.respond(challenge.elements, challenge.masked)
    _log(transcript, "P->V", "response", response_to_wire(response))

    with meter.measuring():
        outcome = verifier_finalize(state, response)
    transcript.outcome = outcome
    transcript.queries = meter.snapshot()
    return outcome, transcript


def run_protocol_3msg(
    G: GroupOracle,
    prover_factory: ProverFactory,
    seed: int,
    cap: int = DEFAULT_CLOSURE_CAP,
) -> tuple[Outcome, Transcript]:
    """One seeded execution of the 3-message protocol."""
    transcript = Transcript(protocol="3msg", seed=seed)
    rng_verifier = Random(derive_seed(seed, "verifier"))
    rng_prover = Random(derive_seed(seed, "prover"))
    meter = QueryMeter()

    prover = prover_factory(G, rng_prover)
    try:
        commitment = prover.commit()
    except NotSolvableError as exc:
        transcript.outcome = Outcome.abort(f"prover gave up: {exc}")
        transcript.queries = meter.snapshot()
        return transcript.outcome, transcript
    _log(transcript, "P->V", "commitment", commitment_to_wire(commitment))

    with meter.measuring():
        reason = verifier_check_commitment(G, G.generators, commitment, cap)
    if reason is not None:
        transcript.outcome = Outcome.abort(f"commitment check failed: {reason}")
        transcript.queries = meter.snapshot()
        return transcript.outcome, transcript

    # Table construction is the sampler's amortized precomputation; keep it
    # outside the per-run counters (it is shared by every run that receives
    # this tower).
    try:
        chain = get_chain(G, commitment.elements, cap)
    except (ClosureOverflowError, ChainError) as exc:
        transcript.outcome = Outcome.abort(f"committed tower is intractable: {exc}")
        transcript.queries = meter.snapshot()
        return transcript.outcome, transcript

    with meter.measuring():
        bits, masks, masked = _issue_challenge(G, chain, commitment.elements, rng_verifier)
    state = VerifierState(
        G=G,
        elements=commitment.elements,
        primes=commitment.primes,
        chain=chain,
        secret_bits=bits,
        masks=masks,
        reduce_exponents=False,
    )
    challenge = Challenge(masked=masked, elements=None)
    _log(transcript, "V->P", "challenge", challenge_to_wire(challenge))

    response = prover.respond(commitment.elements, challenge.masked)
    _log(transcript, "P->V", "response", response_to_wire(response))

    with meter.measuring():
        outcome = verifier_finalize(state, response)
    transcript.outcome = outcome
    transcript.queries = meter.snapshot()
    return outcome, transcript


def unanimous_outcome(outcomes: Sequence[Outcome]) -> Outcome:
    """Combine repeated executions: all must agree on an order, else abort."""
    if any(o.aborted for o in outcomes):
        return Outcome.abort("a repetition aborted")
    orders = {o.order for o in outcomes}
    if len(orders) != 1:
        return Outcome.abort("repetitions disagree on the order")
    return Outcome.of(orders.pop())


def run_repeated(
    G: GroupOracle,
    protocol: str,
    prover_factory: ProverFactory,
    repetitions: int,
    seed: int,
    primes: Sequence[int] | None = None,
    cap: int = DEFAULT_CLOSURE_CAP,
    combiner: Callable[[Sequence[Outcome]], Outcome] = unanimous_outcome,
) -> tuple[Outcome, list[Transcript]]:
    """Run k independent seeded executions and combine their outcomes."""
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    outcomes, transcripts = [], []
    for copy in range(repetitions):
        copy_seed = derive_seed(seed, f"copy-{copy}")
        if protocol == "2msg":
            if primes is None:
                raise ValueError("the 2-message protocol needs the prime factors")
            outcome, transcript = run_protocol_2msg(G, primes, prover_factory, copy_seed, cap)
        elif protocol == "3msg":
            outcome, transcript = run_protocol_3msg(G, prover_factory, copy_seed, cap)
        else:
            raise ValueError(f"unknown protocol {protocol!r}")
        outcomes.append(outcome)
        transcripts.append(transcript)
    return combiner(outcomes), transcripts


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------

def challenge_code_distribution(
    G: GroupOracle, chain: SubgroupChain, round_index: int, secret_bit: int
) -> Counter:
    """Exact distribution of the masked element for one round and bit value.

    Counts, over every mask choice in the prefix subgroup, which code the
    masked element takes; with an exact sampler the mask is uniform, so
    equal counters for both bit values mean the challenge reveals nothing.
    """
    h = chain.elements[round_index - 1]
    shifted = G.power(h, secret_bit)
    return Counter(
        G.product(shifted, x) for x in chain.level_elements(round_index - 1)
    )
