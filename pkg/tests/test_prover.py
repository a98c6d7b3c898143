from collections import Counter
from random import Random

import pytest

from orderproof import (
    HonestProver,
    PROVERS,
    ProverError,
    build_commitment,
    eval_word,
    get_chain,
    honest_commitment,
    list_adversaries,
    make_prover,
    run_protocol_2msg,
    run_protocol_3msg,
    verifier_check_commitment,
)
from orderproof.prover import honest_refined_sequence


def _factory(name):
    return lambda G, rng: make_prover(name, G, rng)


def test_registry_and_listing():
    assert "honest" in PROVERS
    assert sorted(list_adversaries()) == sorted(
        ["guess_inflate", "deflate", "random_bits", "garbage_commitment", "order_forger"]
    )
    with pytest.raises(ValueError):
        make_prover("nope", None, Random(0))


def test_honest_commitment_trivial_group(group_for):
    G = group_for("cyclic:1")
    c = honest_commitment(G)
    assert c.length == 0
    assert verifier_check_commitment(G, G.generators, c) is None


@pytest.mark.parametrize(
    "spec", ["cyclic:12", "direct:cyclic:3,cyclic:9", "perm:3:(1 2),(1 2 3)",
             "perm:4:(1 2),(1 2 3 4)", "perm:4:(1 2 3 4),(1 3)"]
)
def test_honest_commitment_passes_checks(group_for, spec):
    G = group_for(spec)
    assert verifier_check_commitment(G, G.generators, honest_commitment(G)) is None


def test_commitment_power_rows_hold(group_for):
    G = group_for("cyclic:12")
    c = honest_commitment(G)
    for i in range(2, c.length + 1):
        lhs = G.power(c.elements[i - 1], c.primes[i - 1])
        assert eval_word(G, c.elements[: i - 1], c.power_exponents[i - 2]) == lhs


def test_commitment_conjugate_rows_hold(group_for):
    G = group_for("perm:3:(1 2),(1 2 3)")
    c = honest_commitment(G)
    for i in range(2, c.length + 1):
        h_inv = G.inverse(c.elements[i - 1])
        for l in range(1, i):
            conj = G.product(G.product(c.elements[i - 1], c.elements[l - 1]), h_inv)
            row = c.conjugate_exponents[i - 2][l - 1]
            assert eval_word(G, c.elements[: i - 1], row) == conj


def test_build_commitment_rejects_non_generating_sequence(group_for):
    G = group_for("cyclic:12")
    g = G.generators[0]
    with pytest.raises(ProverError):
        build_commitment(G, (G.power(g, 6),), (2,))


def test_honest_response_cases(group_for):
    G = group_for("cyclic:12")
    refined = honest_refined_sequence(G)
    chain = get_chain(G, refined.elements)
    prover = HonestProver(G, Random(0))

    trivial = next(
        i for i, m in enumerate(chain.quotient_orders, start=1)
        if m == 1 and chain.level_order(i - 1) >= 2
    )
    nontrivial = next(i for i, m in enumerate(chain.quotient_orders, start=1) if m > 1)

    def respond_with(i, challenge):
        masked = [G.identity] * len(refined.elements)
        masked[i - 1] = challenge
        return prover.respond(refined.elements, masked)

    # trivial round, either secret bit: member challenge, bit 0, valid row
    h_t = refined.elements[trivial - 1]
    x = chain.level_elements(trivial - 1)[1]
    for challenge in (x, G.product(h_t, x)):
        r = respond_with(trivial, challenge)
        assert r.bits[trivial - 1] == 0
        assert eval_word(G, refined.elements[: trivial - 1], r.exponents[trivial - 1]) == h_t

    # nontrivial round, masked with the element itself (secret bit 1): non-member
    h_n = refined.elements[nontrivial - 1]
    r = respond_with(nontrivial, G.product(h_n, G.identity))
    assert r.bits[nontrivial - 1] == 1

    # nontrivial round, secret bit 0: member challenge but no decomposition exists
    r = respond_with(nontrivial, G.identity)
    assert r.bits[nontrivial - 1] == 0
    word = eval_word(G, refined.elements[: nontrivial - 1], r.exponents[nontrivial - 1])
    assert word != h_n


def test_deflate_has_no_winning_exponents(group_for):
    G = group_for("cyclic:12")
    refined = honest_refined_sequence(G)
    chain = get_chain(G, refined.elements)
    for i, m in enumerate(chain.quotient_orders, start=1):
        if m > 1:
            assert not chain.is_member(i - 1, refined.elements[i - 1])


def test_deflate_never_deflates(group_for):
    G = group_for("cyclic:12")
    for seed in range(200):
        outcome, _ = run_protocol_2msg(G, (2, 3), _factory("deflate"), seed)
        assert outcome.aborted or outcome.order == 12


def test_guess_inflate_per_round_success_rate(group_for):
    G = group_for("cyclic:12")
    tally = Counter()
    for seed in range(2000):
        outcome, _ = run_protocol_2msg(G, (2, 3), _factory("guess_inflate"), seed)
        tally["win" if not outcome.aborted else "abort"] += 1
        if not outcome.aborted:
            assert outcome.order != 12
    assert 0.46 <= tally["win"] / 2000 <= 0.54


def test_random_bits_never_wrong(group_for):
    G = group_for("perm:3:(1 2),(1 2 3)")
    for seed in range(300):
        outcome, _ = run_protocol_2msg(G, (2, 3), _factory("random_bits"), seed)
        assert outcome.aborted or outcome.order == 6


@pytest.mark.parametrize("spec", ["cyclic:12", "perm:3:(1 2),(1 2 3)"])
def test_garbage_commitment_always_aborts(group_for, spec):
    G = group_for(spec)
    for seed in range(40):
        outcome, transcript = run_protocol_3msg(G, _factory("garbage_commitment"), seed)
        assert outcome.aborted
        assert "commitment check failed" in (outcome.reason or "")


def test_order_forger_commitment_passes_step_checks(group_for):
    G = group_for("cyclic:12")
    forger = make_prover("order_forger", G, Random(3))
    c = forger.commit()
    assert c.length == honest_commitment(G).length + 1
    assert verifier_check_commitment(G, G.generators, c) is None


def test_order_forger_outcomes(group_for):
    G = group_for("cyclic:12")
    tally = Counter()
    for seed in range(400):
        outcome, _ = run_protocol_3msg(G, _factory("order_forger"), seed)
        if outcome.aborted:
            tally["abort"] += 1
        else:
            assert outcome.order == 12 * 2  # true order times the claimed prime
            tally["wrong"] += 1
    assert tally["wrong"] > 100 and tally["abort"] > 100


def test_strategies_are_deterministic_per_seed(group_for):
    G = group_for("cyclic:12")
    for name in list_adversaries():
        protocol = run_protocol_3msg if name in ("garbage_commitment", "order_forger") else None
        if protocol is None:
            a = run_protocol_2msg(G, (2, 3), _factory(name), 5)[1].canonical_bytes()
            b = run_protocol_2msg(G, (2, 3), _factory(name), 5)[1].canonical_bytes()
        else:
            a = protocol(G, _factory(name), 5)[1].canonical_bytes()
            b = protocol(G, _factory(name), 5)[1].canonical_bytes()
        assert a == b, name
