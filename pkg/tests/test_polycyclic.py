import math
from random import Random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orderproof import (
    ChainError,
    NotSolvableError,
    PolycyclicSequence,
    RefinementError,
    SubgroupChain,
    compute_pcgs,
    decompose,
    enumerate_closure,
    eval_word,
    get_chain,
    group_order,
    is_member,
    make_group,
    parse_group_spec,
    prime_factors,
    refine_with_primes,
    refinement_exponents,
)
from orderproof.polycyclic import is_prime


# -- exponent schedule --------------------------------------------------------

def test_schedule_single_prime():
    assert refinement_exponents({2}, 2) == (2, 1)


def test_schedule_two_primes():
    assert refinement_exponents({2, 3}, 4) == (648, 324, 162, 81, 27, 9, 3, 1)


def test_schedule_last_entry_is_one():
    for primes, n in [({2}, 1), ({2, 3}, 3), ({2, 3, 5}, 2)]:
        assert refinement_exponents(primes, n)[-1] == 1


@settings(max_examples=50, deadline=None)
@given(
    primes=st.sets(st.sampled_from([2, 3, 5, 7, 11]), min_size=1, max_size=4),
    n=st.integers(min_value=1, max_value=6),
)
def test_schedule_properties(primes, n):
    schedule = refinement_exponents(primes, n)
    assert len(schedule) == len(primes) * n
    assert all(a > b for a, b in zip(schedule, schedule[1:]))
    assert all(a % b == 0 and a // b in primes for a, b in zip(schedule, schedule[1:]))
    assert schedule[-1] == 1


def test_schedule_rejects_bad_input():
    with pytest.raises(ValueError):
        refinement_exponents([], 3)
    with pytest.raises(ValueError):
        refinement_exponents([4], 3)
    with pytest.raises(ValueError):
        refinement_exponents([2, 2, 3], 3)
    with pytest.raises(ValueError):
        refinement_exponents([2], 0)


def test_prime_helpers():
    assert [p for p in range(20) if is_prime(p)] == [2, 3, 5, 7, 11, 13, 17, 19]
    assert prime_factors(12) == (2, 3)
    assert prime_factors(1) == ()
    assert prime_factors(97) == (97,)
    with pytest.raises(ValueError):
        prime_factors(0)


# -- computing a polycyclic sequence ------------------------------------------

def test_pcgs_trivial_group(group_for):
    G = group_for("cyclic:1")
    assert len(compute_pcgs(G).elements) == 0


def test_pcgs_cyclic12(group_for):
    G = group_for("cyclic:12")
    pcgs = compute_pcgs(G)
    assert len(enumerate_closure(G, pcgs.elements)) == 12
    get_chain(G, pcgs.elements).validate_normality()


def test_pcgs_s3_has_three_cycle_first(group_for):
    G = group_for("perm:3:(1 2),(1 2 3)")
    pcgs = compute_pcgs(G)
    assert pcgs.quotient_orders == (3, 2)
    # first element generates the rotation subgroup of order 3
    assert len(enumerate_closure(G, pcgs.elements[:1])) == 3


def test_pcgs_not_solvable(group_for):
    G = group_for("perm:5:(1 2 3),(3 4 5)")
    assert group_order(G) == 60
    with pytest.raises(NotSolvableError):
        compute_pcgs(G)


@pytest.mark.parametrize(
    "spec", ["cyclic:12", "direct:cyclic:3,cyclic:9", "perm:4:(1 2),(1 2 3 4)",
             "perm:4:(1 2 3 4),(1 3)", "perm:4:(1 2 3),(2 3 4)"]
)
def test_pcgs_generates_and_is_normal_tower(group_for, spec):
    G = group_for(spec)
    pcgs = compute_pcgs(G)
    chain = get_chain(G, pcgs.elements)
    assert chain.group_order() == group_order(G)
    chain.validate_normality()
    assert math.prod(chain.quotient_orders) == group_order(G)


# -- refinement ----------------------------------------------------------------

def test_refine_cyclic12(group_for):
    G = group_for("cyclic:12")
    g = G.generators[0]
    refined = refine_with_primes(G, compute_pcgs(G), (2, 3))
    assert len(refined.elements) == 2 * G.encoding_length  # l * n * t'
    for k in (6, 3, 1):
        assert G.power(g, k) in refined.elements
    nontrivial = sorted(m for m in refined.quotient_orders if m > 1)
    assert nontrivial == [2, 2, 3]


def test_refine_trivial_group(group_for):
    G = group_for("cyclic:1")
    refined = refine_with_primes(G, compute_pcgs(G), ())
    assert refined.elements == () and refined.quotient_orders == ()


def test_refine_s4_order_product(group_for):
    G = group_for("perm:4:(1 2),(1 2 3 4)")
    refined = refine_with_primes(G, compute_pcgs(G), (2, 3))
    assert math.prod(refined.quotient_orders) == 24


@pytest.mark.parametrize(
    "spec,primes",
    [("cyclic:12", (2, 3)), ("direct:cyclic:3,cyclic:9", (3,)),
     ("perm:3:(1 2),(1 2 3)", (2, 3)), ("perm:4:(1 2),(1 2 3 4)", (2, 3)),
     ("perm:4:(1 2 3 4),(1 3)", (2,))],
)
def test_refined_orders_in_one_or_prime(group_for, spec, primes):
    G = group_for(spec)
    refined = refine_with_primes(G, compute_pcgs(G), primes)
    assert refined.primes is not None
    for m, r in zip(refined.quotient_orders, refined.primes):
        assert m in (1, r)
        assert r in primes


def test_refine_missing_prime_is_rejected(group_for):
    G = group_for("cyclic:12")
    with pytest.raises(RefinementError):
        refine_with_primes(G, compute_pcgs(G), (2,))


# -- decomposition and membership -----------------------------------------------

def _manual_chain(G):
    g = G.generators[0]
    return PolycyclicSequence((G.power(g, 6), G.power(g, 3), g))


def test_decompose_identity_is_zeros(group_for):
    G = group_for("cyclic:12")
    seq = _manual_chain(G)
    assert decompose(G, seq, 3, G.identity) == (0, 0, 0)


def test_decompose_eleven(group_for):
    G = group_for("cyclic:12")
    seq = _manual_chain(G)
    assert get_chain(G, seq.elements).quotient_orders == (2, 2, 3)
    assert decompose(G, seq, 3, G.power(G.generators[0], 11)) == (1, 1, 2)


def test_decompose_non_member(group_for):
    G = group_for("perm:3:(1 2),(1 2 3)")
    seq = PolycyclicSequence((G.generators[1],))  # the 3-cycle
    assert decompose(G, seq, 1, G.generators[0]) is None
    assert not is_member(G, seq, 1, G.generators[0])


def test_is_member_level_zero(group_for):
    G = group_for("cyclic:12")
    seq = _manual_chain(G)
    assert is_member(G, seq, 0, G.identity)
    assert not is_member(G, seq, 0, G.generators[0])


def test_is_member_proper_subgroup(group_for):
    G = group_for("cyclic:12")
    g = G.generators[0]
    seq = PolycyclicSequence((G.power(g, 6),))
    assert not is_member(G, seq, 1, G.power(g, 3))
    for code in enumerate_closure(G, seq.elements):
        assert is_member(G, seq, 1, code)


def test_level_bounds_checked(group_for):
    G = group_for("cyclic:12")
    seq = _manual_chain(G)
    with pytest.raises(ValueError):
        decompose(G, seq, 4, G.identity)
    with pytest.raises(ValueError):
        is_member(G, seq, -1, G.identity)


def test_decompose_eval_word_round_trip(group_for, protocol_fixtures):
    for _, spec, primes in protocol_fixtures:
        G = group_for(spec)
        refined = refine_with_primes(G, compute_pcgs(G), primes)
        chain = get_chain(G, refined.elements)
        pool = chain.level_elements(len(refined.elements))
        rng = Random(13)
        for _ in range(1000):
            h = rng.choice(pool)
            exps = chain.decompose(len(refined.elements), h)
            assert eval_word(G, refined.elements, exps) == h


def test_normal_form_bijection_cyclic12(group_for):
    G = group_for("cyclic:12")
    refined = refine_with_primes(G, compute_pcgs(G), (2, 3))
    chain = get_chain(G, refined.elements)
    seen = set()
    import itertools
    for exps in itertools.product(*(range(m) for m in chain.quotient_orders)):
        seen.add(eval_word(G, refined.elements, exps))
    assert len(seen) == 12


def test_validate_normality_catches_non_polycyclic():
    G = make_group(parse_group_spec("perm:3:(1 2),(1 3)"))
    swap12, swap13 = G.generators
    # <(1 2)> is not normal in S3, so this 2-element sequence is not a
    # polycyclic tower even though normal forms happen not to collide.
    chain = SubgroupChain(G, (swap12, swap13))
    with pytest.raises(ChainError):
        chain.validate_normality()


def test_chain_caching_returns_same_object(group_for):
    G = group_for("cyclic:12")
    seq = _manual_chain(G)
    assert get_chain(G, seq.elements) is get_chain(G, seq.elements)
