import random

import pytest

from griglab import constructions, core, enumeration, words
from griglab.constructions import (
    ACHIEVED,
    INCONCLUSIVE,
    UNREACHABLE,
    branching_data,
    comm_g_decompose,
    comm_k_product,
    encode_pair,
    encode_right,
    finite_quotient_order,
    image_coverage_report,
    normal_closure_index,
)


def test_finite_quotient_orders(grig):
    assert finite_quotient_order(grig, 0) == 1
    assert finite_quotient_order(grig, 1) == 2
    assert finite_quotient_order(grig, 2) == 8
    assert finite_quotient_order(grig, 3) == 128


def test_normal_closure_index_stabilizes(grig):
    values = [normal_closure_index(grig, "abab", m) for m in (1, 2, 3, 4)]
    assert values == [2, 4, 16, 16]


def test_branching_data(grig):
    data = branching_data(grig)
    assert data.level == 3
    assert data.index == 16
    assert len(data.transversal) == 16
    assert data.coset_rep_max == 4
    assert data.h1_key_count == 64
    # transversal members represent pairwise distinct cosets
    ids = {data.coset_id(e) for e, _ in data.transversal.values()}
    assert len(ids) == 16


def test_k_membership_examples(grig):
    data = branching_data(grig)
    assert data.k_membership(grig.identity)
    assert not data.k_membership(grig.atom("a"))
    assert data.k_membership(core.evaluate(grig, "abab"))


def test_unstabilized_error(grig):
    with pytest.raises(constructions.UnstabilizedError):
        constructions._stabilized_level(grig, "abab", max_level=2)


def test_lift_table_soundness(grig):
    data = branching_data(grig)
    for u, (e, w) in data.lift_map.items():
        assert e.sections == (u, grig.identity)
        assert e.perm == (0, 1)
        assert core.evaluate(grig, w) is e


def test_lift_composition_fallback(grig, ball8):
    data = branching_data(grig)
    members = [e for e in ball8.entries if data.k_membership(e)]
    x, y = members[3], members[7]
    target = core.multiply(x, y)
    elem, word = data.lift_for(target)
    assert elem.sections == (target, grig.identity)
    assert core.evaluate(grig, word) is elem


def test_encode_right_examples(grig):
    r = encode_right("ab")
    assert r.word == "acad"
    assert r.sections == ("d", "ab")
    r = encode_right("")
    assert r.word == "" and r.sections == ("", "")
    r = encode_right("ac")
    assert r.word == "acab"
    assert r.sections[1] == "ac"


def test_encode_right_bound_all_short_words(grig):
    for n in range(7):
        for w1 in words.enumerate_reduced(n):
            r = encode_right(w1)
            assert len(r.word) <= 2 * len(w1) + 4
            assert r.sections[1] == w1
            # leftover stays inside the dihedral subgroup of a and d
            assert set(r.sections[0]) <= {"a", "d"}


def test_encode_right_rejects_unreduced(grig):
    with pytest.raises(ValueError):
        encode_right("bb")


def test_encode_pair_examples(grig):
    r = encode_pair("", "")
    assert r.status == ACHIEVED and r.word == ""
    r = encode_pair("d", "ab")
    assert r.status == ACHIEVED and r.word == "acad"
    r = encode_pair("", "ab")
    assert r.status == UNREACHABLE
    r = encode_pair("ababab", "bababa", max_scan_radius=10)
    assert r.status == INCONCLUSIVE


def test_encode_pair_achieved_words_are_exact(grig, ball6):
    rng = random.Random(4)
    pool = [w for _, (ln, w) in ball6.sorted_items() if ln <= 3]
    for _ in range(30):
        w0, w1 = rng.choice(pool), rng.choice(pool)
        r = encode_pair(w0, w1)
        if r.status == ACHIEVED:
            e = core.evaluate(grig, r.word)
            assert e.sections == (core.evaluate(grig, w0), core.evaluate(grig, w1))
            assert len(r.word) <= 2 * (len(w0) + len(w1))


def test_image_coverage_report(grig):
    rep = image_coverage_report(4)
    assert rep.consistent()
    assert rep.reachable > 0
    target = [row for row in rep.rows if row[0] == "d" and row[1] == "ab"]
    assert target and target[0][2] == ACHIEVED and target[0][3] == 4
    # the lemma bound misses at least one pair at desk scale: (b, 1) needs 3
    assert any(w0 == "b" and w1 == "" for w0, w1, _, _ in rep.beyond_bound)


def test_comm_k_product(grig, ball8):
    data = branching_data(grig)
    members = [e for e in ball8.entries if data.k_membership(e)]
    assert len(members) == 20
    rng = random.Random(20260810)
    for _ in range(100):
        k1, k2 = rng.choice(members), rng.choice(members)
        expr = comm_k_product(k1, k2, data)
        assert len(expr.factors) == 4
        assert all(f.base == "a" for f in expr.factors)
        target = grig.make_element(
            (0, 1), (core.commutator(k1, k2), grig.identity)
        )
        assert expr.verify(target)


def test_comm_k_t_step(grig):
    data = branching_data(grig)
    k1 = core.evaluate(grig, "abab")
    kappa, _ = data.lift_for(core.invert(k1))
    t = core.multiply(core.conjugate(grig.atom("a"), kappa), grig.atom("a"))
    assert t.sections == (k1, core.invert(k1))


def test_comm_k_rejects_non_members(grig):
    data = branching_data(grig)
    with pytest.raises(constructions.LiftUnavailableError):
        comm_k_product(grig.atom("a"), grig.atom("b"), data)


def test_comm_g_examples(grig):
    data = branching_data(grig)
    expr = comm_g_decompose("ab", "ab", data)
    assert len(expr.factors) == 0
    expr = comm_g_decompose("a", "b", data)
    target = core.commutator(grig.atom("a"), grig.atom("b"))
    assert expr.verify(target)


def test_comm_g_random_pairs_within_bound(grig, ball6):
    data = branching_data(grig)
    pool = [w for _, (_, w) in ball6.sorted_items()]
    rng = random.Random(77)
    bound = 4 * data.h1_rep_max + 2 * 4
    for _ in range(40):
        gw, xw = rng.choice(pool), rng.choice(pool)
        expr = comm_g_decompose(gw, xw, data)
        assert len(expr.factors) <= bound
