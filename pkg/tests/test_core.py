import itertools
import json
import random
from concurrent.futures import ThreadPoolExecutor

import pytest

from griglab import core
from griglab.core import (
    MixedPresetError,
    NonContractingError,
    Portrait,
    PresetError,
    canonical_key,
    equals,
    evaluate,
    invert,
    is_identity,
    level_action,
    load_preset,
    multiply,
    section,
)


def test_grigorchuk_preset_table(grig):
    assert grig.arity == 2
    assert grig.gen_labels == ["a", "b", "c", "d"]
    a, b, c, d = (grig.atom(x) for x in "abcd")
    assert a.perm == (1, 0) and a.sections == (grig.identity, grig.identity)
    assert b.sections == (a, c)
    assert c.sections == (a, d)
    assert d.sections == (grig.identity, b)


def test_preset_file_with_undeclared_section(tmp_path):
    data = {
        "schema": "asg-1",
        "name": "broken",
        "arity": 2,
        "generators": [
            {"label": "x", "involution": True, "perm": [1, 0], "sections": ["1", "y"]}
        ],
    }
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(data))
    with pytest.raises(PresetError, match="'x'"):
        load_preset(path)


def test_preset_file_schema_version(tmp_path):
    path = tmp_path / "old.json"
    path.write_text(json.dumps({"schema": "asg-0", "name": "x", "arity": 2, "generators": []}))
    with pytest.raises(PresetError, match="schema"):
        load_preset(path)


def test_sample_arity3_preset_loads():
    gs = load_preset("gupta-sidki-3")
    assert gs.arity == 3
    t, s, u = gs.atom("t"), gs.atom("s"), gs.atom("u")
    assert is_identity(multiply(t, s))
    assert is_identity(multiply(multiply(u, u), u))
    assert invert(t) is s
    els = [t, s, u, multiply(t, u), multiply(u, u), invert(multiply(t, u))]
    for x, y, z in itertools.product(els, repeat=3):
        assert multiply(multiply(x, y), z) is multiply(x, multiply(y, z))


def test_multiply_examples(grig):
    b, c, d = grig.atom("b"), grig.atom("c"), grig.atom("d")
    assert multiply(b, c) is d
    x = evaluate(grig, "acab")
    assert multiply(x, grig.identity) is x
    assert multiply(grig.identity, x) is x
    aba = evaluate(grig, "aba")
    assert aba.perm == (0, 1)
    assert aba.sections == (grig.atom("c"), grig.atom("a"))


def test_multiply_rejects_mixed_presets(grig):
    gs = load_preset("gupta-sidki-3")
    with pytest.raises(MixedPresetError):
        multiply(grig.atom("a"), gs.atom("t"))


def test_invert_examples(grig):
    a = grig.atom("a")
    assert invert(a) is a
    assert invert(grig.identity) is grig.identity
    assert invert(evaluate(grig, "ab")) is evaluate(grig, "ba")
    rng = random.Random(3)
    for _ in range(50):
        w = "".join(rng.choice("abcd") for _ in range(rng.randint(0, 10)))
        x = evaluate(grig, w)
        assert is_identity(multiply(x, invert(x)))


def test_section_examples(grig):
    assert section(grig.atom("b"), "1") is grig.atom("c")
    assert section(grig.identity, "0110") is grig.identity
    acad = evaluate(grig, "acad")
    assert section(acad, "1") is evaluate(grig, "ab")
    assert section(acad, "0") is grig.atom("d")
    with pytest.raises(ValueError):
        section(grig.atom("b"), "2")


def test_is_identity_examples(grig):
    assert is_identity(evaluate(grig, "adadadad"))
    assert is_identity(grig.identity)
    ad2 = evaluate(grig, "adad")
    assert not is_identity(ad2)
    assert ad2.sections == (grig.atom("b"), grig.atom("b"))


def test_equals_is_identity_of_quotient(grig):
    rng = random.Random(11)
    pool = [
        evaluate(grig, "".join(rng.choice("abcd") for _ in range(rng.randint(0, 8))))
        for _ in range(40)
    ]
    for x in pool:
        for y in pool:
            assert equals(x, y) == is_identity(multiply(x, invert(y)))


def test_canonical_key_examples(grig):
    assert canonical_key(evaluate(grig, "bc")) == canonical_key(grig.atom("d"))
    assert canonical_key(grig.identity) == b"\x00"
    keys = {canonical_key(grig.atom(x)) for x in "abcd"}
    assert len(keys) == 4
    actions = {level_action(grig.atom(x), 3) for x in "abcd"}
    assert len(actions) == 4


def test_level_action_examples(grig):
    assert level_action(grig.atom("a"), 1) == (1, 0)
    assert level_action(evaluate(grig, "bcd"), 0) == (0,)
    assert level_action(grig.atom("d"), 2) == (0, 1, 2, 3)


def test_level_action_homomorphism(grig, ball6):
    b5 = sorted(
        (e for e, (ln, _) in ball6.entries.items() if ln <= 5),
        key=lambda e: ball6.entries[e],
    )
    for m in range(1, 7):
        for x in b5:
            ax = level_action(x, m)
            for y in b5:
                ay = level_action(y, m)
                composed = tuple(ax[ay[i]] for i in range(len(ay)))
                assert level_action(multiply(x, y), m) == composed


def test_associativity_on_ball_sample(grig, ball6):
    rng = random.Random(20260810)
    pool = [e for e, _ in ball6.sorted_items()]
    for _ in range(1000):
        x, y, z = (rng.choice(pool) for _ in range(3))
        assert multiply(multiply(x, y), z) is multiply(x, multiply(y, z))


def test_oracle_agreement_length7(grig):
    from griglab import words

    by_element = {}
    by_action = {}
    for n in range(8):
        for w in words.enumerate_reduced(n):
            e = evaluate(grig, w)
            by_element.setdefault(e, set()).add(w)
            by_action.setdefault(core.word_leaf_permutation(grig, w, 7), set()).add(w)
    assert len(by_element) == len(by_action)
    groups_e = {frozenset(v) for v in by_element.values()}
    groups_a = {frozenset(v) for v in by_action.values()}
    assert groups_e == groups_a


def test_contraction_sections_within_half_length(grig):
    from griglab import enumeration, words

    b7 = enumeration.ball(grig, 7)
    for n in range(13):
        for w in words.enumerate_reduced(n):
            e = evaluate(grig, w)
            bound = (n + 1 + 1) // 2
            for s in e.sections:
                assert s in b7.entries
                assert b7.entries[s][0] <= bound


def test_generator_relations(grig):
    for x in "abcd":
        assert is_identity(evaluate(grig, x + x))
    for x, y in itertools.combinations("bcd", 2):
        assert is_identity(evaluate(grig, x + y + x + y))


def test_word_leaf_permutation_matches_level_action(grig):
    rng = random.Random(5)
    for _ in range(100):
        w = "".join(rng.choice("abcd") for _ in range(rng.randint(0, 9)))
        for m in (1, 3, 5):
            assert core.word_leaf_permutation(grig, w, m) == level_action(
                evaluate(grig, w), m
            )


def test_portrait_injective_on_shallow_elements(grig, ball6):
    seen = {}
    for e, _ in ball6.sorted_items():
        s = Portrait.of(e, 4).serialize()
        assert seen.setdefault(s, e) is e
    assert Portrait.of(grig.identity, 0).serialize() == "1"


def test_interning_is_thread_safe(grig):
    words_pool = ["abab", "acac", "adad", "bcd", "abacad", "dacaba", "badcba"]

    def build(w):
        return evaluate(grig, w * 3)

    with ThreadPoolExecutor(max_workers=8) as pool:
        results = list(pool.map(build, words_pool * 20))
    serial = [evaluate(grig, w * 3) for w in words_pool * 20]
    assert all(x is y for x, y in zip(results, serial))


def test_non_contracting_preset_rejected():
    # x*y reproduces itself in its own left section, so it has no finite
    # portrait over the atom set and canonicalization must refuse
    specs = [
        {"label": "x", "involution": False, "perm": [1, 0], "sections": ["x", "y"]},
        {"label": "y", "involution": False, "perm": [0, 1], "sections": ["y", "x"]},
    ]
    with pytest.raises((NonContractingError, core.UndecidedError)):
        core.GroupPreset("cycling", 2, specs, identity_budget=3000)
