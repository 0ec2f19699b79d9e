"""Words over generator labels: rewriting, sections, enumeration.

Words are plain ASCII strings over single-character generator labels.
Rewriting uses only rules certified at preset startup (squares of
involutions cancel; products of two generators that equal a generator are
replaced), so a reduced word in the Grigorchuk preset has the shape
a^e * a * a ... * a *^f with * in {b,c,d}: no "aa" and no two adjacent
letters from {b,c,d}.
"""

from __future__ import annotations

from . import core

GRIG_ALPHABET = "abcd"
_STARS = "bcd"


def _rewrites(preset):
    rules = {}
    for (u, v), w in preset.pair_rewrites.items():
        if len(u) == 1 and len(v) == 1 and len(w) <= 1:
            rules[u + v] = w
    return rules


def reduce(word, preset=None):
    """Shortest word for the same element under the certified pair rules.

    Leftmost-innermost: letters are pushed onto a stack and the top pair is
    rewritten until stable, so one pass suffices and the result is a fixpoint.
    """
    preset = preset or core.load_preset("grigorchuk")
    rules = _rewrites(preset)
    stack = []
    for ch in word:
        stack.append(ch)
        while len(stack) >= 2:
            repl = rules.get(stack[-2] + stack[-1])
            if repl is None:
                break
            stack.pop()
            stack.pop()
            if repl:
                stack.append(repl)
    return "".join(stack)


def rewrite_once(word, pos, rule, repl):
    """Apply one pair rule at a position; used by the confluence tests."""
    assert word[pos : pos + 2] == rule
    return word[:pos] + repl + word[pos + 2 :]


def applicable_rewrites(word, preset=None):
    preset = preset or core.load_preset("grigorchuk")
    rules = _rewrites(preset)
    out = []
    for i in range(len(word) - 1):
        pair = word[i : i + 2]
        if pair in rules:
            out.append((i, pair, rules[pair]))
    return out


def is_reduced(word, preset=None):
    return not applicable_rewrites(word, preset)


def a_parity(word):
    return word.count("a") % 2


def word_sections(word, preset=None):
    """Level-1 sections (w0, w1) of a word in the level-1 stabilizer.

    A non-'a' letter whose prefix contains k letters 'a' contributes its
    own section k mod 2 to w0 and section 1 - k mod 2 to w1; the letters
    'a' only steer.  Both outputs are reduced.
    """
    preset = preset or core.load_preset("grigorchuk")
    if preset.arity != 2:
        raise ValueError("word_sections requires an arity-2 preset")
    table = {}
    swaps = set()
    for spec in preset.generator_specs:
        table[spec["label"]] = spec["sections"]
        if tuple(spec["perm"]) == (1, 0):
            swaps.add(spec["label"])
    if sum(word.count(ch) for ch in swaps) % 2:
        raise ValueError(f"word {word!r} is not in the level-1 stabilizer")
    parts = ["", ""]
    pre = 0
    for ch in word:
        secs = table[ch]
        for v in (0, 1):
            s = secs[v ^ pre]
            if s != core.IDENTITY_LABEL:
                parts[v] += s
        if ch in swaps:
            pre ^= 1
    return reduce(parts[0], preset), reduce(parts[1], preset)


def enumerate_reduced(n, alphabet=GRIG_ALPHABET):
    """All syntactically reduced words of length n, lexicographically.

    Reduced words strictly alternate between 'a' and the other letters.
    """
    if n < 0:
        raise ValueError("length must be >= 0")
    stars = [ch for ch in alphabet if ch != "a"]

    def extend(prefix, k):
        if k == 0:
            yield prefix
            return
        if prefix and prefix[-1] != "a":
            nxt = ["a"]
        elif prefix:
            nxt = stars
        else:
            nxt = list(alphabet)
        for ch in nxt:
            yield from extend(prefix + ch, k - 1)

    yield from extend("", n)


def count_reduced(n):
    """Closed form for the number of reduced words of length n."""
    if n == 0:
        return 1
    return 3 ** (n // 2) + 3 ** ((n + 1) // 2)


def all_reduced_up_to(n, alphabet=GRIG_ALPHABET):
    for k in range(n + 1):
        yield from enumerate_reduced(k, alphabet)


def parity_vector(word):
    """Exponent sums mod 2 of (a, b+d, c+d); constant on elements."""
    na = word.count("a") % 2
    nb = (word.count("b") + word.count("d")) % 2
    nc = (word.count("c") + word.count("d")) % 2
    return (na, nb, nc)


def invert_word(word):
    """Inverse of a word over involutive generators: reverse it."""
    return word[::-1]


def parse_word_expr(text, alphabet=GRIG_ALPHABET):
    """Expand an expression like "(ab)^2", "[a,b]" or "abab" into a word.

    Supports letters, parenthesized groups, commutator brackets and integer
    powers (negative powers invert, assuming involutive generators).
    """
    text = text.replace(" ", "")
    pos = 0

    def fail(msg):
        raise ValueError(f"bad word expression {text!r} at {pos}: {msg}")

    def parse_seq(stop):
        nonlocal pos
        out = ""
        while pos < len(text) and text[pos] not in stop:
            out += parse_term()
        return out

    def parse_term():
        nonlocal pos
        ch = text[pos]
        if ch == "(":
            pos += 1
            inner = parse_seq(")")
            if pos >= len(text):
                fail("unclosed parenthesis")
            pos += 1
        elif ch == "[":
            pos += 1
            left = parse_seq(",")
            if pos >= len(text):
                fail("missing comma in commutator")
            pos += 1
            right = parse_seq("]")
            if pos >= len(text):
                fail("unclosed commutator")
            pos += 1
            inner = invert_word(left) + invert_word(right) + left + right
        elif ch in alphabet:
            inner = ch
            pos += 1
        else:
            fail(f"unexpected character {ch!r}")
        if pos < len(text) and text[pos] == "^":
            pos += 1
            start = pos
            if pos < len(text) and text[pos] == "-":
                pos += 1
            while pos < len(text) and text[pos].isdigit():
                pos += 1
            if pos == start or text[start:pos] == "-":
                fail("missing exponent")
            n = int(text[start:pos])
            if n < 0:
                inner = invert_word(inner)
                n = -n
            inner = inner * n
        return inner

    out = parse_seq("")
    if pos != len(text):
        fail("trailing input")
    return out
