"""Exact arithmetic for automorphisms of regular rooted trees.

An automorphism is stored by wreath recursion: a permutation of the top-level
subtrees plus one section per subtree.  A group preset declares finitely many
generator states whose sections point back into the generator set, so every
element reachable from the generators unfolds into a finite portrait whose
leaves are atoms.

The central trick is hash consing: every element is interned by its
(permutation, section references) shape, and a freshly built shape that
coincides with a generator atom collapses onto that atom.  Products of atoms
are resolved once at startup by an exact finite-state identity check on words,
so after startup two elements are equal in the group if and only if they are
the same Python object.  That makes equality, identity tests and dictionary
deduplication O(1) everywhere else in the package.
"""

from __future__ import annotations

import json
from pathlib import Path

SCHEMA_VERSION = "asg-1"
IDENTITY_LABEL = "1"

# states explored by the finite-state identity check before giving up
DEFAULT_IDENTITY_BUDGET = 200_000


class PresetError(ValueError):
    """Raised when a preset definition fails validation."""


class MixedPresetError(ValueError):
    """Raised when elements of different presets are combined."""


class UndecidedError(RuntimeError):
    """Identity check exceeded its state budget; the answer is unknown."""


class NonContractingError(RuntimeError):
    """The preset admits no finite canonical form for some product."""


def compose_perm(p, q):
    """Permutation of the product x*y from the permutations of x and y.

    The product acts by (x*y)(i) = x(y(i)).
    """
    return tuple(p[i] for i in q)


def invert_perm(p):
    out = [0] * len(p)
    for i, j in enumerate(p):
        out[j] = i
    return tuple(out)


class Element:
    """A tree automorphism: root permutation plus one section per subtree.

    Instances are interned by their preset; identity of objects coincides
    with equality in the group.  `label` is set on generator atoms (and on
    automatically created inverse atoms), `word` is an optional defining
    word kept for provenance only.
    """

    __slots__ = ("perm", "sections", "label", "preset", "word", "_key")

    def __init__(self, perm, sections, label, preset):
        self.perm = perm
        self.sections = sections
        self.label = label
        self.preset = preset
        self.word = None
        self._key = None

    @property
    def is_atom(self):
        return self.label is not None

    def __repr__(self):
        if self.label is not None:
            return f"<{self.preset.name}:{self.label}>"
        if self.word is not None:
            return f"<{self.preset.name} elem {self.word!r}>"
        return f"<{self.preset.name} elem key={self.key().hex()}>"

    def key(self):
        """Canonical byte string; equal keys hold exactly for equal elements."""
        k = self._key
        if k is None:
            if self.label is not None:
                k = bytes([self.preset._atom_code[self.label]])
            else:
                parts = [b"\xf0", bytes(self.perm)]
                parts.extend(s.key() for s in self.sections)
                k = b"".join(parts)
            self._key = k
        return k


class GroupPreset:
    """A finite self-similar generating table over a d-regular rooted tree.

    Construction validates the table, builds the generator atoms (plus
    inverse atoms for non-involutive generators), certifies the declared
    involutions and the pairwise distinctness of the atoms, and resolves
    every product of two atoms.  Atom products that equal an atom feed the
    word rewriting table used by :mod:`griglab.words`.
    """

    def __init__(self, name, arity, generator_specs, identity_budget=DEFAULT_IDENTITY_BUDGET):
        if not isinstance(arity, int) or arity < 2:
            raise PresetError(f"arity must be an integer >= 2, got {arity!r}")
        self.name = name
        self.arity = arity
        self.identity_budget = identity_budget
        self._validate_specs(generator_specs)
        self.generator_specs = [dict(spec) for spec in generator_specs]
        self.gen_labels = [spec["label"] for spec in generator_specs]

        self._intern = {}
        self._mul_memo = {}
        self._inv_memo = {}
        self._action_memo = {}

        self._build_atoms()
        self._startup_checks()
        # (label, label) -> label or "" for products of atoms that land in
        # the atom set; populated by _seed_atom_products, certified first
        self.pair_rewrites = {}
        self._seed_atom_products()
        self.relations_for_reduction = sorted(
            (u + v, w) for (u, v), w in self.pair_rewrites.items()
        )

    # ------------------------------------------------------------------
    # validation and atom construction

    def _validate_specs(self, specs):
        if not specs:
            raise PresetError("preset declares no generators")
        labels = set()
        for spec in specs:
            label = spec.get("label")
            if not isinstance(label, str) or not label or label == IDENTITY_LABEL:
                raise PresetError(f"bad generator label {label!r}")
            if label in labels:
                raise PresetError(f"generator {label!r}: duplicate label")
            labels.add(label)
        for spec in specs:
            label = spec["label"]
            perm = spec.get("perm")
            if (
                not isinstance(perm, (list, tuple))
                or sorted(perm) != list(range(self.arity))
            ):
                raise PresetError(
                    f"generator {label!r}: perm must be a permutation of 0..{self.arity - 1}"
                )
            sections = spec.get("sections")
            if not isinstance(sections, (list, tuple)) or len(sections) != self.arity:
                raise PresetError(
                    f"generator {label!r}: expected {self.arity} sections"
                )
            for s in sections:
                if s != IDENTITY_LABEL and s not in labels:
                    raise PresetError(
                        f"generator {label!r}: section label {s!r} is not declared"
                    )
            if not isinstance(spec.get("involution"), bool):
                raise PresetError(f"generator {label!r}: involution flag must be a boolean")

    def _build_atoms(self):
        d = self.arity
        trivial = tuple(range(d))
        self.identity = Element(trivial, None, IDENTITY_LABEL, self)
        self.identity.sections = (self.identity,) * d
        self.identity.word = ""

        # two-phase build: atoms may reference each other cyclically
        self.atoms = {IDENTITY_LABEL: self.identity}
        for spec in self.generator_specs:
            self.atoms[spec["label"]] = Element(
                tuple(spec["perm"]), None, spec["label"], self
            )
        for spec in self.generator_specs:
            atom = self.atoms[spec["label"]]
            atom.sections = tuple(self.atoms[s] for s in spec["sections"])
            atom.word = spec["label"]

        # formal inverse atoms for non-involutive generators; their sections
        # are inverses of generator sections, so the extended set is closed.
        # A generator whose inverse is itself a declared generator reuses it
        # instead of growing the atom set.
        self._inverse_atom = {self.identity: self.identity}
        for spec in self.generator_specs:
            if spec["involution"]:
                atom = self.atoms[spec["label"]]
                self._inverse_atom[atom] = atom
        inv_labels = {}
        for spec in self.generator_specs:
            if spec["involution"]:
                continue
            atom = self.atoms[spec["label"]]
            if atom in self._inverse_atom:
                continue
            pinv = invert_perm(atom.perm)
            declared = None
            for other_spec in self.generator_specs:
                other = self.atoms[other_spec["label"]]
                if other.perm == pinv and self.word_acts_trivially((atom, other)):
                    declared = other
                    break
            if declared is not None:
                self._inverse_atom[atom] = declared
                self._inverse_atom[declared] = atom
                continue
            label = spec["label"] + "'"
            if label in self.atoms:
                raise PresetError(f"label {label!r} collides with an inverse atom")
            inv_labels[spec["label"]] = label
            inv = Element(pinv, None, label, self)
            self.atoms[label] = inv
            self._inverse_atom[atom] = inv
            self._inverse_atom[inv] = atom
        for base_label, label in inv_labels.items():
            atom, inv = self.atoms[base_label], self.atoms[label]
            pinv = inv.perm
            inv.sections = tuple(
                self._inverse_atom[atom.sections[pinv[v]]] for v in range(self.arity)
            )
            inv.word = label

        self._atom_code = {
            label: i for i, label in enumerate(sorted(self.atoms, key=self._atom_order))
        }
        if len(self._atom_code) > 0xEF:
            raise PresetError("too many generator states for 1-byte atom codes")

        # intern the atom shapes so any computed product that matches a
        # generator collapses onto it
        for atom in self.atoms.values():
            self._intern.setdefault((atom.perm, atom.sections), atom)

    def _atom_order(self, label):
        if label == IDENTITY_LABEL:
            return (0, label)
        base = label.rstrip("'")
        return (1, self.gen_labels.index(base), label)

    # ------------------------------------------------------------------
    # finite-state identity check on atom words
    #
    # A word acts trivially on the whole tree iff every word reachable from
    # it by taking sections has a trivial root permutation.  Section words
    # never get longer than the word itself, so the reachable set is finite
    # and the check is exact.  It needs nothing but the generator table,
    # which makes it the bootstrap oracle for everything else.

    def _word_perm(self, word):
        p = tuple(range(self.arity))
        for atom in word:
            p = compose_perm(p, atom.perm)
        return p

    def _word_section(self, word, v):
        # coordinate of v seen by each letter = image of v under the suffix
        # to its right; walk right to left
        coords = []
        cur = v
        for atom in reversed(word):
            coords.append(cur)
            cur = atom.perm[cur]
        coords.reverse()
        out = []
        for atom, c in zip(word, coords):
            s = atom.sections[c]
            if s is not self.identity:
                out.append(s)
        return self._free_reduce_atoms(out)

    def _free_reduce_atoms(self, word):
        stack = []
        for atom in word:
            if stack and self._inverse_atom.get(stack[-1]) is atom:
                stack.pop()
            else:
                stack.append(atom)
        return tuple(stack)

    def word_acts_trivially(self, word, budget=None):
        """Exact identity test for a word of atoms; may raise UndecidedError."""
        budget = budget or self.identity_budget
        seed = self._free_reduce_atoms(word)
        seen = set()
        stack = [seed]
        while stack:
            w = stack.pop()
            if not w or w in seen:
                continue
            seen.add(w)
            if len(seen) > budget:
                raise UndecidedError(
                    f"identity check exceeded {budget} states; preset may not be contracting"
                )
            if self._word_perm(w) != tuple(range(self.arity)):
                return False
            for v in range(self.arity):
                stack.append(self._word_section(w, v))
        return True

    # ------------------------------------------------------------------
    # startup certification

    def _startup_checks(self):
        for spec in self.generator_specs:
            atom = self.atoms[spec["label"]]
            if spec["involution"] and not self.word_acts_trivially((atom, atom)):
                raise PresetError(
                    f"generator {spec['label']!r}: declared involution but square is nontrivial"
                )
        nontrivial = [a for a in self.atoms.values() if a is not self.identity]
        for atom in nontrivial:
            if self.word_acts_trivially((atom,)):
                raise PresetError(f"generator {atom.label!r}: acts trivially")
        for i, u in enumerate(nontrivial):
            for v in nontrivial[i + 1 :]:
                if self.word_acts_trivially((u, self._inverse_atom[v])):
                    raise PresetError(
                        f"generators {u.label!r} and {v.label!r} define equal automorphisms"
                    )

    def _seed_atom_products(self):
        """Resolve every product of two non-identity atoms.

        A product equal to an atom (or trivial) is certified by the
        finite-state check and seeded into the multiplication memo; the rest
        are built structurally.  A structural cycle means some product has
        no finite portrait over the atom set, which this representation
        cannot express.
        """
        nontrivial = [
            self.atoms[label]
            for label in sorted(self.atoms, key=self._atom_order)
            if label != IDENTITY_LABEL
        ]
        candidates = [self.identity] + nontrivial
        for u in nontrivial:
            for v in nontrivial:
                for t in candidates:
                    word = (u, v, self._inverse_atom[t])
                    if self.word_acts_trivially(word):
                        self._mul_memo[(u, v)] = t
                        if t.label is not None:
                            self.pair_rewrites[(u.label, v.label)] = (
                                "" if t is self.identity else t.label
                            )
                        break

        in_progress = set()

        def resolve(u, v):
            got = self._mul_memo.get((u, v))
            if got is not None:
                return got
            if (u, v) in in_progress:
                raise NonContractingError(
                    f"product {u.label!r}*{v.label!r} has no finite canonical form"
                )
            in_progress.add((u, v))
            perm = compose_perm(u.perm, v.perm)
            sections = []
            for w in range(self.arity):
                x, y = u.sections[v.perm[w]], v.sections[w]
                if x is self.identity:
                    s = y
                elif y is self.identity:
                    s = x
                else:
                    s = resolve(x, y)
                sections.append(s)
            out = self.make_element(perm, tuple(sections))
            self._mul_memo[(u, v)] = out
            in_progress.discard((u, v))
            return out

        for u in nontrivial:
            for v in nontrivial:
                resolve(u, v)

    # ------------------------------------------------------------------
    # element construction

    def make_element(self, perm, sections):
        """Intern the automorphism with the given shape.

        Sections must already be canonical elements of this preset; the
        result is the unique shared object for this automorphism.
        """
        key = (perm, sections)
        got = self._intern.get(key)
        if got is not None:
            return got
        elem = Element(perm, sections, None, self)
        return self._intern.setdefault(key, elem)

    def atom(self, label):
        try:
            return self.atoms[label]
        except KeyError:
            raise PresetError(f"unknown generator {label!r}") from None

    @property
    def generators(self):
        return [self.atoms[label] for label in self.gen_labels]


# ----------------------------------------------------------------------
# element operations


def _check_same_preset(x, y):
    if x.preset is not y.preset:
        raise MixedPresetError(
            f"elements from presets {x.preset.name!r} and {y.preset.name!r}"
        )


def multiply(x, y):
    """Product x*y acting by (x*y)(w) = x(y(w))."""
    _check_same_preset(x, y)
    preset = x.preset
    if x is preset.identity:
        return y
    if y is preset.identity:
        return x
    memo = preset._mul_memo
    got = memo.get((x, y))
    if got is not None:
        return got
    perm = compose_perm(x.perm, y.perm)
    sections = tuple(
        multiply(x.sections[y.perm[v]], y.sections[v]) for v in range(preset.arity)
    )
    out = preset.make_element(perm, sections)
    memo[(x, y)] = out
    return out


def invert(x):
    preset = x.preset
    if x is preset.identity:
        return x
    inv = preset._inverse_atom.get(x)
    if inv is not None:
        return inv
    memo = preset._inv_memo
    got = memo.get(x)
    if got is not None:
        return got
    pinv = invert_perm(x.perm)
    sections = tuple(invert(x.sections[pinv[v]]) for v in range(preset.arity))
    out = preset.make_element(pinv, sections)
    memo[x] = out
    memo[out] = x
    return out


def is_identity(x):
    """True iff x acts trivially on the whole tree.

    Canonical interning makes this an object identity test; the recursive
    decision happened when the element was built.  Presets whose products
    admit no finite canonical form fail earlier, at construction, with
    NonContractingError or UndecidedError rather than a wrong answer.
    """
    return x is x.preset.identity


def equals(x, y):
    _check_same_preset(x, y)
    return x is y


def section(x, path):
    """Iterated section of x at a vertex given as a string of digits."""
    d = x.preset.arity
    for ch in path:
        v = int(ch)
        if not 0 <= v < d:
            raise ValueError(f"path symbol {ch!r} out of range for arity {d}")
        x = x.sections[v]
    return x


def canonical_key(x):
    return x.key()


def conjugate(x, z):
    """z**-1 * x * z."""
    return multiply(multiply(invert(z), x), z)


def commutator(x, y):
    """x**-1 * y**-1 * x * y."""
    return multiply(multiply(invert(x), invert(y)), multiply(x, y))


def level_action(x, m):
    """Permutation induced on the d**m vertices of level m, in lex order.

    Homomorphic in x: level_action(x*y, m) is the composition of the two
    leaf permutations.
    """
    if m < 0:
        raise ValueError("level must be >= 0")
    if m == 0:
        return (0,)
    preset = x.preset
    memo = preset._action_memo
    got = memo.get((x, m))
    if got is not None:
        return got
    d = preset.arity
    if m == 1:
        out = x.perm
    else:
        half = d ** (m - 1)
        res = [0] * (d * half)
        for v in range(d):
            sub = level_action(x.sections[v], m - 1)
            base_in = v * half
            base_out = x.perm[v] * half
            for i in range(half):
                res[base_in + i] = base_out + sub[i]
        out = tuple(res)
    memo[(x, m)] = out
    return out


def evaluate(preset, word):
    """Element of a word over generator labels (single characters)."""
    e = preset.identity
    for ch in word:
        if ch == IDENTITY_LABEL:
            continue
        e = multiply(e, preset.atom(ch))
    if e.word is None:
        e.word = word
    return e


def word_leaf_permutation(preset, word, m):
    """Action of a word on level m computed from the raw generator table.

    Deliberately avoids Element arithmetic and interning so it can serve as
    an independent deduplication path against canonical keys.
    """
    table = {
        spec["label"]: (tuple(spec["perm"]), list(spec["sections"]))
        for spec in preset.generator_specs
    }

    def act(label, s):
        if label == IDENTITY_LABEL or not s:
            return s
        perm, sections = table[label]
        v = int(s[0])
        return str(perm[v]) + act(sections[v], s[1:])

    d = preset.arity
    leaves = []

    def build(prefix, depth):
        if depth == 0:
            leaves.append(prefix)
            return
        for v in range(d):
            build(prefix + str(v), depth - 1)

    build("", m)
    index = {s: i for i, s in enumerate(leaves)}
    out = []
    for s in leaves:
        t = s
        for ch in reversed(word):
            t = act(ch, t)
        out.append(index[t])
    return tuple(out)


# ----------------------------------------------------------------------
# portraits


class Portrait:
    """Finite truncation of an element: permutations down to a fixed depth.

    Serialization is injective on elements whose depth-m sections are atoms;
    deeper sections fall back to their canonical keys.
    """

    __slots__ = ("depth", "perm", "leaf_label", "children")

    def __init__(self, depth, perm, leaf_label, children):
        self.depth = depth
        self.perm = perm
        self.leaf_label = leaf_label
        self.children = children

    @classmethod
    def of(cls, element, depth):
        if depth == 0:
            if element.label is not None:
                return cls(0, None, element.label, ())
            return cls(0, None, "#" + element.key().hex(), ())
        children = tuple(cls.of(s, depth - 1) for s in element.sections)
        return cls(depth, element.perm, None, children)

    def serialize(self):
        if self.depth == 0:
            return self.leaf_label
        inner = ",".join(c.serialize() for c in self.children)
        return f"({''.join(map(str, self.perm))}|{inner})"

    def __repr__(self):
        return f"<Portrait depth={self.depth} {self.serialize()}>"


# ----------------------------------------------------------------------
# presets

GRIGORCHUK_SPECS = [
    {"label": "a", "involution": True, "perm": [1, 0], "sections": ["1", "1"]},
    {"label": "b", "involution": True, "perm": [0, 1], "sections": ["a", "c"]},
    {"label": "c", "involution": True, "perm": [0, 1], "sections": ["a", "d"]},
    {"label": "d", "involution": True, "perm": [0, 1], "sections": ["1", "b"]},
]

_BUILTIN_CACHE = {}


def load_preset(spec):
    """Load a preset by name ("grigorchuk") or from an automaton file.

    Files use the versioned JSON schema "asg-1":
    {"schema": "asg-1", "name": ..., "arity": d,
     "generators": [{"label", "involution", "perm", "sections"}, ...]}
    """
    if isinstance(spec, str) and spec == "grigorchuk":
        if "grigorchuk" not in _BUILTIN_CACHE:
            _BUILTIN_CACHE["grigorchuk"] = GroupPreset("grigorchuk", 2, GRIGORCHUK_SPECS)
        return _BUILTIN_CACHE["grigorchuk"]
    path = Path(spec)
    if not path.exists():
        bundled = Path(__file__).parent / "presets" / (str(spec) + ".json")
        if bundled.exists():
            path = bundled
        else:
            raise PresetError(f"unknown preset {spec!r} and no such file")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise PresetError(f"cannot read preset file {path}: {exc}") from exc
    if data.get("schema") != SCHEMA_VERSION:
        raise PresetError(
            f"preset file {path}: schema {data.get('schema')!r}, expected {SCHEMA_VERSION!r}"
        )
    for field in ("name", "arity", "generators"):
        if field not in data:
            raise PresetError(f"preset file {path}: missing field {field!r}")
    return GroupPreset(data["name"], data["arity"], data["generators"])
