"""Numeric side of the growth estimates: exponents, measured constants,
recursion and assembly audits, envelope diagnostics.

Everything here is a pure table transform.  No asymptotic exponent is ever
fitted from desk-scale data; the module reports per-row diagnostics and
inequalities with constants measured on the data actually computed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import conjugacy, constructions, core, enumeration

CSV_COLUMNS = ("n", "gamma", "f_lower", "f_upper", "rho", "env05", "env767")


@dataclass
class BoundParams:
    d: int
    M: int  # lift length
    K_idx: int  # index of the level-1 stabilizer
    T: float  # measured stabilizer-fraction constant
    Q: float = 0.0
    sigma_value: float = 0.0

    def __post_init__(self):
        self.Q = self.T * self.K_idx
        self.sigma_value = sigma(self.d, self.M)


def sigma(d, M):
    """Growth exponent log(d) / log(d*M)."""
    if d < 2 or M < 1:
        raise ValueError(f"need d >= 2 and M >= 1, got d={d}, M={M}")
    return math.log(d) / math.log(d * M)


def estimate_T(gamma_rows, st1_counts):
    """Smallest constant T with |B(n) & St(1)| >= gamma(n)/T on the data.

    That is the max over rows of gamma(n) / st1_count(n); a lower estimate
    of any constant valid for all n, reported as measured, never as the
    theorem's existential constant.
    """
    if not gamma_rows:
        raise ValueError("no growth data")
    worst = 0.0
    for (n, gamma_n), (n2, st1) in zip(gamma_rows, st1_counts):
        if n != n2:
            raise ValueError("misaligned rows")
        if st1 <= 0:
            raise ValueError(f"empty stabilizer count at n={n}")
        worst = max(worst, gamma_n / st1)
    return worst


@dataclass
class RecursionAuditRow:
    n: int
    f_n: int
    f_4n: int
    rhs: float
    holds: bool


@dataclass
class RecursionAuditReport:
    T: float
    rows: list
    skipped: list  # n values without exact data

    @property
    def all_hold(self):
        return all(r.holds for r in self.rows)


def grig_recursion_audit(f_rows, T):
    """Check f(4n) >= f(n)^2 / (2T) on every exact pair available.

    f_rows are ConjGrowthRow-like entries; rows whose bracket has not
    collapsed are skipped with notice rather than silently used.
    """
    exact = {r.n: r.lower for r in f_rows if r.exact}
    present = {r.n for r in f_rows}
    rows = []
    skipped = []
    for n in sorted(exact):
        if 4 * n not in present:
            continue
        if 4 * n not in exact:
            skipped.append(4 * n)
            continue
        rhs = exact[n] ** 2 / (2 * T)
        rows.append(
            RecursionAuditRow(
                n=n, f_n=exact[n], f_4n=exact[4 * n], rhs=rhs, holds=exact[4 * n] >= rhs
            )
        )
    return RecursionAuditReport(T=T, rows=rows, skipped=skipped)


# ----------------------------------------------------------------------
# assembly audit


@dataclass
class AssemblyAuditReport:
    n: int
    pairs_total: int
    assembled: int
    skipped_unreachable: list
    separated: bool
    swap_merged: bool


def assembly_audit(n, preset=None, invariant_depth=8):
    """Assemble elements from pairs of class representatives on the subtrees.

    For each unordered pair of exact class representatives of B(n), a word
    with exactly those sections is searched; assemblies from distinct pairs
    must be separated by depth invariants, while the two orders of a pair
    must merge under conjugation by the rooted generator.  Unreachable pairs
    are skipped with notice.
    """
    preset = preset or core.load_preset("grigorchuk")
    if n > 3:
        raise ValueError("assembly audit is a desk-scale check; use n <= 3")
    ball_ = enumeration.ball(preset, n)
    part = conjugacy.class_partition(ball_, invariant_depth, 6)
    reps = sorted(
        {part.uf.find(e) for e in ball_.entries}, key=lambda e: ball_.entries[e]
    )
    rep_words = [ball_.entries[r][1] for r in reps]
    a = preset.atoms["a"]
    assembled = {}
    skipped = []
    for i, wi in enumerate(rep_words):
        for j in range(i, len(rep_words)):
            wj = rep_words[j]
            res = constructions.encode_pair(wi, wj, preset)
            if res.status != constructions.ACHIEVED:
                skipped.append(((wi, wj), res.status))
                continue
            assembled[(wi, wj)] = core.evaluate(preset, res.word)
    separated = True
    keys = sorted(assembled)
    for x in range(len(keys)):
        for y in range(x + 1, len(keys)):
            ix = conjugacy.depth_invariant(assembled[keys[x]], invariant_depth)
            iy = conjugacy.depth_invariant(assembled[keys[y]], invariant_depth)
            if ix == iy:
                separated = False
    swap_merged = True
    for (wi, wj), elem in assembled.items():
        if wi == wj:
            continue
        swapped = core.conjugate(elem, a)
        res = constructions.encode_pair(wj, wi, preset)
        if res.status != constructions.ACHIEVED:
            continue
        other = core.evaluate(preset, res.word)
        if not core.equals(
            core.multiply(swapped, core.invert(other)), preset.identity
        ) and conjugacy.conjugator_search(elem, other, 6) is None:
            swap_merged = False
    return AssemblyAuditReport(
        n=n,
        pairs_total=len(rep_words) * (len(rep_words) + 1) // 2,
        assembled=len(assembled),
        skipped_unreachable=skipped,
        separated=separated,
        swap_merged=swap_merged,
    )


# ----------------------------------------------------------------------
# envelope diagnostics


def rho(count, n):
    """Per-row exponent diagnostic log log count / log n."""
    if n < 2 or count < 3:
        raise ValueError("rho needs n >= 2 and count >= 3")
    return math.log(math.log(count)) / math.log(n)


def envelope_compare(rows, lower_exp=0.5, upper_exp=0.767):
    """Diagnostic rows (n, count, rho, rho/lower_exp, rho/upper_exp).

    Rows with n < 2 or count < 3 are skipped (the iterated logarithm is
    undefined or unstable there).  Desk diagnostics only, no asymptotic
    claim.
    """
    out = []
    for n, count in rows:
        if n < 2 or count < 3:
            continue
        r = rho(count, n)
        out.append((n, count, r, r / lower_exp, r / upper_exp))
    return out


def envelope_csv(gamma_table, f_rows, lower_exp=0.5, upper_exp=0.767):
    """Fixed-column CSV joining growth and conjugacy-growth diagnostics."""
    f_by_n = {r.n: r for r in f_rows}
    lines = [",".join(CSV_COLUMNS)]
    for n, gamma_n in gamma_table.rows:
        fr = f_by_n.get(n)
        f_lower = fr.lower if fr else ""
        f_upper = fr.upper if fr else ""
        if n >= 2 and fr and fr.lower >= 3:
            r = rho(fr.lower, n)
            rho_s = f"{r:.6f}"
            env05 = f"{r / lower_exp:.6f}"
            env767 = f"{r / upper_exp:.6f}"
        else:
            rho_s = env05 = env767 = ""
        lines.append(f"{n},{gamma_n},{f_lower},{f_upper},{rho_s},{env05},{env767}")
    return "\n".join(lines) + "\n"


def quotient_table(gamma_rows, f_rows):
    """Per-row ratios gamma(n)/f_upper(n) and gamma(n)/f_lower(n)."""
    f_by_n = {r.n: r for r in f_rows}
    out = []
    for n, gamma_n in gamma_rows:
        fr = f_by_n.get(n)
        if fr is None:
            continue
        out.append((n, gamma_n / fr.upper, gamma_n / fr.lower))
    return out


def quotient_csv(gamma_rows, f_rows):
    lines = ["n,gamma_over_f_upper,gamma_over_f_lower"]
    for n, qu, ql in quotient_table(gamma_rows, f_rows):
        lines.append(f"{n},{qu:.6f},{ql:.6f}")
    return "\n".join(lines) + "\n"
