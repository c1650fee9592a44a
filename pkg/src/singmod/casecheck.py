"""Denominator-configuration linear systems and the q-expansion margins that
close the three-term case analysis.

Each table below is plain data.  A system says that for every Galois
conjugation sigma the weighted sum of exponents over denominators is
unchanged:

    sum_i m'_i / a(x_i) = sum_i m'_i / a(x_i^sigma)

so every system is homogeneous and the only question is whether its kernel
is trivial.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

from mpmath import mp

from .ball import Ball
from .errors import DomainError
from .isogeny import q_set

# -- table data ------------------------------------------------------------------------


@dataclass(frozen=True)
class PairedRow:
    """A configuration with n' = r': unknowns (m', n').

    At the base point the denominators are a_x = 1 and (a_y, a_z); for each
    sigma, a(x^sigma) is fixed and the unordered pair {a(y^sigma), a(z^sigma)}
    ranges over the given set with repetition.
    """

    case_id: str
    congruence: str
    e: tuple[int, int, int]
    ell: int
    az_options: tuple[int, ...]
    sigma_options: tuple[tuple[int, tuple[int, ...]], ...]
    total: int
    a_y: int = 1


@dataclass(frozen=True)
class TripleRow:
    """Three unknowns (m', n', r') with base denominators `base` and one row
    of candidate denominators (x, y, z) per sigma."""

    case_id: str
    congruence: str
    e: tuple[int, int, int]
    base: tuple[int, int, int]
    sigma_options: tuple[tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]], ...]
    total: int


# Two equal-discriminant points with e_y = e_z and n' = r'; a_x = a_y = 1.
TABLE3: tuple[PairedRow, ...] = (
    PairedRow("e1-3-3", "1 mod 3", (1, 3, 3), 3, (9,), ((3, (3, 27)), (9, (9, 81))), 9),
    PairedRow("e2-3-3", "1 mod 24", (2, 3, 3), 6, (9,), ((3, (3, 27)), (9, (9, 81))), 9),
    PairedRow("e1-4-4", "1 mod 8", (1, 4, 4), 4, (4, 16), ((2, (2, 8, 32)), (4, (4, 16, 64))), 72),
    PairedRow("e1-6-6", "1 mod 24", (1, 6, 6), 6, (4, 9, 36), ((2, (2, 8, 18, 72)), (3, (3, 12, 27, 108))), 300),
    PairedRow("e1-2-2/4mod32", "4 mod 32", (1, 2, 2), 2, (4,), ((8, (8, 32)), (16, (16, 64))), 9),
)
TABLE3_PRINTED_TOTAL = 390  # the first four rows; the last row adds 9 more

# Both x, y dominant, e = (1, 2, e_z), delta = 1 mod 8.
TABLE4: tuple[TripleRow, ...] = (
    TripleRow("e1-2-1", "1 mod 8", (1, 2, 1), (1, 1, 4),
              (((2,), (8,), (2, 8)), ((4,), (16,), (1,)), ((2, 8), (8, 32), (2,))), 8),
    TripleRow("e1-2-2", "1 mod 8", (1, 2, 2), (1, 1, 3),
              (((2,), (8,), (24,)), ((3,), (3,), (1,)), ((6, 24), (24,), (8,))), 2),
)

# x dominant, y and z subdominant, e_y = e_z = 1, delta = 1 mod 8.
TABLE5: tuple[TripleRow, ...] = (
    TripleRow("e1-1-1", "1 mod 8", (1, 1, 1), (1, 2, 2),
              (((2,), (1,), (4,)), ((2,), (4,), (1,)), ((4, 16), (8,), (2, 8, 32))), 6),
    TripleRow("e2-1-1", "1 mod 8", (2, 1, 1), (1, 2, 2),
              (((8,), (1,), (4,)), ((8,), (4,), (1,)), ((16, 64), (8,), (2, 8, 32))), 6),
)

# x dominant, y and z subdominant with e_y = e_z = 3 and n' = r'; both e_x = 1 and
# e_x = 2 give the same systems.
LAMBDA_ROWS: tuple[PairedRow, ...] = (
    PairedRow("e12-3-3/subdominant", "1 mod 24", (1, 3, 3), 6, (2,), ((3, (54,)), (9, (18, 162))), 3, a_y=2),
)

# Rows of the configuration table: (e, [L:K(.)]) for x, y, z, the congruence, and
# whether n = r is forced.
TABLE2: tuple[tuple[tuple[tuple[int, int], ...], str, bool], ...] = (
    (((1, 1), (1, 1), (1, 1)), "any", False),
    (((1, 1), (1, 1), (2, 1)), "1 mod 8", False),
    (((1, 1), (2, 1), (2, 1)), "1 mod 8", False),
    (((1, 2), (2, 1), (2, 1)), "0 mod 4", True),
    (((1, 2), (3, 1), (3, 1)), "1 mod 3", True),
    (((2, 2), (3, 1), (3, 1)), "1 mod 24", True),
    (((1, 2), (4, 1), (4, 1)), "1 mod 8", True),
    (((1, 2), (6, 1), (6, 1)), "1 mod 24", True),
)

# -- systems ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CaseSystem:
    unknowns: tuple[str, ...]
    equations: tuple[tuple[tuple[Fraction, ...], Fraction], ...]
    provenance: tuple
    denominators: tuple[int, ...] = field(default=(), compare=False)

    def matrix(self) -> list[list[Fraction]]:
        return [list(c) for c, _ in self.equations]

    def to_json(self) -> dict:
        return {
            "unknowns": list(self.unknowns),
            "equations": [[[str(c) for c in coeffs], str(rhs)] for coeffs, rhs in self.equations],
            "provenance": [str(p) for p in self.provenance],
        }


def _inv(a: int) -> Fraction:
    return Fraction(1, a)


def _paired_systems(row: PairedRow) -> list[CaseSystem]:
    out = []
    pair_choices = [list(itertools.combinations_with_replacement(opts, 2)) for _, opts in row.sigma_options]
    for az in row.az_options:
        for picks in itertools.product(*pair_choices):
            eqs, dens = [], [1, row.a_y, az]
            for (ax, _), (ay, azs) in zip(row.sigma_options, picks):
                cm = 1 - _inv(ax)
                cn = _inv(row.a_y) + _inv(az) - _inv(ay) - _inv(azs)
                eqs.append(((cm, cn), Fraction(0)))
                dens += [ax, ay, azs]
            out.append(CaseSystem(("m'", "n'"), tuple(eqs), (row.case_id, az) + picks, tuple(dens)))
    return out


def _triple_systems(row: TripleRow) -> list[CaseSystem]:
    out = []
    choices = [list(itertools.product(*opts)) for opts in row.sigma_options]
    bx, by, bz = row.base
    for picks in itertools.product(*choices):
        eqs, dens = [], [bx, by, bz]
        for ax, ay, az in picks:
            eqs.append(((_inv(bx) - _inv(ax), _inv(by) - _inv(ay), _inv(bz) - _inv(az)), Fraction(0)))
            dens += [ax, ay, az]
        out.append(CaseSystem(("m'", "n'", "r'"), tuple(eqs), (row.case_id,) + picks, tuple(dens)))
    return out


def generate_systems(row) -> list[CaseSystem]:
    """Every system from the Cartesian product of a row's options."""
    if isinstance(row, PairedRow):
        return _paired_systems(row)
    if isinstance(row, TripleRow):
        return _triple_systems(row)
    raise DomainError(f"unknown row type {type(row).__name__}")


def builtin_case_tables() -> dict[str, tuple]:
    return {"t3": TABLE3, "t4": TABLE4, "t5": TABLE5, "lambda": LAMBDA_ROWS}


# -- exact kernels ---------------------------------------------------------------------


@dataclass(frozen=True)
class Kernel:
    dimension: int
    basis: tuple[tuple[Fraction, ...], ...]

    @property
    def trivial(self) -> bool:
        return self.dimension == 0


def _integer_rows(rows: list[list[Fraction]]) -> list[list[int]]:
    out = []
    for r in rows:
        den = math.lcm(*[Fraction(x).denominator for x in r]) if r else 1
        out.append([int(Fraction(x) * den) for x in r])
    return out


def solve_homogeneous(system: CaseSystem | list, n_unknowns: int | None = None) -> Kernel:
    """Kernel of a homogeneous system by fraction-free (Bareiss) elimination."""
    if isinstance(system, CaseSystem):
        rows = system.matrix()
        n = len(system.unknowns)
    else:
        rows = [list(r) for r in system]
        if n_unknowns is None:
            if not rows:
                raise DomainError("give n_unknowns for an empty system")
            n_unknowns = len(rows[0])
        n = n_unknowns
    if isinstance(system, CaseSystem) and any(rhs != 0 for _, rhs in system.equations):
        raise DomainError("system is not homogeneous")
    m = _integer_rows(rows)
    pivots: list[int] = []
    r, prev = 0, 1
    for c in range(n):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        for i in range(r + 1, len(m)):
            m[i] = [(m[r][c] * m[i][j] - m[i][c] * m[r][j]) // prev for j in range(n)]
        prev = m[r][c]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fcol in free:
        v = [Fraction(0)] * n
        v[fcol] = Fraction(1)
        for i in reversed(range(len(pivots))):
            c = pivots[i]
            s = sum((Fraction(m[i][j]) * v[j] for j in range(c + 1, n)), Fraction(0))
            v[c] = -s / m[i][c]
        den = math.lcm(*[x.denominator for x in v])
        g = math.gcd(*[int(x * den) for x in v])
        basis.append(tuple(x * den / g for x in v))
    return Kernel(len(free), tuple(basis))


def _det(mat: list[list[Fraction]]) -> Fraction:
    if len(mat) == 1:
        return mat[0][0]
    return sum(
        ((-1) ** j) * mat[0][j] * _det([row[:j] + row[j + 1 :] for row in mat[1:]])
        for j in range(len(mat))
        if mat[0][j] != 0
    ) or Fraction(0)


def rank_by_minors(rows: list[list[Fraction]], n: int) -> int:
    """Largest r with a nonzero r x r minor."""
    for r in range(min(len(rows), n), 0, -1):
        for ri in itertools.combinations(range(len(rows)), r):
            for ci in itertools.combinations(range(n), r):
                if _det([[Fraction(rows[i][j]) for j in ci] for i in ri]) != 0:
                    return r
    return 0


# -- derived option sets -----------------------------------------------------------------


def isogeny_options(e_x: int, e_z: int, ell: int, a_x: int, minimum: int) -> tuple[int, ...]:
    """(a_x e_z / e_x) Q(ell), restricted to integers >= minimum."""
    scale = Fraction(a_x * e_z, e_x)
    vals = {scale * r for r in q_set(ell)}
    return tuple(sorted(int(v) for v in vals if v.denominator == 1 and v >= minimum))


def audit_paired_row(row: PairedRow) -> list[str]:
    """Compare the row's option sets with those implied by the isogeny ratio sets."""
    e_x, _, e_z = row.e
    problems = []
    if row.a_y == 1:
        want = isogeny_options(e_x, e_z, row.ell, 1, 2)
        if want != tuple(sorted(row.az_options)):
            problems.append(f"{row.case_id}: a_z options {row.az_options} != {want}")
        for ax, opts in row.sigma_options:
            want = isogeny_options(e_x, e_z, row.ell, ax, 1)
            if want != tuple(sorted(opts)):
                problems.append(f"{row.case_id}: options for a(x^s)={ax} are {opts}, expected {want}")
    return problems


def audit_system(system: CaseSystem, row) -> bool:
    """Every coefficient is a signed sum of reciprocals of denominators that
    occur in the row's option sets."""
    allowed = {1}
    if isinstance(row, PairedRow):
        allowed |= set(row.az_options) | {row.a_y}
        for ax, opts in row.sigma_options:
            allowed |= {ax, *opts}
    else:
        allowed |= set(row.base)
        for opts in row.sigma_options:
            for o in opts:
                allowed |= set(o)
    return set(system.denominators) <= allowed


# -- configuration table -------------------------------------------------------------

_RESIDUES = [(r8, r3) for r8 in (0, 1, 4, 5) for r3 in (0, 1, 2)]


def _kron_small(res: tuple[int, int], p: int) -> int:
    r8, r3 = res
    if p == 2:
        return 0 if r8 in (0, 4) else (1 if r8 == 1 else -1)
    return 0 if r3 == 0 else (1 if r3 == 1 else -1)


def _degree(ell_over_e: int, e: int, res: tuple[int, int]) -> int:
    """Psi(ell/e, e^2 delta) for delta in the residue class `res`."""
    out = 1
    n = ell_over_e
    for p in (2, 3):
        k = 0
        while n % p == 0:
            n //= p
            k += 1
        if k:
            chi = 0 if e % p == 0 else _kron_small(res, p)
            out *= p ** (k - 1) * (p - chi)
    if n != 1:
        # a prime >= 5 gives Psi >= p - 1 >= 4
        from .arith import factor

        for p, k in factor(n).factors:
            out *= p ** (k - 1) * (p - 1)
    return out


def _classes_of(label: str) -> frozenset:
    if label == "any":
        return frozenset(_RESIDUES)
    rules = {
        "1 mod 8": lambda r: r[0] == 1,
        "0 mod 4": lambda r: r[0] in (0, 4),
        "1 mod 3": lambda r: r[1] == 1,
        "1 mod 24": lambda r: r[0] == 1 and r[1] == 1,
    }
    return frozenset(r for r in _RESIDUES if rules[label](r))


def derive_configurations(e_limit: int = 36) -> dict[tuple, frozenset]:
    """Configurations (e, degree) of three points allowed by the degree bound
    [L:K(x)] <= 2, keyed up to permutation, with their residue classes of delta
    (mod 8 and mod 3).

    A point of degree 2 forces the other two to share their e.
    """
    out: dict[tuple, set] = {}
    for ex, ey, ez in itertools.combinations_with_replacement(range(1, e_limit + 1), 3):
        if math.gcd(ex, ey, ez) != 1:
            continue
        ell = math.lcm(ex, ey, ez)
        for res in _RESIDUES:
            degs = [_degree(ell // e, e, res) for e in (ex, ey, ez)]
            if max(degs) > 2:
                continue
            es = (ex, ey, ez)
            ok = all(d == 1 or len({es[j] for j in range(3) if j != i}) == 1 for i, d in enumerate(degs))
            if not ok:
                continue
            key = tuple(sorted(zip(es, degs)))
            out.setdefault(key, set()).add(res)
    return {k: frozenset(v) for k, v in out.items()}


def check_configuration_table() -> list[str]:
    """Differences between the stored configuration table and the derivation."""
    derived = derive_configurations()
    stored = {tuple(sorted(cfg)): _classes_of(label) for cfg, label, _ in TABLE2}
    problems = []
    for k in sorted(set(derived) | set(stored)):
        if derived.get(k) != stored.get(k):
            problems.append(f"{k}: stored {sorted(stored.get(k, ()))} derived {sorted(derived.get(k, ()))}")
    # n = r is forced exactly when some point has degree 2
    for cfg, _, forced in TABLE2:
        if forced != any(d == 2 for _, d in cfg):
            problems.append(f"{cfg}: n = r flag inconsistent")
    return problems


# -- full run --------------------------------------------------------------------------


@dataclass
class CaseReport:
    counts: dict[str, int]
    nontrivial: list[tuple]
    audit_problems: list[str]
    systems: list[tuple[str, CaseSystem, Kernel]] = field(default_factory=list, repr=False)

    @property
    def passed(self) -> bool:
        return not self.nontrivial and not self.audit_problems

    def to_json(self, include_systems: bool = False) -> dict:
        out = {
            "passed": self.passed,
            "counts": {k: str(v) for k, v in self.counts.items()},
            "total": str(sum(self.counts.values())),
            "nontrivial": [[str(x) for x in p] for p in self.nontrivial],
            "audit_problems": self.audit_problems,
        }
        if include_systems:
            out["systems"] = [
                {"table": t, **s.to_json(), "kernel_dimension": str(k.dimension)} for t, s, k in self.systems
            ]
        return out


def check_all_cases(tables=("t2", "t3", "t4", "t5", "lambda"), keep_systems: bool = False) -> CaseReport:
    """Solve every stored system; pass iff all kernels are trivial and the
    counts equal the stored totals."""
    data = builtin_case_tables()
    counts: dict[str, int] = {}
    nontrivial, problems, kept = [], [], []
    if "t2" in tables:
        problems += check_configuration_table()
        counts["t2"] = len(TABLE2)
    for name in ("t3", "t4", "t5", "lambda"):
        if name not in tables:
            continue
        for row in data[name]:
            systems = generate_systems(row)
            key = f"{name}:{row.case_id}"
            counts[key] = len(systems)
            if len(systems) != row.total:
                problems.append(f"{key}: {len(systems)} systems, expected {row.total}")
            if isinstance(row, PairedRow):
                problems += audit_paired_row(row)
            for s in systems:
                if not audit_system(s, row):
                    problems.append(f"{key}: coefficient audit failed for {s.provenance}")
                k = solve_homogeneous(s)
                if not k.trivial:
                    nontrivial.append(s.provenance)
                if keep_systems:
                    kept.append((name, s, k))
    return CaseReport(counts, nontrivial, problems, kept)


def table3_printed_subtotal() -> int:
    """Systems in the first four rows of the paired table (the printed total)."""
    return sum(len(generate_systems(r)) for r in TABLE3[:4])


# -- q-expansion margins ---------------------------------------------------------------

MARGIN_FLOOR = 10**7


def qexpansion_contradiction_margin(abs_delta: int, norm_cap_exponent: int = 17, bits: int = 128) -> Ball:
    """Enclosure of 10^k |delta|^(1/2) exp(-pi |delta|^(1/2) / 4)."""
    if abs_delta < MARGIN_FLOOR:
        raise DomainError(f"|delta| must be at least {MARGIN_FLOOR}")
    with mp.workprec(bits):
        s = Ball.sqrt_int(abs_delta)
        return Ball.exact(10**norm_cap_exponent) * s * (-(Ball.pi() * s) / 4).exp()


def log10_upper(b: Ball) -> float:
    """A float upper estimate of log10 of the ball's upper bound."""
    import mpmath

    return float(mpmath.log10(b.abs_upper()))


def margin_below(abs_delta: int, log10_target: int = -900) -> bool:
    """Certified: the margin is below 10^log10_target."""
    b = qexpansion_contradiction_margin(abs_delta)
    with mp.workprec(128):
        return b.lt(Ball.exact(Fraction(1, 10 ** (-log10_target)))) is True


def second_order_remainder(abs_delta: int, root: int = 8, bits: int = 128) -> tuple[Ball, Ball]:
    """(162000 t^2 + 10^10 t^3, pi / 12) with t = exp(-pi |delta|^(1/2) / root)."""
    with mp.workprec(bits):
        t = (-(Ball.pi() * Ball.sqrt_int(abs_delta)) / root).exp()
        lhs = Ball.exact(162000) * t * t + Ball.exact(10**10) * t**3
        return lhs, Ball.pi() / 12


def second_order_contradiction(abs_delta: int, root: int = 8) -> bool:
    """Both halves of the closing argument: the right side is far below pi/12,
    so k = 0; and 162000 t^2 > 10^10 t^3, so the t^2 term cannot cancel."""
    lhs, target = second_order_remainder(abs_delta, root)
    with mp.workprec(128):
        t = (-(Ball.pi() * Ball.sqrt_int(abs_delta)) / root).exp()
        dominant = Ball.exact(10**10) * t
        return lhs.lt(target) is True and dominant.lt(Ball.exact(162000)) is True


# first two coefficients of log(q j(q)) = 744 q - 79884 q^2 + ...
LOG_QJ = (744, -79884)


def t2_coefficient(terms, xi: complex) -> complex:
    """Coefficient of t^2 in sum mult * log(q j) over terms (mult, unit, power)
    with q = unit * t^power; the unit may mention xi."""
    total = 0
    for mult, unit, power in terms:
        u = unit(xi)
        if power == 2:
            total += mult * LOG_QJ[0] * u
        elif power == 1:
            total += mult * LOG_QJ[1] * u * u
    return total


def e96_terms():
    """log terms of (x^4 (x^s)^-4 y^-1 z^-1 y^s z^s) in the 2-isogeny configuration."""
    return [
        (4, lambda xi: 1, 4),
        (-4, lambda xi: xi * xi, 2),
        (-1, lambda xi: 1, 8),
        (-1, lambda xi: -xi * xi, 2),
        (1, lambda xi: xi, 1),
        (1, lambda xi: -xi, 1),
    ]


def e72_terms(eps: int = 1):
    return [
        (3, lambda xi: 1, 8),
        (-3, lambda xi: xi * xi, 2),
        (-1, lambda xi: 1, 16),
        (-1, lambda xi: -eps * 1j * xi * xi, 4),
        (1, lambda xi: xi, 1),
        (1, lambda xi: -xi, 1),
    ]


# -- refinement by denominator admissibility ----------------------------------------------
#
# Not applied by check_all_cases: the stored option sets are checked as given.
# This filter drops a denominator a for a point of discriminant e^2 delta when no
# delta in the row's congruence class admits a primitive form with that a.


def _parse_congruence(label: str) -> tuple[int, int]:
    r, _, m = label.partition(" mod ")
    return int(r), int(m)


def denominator_admissible(a: int, e: int, congruence: str) -> bool:
    """Some delta = r mod M (delta = 0, 1 mod 4) has a primitive form
    (a, b, c) of discriminant e^2 delta."""
    r, M = _parse_congruence(congruence)
    import numpy as np

    N = math.lcm(4 * a * a, M, 4)
    deltas = np.arange(-N, 0, dtype=np.int64)
    deltas = deltas[((deltas % M) == r % M) & np.isin(deltas % 4, (0, 1))]
    D = e * e * deltas
    for b in range(2 * a):
        num = b * b - D
        ok = num % (4 * a) == 0
        if not ok.any():
            continue
        c = num[ok] // (4 * a)
        g = np.gcd(np.gcd(a, b), c)
        if (g == 1).any():
            return True
    return False


def refined_systems(row) -> list[CaseSystem]:
    """Systems whose denominators are all admissible for their points."""
    cong = row.congruence
    ex, ey, ez = row.e
    keep = []
    for s in generate_systems(row):
        dens = s.denominators
        # denominators are stored as (x, y, z) triples: base first, then one per sigma
        ok = all(
            denominator_admissible(d, e, cong)
            for i, d in enumerate(dens)
            for e in ((ex, ey, ez)[i % 3],)
        )
        if ok:
            keep.append(s)
    return keep
