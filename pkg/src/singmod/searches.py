"""Exhaustive searches over imaginary quadratic discriminants.

The class-number sieve counts reduced triples (a, b, c) per |delta| with
strided numpy adds, then removes imprimitive forms by Moebius inversion over
square divisors.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .arith import SMALL_PRIMES, factor, kronecker
from .errors import DomainError, ResourceError
from .quadforms import (
    ReducedForm,
    class_group_summary,
    class_number,
    class_number_formula,
    compose,
    form_power,
    forms_with_denominator,
    genus_two_rank,
    is_fundamental,
    principal_form,
    unit_index,
)

SIEVE_LIMIT = 30_000_000
DEFAULT_BOUND = 2_500_000
FULL_BOUND = 28_753_200

# -- class number sieve --------------------------------------------------------------


def _a_max(bound: int) -> int:
    return math.isqrt(bound // 3)


def _count_triples(bound: int, a_lo: int, a_hi: int) -> np.ndarray:
    """Reduced triples, primitive or not, with a in [a_lo, a_hi), by |delta|."""
    counts = np.zeros(bound + 1, dtype=np.int32)
    for a in range(a_lo, a_hi):
        step = 4 * a
        for b in range(-a + 1, a + 1):
            c_min = a if b >= 0 else a + 1
            start = step * c_min - b * b
            if start <= bound:
                counts[start::step] += 1
    return counts


def _partition(a_max: int, chunks: int) -> list[tuple[int, int]]:
    """Split [1, a_max] into ranges of roughly equal work (work grows like a)."""
    chunks = max(1, min(chunks, a_max))
    edges = [1]
    for i in range(1, chunks):
        # leave one value of a for each remaining chunk
        edges.append(min(a_max + 1 - (chunks - i), max(edges[-1] + 1, round(a_max * math.sqrt(i / chunks)))))
    edges.append(a_max + 1)
    return [(lo, hi) for lo, hi in zip(edges, edges[1:]) if lo < hi]


def _squarefree_mobius(limit: int) -> np.ndarray:
    mu = np.ones(limit + 1, dtype=np.int8)
    mu[0] = 0
    is_comp = np.zeros(limit + 1, dtype=bool)
    for p in range(2, limit + 1):
        if is_comp[p]:
            continue
        is_comp[p * p :: p] = True
        mu[p::p] *= -1
        mu[p * p :: p * p] = 0
    return mu


def _primitive_counts(raw: np.ndarray) -> np.ndarray:
    bound = len(raw) - 1
    g_max = math.isqrt(bound // 3)
    mu = _squarefree_mobius(max(g_max, 1))
    h = raw.copy()
    for d in range(2, g_max + 1):
        if mu[d] == 0:
            continue
        n = bound // (d * d) + 1
        h[:: d * d][:n] += int(mu[d]) * raw[:n]
    return h


def _read_checkpoint(path: str) -> set[tuple[int, int]]:
    done = set()
    if path and os.path.exists(path):
        with open(path) as fh:
            for line in fh:
                parts = line.split()
                if len(parts) == 3 and parts[2] == "done":
                    done.add((int(parts[0]), int(parts[1])))
    return done


def _progress(msg: str, quiet: bool) -> None:
    if not quiet:
        print(msg, file=sys.stderr, flush=True)


def sieve_class_numbers(
    bound: int,
    *,
    workers: int = 1,
    chunks: int = 1,
    checkpoint: str | None = None,
    quiet: bool = True,
) -> np.ndarray:
    """h(-n) at index n for 0 <= n <= bound; zero where -n is not a discriminant.

    The a-range is split into `chunks` pieces, run on `workers` processes and
    merged by addition.  With a checkpoint path, finished ranges are appended
    as "a_start a_end done" and partial sums kept in "<path>.npy".
    """
    if bound < 3:
        raise DomainError("bound must be at least 3")
    if bound > SIEVE_LIMIT:
        raise ResourceError(f"bound {bound} exceeds the sieve limit {SIEVE_LIMIT}")
    ranges = _partition(_a_max(bound), chunks)
    done = _read_checkpoint(checkpoint) if checkpoint else set()
    total = np.zeros(bound + 1, dtype=np.int32)
    store = f"{checkpoint}.npy" if checkpoint else None
    if done and store and os.path.exists(store):
        saved = np.load(store)
        if len(saved) == bound + 1:
            total = saved
        else:
            done = set()
    todo = [r for r in ranges if r not in done]

    def record(r, part):
        nonlocal total
        total += part
        if checkpoint:
            np.save(store, total)
            with open(checkpoint, "a") as fh:
                fh.write(f"{r[0]} {r[1]} done\n")
        _progress(f"sieve: a in [{r[0]}, {r[1]}) done", quiet)

    if workers > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [(r, pool.submit(_count_triples, bound, *r)) for r in todo]
            for r, fut in futures:
                record(r, fut.result())
    else:
        for r in todo:
            record(r, _count_triples(bound, *r))
    return _primitive_counts(total)


@dataclass(frozen=True)
class SieveReport:
    bound: int
    h_threshold: int
    max_abs_delta_found: int
    count_qualifying: int
    elapsed_seconds: float

    def to_json(self) -> dict:
        return {
            "bound": str(self.bound),
            "h_threshold": str(self.h_threshold),
            "max_abs_delta_found": str(self.max_abs_delta_found),
            "count_qualifying": str(self.count_qualifying),
            "elapsed_seconds": f"{self.elapsed_seconds:.3f}",
        }


def largest_with_class_number_at_most(hs: np.ndarray, threshold: int) -> tuple[int, int]:
    """(max |delta|, count) over discriminants with 1 <= h <= threshold."""
    ok = np.nonzero((hs >= 1) & (hs <= threshold))[0]
    if len(ok) == 0:
        return 0, 0
    return int(ok[-1]), int(len(ok))


def sieve_report(bound: int, h_threshold: int, **kwargs) -> SieveReport:
    t0 = time.perf_counter()
    hs = sieve_class_numbers(bound, **kwargs)
    mx, cnt = largest_with_class_number_at_most(hs, h_threshold)
    return SieveReport(bound, h_threshold, mx, cnt, time.perf_counter() - t0)


def sieve_csv(hs: np.ndarray, threshold: int) -> str:
    """CSV rows delta,h,flags for discriminants with h <= threshold."""
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["delta", "h", "flags"])
    for n in np.nonzero((hs >= 1) & (hs <= threshold))[0]:
        n = int(n)
        w.writerow([-n, int(hs[n]), "fundamental" if is_fundamental(-n) else ""])
    return out.getvalue()


# -- formula stage -----------------------------------------------------------------

DMAX_TABLE: dict[int, int] = {
    1: 163, 2: 427, 3: 907, 4: 1555, 5: 2683, 6: 3763, 7: 5923, 8: 6307, 10: 13843,
    12: 17803, 16: 34483, 25: 111763, 50: 462883, 100: 2383747,
}
"""Largest |D| over fundamental D with h(D) <= n, for n = floor(100 / phi(f))."""

DMAX_MAX_F: dict[int, int] = {
    1: 420, 2: 210, 3: 120, 4: 90, 5: 66, 6: 60, 7: 42, 8: 42, 10: 30,
    12: 30, 16: 18, 25: 12, 50: 6, 100: 2,
}


def _totients(limit: int) -> np.ndarray:
    phi = np.arange(limit + 1, dtype=np.int64)
    for p in range(2, limit + 1):
        if phi[p] == p:
            phi[p::p] -= phi[p::p] // p
    return phi


@dataclass(frozen=True)
class WatkinsBound:
    bound: int
    argmax_f: int
    special_bound: int
    special_f: int
    branches: dict[int, int] = field(default_factory=dict)


def watkins_extension_bound_detail(h_max: int = 100) -> WatkinsBound:
    """max over f of f^2 Dmax(floor(h_max / phi(f))), plus the D in {-3, -4} branch.

    For D in {-3, -4} the unit index (at most 3) allows phi(f) <= 3 h_max.
    """
    if h_max != 100:
        raise DomainError("the stored Dmax table covers h_max = 100 only")
    # phi(f) >= sqrt(f / 2), so f <= 2 (3 h_max)^2 covers both branches
    limit = 2 * (3 * h_max) ** 2
    phi = _totients(limit)
    branches = {}
    best, best_f = 0, 0
    for f in range(1, limit + 1):
        if phi[f] > h_max:
            continue
        n = h_max // int(phi[f])
        v = f * f * DMAX_TABLE[n]
        branches[f] = v
        if v > best:
            best, best_f = v, f
    special_f = max(f for f in range(1, limit + 1) if phi[f] <= 3 * h_max)
    special = 4 * special_f * special_f
    overall = max(best, special)
    return WatkinsBound(overall, best_f, special, special_f, branches)


def watkins_extension_bound() -> int:
    return watkins_extension_bound_detail().bound


def dmax_from_class_numbers(hs: np.ndarray, n: int) -> int:
    """Largest fundamental |D| <= len(hs) - 1 with h(D) <= n."""
    for m in np.nonzero((hs >= 1) & (hs <= n))[0][::-1]:
        if is_fundamental(-int(m)):
            return int(m)
    return 0


# -- 2-elementary enumeration --------------------------------------------------------

TWO_ELEMENTARY_D_BOUND = 693067


@dataclass(frozen=True)
class TatuzawaParams:
    epsilon: Fraction = Fraction(48, 1000)
    floor_abs: int = 1116353418
    coef: int = 26549
    base: Fraction = Fraction(4635, 1000)
    omega_cap: int = 11

    def band_bound(self, n: int) -> int:
        return math.floor(self.coef * self.base**n)

    def first_odd_primes_product(self, n: int) -> int:
        return math.prod(SMALL_PRIMES[1 : n + 1])

    def check_arithmetic(self) -> dict[str, bool]:
        """The elementary inequalities the omega <= 11 cap rests on."""
        odd11 = self.first_odd_primes_product(11)
        checks = {
            "floor_below_4_odd11": self.floor_abs < 4 * odd11,
            "bands_exceed_floor_from_7": all(self.band_bound(n) > self.floor_abs for n in range(7, 12)),
            "band_6_below_floor": self.band_bound(6) < self.floor_abs,
        }
        # omega >= 12: 4 * odd11 * 41^(n-12) > coef * base^n, and the gap grows since 41 > base
        checks["no_omega_12_or_more"] = 4 * odd11 > self.coef * self.base**12
        return checks


CAVEAT = "modulo one exceptional fundamental discriminant of class number >= 128"


@dataclass(frozen=True)
class TwoElementaryReport:
    almost: bool
    discriminants: tuple[tuple[int, int], ...]
    count: int
    max_abs: int
    bands_empty: bool
    caveat: str = CAVEAT

    def to_json(self) -> dict:
        return {
            "almost": self.almost,
            "count": str(self.count),
            "max_abs": str(self.max_abs),
            "max_h": str(max(h for _, h in self.discriminants)),
            "bands_empty": self.bands_empty,
            "caveat": self.caveat,
            "discriminants": [[str(d), str(h)] for d, h in self.discriminants],
        }


def _passes(h: int, two_torsion: int, almost: bool) -> bool:
    return h == two_torsion or (almost and h == 2 * two_torsion)


def _conductors(D: int, almost: bool) -> list[int]:
    if D in (-3, -4):
        return list(range(1, (20 if almost else 8) + 1))
    return factor(240 if almost else 24).divisors()


def _fundamental_class_numbers(bound: int, quiet: bool) -> np.ndarray:
    _progress(f"sieving class numbers to {bound}", quiet)
    return sieve_class_numbers(bound, quiet=quiet)


def enumerate_two_elementary(
    almost: bool,
    *,
    d_bound: int = TWO_ELEMENTARY_D_BOUND,
    check_bands: bool = True,
    hs: np.ndarray | None = None,
    quiet: bool = True,
) -> TwoElementaryReport:
    """All (almost) 2-elementary delta = f^2 D with |D| <= d_bound and omega(D) <= 6.

    Candidates are screened with sieved class numbers and the genus 2-rank,
    extended by conductors with the class number formula, and each survivor
    is confirmed by counting ambiguous forms.
    """
    if hs is None or len(hs) <= d_bound:
        hs = _fundamental_class_numbers(d_bound, quiet)
    found = []
    for m in range(3, d_bound + 1):
        hD = int(hs[m])
        if hD == 0 or hD > 64 or hD & (hD - 1):
            continue
        D = -m
        if not is_fundamental(D) or len(factor(m).factors) > 6:
            continue
        if not _passes(hD, 1 << genus_two_rank(D), True):
            continue
        for f in _conductors(D, almost):
            delta = D * f * f
            h = class_number_formula(D, f, hD)
            t = 1 << genus_two_rank(delta)
            if not _passes(h, t, almost):
                continue
            s = class_group_summary(delta, h)
            if s.two_torsion != t:
                raise ArithmeticError(f"ambiguous count disagrees with genus theory at {delta}")
            if (s.is_almost_two_elementary if almost else s.is_two_elementary):
                found.append((delta, h))
    found.sort(key=lambda x: -x[0])
    bands = high_omega_band_check(quiet=quiet) if check_bands else True
    return TwoElementaryReport(
        almost=almost,
        discriminants=tuple(found),
        count=len(found),
        max_abs=-found[-1][0] if found else 0,
        bands_empty=bands,
    )


# -- high-omega bands ----------------------------------------------------------------


def _odd_squarefree_with_omega(n: int, bound: int) -> np.ndarray:
    """Odd squarefree m <= bound with exactly n prime factors (smallest first)."""
    if n == 0:
        return np.array([1], dtype=np.int64)
    primes = [p for p in _primes_upto(bound // max(1, math.prod(SMALL_PRIMES[1:n])) + 1) if p > 2]
    out: list[int] = []

    def rec(start: int, left: int, prod: int) -> None:
        if left == 1:
            cap = bound // prod
            for p in primes[start:]:
                if p > cap:
                    break
                out.append(prod * p)
            return
        for i in range(start, len(primes)):
            p = primes[i]
            # the smallest possible completion uses the next left-1 primes
            tail = prod * p
            for q in primes[i + 1 : i + left]:
                tail *= q
            if i + left > len(primes) or tail > bound:
                break
            rec(i + 1, left - 1, prod * p)

    rec(0, n, 1)
    return np.array(sorted(out), dtype=np.int64)


_PRIME_CACHE: list[int] = []


def _primes_upto(n: int) -> list[int]:
    global _PRIME_CACHE
    if _PRIME_CACHE and _PRIME_CACHE[-1] >= n:
        import bisect

        return _PRIME_CACHE[: bisect.bisect_right(_PRIME_CACHE, n)]
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    _PRIME_CACHE = [int(p) for p in np.nonzero(sieve)[0]]
    return _PRIME_CACHE


def band_candidates(n: int, params: TatuzawaParams = TatuzawaParams()) -> np.ndarray:
    """Fundamental D < 0 with omega(D) = n and |D| <= coef * base^n, as |D|."""
    B = params.band_bound(n)
    odd_n = _odd_squarefree_with_omega(n, B)
    odd_n1 = _odd_squarefree_with_omega(n - 1, B // 4)
    parts = [
        odd_n[odd_n % 4 == 3],
        4 * odd_n1[odd_n1 % 4 == 1],
        8 * odd_n1[8 * odd_n1 <= B],
    ]
    return np.sort(np.concatenate(parts))


def _split_prime_lower_bound(ms: np.ndarray, n_primes: int = 200) -> np.ndarray:
    """Lower bound for h(-m): the principal form plus two forms per odd prime
    p < sqrt(m / 4) with (-m / p) = 1 and p not dividing m."""
    lb = np.ones(len(ms), dtype=np.int64)
    lim = np.sqrt(ms / 4.0)
    for p in _primes_upto(5000)[1 : n_primes + 1]:
        qr = np.zeros(p, dtype=bool)
        qr[(np.arange(1, p) ** 2) % p] = True
        r = (-ms) % p
        split = qr[r] & (r != 0) & (p < lim)
        lb += 2 * split
    return lb


def _fourth_power_obstruction(D: int) -> bool:
    """True if some prime form has nontrivial fourth power, which rules out an
    almost 2-elementary class group."""
    one = principal_form(D)
    for p in SMALL_PRIMES[:60]:
        if kronecker(D, p) != 1 or 4 * p * p > -D:
            continue
        for f in forms_with_denominator(D, p):
            if form_power(f, 4) != one:
                return True
    return False


def high_omega_band_check(
    params: TatuzawaParams = TatuzawaParams(),
    bands=range(7, 12),
    quiet: bool = True,
) -> bool:
    """No almost 2-elementary fundamental D with omega(D) = n, |D| <= coef * base^n."""
    for n in bands:
        ms = band_candidates(n, params)
        target = 1 << n  # almost 2-elementary fundamental D has h <= 2^omega
        lb = _split_prime_lower_bound(ms)
        left = ms[lb <= target]
        _progress(f"band omega={n}: {len(ms)} candidates, {len(left)} after counting forms", quiet)
        for m in left:
            D = -int(m)
            if _fourth_power_obstruction(D):
                continue
            h = class_number(D)
            t = 1 << genus_two_rank(D)
            if _passes(h, t, True):
                _progress(f"band omega={n}: almost 2-elementary D={D}", quiet)
                return False
    return True


def band_counts(params: TatuzawaParams = TatuzawaParams()) -> dict[int, int]:
    return {n: len(band_candidates(n, params)) for n in range(7, 12)}


def report_json(obj) -> str:
    return json.dumps(obj.to_json(), indent=2)
