"""Exact arithmetic in Z[i].

Norms and inner products, Euclidean division and gcd with a canonical
associate, the fundamental domain B_q and its reduced residues, the Gaussian
Euler phi, Ramanujan sums, and best rational approximation on the torus
T^2 = C / Z[i].
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True, slots=True)
class GaussInt:
    """Lattice point re + i*im with exact integer components."""

    re: int
    im: int

    def __add__(self, other: "GaussInt") -> "GaussInt":
        return GaussInt(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "GaussInt") -> "GaussInt":
        return GaussInt(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "GaussInt":
        return GaussInt(-self.re, -self.im)

    def __mul__(self, other: "GaussInt") -> "GaussInt":
        return GaussInt(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    def __bool__(self) -> bool:
        return bool(self.re or self.im)

    def conj(self) -> "GaussInt":
        return GaussInt(self.re, -self.im)

    def norm(self) -> int:
        return self.re * self.re + self.im * self.im

    def times_i(self) -> "GaussInt":
        return GaussInt(-self.im, self.re)

    def __repr__(self) -> str:
        return f"GaussInt({self.re}, {self.im})"


ZERO = GaussInt(0, 0)
ONE = GaussInt(1, 0)
I = GaussInt(0, 1)
UNITS = (ONE, I, GaussInt(-1, 0), GaussInt(0, -1))


def norm(z: GaussInt) -> int:
    return z.re * z.re + z.im * z.im


def inner(z: GaussInt, w: GaussInt) -> int:
    """Real inner product <z, w> = Re(z) Re(w) + Im(z) Im(w)."""
    return z.re * w.re + z.im * w.im


def canonical_unit(z: GaussInt) -> GaussInt:
    """The unit u with u*z in the half-open quadrant {re > 0, im >= 0}."""
    if not z:
        raise ValueError("canonical_unit(0) is undefined")
    if z.re > 0 and z.im >= 0:
        return ONE
    if z.im > 0 and z.re <= 0:
        return GaussInt(0, -1)  # rotate quadrant II down
    if z.re < 0 and z.im <= 0:
        return GaussInt(-1, 0)
    return I


def canonical(z: GaussInt) -> GaussInt:
    """Canonical associate: the element of {z, iz, -z, -iz} with re > 0, im >= 0."""
    return canonical_unit(z) * z


def euclid_divmod(a: GaussInt, b: GaussInt) -> tuple[GaussInt, GaussInt]:
    """Round-to-nearest division: a = q*b + r with norm(r) <= norm(b)/2."""
    if not b:
        raise ZeroDivisionError("division by zero in Z[i]")
    w = a * b.conj()
    c = norm(b)
    qx = (2 * w.re + c) // (2 * c)
    qy = (2 * w.im + c) // (2 * c)
    q = GaussInt(qx, qy)
    return q, a - q * b


def divides(d: GaussInt, n: GaussInt) -> bool:
    if not d:
        return not n
    w = n * d.conj()
    c = norm(d)
    return w.re % c == 0 and w.im % c == 0


def exact_div(n: GaussInt, d: GaussInt) -> GaussInt:
    w = n * d.conj()
    c = norm(d)
    if w.re % c or w.im % c:
        raise ValueError(f"{d} does not divide {n}")
    return GaussInt(w.re // c, w.im // c)


def gcd(a: GaussInt, b: GaussInt) -> GaussInt:
    """Canonical-associate gcd via the Euclidean algorithm."""
    if not a and not b:
        raise ValueError("gcd(0, 0) is undefined")
    while b:
        a, b = b, euclid_divmod(a, b)[1]
    return canonical(a)


def is_unit(z: GaussInt) -> bool:
    return norm(z) == 1


# ---------------------------------------------------------------------------
# Fundamental domain B_q and reduced residues A_q
# ---------------------------------------------------------------------------

def in_Bq(x: GaussInt, q: GaussInt) -> bool:
    """Membership in B_q: 0 <= <x,q> < N(q) and 0 <= <x,iq> < N(q)."""
    if not q:
        raise ValueError("B_q requires q != 0")
    nq = norm(q)
    u = inner(x, q)
    if u < 0 or u >= nq:
        return False
    v = inner(x, q.times_i())
    return 0 <= v < nq


def mod_Bq(x: GaussInt, q: GaussInt) -> GaussInt:
    """The unique representative of x modulo q*Z[i] lying in B_q.

    Works in the (q, iq) coordinates u + iv = x * conj(q): reducing u, v into
    [0, N(q)) picks out the B_q cell exactly.
    """
    if not q:
        raise ValueError("reduction modulo 0")
    w = x * q.conj()
    nq = norm(q)
    kx = (w.re - w.re % nq) // nq
    ky = (w.im - w.im % nq) // nq
    return x - GaussInt(kx, ky) * q


@lru_cache(maxsize=4096)
def enumerate_Bq(q: GaussInt) -> tuple[GaussInt, ...]:
    """All N(q) lattice points of the fundamental cell B_q."""
    if not q:
        raise ValueError("B_q requires q != 0")
    iq = q.times_i()
    corners = [ZERO, q, iq, q + iq]
    res = [c.re for c in corners]
    ims = [c.im for c in corners]
    out = []
    for a in range(min(res), max(res) + 1):
        for b in range(min(ims), max(ims) + 1):
            x = GaussInt(a, b)
            if in_Bq(x, q):
                out.append(x)
    if len(out) != norm(q):
        raise AssertionError(f"|B_q| = {len(out)} != N(q) = {norm(q)} for q = {q}")
    return tuple(out)


@lru_cache(maxsize=4096)
def enumerate_Aq(q: GaussInt) -> tuple[GaussInt, ...]:
    """Reduced residues A_q = {r in B_q : gcd(r, q) is a unit}."""
    if is_unit(q):
        return (ZERO,)
    return tuple(x for x in enumerate_Bq(q) if is_unit(gcd(x, q) if x else canonical(q)))


def _factor_int(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def _split_rational_prime(p: int) -> GaussInt:
    """A Gaussian prime above p = 1 mod 4 (p = s^2 + t^2 by direct search)."""
    for t in range(1, math.isqrt(p) + 1):
        s2 = p - t * t
        s = math.isqrt(s2)
        if s * s == s2:
            return canonical(GaussInt(s, t))
    raise AssertionError(f"no two-square splitting found for {p}")


@lru_cache(maxsize=8192)
def gaussian_factorization(q: GaussInt) -> tuple[tuple[GaussInt, int], ...]:
    """Factorization of q into canonical Gaussian primes (unit dropped)."""
    if not q:
        raise ValueError("cannot factor 0")
    rest = q
    out: list[tuple[GaussInt, int]] = []
    for p in sorted(_factor_int(norm(q))):
        if p == 2:
            cands = [GaussInt(1, 1)]
        elif p % 4 == 3:
            cands = [GaussInt(p, 0)]
        else:
            pi = _split_rational_prime(p)
            cands = [pi, canonical(pi.conj())]
        for pi in cands:
            e = 0
            while divides(pi, rest):
                rest = exact_div(rest, pi)
                e += 1
            if e:
                out.append((pi, e))
    if not is_unit(rest):
        raise AssertionError(f"incomplete factorization of {q}, remainder {rest}")
    return tuple(out)


def euler_phi(q: GaussInt) -> int:
    """|A_q| = N(q) * prod over prime divisors of (1 - 1/N(p)), exactly."""
    if not q:
        raise ValueError("euler_phi(0) is undefined")
    phi = 1
    for pi, e in gaussian_factorization(q):
        npi = norm(pi)
        phi *= npi ** (e - 1) * (npi - 1)
    return phi


# ---------------------------------------------------------------------------
# Torus points and rationals a/q
# ---------------------------------------------------------------------------

class TorusPoint(NamedTuple):
    """Point of T^2 = C / Z[i], coordinates reduced into [0, 1)."""

    x: float
    y: float


def torus_point(x: float, y: float) -> TorusPoint:
    return TorusPoint(x % 1.0, y % 1.0)


def torus_diff(a: TorusPoint, b: TorusPoint) -> tuple[float, float]:
    """Minimal representative of a - b, components in [-1/2, 1/2)."""
    dx = (a.x - b.x + 0.5) % 1.0 - 0.5
    dy = (a.y - b.y + 0.5) % 1.0 - 0.5
    return dx, dy


def torus_norm(a: TorusPoint, b: TorusPoint = TorusPoint(0.0, 0.0)) -> float:
    """Squared distance to the nearest lattice translate of b."""
    dx, dy = torus_diff(a, b)
    return dx * dx + dy * dy


def dist_to_lattice(a: TorusPoint) -> float:
    """The paper-style ||a||, in [0, 1/sqrt(2)]."""
    return math.sqrt(torus_norm(a))


@dataclass(frozen=True, slots=True)
class ReducedRational:
    """Torus rational a/q with q a canonical associate, a in A_q, gcd(a,q) a unit.

    s is the dyadic shell index: 2^s <= N(q) < 2^(s+1).
    """

    a: GaussInt
    q: GaussInt
    s: int

    def nq(self) -> int:
        return norm(self.q)

    def phase_ints(self) -> tuple[int, int, int]:
        """(P, Q, nq) with torus coordinates (P/nq, Q/nq), 0 <= P, Q < nq."""
        nq = norm(self.q)
        return inner(self.a, self.q) % nq, inner(self.a, self.q.times_i()) % nq, nq

    def torus(self) -> TorusPoint:
        p, qq, nq = self.phase_ints()
        return TorusPoint(p / nq, qq / nq)


def reduced_rational(a: GaussInt, q: GaussInt) -> ReducedRational:
    """Canonicalize the fraction a/q: divide out the gcd, normalize the
    associate of the denominator, reduce the numerator into B_q."""
    if not q:
        raise ValueError("denominator must be nonzero")
    if a:
        g = gcd(a, q)
        a = exact_div(a, g)
        q = exact_div(q, g)
    else:
        q = ONE
    u = canonical_unit(q)
    q = u * q
    a = mod_Bq(u * a, q)
    nq = norm(q)
    return ReducedRational(a, q, nq.bit_length() - 1)


def is_reduced(r: ReducedRational) -> bool:
    ok = in_Bq(r.a, r.q) and canonical(r.q) == r.q
    ok = ok and (is_unit(gcd(r.a, r.q)) if r.a else is_unit(r.q))
    return ok and (1 << r.s) <= norm(r.q) < (1 << (r.s + 1))


def ramanujan_tau(q: GaussInt, n: GaussInt) -> float:
    """Ramanujan sum tau_q(n) = sum over a in A_q of e(<n, a/q>).

    Phases are exact rationals with denominator N(q); the sum is real to
    rounding and integer-valued.  Note the periodicity is modulo conj(q):
    e(<., a/q>) is constant on cosets of conj(q) Z[i].
    """
    if not q:
        raise ValueError("tau_q requires q != 0")
    nq = norm(q)
    total = 0.0 + 0.0j
    iq = q.times_i()
    for a in enumerate_Aq(q):
        num = (n.re * inner(a, q) + n.im * inner(a, iq)) % nq
        total += cmath.exp(2j * math.pi * num / nq)
    return total.real


def canonical_elements(max_norm: int, min_norm: int = 1) -> list[GaussInt]:
    """Canonical associates (re > 0, im >= 0) with min_norm <= N <= max_norm,
    sorted by norm."""
    out = []
    for a in range(1, math.isqrt(max_norm) + 1):
        b_hi = math.isqrt(max_norm - a * a)
        for b in range(0, b_hi + 1):
            if a * a + b * b >= min_norm:
                out.append(GaussInt(a, b))
    out.sort(key=lambda z: (norm(z), z.re, z.im))
    return out


def dirichlet_approx(alpha: TorusPoint, qmax: int) -> ReducedRational:
    """Best rational a/q with 1 <= N(q) <= qmax minimizing N(alpha - a/q).

    Exhaustive over canonical denominators; per q the optimal numerator is
    the componentwise rounding of alpha * q, so the scan is globally optimal.
    """
    if qmax < 1:
        raise ValueError("qmax must be >= 1")
    best: ReducedRational | None = None
    best_err = math.inf
    for q in canonical_elements(qmax):
        zr = alpha.x * q.re - alpha.y * q.im
        zi = alpha.x * q.im + alpha.y * q.re
        m = GaussInt(round(zr), round(zi))
        r = reduced_rational(m, q)
        err = torus_norm(alpha, r.torus())
        if err < best_err - 1e-15 or (
            abs(err - best_err) <= 1e-15 and best is not None and norm(r.q) < norm(best.q)
        ):
            best, best_err = r, err
    assert best is not None
    return best
