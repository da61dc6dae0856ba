"""Divisor sieve over norm balls in Z[i] and radial lattice statistics.

Provides the dense divisor table d(n) with its summatory prefix D(k), an
independent trial-division oracle, sector sums, r2 counting (numbers of
representations as a sum of two squares), the harmonic r2 sum, and the
Sierpinski-constant estimate used in all main-term formulas.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .gaussint import GaussInt, norm

TWO_PI = 2.0 * math.pi

MAGIC = b"GDIV1"

# chunk cap for broadcasted divisor*multiple products
_CHUNK = 4_000_000


def ball_points(nmax: int, include_origin: bool = False) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Arrays (re, im, norm) of lattice points with norm <= nmax (origin optional)."""
    r = math.isqrt(nmax)
    side = np.arange(-r, r + 1, dtype=np.int64)
    re, im = np.meshgrid(side, side, indexing="ij")
    re = re.ravel()
    im = im.ravel()
    nn = re * re + im * im
    keep = nn <= nmax
    if not include_origin:
        keep &= nn > 0
    return re[keep], im[keep], nn[keep]


@dataclass
class Sector:
    """Arc omega = [lo, hi) rotated by t; membership is half-open mod 2*pi.

    The half-open convention makes rotations of a partition of [0, 2*pi)
    partition the ball exactly.
    """

    lo: float
    hi: float
    t: float = 0.0

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, re: np.ndarray, im: np.ndarray) -> np.ndarray:
        """Vectorized membership; the origin is assigned argument 0."""
        theta = np.arctan2(im, re) % TWO_PI
        rel = (theta - self.lo - self.t) % TWO_PI
        # float mod can land exactly on 2*pi; fold it back
        rel = np.where(rel >= TWO_PI, rel - TWO_PI, rel)
        return rel < self.width

    def contains_point(self, z: GaussInt) -> bool:
        return bool(self.contains(np.array([z.re]), np.array([z.im]))[0])


def full_sector(t: float = 0.0) -> Sector:
    return Sector(0.0, TWO_PI, t)


@dataclass
class DivisorTable:
    """Dense d(n) over the box [-R, R]^2 with R = isqrt(nmax), plus D(k) prefix.

    d counts all nonzero divisors, units and associates included; entries
    outside the norm ball (and at 0) are stored as 0.
    """

    nmax: int
    values: np.ndarray  # (2R+1, 2R+1) uint32, index [re + R, im + R]
    prefix_d: np.ndarray  # int64, prefix_d[k] = D(k) for 0 <= k <= nmax

    @property
    def radius(self) -> int:
        return (self.values.shape[0] - 1) // 2

    def d(self, z: GaussInt) -> int:
        r = self.radius
        if abs(z.re) > r or abs(z.im) > r:
            return 0
        return int(self.values[z.re + r, z.im + r])

    def d_at(self, re: np.ndarray, im: np.ndarray) -> np.ndarray:
        r = self.radius
        return self.values[re + r, im + r]

    def D(self, n: int) -> int:
        if n > self.nmax:
            raise ValueError(f"D({n}) beyond table nmax={self.nmax}")
        return int(self.prefix_d[n])

    def save_binary(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<Q", self.nmax))
            fh.write(self.values.astype("<u4").tobytes(order="C"))

    def save_csv(self, path) -> None:
        r = self.radius
        ia, ib = np.nonzero(self.values)
        d = self.values[ia, ib]
        with open(path, "w", newline="\n") as fh:
            fh.write("re,im,d\n")
            np.savetxt(fh, np.column_stack([ia - r, ib - r, d]), fmt="%d", delimiter=",")


def load_binary(path) -> DivisorTable:
    with open(path, "rb") as fh:
        magic = fh.read(5)
        if magic != MAGIC:
            raise ValueError(f"bad magic {magic!r}")
        (nmax,) = struct.unpack("<Q", fh.read(8))
        r = math.isqrt(nmax)
        side = 2 * r + 1
        vals = np.frombuffer(fh.read(side * side * 4), dtype="<u4").reshape(side, side)
    return DivisorTable(int(nmax), vals.astype(np.uint32), _prefix_from_values(int(nmax), vals))


def _prefix_from_values(nmax: int, values: np.ndarray) -> np.ndarray:
    r = (values.shape[0] - 1) // 2
    side = np.arange(-r, r + 1, dtype=np.int64)
    nn = (side[:, None] ** 2 + side[None, :] ** 2).ravel()
    keep = nn <= nmax
    hist = np.bincount(nn[keep], weights=values.ravel().astype(np.float64)[keep], minlength=nmax + 1)
    return np.cumsum(hist).astype(np.int64)


def divisor_sieve(nmax: int) -> DivisorTable:
    """Exact divisor table by sieving multiples of every divisor.

    Divisors are processed in blocks of constant floor(nmax / N(d)) so each
    block shares one multiple ball; the work is O(D(nmax)) bincount adds.
    """
    if nmax < 1:
        raise ValueError("nmax must be >= 1")
    r = math.isqrt(nmax)
    side = 2 * r + 1
    flat = np.zeros(side * side, dtype=np.int64)

    dre, dim, dnn = ball_points(nmax)
    order = np.argsort(dnn, kind="stable")
    dre, dim, dnn = dre[order], dim[order], dnn[order]

    u = 1
    while u <= nmax:
        v = nmax // u
        u_hi = nmax // v
        lo = np.searchsorted(dnn, u, side="left")
        hi = np.searchsorted(dnn, u_hi, side="right")
        if hi > lo:
            kre, kim, _ = ball_points(v)
            div_chunk = max(1, _CHUNK // max(len(kre), 1))
            for j in range(lo, hi, div_chunk):
                end = min(j + div_chunk, hi)
                a = dre[j:end, None]
                b = dim[j:end, None]
                pre = a * kre[None, :] - b * kim[None, :]
                pim = a * kim[None, :] + b * kre[None, :]
                idx = (pre.ravel() + r) * side + (pim.ravel() + r)
                if idx.size * 4 > side * side:
                    flat += np.bincount(idx, minlength=side * side)
                else:
                    np.add.at(flat, idx, 1)
        u = u_hi + 1

    values = flat.reshape(side, side)
    if values.max() >= 2**32:
        raise OverflowError("divisor counts exceed u32")
    values32 = values.astype(np.uint32)
    return DivisorTable(nmax, values32, _prefix_from_values(nmax, values32))


def divisor_count_single(n: GaussInt) -> int:
    """Trial-division divisor count; independent of the sieve."""
    if not n:
        raise ValueError("d(0) is undefined")
    nn = norm(n)
    cre, cim, cnn = ball_points(nn)
    u = n.re * cre + n.im * cim
    v = -n.re * cim + n.im * cre
    return int(np.count_nonzero((u % cnn == 0) & (v % cnn == 0)))


def sector_divisor_sum(table: DivisorTable, n: int, sector: Sector) -> int:
    """Sum of d over the rotated sector of the norm-n ball; exact integer."""
    if n > table.nmax:
        raise ValueError(f"n={n} beyond table nmax={table.nmax}")
    re, im, _ = ball_points(n)
    mask = sector.contains(re, im)
    return int(np.sum(table.d_at(re[mask], im[mask]).astype(np.int64)))


# ---------------------------------------------------------------------------
# r2 statistics and the Sierpinski constant
# ---------------------------------------------------------------------------

@lru_cache(maxsize=8)
def r2_counts(nmax: int) -> np.ndarray:
    """r2[k] = #{n in Z[i] : N(n) = k} for 0 <= k <= nmax (r2[0] = 1)."""
    counts = np.zeros(nmax + 1, dtype=np.int64)
    r = math.isqrt(nmax)
    block: list[np.ndarray] = []
    block_size = 0
    for a in range(0, r + 1):
        bmax = math.isqrt(nmax - a * a)
        b = np.arange(0, bmax + 1, dtype=np.int64)
        block.append(a * a + b * b)
        block_size += len(b)
        if block_size >= _CHUNK or a == r:
            counts += np.bincount(np.concatenate(block), minlength=nmax + 1)
            block, block_size = [], 0
    # closed-quadrant counts -> full plane: interior points have 4 images,
    # the two axis entries per square norm have 4 images together
    full = 4 * counts
    squares = np.arange(0, r + 1, dtype=np.int64) ** 2
    full[squares] -= 4
    full[0] = 1
    return full


def r2(k: int) -> int:
    if k < 0:
        raise ValueError("negative norm")
    if k == 0:
        return 1
    total = 0
    for a in range(-math.isqrt(k), math.isqrt(k) + 1):
        b2 = k - a * a
        b = math.isqrt(b2)
        if b * b == b2:
            total += 1 if b == 0 else 2
    return total


def _round_up(n: int) -> int:
    """Cache-friendly bound: next power of two at least n."""
    if n <= 1:
        return 1
    return n if n & (n - 1) == 0 else 1 << n.bit_length()


def r2_prefix(n: int) -> int:
    """Number of lattice points with norm <= n (origin included)."""
    if n < 0:
        raise ValueError("negative norm bound")
    return int(np.sum(r2_counts(_round_up(n))[: n + 1]))


def r2_harmonic(n: int) -> float:
    """Sum over 1 <= k <= n of r2(k)/k."""
    counts = r2_counts(_round_up(n))[: n + 1]
    k = np.arange(1, n + 1, dtype=np.float64)
    return float(np.sum(counts[1:] / k))


def sierpinski_kappa(n: int) -> float:
    """Estimate of the constant kappa in sum r2(k)/k = pi (log N + kappa) + O(N^-1/2)."""
    if n < 1000:
        raise ValueError("need n >= 1000 for a stable estimate")
    return r2_harmonic(n) / math.pi - math.log(n)


@lru_cache(maxsize=1)
def kappa_default(n: int = 1_000_000) -> float:
    """The kappa estimate used by default in main-term formulas."""
    return sierpinski_kappa(n)


def lattice_count_sector(n: int, sector: Sector) -> int:
    """|Z[i] ∩ Gamma_n(omega + t)|, the origin counted with argument 0."""
    re, im, _ = ball_points(n, include_origin=True)
    return int(np.count_nonzero(sector.contains(re, im)))


# ---------------------------------------------------------------------------
# Summatory divisor function without a table
# ---------------------------------------------------------------------------

def lattice_ball_count(x: int) -> int:
    """Lambda(x) = #{m != 0 : N(m) <= x}."""
    if x < 1:
        return 0
    return r2_prefix(x) - 1


@lru_cache(maxsize=256)
def summatory_D(n: int) -> int:
    """D(n) by the hyperbola identity, exactly, in O(sqrt(n)) r2 lookups.

    D(n) = 2 * sum over 1 <= N(m) <= sqrt(n) of Lambda(n / N(m)) - Lambda(sqrt(n))^2.
    """
    if n < 1:
        return 0
    s = math.isqrt(n)
    counts = r2_counts(_round_up(n))
    prefix = np.cumsum(counts) - 1  # Lambda(k) = prefix[k]
    u = np.arange(1, s + 1)
    lam = prefix[n // u]
    total = 2 * int(np.sum(counts[1 : s + 1] * lam)) - int(prefix[s]) ** 2
    return total


def summatory_main_term(n: int, kappa: float) -> float:
    """pi^2 n (log n + 2 kappa - 1), the smooth main term of D(n)."""
    return math.pi**2 * n * (math.log(n) + 2.0 * kappa - 1.0)
