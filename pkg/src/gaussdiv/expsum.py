"""Exponential sums over balls and sectors of Z[i].

Plain and log-weighted lattice sums, divisor-weighted sums evaluated either
directly from a sieve table or by the Dirichlet hyperbola decomposition at
rational frequencies, the rational main term, and rotation-averaged error
statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arith import DivisorTable, Sector, ball_points, kappa_default
from .gaussint import GaussInt, ReducedRational, TorusPoint, is_reduced, norm

TWO_PI = 2.0 * math.pi

_ALPHA_CHUNK = 8


@dataclass
class ExpSumResult:
    value: complex
    n_terms: int
    method: str


def _as_xy(alpha) -> tuple[float, float]:
    if isinstance(alpha, ReducedRational):
        t = alpha.torus()
        return t.x, t.y
    if isinstance(alpha, TorusPoint):
        return alpha.x, alpha.y
    x, y = alpha
    return float(x), float(y)


def phase_sums(re: np.ndarray, im: np.ndarray, weights, alphas: np.ndarray) -> np.ndarray:
    """sum_n w(n) e(<n, alpha>) for each row of alphas, chunked over alphas."""
    alphas = np.atleast_2d(np.asarray(alphas, dtype=np.float64))
    out = np.empty(len(alphas), dtype=np.complex128)
    w = None if weights is None else np.asarray(weights, dtype=np.float64)
    ref = re.astype(np.float64)
    imf = im.astype(np.float64)
    for j in range(0, len(alphas), _ALPHA_CHUNK):
        ax = alphas[j : j + _ALPHA_CHUNK, 0]
        ay = alphas[j : j + _ALPHA_CHUNK, 1]
        ph = ref[:, None] * ax[None, :] + imf[:, None] * ay[None, :]
        e = np.exp(2j * np.pi * ph)
        out[j : j + _ALPHA_CHUNK] = np.sum(e, axis=0) if w is None else w @ e
    return out


def lattice_expsum(n: int, sector: Sector, alpha) -> complex:
    """sum over the sector of the norm-n ball of e(<z, alpha>) (origin has arg 0)."""
    re, im, _ = ball_points(n, include_origin=True)
    mask = sector.contains(re, im)
    x, y = _as_xy(alpha)
    return complex(phase_sums(re[mask], im[mask], None, np.array([[x, y]]))[0])


def log_weighted_expsum(n: int, alpha) -> complex:
    """sum over 0 < N(z) <= n of log N(z) e(<z, alpha>)."""
    re, im, nn = ball_points(n)
    x, y = _as_xy(alpha)
    return complex(phase_sums(re, im, np.log(nn.astype(np.float64)), np.array([[x, y]]))[0])


def _roots_of_unity(nq: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(nq) / nq)


def _phase_classes(re: np.ndarray, im: np.ndarray, rr: ReducedRational) -> np.ndarray:
    p, q, nq = rr.phase_ints()
    return (re * p + im * q) % nq


def weighted_expsum_direct(table: DivisorTable, n: int, sector: Sector, alpha) -> ExpSumResult:
    """Divisor-weighted sum over the sector, from the sieve table.

    Rational frequencies take an exact integer path: phases are residues mod
    N(q) and the value is an integer combination of N(q) roots of unity; in
    particular the value at 0 is exactly D(n).
    """
    if n > table.nmax:
        raise ValueError(f"n={n} beyond table nmax={table.nmax}")
    re, im, _ = ball_points(n)
    mask = sector.contains(re, im)
    re, im = re[mask], im[mask]
    d = table.d_at(re, im).astype(np.float64)
    if isinstance(alpha, ReducedRational):
        nq = alpha.nq()
        cls = _phase_classes(re, im, alpha)
        counts = np.bincount(cls, weights=d, minlength=nq)
        if nq == 1:
            value = complex(counts[0])
        else:
            value = complex(counts @ _roots_of_unity(nq))
        return ExpSumResult(value, len(re), "direct")
    x, y = _as_xy(alpha)
    value = complex(phase_sums(re, im, d, np.array([[x, y]]))[0])
    return ExpSumResult(value, len(re), "direct")


def weighted_expsum_grid(table: DivisorTable, n: int, alphas: np.ndarray) -> np.ndarray:
    """S_hat(alpha) over the full ball for an array of frequencies."""
    if n > table.nmax:
        raise ValueError(f"n={n} beyond table nmax={table.nmax}")
    re, im, _ = ball_points(n)
    d = table.d_at(re, im).astype(np.float64)
    return phase_sums(re, im, d, alphas)


def weighted_expsum_hyperbola(n: int, sector: Sector, rr: ReducedRational) -> ExpSumResult:
    """S_hat at a reduced rational via the hyperbola split, no table needed.

    Writes the divisor sum as ordered pairs (m, k) with N(mk) <= n and splits
    at sqrt(n): the total is sum over N(m) <= sqrt(n) of (2 D1 - D2).  Phase
    classes stay exact integers mod N(q).
    """
    if not is_reduced(rr):
        raise ValueError(f"{rr} is not a reduced rational")
    s = math.isqrt(n)
    nq = rr.nq()
    p, q, _ = rr.phase_ints()

    ore, oim, onn = ball_points(s)
    order = np.argsort(onn, kind="stable")
    ore, oim, onn = ore[order], oim[order], onn[order]
    sre, sim, _ = ball_points(s)

    counts = np.zeros(nq, dtype=np.int64)
    n_terms = 0
    i = 0
    while i < len(onn):
        u = int(onn[i])
        j = int(np.searchsorted(onn, u, side="right"))
        v = n // u
        kre, kim, _ = ball_points(v)
        for inner_re, inner_im, sign in ((kre, kim, 2), (sre, sim, -1)):
            step = max(1, _ALPHA_CHUNK * 500_000 // max(len(inner_re), 1))
            for i0 in range(i, j, step):
                a = ore[i0 : min(i0 + step, j), None]
                b = oim[i0 : min(i0 + step, j), None]
                pre = (a * inner_re[None, :] - b * inner_im[None, :]).ravel()
                pim = (a * inner_im[None, :] + b * inner_re[None, :]).ravel()
                mask = sector.contains(pre, pim)
                cls = ((pre * p + pim * q) % nq)[mask]
                counts += sign * np.bincount(cls, minlength=nq)
                n_terms += int(np.count_nonzero(mask))
        i = j

    value = complex(counts[0]) if nq == 1 else complex(counts @ _roots_of_unity(nq))
    return ExpSumResult(value, n_terms, "hyperbola")


def rational_main_term(n: int, q: GaussInt, sector: Sector, kappa: float) -> float:
    """|omega| pi n / (2 N(q)) * (log n - 2 log N(q) + 2 kappa - 1)."""
    nq = norm(q)
    if nq < 1:
        raise ValueError("q must be nonzero")
    return sector.width * math.pi * n / (2.0 * nq) * (
        math.log(n) - 2.0 * math.log(nq) + 2.0 * kappa - 1.0
    )


class RotationScanner:
    """Prefix sums over argument-sorted weights: O(log) sector sums per offset."""

    def __init__(self, re: np.ndarray, im: np.ndarray, w: np.ndarray):
        theta = np.arctan2(im, re) % TWO_PI
        theta = np.where(theta >= TWO_PI, theta - TWO_PI, theta)
        order = np.argsort(theta, kind="stable")
        self.theta = theta[order]
        self.prefix = np.concatenate([[0.0 + 0.0j], np.cumsum(w[order])])
        self.total = complex(self.prefix[-1])

    def sector_sum(self, start: float, width: float) -> complex:
        if width >= TWO_PI:
            return self.total
        start %= TWO_PI
        end = start + width
        i0 = int(np.searchsorted(self.theta, start, side="left"))
        if end < TWO_PI:
            i1 = int(np.searchsorted(self.theta, end, side="left"))
            return complex(self.prefix[i1] - self.prefix[i0])
        i1 = int(np.searchsorted(self.theta, end - TWO_PI, side="left"))
        return complex(self.total - self.prefix[i0] + self.prefix[i1])


def error_EN_avg(
    table: DivisorTable,
    n: int,
    rr: ReducedRational,
    sector: Sector,
    t_samples: int = 64,
    kappa: float | None = None,
) -> float:
    """Mean over equispaced rotations t of |S_hat(a/q) - main term|."""
    if n > table.nmax:
        raise ValueError(f"n={n} beyond table nmax={table.nmax}")
    if t_samples < 8:
        raise ValueError("need at least 8 rotation samples")
    if kappa is None:
        kappa = kappa_default()
    re, im, _ = ball_points(n)
    d = table.d_at(re, im).astype(np.float64)
    ph = _phase_classes(re, im, rr)
    w = d * _roots_of_unity(rr.nq())[ph]
    scan = RotationScanner(re, im, w)
    main = rational_main_term(n, rr.q, sector, kappa)
    errs = [
        abs(scan.sector_sum(sector.lo + sector.t + TWO_PI * j / t_samples, sector.width) - main)
        for j in range(t_samples)
    ]
    return float(np.mean(errs))


def rotation_avg_abs_expsum(n: int, sector: Sector, alpha, t_samples: int = 64) -> float:
    """Mean over rotations t of |sum over Gamma_n(omega+t) of e(<z, alpha>)|."""
    re, im, _ = ball_points(n, include_origin=True)
    x, y = _as_xy(alpha)
    w = np.exp(2j * np.pi * (re * x + im * y))
    scan = RotationScanner(re, im, w)
    vals = [
        abs(scan.sector_sum(sector.lo + sector.t + TWO_PI * j / t_samples, sector.width))
        for j in range(t_samples)
    ]
    return float(np.mean(vals))
