"""Circle-method multipliers on the torus T^2 = C / Z[i].

The smooth cutoff eta, dyadic shells R_s of reduced rationals, the averaging
multiplier M_hat, the log-weighted approximant L_hat, the shell-localized
K_hat / Kprime_hat, the low/high split of the divisor multiplier, major/minor
arc classification, the Ramanujan-sum moment, and the V/U multipliers with
the f-tilde transform.

All approximants are normalized to the scale of the divisor average
S_hat/D(N), so they are ~1 at low frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .arith import ball_points, summatory_D
from .expsum import phase_sums, weighted_expsum_grid
from .gaussint import (
    GaussInt,
    ReducedRational,
    TorusPoint,
    canonical_elements,
    enumerate_Aq,
    norm,
    ramanujan_tau,
    reduced_rational,
    torus_norm,
)

ETA_INNER = 1.0 / 16.0  # eta == 1 inside this squared radius
ETA_OUTER = 1.0 / 8.0  # eta == 0 outside this squared radius

MAX_SHELL = 20


# ---------------------------------------------------------------------------
# Smooth cutoff
# ---------------------------------------------------------------------------

def _psi(t: np.ndarray) -> np.ndarray:
    """Smooth step: 1 for t <= 0, 0 for t >= 1, exp-based partition between."""
    t = np.asarray(t, dtype=np.float64)
    out = np.zeros_like(t)
    out[t <= 0.0] = 1.0
    mid = (t > 0.0) & (t < 1.0)
    tm = t[mid]
    g = np.exp(-1.0 / (1.0 - tm))
    h = np.exp(-1.0 / tm)
    out[mid] = g / (g + h)
    return out


def eta_of_nsq(nsq) -> np.ndarray:
    """eta as a function of the squared norm of its argument."""
    t = (np.asarray(nsq, dtype=np.float64) - ETA_INNER) / (ETA_OUTER - ETA_INNER)
    return _psi(t)


def eta(x) -> float:
    """Radial bump: 1 on {N(x) <= 1/16}, 0 on {N(x) > 1/8}, smooth between."""
    if isinstance(x, complex):
        nsq = x.real * x.real + x.imag * x.imag
    else:
        a, b = x
        nsq = a * a + b * b
    return float(eta_of_nsq(nsq))


def eta_s(s: int, x) -> float:
    """eta_s(x) = eta(2^s x)."""
    if isinstance(x, complex):
        nsq = x.real * x.real + x.imag * x.imag
    else:
        a, b = x
        nsq = a * a + b * b
    return float(eta_of_nsq((4.0**s) * nsq))


# ---------------------------------------------------------------------------
# Shells of reduced rationals
# ---------------------------------------------------------------------------

@dataclass
class Shell:
    s: int
    rationals: tuple[ReducedRational, ...]
    tx: np.ndarray  # torus x coordinates
    ty: np.ndarray
    nq: np.ndarray  # denominator norms, int64


@lru_cache(maxsize=MAX_SHELL + 1)
def shell(s: int) -> Shell:
    if s < 0 or s > MAX_SHELL:
        raise ValueError(f"shell index {s} outside [0, {MAX_SHELL}]")
    rats: list[ReducedRational] = []
    if s == 0:
        rats.append(ReducedRational(GaussInt(0, 0), GaussInt(1, 0), 0))
    lo, hi = 1 << s, 1 << (s + 1)
    for q in canonical_elements(hi - 1, max(lo, 2)):
        for a in enumerate_Aq(q):
            rats.append(ReducedRational(a, q, s))
    pts = [r.torus() for r in rats]
    return Shell(
        s,
        tuple(rats),
        np.array([p.x for p in pts]),
        np.array([p.y for p in pts]),
        np.array([r.nq() for r in rats], dtype=np.int64),
    )


def enumerate_Rs(s: int) -> tuple[ReducedRational, ...]:
    """All reduced rationals a/q with 2^s <= N(q) < 2^(s+1), one per torus point."""
    return shell(s).rationals


def _nearest_in_shell(s: int, alphas: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Index of the nearest shell rational and the squared torus distance."""
    sh = shell(s)
    ax = alphas[:, 0][:, None]
    ay = alphas[:, 1][:, None]
    dx = (ax - sh.tx[None, :] + 0.5) % 1.0 - 0.5
    dy = (ay - sh.ty[None, :] + 0.5) % 1.0 - 0.5
    d2 = dx * dx + dy * dy
    idx = np.argmin(d2, axis=1)
    return idx, d2[np.arange(len(alphas)), idx]


# ---------------------------------------------------------------------------
# Base multipliers
# ---------------------------------------------------------------------------

def _as_alphas(alpha) -> np.ndarray:
    if isinstance(alpha, ReducedRational):
        t = alpha.torus()
        return np.array([[t.x, t.y]])
    if isinstance(alpha, TorusPoint):
        return np.array([[alpha.x, alpha.y]])
    a = np.asarray(alpha, dtype=np.float64)
    return a.reshape(1, 2) if a.ndim == 1 else a


def plain_ball_expsum_grid(n: int, alphas: np.ndarray) -> np.ndarray:
    """W1(alpha) = sum over 0 < N(z) <= n of e(<z, alpha>), separably.

    Row a contributes e(a x) times a Dirichlet kernel in y, so the cost is
    O(sqrt(n)) per frequency instead of O(n).
    """
    alphas = np.atleast_2d(alphas)
    r = math.isqrt(n)
    a = np.arange(-r, r + 1, dtype=np.float64)
    bmax = np.sqrt(np.maximum(n - a * a, 0.0)).astype(np.int64).astype(np.float64)
    x = alphas[:, 0][None, :]
    y = alphas[:, 1][None, :]
    siny = np.sin(np.pi * y)
    width = (2.0 * bmax + 1.0)[:, None]
    num = np.sin(np.pi * width * y)
    with np.errstate(divide="ignore", invalid="ignore"):
        dirich = np.where(np.abs(siny) < 1e-12, width, num / siny)
    phases = np.exp(2j * np.pi * a[:, None] * x)
    return np.sum(phases * dirich, axis=0) - 1.0


def M_hat_grid(n: int, alphas: np.ndarray) -> np.ndarray:
    """M_hat(alpha) = (1/(pi n)) * W1(alpha); ~1 at 0 (origin excluded)."""
    return plain_ball_expsum_grid(n, alphas) / (math.pi * n)


def M_hat(n: int, alpha) -> complex:
    return complex(M_hat_grid(n, _as_alphas(alpha))[0])


def log_ball_expsum_grid(n: int, alphas: np.ndarray) -> np.ndarray:
    """Wlog(alpha) = sum over 0 < N(z) <= n of log N(z) e(<z, alpha>)."""
    re, im, nn = ball_points(n)
    return phase_sums(re, im, np.log(nn.astype(np.float64)), alphas)


def L_hat_grid(n: int, q: GaussInt, alphas: np.ndarray, kappa: float) -> np.ndarray:
    """Normalized log-weighted approximant at denominator q.

    (pi / (N(q) D(n))) * sum (log N(z) - 2 log N(q) + 2 kappa) e(<z, alpha>);
    equals 1 + O(N^-1/2 log N) at alpha = 0 for q = 1.
    """
    nq = norm(q)
    if nq < 1 or n < 2:
        raise ValueError("need q != 0 and n >= 2")
    wlog = log_ball_expsum_grid(n, alphas)
    w1 = plain_ball_expsum_grid(n, alphas)
    c = 2.0 * kappa - 2.0 * math.log(nq)
    return (math.pi / (nq * summatory_D(n))) * (wlog + c * w1)


def L_hat(n: int, q: GaussInt, alpha, kappa: float) -> complex:
    return complex(L_hat_grid(n, q, _as_alphas(alpha), kappa)[0])


# ---------------------------------------------------------------------------
# Shell-localized approximants and the low/high split
# ---------------------------------------------------------------------------

def K_hat_grid(n: int, s: int, alphas: np.ndarray, kappa: float) -> np.ndarray:
    """K_hat_{n,s}: L_hat bump-localized at the nearest shell-s rational.

    Shell supports are numerically disjoint, so only the nearest rational
    can contribute.
    """
    alphas = np.atleast_2d(alphas)
    out = np.zeros(len(alphas), dtype=np.complex128)
    sh = shell(s)
    if not sh.rationals:
        return out
    idx, d2 = _nearest_in_shell(s, alphas)
    bump = eta_of_nsq((4.0**s) * d2)
    live = bump > 0.0
    if not np.any(live):
        return out
    # evaluate L_hat at the torus offsets, grouped by denominator norm
    # (L_hat depends on q only through N(q))
    offs = np.empty((int(np.count_nonzero(live)), 2))
    offs[:, 0] = (alphas[live, 0] - sh.tx[idx[live]] + 0.5) % 1.0 - 0.5
    offs[:, 1] = (alphas[live, 1] - sh.ty[idx[live]] + 0.5) % 1.0 - 0.5
    nq_live = sh.nq[idx[live]]
    vals = np.zeros(len(offs), dtype=np.complex128)
    for nq in np.unique(nq_live):
        sel = nq_live == nq
        q = next(r.q for r in sh.rationals if r.nq() == nq)
        vals[sel] = L_hat_grid(n, q, offs[sel], kappa)
    out[live] = vals * bump[live]
    return out


def Kprime_hat_grid(n: int, s: int, alphas: np.ndarray) -> np.ndarray:
    """Kprime_hat_{n,s}: (1/N(q)) M_hat bump-localized at shell-s rationals."""
    alphas = np.atleast_2d(alphas)
    out = np.zeros(len(alphas), dtype=np.complex128)
    sh = shell(s)
    if not sh.rationals:
        return out
    idx, d2 = _nearest_in_shell(s, alphas)
    bump = eta_of_nsq((4.0**s) * d2)
    live = bump > 0.0
    if not np.any(live):
        return out
    offs = np.empty((int(np.count_nonzero(live)), 2))
    offs[:, 0] = (alphas[live, 0] - sh.tx[idx[live]] + 0.5) % 1.0 - 0.5
    offs[:, 1] = (alphas[live, 1] - sh.ty[idx[live]] + 0.5) % 1.0 - 0.5
    out[live] = M_hat_grid(n, offs) * bump[live] / sh.nq[idx[live]]
    return out


def K_hat(n: int, s: int, alpha, kappa: float) -> complex:
    return complex(K_hat_grid(n, s, _as_alphas(alpha), kappa)[0])


def Kprime_hat(n: int, s: int, alpha) -> complex:
    return complex(Kprime_hat_grid(n, s, _as_alphas(alpha))[0])


def shell_cap(n: int, delta: float) -> int:
    """Largest s with 2^s <= n^delta."""
    cap = n**delta
    s = 0
    while 2.0 ** (s + 1) <= cap:
        s += 1
    return s


def lo_hat_grid(n: int, delta: float, alphas: np.ndarray, kappa: float) -> np.ndarray:
    if not 0.0 < delta <= 0.05:
        raise ValueError("delta must lie in (0, 1/20]")
    out = np.zeros(len(np.atleast_2d(alphas)), dtype=np.complex128)
    for s in range(shell_cap(n, delta) + 1):
        out += K_hat_grid(n, s, alphas, kappa)
    return out


def lo_hat(n: int, delta: float, alpha, kappa: float) -> complex:
    return complex(lo_hat_grid(n, delta, _as_alphas(alpha), kappa)[0])


def hi_hat_grid(table, n: int, delta: float, alphas: np.ndarray, kappa: float) -> np.ndarray:
    s_hat = weighted_expsum_grid(table, n, alphas)
    return s_hat / summatory_D(n) - lo_hat_grid(n, delta, alphas, kappa)


def hi_hat(n: int, delta: float, alpha, table, kappa: float) -> complex:
    return complex(hi_hat_grid(table, n, delta, _as_alphas(alpha), kappa)[0])


# ---------------------------------------------------------------------------
# Major/minor arcs
# ---------------------------------------------------------------------------

@dataclass
class ArcClass:
    kind: str  # "major" | "minor"
    delta: float
    witness: ReducedRational | None = None


def classify_arc(alpha, n: int, delta: float) -> ArcClass:
    """Exhaustive major-arc test over denominators with N(q) <= n^delta."""
    if not 0.0 < delta <= 0.05:
        raise ValueError("delta must lie in (0, 1/20]")
    pt = alpha if isinstance(alpha, TorusPoint) else TorusPoint(alpha[0] % 1.0, alpha[1] % 1.0)
    qcap = int(n**delta)
    for q in canonical_elements(max(qcap, 1)):
        zr = pt.x * q.re - pt.y * q.im
        zi = pt.x * q.im + pt.y * q.re
        rr = reduced_rational(GaussInt(round(zr), round(zi)), q)
        if torus_norm(pt, rr.torus()) <= n ** (-1.0 + delta / 2.0) / rr.nq():
            return ArcClass("major", delta, rr)
    return ArcClass("minor", delta)


# ---------------------------------------------------------------------------
# Spatial side of the low part
# ---------------------------------------------------------------------------

def _pow2_at_least(x: float) -> int:
    g = 1
    while g < x:
        g <<= 1
    return g


def eta_s_grid(s: int, g: int, center: TorusPoint | None = None) -> np.ndarray:
    """eta_s(alpha - center) sampled on the g x g torus grid."""
    coords = np.arange(g, dtype=np.float64) / g
    cx, cy = (0.0, 0.0) if center is None else (center.x, center.y)
    dx = (coords - cx + 0.5) % 1.0 - 0.5
    dy = (coords - cy + 0.5) % 1.0 - 0.5
    nsq = dx[:, None] ** 2 + dy[None, :] ** 2
    return eta_of_nsq((4.0**s) * nsq)


def _spatial_L(n: int, q: GaussInt, kappa: float):
    re, im, nn = ball_points(n)
    nq = norm(q)
    vals = (math.pi / (nq * summatory_D(n))) * (
        np.log(nn.astype(np.float64)) - 2.0 * math.log(nq) + 2.0 * kappa
    )
    return re, im, vals


def _shell_denominators(s: int) -> list[GaussInt]:
    lo, hi = 1 << s, 1 << (s + 1)
    if s == 0:
        return [GaussInt(1, 0)]
    return [q for q in canonical_elements(hi - 1, lo)]


def lo_kernel_spatial(
    n: int, delta: float, at: GaussInt, kappa: float, grid_size: int | None = None
) -> float:
    """Low-part kernel at lattice point `at` via the Ramanujan factorization.

    Sums over canonical denominators (L_{n,q} * inv(eta_s))(at) * tau_q(at),
    with inv(eta_s) realized by an inverse DFT on a grid fine enough to keep
    aliasing below 1e-4.  Validation path for small n.
    """
    total = 0.0
    for s in range(shell_cap(n, delta) + 1):
        g = grid_size or _pow2_at_least(2 * math.ceil(8 * (2**s) * math.sqrt(n)))
        eta_check = np.fft.ifft2(eta_s_grid(s, g))
        for q in _shell_denominators(s):
            re, im, lvals = _spatial_L(n, q, kappa)
            idx1 = (at.re - re) % g
            idx2 = (at.im - im) % g
            conv = np.sum(lvals * eta_check[idx1, idx2])
            total += (conv * ramanujan_tau(q, at)).real
    return total


def lo_kernel_grid_fourier(n: int, delta: float, kappa: float, grid_size: int) -> np.ndarray:
    """Low-part kernel on a torus grid via the multiplier definition.

    Each shell rational contributes FFT(L modulated by e(<m, a/q>)) times the
    sampled bump; an inverse FFT returns the spatial kernel.
    """
    g = grid_size
    lo_grid = np.zeros((g, g), dtype=np.complex128)
    for s in range(shell_cap(n, delta) + 1):
        for rr in enumerate_Rs(s):
            re, im, lvals = _spatial_L(n, rr.q, kappa)
            p, qq, nq = rr.phase_ints()
            mod = np.exp(2j * np.pi * ((re * p + im * qq) % nq) / nq)
            spatial = np.zeros((g, g), dtype=np.complex128)
            np.add.at(spatial, (re % g, im % g), lvals * mod)
            lo_grid += np.fft.fft2(spatial) * eta_s_grid(s, g, rr.torus())
    return np.fft.ifft2(lo_grid)


# ---------------------------------------------------------------------------
# Ramanujan moment
# ---------------------------------------------------------------------------

def _tau_table(q: GaussInt) -> np.ndarray:
    """tau_q on residue pairs (re mod N(q), im mod N(q))."""
    nq = norm(q)
    iq = q.times_i()
    pa = np.array([(a.re * q.re + a.im * q.im) % nq for a in enumerate_Aq(q)], dtype=np.int64)
    qa = np.array([(a.re * iq.re + a.im * iq.im) % nq for a in enumerate_Aq(q)], dtype=np.int64)
    r1 = np.arange(nq, dtype=np.int64)
    phases = (r1[:, None, None] * pa[None, None, :] + r1[None, :, None] * qa[None, :]) % nq
    return np.sum(np.exp(2j * np.pi * phases / nq), axis=2).real


def ramanujan_moment(n_lat: int, q_cap: int, k: int) -> float:
    """k-th moment over the norm-n ball of sum over N(q) <= q_cap of |tau_q|/N(q).

    Requires n_lat > q_cap^k (the moment bound's regime).
    """
    if n_lat <= q_cap**k:
        raise ValueError(f"need n_lat > q_cap^k = {q_cap**k}")
    re, im, _ = ball_points(n_lat, include_origin=True)
    inner_sum = np.zeros(len(re), dtype=np.float64)
    for q in canonical_elements(q_cap):
        nq = norm(q)
        table = np.abs(_tau_table(q))
        inner_sum += table[re % nq, im % nq] / nq
    return float(np.mean(inner_sum**k) ** (1.0 / k))


# ---------------------------------------------------------------------------
# V / U multipliers and the f-tilde transform
# ---------------------------------------------------------------------------

def _vu_active(n: int, s: int) -> bool:
    return 2.0 ** (s + 1) <= n ** (1.0 / 20.0)


def V_hat_grid(n: int, s: int, alphas: np.ndarray) -> np.ndarray:
    """V multiplier: (1/N(q)) eta(sqrt(n)(alpha - a/q)) over shell s; 0 when
    the shell exceeds n^(1/20)."""
    alphas = np.atleast_2d(alphas)
    if not _vu_active(n, s):
        return np.zeros(len(alphas))
    idx, d2 = _nearest_in_shell(s, alphas)
    return eta_of_nsq(n * d2) / shell(s).nq[idx]


def U_hat_grid(n: int, s: int, alphas: np.ndarray) -> np.ndarray:
    alphas = np.atleast_2d(alphas)
    if not _vu_active(n, s):
        return np.zeros(len(alphas))
    _, d2 = _nearest_in_shell(s, alphas)
    return eta_of_nsq(n * d2)


def V_hat(n: int, s: int, alpha) -> float:
    return float(V_hat_grid(n, s, _as_alphas(alpha))[0])


def U_hat(n: int, s: int, alpha) -> float:
    return float(U_hat_grid(n, s, _as_alphas(alpha))[0])


def V_hat_total_grid(n: int, alphas: np.ndarray) -> np.ndarray:
    """V_n = sum over s of V_{n,s} (finitely many shells are active)."""
    alphas = np.atleast_2d(alphas)
    out = np.zeros(len(alphas))
    s = 0
    while _vu_active(n, s):
        out += V_hat_grid(n, s, alphas)
        s += 1
    return out


def f_tilde_hat(s: int, alpha, fhat_value: complex) -> complex:
    """Multiply fhat by the shell-s bump sum (1/N(q)) eta_s(alpha - a/q)."""
    alphas = _as_alphas(alpha)
    idx, d2 = _nearest_in_shell(s, alphas)
    m = eta_of_nsq((4.0**s) * d2[0]) / shell(s).nq[idx[0]]
    return complex(m * fhat_value)


# ---------------------------------------------------------------------------
# Scan containers and grids
# ---------------------------------------------------------------------------

@dataclass
class MultiplierScan:
    kind: str
    n: int
    param: float  # delta or shell index, by kind
    alphas: np.ndarray
    values: np.ndarray


def stratified_grid(n_points: int, seed: int, smax: int = 4) -> np.ndarray:
    """Half uniform, half near-rational frequencies (seeded)."""
    rng = np.random.default_rng(seed)
    n_uniform = n_points // 2
    pts = [rng.random((n_uniform, 2))]
    rest = n_points - n_uniform
    shells = [shell(s) for s in range(smax + 1)]
    tx = np.concatenate([sh.tx for sh in shells])
    ty = np.concatenate([sh.ty for sh in shells])
    ss = np.concatenate([np.full(len(sh.tx), sh.s) for sh in shells])
    pick = rng.integers(0, len(tx), rest)
    scale = 2.0 ** (-ss[pick]) * rng.random(rest) * 0.5
    angle = rng.random(rest) * 2 * np.pi
    near = np.column_stack(
        [tx[pick] + scale * np.cos(angle), ty[pick] + scale * np.sin(angle)]
    )
    pts.append(near % 1.0)
    return np.concatenate(pts)
