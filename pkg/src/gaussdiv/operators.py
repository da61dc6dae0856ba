"""Averaging operators on grid functions and the experiment suites.

A_N (divisor-weighted average) with direct and FFT convolution paths, the
finite maximal operator A*, local p-averages on disks, and the experiments:
improving ratios, endpoint sharpness, weighted maximal bounds, sparse-form
domination, square-function and oscillation sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.signal import fftconvolve

from .arith import DivisorTable, ball_points, kappa_default
from .circle import V_hat_total_grid
from .gaussint import GaussInt
from .report import ExperimentReport


@dataclass
class GridFunction:
    """Finitely supported function on Z[i]: dense array with an origin offset.

    data[i, j] is the value at ox + i + (oy + j) * 1j; reads outside the box
    are 0.
    """

    ox: int
    oy: int
    data: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def value(self, z: GaussInt) -> complex:
        i, j = z.re - self.ox, z.im - self.oy
        if 0 <= i < self.data.shape[0] and 0 <= j < self.data.shape[1]:
            return self.data[i, j]
        return 0.0

    def values_at(self, re: np.ndarray, im: np.ndarray) -> np.ndarray:
        i = re - self.ox
        j = im - self.oy
        ok = (i >= 0) & (i < self.data.shape[0]) & (j >= 0) & (j < self.data.shape[1])
        out = np.zeros(len(re), dtype=self.data.dtype)
        out[ok] = self.data[i[ok], j[ok]]
        return out

    def l2_norm(self) -> float:
        return float(np.linalg.norm(self.data))

    def embed(self, ox: int, oy: int, shape: tuple[int, int]) -> "GridFunction":
        """Copy into a larger box with the given origin (must contain self)."""
        out = np.zeros(shape, dtype=self.data.dtype)
        i0, j0 = self.ox - ox, self.oy - oy
        if i0 < 0 or j0 < 0 or i0 + self.data.shape[0] > shape[0] or j0 + self.data.shape[1] > shape[1]:
            raise ValueError("target box does not contain the source box")
        out[i0 : i0 + self.data.shape[0], j0 : j0 + self.data.shape[1]] = self.data
        return GridFunction(ox, oy, out)


def grid_from_values(center_box: int, values: np.ndarray) -> GridFunction:
    half = values.shape[0] // 2
    return GridFunction(-half, -half, values)


@dataclass
class DiskRegion:
    """Disk {x : N(x - center) <= radius^2}; 2E doubles the radius."""

    cx: int
    cy: int
    radius: float

    def lattice_points(self) -> tuple[np.ndarray, np.ndarray]:
        r2 = self.radius * self.radius
        re, im, _ = ball_points(int(r2), include_origin=True)
        return re + self.cx, im + self.cy

    def double(self) -> "DiskRegion":
        return DiskRegion(self.cx, self.cy, 2.0 * self.radius)

    def scaled(self, factor: float) -> "DiskRegion":
        return DiskRegion(self.cx, self.cy, factor * self.radius)

    def count(self) -> int:
        return len(self.lattice_points()[0])


@dataclass
class SparseFamily:
    disks: list[DiskRegion] = field(default_factory=list)
    witnesses: list[set[tuple[int, int]]] = field(default_factory=list)

    def audit(self) -> bool:
        """Each witness is > half its disk and the witnesses are disjoint."""
        seen: set[tuple[int, int]] = set()
        for disk, wit in zip(self.disks, self.witnesses):
            pts = set(zip(*(arr.tolist() for arr in disk.lattice_points())))
            if not wit <= pts:
                return False
            if 2 * len(wit) <= len(pts):
                return False
            if wit & seen:
                return False
            seen |= wit
        return True


# ---------------------------------------------------------------------------
# The averaging operators
# ---------------------------------------------------------------------------

def _kernel(table: DivisorTable, n: int) -> np.ndarray:
    """d(z)/D(n) on the (2r+1)^2 box, r = isqrt(n)."""
    if n > table.nmax:
        raise ValueError(f"n={n} beyond table nmax={table.nmax}")
    r = math.isqrt(n)
    big = table.radius
    sub = table.values[big - r : big + r + 1, big - r : big + r + 1].astype(np.float64)
    side = np.arange(-r, r + 1)
    nn = side[:, None] ** 2 + side[None, :] ** 2
    sub = np.where(nn <= n, sub, 0.0)
    return sub / table.D(n)


def apply_AN(f: GridFunction, table: DivisorTable, n: int, method: str = "fft") -> GridFunction:
    """A_N f: convolution with the divisor kernel, normalized by D(N).

    The FFT path is a full linear convolution (padding rules out cyclic
    wraparound); the direct path sums shifted copies over the kernel ball.
    """
    ker = _kernel(table, n)
    r = ker.shape[0] // 2
    if method == "fft":
        out = fftconvolve(f.data, ker, mode="full")
    elif method == "direct":
        h, w = f.data.shape
        out = np.zeros((h + 2 * r, w + 2 * r), dtype=np.result_type(f.data, np.float64))
        nz = np.argwhere(ker != 0.0)
        for i, j in nz:
            out[i : i + h, j : j + w] += ker[i, j] * f.data
    else:
        raise ValueError(f"unknown method {method!r}")
    return GridFunction(f.ox - r, f.oy - r, out)


def maximal_Astar(f: GridFunction, table: DivisorTable, n_set) -> GridFunction:
    """Pointwise sup of |A_N f| over the finite scale set."""
    n_set = sorted(set(int(n) for n in n_set))
    if not n_set:
        raise ValueError("empty scale set")
    rmax = math.isqrt(n_set[-1])
    shape = (f.data.shape[0] + 2 * rmax, f.data.shape[1] + 2 * rmax)
    ox, oy = f.ox - rmax, f.oy - rmax
    acc = np.zeros(shape)
    for n in n_set:
        a = apply_AN(f, table, n)
        np.maximum(acc, np.abs(a.embed(ox, oy, shape).data), out=acc)
    return GridFunction(ox, oy, acc)


def local_avg(f: GridFunction, disk: DiskRegion, p) -> float:
    """<f>_{E,p}: normalized l^p average over the disk's lattice points."""
    re, im = disk.lattice_points()
    if len(re) == 0:
        raise ValueError("empty disk")
    vals = np.abs(f.values_at(re, im)).astype(np.float64)
    if p == math.inf:
        return float(vals.max())
    if p < 1:
        raise ValueError("p must be >= 1 or inf")
    return float(np.mean(vals**p) ** (1.0 / p))


def inner_product(f: GridFunction, g: GridFunction) -> complex:
    """l^2(Z[i]) pairing over the overlap of the two boxes."""
    x0 = max(f.ox, g.ox)
    y0 = max(f.oy, g.oy)
    x1 = min(f.ox + f.shape[0], g.ox + g.shape[0])
    y1 = min(f.oy + f.shape[1], g.oy + g.shape[1])
    if x0 >= x1 or y0 >= y1:
        return 0.0
    a = f.data[x0 - f.ox : x1 - f.ox, y0 - f.oy : y1 - f.oy]
    b = g.data[x0 - g.ox : x1 - g.ox, y0 - g.oy : y1 - g.oy]
    return complex(np.sum(a * np.conj(b)))


def apply_V(f: GridFunction, n: int) -> GridFunction:
    """V_N via its Fourier multiplier on a padded grid."""
    pad = math.isqrt(n) + 1
    h, w = f.data.shape
    gh, gw = h + 2 * pad, w + 2 * pad
    fr = np.fft.fftfreq(gh)
    fc = np.fft.fftfreq(gw)
    ax, ay = np.meshgrid(fr, fc, indexing="ij")
    alphas = np.column_stack([ax.ravel() % 1.0, ay.ravel() % 1.0])
    mult = V_hat_total_grid(n, alphas).reshape(gh, gw)
    fg = np.zeros((gh, gw), dtype=np.complex128)
    fg[pad : pad + h, pad : pad + w] = f.data
    out = np.fft.ifft2(np.fft.fft2(fg) * mult)
    return GridFunction(f.ox - pad, f.oy - pad, out)


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------

def _run_trials(n_trials: int, fn, threads: int = 1) -> list:
    if threads <= 1:
        return [fn(i) for i in range(n_trials)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n_trials)))


DENSITIES = (1.0, 0.25, 0.0625, 1.0 / 64.0)


def improving_experiment(
    table: DivisorTable,
    n: int,
    p: float,
    trials: int,
    rng_seed: int,
    threads: int = 1,
) -> ExperimentReport:
    """Improving-ratio census on random indicator pairs at scale sqrt(n).

    For F ~ Bernoulli on 2E and G on E records
      phi1 = <A_N 1_F>_{E,p'} / <1_F>_{2E,p}
      phi2 = (1/N) |(A_N 1_F, 1_G)| / (<1_F>_{2E,p} <1_G>_{E,p}).
    """
    if not 1.0 < p < 2.0:
        raise ValueError("p must lie in (1, 2)")
    pprime = p / (p - 1.0)
    root = math.isqrt(n)
    disk_e = DiskRegion(0, 0, float(root))
    disk_2e = disk_e.double()
    e_re, e_im = disk_e.lattice_points()
    f_re, f_im = disk_2e.lattice_points()
    ker = _kernel(table, n)
    r = ker.shape[0] // 2
    kf = None  # lazily shared FFT of the kernel per trial shape

    rows = []
    half = 2 * root
    for di, density in enumerate(DENSITIES):
        def one(trial, density=density, di=di):
            rng = np.random.default_rng(np.random.SeedSequence((rng_seed, di, trial)))
            fmask = rng.random(len(f_re)) < density
            gmask = rng.random(len(e_re)) < density
            if not fmask.any() or not gmask.any():
                return None
            fbox = np.zeros((4 * root + 1, 4 * root + 1))
            fbox[f_re[fmask] + half, f_im[fmask] + half] = 1.0
            f = GridFunction(-half, -half, fbox)
            af = apply_AN(f, table, n)
            mean_f = fmask.mean()
            mean_g = gmask.mean()
            avg_af = float(np.mean(np.abs(af.values_at(e_re, e_im)) ** pprime) ** (1.0 / pprime))
            phi1 = avg_af / mean_f ** (1.0 / p)
            pairing = float(np.sum(af.values_at(e_re[gmask], e_im[gmask])))
            phi2 = abs(pairing) / n / (mean_f ** (1.0 / p) * mean_g ** (1.0 / p))
            return density, trial, phi1, phi2

        for res in _run_trials(trials, one, threads):
            if res is not None:
                rows.append(res)

    return ExperimentReport(
        name="improving",
        meta={"n": n, "p": p, "trials": trials, "seed": rng_seed},
        columns=("density", "trial", "phi1", "phi2"),
        rows=rows,
    )


def improving_max_by_density(report: ExperimentReport) -> dict[float, float]:
    out: dict[float, float] = {}
    for density, _, phi1, phi2 in report.rows:
        out[density] = max(out.get(density, 0.0), phi1, phi2)
    return out


def sharpness_experiment(
    table: DivisorTable, n_list, kappa: float | None = None
) -> ExperimentReport:
    """Endpoint census: f = indicator of {d(x) in [M, 2M]}, M = floor(log^2 N),
    g = delta_0; r(N) is the p=1 improving ratio, expected ~ log N."""
    rows = []
    for n in n_list:
        if n < 16:
            raise ValueError("need N >= 16")
        if 4 * n > table.nmax:
            raise ValueError(f"sharpness at N={n} needs table nmax >= {4 * n}")
        m = int(math.log(n) ** 2)
        re, im, nn = ball_points(4 * n, include_origin=True)
        d = table.d_at(re, im).astype(np.int64)
        fmask = (d >= m) & (d <= 2 * m)
        support = int(np.count_nonzero(fmask))
        if support == 0:
            rows.append((n, m, 0, math.nan, math.nan))
            continue
        in_ball = nn <= n
        num = float(d[fmask & in_ball].sum()) / table.D(n) / n
        e_count = int(np.count_nonzero(nn <= n))
        two_e_count = len(re)
        mean_f = support / two_e_count
        mean_g = 1.0 / e_count
        r_val = num / (mean_f * mean_g)
        rows.append((n, m, support, r_val, r_val / math.log(n)))
    return ExperimentReport(
        name="sharpness",
        meta={"n_list": list(n_list)},
        columns=("n", "m", "support", "r", "r_over_logn"),
        rows=rows,
    )


def power_weight(re: np.ndarray, im: np.ndarray, gamma: float) -> np.ndarray:
    return (1.0 + re.astype(np.float64) ** 2 + im.astype(np.float64) ** 2) ** (gamma / 2.0)


def weighted_maximal_experiment(
    table: DivisorTable,
    p: float,
    gamma: float,
    n_set,
    f_trials: int,
    rng_seed: int,
    box_sizes=(64, 128, 256),
    threads: int = 1,
) -> ExperimentReport:
    """Operator-ratio census for A* on l^p with the radial power weight
    (1 + N(x))^(gamma/2); gamma must lie in the A_p range (-2, 2(p-1))."""
    if not 1.0 < p < math.inf:
        raise ValueError("p must lie in (1, inf)")
    if not -2.0 < gamma < 2.0 * (p - 1.0):
        raise ValueError(f"gamma={gamma} outside the A_p range (-2, {2 * (p - 1)})")
    rows = []
    for box in box_sizes:
        def one(trial, box=box):
            rng = np.random.default_rng(np.random.SeedSequence((rng_seed, box, trial)))
            half = box // 2
            data = rng.standard_normal((box, box))
            f = GridFunction(-half, -half, data)
            star = maximal_Astar(f, table, n_set)
            sre, sim = np.meshgrid(
                np.arange(star.ox, star.ox + star.shape[0]),
                np.arange(star.oy, star.oy + star.shape[1]),
                indexing="ij",
            )
            w_star = power_weight(sre.ravel(), sim.ravel(), gamma)
            num = np.sum(w_star * np.abs(star.data.ravel()) ** p) ** (1.0 / p)
            fre, fim = np.meshgrid(
                np.arange(-half, -half + box), np.arange(-half, -half + box), indexing="ij"
            )
            w_f = power_weight(fre.ravel(), fim.ravel(), gamma)
            den = np.sum(w_f * np.abs(data.ravel()) ** p) ** (1.0 / p)
            return box, trial, float(num / den)

        rows.extend(_run_trials(f_trials, one, threads))
    return ExperimentReport(
        name="weighted_maximal",
        meta={"p": p, "gamma": gamma, "trials": f_trials, "seed": rng_seed,
              "n_set_max": max(n_set)},
        columns=("box", "trial", "ratio"),
        rows=rows,
    )


# ---------------------------------------------------------------------------
# Sparse forms
# ---------------------------------------------------------------------------

def sparse_form_eval(
    family: SparseFamily, f: GridFunction, g: GridFunction, r: float, s: float
) -> float:
    """sum over I of |I| <f>_{I,r} <g>_{I,s}."""
    total = 0.0
    for disk in family.disks:
        size = disk.count()
        total += size * local_avg(f, disk, r) * local_avg(g, disk, s)
    return total


def _disk_children(disk: DiskRegion) -> list[DiskRegion]:
    """Nine disks covering the parent's bounding square (radius ~ 0.47 r)."""
    h = 2.0 * disk.radius / 3.0
    child_r = disk.radius * math.sqrt(2.0) / 3.0 + 1.0
    out = []
    for sx in (-1, 0, 1):
        for sy in (-1, 0, 1):
            out.append(DiskRegion(disk.cx + round(sx * h), disk.cy + round(sy * h), child_r))
    return out


class _DiskAverager:
    """Row prefix sums for O(radius) disk sums of a nonnegative grid function."""

    def __init__(self, f: GridFunction):
        self.ox, self.oy = f.ox, f.oy
        self.h, self.w = f.data.shape
        self.rowsum = np.concatenate(
            [np.zeros((self.h, 1)), np.cumsum(f.data.real, axis=1)], axis=1
        )

    def disk_sum(self, disk: DiskRegion) -> float:
        r2 = disk.radius * disk.radius
        rad = int(disk.radius)
        x0 = max(disk.cx - rad, self.ox)
        x1 = min(disk.cx + rad, self.ox + self.h - 1)
        if x0 > x1:
            return 0.0
        x = np.arange(x0, x1 + 1)
        dy = np.sqrt(np.maximum(r2 - (x - disk.cx) ** 2, 0.0)).astype(np.int64)
        y0 = np.maximum(disk.cy - dy, self.oy)
        y1 = np.minimum(disk.cy + dy, self.oy + self.w - 1)
        ok = y0 <= y1
        rows = x[ok] - self.ox
        return float(
            np.sum(
                self.rowsum[rows, y1[ok] - self.oy + 1] - self.rowsum[rows, y0[ok] - self.oy]
            )
        )


def disk_point_count(disk: DiskRegion) -> int:
    r2 = disk.radius * disk.radius
    rad = int(disk.radius)
    dx = np.arange(-rad, rad + 1)
    return int(np.sum(2 * np.sqrt(np.maximum(r2 - dx * dx, 0.0)).astype(np.int64) + 1))


def greedy_sparse_certificate(
    f: GridFunction,
    g: GridFunction,
    table: DivisorTable,
    n_set,
    r: float,
    s: float,
    stop_factor: float = 100.0,
) -> tuple[SparseFamily, float]:
    """Stopping-time sparse family and the ratio |(A*f, g)| / sparse form.

    Recurses on maximal dyadic-style disks where the local 3I-average of f
    exceeds stop_factor times the current root average; witnesses are the
    unclaimed points of each root, kept disjoint by bookkeeping.
    """
    if f.data.max(initial=0.0) == 0.0 or np.abs(g.data).max(initial=0.0) == 0.0:
        return SparseFamily(), 0.0

    rmax = math.isqrt(max(n_set))
    extent = 0.0
    for gf in (f, g):
        for cx, cy in ((gf.ox, gf.oy), (gf.ox + gf.shape[0], gf.oy + gf.shape[1])):
            extent = max(extent, math.hypot(cx, cy))
    root = DiskRegion(0, 0, extent + rmax + 1)

    family = SparseFamily()
    claimed: set[tuple[int, int]] = set()
    averager = _DiskAverager(f)

    # smallest 3Q disk any descendant can produce (children of a node at the
    # radius-4 search floor)
    min_3q = disk_point_count(DiskRegion(0, 0, 3.0 * (4.0 * math.sqrt(2.0) / 3.0 + 1.0)))

    def mean_f(disk: DiskRegion) -> float:
        return averager.disk_sum(disk) / disk_point_count(disk)

    def stopping_children(node: DiskRegion, threshold: float) -> list[DiskRegion]:
        """Maximal stopping disks under node, deduplicated to a disjoint set."""
        stopped: list[DiskRegion] = []

        def search(d: DiskRegion) -> None:
            if d.radius < 4.0:  # keep clear of the shrink fixed point
                return
            # even all mass near d concentrated in the smallest 3Q cannot stop
            reach = averager.disk_sum(DiskRegion(d.cx, d.cy, 2.5 * d.radius + 4.0))
            if reach <= threshold * min_3q:
                return
            for child in _disk_children(d):
                tripled = child.scaled(3.0)
                mass = averager.disk_sum(tripled)
                if mass == 0.0:
                    continue
                if mass / disk_point_count(tripled) > threshold:
                    stopped.append(child)
                else:
                    search(child)

        search(node)
        stopped.sort(key=lambda d: (-d.radius, d.cx, d.cy))
        kept: list[DiskRegion] = []
        for q in stopped:
            if all(math.hypot(q.cx - k.cx, q.cy - k.cy) > q.radius + k.radius for k in kept):
                kept.append(q)
        return kept

    def recurse(node: DiskRegion, depth: int) -> None:
        pts = set(zip(*(arr.tolist() for arr in node.lattice_points())))
        avail = pts - claimed
        if 2 * len(avail) <= len(pts):
            return  # cannot carry a large witness; leave points to ancestors
        threshold = stop_factor * max(mean_f(node), 1e-300)
        children = stopping_children(node, threshold) if depth < 12 else []
        child_pts: dict[int, set[tuple[int, int]]] = {}
        witness = set(avail)
        live: list[DiskRegion] = []
        for i, q in enumerate(children):
            qpts = set(zip(*(arr.tolist() for arr in q.lattice_points())))
            proposal = witness - qpts
            # keep the node's own witness above half before accepting a child
            if 2 * len(proposal) > len(pts):
                witness = proposal
                live.append(q)
                child_pts[i] = qpts
        family.disks.append(node)
        family.witnesses.append(witness)
        claimed.update(witness)
        for q in live:
            recurse(q, depth + 1)

    recurse(root, 0)
    if not family.audit():
        raise AssertionError("sparse family failed its witness audit")

    star = maximal_Astar(f, table, n_set)
    pairing = abs(inner_product(star, g))
    form = sparse_form_eval(family, f, g, r, s)
    return family, float(pairing / form)


# ---------------------------------------------------------------------------
# Square function and oscillation
# ---------------------------------------------------------------------------

def square_function_experiment(
    table: DivisorTable,
    rho: float,
    f_trials: int,
    kmax: int,
    rng_seed: int,
    box: int = 32,
    threads: int = 1,
) -> ExperimentReport:
    """sum_k ||A_{N_k} f - V_{N_k} f||^2 / ||f||^2 along N_k = ceil(rho^k)."""
    if rho <= 1.0:
        raise ValueError("rho must exceed 1")
    scales = []
    for k in range(1, kmax + 1):
        nk = math.ceil(rho**k)
        if nk > table.nmax:
            break
        if not scales or nk > scales[-1]:
            scales.append(nk)

    def one(trial):
        rng = np.random.default_rng(np.random.SeedSequence((rng_seed, trial)))
        half = box // 2
        data = rng.choice([-1.0, 1.0], size=(box, box))
        f = GridFunction(-half, -half, data)
        f2 = f.l2_norm() ** 2
        contribs = []
        for nk in scales:
            a = apply_AN(f, table, nk)
            v = apply_V(f, nk)
            shape = v.shape if v.shape[0] >= a.shape[0] else a.shape
            ox = min(a.ox, v.ox)
            oy = min(a.oy, v.oy)
            shape = (
                max(a.ox + a.shape[0], v.ox + v.shape[0]) - ox,
                max(a.oy + a.shape[1], v.oy + v.shape[1]) - oy,
            )
            diff = a.embed(ox, oy, shape).data - v.embed(ox, oy, shape).data
            contribs.append(float(np.sum(np.abs(diff) ** 2)) / f2)
        return trial, contribs

    rows = []
    for trial, contribs in _run_trials(f_trials, one, threads):
        total = 0.0
        for k, c in enumerate(contribs, start=1):
            total += c
            rows.append((trial, k, scales[k - 1], c, total))
    return ExperimentReport(
        name="square_function",
        meta={"rho": rho, "kmax": kmax, "box": box, "trials": f_trials, "seed": rng_seed},
        columns=("trial", "k", "n_k", "term", "partial_sum"),
        rows=rows,
    )


def lacunary_scales(r: int, nmax: int) -> list[int]:
    """I_R = {floor(2^(k/R))} capped at nmax, deduplicated, >= 1."""
    out = []
    k = 0
    while True:
        v = int(2.0 ** (k / r))
        if v > nmax:
            break
        if v >= 1 and (not out or v > out[-1]):
            out.append(v)
        k += 1
    return out


def oscillation_experiment(
    table: DivisorTable,
    r: int,
    f_trials: int,
    rng_seed: int,
    kmax: int = 12,
    box: int = 64,
    n0: int = 2,
    threads: int = 1,
) -> ExperimentReport:
    """Oscillation sum along doubling blocks N_k = n0 * 2^k restricted to I_R.

    For each block, the max over N in I_R ∩ [N_k, N_{k+1}) of
    |A_N f - A_{N_{k+1}} f| enters an l^2 square sum, normalized by ||f||^2.
    """
    if r < 1:
        raise ValueError("R must be >= 1")
    blocks = []
    k = 0
    while n0 * 2 ** (k + 1) <= table.nmax and k < kmax:
        blocks.append((n0 * 2**k, n0 * 2 ** (k + 1)))
        k += 1
    i_r = lacunary_scales(r, table.nmax)
    needed = sorted({n for lo, hi in blocks for n in i_r if lo <= n < hi} | {hi for _, hi in blocks})

    def one(trial):
        rng = np.random.default_rng(np.random.SeedSequence((rng_seed, trial)))
        half = box // 2
        data = rng.choice([-1.0, 1.0], size=(box, box))
        f = GridFunction(-half, -half, data)
        f2 = f.l2_norm() ** 2
        rmax = math.isqrt(needed[-1])
        shape = (box + 2 * rmax, box + 2 * rmax)
        ox, oy = -half - rmax, -half - rmax
        a_cache = {
            n: apply_AN(f, table, n).embed(ox, oy, shape).data for n in needed
        }
        contribs = []
        for lo, hi in blocks:
            scales = [n for n in i_r if lo <= n < hi]
            if not scales:
                contribs.append(0.0)
                continue
            ref = a_cache[hi]
            block_max = np.zeros(shape)
            for n in scales:
                np.maximum(block_max, np.abs(a_cache[n] - ref), out=block_max)
            contribs.append(float(np.sum(block_max**2)) / f2)
        return trial, contribs

    rows = []
    for trial, contribs in _run_trials(f_trials, one, threads):
        total = 0.0
        for k, c in enumerate(contribs, start=1):
            total += c
            rows.append((trial, k, blocks[k - 1][0], c, total))
    return ExperimentReport(
        name="oscillation",
        meta={"R": r, "kmax": kmax, "box": box, "trials": f_trials, "seed": rng_seed, "n0": n0},
        columns=("trial", "k", "n_k", "term", "partial_sum"),
        rows=rows,
    )
