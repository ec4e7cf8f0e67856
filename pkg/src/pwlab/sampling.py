"""Sampling sets, generating functions and truncated reconstruction series.

The non-uniform series uses Lagrange-type kernels

    phi_n(z) = phi(z) / (phi'(lambda_n) (z - lambda_n))

built from an entire function ``phi`` whose simple zeros are the sampling
points.  For the integers and ``phi(z) = sin(pi z)`` these reduce to shifted
sinc functions and the series becomes the Shannon series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (BracketFailure, IndexOutOfRange, InvalidParams, NonSimpleZero,
                     RadiusTooSmall)
from .signal import Spectrum, eval_derivative, eval_signal, pw_norm

SINGULAR_TOL = 1e-8
SIMPLE_ZERO_TOL = 1e-8
NEWTON_TOL = 1e-13
NEWTON_STEPS = 8
DIFF_STEP = 1e-5
FORMS = ("closed_sine", "sine_wave_crossing", "truncated_product", "block_lattice")


@dataclass(frozen=True, eq=False)
class SamplingSet:
    """Ordered sampling points ``lambda_n`` labelled by consecutive integers ``n``."""

    points: np.ndarray
    indices: np.ndarray
    provenance: str = "integers"
    separation: float = field(init=False)

    def __post_init__(self):
        pts = np.asarray(self.points)
        pts = pts.astype(complex) if np.iscomplexobj(pts) else pts.astype(float)
        idx = np.asarray(self.indices, dtype=np.int64)
        if pts.ndim != 1 or pts.shape != idx.shape or pts.size == 0:
            raise InvalidParams("points and indices must be non-empty 1-d arrays of equal length")
        if np.any(np.diff(idx) != 1):
            raise InvalidParams("indices must be consecutive integers")
        if pts.size > 1 and np.any(np.diff(np.real(pts)) <= 0):
            raise InvalidParams("sampling points must have strictly increasing real parts")
        if self.provenance == "integers" and not np.array_equal(pts, idx.astype(float)):
            raise InvalidParams("integer sampling sets must satisfy lambda_n = n")
        sep = float(np.min(np.abs(np.diff(pts)))) if pts.size > 1 else math.inf
        for arr in (pts, idx):
            arr.flags.writeable = False
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "separation", sep)

    @classmethod
    def integers(cls, n_max: int) -> "SamplingSet":
        idx = np.arange(-n_max, n_max + 1)
        return cls(idx.astype(float), idx, "integers")

    @property
    def n_min(self) -> int:
        return int(self.indices[0])

    @property
    def n_max(self) -> int:
        return int(self.indices[-1])

    def covers(self, N: int) -> bool:
        return self.n_min <= -N and N <= self.n_max

    def positions(self, ns) -> np.ndarray:
        ns = np.asarray(ns, dtype=np.int64)
        if ns.size and (ns.min() < self.n_min or ns.max() > self.n_max):
            raise IndexOutOfRange(f"index outside stored range [{self.n_min}, {self.n_max}]")
        return ns - self.n_min

    def point(self, n: int):
        return self.points[self.positions(n)]

    def window(self, N: int) -> tuple[np.ndarray, np.ndarray]:
        """Indices ``-N..N`` and their points."""
        if N < 0:
            raise InvalidParams("N must be non-negative")
        ns = np.arange(-N, N + 1)
        return ns, self.points[self.positions(ns)]


def _as_array(z) -> tuple[np.ndarray, bool]:
    arr = np.asarray(z)
    return np.atleast_1d(arr).ravel(), arr.ndim == 0


def _shape_like(values: np.ndarray, z, scalar: bool):
    return values[0] if scalar else values.reshape(np.shape(z))


@dataclass(frozen=True, eq=False)
class GeneratingFunction:
    """Entire function vanishing exactly on a sampling set.

    ``closed_sine`` is ``sin(pi z)``; ``sine_wave_crossing`` is
    ``A sin(pi z) - g(z)`` for a real bandlimited ``g`` with
    ``A > ||g||_1``; ``truncated_product`` is the principal-value product over
    a stored zero set; ``block_lattice`` is
    ``prod_k sin(pi (z - lambda_k) / beta)`` whose zeros are the shifted
    lattices ``n beta + lambda_k``.
    """

    form: str
    zero_set: SamplingSet
    A: float = 1.0
    g: Spectrum | None = None
    radius: float | None = None
    beta: float = 1.0
    shifts: tuple = ()
    derivative_rule: str = "analytic"
    diff_step: float = DIFF_STEP

    def __post_init__(self):
        if self.form not in FORMS:
            raise InvalidParams(f"unknown generating-function form {self.form!r}")
        if self.form == "sine_wave_crossing" and self.g is None:
            raise InvalidParams("sine_wave_crossing needs a spectrum g")
        if self.form == "block_lattice" and (self.beta <= 0 or not self.shifts):
            raise InvalidParams("block_lattice needs beta > 0 and at least one shift")
        if self.form == "truncated_product":
            object.__setattr__(self, "derivative_rule", "central_difference")

    # constructors -------------------------------------------------------

    @classmethod
    def closed_sine(cls, n_max: int) -> "GeneratingFunction":
        return cls("closed_sine", SamplingSet.integers(n_max))

    @classmethod
    def sine_wave_crossing(cls, A: float, g: Spectrum, n_max: int) -> "GeneratingFunction":
        """Build ``A sin(pi z) - g(z)`` and locate its zeros for ``|n| <= n_max``."""
        provisional = cls("sine_wave_crossing", SamplingSet.integers(0), A=float(A), g=g)
        zeros = find_sine_type_zeros(provisional, (-n_max, n_max))
        return cls("sine_wave_crossing", zeros, A=float(A), g=g)

    @classmethod
    def truncated_product(cls, zero_set: SamplingSet, radius: float | None = None) -> "GeneratingFunction":
        return cls("truncated_product", zero_set, radius=radius)

    @classmethod
    def block_lattice(cls, beta: float, shifts: Sequence[float], n_max: int) -> "GeneratingFunction":
        """Zeros ``n beta + lambda_k`` over the given shifts, relabelled consecutively."""
        shifts = tuple(float(s) for s in shifts)
        blocks = np.arange(-(n_max // len(shifts)) - 2, n_max // len(shifts) + 3)
        pts = np.sort((blocks[:, None] * beta + np.asarray(shifts)[None, :]).ravel())
        # label so that the point closest to 0 carries index 0
        centre = int(np.argmin(np.abs(pts)))
        lo = max(0, centre - n_max)
        pts = pts[lo:centre + n_max + 1]
        idx = np.arange(lo - centre, lo - centre + pts.size)
        if np.array_equal(pts, idx.astype(float)):
            zs = SamplingSet(pts, idx, "integers")
        else:
            zs = SamplingSet(pts, idx, "block_lattice")
        return cls("block_lattice", zs, beta=float(beta), shifts=shifts)

    # evaluation ---------------------------------------------------------

    def __call__(self, z):
        return generating_function_eval(self, z)

    def derivative(self, z):
        zs, scalar = _as_array(z)
        zs = zs.astype(complex)
        if self.form == "closed_sine":
            out = math.pi * np.cos(math.pi * zs)
        elif self.form == "sine_wave_crossing":
            out = self.A * math.pi * np.cos(math.pi * zs) - eval_derivative(self.g, zs)
        elif self.form == "block_lattice":
            args = [math.pi * (zs - s) / self.beta for s in self.shifts]
            out = np.zeros_like(zs)
            for i in range(len(args)):
                term = (math.pi / self.beta) * np.cos(args[i])
                for j, a in enumerate(args):
                    if j != i:
                        term = term * np.sin(a)
                out += term
        else:
            h = self.diff_step
            out = (generating_function_eval(self, zs + h) - generating_function_eval(self, zs - h)) / (2 * h)
        return _shape_like(out, z, scalar)


def _product_eval(gen: GeneratingFunction, zs: np.ndarray) -> np.ndarray:
    pts, idx = gen.zero_set.points, gen.zero_set.indices
    extent = float(np.min(np.abs(pts[[0, -1]])))
    scale = float(np.max(np.abs(zs))) if zs.size else 0.0
    R = gen.radius if gen.radius is not None else extent
    if R < 4 * scale:
        raise RadiusTooSmall(f"product radius {R:g} is below 4|z| = {4 * scale:g}")
    keep = np.abs(pts) < R
    lookup = dict(zip(idx[keep].tolist(), pts[keep].tolist()))
    zero_factor = np.ones(zs.shape, dtype=complex)
    pairs, singles = [], []
    for n, lam in lookup.items():
        if lam == 0:
            zero_factor = zero_factor * zs
        elif n > 0 and -n in lookup and lookup[-n] != 0:
            pairs.append((lam, lookup[-n]))
        elif n < 0 and -n in lookup and lookup[-n] != 0:
            continue
        else:
            singles.append(lam)
    out = zero_factor
    if pairs:
        a = np.array([p[0] for p in pairs], dtype=complex)
        b = np.array([p[1] for p in pairs], dtype=complex)
        # (1 - z/a)(1 - z/b) = 1 - z (a + b)/(ab) + z^2/(ab)
        s, p = (a + b) / (a * b), 1.0 / (a * b)
        rows = max(1, (1 << 21) // len(pairs))
        logsum = np.empty(zs.shape, dtype=complex)
        # partial products overflow for large |z|, so accumulate logarithms
        with np.errstate(divide="ignore"):
            for i in range(0, zs.size, rows):
                blk = zs[i:i + rows, None]
                logsum[i:i + rows] = np.sum(np.log(1.0 - blk * s + blk * blk * p), axis=1)
        out = out * np.exp(logsum)
    for lam in singles:
        out = out * (1.0 - zs / lam)
    return out


def generating_function_eval(gen: GeneratingFunction, z):
    """Evaluate the generating function at (complex) ``z``."""
    zs, scalar = _as_array(z)
    zs = zs.astype(complex)
    if gen.form == "closed_sine":
        out = np.sin(math.pi * zs)
    elif gen.form == "sine_wave_crossing":
        out = gen.A * np.sin(math.pi * zs) - eval_signal(gen.g, zs)
    elif gen.form == "block_lattice":
        out = np.ones_like(zs)
        for s in gen.shifts:
            out = out * np.sin(math.pi * (zs - s) / gen.beta)
    else:
        out = _product_eval(gen, zs)
    return _shape_like(out, z, scalar)


def _real_crossing(gen: GeneratingFunction, x: np.ndarray) -> np.ndarray:
    vals = gen.A * np.sin(math.pi * x) - eval_signal(gen.g, x).real
    return vals


def find_sine_type_zeros(gen: GeneratingFunction, n_range) -> SamplingSet:
    """One zero of ``A sin(pi x) - g(x)`` in each ``(n - 1/2, n + 1/2)``.

    Bisection on all brackets at once, then at most eight Newton steps.
    ``n_range`` is an inclusive pair ``(lo, hi)`` or a single ``N`` meaning
    ``(-N, N)``.
    """
    if gen.form != "sine_wave_crossing":
        raise InvalidParams("zero finding applies to sine_wave_crossing functions")
    lo, hi = (-int(n_range), int(n_range)) if np.isscalar(n_range) else map(int, n_range)
    norm_g = pw_norm(gen.g, 1).value
    if not gen.A > norm_g:
        raise BracketFailure(f"A = {gen.A:g} does not exceed ||g||_1 = {norm_g:g}")
    probe = eval_signal(gen.g, np.linspace(-3.0, 3.0, 13))
    if np.max(np.abs(probe.imag)) > 1e-10 * max(1.0, np.max(np.abs(probe))):
        raise InvalidParams("g must be real on the real axis")

    ns = np.arange(lo, hi + 1)
    a, b = ns - 0.5, ns + 0.5
    fa, fb = _real_crossing(gen, a), _real_crossing(gen, b)
    bad = np.sign(fa) * np.sign(fb) >= 0
    if np.any(bad):
        raise BracketFailure(f"no sign change on the bracket of n = {int(ns[bad][0])}")
    for _ in range(40):
        mid = 0.5 * (a + b)
        fm = _real_crossing(gen, mid)
        left = np.sign(fm) == np.sign(fa)
        a = np.where(left, mid, a)
        fa = np.where(left, fm, fa)
        b = np.where(left, b, mid)
    x = 0.5 * (a + b)
    lo_b, hi_b = ns - 0.5, ns + 0.5
    for _ in range(NEWTON_STEPS):
        d = gen.derivative(x).real
        if np.any(np.abs(d) < SIMPLE_ZERO_TOL):
            raise NonSimpleZero("derivative vanishes at a located zero")
        step = _real_crossing(gen, x) / d
        x = np.clip(x - step, lo_b, hi_b)
        if np.max(np.abs(step)) < NEWTON_TOL:
            break
    if np.any(np.abs(gen.derivative(x)) < SIMPLE_ZERO_TOL):
        raise NonSimpleZero("derivative vanishes at a located zero")
    return SamplingSet(x, ns, "sine_type_zeros")


@dataclass(frozen=True)
class SineTypeReport:
    A_est: float
    B_est: float
    type_estimate: float
    dominance: bool
    passed: bool

    def to_dict(self) -> dict:
        return {"A_est": self.A_est, "B_est": self.B_est, "type_estimate": self.type_estimate,
                "dominance": self.dominance, "pass": self.passed}


def verify_sine_type(gen: GeneratingFunction, H: float = 2.0, strip_samples: int = 257,
                     span: float | None = None) -> SineTypeReport:
    """Empirical two-sided bounds ``A e^{pi|eta|} <= |phi(xi + i eta)| <= B e^{pi|eta|}``.

    Samples the lines ``eta = +-H`` and ``+-2H`` over ``|xi| <= span``
    (default: half the stored zero range, at least 8).  The growth exponent
    between the two heights is reported as ``type_estimate`` and should be
    close to pi.
    """
    if H <= 0:
        raise InvalidParams("H must be positive")
    if span is None:
        reach = min(abs(gen.zero_set.n_min), abs(gen.zero_set.n_max))
        span = max(8.0, 0.5 * reach)
        if gen.form == "truncated_product":
            extent = float(np.min(np.abs(gen.zero_set.points[[0, -1]])))
            span = max(2.0, math.sqrt(extent) / 10)
    xi = np.linspace(-span, span, strip_samples)
    ratios, means = [], {}
    for eta in (H, -H, 2 * H, -2 * H):
        vals = np.abs(generating_function_eval(gen, xi + 1j * eta))
        ratios.append(vals * math.exp(-math.pi * abs(eta)))
        means.setdefault(abs(eta), []).append(np.mean(vals))
    r = np.concatenate(ratios)
    finite = bool(np.all(np.isfinite(r)))
    A_est, B_est = float(np.min(r)), float(np.max(r))
    growth = math.log(np.mean(means[2 * H]) / np.mean(means[H])) / H if finite and A_est > 0 else math.nan
    dominance = True
    if gen.form == "sine_wave_crossing":
        dominance = gen.A > pw_norm(gen.g, 1).value
    passed = finite and 0 < A_est <= B_est < math.inf and dominance
    return SineTypeReport(A_est, B_est, growth, dominance, passed)


class KernelFamily:
    """Lagrange-type interpolation kernels attached to a generating function.

    The derivative values ``phi'(lambda_n)`` are computed once on
    construction.  Integer sets with the sine generating function use the
    exact sinc form.
    """

    def __init__(self, generating: GeneratingFunction, n_max: int | None = None):
        self.generating = generating
        zs = generating.zero_set
        if n_max is None and generating.form == "truncated_product":
            # the truncated tail changes phi(z) by roughly exp(-z^2 / R), so
            # kernels are only trusted while z^2 / R stays small
            extent = float(np.min(np.abs(zs.points[[0, -1]])))
            inside = zs.indices[np.abs(zs.points) <= math.sqrt(extent) / 10]
            n_max = int(min(-inside.min(), inside.max())) if inside.size else 0
        if n_max is not None:
            ns, pts = zs.window(n_max)
            zs = SamplingSet(pts, ns, zs.provenance)
        self.zero_set = zs
        self._sinc = generating.form == "closed_sine" and zs.provenance == "integers"
        if self._sinc:
            self.derivatives = math.pi * np.cos(math.pi * zs.points).astype(complex)
        else:
            self.derivatives = np.asarray(generating.derivative(zs.points), dtype=complex)
            if np.any(np.abs(self.derivatives) < SIMPLE_ZERO_TOL):
                raise NonSimpleZero("generating function has a non-simple zero in its zero set")
        self.derivatives.flags.writeable = False

    @classmethod
    def shannon(cls, n_max: int) -> "KernelFamily":
        return cls(GeneratingFunction.closed_sine(n_max))

    def covers(self, N: int) -> bool:
        return self.zero_set.covers(N)

    def matrix(self, ns, z) -> np.ndarray:
        """Kernel values ``phi_n(z)``, shape ``(len(z), len(ns))``."""
        ns = np.atleast_1d(np.asarray(ns, dtype=np.int64))
        pos = self.zero_set.positions(ns)
        lam = self.zero_set.points[pos]
        zs = np.atleast_1d(np.asarray(z)).ravel()
        diff = zs[:, None] - lam[None, :]
        if self._sinc:
            return np.sinc(diff)
        phi = np.asarray(generating_function_eval(self.generating, zs), dtype=complex)
        near = np.abs(diff) < SINGULAR_TOL
        safe = np.where(near, 1.0, diff)
        out = phi[:, None] / (self.derivatives[pos][None, :] * safe)
        out[near] = 1.0
        return out


def kernel_eval(k: KernelFamily, n: int, z):
    """``phi_n(z)``; the removable singularity at ``z = lambda_n`` gives 1."""
    zs, scalar = _as_array(z)
    out = k.matrix([n], zs)[:, 0]
    return _shape_like(out, z, scalar)


def kernel_matrix(k: KernelFamily, N: int, t) -> np.ndarray:
    if not k.covers(N):
        raise IndexOutOfRange(f"N = {N} exceeds the kernel range")
    return k.matrix(np.arange(-N, N + 1), t)


def series_from_samples(samples, k: KernelFamily, N: int, t):
    """``sum_{|n| <= N} samples[n] phi_n(t)`` for samples indexed ``-N..N``."""
    samples = np.asarray(samples, dtype=complex)
    if samples.shape != (2 * N + 1,):
        raise InvalidParams("need exactly 2N + 1 samples")
    ts, scalar = _as_array(t)
    out = np.empty(ts.shape, dtype=complex)
    rows = max(1, (1 << 21) // (2 * N + 1))
    for i in range(0, ts.size, rows):
        out[i:i + rows] = kernel_matrix(k, N, ts[i:i + rows]) @ samples
    return _shape_like(out, t, scalar)


def _check_band(f: Spectrum):
    if f.band_edge > math.pi * (1 + 1e-12):
        raise InvalidParams("signal band edge must not exceed pi")


def shannon_series(f: Spectrum, N: int, t):
    """Truncated Shannon series ``sum_{|n| <= N} f(n) sinc(t - n)``."""
    if N < 0:
        raise InvalidParams("N must be non-negative")
    _check_band(f)
    ns = np.arange(-N, N + 1)
    return series_from_samples(eval_signal(f, ns.astype(float)), KernelFamily.shannon(N), N, t)


def nonuniform_series(f: Spectrum, k: KernelFamily, N: int, t):
    """``sum_{|n| <= N} f(lambda_n) phi_n(t)`` over the kernel's sampling set."""
    _check_band(f)
    if not k.covers(N):
        raise IndexOutOfRange(f"N = {N} exceeds the kernel range")
    _, lam = k.zero_set.window(N)
    return series_from_samples(eval_signal(f, lam), k, N, t)
