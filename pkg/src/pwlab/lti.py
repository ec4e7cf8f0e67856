"""Stable LTI systems as frequency multipliers and their digital implementations.

A system ``H`` acts by ``(Hf)(t) = 1/(2 pi) int f_hat(w) h_hat(w) exp(i w t) dw``
with a bounded multiplier ``h_hat`` on ``[-pi, pi]``.  Two sample-driven
approximations are provided: the point-sample series
``sum_n f(lambda_n) (H phi_n)(t)`` and a midpoint Riemann sum driven by
frequency-bin measurements ``(1/2 pi) int_bin f_hat``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import GridMismatch, GridTooCoarse, IndexOutOfRange, InvalidParams
from .sampling import KernelFamily, nonuniform_series
from .signal import DEFAULT_POINTS, Spectrum, eval_signal, uniform_grid

Response = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class TransferFunction:
    """Samples of ``h_hat`` on a frequency grid over ``[-pi, pi]``.

    ``response`` evaluates ``h_hat`` anywhere in the band and ``impulse``
    gives the band-limited impulse response ``(1/2 pi) int h_hat e^{i w t}``;
    both are optional and only used when available.
    """

    grid: np.ndarray
    values: np.ndarray
    smoothness: str = "smooth"
    kind: str = "custom"
    response: Response | None = field(default=None, repr=False)
    impulse: Response | None = field(default=None, repr=False)
    params: dict = field(default_factory=dict)
    sup_norm: float = field(init=False)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        if grid.shape != values.shape or grid.ndim != 1:
            raise InvalidParams("grid and values must be 1-d arrays of equal length")
        if not np.all(np.isfinite(values)):
            raise InvalidParams("an unstable system: transfer values must be finite")
        if self.smoothness not in ("smooth", "discontinuous"):
            raise InvalidParams("smoothness must be 'smooth' or 'discontinuous'")
        for arr in (grid, values):
            arr.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "sup_norm", float(np.max(np.abs(values))))

    def on(self, spec: Spectrum) -> np.ndarray:
        """``h_hat`` on the grid of ``spec``."""
        if spec.grid.shape == self.grid.shape and np.array_equal(spec.grid, self.grid):
            return self.values
        if self.response is not None and spec.band_edge <= math.pi * (1 + 1e-12):
            return np.asarray(self.response(spec.grid), dtype=complex)
        raise GridMismatch("transfer function and spectrum grids differ")

    def at(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        if self.response is not None:
            return np.asarray(self.response(w), dtype=complex)
        return np.interp(w, self.grid, self.values.real) + 1j * np.interp(w, self.grid, self.values.imag)


def _grid(grid) -> np.ndarray:
    return uniform_grid(math.pi, DEFAULT_POINTS) if grid is None else np.asarray(grid, dtype=float)


def from_callable(fn: Response, grid=None, smoothness: str = "smooth",
                  impulse: Response | None = None, kind: str = "custom", **params) -> TransferFunction:
    g = _grid(grid)
    return TransferFunction(g, np.asarray(fn(g), dtype=complex), smoothness, kind, fn, impulse, params)


def identity(grid=None) -> TransferFunction:
    return from_callable(lambda w: np.ones(np.shape(w), dtype=complex), grid,
                         impulse=lambda t: np.sinc(t), kind="identity")


def delay(d: float, grid=None) -> TransferFunction:
    """Pure delay ``h_hat = exp(-i w d)``."""
    return from_callable(lambda w: np.exp(-1j * np.asarray(w) * d), grid,
                         impulse=lambda t: np.sinc(np.asarray(t) - d), kind="delay", d=float(d))


def zero_system(grid=None) -> TransferFunction:
    return from_callable(lambda w: np.zeros(np.shape(w), dtype=complex), grid,
                         impulse=lambda t: np.zeros(np.shape(t)), kind="zero")


def _hilbert_impulse(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape)
    nz = np.abs(t) > 1e-8
    x = math.pi * t[nz]
    out[nz] = (1.0 - np.cos(x)) / x
    # (1 - cos x)/x ~ x/2 near 0
    out[~nz] = math.pi * t[~nz] / 2
    return out


def hilbert_transfer(grid=None) -> TransferFunction:
    """Band-limited Hilbert transform, ``h_hat = -i sgn(w)`` with ``h_hat(0) = 0``."""
    return from_callable(lambda w: -1j * np.sign(w), grid, smoothness="discontinuous",
                         impulse=_hilbert_impulse, kind="hilbert")


def fir_transfer(taps: dict, grid=None) -> TransferFunction:
    """Smooth multiplier ``sum_k c_k exp(-i w k)`` from integer-delay taps."""
    taps = {int(k): complex(c) for k, c in dict(taps).items()}

    def response(w):
        w = np.asarray(w, dtype=float)
        out = np.zeros(w.shape, dtype=complex)
        for k, c in taps.items():
            out += c * np.exp(-1j * w * k)
        return out

    def impulse(t):
        t = np.asarray(t, dtype=float)
        return sum(c * np.sinc(t - k) for k, c in taps.items())

    return from_callable(response, grid, impulse=impulse, kind="fir",
                         taps={k: [c.real, c.imag] for k, c in taps.items()})


def apply_lti(h: TransferFunction, f: Spectrum, t):
    """Quadrature of ``f_hat h_hat exp(i w t)``: the reference output of ``H``."""
    hv = h.on(f)
    out = Spectrum(f.band_edge, f.grid, f.values * hv, f.quadrature, f.phase)
    return eval_signal(out, t)


# kernel spectra ------------------------------------------------------------

def _cumulative(values: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Trapezoid running integral from the left end, starting at 0."""
    inc = 0.5 * (values[1:] + values[:-1]) * np.diff(grid)
    return np.concatenate([[0.0], np.cumsum(inc)])


def _crossing_kernel_spectra(k: KernelFamily, ns: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Spectra of ``phi_n`` for ``phi = A sin(pi z) - g(z)``, shape (len(ns), len(grid)).

    ``(z - lambda) psi(z) = phi(z)`` becomes a first-order equation for the
    spectrum of ``psi``; integrating the spectral measure of ``phi`` from the
    nearer band end gives

        nu > 0:  psi_hat = e^{-i nu lam} [pi A e^{i pi lam}  - i int_nu^pi  g_hat e^{i w lam} dw]
        nu < 0:  psi_hat = e^{-i nu lam} [pi A e^{-i pi lam} + i int_-pi^nu g_hat e^{i w lam} dw]
    """
    gen = k.generating
    g = gen.g
    if g.band_edge != math.pi or not np.array_equal(g.grid, grid):
        raise GridMismatch("the crossing term must live on the transfer-function grid")
    g_vals = g.effective_values()
    pos = k.zero_set.positions(ns)
    lam = k.zero_set.points[pos].real
    deriv = k.derivatives[pos]
    out = np.empty((ns.size, grid.size), dtype=complex)
    right = grid > 0
    for row, (lm, dv) in enumerate(zip(lam, deriv)):
        integrand = g_vals * np.exp(1j * grid * lm)
        left_int = _cumulative(integrand, grid)
        right_int = left_int[-1] - left_int
        core = np.where(right,
                        math.pi * gen.A * np.exp(1j * math.pi * lm) - 1j * right_int,
                        math.pi * gen.A * np.exp(-1j * math.pi * lm) + 1j * left_int)
        out[row] = np.exp(-1j * grid * lm) * core / dv
    return out


def _windowed_kernel_spectra(k: KernelFamily, ns: np.ndarray, grid: np.ndarray, N: int) -> np.ndarray:
    """Time-domain quadrature of ``phi_n`` over ``[-W, W]``, ``W = max(8N, 64)``."""
    W = max(8 * N, 64)
    step = 1.0 / 16
    t = np.arange(-W, W + step / 2, step)
    wts = np.full(t.size, step)
    wts[0] = wts[-1] = step / 2
    vals = k.matrix(ns, t)
    return (vals * wts[:, None]).T @ np.exp(-1j * np.multiply.outer(t, grid))


def kernel_spectra(k: KernelFamily, N: int, grid: np.ndarray) -> np.ndarray:
    """Spectra of ``phi_n``, ``|n| <= N``, on ``grid``; cached on the kernel family."""
    cache = k.__dict__.setdefault("_spectra", {})
    key = (N, grid.size, float(grid[0]), float(grid[-1]))
    if key in cache:
        return cache[key]
    if not k.covers(N):
        raise IndexOutOfRange(f"N = {N} exceeds the kernel range")
    ns = np.arange(-N, N + 1)
    form = k.generating.form
    if k.zero_set.provenance == "integers":
        spectra = np.exp(-1j * np.multiply.outer(ns.astype(float), grid))
    elif form == "sine_wave_crossing":
        spectra = _crossing_kernel_spectra(k, ns, grid)
    else:
        spectra = _windowed_kernel_spectra(k, ns, grid, N)
    spectra.flags.writeable = False
    cache[key] = spectra
    return spectra


def _filtered_kernels(h: TransferFunction, k: KernelFamily, N: int, t: np.ndarray) -> np.ndarray:
    """``(H phi_n)(t)`` for ``|n| <= N``, shape (len(t), 2N+1)."""
    ns = np.arange(-N, N + 1)
    if h.kind == "zero":
        return np.zeros((t.size, ns.size), dtype=complex)
    if k.zero_set.provenance == "integers" and h.impulse is not None:
        return np.asarray(h.impulse(t[:, None] - ns[None, :].astype(float)), dtype=complex)
    spectra = kernel_spectra(k, N, h.grid)
    wts = np.full(h.grid.size, h.grid[1] - h.grid[0])
    wts[0] = wts[-1] = wts[0] / 2
    coeff = spectra * (h.values * wts)[None, :]
    return np.exp(1j * np.multiply.outer(t, h.grid)) @ coeff.T / (2 * math.pi)


def digital_lti_point(h: TransferFunction, k: KernelFamily, f: Spectrum, N: int, t):
    """``sum_{|n| <= N} f(lambda_n) (H phi_n)(t)`` from point samples."""
    if not k.covers(N):
        raise IndexOutOfRange(f"N = {N} exceeds the kernel range")
    if h.kind == "identity":
        return nonuniform_series(f, k, N, t)
    if h.kind == "delay":
        return nonuniform_series(f, k, N, np.asarray(t) - h.params["d"])
    ts = np.atleast_1d(np.asarray(t, dtype=float)).ravel()
    _, lam = k.zero_set.window(N)
    samples = eval_signal(f, lam)
    out = _filtered_kernels(h, k, N, ts) @ samples
    return out[0] if np.ndim(t) == 0 else out.reshape(np.shape(t))


# generalized measurements --------------------------------------------------

@dataclass(frozen=True, eq=False)
class MeasurementFunctionalSet:
    """Bounded measurement functionals ``gamma_n(f) = <f, s_n>``.

    ``point_eval`` samples on ``sampling``; ``freq_bin`` integrates the
    spectrum over ``count`` equal bins partitioning ``[-band_edge, band_edge]``;
    ``custom`` takes measurement spectra ``s_hat_n`` as rows on a grid.
    """

    kind: str
    count: int = 0
    sampling: object = None
    band_edge: float = math.pi
    spectra: np.ndarray | None = None
    spectra_grid: np.ndarray | None = None
    bound: float = field(init=False)

    def __post_init__(self):
        if self.kind == "freq_bin":
            if self.count < 1:
                raise InvalidParams("freq_bin needs at least one bin")
            bound = 1.0
        elif self.kind == "point_eval":
            if self.sampling is None:
                raise InvalidParams("point_eval needs a sampling set")
            # |f(lambda)| <= ||f||_1 under the normalized norm
            bound = 1.0
        elif self.kind == "custom":
            if self.spectra is None or self.spectra_grid is None:
                raise InvalidParams("custom functionals need spectra and their grid")
            bound = float(np.max(np.abs(self.spectra)))
        else:
            raise InvalidParams(f"unknown functional kind {self.kind!r}")
        object.__setattr__(self, "bound", bound)

    @classmethod
    def freq_bins(cls, B: int, band_edge: float = math.pi) -> "MeasurementFunctionalSet":
        return cls("freq_bin", count=int(B), band_edge=float(band_edge))

    @classmethod
    def point_eval(cls, sampling) -> "MeasurementFunctionalSet":
        return cls("point_eval", sampling=sampling)

    def edges(self) -> np.ndarray:
        return np.linspace(-self.band_edge, self.band_edge, self.count + 1)

    def midpoints(self) -> np.ndarray:
        e = self.edges()
        return 0.5 * (e[1:] + e[:-1])


def _bin_integrals(f: Spectrum, edges: np.ndarray) -> np.ndarray:
    if f.bin_integral is not None:
        vals = np.array([f.bin_integral(a, b) for a, b in zip(edges[:-1], edges[1:])])
        return vals * np.exp(1j * f.phase) if f.phase else vals
    # grid quadrature needs every bin edge on a grid node
    pos = np.interp(edges, f.grid, np.arange(f.grid.size), left=-1, right=-1)
    inside = (edges >= f.grid[0] - 1e-12) & (edges <= f.grid[-1] + 1e-12)
    if np.any(inside & (np.abs(pos - np.round(pos)) > 1e-9)):
        raise GridTooCoarse("bin edges must fall on spectrum grid nodes")
    ev = f.effective_values()
    h = f.step
    trap = np.concatenate([[0.0], np.cumsum(0.5 * (ev[1:] + ev[:-1]) * h)])
    clipped = np.clip(edges, f.grid[0], f.grid[-1])
    idx = np.round(np.interp(clipped, f.grid, np.arange(f.grid.size))).astype(int)
    return trap[idx[1:]] - trap[idx[:-1]]


def generalized_measure(m: MeasurementFunctionalSet, f: Spectrum, n=None):
    """``gamma_n(f)``; ``n=None`` returns every measurement of the set."""
    if m.kind == "point_eval":
        if n is None:
            return eval_signal(f, m.sampling.points)
        return eval_signal(f, m.sampling.point(n))
    if m.kind == "freq_bin":
        edges = m.edges()
        if n is None:
            return _bin_integrals(f, edges) / (2 * math.pi)
        if not 0 <= n < m.count:
            raise IndexOutOfRange(f"bin {n} outside 0..{m.count - 1}")
        return _bin_integrals(f, edges[n:n + 2])[0] / (2 * math.pi)
    # custom: <f, s_n> = (1/2 pi) int f_hat conj(s_hat_n)
    if not np.array_equal(m.spectra_grid, f.grid):
        raise GridMismatch("measurement spectra and signal grids differ")
    if n is not None and not 0 <= n < len(m.spectra):
        raise IndexOutOfRange(f"functional {n} outside range")
    rows = m.spectra if n is None else m.spectra[[n]]
    vals = (np.conj(rows) * (f.weights * f.effective_values())[None, :]).sum(axis=1) / (2 * math.pi)
    return vals if n is None else vals[0]


def digital_lti_generalized(h: TransferFunction, m: MeasurementFunctionalSet, f: Spectrum, t):
    """Midpoint Riemann sum ``sum_n gamma_n(f) h_hat(w_n) exp(i w_n t)`` over frequency bins."""
    if m.kind != "freq_bin":
        raise InvalidParams("the Riemann-sum implementation needs frequency-bin measurements")
    if m.count < 2:
        raise InvalidParams("need at least two bins")
    gammas = generalized_measure(m, f)
    mid = m.midpoints()
    weights = gammas * h.at(mid)
    ts = np.atleast_1d(np.asarray(t, dtype=float)).ravel()
    out = np.exp(1j * np.multiply.outer(ts, mid)) @ weights
    return out[0] if np.ndim(t) == 0 else out.reshape(np.shape(t))


def functional_norm_estimate(h: TransferFunction, k: KernelFamily, N: int, t: float,
                             beta: float = 1.0, omega_grid=None) -> float:
    """``max_w |sum_{|n|<=N} exp(i w lambda_n) (H phi_n)(t)|`` over ``|w| <= beta pi``.

    Default frequency grid has ``max(16 N, 16)`` intervals on the band.
    """
    if not 0 < beta <= 1:
        raise InvalidParams("beta must lie in (0, 1]")
    band = beta * math.pi
    if omega_grid is None:
        L = max(16 * N, 16)
        omega = np.linspace(-band, band, L + 1)
    else:
        omega = np.sort(np.asarray(omega_grid, dtype=float))
    if N > 0 and np.max(np.diff(omega)) > math.pi / (8 * N) * (1 + 1e-12):
        raise GridTooCoarse("frequency step exceeds pi / (8N)")
    _, lam = k.zero_set.window(N)
    filt = _filtered_kernels(h, k, N, np.array([float(t)]))[0]
    vals = np.exp(1j * np.multiply.outer(omega, lam)) @ filt
    return float(np.max(np.abs(vals)))
