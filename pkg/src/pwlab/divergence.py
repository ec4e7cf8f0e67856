"""Convergence and divergence diagnostics for truncated sampling series.

The operator norm of the truncated Shannon series from ``PW^1`` into bounded
functions is

    ||S_N|| = sup_{t, w} | sum_{|n| <= N} exp(i w n) sinc(t - n) |,

because the worst-case spectrum concentrates at a single frequency.  Its
growth in ``N`` is logarithmic.  The Walsh partial-sum projections provide
the contrasting example where the norm stays 1 along dyadic ``N``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._parallel import parallel_map
from .errors import GridTooCoarse, InvalidParams
from .sampling import KernelFamily, nonuniform_series, shannon_series
from .signal import Spectrum, eval_signal

DEFAULT_T_STEP = 1.0 / 64
MAX_T_GAP = 1.0 / 16
_FFT_BLOCK = 1 << 21


@dataclass(frozen=True)
class NormCurve:
    """Operator-norm estimates against ``N`` with the grids that produced them."""

    entries: tuple
    grids: dict = field(default_factory=dict)

    def __post_init__(self):
        ns = [int(n) for n, _ in self.entries]
        vals = [float(v) for _, v in self.entries]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise InvalidParams("N must be strictly increasing")
        if not all(math.isfinite(v) and v >= 0 for v in vals):
            raise InvalidParams("norm values must be finite and non-negative")
        object.__setattr__(self, "entries", tuple(zip(ns, vals)))

    @property
    def Ns(self) -> np.ndarray:
        return np.array([n for n, _ in self.entries])

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.entries])

    def log_fit(self) -> tuple[float, float, float]:
        """Least-squares ``value ~ slope * log N + intercept``; returns (slope, intercept, R^2)."""
        x, y = np.log(self.Ns), self.values
        slope, intercept = np.polyfit(x, y, 1)
        resid = y - (slope * x + intercept)
        ss_tot = float(np.sum((y - y.mean()) ** 2))
        r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
        return float(slope), float(intercept), r2


@dataclass(frozen=True)
class ErrorProfile:
    N: int
    local_sup: float
    global_sup: float
    argmax_t: float
    T: float = 0.0
    window: float = 0.0


def aligned_grid(half_width: float, step: float) -> np.ndarray:
    """Multiples of ``step`` in ``[-half_width, half_width]``; nested under step halving."""
    m = int(math.floor(half_width / step + 1e-9))
    return np.arange(-m, m + 1) * step


def default_omega_grid(N: int) -> np.ndarray:
    L = max(16 * N, 16)
    return -math.pi + 2 * math.pi * np.arange(L + 1) / L


def _fft_layout(omega: np.ndarray, N: int) -> int | None:
    """Length ``L`` if ``omega`` is the uniform grid ``-pi + 2 pi j / L``, else None."""
    L = omega.size - 1
    if L < 2 * N + 1:
        return None
    expected = -math.pi + 2 * math.pi * np.arange(L + 1) / L
    if np.max(np.abs(omega - expected)) > 1e-12:
        return None
    return L


def _sup_fft(t: np.ndarray, N: int, L: int) -> float:
    # e^{i w_j n} = (-1)^n e^{2 pi i j n / L} on the uniform grid
    ns = np.arange(-N, N + 1)
    sign = np.where(ns % 2, -1.0, 1.0)
    slots = ns % L
    rows = max(1, _FFT_BLOCK // L)

    def block(i):
        ts = t[i:i + rows]
        buf = np.zeros((ts.size, L), dtype=complex)
        buf[:, slots] = sign * np.sinc(ts[:, None] - ns[None, :])
        return float(np.max(np.abs(np.fft.ifft(buf, axis=1)))) * L

    return max(parallel_map(block, range(0, t.size, rows)))


def _sup_direct(t: np.ndarray, omega: np.ndarray, N: int) -> float:
    ns = np.arange(-N, N + 1)
    phase = np.exp(1j * np.multiply.outer(ns, omega))
    rows = max(1, _FFT_BLOCK // max(omega.size, 1))
    best = 0.0
    for i in range(0, t.size, rows):
        k = np.sinc(t[i:i + rows, None] - ns[None, :])
        best = max(best, float(np.max(np.abs(k @ phase))))
    return best


def shannon_norm_estimate(N: int, t_grid=None, omega_grid=None) -> float:
    """Grid maximum of ``|sum_{|n|<=N} exp(i w n) sinc(t - n)|``.

    Defaults: ``t`` in steps of 1/64 over ``[-(N+2), N+2]`` and the uniform
    frequency grid with ``16 N`` intervals on ``[-pi, pi]``.  For fixed ``w``
    the sum is bandlimited to ``pi`` in ``t``, so a fixed ``t`` step resolves
    it for every ``N``; the frequency step must shrink like ``1/N``.
    """
    if N < 0:
        raise InvalidParams("N must be non-negative")
    symmetric_default = t_grid is None
    t = aligned_grid(N + 2, DEFAULT_T_STEP) if t_grid is None else np.sort(np.asarray(t_grid, dtype=float))
    omega = default_omega_grid(N) if omega_grid is None else np.sort(np.asarray(omega_grid, dtype=float))
    if N > 0 and (omega.size < 2 or np.max(np.diff(omega)) > math.pi / (8 * N) * (1 + 1e-12)):
        raise GridTooCoarse("frequency step exceeds pi / (8N)")
    if t.size > 1 and np.max(np.diff(t)) > MAX_T_GAP:
        raise GridTooCoarse("time step exceeds 1/16")
    if symmetric_default:
        # |F(-t, w)| = |F(t, -w)| and the frequency grid is symmetric
        t = t[t >= 0]
    L = _fft_layout(omega, N)
    if L is not None:
        return _sup_fft(t, N, L)
    return _sup_direct(t, omega, N)


def shannon_norm_curve(Ns: Sequence[int], t_step: float = DEFAULT_T_STEP) -> NormCurve:
    vals = []
    for N in Ns:
        t = None if t_step == DEFAULT_T_STEP else aligned_grid(N + 2, t_step)
        vals.append(shannon_norm_estimate(int(N), t))
    return NormCurve(tuple(zip(Ns, vals)), {"t_step": t_step, "t_span": "N+2",
                                            "omega_step": "2pi/(16N)"})


def oscillation_probe(f: Spectrum, N: int, window: float, step: float = DEFAULT_T_STEP) -> tuple[float, float]:
    """Grid max and min of ``Re (S_N f)(t)`` over ``[-window, window]``."""
    if window < N + 2:
        raise InvalidParams("window must be at least N + 2")
    t = aligned_grid(window, step)
    s = np.real(shannon_series(f, N, t))
    return float(s.max()), float(s.min())


def error_profile(f: Spectrum, series, N: int, T: float, window: float | None = None,
                  step: float = DEFAULT_T_STEP) -> ErrorProfile:
    """Sup errors of a truncated series on ``[-T, T]`` and on ``[-window, window]``.

    ``series`` is ``"shannon"`` or a :class:`KernelFamily`.  Both sups are
    taken on one aligned grid, so the local value never exceeds the global
    one.
    """
    window = float(N + 2) if window is None else float(window)
    t = aligned_grid(max(window, T), step)
    if isinstance(series, KernelFamily):
        approx = nonuniform_series(f, series, N, t)
    elif series == "shannon":
        approx = shannon_series(f, N, t)
    else:
        raise InvalidParams(f"unknown series {series!r}")
    err = np.abs(eval_signal(f, t) - approx)
    local = err[np.abs(t) <= T + 1e-12]
    i = int(np.argmax(err))
    return ErrorProfile(int(N), float(local.max()), float(err[i]), float(t[i]), float(T), window)


def fwht(a: np.ndarray) -> np.ndarray:
    """Unnormalized fast Walsh-Hadamard transform in natural order."""
    a = np.array(a, copy=True)
    n = a.size
    if n & (n - 1):
        raise InvalidParams("length must be a power of two")
    h = 1
    while h < n:
        a = a.reshape(-1, 2, h)
        a = np.stack([a[:, 0] + a[:, 1], a[:, 0] - a[:, 1]], axis=1).reshape(n)
        h *= 2
    return a


def walsh(n: int, x) -> np.ndarray:
    """Paley-ordered Walsh function ``psi_n`` on ``[0, 1)``."""
    x = np.asarray(x, dtype=float)
    m = max(int(n).bit_length(), 1)
    cells = np.floor(x * (1 << m)).astype(np.int64)
    out = np.ones(x.shape)
    for k in range(m):
        if (n >> k) & 1:
            # Rademacher r_{k+1} reads the (k+1)-th binary digit of x
            digit = (cells >> (m - 1 - k)) & 1
            out = out * np.where(digit, -1.0, 1.0)
    return out


def walsh_projection_norm(N: int) -> float:
    """``L^1`` norm of the Walsh-Dirichlet kernel ``sum_{n<N} psi_n``.

    The kernel is constant on dyadic cells of length ``1/L`` with
    ``L = 2^ceil(log2 N)``; up to a permutation of cells its values are the
    Walsh-Hadamard transform of the indicator of ``{0, ..., N-1}``.  Integer
    arithmetic makes the result exact.
    """
    if N < 1:
        raise InvalidParams("N must be at least 1")
    L = 1 << (N - 1).bit_length()
    ind = np.zeros(L, dtype=np.int64)
    ind[:N] = 1
    return float(np.sum(np.abs(fwht(ind)))) / L


def walsh_norm_curve(Ns: Sequence[int]) -> NormCurve:
    return NormCurve(tuple((int(N), walsh_projection_norm(int(N))) for N in Ns), {"exact": True})
