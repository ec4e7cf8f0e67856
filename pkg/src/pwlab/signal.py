"""Frequency-domain representation of bandlimited signals.

A signal ``f`` in a Paley-Wiener space is stored through its spectrum
``f_hat`` sampled on a uniform grid over ``[-sigma, sigma]`` together with a
quadrature rule.  Time-domain values are obtained from

    f(z) = 1/(2 pi) * integral_{-sigma}^{sigma} f_hat(w) exp(i w z) dw

evaluated with that rule.  Norms use the normalized convention
``((1/2 sigma) integral |f_hat|^p)^(1/p)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .errors import GridMismatch, InvalidParams, NonFiniteResult

DEFAULT_POINTS = 4097
MAX_IMAG = 10.0
# complex entries per evaluation chunk (t-values x grid points)
_CHUNK = 1 << 22


def quadrature_weights(grid: np.ndarray, rule: str = "trapezoid") -> np.ndarray:
    """Weights of the composite rule on a uniform grid."""
    m = len(grid)
    h = (grid[-1] - grid[0]) / (m - 1)
    if rule == "trapezoid":
        w = np.full(m, h)
        w[0] = w[-1] = h / 2
    elif rule == "simpson":
        if m % 2 == 0:
            raise InvalidParams("simpson quadrature needs an odd number of grid points")
        w = np.empty(m)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        w[0] = w[-1] = 1.0
        w *= h / 3
    else:
        raise InvalidParams(f"unknown quadrature rule {rule!r}")
    return w


def uniform_grid(band_edge: float, points: int = DEFAULT_POINTS) -> np.ndarray:
    if points < 3:
        raise InvalidParams("need at least three grid points")
    # symmetric construction keeps grid[j] == -grid[-1-j] bit-for-bit
    half = np.linspace(0.0, band_edge, points // 2 + 1)
    if points % 2:
        return np.concatenate([-half[:0:-1], half])
    step = band_edge / (points - 1)
    right = band_edge - step * np.arange(points // 2)[::-1]
    return np.concatenate([-right[::-1], right])


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Samples of ``f_hat`` on a uniform grid over ``[-band_edge, band_edge]``.

    ``phase`` is a global unit factor ``exp(i*phase)`` kept apart from
    ``values`` so that rotating a signal is exact in floating point.
    ``bin_integral(a, b)``, when a family knows it, returns the exact
    integral of the (unrotated) spectrum over ``[a, b]``.
    """

    band_edge: float
    grid: np.ndarray
    values: np.ndarray
    quadrature: str = "trapezoid"
    phase: float = 0.0
    family: str | None = None
    seed: int | None = None
    bin_integral: Callable[[float, float], complex] | None = field(default=None, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        sigma = float(self.band_edge)
        if sigma <= 0:
            raise InvalidParams("band_edge must be positive")
        if grid.ndim != 1 or grid.shape != values.shape:
            raise InvalidParams("grid and values must be 1-d arrays of equal length")
        if np.any(np.diff(grid) <= 0):
            raise InvalidParams("grid must be strictly increasing")
        tol = 1e-12 * sigma
        if abs(grid[0] + sigma) > tol or abs(grid[-1] - sigma) > tol:
            raise InvalidParams("grid must cover [-band_edge, band_edge] inclusive")
        if np.max(np.abs(grid + grid[::-1])) > tol:
            raise InvalidParams("grid must be symmetric about 0")
        if not np.all(np.isfinite(values)):
            raise InvalidParams("spectrum values must be finite")
        weights = quadrature_weights(grid, self.quadrature)
        for arr in (grid, values, weights):
            arr.flags.writeable = False
        object.__setattr__(self, "band_edge", sigma)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_function(
        cls,
        fn: Callable[[np.ndarray], np.ndarray],
        band_edge: float = math.pi,
        points: int = DEFAULT_POINTS,
        quadrature: str = "trapezoid",
        **meta: Any,
    ) -> "Spectrum":
        grid = uniform_grid(band_edge, points)
        values = np.broadcast_to(np.asarray(fn(grid), dtype=complex), grid.shape)
        return cls(band_edge, grid, values.copy(), quadrature, **meta)

    @property
    def step(self) -> float:
        return float(self.grid[1] - self.grid[0])

    def effective_values(self) -> np.ndarray:
        if self.phase == 0.0:
            return self.values
        return np.exp(1j * self.phase) * self.values

    def rotated(self, theta: float) -> "Spectrum":
        """The signal ``exp(i*theta) * f`` (exact: only the phase field changes)."""
        return Spectrum(self.band_edge, self.grid, self.values, self.quadrature,
                        self.phase + float(theta), self.family, self.seed, self.bin_integral)

    def unrotated(self) -> "Spectrum":
        if self.phase == 0.0:
            return self
        return Spectrum(self.band_edge, self.grid, self.values, self.quadrature,
                        0.0, self.family, self.seed, self.bin_integral)

    def same_grid(self, other: "Spectrum") -> bool:
        return (self.band_edge == other.band_edge
                and self.grid.shape == other.grid.shape
                and self.quadrature == other.quadrature
                and np.array_equal(self.grid, other.grid))

    def _combine(self, other: "Spectrum", sign: float) -> "Spectrum":
        if not isinstance(other, Spectrum):
            return NotImplemented
        if not self.same_grid(other):
            raise GridMismatch("spectra live on different grids")
        exact = None
        if self.bin_integral is not None and other.bin_integral is not None:
            fa, fb = np.exp(1j * self.phase), sign * np.exp(1j * other.phase)
            ia, ib = self.bin_integral, other.bin_integral
            exact = lambda a, b: fa * ia(a, b) + fb * ib(a, b)
        return Spectrum(self.band_edge, self.grid,
                        self.effective_values() + sign * other.effective_values(),
                        self.quadrature, bin_integral=exact)

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __mul__(self, c):
        if not np.isscalar(c):
            return NotImplemented
        exact = None
        if self.bin_integral is not None:
            factor, inner = c * np.exp(1j * self.phase), self.bin_integral
            exact = lambda a, b: factor * inner(a, b)
        return Spectrum(self.band_edge, self.grid, c * self.effective_values(), self.quadrature,
                        bin_integral=exact)

    __rmul__ = __mul__

    def __call__(self, t):
        return eval_signal(self, t)


@dataclass(frozen=True)
class SignalNorm:
    p: float
    value: float

    def __float__(self):
        return self.value


@dataclass(frozen=True)
class TestSignalParams:
    family: str
    parameters: dict = field(default_factory=dict)
    seed: int = 0

    __test__ = False  # not a pytest class

    def to_dict(self) -> dict:
        return {"family": self.family, "parameters": dict(self.parameters), "seed": int(self.seed)}

    @classmethod
    def from_dict(cls, d: dict) -> "TestSignalParams":
        return cls(d["family"], dict(d.get("parameters", {})), int(d.get("seed", 0)))


def _as_points(t) -> tuple[np.ndarray, bool]:
    arr = np.asarray(t)
    scalar = arr.ndim == 0
    return np.atleast_1d(arr).ravel(), scalar


def _quadrature_sum(spec: Spectrum, t, factor: np.ndarray | None = None):
    ts, scalar = _as_points(t)
    if np.iscomplexobj(ts) and np.any(np.abs(ts.imag) > MAX_IMAG):
        raise NonFiniteResult(f"|Im t| exceeds the evaluation guard {MAX_IMAG}")
    coeff = spec.weights * spec.values
    if factor is not None:
        coeff = coeff * factor
    out = np.empty(ts.shape, dtype=complex)
    rows = max(1, _CHUNK // len(spec.grid))
    for i in range(0, len(ts), rows):
        blk = ts[i:i + rows]
        out[i:i + rows] = np.exp(1j * np.multiply.outer(blk, spec.grid)) @ coeff
    out /= 2 * math.pi
    if spec.phase != 0.0:
        out *= np.exp(1j * spec.phase)
    if not np.all(np.isfinite(out)):
        raise NonFiniteResult("signal evaluation overflowed")
    return out[0] if scalar else out.reshape(np.shape(t))


def eval_signal(spec: Spectrum, t):
    """Evaluate ``f(t)`` by quadrature; ``t`` may be complex and array-valued."""
    return _quadrature_sum(spec, t)


def eval_derivative(spec: Spectrum, t, order: int = 1):
    """``f^(order)(t)`` from the differentiated spectrum ``(i w)^order f_hat``."""
    return _quadrature_sum(spec, t, (1j * spec.grid) ** order)


def pw_norm(spec: Spectrum, p: float) -> SignalNorm:
    """Normalized ``PW^p`` norm of the spectrum; ``p = inf`` gives the grid max."""
    p = float(p)
    if not p >= 1:
        raise InvalidParams("p must lie in [1, inf]")
    mag = np.abs(spec.values)
    if math.isinf(p):
        return SignalNorm(p, float(mag.max()))
    integral = float(np.dot(spec.weights, mag ** p))
    return SignalNorm(p, (integral / (2 * spec.band_edge)) ** (1 / p))


def inner_product(a: Spectrum, b: Spectrum) -> complex:
    """Normalized frequency inner product ``(1/2 sigma) int a_hat conj(b_hat)``.

    For ``sigma = pi`` this equals the time-domain ``int f conj(g) dt``; in
    general the time-domain value is ``(sigma/pi)`` times the result.
    """
    if not a.same_grid(b):
        raise GridMismatch("inner product needs identical grids and band edges")
    s = np.dot(a.weights, a.effective_values() * np.conj(b.effective_values()))
    return complex(s / (2 * a.band_edge))


def reproducing_kernel(lam: float, sigma: float = math.pi, points: int = DEFAULT_POINTS) -> Spectrum:
    """Spectrum ``exp(-i w lam)`` of ``sin(sigma (t - lam)) / (pi (t - lam))``."""
    if sigma <= 0:
        raise InvalidParams("sigma must be positive")
    return Spectrum.from_function(lambda w: np.exp(-1j * w * lam), sigma, points,
                                  family="shifted_sinc",
                                  bin_integral=_clipped(sigma, lambda a, b: _exp_integral(lam, a, b)))


def bump(x: np.ndarray) -> np.ndarray:
    """Smooth bump ``exp(1 - 1/(1 - x^2))`` supported on ``|x| < 1``."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - x[inside] ** 2))
    return out


def _random_coefficients(rng: np.random.Generator, degree: int, decay: float) -> dict[int, complex]:
    ks = np.arange(-degree, degree + 1)
    c = (rng.standard_normal(ks.size) + 1j * rng.standard_normal(ks.size)) / math.sqrt(2)
    c /= (1.0 + np.abs(ks)) ** decay
    return dict(zip(ks.tolist(), c.tolist()))


def _coefficients(params: dict, rng: np.random.Generator) -> dict[int, complex]:
    raw = params.get("coefficients")
    if raw is None:
        return _random_coefficients(rng, int(params.get("degree", 48)), float(params.get("decay", 1.0)))
    if isinstance(raw, dict):
        items = raw.items()
    else:
        # [[k, re, im], ...] as stored in JSON configs
        items = ((row[0], complex(row[1], row[2] if len(row) > 2 else 0.0)) for row in raw)
    return {int(k): complex(v) for k, v in items}


def _exp_sum(w: np.ndarray, coeffs: dict[int, complex], spacing: float = 1.0) -> np.ndarray:
    out = np.zeros(w.shape, dtype=complex)
    for k, c in coeffs.items():
        out += c * np.exp(-1j * w * k * spacing)
    return out


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


def gauss_legendre(fn: Callable[[np.ndarray], np.ndarray], a: float, b: float) -> complex:
    x = 0.5 * (a + b) + 0.5 * (b - a) * _GL_NODES
    return complex(0.5 * (b - a) * np.dot(_GL_WEIGHTS, fn(x)))


def _exp_integral(k: float, a: float, b: float) -> complex:
    """Exact integral of ``exp(-i w k)`` over ``[a, b]``."""
    if k == 0:
        return complex(b - a)
    return complex((np.exp(-1j * a * k) - np.exp(-1j * b * k)) / (1j * k))


def _split_at_zero(fn: Callable[[float, float], complex]) -> Callable[[float, float], complex]:
    def integral(a, b):
        if a < 0 < b:
            return fn(a, 0.0) + fn(0.0, b)
        return fn(a, b)
    return integral


def _clipped(sigma: float, fn: Callable[[float, float], complex]) -> Callable[[float, float], complex]:
    def integral(a, b):
        a, b = max(a, -sigma), min(b, sigma)
        if b <= a:
            return 0j
        return fn(a, b)
    return integral


def _edge_singular_integral(sigma: float, alpha: float, shift: float):
    # x = 1 - |w|/sigma and x = v^(1/(1-alpha)) remove the endpoint singularity
    p = 1.0 - alpha

    def side(a, b):
        sign = 1.0 if a + b > 0 else -1.0
        x_lo, x_hi = sorted((1.0 - abs(a) / sigma, 1.0 - abs(b) / sigma))
        x_lo = max(x_lo, 0.0)

        def integrand(v):
            w = sign * sigma * (1.0 - v ** (1.0 / p))
            return np.exp(-1j * w * shift)

        return sigma / p * gauss_legendre(integrand, x_lo ** p, x_hi ** p)

    return _split_at_zero(side)


def make_test_signal(params: TestSignalParams) -> Spectrum:
    """Build one of the standard test spectra.

    Families and their parameters (all accept ``band_edge``, ``points``,
    ``quadrature``, ``scale`` and a time ``shift``):

    trig_polynomial
        ``f_hat = sum_k c_k exp(-i w k)``; ``coefficients`` explicitly or
        random with ``degree`` (48) and ``decay`` (1.0).
    fejer
        triangle ``1 - |w|/sigma``.
    edge_singular_alpha
        ``(1 - |w|/sigma)^(-alpha)``, ``0 < alpha < 1``; the two endpoint
        nodes take the value one half-step inward.
    shifted_sinc
        ``exp(-i w lam)``, the reproducing kernel at ``lam``.
    random_smooth
        ``bump(w/support) * sum_k c_k exp(-i w k)`` with ``degree`` (3),
        normalized to unit ``PW^2`` norm.
    """
    p = dict(params.parameters)
    fam = params.family
    sigma = float(p.get("band_edge", math.pi))
    points = int(p.get("points", DEFAULT_POINTS))
    quad = p.get("quadrature", "trapezoid")
    shift = float(p.get("shift", 0.0))
    scale = p.get("scale", 1.0)
    scale = complex(*scale) if isinstance(scale, (list, tuple)) else complex(scale)
    rng = np.random.default_rng(int(params.seed))
    grid = uniform_grid(sigma, points)

    if fam == "trig_polynomial":
        coeffs = _coefficients(p, rng)
        vals = _exp_sum(grid, coeffs)
        exact = lambda a, b: sum(c * _exp_integral(k + shift, a, b) for k, c in coeffs.items())
    elif fam == "fejer":
        vals = (1.0 - np.abs(grid) / sigma).astype(complex)
        exact = _split_at_zero(lambda a, b: gauss_legendre(
            lambda w: (1.0 - np.abs(w) / sigma) * np.exp(-1j * w * shift), a, b))
    elif fam == "edge_singular_alpha":
        alpha = float(p.get("alpha", 0.5))
        if not 0 < alpha < 1:
            raise InvalidParams("edge_singular_alpha needs 0 < alpha < 1")
        x = 1.0 - np.abs(grid) / sigma
        half_step = (grid[1] - grid[0]) / 2
        x[0] = x[-1] = half_step / sigma
        vals = (x ** -alpha).astype(complex)
        exact = _edge_singular_integral(sigma, alpha, shift)
    elif fam == "shifted_sinc":
        lam = float(p.get("lam", 0.0))
        vals = np.exp(-1j * grid * lam)
        exact = lambda a, b: _exp_integral(lam + shift, a, b)
    elif fam == "random_smooth":
        support = float(p.get("support", sigma))
        if not 0 < support <= sigma:
            raise InvalidParams("random_smooth support must lie in (0, band_edge]")
        coeffs = _random_coefficients(rng, int(p.get("degree", 3)), float(p.get("decay", 0.0)))
        vals = bump(grid / support) * _exp_sum(grid, coeffs)
        w = quadrature_weights(grid, quad)
        norm = math.sqrt(float(np.dot(w, np.abs(vals) ** 2)) / (2 * sigma))
        vals = vals / norm
        exact = lambda a, b: gauss_legendre(
            lambda x: bump(x / support) * _exp_sum(x, coeffs) * np.exp(-1j * x * shift), a, b) / norm
    else:
        raise InvalidParams(f"unknown test-signal family {fam!r}")

    if shift:
        vals = vals * np.exp(-1j * grid * shift)
    vals = scale * vals
    clipped = _clipped(sigma, exact)
    return Spectrum(sigma, grid, vals, quad, family=fam, seed=int(params.seed),
                    bin_integral=lambda a, b: scale * clipped(a, b))


def in_pw2(params: TestSignalParams) -> bool:
    """Whether the family member lies in PW^2 (edge-singular needs alpha < 1/2)."""
    if params.family == "edge_singular_alpha":
        return float(params.parameters.get("alpha", 0.5)) < 0.5
    return True
