"""Recovery of complex bandlimited signals from amplitude measurements.

Measurements are ``c_{n,m} = |<v_n, a_m>|^2`` where ``v_n`` collects the
samples ``f(n beta + lambda_k)``, ``k = 1..K``, and ``{a_m}`` is a 2-uniform
tight frame of ``K^2`` vectors in ``C^K``.  Each block is lifted to the
rank-one matrix ``v_n v_n^*``, consecutive blocks are phase-aligned on their
shared sample (``lambda_K = lambda_1 + beta``), and the signal is
interpolated from the stitched samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import (AnchorVanishes, InvalidParams, LiftingIllConditioned, RankDeficient,
                     UnsupportedK, UScalingFailed)
from .sampling import (GeneratingFunction, KernelFamily, SamplingSet, SineTypeReport,
                       series_from_samples, verify_sine_type)
from .signal import Spectrum, eval_signal, pw_norm

FRAME_TOL = 1e-10
LIFT_COND_LIMIT = 1e12
DEFAULT_ANCHOR_THRESHOLD = 1e-6
DEFAULT_SERIES_N = 64


# frames -------------------------------------------------------------------

def _weyl_heisenberg_orbit(fiducial: np.ndarray) -> np.ndarray:
    """All ``X^j Z^k fiducial`` for the cyclic shift ``X`` and clock ``Z``."""
    d = fiducial.size
    omega = np.exp(2j * math.pi / d)
    clock = omega ** np.arange(d)
    rows = []
    for j in range(d):
        shifted = np.roll(fiducial, j)
        for k in range(d):
            rows.append(shifted * clock ** k)
    return np.array(rows)


def tetrahedral_frame() -> np.ndarray:
    """Four unit vectors in ``C^2`` with pairwise ``|<a_i, a_j>|^2 = 1/3``."""
    rows = [np.array([1.0, 0.0], dtype=complex)]
    for k in range(3):
        rows.append(np.array([1 / math.sqrt(3), math.sqrt(2 / 3) * np.exp(2j * math.pi * k / 3)]))
    return np.array(rows)


def orbit_frame(K: int) -> np.ndarray:
    if K == 2:
        theta = 0.5 * math.acos(1 / math.sqrt(3))
        fid = np.array([math.cos(theta), np.exp(1j * math.pi / 4) * math.sin(theta)])
    elif K == 3:
        fid = np.array([0.0, 1.0, -1.0], dtype=complex) / math.sqrt(2)
    else:
        raise UnsupportedK(f"no frame construction for K = {K}")
    return _weyl_heisenberg_orbit(fid)


# design -------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MeasurementDesign:
    """Shifts ``lambda_k``, block spacing ``beta`` and frame rows ``a_m``.

    ``signal_band`` is the fraction of ``pi`` occupied by admissible signals;
    it must stay below 1 so that interpolation from the recovered samples
    converges.
    """

    K: int
    beta: float
    shifts: tuple
    frame: np.ndarray
    anchor_threshold: float = DEFAULT_ANCHOR_THRESHOLD
    signal_band: float = 0.8
    mode: str = "custom"

    def __post_init__(self):
        frame = np.array(self.frame, dtype=complex)
        if frame.ndim != 2 or frame.shape[1] != self.K:
            raise InvalidParams("frame rows must be vectors of length K")
        if len(self.shifts) != self.K:
            raise InvalidParams("need exactly K shifts")
        if not 0 < self.signal_band < 1:
            raise InvalidParams("signal_band must lie in (0, 1); the boundary case is not supported")
        if self.beta <= 0:
            raise InvalidParams("beta must be positive")
        frame.flags.writeable = False
        object.__setattr__(self, "frame", frame)
        object.__setattr__(self, "shifts", tuple(float(s) for s in self.shifts))

    @property
    def sampling_rate(self) -> float:
        """Measurements per unit length, ``K^2 / beta``."""
        return self.K ** 2 / self.beta

    def block_points(self, n) -> np.ndarray:
        """Sample points of block ``n``; shape (len(n), K) for array input."""
        n = np.asarray(n, dtype=float)
        return n[..., None] * self.beta + np.asarray(self.shifts)

    def lattice(self, n_max: int) -> SamplingSet:
        """``Lambda = {n beta + lambda_k : k < K}`` labelled ``-n_max..n_max``."""
        return self.generating_function(n_max).zero_set

    def generating_function(self, n_max: int) -> GeneratingFunction:
        gen = GeneratingFunction.block_lattice(self.beta, self.shifts[:-1], n_max)
        if gen.zero_set.provenance == "integers":
            return GeneratingFunction.closed_sine(n_max)
        return gen

    def blocks_for(self, N: int) -> np.ndarray:
        """Block indices whose leading ``K-1`` entries cover lattice indices ``|j| <= N``."""
        lat = self.lattice(N)
        lo, hi = float(lat.points[0]), float(lat.points[-1])
        first = math.floor((lo - self.shifts[-2]) / self.beta) - 1
        last = math.ceil((hi - self.shifts[0]) / self.beta) + 1
        return np.arange(first, last + 1)

    def to_dict(self) -> dict:
        return {"K": self.K, "beta": self.beta, "shifts": list(self.shifts),
                "frame": {"re": self.frame.real.tolist(), "im": self.frame.imag.tolist()},
                "anchor_threshold": self.anchor_threshold, "signal_band": self.signal_band,
                "mode": self.mode}

    @classmethod
    def from_dict(cls, d: dict) -> "MeasurementDesign":
        frame = np.asarray(d["frame"]["re"]) + 1j * np.asarray(d["frame"]["im"])
        return cls(int(d["K"]), float(d["beta"]), tuple(d["shifts"]), frame,
                   float(d.get("anchor_threshold", DEFAULT_ANCHOR_THRESHOLD)),
                   float(d.get("signal_band", 0.8)), d.get("mode", "custom"))


def build_design(K: int = 2, mode: str | None = None, signal_band: float = 0.8,
                 anchor_threshold: float = DEFAULT_ANCHOR_THRESHOLD) -> MeasurementDesign:
    """Integer shifts ``lambda_k = k``, ``beta = K - 1``, so the lattice is ``Z``.

    ``mode='explicit'`` (the K = 2 default) uses the tetrahedral frame;
    ``mode='orbit'`` uses the shift/clock orbit of a fiducial vector.
    """
    if K not in (2, 3):
        raise UnsupportedK(f"K = {K} is not supported (use 2 or 3)")
    mode = mode or ("explicit" if K == 2 else "orbit")
    if mode == "explicit":
        if K != 2:
            raise UnsupportedK("the explicit frame exists for K = 2 only")
        frame = tetrahedral_frame()
    elif mode == "orbit":
        frame = orbit_frame(K)
    else:
        raise InvalidParams(f"unknown frame mode {mode!r}")
    shifts = tuple(float(k) for k in range(1, K + 1))
    return MeasurementDesign(K, float(K - 1), shifts, frame, anchor_threshold, signal_band, mode)


@dataclass(frozen=True)
class RecoveryReport:
    cond1: bool
    cond2: bool
    cond3: bool
    tight_error: float
    equiangular_spread: float
    overlap: float
    sine_type: SineTypeReport | None

    @property
    def passed(self) -> bool:
        return self.cond1 and self.cond2 and self.cond3

    def to_dict(self) -> dict:
        return {"cond1": self.cond1, "cond2": self.cond2, "cond3": self.cond3,
                "tight_error": self.tight_error, "equiangular_spread": self.equiangular_spread,
                "overlap": self.overlap, "pass": self.passed,
                "sine_type": None if self.sine_type is None else self.sine_type.to_dict()}


def frame_metrics(frame: np.ndarray) -> tuple[float, float, float]:
    """(Frobenius tightness error, spread and mean of off-diagonal ``|<a_i,a_j>|^2``)."""
    M, K = frame.shape
    S = frame.T @ frame.conj()
    tight = float(np.linalg.norm(S - (M / K) * np.eye(K)))
    gram = np.abs(frame.conj() @ frame.T) ** 2
    off = gram[~np.eye(M, dtype=bool)]
    return tight, float(off.max() - off.min()), float(off.mean())


def verify_recovery_condition(d: MeasurementDesign, H: float = 2.0) -> RecoveryReport:
    """Numerical check of the three recovery conditions."""
    cond1 = abs(d.shifts[-1] - (d.shifts[0] + d.beta)) <= FRAME_TOL * max(1.0, abs(d.beta))
    report = None
    try:
        gen = d.generating_function(32)
        report = verify_sine_type(gen, H)
        cond2 = report.passed and abs(report.type_estimate - math.pi) < 0.05
    except (InvalidParams, ValueError):
        cond2 = False
    tight, spread, overlap = frame_metrics(d.frame)
    norms = np.linalg.norm(d.frame, axis=1)
    cond3 = (d.frame.shape[0] == d.K ** 2 and tight < FRAME_TOL and spread < FRAME_TOL
             and bool(np.all(np.abs(norms - 1) < FRAME_TOL)))
    return RecoveryReport(bool(cond1), bool(cond2), bool(cond3), tight, spread, overlap, report)


# measurement ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class AmplitudeSamples:
    """``c[i, m]`` for block ``blocks[i]`` and frame vector ``m``."""

    blocks: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        if c.ndim != 2 or c.shape[0] != len(self.blocks):
            raise InvalidParams("one row of amplitudes per block")
        if not np.all(np.isfinite(c)) or np.any(c < 0):
            raise InvalidParams("amplitudes must be finite and non-negative")
        c.flags.writeable = False
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "blocks", np.asarray(self.blocks, dtype=np.int64))


def _block_values(signal, d: MeasurementDesign, blocks: np.ndarray) -> np.ndarray:
    pts = d.block_points(blocks)
    if isinstance(signal, Spectrum):
        # |<e^{i theta} v, a>|^2 = |<v, a>|^2: measure the unrotated representation
        return eval_signal(signal.unrotated(), pts)
    return np.asarray(signal(pts), dtype=complex)


def forward_map(v: np.ndarray, frame: np.ndarray) -> np.ndarray:
    """``|<v, a_m>|^2`` for block vectors ``v`` (rows)."""
    return np.abs(np.atleast_2d(v) @ frame.conj().T) ** 2


def measure_amplitudes(signal, d: MeasurementDesign, n_range) -> AmplitudeSamples:
    """Amplitude measurements of a spectrum (or any callable signal) on blocks ``n_range``."""
    blocks = np.arange(n_range[0], n_range[1] + 1) if isinstance(n_range, tuple) else np.asarray(n_range)
    v = _block_values(signal, d, blocks)
    return AmplitudeSamples(blocks, forward_map(v, d.frame))


# lifting ----------------------------------------------------------------------

@dataclass(frozen=True)
class BlockEstimate:
    n: int
    v: np.ndarray
    residual: float
    anchor_mag: float


def _hermitian_basis(K: int) -> list[np.ndarray]:
    basis = []
    for i in range(K):
        E = np.zeros((K, K), dtype=complex)
        E[i, i] = 1
        basis.append(E)
    for i in range(K):
        for j in range(i + 1, K):
            E = np.zeros((K, K), dtype=complex)
            E[i, j] = E[j, i] = 1
            basis.append(E)
            F = np.zeros((K, K), dtype=complex)
            F[i, j], F[j, i] = 1j, -1j
            basis.append(F)
    return basis


def lifting_operator(frame: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
    """Real matrix ``M[m, p] = a_m^* E_p a_m`` on the Hermitian basis ``E_p``."""
    K = frame.shape[1]
    basis = _hermitian_basis(K)
    M = np.array([[np.real(a.conj() @ E @ a) for E in basis] for a in frame])
    return M, basis


def lift_block(c_n, d: MeasurementDesign, n: int = 0) -> BlockEstimate:
    """Solve ``c_m = a_m^* V a_m`` for Hermitian ``V`` and extract its rank-one factor."""
    c_n = np.asarray(c_n, dtype=float)
    M, basis = lifting_operator(d.frame)
    normal = M.T @ M
    if np.linalg.cond(normal) > LIFT_COND_LIMIT:
        raise LiftingIllConditioned("frame does not determine Hermitian matrices")
    K = d.K
    if not np.any(c_n):
        return BlockEstimate(n, np.zeros(K, dtype=complex), 0.0, 0.0)
    x = np.linalg.solve(normal, M.T @ c_n)
    V = sum(xi * E for xi, E in zip(x, basis))
    mu, U = np.linalg.eigh(V)
    if mu[-1] <= 0:
        raise RankDeficient(f"block {n}: lifted matrix has no positive eigenvalue")
    v = math.sqrt(mu[-1]) * U[:, -1]
    residual = float(np.linalg.norm(V - np.outer(v, v.conj())))
    return BlockEstimate(n, v, residual, float(abs(v[0])))


def lift_all(samples: AmplitudeSamples, d: MeasurementDesign) -> list[BlockEstimate]:
    return [lift_block(row, d, int(n)) for n, row in zip(samples.blocks, samples.c)]


# stitching ----------------------------------------------------------------------

@dataclass(frozen=True)
class StitchedSamples:
    points: np.ndarray
    values: np.ndarray


def stitch_phases(blocks: Sequence[BlockEstimate], d: MeasurementDesign) -> StitchedSamples:
    """Chain block phases left to right through the shared sample.

    The first block is rotated so that its leading entry is real positive;
    every later block is rotated so that its leading entry matches the last
    entry of its predecessor.
    """
    if not blocks:
        raise InvalidParams("no blocks to stitch")
    aligned = []
    prev = None
    for b in blocks:
        scale = float(np.max(np.abs(b.v)))
        if b.anchor_mag <= d.anchor_threshold * scale or scale == 0.0:
            raise AnchorVanishes(b.n, b.anchor_mag)
        target = abs(b.v[0]) if prev is None else prev[-1]
        rot = target * np.conj(b.v[0])
        w = b.v * (rot / abs(rot))
        aligned.append(w)
        prev = w
    ns = np.array([b.n for b in blocks])
    pts = d.block_points(ns)[:, :-1].ravel()
    vals = np.array([w[:-1] for w in aligned]).ravel()
    return StitchedSamples(pts, vals)


# interpolation ------------------------------------------------------------------

def lattice_samples(stitched: StitchedSamples, d: MeasurementDesign, N: int) -> np.ndarray:
    """Stitched values at lattice indices ``-N..N``."""
    lat = d.lattice(N)
    out = np.empty(lat.points.size, dtype=complex)
    for i, p in enumerate(lat.points):
        hit = np.nonzero(np.abs(stitched.points - p) < 1e-9)[0]
        if hit.size == 0:
            raise InvalidParams(f"no stitched sample at lattice point {p:g}")
        out[i] = stitched.values[hit[0]]
    return out


def reconstruct(stitched: StitchedSamples, d: MeasurementDesign, t, N: int = DEFAULT_SERIES_N):
    """Interpolate the stitched samples over the lattice with ``2N + 1`` terms."""
    k = KernelFamily(d.generating_function(N))
    return series_from_samples(lattice_samples(stitched, d, N), k, N, t)


def align_phase(reference: np.ndarray, estimate: np.ndarray) -> np.ndarray:
    """Estimate rotated by the unit scalar that best matches the reference (least squares)."""
    inner = np.vdot(estimate, reference)
    if inner == 0:
        return estimate
    return estimate * (inner / abs(inner))


@dataclass
class RecoveryResult:
    t: np.ndarray
    values: np.ndarray
    stitched: StitchedSamples
    blocks: list
    amplitudes: AmplitudeSamples
    extra: dict = field(default_factory=dict)


def recover(signal, d: MeasurementDesign, t, N: int = DEFAULT_SERIES_N) -> RecoveryResult:
    """Measure, lift, stitch and interpolate; the output carries an unknown global phase."""
    blocks = d.blocks_for(N)
    amps = measure_amplitudes(signal, d, blocks)
    est = lift_all(amps, d)
    stitched = stitch_phases(est, d)
    t = np.asarray(t, dtype=float)
    return RecoveryResult(t, reconstruct(stitched, d, t, N), stitched, est, amps)


# preprocessing with a known sine ------------------------------------------------

def simplest_rate_between(lo: float, hi: float = 1.0) -> Fraction:
    """Rational in ``(lo, hi)`` with the smallest denominator."""
    q = 1
    while True:
        p = math.floor(lo * q) + 1
        if p / q < hi:
            return Fraction(p, q)
        q += 1


@dataclass(frozen=True)
class KnownSine:
    """``u(t) = amplitude * sin(rate * pi * t - offset)``."""

    amplitude: float
    rate: float
    offset: float

    def __call__(self, t):
        return self.amplitude * np.sin(self.rate * math.pi * np.asarray(t) - self.offset)


def _best_offset(rate: Fraction, anchors: np.ndarray) -> float:
    """Offset maximizing ``min |sin(rate pi x - offset)|`` over the anchor points."""
    cands = np.linspace(0, math.pi, 721)[:-1]
    phases = rate.numerator * math.pi * anchors / rate.denominator
    scores = [np.min(np.abs(np.sin(phases - c))) for c in cands]
    return float(cands[int(np.argmax(scores))])


def preprocess_with_u(f, d: MeasurementDesign, A_max: float, t, N: int = DEFAULT_SERIES_N,
                      p: float = 1.0, factors: Sequence[float] = (2.0, 4.0, 8.0),
                      margin: float | None = None) -> tuple[KnownSine, RecoveryResult]:
    """Recover ``f`` from amplitudes of ``f + u`` with a known sine ``u``.

    ``u`` oscillates at the simplest rational rate strictly between the
    signal band and 1, so its values on the integer-spaced anchors repeat
    periodically and the offset keeps them away from zero.  Amplitudes
    ``A_u = factor * A_max`` are tried in order until every measured anchor
    clears ``margin`` (default ``A_max / 10``).  The global phase of the
    recovered ``v`` is fixed against ``u``: the samples of ``f`` are
    orthogonal to those of ``u`` because ``f_hat`` vanishes at the
    frequencies of ``u``.
    """
    band = d.signal_band
    if isinstance(f, Spectrum):
        band = f.band_edge / math.pi
        if band >= 1:
            raise InvalidParams("preprocessing needs an oversampled signal (band < pi)")
        if pw_norm(f, p).value > A_max * (1 + 1e-12):
            raise InvalidParams("signal norm exceeds A_max")
    rate = simplest_rate_between(band, 1.0)
    blocks = d.blocks_for(N)
    anchors = d.block_points(blocks)[:, 0]
    offset = _best_offset(rate, anchors)
    margin = A_max / 10 if margin is None else margin
    f_call = (lambda x: eval_signal(f, x)) if isinstance(f, Spectrum) else f
    t = np.asarray(t, dtype=float)

    for factor in factors:
        u = KnownSine(factor * A_max, float(rate), offset)
        v_call = lambda x, u=u: f_call(x) + u(x)
        amps = measure_amplitudes(v_call, d, blocks)
        try:
            est = lift_all(amps, d)
        except RankDeficient:
            continue
        if min(b.anchor_mag for b in est) <= margin:
            continue
        stitched = stitch_phases(est, d)
        u_samples = u(stitched.points)
        inner = np.vdot(u_samples, stitched.values)
        v_samples = stitched.values * (np.conj(inner) / abs(inner))
        f_samples = StitchedSamples(stitched.points, v_samples - u_samples)
        values = reconstruct(f_samples, d, t, N)
        result = RecoveryResult(t, values, f_samples, est, amps,
                                {"A_u": u.amplitude, "rate": float(rate), "offset": offset,
                                 "factor": factor})
        return u, result
    raise UScalingFailed(f"no amplitude in {tuple(factors)} x A_max cleared the anchor margin {margin:g}")


def rate_accounting(d: MeasurementDesign) -> dict:
    return {"K": d.K, "beta": d.beta, "measurements_per_unit_length": d.sampling_rate,
            "lower_bound": d.K ** 2 / (d.K - 1)}
