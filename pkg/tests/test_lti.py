import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from pwlab.errors import GridMismatch, IndexOutOfRange, InvalidParams, GridTooCoarse
from pwlab.lti import (MeasurementFunctionalSet, TransferFunction, apply_lti, delay,
                       digital_lti_generalized, digital_lti_point, fir_transfer, from_callable,
                       functional_norm_estimate, generalized_measure, hilbert_transfer, identity,
                       kernel_spectra, zero_system)
from pwlab.sampling import (GeneratingFunction, KernelFamily, SamplingSet, kernel_eval,
                            nonuniform_series)
from pwlab.signal import (Spectrum, TestSignalParams, eval_signal, make_test_signal, pw_norm,
                          reproducing_kernel, uniform_grid)

FIR = {0: 0.5, 1: 0.25, -1: 0.25}


def signal(family="random_smooth", seed=0, **params):
    return make_test_signal(TestSignalParams(family, params, seed))


@pytest.fixture(scope="module")
def crossing_kernels():
    return KernelFamily(GeneratingFunction.sine_wave_crossing(2.0, 0.3 * reproducing_kernel(0.0), 80))


# transfer functions ------------------------------------------------------------

def test_hilbert_transfer_values():
    h = hilbert_transfer()
    assert h.sup_norm == 1.0
    assert h.smoothness == "discontinuous"
    mid = h.grid.size // 2
    assert h.grid[mid] == 0.0 and h.values[mid] == 0
    assert np.all(h.values[mid + 1:] == -1j)


def test_unstable_transfer_rejected():
    with pytest.raises(InvalidParams), np.errstate(divide="ignore"):
        from_callable(lambda w: 1 / w)


def test_apply_identity_and_delay():
    f = signal("random_smooth", 3)
    t = np.linspace(-4, 4, 9)
    assert np.max(np.abs(apply_lti(identity(), f, t) - eval_signal(f, t))) < 1e-12
    assert np.max(np.abs(apply_lti(delay(1.0), f, t) - eval_signal(f, t - 1))) < 1e-12


def test_hilbert_of_sinc():
    # the jump of sgn at 0 limits the trapezoid rule to first order
    assert abs(apply_lti(hilbert_transfer(), reproducing_kernel(0.0), 1.0) - 2 / math.pi) < 1e-6


def test_hilbert_twice_negates_zero_mean_signal():
    f = signal("trig_polynomial", coefficients={1: 1.0, -1: -1.0, 3: 0.5j, -3: -0.5j})
    h = hilbert_transfer()
    hh = Spectrum(f.band_edge, f.grid, f.values * h.values ** 2)
    t = np.linspace(-5, 5, 41)
    assert np.max(np.abs(eval_signal(hh, t) + eval_signal(f, t))) < 1e-12


def test_hilbert_of_real_signal_is_real():
    f = signal("fejer")
    out = apply_lti(hilbert_transfer(), f, np.linspace(-10, 10, 201))
    assert np.max(np.abs(out.imag)) < 1e-10


def test_impulse_responses_match_multipliers():
    t = np.array([-2.3, 0.0, 0.7, 5.1])
    r0 = reproducing_kernel(0.0)
    for h in (hilbert_transfer(), fir_transfer(FIR), delay(0.4)):
        assert np.max(np.abs(apply_lti(h, r0, t) - h.impulse(t))) < 1e-6


def test_grid_mismatch():
    h = from_callable(lambda w: np.ones_like(w), uniform_grid(math.pi, 513))
    h = TransferFunction(h.grid, h.values)
    with pytest.raises(GridMismatch):
        apply_lti(h, signal(), 0.0)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2 ** 32), t=st.floats(-20, 20))
def test_stability_bound(seed, t):
    f = signal("random_smooth", seed)
    for h in (hilbert_transfer(), fir_transfer(FIR)):
        assert abs(apply_lti(h, f, t)) <= h.sup_norm * pw_norm(f, 1).value + 1e-9


# kernel spectra ----------------------------------------------------------------

def test_crossing_kernel_spectra_invert_to_kernels(crossing_kernels):
    grid = uniform_grid(math.pi)
    spectra = kernel_spectra(crossing_kernels, 6, grid)
    t = np.array([-3.3, 0.1, 2.75])
    for n in (-6, 0, 4):
        spec = Spectrum(math.pi, grid, spectra[n + 6])
        assert np.max(np.abs(eval_signal(spec, t) - kernel_eval(crossing_kernels, n, t))) < 1e-5


def test_windowed_kernel_spectra_invert_to_kernels():
    k = KernelFamily(GeneratingFunction.block_lattice(2.0, (0.3, 1.0), 40))
    grid = uniform_grid(math.pi)
    spectra = kernel_spectra(k, 4, grid)
    spec = Spectrum(math.pi, grid, spectra[4])
    t = np.array([-1.1, 0.2, 1.7])
    # kernels decay like 1/t, so the finite window costs a few 1e-3
    assert np.max(np.abs(eval_signal(spec, t) - kernel_eval(k, 0, t))) < 5e-3


def test_kernel_spectra_are_cached(crossing_kernels):
    grid = uniform_grid(math.pi)
    assert kernel_spectra(crossing_kernels, 3, grid) is kernel_spectra(crossing_kernels, 3, grid)


# point-sample implementation ---------------------------------------------------

def test_identity_reduces_to_series(crossing_kernels):
    f = signal("random_smooth", 9)
    t = np.linspace(-6, 6, 25)
    assert np.array_equal(digital_lti_point(identity(), crossing_kernels, f, 20, t),
                          nonuniform_series(f, crossing_kernels, 20, t))


def test_generic_all_pass_matches_series(crossing_kernels):
    f = signal("random_smooth", 9)
    flat = from_callable(lambda w: np.ones_like(w, dtype=complex))
    t = np.linspace(-6, 6, 25)
    for k in (KernelFamily.shannon(20), crossing_kernels):
        diff = digital_lti_point(flat, k, f, 20, t) - nonuniform_series(f, k, 20, t)
        assert np.max(np.abs(diff)) < 1e-5


def test_delay_shifts_series():
    k = KernelFamily.shannon(30)
    f = signal("random_smooth", 2)
    assert abs(digital_lti_point(delay(0.75), k, f, 20, 1.0)
               - nonuniform_series(f, k, 20, 0.25)) < 1e-14


# integer taps on integer samples are exact at integer t, so the Shannon case uses t = 1/2
@pytest.mark.parametrize("kernels, t", [("shannon", 0.5), ("crossing", 0.0)])
def test_smooth_system_converges(kernels, t, crossing_kernels):
    k = KernelFamily.shannon(64) if kernels == "shannon" else crossing_kernels
    # a trig polynomial is reproduced once N passes its degree; a decaying signal keeps a tail
    f = signal("random_smooth", 4)
    h = fir_transfer(FIR)
    ref = apply_lti(h, f, t)
    errs = [abs(digital_lti_point(h, k, f, N, t) - ref) for N in (8, 16, 32, 64)]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 1e-3


def test_hilbert_on_oversampled_singular_signal_reported(crossing_kernels):
    f = signal("edge_singular_alpha", alpha=0.5, band_edge=0.8 * math.pi)
    h = hilbert_transfer()
    ref = apply_lti(h, f, 0.0)
    errs = [abs(digital_lti_point(h, crossing_kernels, f, N, 0.0) - ref) for N in (8, 16, 32)]
    assert all(np.isfinite(errs))


def test_point_implementation_range_guard():
    with pytest.raises(IndexOutOfRange):
        digital_lti_point(hilbert_transfer(), KernelFamily.shannon(4), signal(), 5, 0.0)


def test_zero_system():
    assert digital_lti_point(zero_system(), KernelFamily.shannon(8), signal(), 8, 0.3) == 0


# generalized measurements ------------------------------------------------------

def test_frequency_bins_of_flat_spectrum():
    f = Spectrum.from_function(lambda w: np.ones_like(w))
    m = MeasurementFunctionalSet.freq_bins(8)
    assert abs(generalized_measure(m, f, 3) - 1 / 8) < 1e-12
    assert abs(np.sum(generalized_measure(m, f)) - 1.0) < 1e-12
    assert m.bound == 1.0
    with pytest.raises(IndexOutOfRange):
        generalized_measure(m, f, 8)


def test_grid_quadrature_bins_need_aligned_edges():
    f = Spectrum.from_function(lambda w: np.ones_like(w))
    assert abs(np.sum(generalized_measure(MeasurementFunctionalSet.freq_bins(16), f)) - 1) < 1e-12
    with pytest.raises(GridTooCoarse):
        generalized_measure(MeasurementFunctionalSet.freq_bins(3), f)


def test_point_evaluation_functional():
    m = MeasurementFunctionalSet.point_eval(SamplingSet.integers(3))
    r0 = reproducing_kernel(0.0)
    assert abs(generalized_measure(m, r0, 0) - 1.0) < 1e-12
    assert np.max(np.abs(generalized_measure(m, r0) - np.eye(7)[3])) < 1e-12


def test_custom_functionals():
    grid = uniform_grid(math.pi)
    rows = np.exp(-1j * np.outer([0.0, 2.0], grid))
    m = MeasurementFunctionalSet("custom", spectra=rows, spectra_grid=grid)
    assert abs(m.bound - 1.0) < 1e-15
    f = signal("random_smooth", 1)
    # <f, r_lam> = f(lam)
    assert np.max(np.abs(generalized_measure(m, f) - eval_signal(f, np.array([0.0, 2.0])))) < 1e-12
    with pytest.raises(IndexOutOfRange):
        generalized_measure(m, f, 2)


def test_riemann_sum_identity():
    f = signal("trig_polynomial", 6, degree=10)
    m = MeasurementFunctionalSet.freq_bins(1024)
    assert abs(digital_lti_generalized(identity(), m, f, 0.3) - eval_signal(f, 0.3)) < 1e-3


def test_riemann_sum_of_zero_signal():
    zero = Spectrum.from_function(lambda w: np.zeros_like(w))
    assert digital_lti_generalized(hilbert_transfer(), MeasurementFunctionalSet.freq_bins(64), zero, 0.4) == 0


def test_riemann_sum_is_exact_for_hilbert_at_origin():
    # bins never straddle w = 0, so at t = 0 the sum equals the integral for any f
    f = signal("edge_singular_alpha", alpha=0.5, shift=0.5)
    exact = -2 * quad(lambda u: math.sin(math.pi * 0.5 * (1 - u * u)), 0, 1)[0]
    for B in (128, 1024):
        val = digital_lti_generalized(hilbert_transfer(), MeasurementFunctionalSet.freq_bins(B), f, 0.0)
        assert abs(val - exact) < 1e-12


def test_riemann_sum_converges_for_hilbert_off_origin():
    f = signal("edge_singular_alpha", alpha=0.5, shift=0.5)
    h = hilbert_transfer()
    # f is the singular signal delayed by 1/2, and Hf vanishes at the centre of symmetry
    errs = [abs(digital_lti_generalized(h, MeasurementFunctionalSet.freq_bins(B), f, 0.5))
            for B in (128, 256, 512, 1024, 2048)]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 1e-4


def test_riemann_sum_ratio_on_smooth_integrand():
    f = signal("fejer", shift=0.3)
    h = fir_transfer(FIR)
    ref = apply_lti(h, Spectrum.from_function(
        lambda w: (1 - np.abs(w) / math.pi) * np.exp(-0.3j * w), points=65537), 0.7)
    errs = [abs(digital_lti_generalized(h, MeasurementFunctionalSet.freq_bins(B), f, 0.7) - ref)
            for B in (64, 128, 256)]
    # at least first order under bin doubling
    assert errs[0] / errs[1] > 1.9 and errs[1] / errs[2] > 1.9


def test_riemann_sum_needs_bins():
    with pytest.raises(InvalidParams):
        digital_lti_generalized(identity(), MeasurementFunctionalSet.point_eval(SamplingSet.integers(2)),
                                signal(), 0.0)
    with pytest.raises(InvalidParams):
        digital_lti_generalized(identity(), MeasurementFunctionalSet.freq_bins(1), signal(), 0.0)


@settings(max_examples=10, deadline=None)
@given(a=st.floats(-3, 3), s1=st.integers(0, 500), s2=st.integers(0, 500))
def test_implementations_are_linear(a, s1, s2):
    f, g = signal("random_smooth", s1), signal("random_smooth", s2)
    h, k, m = hilbert_transfer(), KernelFamily.shannon(10), MeasurementFunctionalSet.freq_bins(64)
    for impl in (lambda x: digital_lti_point(h, k, x, 10, 0.4),
                 lambda x: digital_lti_generalized(h, m, x, 0.4)):
        assert abs(impl(a * f + g) - (a * impl(f) + impl(g))) < 1e-10


# functional norms --------------------------------------------------------------

def test_functional_norm_identity_reduction():
    N = 8
    t = N + 0.5
    est = functional_norm_estimate(identity(), KernelFamily.shannon(N), N, t)
    ns = np.arange(-N, N + 1)
    omega = np.linspace(-math.pi, math.pi, 16 * N + 1)
    direct = np.max(np.abs(np.exp(1j * np.outer(omega, ns)) @ np.sinc(t - ns)))
    assert abs(est - direct) < 1e-12


def test_functional_norm_of_zero_system():
    assert functional_norm_estimate(zero_system(), KernelFamily.shannon(8), 8, 0.0) == 0.0


def test_functional_norm_hilbert_curve():
    k = KernelFamily.shannon(64)
    vals = [functional_norm_estimate(hilbert_transfer(), k, N, 0.0) for N in (8, 16, 32, 64)]
    assert all(np.isfinite(vals)) and all(v > 0 for v in vals)


def test_functional_norm_guards():
    with pytest.raises(InvalidParams):
        functional_norm_estimate(identity(), KernelFamily.shannon(8), 8, 0.0, beta=1.5)
    with pytest.raises(GridTooCoarse):
        functional_norm_estimate(identity(), KernelFamily.shannon(8), 8, 0.0,
                                 omega_grid=np.linspace(-math.pi, math.pi, 9))
