import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pwlab.errors import (AnchorVanishes, InvalidParams, LiftingIllConditioned, UnsupportedK,
                          UScalingFailed)
from pwlab.phase import (AmplitudeSamples, BlockEstimate, MeasurementDesign, align_phase,
                         build_design, forward_map, frame_metrics, lift_block, measure_amplitudes,
                         orbit_frame, preprocess_with_u, rate_accounting, recover,
                         simplest_rate_between, stitch_phases, tetrahedral_frame,
                         verify_recovery_condition)
from pwlab.signal import (TestSignalParams, eval_signal, make_test_signal, pw_norm,
                          reproducing_kernel)

T = np.linspace(-5.0, 5.0, 401)


def signal(family="random_smooth", seed=0, **params):
    return make_test_signal(TestSignalParams(family, params, seed))


def smooth(seed, band=0.8):
    return signal("random_smooth", seed, band_edge=band * math.pi)


def with_shifts(d, shifts):
    return MeasurementDesign(d.K, d.beta, shifts, d.frame)


def with_frame(d, frame):
    return MeasurementDesign(d.K, d.beta, d.shifts, frame)


@pytest.fixture(scope="module")
def d2():
    return build_design(2)


# frames and design -------------------------------------------------------------

@pytest.mark.parametrize("frame", [tetrahedral_frame(), orbit_frame(2)])
def test_k2_frames_are_tight_and_equiangular(frame):
    S = frame.T @ frame.conj()
    assert np.max(np.abs(S - 2 * np.eye(2))) < 1e-12
    gram = np.abs(frame.conj() @ frame.T) ** 2
    off = gram[~np.eye(4, dtype=bool)]
    assert np.max(np.abs(off - 1 / 3)) < 1e-12
    assert np.allclose(np.diag(gram), 1.0, atol=1e-12)


def test_k3_orbit_frame():
    d = build_design(3)
    assert d.frame.shape == (9, 3) and d.mode == "orbit"
    tight, spread, overlap = frame_metrics(d.frame)
    assert tight < 1e-12 and spread < 1e-12
    assert abs(overlap - 1 / 4) < 1e-12
    assert verify_recovery_condition(d).passed


def test_k2_design_layout(d2):
    assert d2.beta == 1.0 and d2.shifts == (1.0, 2.0)
    assert d2.shifts[-1] - d2.shifts[0] == d2.beta
    assert np.array_equal(d2.lattice(5).points, np.arange(-5.0, 6.0))


@pytest.mark.parametrize("K", [1, 4])
def test_unsupported_k(K):
    with pytest.raises(UnsupportedK):
        build_design(K)
    with pytest.raises(UnsupportedK):
        build_design(3, "explicit")


def test_design_rejects_full_band():
    with pytest.raises(InvalidParams):
        build_design(2, signal_band=1.0)


def test_recovery_condition_passes(d2):
    r = verify_recovery_condition(d2)
    assert r.passed and r.cond1 and r.cond2 and r.cond3


def test_shortened_overlap_breaks_condition_one(d2):
    bad = with_shifts(d2, (1.0, 1.0 + 0.9 * d2.beta))
    assert not verify_recovery_condition(bad).cond1


def test_zeroed_frame_vector_breaks_condition_three(d2):
    frame = d2.frame.copy()
    frame[2] = 0
    assert not verify_recovery_condition(with_frame(d2, frame)).cond3


def test_design_round_trip(d2):
    back = MeasurementDesign.from_dict(d2.to_dict())
    assert back.shifts == d2.shifts and np.array_equal(back.frame, d2.frame)


# measurements ------------------------------------------------------------------

def test_zero_signal_measures_zero(d2):
    amps = measure_amplitudes(0 * smooth(0), d2, (-3, 3))
    assert amps.c.shape == (7, 4) and not np.any(amps.c)


def test_global_phase_invariance(d2):
    f = smooth(1)
    base = measure_amplitudes(f, d2, (-10, 10)).c
    for theta in (0.0, math.pi / 7, math.pi / 2, 1.0):
        assert np.array_equal(measure_amplitudes(f.rotated(theta), d2, (-10, 10)).c, base)


def test_synthetic_block(d2):
    c = forward_map(np.array([1.0, 0.0]), d2.frame)[0]
    assert np.allclose(c, np.abs(d2.frame[:, 0]) ** 2, atol=1e-15)


def test_amplitudes_validate():
    with pytest.raises(InvalidParams):
        AmplitudeSamples(np.arange(2), np.array([[1.0, -1.0], [0.0, 0.0]]))


# lifting -----------------------------------------------------------------------

def test_lift_unit_block(d2):
    est = lift_block(forward_map(np.array([1.0, 0.0]), d2.frame)[0], d2)
    assert abs(abs(est.v[0]) - 1) < 1e-10 and abs(est.v[1]) < 1e-10
    assert est.residual < 1e-10


def test_lift_zero_block(d2):
    est = lift_block(np.zeros(4), d2)
    assert not np.any(est.v) and est.residual == 0.0


def test_lift_round_trip_random_vectors(d2):
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(1000):
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        est = lift_block(forward_map(v, d2.frame)[0], d2)
        worst = max(worst, np.max(np.abs(np.abs(est.v) - np.abs(v))),
                    abs(abs(np.vdot(est.v, v)) - np.vdot(v, v).real),
                    np.linalg.norm(np.outer(est.v, est.v.conj()) - np.outer(v, v.conj())))
        assert est.residual < 1e-10
    assert worst < 1e-9


def test_degenerate_frame_is_ill_conditioned(d2):
    frame = np.tile(d2.frame[:1], (4, 1))
    with pytest.raises(LiftingIllConditioned):
        lift_block(np.ones(4), with_frame(d2, frame))


# stitching ---------------------------------------------------------------------

def blocks_of(f, d, ns, rng=None):
    """Exact block vectors, each with an arbitrary phase."""
    out = []
    for n in ns:
        v = eval_signal(f, d.block_points(n))
        if rng is not None:
            v = v * np.exp(1j * rng.uniform(0, 2 * math.pi))
        out.append(BlockEstimate(int(n), v, 0.0, float(abs(v[0]))))
    return out


def test_single_block_is_normalized(d2):
    v = np.array([2j, 1.0 + 1j])
    s = stitch_phases([BlockEstimate(0, v, 0.0, 2.0)], d2)
    assert s.values.size == 1
    assert abs(s.values[0] - 2.0) < 1e-15


def test_stitching_recovers_samples_up_to_one_phase(d2):
    f = smooth(3)
    ns = np.arange(-8, 9)
    s = stitch_phases(blocks_of(f, d2, ns, np.random.default_rng(1)), d2)
    truth = eval_signal(f, s.points)
    assert np.max(np.abs(truth - align_phase(truth, s.values))) < 1e-8


def test_stitching_reports_vanishing_anchor(d2):
    blocks = blocks_of(smooth(3), d2, range(3))
    v = blocks[1].v.copy()
    v[0] = 0
    blocks[1] = BlockEstimate(1, v, 0.0, 0.0)
    with pytest.raises(AnchorVanishes) as info:
        stitch_phases(blocks, d2)
    assert info.value.n == 1


@settings(max_examples=20, deadline=None)
@given(a=st.integers(0, 2 ** 32), b=st.integers(0, 2 ** 32))
def test_stitching_consistency(d2, a, b):
    f = smooth(5)
    ns = np.arange(-4, 5)
    s1 = stitch_phases(blocks_of(f, d2, ns, np.random.default_rng(a)), d2).values
    s2 = stitch_phases(blocks_of(f, d2, ns, np.random.default_rng(b)), d2).values
    ratio = np.vdot(s1, s2) / np.vdot(s1, s1)
    assert abs(abs(ratio) - 1) < 1e-12
    assert np.max(np.abs(s2 - ratio * s1)) < 1e-12


# recovery ----------------------------------------------------------------------

def test_end_to_end_recovery(d2):
    from pwlab.harness import phase_trial_signals
    for _, f in phase_trial_signals(100, 3, 0.8, 0.05, 3.0, d2):
        truth = eval_signal(f, T)
        res = recover(f, d2, T, 64)
        assert np.max(np.abs(truth - align_phase(truth, res.values))) < 1e-6


def test_recovery_with_k3(d2):
    d3 = build_design(3)
    f = smooth(6)
    truth = eval_signal(f, T)
    res = recover(f, d3, T, 64)
    assert np.max(np.abs(truth - align_phase(truth, res.values))) < 1e-5


def test_scaled_kernel_recovered_up_to_phase(d2):
    # band 2.5 is an irrational multiple of pi, so the kernel has no zero on the integers
    f = (0.7 - 0.4j) * reproducing_kernel(3.0, 2.5)
    res = recover(f, d2, T, 64)
    truth = eval_signal(f, res.stitched.points)
    assert np.max(np.abs(truth - align_phase(truth, res.stitched.values))) < 1e-8
    # the kernel decays like 1/t, so the truncated series error is much larger
    t_truth = eval_signal(f, T)
    assert np.max(np.abs(t_truth - align_phase(t_truth, res.values))) < 5e-2


def test_zero_signal_has_vanishing_anchors(d2):
    with pytest.raises(AnchorVanishes):
        recover(0 * smooth(0), d2, T, 16)


# preprocessing -----------------------------------------------------------------

def test_simplest_rate():
    assert simplest_rate_between(0.8) == simplest_rate_between(0.8, 1.0)
    assert str(simplest_rate_between(0.8)) == "5/6"
    assert str(simplest_rate_between(0.5)) == "2/3"


def test_preprocessing_of_zero_is_exact(d2):
    f = 0 * smooth(0)
    u, res = preprocess_with_u(f, d2, 1.0, T, 32)
    assert np.max(np.abs(res.values)) < 1e-12
    assert u.amplitude == 2.0


def test_preprocessing_success_rate_at_four_times_a_max(d2):
    t = np.linspace(-5, 5, 101)
    ok = 0
    for seed in range(100):
        f = smooth(seed)
        a_max = pw_norm(f, 1.0).value
        _, res = preprocess_with_u(f, d2, a_max, t, 64, factors=(4.0,))
        ok += np.max(np.abs(res.values - eval_signal(f, t))) < 1e-5
    assert ok == 100


def test_preprocessing_budget_exhausted(d2):
    f = smooth(2)
    a_max = pw_norm(f, 1.0).value
    with pytest.raises(UScalingFailed):
        preprocess_with_u(f, d2, a_max, T, 16, factors=(2.0,), margin=100 * a_max)


def test_preprocessing_guards(d2):
    with pytest.raises(InvalidParams):
        preprocess_with_u(signal("random_smooth"), d2, 10.0, T, 16)
    f = smooth(0)
    with pytest.raises(InvalidParams):
        preprocess_with_u(f, d2, 0.5 * pw_norm(f, 1.0).value, T, 16)


# rate accounting ---------------------------------------------------------------

def test_rate_accounting():
    r2, r3 = rate_accounting(build_design(2)), rate_accounting(build_design(3))
    assert r2["measurements_per_unit_length"] == 4.0 == r2["lower_bound"]
    assert r3["measurements_per_unit_length"] == 4.5 == r3["lower_bound"]
    assert r2["measurements_per_unit_length"] < r3["measurements_per_unit_length"]
