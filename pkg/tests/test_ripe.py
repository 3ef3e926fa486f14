import cmath
import math

import numpy as np
import pytest

from ripekit import (
    DegenerateWindowError,
    RipeConfig,
    SLCStack,
    UndefinedPhaseError,
    AcquisitionTimeline,
    WeightVector,
    build_weighted_reference,
    estimate_phase,
    ingest,
    interferometric_coherence,
    joint_optimal_weights,
    optimal_weights,
    ripe_init,
    ripe_step,
    run_ripe,
    run_ripe_stateful,
    wrap_phase,
)
from ripekit.errors import SingularCovarianceError


def random_stack(rng, n, looks, coherent=0.3):
    """Random correlated stack; `coherent` sets the common-part power."""
    common = rng.standard_normal((1, looks)) + 1j * rng.standard_normal((1, looks))
    noise = rng.standard_normal((n, looks)) + 1j * rng.standard_normal((n, looks))
    samples = (math.sqrt(coherent) * common + math.sqrt(1 - coherent) * noise) * math.sqrt(0.5)
    return SLCStack(samples, AcquisitionTimeline.regular(n, 6.0))


class TestWrapPhase:
    @pytest.mark.parametrize(
        "x,expected",
        [
            (0.0, 0.0),
            (math.pi, math.pi),
            (-math.pi, math.pi),
            (3 * math.pi, math.pi),
            (math.pi + 0.1, -math.pi + 0.1),
            (-math.pi - 0.1, math.pi - 0.1),
            (2 * math.pi, 0.0),
        ],
    )
    def test_values(self, x, expected):
        assert wrap_phase(x) == pytest.approx(expected, abs=1e-12)

    def test_range_is_half_open(self):
        xs = np.linspace(-20, 20, 10001)
        w = wrap_phase(xs)
        assert np.all(w > -math.pi)
        assert np.all(w <= math.pi)


class TestEstimatePhase:
    def test_quarter_turn(self):
        assert estimate_phase([1, 1], [1j, 1j]) == pytest.approx(math.pi / 2)

    def test_scale_invariance(self):
        rng = np.random.default_rng(0)
        ref = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        y = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        assert estimate_phase(ref, y) == estimate_phase(3.7 * ref, y)

    def test_two_phasor_average(self):
        # angle(e^{j0.1} + e^{j0.3}) = 0.2 by symmetry
        expected = cmath.phase(cmath.exp(0.1j) + cmath.exp(0.3j))
        assert expected == pytest.approx(0.2, abs=1e-15)
        got = estimate_phase([1, 1], [cmath.exp(0.1j), cmath.exp(0.3j)])
        assert got == pytest.approx(0.2, abs=1e-12)

    def test_zero_inner_product(self):
        with pytest.raises(UndefinedPhaseError):
            estimate_phase([1, 0], [0, 1])

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            estimate_phase([1, 1], [1, 1, 1])


class TestInterferometricCoherence:
    def test_self_coherence_is_one(self):
        v = np.array([1 + 2j, -0.5j, 3.0])
        assert interferometric_coherence(v, v) == 1.0

    def test_orthogonal_is_zero(self):
        assert interferometric_coherence([1, 0], [0, 1]) == 0.0

    def test_hand_value(self):
        assert interferometric_coherence([1, 1], [1, 1j]) == pytest.approx(
            math.sqrt(2) / 2, abs=1e-15
        )

    def test_zero_norm_degenerate(self):
        with pytest.raises(DegenerateWindowError):
            interferometric_coherence([0, 0], [1, 1])


class TestInitAndStep:
    def test_init_scales_stable_reference(self):
        state = ripe_init(np.array([1.0 + 0j]), RipeConfig(alpha=0.5))
        assert np.array_equal(state.z, [1.0 + 0j])
        assert np.array_equal(state.s, [0.5 + 0j])
        assert state.epoch == 1

    def test_init_alpha_one_copies(self):
        y1 = np.array([2.0 + 1j, -1j])
        state = ripe_init(y1, RipeConfig(alpha=1.0))
        assert np.array_equal(state.s, y1)

    def test_init_zero_window(self):
        with pytest.raises(DegenerateWindowError):
            ripe_init(np.zeros(4, dtype=complex), RipeConfig())

    def test_two_epoch_run_is_direct_interferogram(self):
        rng = np.random.default_rng(1)
        stack = random_stack(rng, 2, 32)
        series = run_ripe(stack, RipeConfig())
        direct = estimate_phase(stack.samples[0], stack.samples[1])
        assert series.phases[0] == 0.0
        assert series.phases[1] == pytest.approx(direct, abs=1e-15)

    def test_calibration_zeroes_the_adjustment_phase(self):
        rng = np.random.default_rng(2)
        stack = random_stack(rng, 8, 24)
        config = RipeConfig(calibrate=True)
        state = ripe_init(stack.samples[0], config)
        for n in range(1, 8):
            s_before = state.s.copy()
            ripe_step(state, stack.samples[n], config)
            # post-adjustment fixed point, measured against the pre-update s
            assert abs(estimate_phase(s_before, state.z)) < 1e-12

    def test_identical_rows_give_zero_phases_and_unit_coherence(self):
        row = np.array([1 + 1j, 2 - 1j, 0.5j])
        stack = SLCStack(np.tile(row, (5, 1)), AcquisitionTimeline.regular(5, 6.0))
        series = run_ripe(stack, RipeConfig())
        assert np.allclose(series.phases, 0.0, atol=1e-14)
        assert np.allclose(series.short_coherence, 1.0, atol=1e-14)
        assert np.allclose(series.long_coherence, 1.0, atol=1e-14)

    def test_noiseless_phase_ramp_is_recovered(self):
        rng = np.random.default_rng(3)
        base = rng.standard_normal(40) + 1j * rng.standard_normal(40)
        psi = np.array([0.0, 0.4, -1.2, 2.9, -2.5])
        samples = np.array([base * cmath.exp(1j * p) for p in psi])
        stack = SLCStack(samples, AcquisitionTimeline.regular(5, 6.0))
        series = run_ripe(stack, RipeConfig())
        assert np.allclose(series.phases, wrap_phase(psi), atol=1e-12)


class TestRunInvariances:
    @pytest.mark.parametrize("calibrate", [True, False])
    def test_global_phase_invariance(self, calibrate):
        rng = np.random.default_rng(4)
        stack = random_stack(rng, 12, 30)
        config = RipeConfig(calibrate=calibrate)
        base = run_ripe(stack, config)
        rotated = SLCStack(stack.samples * cmath.exp(0.77j), stack.timeline)
        series = run_ripe(rotated, config)
        assert np.allclose(series.phases, base.phases, atol=1e-12)
        assert np.allclose(series.short_coherence, base.short_coherence, atol=1e-12)

    @pytest.mark.parametrize("calibrate", [True, False])
    def test_per_epoch_equivariance(self, calibrate):
        rng = np.random.default_rng(5)
        stack = random_stack(rng, 10, 25)
        config = RipeConfig(calibrate=calibrate)
        base = run_ripe(stack, config)
        psi = rng.uniform(-math.pi, math.pi, size=10)
        shifted = SLCStack(
            stack.samples * np.exp(1j * psi)[:, None], stack.timeline
        )
        series = run_ripe(shifted, config)
        expected = wrap_phase(base.phases + psi - psi[0])
        assert np.allclose(wrap_phase(series.phases - expected), 0.0, atol=1e-12)
        assert np.allclose(series.short_coherence, base.short_coherence, atol=1e-12)
        assert np.allclose(series.long_coherence, base.long_coherence, atol=1e-12)

    @pytest.mark.parametrize("stable_mode", ["accumulate", "first", "snapshot"])
    def test_alpha_invariance(self, stable_mode):
        rng = np.random.default_rng(6)
        stack = random_stack(rng, 15, 20)
        series = {}
        for alpha in (0.1, 1.0, 10.0):
            config = RipeConfig(alpha=alpha, calibrate=True, stable_mode=stable_mode)
            series[alpha] = run_ripe(stack, config)
        for alpha in (0.1, 10.0):
            assert np.allclose(
                series[alpha].phases, series[1.0].phases, atol=1e-12
            ), f"alpha={alpha} changed the phases"

    def test_rescale_is_a_phase_noop(self):
        rng = np.random.default_rng(7)
        stack = random_stack(rng, 12, 18)
        plain = run_ripe(stack, RipeConfig(rescale=False))
        guarded = run_ripe(stack, RipeConfig(rescale=True))
        assert np.allclose(guarded.phases, plain.phases, atol=1e-10)
        assert np.allclose(guarded.short_coherence, plain.short_coherence, atol=1e-10)

    def test_calibration_cadence_skips_steps(self):
        rng = np.random.default_rng(8)
        stack = random_stack(rng, 9, 16)
        every = run_ripe(stack, RipeConfig(calibration_cadence=1))
        sparse = run_ripe(stack, RipeConfig(calibration_cadence=4))
        never = run_ripe(stack, RipeConfig(calibrate=False))
        assert not np.allclose(sparse.phases, every.phases, atol=1e-12)
        assert not np.allclose(sparse.phases, never.phases, atol=1e-12)

    def test_stateful_run_matches_plain_run(self):
        rng = np.random.default_rng(9)
        stack = random_stack(rng, 10, 22)
        config = RipeConfig()
        plain = run_ripe(stack, config)
        series, state = run_ripe_stateful(stack, config)
        assert np.array_equal(series.phases, plain.phases)
        assert state.epoch == 10

    def test_ingest_continues_bit_identically(self):
        rng = np.random.default_rng(10)
        stack = random_stack(rng, 14, 20)
        config = RipeConfig()
        full, _ = run_ripe_stateful(stack, config)

        head = SLCStack(stack.samples[:9], AcquisitionTimeline(stack.timeline.times[:9]))
        _, state = run_ripe_stateful(head, config)
        tail = ingest(state, stack.samples[9:], config)
        assert np.array_equal(tail.phases, full.phases[9:])
        assert np.array_equal(tail.short_coherence, full.short_coherence[9:])


class TestStableModes:
    def test_first_mode_keeps_stable_reference_fixed(self):
        rng = np.random.default_rng(11)
        stack = random_stack(rng, 6, 12)
        config = RipeConfig(stable_mode="first", alpha=2.0)
        state = ripe_init(stack.samples[0], config)
        pinned = state.s.copy()
        for n in range(1, 6):
            ripe_step(state, stack.samples[n], config)
            assert np.array_equal(state.s, pinned)

    def test_snapshot_mode_replaces_once(self):
        rng = np.random.default_rng(12)
        stack = random_stack(rng, 8, 12)
        config = RipeConfig(stable_mode="snapshot", snapshot_epoch=4)
        state = ripe_init(stack.samples[0], config)
        for n in range(1, 8):
            ripe_step(state, stack.samples[n], config)
            if state.epoch == 4:
                assert np.array_equal(state.s, config.alpha * state.z)
            if state.epoch == 5:
                after_snapshot = state.s.copy()
        assert np.array_equal(state.s, after_snapshot)


class TestConfigValidation:
    @pytest.mark.parametrize("beta", [0.0, 1.0, -0.2, 1.7])
    def test_beta_range(self, beta):
        with pytest.raises(ValueError):
            RipeConfig(beta=beta)

    def test_alpha_positive(self):
        with pytest.raises(ValueError):
            RipeConfig(alpha=0.0)

    def test_stable_mode_names(self):
        with pytest.raises(ValueError):
            RipeConfig(stable_mode="sometimes")

    def test_digest_tracks_stepping_fields(self):
        assert RipeConfig().digest() == RipeConfig().digest()
        assert RipeConfig(beta=0.7).digest() != RipeConfig().digest()
        assert RipeConfig(calibrate=False).digest() != RipeConfig().digest()


class TestWeights:
    def test_identity_covariance_returns_rhs(self):
        w = optimal_weights(np.eye(2), np.array([0.5, 0.25]))
        assert np.allclose(w.w, [0.5, 0.25], atol=1e-15)

    def test_two_by_two_solve(self):
        cov = np.array([[1.0, 0.5], [0.5, 1.0]])
        rhs = np.array([0.5, 0.25])
        w = optimal_weights(cov, rhs)
        # hand solve: inv(R) r = [0.5, 0]
        assert np.allclose(w.w, [0.5, 0.0], atol=1e-12)

    def test_singular_covariance(self):
        with pytest.raises(SingularCovarianceError):
            optimal_weights(np.ones((3, 3)), np.ones(3))

    def test_imaginary_residual_warns(self):
        cov = np.array([[1.0, 0.3j], [-0.3j, 1.0]])
        rhs = np.array([1.0, 0.0])
        with pytest.warns(UserWarning, match="imaginary"):
            optimal_weights(cov, rhs)

    def test_brute_force_optimality(self):
        # no point on the unit-power shell beats the closed-form weights
        rng = np.random.default_rng(13)
        for _ in range(20):
            m = int(rng.integers(2, 7))
            basis = rng.standard_normal((m, m))
            cov = basis @ basis.T + 0.5 * np.eye(m)
            rhs = rng.standard_normal(m)
            w = optimal_weights(cov, rhs).w
            w = w / math.sqrt(w @ cov @ w)
            best = w @ rhs
            samples = rng.standard_normal((100_000, m))
            power = np.einsum("ij,jk,ik->i", samples, cov, samples)
            gains = (samples @ rhs) / np.sqrt(power)
            assert gains.max() <= best + 1e-9

    def test_joint_weights_reduce_to_plain(self):
        rng = np.random.default_rng(14)
        basis = rng.standard_normal((4, 4))
        cov = basis @ basis.T + np.eye(4)
        rhs = rng.standard_normal(4)
        plain = optimal_weights(cov, rhs)
        joint = joint_optimal_weights(cov, rhs, np.zeros(4))
        assert np.allclose(joint.w, plain.w, atol=1e-14)

    def test_joint_weights_identity_covariance(self):
        ry = np.array([0.4, 0.1, 0.0])
        rs = np.array([0.1, 0.2, 0.3])
        joint = joint_optimal_weights(np.eye(3), ry, rs)
        assert np.allclose(joint.w, ry + rs, atol=1e-15)

    def test_joint_weights_match_dense_solve(self):
        rng = np.random.default_rng(15)
        m = 10
        basis = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
        cov = basis @ basis.conj().T + m * np.eye(m)
        ry = rng.standard_normal(m) + 0j
        rs = rng.standard_normal(m) + 0j
        joint = joint_optimal_weights(cov, ry, rs)
        oracle = np.linalg.solve(cov, ry + rs)
        assert np.allclose(joint.w, oracle.real, atol=1e-10)


class TestWeightedReference:
    def test_selects_most_recent(self):
        past = np.array([[1 + 1j, 2.0], [3.0, 4j], [5.0, 6.0]])
        w = WeightVector(np.array([1.0, 0.0, 0.0]))
        assert np.array_equal(build_weighted_reference(past, w), past[0])

    def test_zero_weights_zero_reference(self):
        past = np.ones((3, 5), dtype=complex)
        w = WeightVector(np.zeros(3))
        assert np.array_equal(build_weighted_reference(past, w), np.zeros(5))

    def test_geometric_weights_equal_unrolled_recursion(self):
        rng = np.random.default_rng(16)
        for _ in range(10):
            m = int(rng.integers(2, 21))
            looks = int(rng.integers(2, 31))
            beta = float(rng.uniform(0.05, 0.95))
            history = rng.standard_normal((m, looks)) + 1j * rng.standard_normal((m, looks))
            # unrolled oracle: z <- beta z + x, oldest first, from zero
            z = np.zeros(looks, dtype=complex)
            for row in history:
                z = beta * z + row
            weights = WeightVector(beta ** np.arange(m - 1, -1, -1, dtype=float))
            built = build_weighted_reference(history, weights)
            assert np.allclose(built, z, rtol=1e-10, atol=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            build_weighted_reference(np.ones((2, 3)), WeightVector(np.ones(3)))
