import cmath
import math

import numpy as np
import pytest

from ripekit import (
    SICILY_C_BAND,
    AcquisitionTimeline,
    CoherenceComponent,
    InvalidModelError,
    TemporalCoherenceModel,
    covariance_matrix,
    get_preset,
    phase_flat,
)


def preset_oracle(dt: float) -> complex:
    """Term-by-term scalar evaluation of the built-in C-band model."""
    value = (
        0.18 * math.exp(-abs(dt) / 11.0) * cmath.exp(1j * 0.03 * dt)
        + 0.25 * math.exp(-abs(dt) / 50.0) * cmath.exp(1j * 0.002 * dt)
        + 0.13
    )
    if dt == 0.0:
        value += 0.44
    return value


def random_model(rng: np.random.Generator, max_components: int = 4) -> TemporalCoherenceModel:
    k = rng.integers(1, max_components + 1)
    raw = rng.uniform(0.05, 1.0, size=k + 1)
    fractions = raw / raw.sum()
    comps = []
    for i in range(k):
        decay = math.inf if rng.random() < 0.2 else float(rng.uniform(3.0, 200.0))
        comps.append(
            CoherenceComponent(
                amplitude=float(fractions[i]),
                decay_days=decay,
                phase_rate=float(rng.uniform(-0.05, 0.05)),
            )
        )
    # push the rounding slack into the nugget so the sum is exact
    nugget = 1.0 - math.fsum(c.amplitude for c in comps)
    return TemporalCoherenceModel(components=tuple(comps), nugget=nugget)


class TestModelValidation:
    def test_preset_parameters(self):
        model = get_preset("sicily-c-band")
        amps = [c.amplitude for c in model.components]
        decays = [c.decay_days for c in model.components]
        rates = [c.phase_rate for c in model.components]
        assert amps == [0.18, 0.25, 0.13]
        assert decays == [11.0, 50.0, math.inf]
        assert rates == [0.03, 0.002, 0.0]
        assert model.nugget == 0.44

    def test_amplitude_sum_violation_is_an_error(self):
        with pytest.raises(InvalidModelError, match="sum to 1"):
            TemporalCoherenceModel(
                components=(CoherenceComponent(0.5, 10.0),), nugget=0.4
            )

    def test_amplitude_out_of_range(self):
        with pytest.raises(InvalidModelError):
            CoherenceComponent(amplitude=1.2, decay_days=10.0)
        with pytest.raises(InvalidModelError):
            CoherenceComponent(amplitude=-0.1, decay_days=10.0)

    def test_nonpositive_decay(self):
        with pytest.raises(InvalidModelError):
            CoherenceComponent(amplitude=0.5, decay_days=0.0)

    def test_unknown_preset(self):
        with pytest.raises(InvalidModelError, match="sicily-c-band"):
            get_preset("nope")


class TestCoherence:
    def test_zero_separation_is_exactly_one(self):
        assert SICILY_C_BAND.coherence(0.0) == 1.0 + 0.0j

    def test_long_separation_approaches_stable_floor(self):
        val = SICILY_C_BAND.coherence(1e6)
        assert val == pytest.approx(0.13 + 0.0j, abs=1e-12)

    def test_preset_at_50_days_matches_oracle(self):
        expected = preset_oracle(50.0)
        # frozen from the oracle
        assert expected == pytest.approx(0.221645556054056 + 0.011087641259407355j)
        assert SICILY_C_BAND.coherence(50.0) == pytest.approx(expected, abs=1e-15)

    @pytest.mark.parametrize("dt", [0.0, 1.0, 6.0, 11.0, 50.0, 123.4, 1000.0])
    def test_hermitian_symmetry(self, dt):
        plus = SICILY_C_BAND.coherence(dt)
        minus = SICILY_C_BAND.coherence(-dt)
        assert minus == pytest.approx(plus.conjugate(), abs=1e-15)

    def test_magnitude_bounded_by_one(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            model = random_model(rng)
            dts = rng.uniform(-500, 500, size=200)
            assert np.all(np.abs(model.coherence(dts)) <= 1.0 + 1e-12)

    def test_vectorized_matches_scalar(self):
        dts = np.array([-30.0, 0.0, 5.5, 80.0])
        vec = SICILY_C_BAND.coherence(dts)
        for i, dt in enumerate(dts):
            assert vec[i] == pytest.approx(SICILY_C_BAND.coherence(float(dt)), abs=1e-15)


class TestCovarianceMatrix:
    def test_single_epoch(self):
        cov = covariance_matrix(SICILY_C_BAND, AcquisitionTimeline((0.0,)))
        assert cov.shape == (1, 1)
        assert cov[0, 0] == 1.0 + 0.0j

    def test_two_epochs_match_direct_evaluation(self):
        cov = covariance_matrix(SICILY_C_BAND, AcquisitionTimeline((0.0, 11.0)))
        expected = preset_oracle(11.0)
        assert cov[0, 0] == 1.0 and cov[1, 1] == 1.0
        # entry (0, 1) is gamma(t_0 - t_1) = conj(gamma(11))
        assert cov[0, 1] == pytest.approx(expected.conjugate(), abs=1e-15)
        assert cov[1, 0] == pytest.approx(expected, abs=1e-15)

    def test_hermitian_to_machine_precision(self):
        timeline = AcquisitionTimeline.regular(25, 6.0)
        cov = covariance_matrix(SICILY_C_BAND, timeline)
        assert np.max(np.abs(cov - cov.conj().T)) < 1e-14

    def test_random_models_are_psd(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            model = random_model(rng)
            n = int(rng.integers(2, 31))
            times = np.cumsum(rng.uniform(1.0, 24.0, size=n))
            cov = covariance_matrix(model, AcquisitionTimeline(tuple(times)))
            eigmin = float(np.linalg.eigvalsh(cov).min())
            assert eigmin >= -1e-10

    def test_unit_diagonal(self):
        cov = covariance_matrix(SICILY_C_BAND, AcquisitionTimeline.regular(10, 6.0))
        assert np.allclose(np.diag(cov), 1.0, atol=1e-15)


class TestTimeline:
    def test_rejects_non_increasing(self):
        with pytest.raises(ValueError):
            AcquisitionTimeline((0.0, 6.0, 6.0))
        with pytest.raises(ValueError):
            AcquisitionTimeline((6.0, 0.0))

    def test_regular_spacing(self):
        tl = AcquisitionTimeline.regular(4, 6.0)
        assert tl.times == (0.0, 6.0, 12.0, 18.0)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            AcquisitionTimeline(())


def test_phase_flat_strips_ramps_only():
    flat = phase_flat(SICILY_C_BAND)
    assert all(c.phase_rate == 0.0 for c in flat.components)
    assert [c.amplitude for c in flat.components] == [0.18, 0.25, 0.13]
    assert flat.nugget == 0.44
    cov = covariance_matrix(flat, AcquisitionTimeline.regular(8, 6.0))
    assert np.max(np.abs(cov.imag)) == 0.0
