import numpy as np
import pytest

from drds.noise import (
    DrydenChannel,
    DrydenParams,
    dryden_autocovariance,
    dryden_covariance,
    dryden_psd,
    length_scales,
    turbulence_intensities,
)


def _make_params(V0: float = 10.0, **kwargs: object) -> DrydenParams:
    return DrydenParams(V0=V0, z=10.0, b=0.34, dt=0.5, **kwargs)  # type: ignore[arg-type]


class TestDrydenParams:
    def test_nonpositive_speed_rejected(self) -> None:
        with pytest.raises(ValueError, match="V0 must be > 0"):
            _make_params(V0=0.0)

    def test_channels_required(self) -> None:
        with pytest.raises(ValueError, match="at least one"):
            _make_params(channels=())

    def test_intensities_scale_with_speed(self) -> None:
        sigma = turbulence_intensities(_make_params(V0=20.0))

        assert sigma["w"] == pytest.approx(2.0)
        assert sigma["u"] == sigma["v"] > sigma["w"]

    def test_vertical_length_is_altitude(self) -> None:
        assert length_scales(_make_params())["w"] == 10.0


class TestDrydenPsd:
    def test_longitudinal_level_at_zero(self) -> None:
        params = _make_params()
        sigma, L = turbulence_intensities(params)["u"], length_scales(params)["u"]

        value = dryden_psd(DrydenChannel.U, 0.0, params)

        assert float(value) == pytest.approx(2.0 * sigma**2 * L / (np.pi * params.V0))

    @pytest.mark.parametrize("channel", [DrydenChannel.Q, DrydenChannel.R])
    def test_rate_channels_vanish_at_zero(self, channel: DrydenChannel) -> None:
        assert float(dryden_psd(channel, 0.0, _make_params())) == 0.0

    def test_channel_names_accepted(self) -> None:
        params = _make_params()

        assert float(dryden_psd("w_g", 1.0, params)) == float(
            dryden_psd(DrydenChannel.W, 1.0, params)
        )

    def test_unknown_channel_rejected(self) -> None:
        with pytest.raises(ValueError, match="unknown Dryden channel"):
            dryden_psd("x_g", 1.0, _make_params())

    def test_negative_frequency_rejected(self) -> None:
        with pytest.raises(ValueError, match=">= 0"):
            dryden_psd(DrydenChannel.U, np.array([-1.0, 1.0]), _make_params())


class TestDrydenAutocovariance:
    @pytest.mark.parametrize("V0", [1.0, 10.0])
    @pytest.mark.parametrize("channel", [DrydenChannel.U, DrydenChannel.V, DrydenChannel.W])
    def test_zero_lag_recovers_variance(self, V0: float, channel: DrydenChannel) -> None:
        params = _make_params(V0=V0)
        sigma = turbulence_intensities(params)[channel.value[0]]

        variance = float(dryden_autocovariance(channel, np.array([0.0]), params)[0])

        assert variance == pytest.approx(sigma**2, rel=1e-2)

    @pytest.mark.slow
    @pytest.mark.parametrize("V0", [1.0, 5.0, 20.0, 50.0])
    @pytest.mark.parametrize("channel", [DrydenChannel.U, DrydenChannel.V, DrydenChannel.W])
    def test_zero_lag_over_speed_range(self, V0: float, channel: DrydenChannel) -> None:
        params = _make_params(V0=V0)
        sigma = turbulence_intensities(params)[channel.value[0]]

        variance = float(dryden_autocovariance(channel, np.array([0.0]), params)[0])

        assert variance == pytest.approx(sigma**2, rel=2e-2)

    def test_coarse_grid_misses_slow_transverse_spectrum(self) -> None:
        # At V0 = 1 the transverse poles sit at about 0.0066 rad/s from the real axis.
        coarse = _make_params(V0=1.0, grid_points=20_000)
        fine = _make_params(V0=1.0)
        sigma = turbulence_intensities(fine)["v"]
        lag = np.array([0.0])

        coarse_ratio = float(dryden_autocovariance(DrydenChannel.V, lag, coarse)[0]) / sigma**2
        fine_ratio = float(dryden_autocovariance(DrydenChannel.V, lag, fine)[0]) / sigma**2

        assert abs(coarse_ratio - 1.0) > 2e-2
        assert fine_ratio == pytest.approx(1.0, abs=1e-3)

    def test_longitudinal_correlation_decays(self) -> None:
        params = _make_params()
        sigma, L = turbulence_intensities(params)["u"], length_scales(params)["u"]

        lag = np.array([10.0 * L / params.V0])

        late = float(dryden_autocovariance(DrydenChannel.U, lag, params)[0])

        assert abs(late) <= 1e-2 * sigma**2


class TestDrydenCovariance:
    def test_stacked_covariance_is_psd(self) -> None:
        params = _make_params(grid_points=20_001)

        Sigma = dryden_covariance(params, horizon=4)

        assert Sigma.shape == (24, 24)
        np.testing.assert_allclose(Sigma, Sigma.T)
        assert np.linalg.eigvalsh(Sigma)[0] >= -1e-12

    def test_channels_uncorrelated(self) -> None:
        params = _make_params(channels=(DrydenChannel.U, DrydenChannel.W), grid_points=20_001)

        Sigma = dryden_covariance(params, horizon=3, project=False)

        assert not Sigma[0::2, 1::2].any()

    def test_toeplitz_in_time(self) -> None:
        params = _make_params(channels=(DrydenChannel.U,), grid_points=20_001)

        Sigma = dryden_covariance(params, horizon=4, project=False)

        np.testing.assert_allclose(np.diag(Sigma), Sigma[0, 0])
        np.testing.assert_allclose(np.diag(Sigma, 1), Sigma[0, 1])

    def test_angular_channels_scaled_by_step(self) -> None:
        channels = (DrydenChannel.P,)
        scaled = dryden_covariance(
            _make_params(channels=channels, grid_points=20_001), horizon=1, project=False
        )
        raw = dryden_covariance(
            _make_params(channels=channels, grid_points=20_001, scale_angular=False),
            horizon=1,
            project=False,
        )

        assert scaled[0, 0] == pytest.approx(0.25 * raw[0, 0])

    def test_horizon_must_be_positive(self) -> None:
        with pytest.raises(ValueError, match="horizon"):
            dryden_covariance(_make_params(), horizon=0)
