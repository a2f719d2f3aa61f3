import numpy as np
import pytest

from otfwi import Grid2D, ShotGather, Trace, VelocityModel, model_error, ricker
from otfwi.gridcore import Acquisition, Wavelet


class TestGrid2D:
    def test_shape_and_extent(self):
        g = Grid2D(11, 21, 10.0, 5.0)
        assert g.shape == (11, 21)
        assert g.extent == (100.0, 100.0)

    @pytest.mark.parametrize("kw", [
        dict(nx=2, nz=3, dx=1.0, dz=1.0),
        dict(nx=3, nz=2, dx=1.0, dz=1.0),
        dict(nx=3, nz=3, dx=0.0, dz=1.0),
        dict(nx=3, nz=3, dx=1.0, dz=-1.0),
    ])
    def test_invalid_grid_rejected(self, kw):
        with pytest.raises(ValueError):
            Grid2D(**kw)

    def test_nearest_node(self):
        g = Grid2D(11, 11, 10.0, 10.0)
        assert g.nearest_node(34.0, 78.0) == (3, 8)
        assert g.nearest_node(35.0, 0.0)[0] in (3, 4)


class TestVelocityModel:
    def test_velocity_roundtrip(self):
        g = Grid2D(4, 4, 1.0, 1.0)
        m = VelocityModel.from_velocity(g, np.full(g.shape, 2500.0))
        assert np.allclose(m.velocity, 2500.0)
        assert np.allclose(m.m, 1.0 / 2500.0**2)

    def test_nonpositive_m_rejected(self):
        g = Grid2D(3, 3, 1.0, 1.0)
        with pytest.raises(ValueError):
            VelocityModel(g, np.zeros(g.shape))

    def test_clipping_to_band(self):
        g = Grid2D(3, 3, 1.0, 1.0)
        v = np.full(g.shape, 50.0)  # below the default 100 m/s floor
        m = VelocityModel.from_velocity(g, v).clipped()
        assert np.all(m.velocity >= 100.0)


class TestRicker:
    def test_peak_is_one_at_t0(self):
        w = ricker(5.0, 0.3, 1000, 1e-3)
        k = int(round(0.3 / 1e-3))
        assert w.samples[k] == pytest.approx(1.0, abs=1e-14)
        assert np.max(np.abs(w.samples)) == pytest.approx(1.0, abs=1e-14)

    def test_decay_to_zero(self):
        w = ricker(5.0, 0.3, 2000, 1e-3)
        assert abs(w.samples[-1]) < 1e-12

    def test_discrete_mean_near_zero(self):
        # the analytic integral of a Ricker wavelet is exactly zero
        w = ricker(10.0, 0.1, 1000, 1e-3)
        assert abs(np.mean(w.samples)) < 1e-3

    def test_symmetric_about_t0(self):
        w = ricker(5.0, 0.4, 1001, 1e-3)
        k = 400
        n = 300
        assert np.allclose(w.samples[k - n:k], w.samples[k + n:k:-1], atol=1e-12)

    @pytest.mark.parametrize("kw", [
        dict(peak_freq=0.0, t0=0.0, nt=100, dt=1e-3),
        dict(peak_freq=5.0, t0=0.0, nt=1, dt=1e-3),
        dict(peak_freq=5.0, t0=0.0, nt=100, dt=0.0),
    ])
    def test_invalid_args(self, kw):
        with pytest.raises(ValueError):
            ricker(**kw)


class TestModelError:
    def grid(self):
        return Grid2D(3, 3, 1.0, 1.0)

    def test_zero_at_truth(self):
        g = self.grid()
        m = VelocityModel.from_velocity(g, np.full(g.shape, 2000.0))
        assert model_error(m, m) == 0.0

    def test_normalized_start_is_one(self):
        g = self.grid()
        m0 = VelocityModel.from_velocity(g, np.full(g.shape, 2000.0))
        mt = VelocityModel.from_velocity(g, np.full(g.shape, 3000.0))
        assert model_error(m0, mt, m0) == pytest.approx(1.0)

    def test_frobenius_value(self):
        g = Grid2D(3, 3, 1.0, 1.0)
        base = np.ones(g.shape)
        diff = np.zeros(g.shape)
        diff[0, 0] = diff[1, 1] = 1.0
        a = VelocityModel(g, base)
        b = VelocityModel(g, base + diff)
        assert model_error(a, b) == pytest.approx(np.sqrt(2.0))

    def test_grid_mismatch(self):
        a = VelocityModel(Grid2D(3, 3, 1.0, 1.0), np.ones((3, 3)))
        b = VelocityModel(Grid2D(4, 3, 1.0, 1.0), np.ones((4, 3)))
        with pytest.raises(ValueError):
            model_error(a, b)


class TestTraceAndGather:
    def test_trace_invariants(self):
        with pytest.raises(ValueError):
            Trace(np.array([1.0]), 1e-3)
        with pytest.raises(ValueError):
            Trace(np.array([1.0, np.nan]), 1e-3)

    def test_gather_roundtrip_traces(self):
        data = np.arange(12.0).reshape(3, 4)
        g = ShotGather(data, 1e-3, source_index=2)
        assert g.n_receivers == 3 and g.nt == 4
        tr = g.trace(1)
        assert np.array_equal(tr.samples, data[1])
        g2 = ShotGather.from_traces([g.trace(i) for i in range(3)], source_index=2)
        assert np.array_equal(g2.data, data)

    def test_wavelet_coverage_invariant(self):
        # nt*dt must cover at least 2/peak_freq past t0
        with pytest.raises(ValueError):
            Wavelet(samples=np.zeros(100), dt=1e-3, t0=0.0, peak_freq=5.0)


class TestAcquisition:
    def test_positions_validated(self):
        g = Grid2D(11, 11, 10.0, 10.0)
        acq = Acquisition(sources=((50.0, 0.0),), receivers=((0.0, 0.0), (100.0, 0.0)),
                          record_time=0.5, dt_record=1e-3)
        acq.validate_against(g)  # on-boundary is fine
        bad = Acquisition(sources=((150.0, 0.0),), receivers=((0.0, 0.0),),
                          record_time=0.5, dt_record=1e-3)
        with pytest.raises(ValueError):
            bad.validate_against(g)
