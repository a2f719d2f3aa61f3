import numpy as np
import pytest

from otfwi.gridcore import Acquisition, Grid2D, ShotGather, Trace, ricker
from otfwi.misfit import MisfitKind, assemble_adjoint_sources, evaluate, trace_misfit
from otfwi.models import constant, layered
from otfwi.transport import NormalizationScheme
from otfwi.wavesim import SimConfig, simulate_forward_multi

L2 = MisfitKind("L2")
W2 = MisfitKind("W2_trace", NormalizationScheme("linear", b=0.0, c=2.0))


def tiny_problem(nshot=2, nx=31, nz=31, nt=241):
    grid = Grid2D(nx, nz, 10.0, 10.0)
    cfg = SimConfig(dt=1e-3, nt=nt)
    true = layered(grid, v1=1900.0, v2=2150.0, z_interface=150.0)
    init = constant(grid, 2000.0)
    xs = np.linspace(50.0, (nx - 1) * 10.0 - 50.0, nshot)
    acq = Acquisition(
        sources=tuple((x, 0.0) for x in xs),
        receivers=tuple((x, 0.0) for x in np.linspace(0.0, (nx - 1) * 10.0, 16)),
        record_time=(nt - 1) * cfg.dt, dt_record=cfg.dt,
    )
    src = ricker(15.0, 0.1, nt, cfg.dt)
    obs, _ = simulate_forward_multi(true, acq, src, list(range(nshot)), cfg)
    return grid, cfg, true, init, acq, src, obs


class TestMisfitKind:
    def test_validation(self):
        with pytest.raises(ValueError):
            MisfitKind("huber")
        with pytest.raises(ValueError):
            MisfitKind("L2", NormalizationScheme("linear", c=1.0))
        with pytest.raises(ValueError):
            MisfitKind("W2_trace")


class TestTraceMisfit:
    def test_zero_residual(self, rng):
        f = Trace(np.clip(rng.standard_normal(300), -1.9, None), 1e-3)
        for kind in (L2, W2):
            val, adj = trace_misfit(f, f, kind)
            assert val == pytest.approx(0.0, abs=1e-16)
            assert np.max(np.abs(adj.samples)) <= 1e-10

    def test_l2_value_and_adjoint_are_half_square_and_residual(self, rng):
        f = Trace(rng.standard_normal(300), 1e-3)
        g = Trace(rng.standard_normal(300), 1e-3)
        val, adj = trace_misfit(f, g, L2)
        assert val == pytest.approx(0.5 * np.sum((f.samples - g.samples) ** 2) * 1e-3)
        assert np.allclose(adj.samples, f.samples - g.samples)

    @pytest.mark.parametrize("kind", [L2, W2], ids=["L2", "W2"])
    def test_adjoint_matches_directional_derivative(self, kind, rng):
        # <dJ/df, h> dt against a centered difference of the misfit value
        f = Trace(np.sin(2 * np.pi * 4 * np.linspace(0, 1, 400)) *
                  np.exp(-4 * (np.linspace(0, 1, 400) - 0.5) ** 2), 1 / 399)
        g = Trace(np.roll(f.samples, 25), f.dt)
        h = rng.standard_normal(400)
        val, adj = trace_misfit(f, g, kind)
        pred = float(np.sum(adj.samples * h) * f.dt)
        eps = 1e-6
        vp, _ = trace_misfit(Trace(f.samples + eps * h, f.dt), g, kind)
        vm, _ = trace_misfit(Trace(f.samples - eps * h, f.dt), g, kind)
        fd = (vp - vm) / (2 * eps)
        assert pred == pytest.approx(fd, rel=1e-4, abs=1e-12)

    def test_w2_adjoint_has_low_frequency_content(self):
        # the transport adjoint integrates the residual, so its spectrum is
        # weighted toward low frequencies relative to the L2 residual
        t = np.linspace(0, 1, 800)
        f = Trace(np.sin(2 * np.pi * 12 * t) * np.exp(-8 * (t - 0.5) ** 2), t[1])
        g = Trace(np.roll(f.samples, 30), f.dt)
        _, adj_w2 = trace_misfit(f, g, W2)
        _, adj_l2 = trace_misfit(f, g, L2)

        def low_fraction(x):
            # energy below 8 Hz, beneath the 12 Hz carrier of the residual
            s = np.abs(np.fft.rfft(x)) ** 2
            freqs = np.fft.rfftfreq(len(x), t[1])
            return s[freqs < 8.0].sum() / s.sum()

        assert low_fraction(adj_w2.samples) > 2.0 * low_fraction(adj_l2.samples)


class TestAssemble:
    def test_shape_mismatch_rejected(self, rng):
        a = ShotGather(rng.standard_normal((3, 50)), 1e-3)
        b = ShotGather(rng.standard_normal((4, 50)), 1e-3)
        with pytest.raises(ValueError):
            assemble_adjoint_sources(a, b, L2)

    def test_weight_and_dt_folded_in(self, rng):
        a = ShotGather(rng.standard_normal((3, 50)), 1e-3)
        b = ShotGather(rng.standard_normal((3, 50)), 1e-3)
        total, gath = assemble_adjoint_sources(a, b, L2, weight=2.5)
        assert np.allclose(gath.data, 2.5 * 1e-3 * (a.data - b.data))
        assert total == pytest.approx(2.5 * 0.5 * np.sum((a.data - b.data) ** 2) * 1e-3)


class TestEvaluate:
    def test_zero_at_truth_and_shot_additivity(self):
        grid, cfg, true, init, acq, src, obs = tiny_problem()
        ev = evaluate(true, obs, acq, src, cfg, L2)
        assert ev.J <= 1e-18
        assert np.max(np.abs(ev.gradient.values)) <= 1e-14
        ev1 = evaluate(init, obs, acq, src, cfg, L2, shot_chunk=1)
        ev8 = evaluate(init, obs, acq, src, cfg, L2, shot_chunk=8)
        assert ev1.J == pytest.approx(ev8.J, rel=1e-12)
        assert np.allclose(ev1.gradient.values, ev8.gradient.values, rtol=1e-9, atol=1e-20)
        assert ev1.J == pytest.approx(sum(ev1.per_shot_J), rel=1e-12)

    @pytest.mark.parametrize("kind", ["L2", "W2"])
    def test_gradient_matches_finite_differences(self, kind):
        grid, cfg, true, init, acq, src, obs = tiny_problem(nshot=1)
        if kind == "W2":
            amax = max(float(np.abs(g.data).max()) for g in obs)
            mk = MisfitKind("W2_trace", NormalizationScheme("linear", b=0.0, c=amax))
        else:
            mk = L2
        ev = evaluate(init, obs, acq, src, cfg, mk)
        g = ev.gradient.values
        # probe cells where the gradient is a meaningful fraction of its peak
        order = np.argsort(np.abs(g).ravel())[::-1]
        probes = [np.unravel_index(k, g.shape) for k in order[[0, 3, 10]]]
        for ix, iz in probes:
            eps = 1e-7 * abs(init.m[ix, iz])
            mp = init.m.copy(); mp[ix, iz] += eps
            mm = init.m.copy(); mm[ix, iz] -= eps
            jp = evaluate(init.with_m(mp), obs, acq, src, cfg, mk).J
            jm = evaluate(init.with_m(mm), obs, acq, src, cfg, mk).J
            fd = (jp - jm) / (2 * eps)
            assert g[ix, iz] == pytest.approx(fd, rel=5e-2)

    def test_source_mask_zeroes_gradient_near_sources(self):
        grid, cfg, true, init, acq, src, obs = tiny_problem(nshot=1)
        ev = evaluate(init, obs, acq, src, cfg, L2, mask_source_radius=2)
        ix, iz = grid.nearest_node(*acq.sources[0])
        assert np.all(ev.gradient.values[max(ix - 2, 0):ix + 3, max(iz - 2, 0):iz + 3] == 0.0)
        assert np.any(ev.gradient.values != 0.0)

    def test_observed_count_checked(self):
        grid, cfg, true, init, acq, src, obs = tiny_problem(nshot=2)
        with pytest.raises(ValueError):
            evaluate(init, obs[:1], acq, src, cfg, L2)
