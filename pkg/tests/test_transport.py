import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from otfwi import (
    NormalizationScheme,
    Trace,
    l2_trace,
    normalize,
    optimal_map,
    w2_frechet,
    w2_squared,
    w_sigma,
)
from otfwi.transport import NormalizedDensity

from conftest import random_signed_signal


def gaussian_density(mu, sigma, lo=-8.0, hi=8.0, nt=32001):
    t = np.linspace(lo, hi, nt)
    dt = t[1] - t[0]
    vals = np.exp(-0.5 * ((t - mu) / sigma) ** 2)
    vals = vals / (vals.sum() * dt)
    return NormalizedDensity(vals, dt, t0=lo)


class TestNormalizationScheme:
    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            NormalizationScheme("cubic")

    def test_bad_hyperparameters(self):
        with pytest.raises(ValueError):
            NormalizationScheme("exponential", b=0.0)
        with pytest.raises(ValueError):
            NormalizationScheme("linear", c=-1.0)

    def test_range_warning(self):
        s = NormalizationScheme("exponential", b=100.0)
        with pytest.warns(UserWarning):
            s.check_range(np.array([1.0]))

    def test_softplus_stable_at_large_argument(self):
        s = NormalizationScheme("softplus", b=1.0)
        assert np.isfinite(s.sigma(np.array([1000.0])))[0]
        assert s.sigma(np.array([1000.0]))[0] == pytest.approx(1000.0)
        assert s.sigma_prime(np.array([1000.0]))[0] == pytest.approx(1.0)


class TestNormalize:
    def test_zero_trace_linear_gives_uniform(self):
        nt, dt = 501, 4e-3
        f = Trace(np.zeros(nt), dt)
        d = normalize(f, NormalizationScheme("linear", b=1.0))
        L = nt * dt  # the quadrature sees nt cells of width dt
        assert np.allclose(d.samples, 1.0 / L)

    def test_unit_mass_all_schemes(self, rng):
        f = random_signed_signal(rng)
        for scheme in (NormalizationScheme("linear", b=2.0),
                       NormalizationScheme("exponential", b=1.0),
                       NormalizationScheme("softplus", b=3.0),
                       NormalizationScheme("square", c=1e-6)):
            d = normalize(f, scheme)
            assert abs(d.samples.sum() * d.dt - 1.0) <= 1e-12

    def test_linear_requires_positivity(self):
        f = Trace(np.array([-2.0, 0.0, 1.0]), 1e-3)
        with pytest.raises(ValueError):
            normalize(f, NormalizationScheme("linear", b=1.0))
        # a positive c can restore positivity
        normalize(f, NormalizationScheme("linear", b=1.0, c=1.5))

    def test_softplus_large_b_approaches_positive_part(self):
        nt, dt = 4001, 5e-4
        t = np.arange(nt) * dt
        arg = (np.pi * 5.0 * (t - 1.0)) ** 2
        f = (1.0 - 2.0 * arg) * np.exp(-arg)
        fplus = np.clip(f, 0.0, None)
        ref = fplus / (fplus.sum() * dt)
        # softplus leaves a log(2)/b floor wherever f <= 0, so the sup-norm
        # deviation from the positive part decays like 1/b; a large sharpness
        # is required before the limit is resolved to three digits
        prev = np.inf
        for bb in (5e2, 5e3, 5e4):
            b = bb / np.max(np.abs(f))
            with pytest.warns(UserWarning):
                d = normalize(Trace(f, dt), NormalizationScheme("softplus", b=b))
            dev = np.max(np.abs(d.samples - ref)) / ref.max()
            assert dev < prev
            prev = dev
        assert prev <= 1e-3


class TestW2Squared:
    def test_identity_is_zero(self, rng):
        d = normalize(random_signed_signal(rng), NormalizationScheme("linear", b=2.0))
        assert w2_squared(d, d) <= 1e-14

    def test_gaussian_closed_form_point(self):
        f = gaussian_density(0.5, 1.2)
        g = gaussian_density(0.0, 1.0)
        assert w2_squared(f, g) == pytest.approx(0.5**2 + 0.2**2, abs=1e-3)

    def test_two_narrow_bumps(self):
        nt = 20001
        t = np.linspace(0.0, 7.0, nt)
        dt = t[1] - t[0]

        def bump(center, width=0.02):
            v = np.exp(-0.5 * ((t - center) / width) ** 2)
            return NormalizedDensity(v / (v.sum() * dt), dt)

        assert w2_squared(bump(2.0), bump(5.0)) == pytest.approx(9.0, rel=0.01)

    def test_time_and_quantile_forms_agree(self):
        # the two discretizations of the same integral differ by O(dt); check
        # first-order convergence of the gap and tight agreement when resolved
        gaps = []
        for nt in (800, 3200, 12800):
            r = np.random.default_rng(0)
            f = normalize(random_signed_signal(r, nt=nt), NormalizationScheme("softplus", b=2.0, c=0.1))
            g = normalize(random_signed_signal(r, nt=nt), NormalizationScheme("softplus", b=2.0, c=0.1))
            a = w2_squared(f, g, method="time")
            b = w2_squared(f, g, method="quantile")
            gaps.append(abs(a - b) / b)
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[1] <= gaps[0] / 2 and gaps[2] <= gaps[1] / 2
        assert gaps[2] <= 2e-4


class TestOptimalMap:
    def test_identity_map(self, rng):
        d = normalize(random_signed_signal(rng), NormalizationScheme("linear", b=2.0, c=0.5))
        plan = optimal_map(d, d)
        assert np.max(np.abs(plan.T - d.times)) <= 1e-10

    def test_shift_map(self):
        nt = 4001
        t = np.linspace(0.0, 4.0, nt)
        dt = t[1] - t[0]

        def dens(c):
            v = np.exp(-0.5 * ((t - c) / 0.15) ** 2) + 1e-9
            return NormalizedDensity(v / (v.sum() * dt), dt)

        s = 0.5
        plan = optimal_map(dens(1.2 + s), dens(1.2))
        mid = np.abs(t - (1.2 + s)) < 0.4
        assert np.max(np.abs(plan.T[mid] - (t[mid] - s))) <= dt

    def test_uniform_dilation_map(self):
        nt = 20001
        t1 = np.linspace(0.0, 1.0, nt)
        dt1 = t1[1] - t1[0]
        f = NormalizedDensity(np.full(nt, 1.0 / (nt * dt1)), dt1)
        t2 = np.linspace(0.0, 2.0, nt)
        dt2 = t2[1] - t2[0]
        g = NormalizedDensity(np.full(nt, 1.0 / (nt * dt2)), dt2)
        plan = optimal_map(f, g)
        interior = (t1 > 0.01) & (t1 < 0.99)
        assert np.max(np.abs(plan.T[interior] - 2.0 * t1[interior])) <= 1e-3

    def test_plan_invariants(self, rng):
        for _ in range(5):
            f = normalize(random_signed_signal(rng), NormalizationScheme("exponential", b=1.0, c=0.2))
            g = normalize(random_signed_signal(rng), NormalizationScheme("exponential", b=1.0, c=0.2))
            plan = optimal_map(f, g)
            assert plan.F[-1] == pytest.approx(1.0, abs=1e-12)
            assert np.all(np.diff(plan.F) >= 0)
            assert np.all(np.diff(plan.G) >= 0)
            assert np.all(np.diff(plan.T) >= -1e-12)  # monotone optimal map
            # pushforward G(T(t)) = F(t) away from the boundary: levels below
            # G at the first grid node have no preimage on the discrete axis
            Gu, j = np.unique(plan.G, return_index=True)
            GT = np.interp(plan.T, g.times[j], Gu)
            interior = (plan.F >= Gu[0]) & (plan.F <= Gu[-1])
            assert np.max(np.abs(GT[interior] - plan.F[interior])) <= 1e-8


class TestFrechet:
    def test_zero_at_identity(self, rng):
        f = random_signed_signal(rng)
        out = w2_frechet(f, f, NormalizationScheme("linear", b=2.0))
        assert np.max(np.abs(out.samples)) <= 1e-12

    @pytest.mark.parametrize("scheme", [
        NormalizationScheme("linear", b=2.0),
        NormalizationScheme("exponential", b=1.0),
        NormalizationScheme("softplus", b=1.0),
    ])
    def test_directional_derivative(self, scheme, rng):
        nt = 3000
        for _ in range(5):
            f = random_signed_signal(rng, nt=nt)
            g = random_signed_signal(rng, nt=nt)
            out = w2_frechet(f, g, scheme)
            for _ in range(20):
                df = random_signed_signal(rng, nt=nt).samples
                pred = np.sum(out.samples * df) * f.dt
                if abs(pred) >= 0.01 * np.sum(np.abs(out.samples * df)) * f.dt:
                    break
            eps = 1e-6

            def val(x):
                d = normalize(Trace(x, f.dt), scheme)
                return w2_squared(d, normalize(g, scheme))

            fd = (val(f.samples + eps * df) - val(f.samples - eps * df)) / (2 * eps)
            assert fd == pytest.approx(pred, rel=1e-4, abs=1e-12)

    def test_c_shifts_energy_to_low_frequencies(self):
        nt, dt = 2000, 1e-3
        t = np.arange(nt) * dt
        arg = (np.pi * 10.0 * (t - 0.5)) ** 2
        f = (1.0 - 2.0 * arg) * np.exp(-arg)
        g = np.roll(f, 80)
        peak = np.max(np.abs(g))

        def low_fraction(c):
            out = w2_frechet(Trace(f, dt), Trace(g, dt),
                             NormalizationScheme("linear", b=1.5 * peak, c=c))
            spec = np.abs(np.fft.rfft(out.samples)) ** 2
            freqs = np.fft.rfftfreq(nt, d=dt)
            return spec[freqs < 10.0].sum() / spec.sum()

        assert low_fraction(1.0 / (nt * dt)) > low_fraction(0.0)


class TestL2Trace:
    def test_identity(self, rng):
        f = random_signed_signal(rng)
        val, adj = l2_trace(f, f)
        assert val == 0.0
        assert np.all(adj.samples == 0.0)

    def test_constant_offset_value(self):
        nt, dt = 1000, 2e-3
        g = Trace(np.zeros(nt), dt)
        f = Trace(np.ones(nt), dt)
        L = nt * dt
        val, _ = l2_trace(f, g)
        assert val == pytest.approx(L / 2.0)

    def test_directional_derivative(self, rng):
        f = random_signed_signal(rng)
        g = random_signed_signal(rng)
        _, adj = l2_trace(f, g)
        df = random_signed_signal(rng).samples
        eps = 1e-7
        vp, _ = l2_trace(Trace(f.samples + eps * df, f.dt), g)
        vm, _ = l2_trace(Trace(f.samples - eps * df, f.dt), g)
        fd = (vp - vm) / (2 * eps)
        assert fd == pytest.approx(np.sum(adj.samples * df) * f.dt, rel=1e-8)


class TestWSigmaMetric:
    SCHEMES = (NormalizationScheme("linear", b=2.0),
               NormalizationScheme("exponential", b=1.5),
               NormalizationScheme("softplus", b=1.5))

    def test_metric_axioms_random_triples(self, rng):
        for scheme in self.SCHEMES:
            for _ in range(30):
                f = random_signed_signal(rng)
                g = random_signed_signal(rng)
                h = random_signed_signal(rng)
                dfg = w_sigma(f, g, scheme)
                assert dfg >= 0.0
                assert dfg == w_sigma(g, f, scheme)  # exact symmetry
                assert w_sigma(f, f, scheme) <= 1e-10
                slack = dfg - (w_sigma(f, h, scheme) + w_sigma(h, g, scheme))
                assert slack <= 1e-12

    def test_identity_of_indiscernibles(self, rng):
        scheme = NormalizationScheme("linear", b=2.0)
        f = random_signed_signal(rng)
        g = Trace(f.samples + 0.05, f.dt)
        # distinguishable signals are separated ...
        assert w_sigma(f, g, scheme) > 1e-10
        # ... and a vanishing distance pins the signals together
        assert w_sigma(f, f, scheme) < 1e-10

    def test_two_sided_variant(self, rng):
        scheme = NormalizationScheme("softplus", b=2.0)
        f = random_signed_signal(rng)
        g = random_signed_signal(rng)
        v = w_sigma(f, g, scheme, two_sided=True)
        fneg = Trace(-f.samples, f.dt)
        gneg = Trace(-g.samples, g.dt)
        ref = np.sqrt(0.5 * (w_sigma(f, g, scheme) ** 2 + w_sigma(fneg, gneg, scheme) ** 2))
        assert v == pytest.approx(ref, rel=1e-12)


class TestTransportInequalities:
    def test_subadditivity_under_buffer(self, rng):
        nt = 800
        for _ in range(10):
            f = np.abs(random_signed_signal(rng, nt=nt).samples)
            g = np.abs(random_signed_signal(rng, nt=nt).samples)
            dt = 2.0 / nt
            L = nt * dt
            f = f / (f.sum() * dt)
            g = g / (g.sum() * dt)
            c = float(rng.uniform(0.1, 2.0))
            fd = NormalizedDensity(f, dt)
            gd = NormalizedDensity(g, dt)
            fb = NormalizedDensity((f + c) / (1.0 + c * L), dt)
            gb = NormalizedDensity((g + c) / (1.0 + c * L), dt)
            lhs = w2_squared(fb, gb)
            # buffered densities are the mixture (1/(1+cL)) f + (cL/(1+cL)) U,
            # and transport cost is jointly convex in the pair of marginals, so
            # the distance contracts at least linearly in the mixture weight
            rhs = w2_squared(fd, gd) / (1.0 + c * L)
            assert lhs <= rhs + 1e-10

    def test_map_continuity_with_buffer(self):
        # two separated bumps: at c = 0 the map jumps across the gap, with
        # c > 0 the discrete modulus of continuity collapses to O(dt)
        nt = 4000
        t = np.linspace(0.0, 4.0, nt)
        dt = t[1] - t[0]

        def two_bumps(c1, c2, c):
            v = (np.exp(-0.5 * ((t - c1) / 0.05) ** 2)
                 + np.exp(-0.5 * ((t - c2) / 0.05) ** 2)) + c
            return NormalizedDensity(v / (v.sum() * dt), dt)

        f = two_bumps(1.0, 3.0, 0.0)
        g = two_bumps(1.2, 2.6, 0.0)
        jump0 = np.max(np.abs(np.diff(optimal_map(f, g).T)))
        fc = two_bumps(1.0, 3.0, 1.0)
        gc = two_bumps(1.2, 2.6, 1.0)
        jump1 = np.max(np.abs(np.diff(optimal_map(fc, gc).T)))
        assert jump0 > 0.1          # O(gap) jump without buffer
        assert jump1 <= 10.0 * dt * 2.0


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_map_monotone_property(seed):
    rng = np.random.default_rng(seed)
    scheme = NormalizationScheme("softplus", b=1.0, c=0.05)
    f = normalize(random_signed_signal(rng), scheme)
    g = normalize(random_signed_signal(rng), scheme)
    plan = optimal_map(f, g)
    assert np.all(np.diff(plan.T) >= -1e-12)
