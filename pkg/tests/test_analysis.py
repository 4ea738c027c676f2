import numpy as np
import pytest
from scipy.integrate import solve_ivp

from memsynapse.analysis import (
    PulseDeltaSeries,
    Regime,
    alpha,
    classify_regime,
    linearity_r2,
    oracle_deviation,
    oracle_run,
    oracle_series_const_v,
    oracle_single_const_v,
    per_pulse_deltas,
    presaturation_window,
)
from memsynapse.circuit import PulseTrain, SolverConfig, simulate
from memsynapse.device import MemristorParams, Model
from memsynapse.errors import (
    OutOfValidity,
    StimulusMismatch,
    TooFewPulses,
    TooFewSamples,
    ValidationError,
)

from conftest import lone_device, ratio_pair

STIM = PulseTrain(1.0, 1e-3, 2e-3, 50)


def charge_ode(resistance, v, t_end):
    """Independent reference: integrate dq/dt = v / M(q) to tight tolerance."""
    sol = solve_ivp(lambda t, q: [v / resistance(q[0])], (0.0, t_end), [0.0],
                    rtol=1e-12, atol=1e-22)
    return sol.y[0, -1]


def series(deltas, saturated=None):
    n = len(deltas)
    return PulseDeltaSeries(tuple(range(n)), tuple(deltas), tuple(saturated or [False] * n))


class TestAlpha:
    def test_table_rows(self):
        assert alpha(*ratio_pair("alpha_small").devices) == pytest.approx(0.009901, rel=1e-4)
        assert alpha(*ratio_pair("alpha_small").devices) == 9900 / 999900
        assert alpha(*ratio_pair("alpha_one").devices) == 1.0
        assert alpha(*ratio_pair("alpha_large").devices) == pytest.approx(101.0, rel=1e-12)

    @pytest.mark.parametrize("scale", [1e-3, 0.5, 7.0, 1e3])
    def test_scale_invariance(self, scale):
        m1, m2 = ratio_pair("alpha_large").devices
        s = lambda p: MemristorParams(p.r_on * scale, p.r_off * scale, p.r_init * scale, p.q0, p.polarity)
        assert alpha(s(m1), s(m2)) == pytest.approx(alpha(m1, m2), rel=1e-12)


class TestOracleSingle:
    def test_t_zero(self):
        p = lone_device().device
        assert oracle_single_const_v(p, 1.0, 0.0) == 100e3

    def test_against_ode(self):
        p = lone_device(q0=1e-2).device
        expected = 99990.00950094964  # frozen from charge_ode below
        q = charge_ode(lambda q: p.r_init - p.delta_r * q / p.q0, 1.0, 0.1)
        assert p.r_init - p.delta_r * q / p.q0 == pytest.approx(expected, rel=1e-11)
        assert oracle_single_const_v(p, 1.0, 0.1) == pytest.approx(expected, rel=1e-12)

    def test_against_fine_euler(self):
        p = lone_device(q0=1e-2).device
        m, h = p.r_init, 1e-5
        for _ in range(10_000):
            m -= p.delta_r * (1.0 / m) * h / p.q0
        assert m == pytest.approx(oracle_single_const_v(p, 1.0, 0.1), rel=1e-9)

    def test_negative_polarity_is_mirror(self):
        # the squared memristance moves by the same amount in opposite directions
        up = MemristorParams(100.0, 100e3, 50e3, 1e-2, -1)
        down = MemristorParams(100.0, 100e3, 50e3, 1e-2, 1)
        m_up = oracle_single_const_v(up, 1.0, 0.1)
        m_down = oracle_single_const_v(down, 1.0, 0.1)
        assert m_up > 50e3 > m_down
        assert m_up**2 + m_down**2 == pytest.approx(2 * 50e3**2, rel=1e-15)

    def test_out_of_validity(self):
        with pytest.raises(OutOfValidity):
            oracle_single_const_v(lone_device(q0=4e-7).device, 1.0, 1.0)

    def test_linear_only(self):
        with pytest.raises(ValidationError):
            oracle_single_const_v(lone_device(model=Model.BIOLEK).device, 1.0, 0.0)


class TestOracleSeries:
    def test_t_zero(self):
        m1, m2 = ratio_pair("alpha_small").devices
        assert oracle_series_const_v(m1, m2, 1.0, 0.0) == (18e3, 9e3)

    def test_alpha_one_is_linear(self):
        m1, m2 = ratio_pair("alpha_one", q0=1e-2).devices
        t = np.linspace(0.0, 10.0, 11)
        total, r1 = oracle_series_const_v(m1, m2, 1.0, t)
        np.testing.assert_allclose(total, 400e3, rtol=1e-15)
        np.testing.assert_allclose(np.diff(r1) / 1.0, -99.975, rtol=1e-9)

    @pytest.mark.parametrize("name", ["alpha_small", "alpha_large"])
    def test_against_ode(self, name):
        m1, m2 = ratio_pair(name, q0=1e-2).devices
        r = lambda q: (m1.r_init - m1.delta_r * q / m1.q0) + (m2.r_init + m2.delta_r * q / m2.q0)
        q = charge_ode(r, 1.0, 5.0)
        total, r1 = oracle_series_const_v(m1, m2, 1.0, 5.0)
        assert total == pytest.approx(r(q), rel=1e-10)
        assert r1 == pytest.approx(m1.r_init - m1.delta_r * q / m1.q0, rel=1e-10)

    def test_preconditions(self):
        m1, m2 = ratio_pair("alpha_one").devices
        other = MemristorParams(m2.r_on, m2.r_off, m2.r_init, 2e-2, -1)
        with pytest.raises(ValidationError):
            oracle_series_const_v(m1, other, 1.0, 0.1)
        with pytest.raises(OutOfValidity):
            oracle_series_const_v(m1, m2, 1.0, 1e4)


class TestPerPulseDeltas:
    def test_zero_amplitude(self):
        stim = PulseTrain(0.0, 1e-3, 2e-3, 10)
        tr = simulate(ratio_pair("alpha_one"), stim, SolverConfig(1e-4))
        s = per_pulse_deltas(tr, stim)
        assert len(s) == 10 and all(d == 0.0 for d in s.delta_m1)
        assert classify_regime(s) is Regime.SATURATED

    def test_alpha_one_equal(self):
        tr = simulate(ratio_pair("alpha_one", q0=4e-7), STIM, SolverConfig(1e-5))
        d = np.array(per_pulse_deltas(tr, STIM).delta_m1)
        np.testing.assert_allclose(d, d[0], rtol=1e-9)

    def test_single_accelerates_until_saturation(self):
        tr = simulate(lone_device(q0=4e-7), STIM, SolverConfig(1e-5))
        s = per_pulse_deltas(tr, STIM)
        active = s.active()
        assert len(active) >= 10
        assert np.all(np.diff(active) > 0)
        assert s.saturated[-1] and s.delta_m1[-1] == 0.0

    def test_stride_still_finds_edges(self):
        tr1 = simulate(ratio_pair("alpha_small", q0=4e-7), STIM, SolverConfig(1e-5))
        tr10 = simulate(ratio_pair("alpha_small", q0=4e-7), STIM, SolverConfig(1e-5, record_stride=10))
        assert per_pulse_deltas(tr1, STIM).delta_m1 == per_pulse_deltas(tr10, STIM).delta_m1

    def test_mismatch(self):
        short = PulseTrain(1.0, 1e-3, 2e-3, 5)
        tr = simulate(lone_device(), short, SolverConfig(1e-4))
        with pytest.raises(StimulusMismatch):
            per_pulse_deltas(tr, STIM)


class TestClassify:
    def test_linear(self):
        assert classify_regime(series([10.0, 10.2, 9.9, 10.1])) is Regime.LINEAR

    def test_accelerating(self):
        assert classify_regime(series([1.0, 1.1, 1.3, 1.6])) is Regime.ACCELERATING

    def test_decelerating(self):
        assert classify_regime(series([-5.0, -3.0, -2.0, -1.5])) is Regime.DECELERATING

    def test_mixed(self):
        assert classify_regime(series([1.0, 2.0, 1.0, 2.0])) is Regime.MIXED

    def test_saturated(self):
        assert classify_regime(series([0.0, 0.0, 0.0])) is Regime.SATURATED
        assert classify_regime(series([1.0, 2.0, 3.0], [True] * 3)) is Regime.SATURATED

    def test_stops_at_saturation(self):
        s = series([1.0, 1.5, 2.0, 2.5, 0.5, 0.0], [False] * 4 + [True] * 2)
        assert classify_regime(s) is Regime.ACCELERATING

    def test_stops_below_floor(self):
        s = series([1.0, 0.8, 0.6, 1e-4, 0.9])
        assert s.active() == [1.0, 0.8, 0.6]
        assert classify_regime(s) is Regime.DECELERATING

    def test_too_few(self):
        with pytest.raises(TooFewPulses):
            classify_regime(series([1.0, 2.0, 0.0]))

    def test_tolerance_is_a_parameter(self):
        s = series([1.0, 1.05, 1.1, 1.15])
        assert classify_regime(s, tol_rel=0.05) is Regime.ACCELERATING
        assert classify_regime(s, tol_rel=0.1) is Regime.LINEAR


class TestLinearityR2:
    def _traj(self, m1):
        tr = simulate(lone_device(), PulseTrain(0.0, 1e-3, 2e-3, 1), SolverConfig(1e-4))
        return type(tr)(**{**tr.__dict__, "m1": np.asarray(m1, dtype=float)})

    def test_exact_line(self):
        tr = self._traj(np.arange(21) * 3.0 + 7.0)
        assert linearity_r2(tr) == pytest.approx(1.0, abs=1e-12)

    def test_constant(self):
        assert linearity_r2(self._traj(np.full(21, 5.0))) == 1.0

    def test_noise_is_low(self):
        rng = np.random.default_rng(0)
        assert linearity_r2(self._traj(rng.normal(size=21))) < 0.5

    def test_window_and_too_few(self):
        tr = self._traj(np.arange(21.0))
        with pytest.raises(TooFewSamples):
            linearity_r2(tr, window=(0.0, 5e-4))

    def test_alpha_one_presaturation(self):
        tr = simulate(ratio_pair("alpha_one", q0=4e-7, model=Model.BIOLEK), STIM, SolverConfig(1e-5))
        s = per_pulse_deltas(tr, STIM)
        assert linearity_r2(tr, "m1", presaturation_window(tr, STIM, s)) >= 0.999


class TestOracleDeviation:
    @pytest.mark.parametrize("name", ["alpha_small", "alpha_one", "alpha_large"])
    def test_pairs_short(self, name):
        tr = oracle_run(ratio_pair(name, q0=1e-2), v=1.0, duration=0.02, dt=1e-6)
        worst, n = oracle_deviation(tr, 1.0)
        assert n == len(tr) and worst < 1e-6

    def test_stops_before_clamp(self):
        tr = oracle_run(lone_device(q0=4e-7), v=1.0, duration=0.03, dt=1e-6)
        worst, n = oracle_deviation(tr, 1.0)
        assert 0 < n < len(tr)
        assert tr.t[n - 1] < 0.0201
