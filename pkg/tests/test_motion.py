import math

import numpy as np
import pytest
import scipy.signal
import scipy.optimize

from rthsdeg.engine import GroundMotion
from rthsdeg.motion import (
    MotionFormatError, MotionSpec, generate_kanai_tajimi, kanai_tajimi_psd,
    load_ground_motion_csv, motion_from_spec, target_psd, trapezoid_envelope, write_motion_csv,
)


def _stationary(**kw):
    dur = kw.pop("duration", 600.0)
    return MotionSpec(duration=dur, envelope=(0.0, dur, 0.0), pga=None, **kw)


def _welch(m):
    return scipy.signal.welch(m.samples, fs=1 / m.dt, nperseg=int(40 / m.dt))


def test_zero_intensity_gives_zero_record():
    m = generate_kanai_tajimi(MotionSpec(S0=0.0))
    assert m.samples.size == 6001 and not np.any(m.samples)


def test_seed_determinism():
    a = generate_kanai_tajimi(MotionSpec(seed=3)).samples
    np.testing.assert_array_equal(a, generate_kanai_tajimi(MotionSpec(seed=3)).samples)
    assert not np.array_equal(a, generate_kanai_tajimi(MotionSpec(seed=4)).samples)


def test_default_record_properties():
    m = generate_kanai_tajimi(MotionSpec())
    assert abs(m.samples.mean()) < 1e-12
    assert np.max(np.abs(m.samples)) == pytest.approx(MotionSpec().pga, rel=1e-12)
    assert m.duration == pytest.approx(30.0)


def test_psd_peak_near_ground_frequency_for_light_filter_damping():
    spec = _stationary(zeta_g=0.1, highpass_omega=0.0, seed=1)
    f, p = _welch(generate_kanai_tajimi(spec))
    f_peak = f[np.argmax(p)]
    assert f_peak == pytest.approx(spec.omega_g / (2 * math.pi), rel=0.05)


def test_psd_peak_matches_shaped_spectrum_at_default_damping():
    spec = _stationary(seed=2)
    f, p = _welch(generate_kanai_tajimi(spec))
    res = scipy.optimize.minimize_scalar(
        lambda w: -target_psd(spec, w), bounds=(1.0, 60.0), method="bounded"
    )
    # with zeta_g = 0.35 the spectral peak sits below omega_g
    assert res.x / spec.omega_g == pytest.approx(0.91, abs=0.03)
    assert f[np.argmax(p)] == pytest.approx(res.x / (2 * math.pi), rel=0.08)


def test_psd_level_matches_two_sided_intensity():
    spec = _stationary(seed=5, highpass_omega=0.0)
    f, p = _welch(generate_kanai_tajimi(spec))
    band = (f > 0.5) & (f < 6.0)
    # one-sided PSD per Hz of a two-sided spectrum per rad/s is 4*pi*S
    expected = 4 * math.pi * kanai_tajimi_psd(2 * math.pi * f[band], spec.S0, spec.omega_g,
                                              spec.zeta_g)
    assert np.mean(p[band]) / np.mean(expected) == pytest.approx(1.0, rel=0.05)


def test_envelope_shape():
    t = np.linspace(0, 35, 3501)
    env = trapezoid_envelope(t, 2.0, 20.0, 8.0)
    assert env[0] == 0 and env[t.searchsorted(10.0)] == 1 and env[-1] == 0
    assert env[t.searchsorted(1.0)] == pytest.approx(0.5)


def test_spec_validation():
    for bad in ({"zeta_g": 1.2}, {"duration": 0.0}, {"S0": -1.0}, {"envelope": (1.0, 2.0)}):
        with pytest.raises(ValueError):
            MotionSpec(**bad)


def test_two_line_file(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("0,0\n0.01,0\n")
    m = load_ground_motion_csv(p)
    assert m.dt == 0.01
    np.testing.assert_array_equal(m.samples, [0.0, 0.0])


def test_single_column_with_dt_header(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("# dt=0.02\n1.0\n2.0\n-1.5\n")
    m = load_ground_motion_csv(p)
    assert m.dt == 0.02
    np.testing.assert_array_equal(m.samples, [1.0, 2.0, -1.5])
    p.write_text("1.0\n2.0\n")
    with pytest.raises(MotionFormatError, match="dt"):
        load_ground_motion_csv(p)


def test_gap_in_time_column_names_line(tmp_path):
    p = tmp_path / "gap.csv"
    p.write_text("time,acc\n0,0\n0.01,1\n0.03,2\n")
    with pytest.raises(MotionFormatError, match=r"gap\.csv:4"):
        load_ground_motion_csv(p)


def test_parse_errors_name_line_and_column(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("0,0\n0.01,abc\n")
    with pytest.raises(MotionFormatError, match=r"bad\.csv:2:2"):
        load_ground_motion_csv(p)
    p.write_text("0,0\n0.01,nan\n")
    with pytest.raises(MotionFormatError, match="non-finite"):
        load_ground_motion_csv(p)
    p.write_text("0,0\n0.01,1\n0.005,2\n")
    with pytest.raises(MotionFormatError, match="increasing"):
        load_ground_motion_csv(p)


def test_csv_round_trip_is_bit_exact(tmp_path):
    m = generate_kanai_tajimi(MotionSpec(duration=5.0))
    path = write_motion_csv(m, tmp_path / "rt.csv", {"seed": 4})
    back = load_ground_motion_csv(path)
    assert back.dt == m.dt
    np.testing.assert_array_equal(back.samples, m.samples)
    assert motion_from_spec(MotionSpec(path=str(path))).samples.size == m.samples.size


def test_round_trip_of_awkward_dt(tmp_path):
    m = GroundMotion(1 / 3, np.array([0.1, 1e-300, -7.25e5, 1 / 3]))
    back = load_ground_motion_csv(write_motion_csv(m, tmp_path / "x.csv"))
    np.testing.assert_array_equal(back.samples, m.samples)
