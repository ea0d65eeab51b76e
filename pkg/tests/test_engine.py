import numpy as np
import pytest
import scipy.linalg

from rthsdeg.control import ControllerConfig
from rthsdeg.degradation import K0_NOMINAL
from rthsdeg.engine import (
    EngineConfig, EngineInstability, GroundMotion, config_hash, resample_motion,
    run_monolithic_reference, run_rths, simulate_fixed_base,
)
from rthsdeg.plant import BoucWenIsolator, LoadCellModel, VirtualPlant
from rthsdeg.structure import BuildingModel, ModalDamping, assemble_isolated

DT = 1.0 / 1024
LINEAR_IDEAL = VirtualPlant(
    isolator=BoucWenIsolator(alpha=0.0), ideal_actuator=True,
    load_cell=LoadCellModel(noise_std=0.0), accel_estimate="oracle",
)


def _pulse(duration=10.0):
    ag = np.zeros(int(duration / DT) + 1)
    ag[1] = 1.0 / DT
    return GroundMotion(DT, ag, "pulse")


def test_zero_motion_gives_zero_record(building):
    quiet = VirtualPlant(load_cell=LoadCellModel(noise_std=0.0))
    rec = run_rths(building, quiet, ControllerConfig(), GroundMotion(DT, np.zeros(2048)))
    for name, col in rec.columns().items():
        if name != "time":
            assert not np.any(col), name


def test_monolithic_zero_input_zero_output(building):
    rec = run_monolithic_reference(building, K0_NOMINAL, GroundMotion(DT, np.zeros(500)))
    assert not np.any(rec.x) and not np.any(rec.acc_abs)


def test_monolithic_pulse_matches_modal_superposition(building):
    motion = _pulse()
    rec = run_monolithic_reference(building, K0_NOMINAL, motion)
    # exact modal response to the piecewise-linear ground acceleration
    ss = assemble_isolated(building, K0_NOMINAL)
    lam, V = np.linalg.eig(ss.A)
    beta = np.linalg.solve(V, np.r_[np.zeros(4), -np.ones(4)])
    E = np.exp(lam * DT)
    c0 = (E - 1) / lam
    c1 = (E - 1 - lam * DT) / (lam**2 * DT)
    q = np.zeros(8, complex)
    ag = motion.samples
    oracle = np.empty((ag.size, 4))
    for t in range(ag.size):
        oracle[t] = (V @ q).real[:4]
        if t + 1 < ag.size:
            q = E * q + beta * (ag[t] * c0 + (ag[t + 1] - ag[t]) * c1)
    err = np.max(np.abs(rec.x - oracle)) / np.max(np.abs(oracle))
    assert err < 1e-6


def _fft_peak(x, dt, fmax=3.0, pad=8):
    nf = pad * x.size
    X = np.abs(np.fft.rfft(x, nf))
    f = np.fft.rfftfreq(nf, dt)
    sel = f < fmax
    return f[sel][np.argmax(X[sel])]


def test_doubling_isolator_stiffness_shifts_frequency_by_sqrt2(building):
    motion = _pulse(400.0)
    f1 = _fft_peak(run_monolithic_reference(building, K0_NOMINAL, motion).x_b, DT)
    f2 = _fft_peak(run_monolithic_reference(building, 2 * K0_NOMINAL, motion).x_b, DT)
    assert f2 / f1 == pytest.approx(np.sqrt(2), rel=5e-3)


def test_undamped_fft_peak_matches_eigenvalue():
    model = BuildingModel(damping=ModalDamping((0.0, 0.0)))
    motion = _pulse(400.0)
    for k in (K0_NOMINAL, 2 * K0_NOMINAL):
        ss = assemble_isolated(model, k)
        w = np.sqrt(scipy.linalg.eigh(ss.K, np.diag(model.masses), eigvals_only=True)[0])
        f = _fft_peak(run_monolithic_reference(model, k, motion).x_b, DT)
        assert f == pytest.approx(w / (2 * np.pi), rel=1e-3)


def test_linear_ideal_partitioned_run_matches_monolithic(building, motion):
    rec = run_rths(building, LINEAR_IDEAL, ControllerConfig(), motion)
    ref = run_monolithic_reference(building, K0_NOMINAL, motion)
    peak = lambda a: np.max(np.abs(a))
    assert abs(peak(rec.x_b) / peak(ref.x_b) - 1) < 1e-3
    assert abs(peak(rec.acc_abs[:, 3]) / peak(ref.acc_abs[:, 3]) - 1) < 1e-3
    np.testing.assert_allclose(rec.x, ref.x, atol=1e-3 * peak(ref.x))


def test_run_is_bit_deterministic(building, motion, nominal_record):
    again = run_rths(building, VirtualPlant(), ControllerConfig(), motion)
    for name, col in nominal_record.columns().items():
        np.testing.assert_array_equal(col, again.columns()[name], err_msg=name)
    assert again.metadata == nominal_record.metadata


def test_halving_dt_converges(building, motion, nominal_record):
    fine = run_rths(building, VirtualPlant(), ControllerConfig(), motion, EngineConfig(dt=DT / 2))
    ratio = np.max(np.abs(fine.x_b)) / np.max(np.abs(nominal_record.x_b))
    assert abs(ratio - 1) < 5e-3


@pytest.mark.parametrize("delay", [1, 2, 4])
def test_exchange_delay_is_exact(building, motion, delay):
    rec = run_rths(building, VirtualPlant(), ControllerConfig(), motion,
                   EngineConfig(exchange_delay_steps=delay))
    x = rec.R_hat - rec.R_hat.mean()
    y = rec.R_hat_fed - rec.R_hat_fed.mean()
    xc = [np.dot(x[: x.size - L], y[L:]) for L in range(10)]
    assert int(np.argmax(xc)) == delay
    np.testing.assert_array_equal(rec.R_hat_fed[delay:], rec.R_hat[:-delay])


@pytest.mark.parametrize("mode", ["rths", "monolithic"])
def test_lossless_energy_balance(motion, mode):
    model = BuildingModel(damping=ModalDamping((0.0, 0.0)))
    if mode == "rths":
        rec = run_rths(model, LINEAR_IDEAL, ControllerConfig(), motion)
    else:
        rec = run_monolithic_reference(model, K0_NOMINAL, motion)
    ss = assemble_isolated(model, K0_NOMINAL)
    m = np.asarray(model.masses)
    v, x = rec.velocity, rec.x
    stored = 0.5 * np.einsum("ti,i,ti->t", v, m, v) + 0.5 * np.einsum("ti,ij,tj->t", x, ss.K, x)
    power = -rec.ground_acc * (v @ m)
    supplied = np.r_[0.0, np.cumsum(0.5 * (power[1:] + power[:-1]) * DT)]
    assert np.max(np.abs(supplied - stored)) < 1e-4 * np.max(stored)


def test_instability_names_channel_and_time(building, motion):
    with pytest.raises(EngineInstability) as info:
        run_rths(building, VirtualPlant(), ControllerConfig(kp=200.0), motion)
    assert info.value.channel in ("x_m", "v_m", "a_m", "command")
    assert 0 < info.value.time < motion.duration


def test_resample_identity_and_constant():
    m = GroundMotion(0.01, np.arange(10.0))
    np.testing.assert_array_equal(resample_motion(m, 0.01).samples, m.samples)
    c = resample_motion(GroundMotion(0.01, np.full(101, 2.5)), DT)
    np.testing.assert_allclose(c.samples, 2.5)
    assert c.samples.size == 1025
    with pytest.raises(ValueError):
        resample_motion(GroundMotion(0.01, np.array([])), DT)


def test_resample_sinusoid_accuracy():
    t = np.arange(0, 10.0 + 1e-9, 0.01)
    m = GroundMotion(0.01, np.sin(2 * np.pi * t))
    r = resample_motion(m, DT)
    err = np.max(np.abs(r.samples - np.sin(2 * np.pi * r.time)))
    assert err < 5e-4
    assert r.samples[0] == m.samples[0]


def test_resample_coarsening_is_band_limited():
    t = np.arange(0, 20.0, DT)
    m = GroundMotion(DT, np.sin(2 * np.pi * 1.0 * t) + np.sin(2 * np.pi * 200.0 * t))
    r = resample_motion(m, 0.01)
    # the 200 Hz part is above the new Nyquist and must not alias
    clean = np.sin(2 * np.pi * r.time)
    assert np.max(np.abs(r.samples - clean)[200:-200]) < 0.02


def test_fixed_base_run(building, motion):
    rec = simulate_fixed_base(building, motion)
    assert not np.any(rec.x[:, 0])
    np.testing.assert_array_equal(rec.acc_abs[:, 0], rec.ground_acc)


def test_record_shapes_and_metadata(nominal_record, motion):
    rec = nominal_record
    n = motion.samples.size
    assert all(len(c) == n for c in rec.columns().values())
    assert np.all(np.diff(rec.time) > 0)
    assert {"config_hash", "seed", "exposure_days"} <= rec.metadata.keys()
    np.testing.assert_array_equal(rec.e, rec.x_b - rec.x_m)


def test_config_hash_sensitivity():
    base = config_hash(BuildingModel(), ControllerConfig())
    assert config_hash(BuildingModel(), ControllerConfig()) == base
    assert config_hash(BuildingModel(), ControllerConfig(kp=2.6)) != base
    assert config_hash(BuildingModel(story_height=3.1), ControllerConfig()) != base


def test_validation():
    with pytest.raises(ValueError):
        GroundMotion(0.01, [0.0, np.nan])
    with pytest.raises(ValueError):
        EngineConfig(exchange_delay_steps=0)
    with pytest.raises(ValueError):
        EngineConfig(scheme="euler")


def test_realtime_pacing_takes_wall_clock(building):
    import time
    motion = GroundMotion(DT, np.zeros(int(0.3 / DT)))
    t0 = time.perf_counter()
    run_rths(building, VirtualPlant(), ControllerConfig(), motion, EngineConfig(pace_realtime=True))
    assert time.perf_counter() - t0 >= 0.25
