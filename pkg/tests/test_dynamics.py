"""Equations of motion, integration accuracy, and period detection."""

import dataclasses

import numpy as np
import pytest

from axisym.catalog import SystemParams, SystemSpec, build
from axisym.dynamics import (
    GUARD_RADIUS,
    conservation_suite,
    detect_period,
    eom_rhs,
    integrate,
    integrate_batch,
    radial_frequency,
    reverse_momenta,
    _make_dual_rhs,
    _make_scalar_rhs,
)
from axisym.phase import (
    CovectorField,
    DomainError,
    Observable,
    PhasePoint,
    TwoForm,
    hamiltonian_observable,
    make_rng,
    sample_safe_states,
)

from conftest import PARAMS, SYSTEM_OF


def _free_particle() -> SystemSpec:
    A = CovectorField(lambda x, y, z: (0.0 * x, 0.0 * y, 0.0 * z))
    B = TwoForm(lambda x, y, z: (0.0 * x, 0.0 * y, 0.0 * z))
    W = lambda x, y, z: 0.0 * x
    return SystemSpec(
        system_id="free", params=SystemParams(),
        W=W, A=A, B=B,
        hamiltonian=hamiltonian_observable(A, W),
        integrals=(Observable(lambda s: s[3], "X1", 1),),
        claimed_rank=4,
        gauge_factor=lambda s, w: 0.0 * s + 0.0 * w,
        potential_sw=lambda s, w: 0.0 * s + 0.0 * w,
    )


def test_free_particle_rhs_and_straight_line():
    spec = _free_particle()
    state = np.array([0.5, -0.5, 1.0, 1.0, 2.0, -1.0])
    rhs = eom_rhs(spec, state)
    assert np.allclose(rhs, [1.0, 2.0, -1.0, 0.0, 0.0, 0.0])
    traj = integrate(spec, state, 2.0, tol=1e-12)
    assert np.allclose(traj.states[-1][:3], state[:3] + 2.0 * state[3:],
                       atol=1e-10)


@pytest.mark.parametrize("key", ["op_min", "cp_min_bl", "max5"])
def test_fast_rhs_paths_agree_with_hamiltonian_gradient(key):
    spec = build(SYSTEM_OF[key], PARAMS[key])
    rng = make_rng(31)
    states = sample_safe_states(rng, 10)
    dual_rhs = _make_dual_rhs(spec)
    fast_rhs = _make_scalar_rhs(spec)
    from axisym.phase import gradient6
    for state in states.T:
        grad = [float(v) for v in gradient6(spec.hamiltonian.fn, list(state))]
        expected = np.r_[grad[3:], [-grad[0], -grad[1], -grad[2]]]
        assert np.allclose(dual_rhs(0.0, state), expected, rtol=1e-11, atol=1e-11)
        assert np.allclose(fast_rhs(0.0, state), expected, rtol=1e-11, atol=1e-11)
        assert np.allclose(eom_rhs(spec, state), expected, rtol=1e-11, atol=1e-11)


def test_eom_rhs_accepts_batches_and_phase_points():
    spec = build("max6", PARAMS["max6"])
    states = sample_safe_states(make_rng(32), 5)
    batch = eom_rhs(spec, states)
    assert batch.shape == (6, 5)
    one = eom_rhs(spec, PhasePoint.from_state(states[:, 0]))
    assert np.allclose(batch[:, 0], one)


def test_drift_certificate_short_run(reference_ic):
    spec = build("op_min", PARAMS["op_min"])
    traj = integrate(spec, reference_ic, 10.0, tol=1e-12)
    for label in ("H", "X1", "X2", "Y3"):
        assert traj.drift(label) < 1e-10, label


def test_convergence_with_tolerance(reference_ic):
    spec = build("max5", PARAMS["max5"])
    ref = integrate(spec, reference_ic, 5.0, tol=1e-13).states[-1]
    errs = []
    for tol in (1e-6, 1e-9, 1e-12):
        end = integrate(spec, reference_ic, 5.0, tol=tol).states[-1]
        errs.append(np.max(np.abs(end - ref)))
    assert errs[0] > errs[2]
    assert errs[2] < 1e-9


def test_time_reversal_with_mirrored_field(reference_ic):
    # With a magnetic field, retracing an orbit requires flipping the
    # field as well: under B -> -B the gauge flips sign, so the kinetic
    # reversal reduces to a plain momentum negation.
    spec = build("cp_min", PARAMS["cp_min_bz"])
    mirror = build("cp_min", dataclasses.replace(
        PARAMS["cp_min_bz"], bz=-PARAMS["cp_min_bz"].bz))
    t_end = 4.0
    fwd = integrate(spec, reference_ic, t_end, tol=1e-12)
    end = fwd.states[-1]
    back = integrate(mirror, np.r_[end[:3], -end[3:]], t_end, tol=1e-12)
    recovered = np.r_[back.states[-1][:3], -back.states[-1][3:]]
    assert np.allclose(recovered, reference_ic, atol=1e-8)


def test_reverse_momenta_flips_kinetic_momentum():
    spec = build("op_min", PARAMS["op_min"])
    import axisym.autodiff as ad
    pt = PhasePoint.from_state([1.0, -1.0, 1.0, 0.7, 0.2, -0.4])
    rev = reverse_momenta(spec, pt)
    a = np.asarray([float(ad.value(c)) for c in spec.A(pt.q)])
    assert np.allclose(rev.p + a, -(pt.p + a), atol=1e-14)
    assert np.allclose(rev.q, pt.q)


def test_angular_momentum_constant_along_trajectory(reference_ic):
    # X2 is canonical Lz in this gauge; its trace must stay flat.
    spec = build("max6", PARAMS["max6"])
    traj = integrate(spec, reference_ic, 8.0, tol=1e-12)
    lz = traj.traces["X2"]
    assert np.max(np.abs(lz - lz[0])) < 1e-10


def test_guard_rejects_singular_start():
    spec = build("op_min", PARAMS["op_min"])
    with pytest.raises(DomainError):
        integrate(spec, [GUARD_RADIUS / 2, 0.0, 1.0, 0.0, 0.0, 0.0], 1.0)
    with pytest.raises(DomainError):
        eom_rhs(spec, [1.0, 0.0, GUARD_RADIUS / 2, 0.0, 0.0, 0.0])


def test_guard_aborts_on_approach():
    # Singular on the axis; a weak inverse-square coefficient puts the
    # radial turning point inside the guard radius, so an inward launch
    # must hit the guard and abort.
    spec = build("linear_min", SystemParams(u1=1e-4, bz=2.0))
    traj = integrate(spec, [1.0, 0.0, 0.0, -1.5, 0.0, 0.0], 5.0, tol=1e-10)
    assert traj.aborted
    assert traj.meta["t_final"] < 5.0
    r_end = np.hypot(traj.states[-1, 0], traj.states[-1, 1])
    assert r_end == pytest.approx(GUARD_RADIUS, abs=1e-3)


def test_step_budget_aborts():
    spec = build("op_min", PARAMS["op_min"])
    traj = integrate(spec, [1.0, -1.0, 1.0, 1.0, 0.0, 0.0], 50.0,
                     tol=1e-10, max_steps=20)
    assert traj.aborted
    assert traj.meta["t_final"] < 50.0


def test_escape_guard_stops_blowup(monkeypatch):
    # This potential is unbounded below along z; some launches blow up
    # in finite time.  Tighten the amplitude bound so the escape event
    # terminates the run as soon as the state leaves the bounded region.
    from axisym import dynamics

    monkeypatch.setattr(dynamics, "ESCAPE_BOUND", 50.0)
    spec = build("cp_min", PARAMS["cp_min_bq"])
    ic = [0.745, 1.77, -1.02, 1.333, -0.125, 0.935]
    traj = integrate(spec, ic, 50.0, tol=1e-10)
    assert traj.aborted
    assert traj.meta["t_final"] < 50.0
    assert np.max(np.abs(traj.states[-1])) == pytest.approx(50.0, rel=1e-3)


def test_dense_false_matches_dense_true(reference_ic):
    spec = build("max5", PARAMS["max5"])
    a = integrate(spec, reference_ic, 3.0, tol=1e-11, dt_out=0.1, dense=True)
    b = integrate(spec, reference_ic, 3.0, tol=1e-11, dt_out=0.1, dense=False)
    assert np.allclose(a.times, b.times, atol=1e-12)
    assert np.allclose(a.states, b.states, atol=1e-9)
    assert a.dense is not None and b.dense is None


def test_integrate_batch_matches_single_runs():
    spec = build("max6", PARAMS["max6"])
    ics = sample_safe_states(make_rng(33), 3).T
    times, states, traces = integrate_batch(spec, ics, 2.0, tol=1e-11, n_out=21)
    assert states.shape == (21, 3, 6)
    for k in range(3):
        single = integrate(spec, ics[k], 2.0, tol=1e-11, dt_out=0.1)
        assert np.allclose(states[-1, k], single.states[-1], atol=1e-7)
    assert traces["H"].shape == (21, 3)


def test_tolerance_validation(reference_ic):
    spec = build("max6", PARAMS["max6"])
    with pytest.raises(ValueError):
        integrate(spec, reference_ic, 1.0, tol=1e-3)
    with pytest.raises(ValueError):
        integrate(spec, reference_ic, -1.0)


def test_detect_period_exact_closure(reference_ic):
    spec = build("max5", PARAMS["max5"])
    rep = detect_period(spec, PhasePoint.from_state(reference_ic), 30.0,
                        tol=1e-12)
    assert rep.closed
    assert rep.period == pytest.approx(8.0 * np.pi, rel=1e-6)
    assert rep.return_distance < 1e-4


def test_detect_period_open_orbit(reference_ic):
    spec = build("op_min", PARAMS["op_min"])
    rep = detect_period(spec, PhasePoint.from_state(reference_ic), 40.0,
                        tol=1e-10)
    assert not rep.closed
    assert rep.period is None
    assert np.isfinite(rep.return_distance)


def test_radial_frequency_matches_closed_form(reference_ic):
    from axisym.closedform import frequency

    spec = build("cp_min", PARAMS["cp_min_bz"])
    Lz = spec.integral("X2").eval(reference_ic)
    nu = frequency("cp_min", spec.params, Lz)
    measured = radial_frequency(spec, reference_ic, horizon=40.0, tol=1e-11)
    assert measured == pytest.approx(nu, rel=2e-3)


def test_conservation_suite_smoke():
    spec = build("max6", PARAMS["max6"])
    drifts = conservation_suite(spec, n_ic=3, t_end=10.0, tol=1e-11, seed=5)
    attempts = drifts.pop("attempts")
    assert attempts >= 3
    assert set(drifts) == {"H", "X1", "X2", "Y3", "Y4"}
    assert all(v < 1e-7 for v in drifts.values())
