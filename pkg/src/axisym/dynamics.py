"""Equations of motion, adaptive integration, and period detection.

Hamilton's equations are generated from a SystemSpec either through a
closed-form right-hand side (available whenever the system carries its
axial-gauge data g(s, z) and W(s, z), with A = g * (-y, x, 0)) or, as a
fallback, through exact forward-mode gradients of the Hamiltonian.

The integrator is an adaptive embedded Runge-Kutta pair of order 8(5,3)
with dense output; conserved quantities are monitored along the output
nodes rather than enforced, which provides a drift certificate tied to
the local tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import minimize_scalar

from .autodiff import Dual, tangent, value
from .catalog import SystemSpec
from .phase import DomainError, PhasePoint, gradient6

GUARD_RADIUS = 0.05
ESCAPE_BOUND = 1e4
TOL_MIN, TOL_MAX = 1e-14, 1e-6
DEFAULT_TOL = 1e-10


def _axial_derivatives(fn, s, w):
    """(f, df/ds, df/dw) of a two-variable scalar field, exact."""
    ds = fn(Dual(s, 1.0), w)
    dw = fn(s, Dual(w, 1.0))
    return value(ds), tangent(ds), tangent(dw)


def eom_rhs(spec: SystemSpec, state) -> np.ndarray:
    """Time derivative (dq/dt, dp/dt) of a state under the spec's H.

    Accepts a PhasePoint, a 6-sequence, or a (6, k) array of states.
    Raises DomainError inside the guard region of a singular system.
    """
    if isinstance(state, PhasePoint):
        state = state.state
    arr = np.asarray(state, dtype=float)
    flat = arr.ndim == 1
    y = arr.reshape(6, -1)
    _check_guard(spec, y)
    out = _rhs_array(spec, y)
    return out.reshape(arr.shape) if not flat else out.reshape(6)


def _check_guard(spec: SystemSpec, y: np.ndarray):
    if "r" in spec.singular_in:
        r = np.hypot(y[0], y[1])
        if np.any(r < GUARD_RADIUS):
            raise DomainError(f"state within guard radius of the axis (r < {GUARD_RADIUS})")
    if "z" in spec.singular_in:
        if np.any(np.abs(y[2]) < GUARD_RADIUS):
            raise DomainError(f"state within guard radius of z = 0 (|z| < {GUARD_RADIUS})")


def _rhs_array(spec: SystemSpec, y: np.ndarray) -> np.ndarray:
    x, yy, z, px, py, pz = y
    if spec.gauge_factor is not None and spec.potential_sw is not None:
        s = x * x + yy * yy
        g, g_s, g_w = _axial_derivatives(spec.gauge_factor, s, z)
        _, W_s, W_w = _axial_derivatives(spec.potential_sw, s, z)
        vx = px - yy * g
        vy = py + x * g
        vz = pz
        dpx = -vx * (-2.0 * x * yy * g_s) - vy * (g + 2.0 * x * x * g_s) - 2.0 * x * W_s
        dpy = -vx * (-g - 2.0 * yy * yy * g_s) - vy * (2.0 * x * yy * g_s) - 2.0 * yy * W_s
        dpz = g_w * (yy * vx - x * vy) - W_w
        return np.asarray(np.broadcast_arrays(vx, vy, vz, dpx, dpy, dpz))
    # Generic path: exact 6-gradient of H, one dual pass per direction.
    grad = gradient6(spec.hamiltonian.fn, [y[i] for i in range(6)])
    grad = [np.broadcast_to(np.asarray(c, dtype=float), y[0].shape) for c in grad]
    return np.asarray([grad[3], grad[4], grad[5],
                       -grad[0], -grad[1], -grad[2]])


def _compile_rhs(spec: SystemSpec):
    """Symbolically compiled right-hand side, or None when unavailable.

    The axial-gauge fields g(s, w) and W(s, w) of the catalog systems
    are rational expressions, so they can be traced symbolically,
    differentiated exactly, and jitted to machine code.  Returns None
    whenever tracing or jitting fails (e.g. fields with branching).
    """
    g_fn = spec.gauge_factor
    W_fn = spec.potential_sw
    if g_fn is None or W_fn is None:
        return None
    try:
        import numba
        import sympy as sp

        xs, ys, zs, pxs, pys, pzs = sp.symbols("x y z px py pz", real=True)
        ss, ws = sp.symbols("s w", positive=True)
        g = sp.sympify(g_fn(ss, ws))
        W = sp.sympify(W_fn(ss, ws))
        g_s, g_w = sp.diff(g, ss), sp.diff(g, ws)
        W_s, W_w = sp.diff(W, ss), sp.diff(W, ws)
        sub = {ss: xs * xs + ys * ys, ws: zs}
        g, g_s, g_w, W_s, W_w = (e.subs(sub) for e in (g, g_s, g_w, W_s, W_w))
        vx = pxs - ys * g
        vy = pys + xs * g
        exprs = [
            vx, vy, pzs,
            vx * (2 * xs * ys * g_s) - vy * (g + 2 * xs * xs * g_s) - 2 * xs * W_s,
            vx * (g + 2 * ys * ys * g_s) - vy * (2 * xs * ys * g_s) - 2 * ys * W_s,
            g_w * (ys * vx - xs * vy) - W_w,
        ]
        f = numba.njit(sp.lambdify((xs, ys, zs, pxs, pys, pzs), exprs,
                                   modules="math"))

        @numba.njit("float64[:](float64, float64[:])")
        def rhs(t, y):
            c0, c1, c2, c3, c4, c5 = f(y[0], y[1], y[2], y[3], y[4], y[5])
            out = np.empty(6)
            out[0] = c0
            out[1] = c1
            out[2] = c2
            out[3] = c3
            out[4] = c4
            out[5] = c5
            return out

        y0 = np.array([1.0, -1.0, 1.0, 1.0, 0.0, 0.0])
        check = np.asarray(_make_dual_rhs(spec)(0.0, y0))
        if not np.allclose(rhs(0.0, y0), check, rtol=1e-12, atol=1e-12):
            return None
        return rhs
    except Exception:
        return None


def _make_scalar_rhs(spec: SystemSpec):
    """Fastest available single-state right-hand side for a spec.

    Prefers the symbolically compiled form (cached on the spec), then
    the exact dual-number evaluation, then the generic gradient path.
    The cache lives in ``spec.meta`` so distinct instances never share
    a compiled function.
    """
    cached = spec.meta.get("_compiled_rhs", "missing")
    if cached == "missing":
        cached = _compile_rhs(spec)
        spec.meta["_compiled_rhs"] = cached
    if cached is not None:
        return cached
    return _make_dual_rhs(spec)


def _make_dual_rhs(spec: SystemSpec):
    """Single-state right-hand side on plain floats via dual numbers.

    Identical formulas to the array path but without per-call array
    construction.
    """
    g_fn = spec.gauge_factor
    W_fn = spec.potential_sw
    if g_fn is None or W_fn is None:
        def rhs(t, y):
            return _rhs_array(spec, np.asarray(y, dtype=float).reshape(6, 1)).reshape(6)
        return rhs

    def rhs(t, y):
        x, yy, z, px, py, pz = y
        s = x * x + yy * yy
        gs = g_fn(Dual(s, 1.0), z)
        gw = g_fn(s, Dual(z, 1.0))
        Ws = W_fn(Dual(s, 1.0), z)
        Ww = W_fn(s, Dual(z, 1.0))
        g, g_s, g_w = value(gs), tangent(gs), tangent(gw)
        W_s, W_w = tangent(Ws), tangent(Ww)
        vx = px - yy * g
        vy = py + x * g
        return (vx, vy, pz,
                vx * (2.0 * x * yy * g_s) - vy * (g + 2.0 * x * x * g_s) - 2.0 * x * W_s,
                vx * (g + 2.0 * yy * yy * g_s) - vy * (2.0 * x * yy * g_s) - 2.0 * yy * W_s,
                g_w * (yy * vx - x * vy) - W_w)

    return rhs


@dataclass(frozen=True)
class Trajectory:
    """Sampled integration output with conserved-quantity traces."""

    times: np.ndarray                 # (N,)
    states: np.ndarray                # (N, 6)
    traces: dict                      # label -> (N,) values
    meta: dict = field(default_factory=dict)
    dense: Optional[object] = None    # OdeSolution over [t0, t_final]
    aborted: bool = False

    @property
    def points(self) -> list:
        return [PhasePoint.from_state(s) for s in self.states]

    def drift(self, label: str) -> float:
        """Max relative drift of one trace from its initial value."""
        tr = self.traces[label]
        scale = max(1.0, abs(float(tr[0])))
        return float(np.max(np.abs(tr - tr[0])) / scale)


@dataclass(frozen=True)
class PeriodReport:
    """Outcome of a phase-space return search."""

    closed: bool
    period: Optional[float]
    return_distance: float
    refinement_iterations: int = 0

    def as_dict(self) -> dict:
        return {
            "closed": self.closed,
            "period": self.period,
            "return_distance": self.return_distance,
            "refinement_iterations": self.refinement_iterations,
        }


def _guard_events(spec: SystemSpec):
    events = []
    if "r" in spec.singular_in:
        def near_axis(t, y):
            y = y.reshape(6, -1)
            return float(np.min(np.hypot(y[0], y[1]))) - GUARD_RADIUS
        near_axis.terminal = True
        near_axis.direction = -1
        events.append(near_axis)
    if "z" in spec.singular_in:
        def near_plane(t, y):
            y = y.reshape(6, -1)
            return float(np.min(np.abs(y[2]))) - GUARD_RADIUS
        near_plane.terminal = True
        near_plane.direction = -1
        events.append(near_plane)

    # Several catalog potentials are unbounded below at large radius, so
    # some initial conditions escape with a finite-time blow-up that
    # would stall the adaptive stepper; stop such runs at a generous
    # amplitude bound instead.
    def escaped(t, y):
        return ESCAPE_BOUND - float(np.max(np.abs(y)))
    escaped.terminal = True
    escaped.direction = -1
    events.append(escaped)
    return events


def _step_budget_event(max_steps: int):
    """Terminal event that fires after ``max_steps`` accepted steps.

    Orbits can hover just outside a guard radius with step sizes driven
    arbitrarily small by the nearby gradient; this bounds the work per
    run so such draws abort instead of stalling.
    """
    state = {"count": 0, "t_trip": None}

    def over_budget(t, y):
        # Latch the time at which the budget is exceeded so the event is
        # a deterministic function of t during root bracketing.
        if state["t_trip"] is None:
            state["count"] += 1
            if state["count"] > max_steps:
                state["t_trip"] = t
        if state["t_trip"] is None:
            return 1.0
        return 1.0 if t < state["t_trip"] else -1.0

    over_budget.terminal = True
    over_budget.direction = -1
    return over_budget


def _trace_all(spec: SystemSpec, states: np.ndarray) -> dict:
    """Evaluate H and every integral on an (N, 6) state block.

    Conserved combinations can involve large mutually-cancelling terms
    (growing like r^4 on unbounded orbits), so the observables are
    evaluated in extended precision to keep the evaluation roundoff
    below the drift being measured.
    """
    wide = np.asarray(states, dtype=np.longdouble)
    cols = [wide[:, i] for i in range(6)]
    out = {}
    for obs in spec.observables():
        vals = np.asarray(value(obs.fn(cols)), dtype=float)
        out[obs.label or "H"] = np.broadcast_to(vals, (states.shape[0],)).copy()
    return out


def _output_nodes(t_end: float, dt_hint: Optional[float]) -> np.ndarray:
    dt = min(0.01, t_end / 200.0) if dt_hint is None else dt_hint
    n = max(2, int(np.ceil(t_end / dt)) + 1)
    return np.linspace(0.0, t_end, n)


def integrate(spec: SystemSpec, ic, t_end: float, tol: float = DEFAULT_TOL,
              dt_out: Optional[float] = None, dense: bool = True,
              max_steps: Optional[int] = None) -> Trajectory:
    """Integrate Hamilton's equations from one initial condition.

    Aborts cleanly (``aborted=True``, truncated output) if the state
    reaches the guard region of a singular term.  Traces of H and all
    integrals are evaluated at the output nodes.
    """
    if not (TOL_MIN <= tol <= TOL_MAX):
        raise ValueError(f"tol must lie in [{TOL_MIN}, {TOL_MAX}]")
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    y0 = ic.state if isinstance(ic, PhasePoint) else np.asarray(ic, dtype=float)
    _check_guard(spec, y0.reshape(6, 1))

    rhs = _make_scalar_rhs(spec)

    nodes = _output_nodes(t_end, dt_out)
    events = _guard_events(spec)
    if max_steps is not None:
        events = events + [_step_budget_event(max_steps)]
    # Dense output costs three extra stages per step; skip it when the
    # caller only needs the sampled nodes (e.g. drift monitoring).
    sol = solve_ivp(rhs, (0.0, t_end), y0, method="DOP853",
                    rtol=tol, atol=tol, dense_output=dense,
                    t_eval=None if dense else nodes,
                    events=events)
    if sol.status == -1:
        raise RuntimeError(f"integration failed: {sol.message}")
    aborted = sol.status == 1
    if dense:
        t_final = float(sol.t[-1])
        nodes = nodes[nodes <= t_final]
        if nodes.size == 0 or nodes[-1] < t_final:
            nodes = np.append(nodes, t_final)
        states = sol.sol(nodes).T
    else:
        nodes = sol.t
        states = sol.y.T
        if nodes.size == 0:
            raise RuntimeError("integration produced no output nodes")
        t_final = float(nodes[-1])
    meta = {
        "system_id": spec.system_id,
        "params": spec.params.as_dict(),
        "tol": tol,
        "t_end": t_end,
        "t_final": t_final,
    }
    return Trajectory(times=nodes, states=states,
                      traces=_trace_all(spec, states), meta=meta,
                      dense=sol.sol if dense else None, aborted=aborted)


def integrate_batch(spec: SystemSpec, ics: np.ndarray, t_end: float,
                    tol: float = DEFAULT_TOL, n_out: int = 201):
    """Integrate k initial conditions as one stacked system.

    ``ics`` has shape (k, 6).  Returns (times (N,), states (N, k, 6),
    traces label -> (N, k)).  One adaptive run amortizes step-size
    control across the batch.
    """
    ics = np.asarray(ics, dtype=float)
    k = ics.shape[0]
    _check_guard(spec, ics.T)

    def rhs(t, y):
        return _rhs_array(spec, y.reshape(k, 6).T).T.reshape(-1)

    sol = solve_ivp(rhs, (0.0, t_end), ics.reshape(-1), method="DOP853",
                    rtol=tol, atol=tol, dense_output=True)
    if sol.status != 0:
        raise RuntimeError(f"batch integration failed: {sol.message}")
    nodes = np.linspace(0.0, t_end, n_out)
    states = sol.sol(nodes).T.reshape(n_out, k, 6)
    flat = states.reshape(n_out * k, 6)
    traces = {lbl: tr.reshape(n_out, k) for lbl, tr in _trace_all(spec, flat).items()}
    return nodes, states, traces


def conservation_suite(spec: SystemSpec, n_ic: int = 20, t_end: float = 50.0,
                       tol: float = DEFAULT_TOL, seed: Optional[int] = None,
                       rng: Optional[np.random.Generator] = None) -> dict:
    """Worst relative drift of each conserved trace over random runs.

    Draws random states from the safe box until ``n_ic`` trajectories
    complete without entering a guard region; runs that approach a
    singular set are discarded and redrawn, since conservation is only
    claimed on the regular domain.  Returns label -> max drift, plus
    an ``"attempts"`` entry counting total draws.
    """
    from .phase import make_rng, sample_safe_states

    rng = rng if rng is not None else make_rng(seed)
    drifts: dict = {}
    completed = 0
    attempts = 0
    max_attempts = 20 * n_ic
    while completed < n_ic:
        attempts += 1
        if attempts > max_attempts:
            raise RuntimeError(
                f"could not find {n_ic} non-singular trajectories in "
                f"{max_attempts} draws")
        state = sample_safe_states(rng, 1)[:, 0]
        try:
            traj = integrate(spec, state, t_end, tol=tol, dense=False,
                             dt_out=t_end / 200.0, max_steps=50_000)
        except DomainError:
            continue
        if traj.aborted:
            continue
        completed += 1
        for lbl in traj.traces:
            drifts[lbl] = max(drifts.get(lbl, 0.0), traj.drift(lbl))
    drifts["attempts"] = attempts
    return drifts


def reverse_momenta(spec: SystemSpec, point) -> PhasePoint:
    """Time-reversal partner of a state: kinetic momentum is negated.

    With a vector potential the canonical map is p -> -p - 2 A(q), so
    that p + A flips sign while the position is unchanged.
    """
    pt = point if isinstance(point, PhasePoint) else PhasePoint.from_state(point)
    a = np.asarray([float(value(c)) for c in spec.A(pt.q)])
    return PhasePoint(pt.q, -pt.p - 2.0 * a)


def _radial_period_estimate(times: np.ndarray, states: np.ndarray) -> Optional[float]:
    """Dominant period of r(t)^2 from its mean-crossing intervals."""
    r2 = states[:, 0] ** 2 + states[:, 1] ** 2
    sig = r2 - np.mean(r2)
    signs = np.sign(sig)
    idx = np.nonzero(np.diff(signs) != 0)[0]
    if idx.size < 3:
        return None
    # Linearly interpolate each crossing between its bracketing samples.
    frac = sig[idx] / (sig[idx] - sig[idx + 1])
    crossings = times[idx] + frac * (times[idx + 1] - times[idx])
    # Two crossings per period.
    return 2.0 * float(np.mean(np.diff(crossings)))


def radial_frequency(spec: SystemSpec, ic, horizon: float = 40.0,
                     tol: float = 1e-12) -> Optional[float]:
    """Empirical angular frequency of r^2 oscillation, 2*pi / period."""
    traj = integrate(spec, ic, horizon, tol=tol)
    period = _radial_period_estimate(traj.times, traj.states)
    return None if period is None else 2.0 * np.pi / period


def detect_period(spec: SystemSpec, ic, horizon: float,
                  tol_return: float = 1e-4, tol: float = 1e-12) -> PeriodReport:
    """Search a trajectory for a full 6D phase-space return.

    Near-returns are detected on the dense output (distance relative to
    the trajectory diameter), after skipping a transient window of 10%
    of the radial period; the first candidate below ``tol_return`` is
    polished to a local minimum of the return distance.
    """
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    try:
        traj = integrate(spec, ic, horizon, tol=tol)
    except (DomainError, RuntimeError):
        return PeriodReport(closed=False, period=None,
                            return_distance=float("inf"))
    y0 = traj.states[0]
    diameter = float(np.linalg.norm(
        np.max(traj.states, axis=0) - np.min(traj.states, axis=0)))
    scale = max(diameter, 1e-12)
    if traj.aborted or not np.all(np.isfinite(traj.states)):
        return PeriodReport(closed=False, period=None,
                            return_distance=float("inf"))

    period_est = _radial_period_estimate(traj.times, traj.states)
    t_min = 0.1 * period_est if period_est else 0.05 * horizon

    dense = traj.dense
    ts = traj.times
    dist = np.linalg.norm(traj.states - y0, axis=1) / scale
    mask = ts > t_min
    if not np.any(mask):
        return PeriodReport(closed=False, period=None,
                            return_distance=float(np.min(dist[1:])) if dist.size > 1 else float("inf"))

    def d_of(t):
        return float(np.linalg.norm(dense(t) - y0)) / scale

    # Local minima of the sampled distance, in time order.
    cand = []
    for i in range(1, ts.size - 1):
        if not mask[i]:
            continue
        if dist[i] <= dist[i - 1] and dist[i] <= dist[i + 1]:
            cand.append(i)
    best_d = float(np.min(dist[mask]))
    # Sampling can overshoot a narrow distance dip by orders of
    # magnitude, so polish every plausibly-deep local minimum.
    refine_cut = max(100.0 * tol_return, 0.05)
    for i in cand:
        if dist[i] > refine_cut:
            continue
        res = minimize_scalar(d_of, bracket=None,
                              bounds=(ts[max(i - 1, 0)], ts[min(i + 1, ts.size - 1)]),
                              method="bounded",
                              options={"xatol": 1e-12})
        d_ref = float(res.fun)
        best_d = min(best_d, d_ref)
        if d_ref < tol_return:
            return PeriodReport(closed=True, period=float(res.x),
                                return_distance=d_ref,
                                refinement_iterations=int(res.nfev))
    return PeriodReport(closed=False, period=None, return_distance=best_d)
