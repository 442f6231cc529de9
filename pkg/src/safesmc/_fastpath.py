"""Scalarized simulation loop for two-dimensional catalog models.

Small fixed-step runs spend almost all their time in numpy call overhead on
length-2 vectors, so `simulate` dispatches here whenever the plant comes
from the model catalog, the state is planar, and the controller is one of
the stock laws. The math mirrors the generic path operation for operation
(same finite-difference steps, regularization, gain schedule, and event
latching); an equivalence test keeps the two paths within float noise of
each other.
"""

import warnings
from dataclasses import replace
from math import cos, hypot, isfinite, pi, sin, sqrt

import numpy as np

from .control import AdaptiveController, BARRIER_GAIN_MAX, SmcController
from .simulate import DivergenceError, EventLog, SimConfig, Trajectory


def _disturbance_scalar(catalog):
    """(d0(t), d1(t)) closure for a catalog disturbance, or None."""
    kind = catalog[0]
    if kind == "zero":
        return lambda t: (0.0, 0.0)
    if kind == "constant":
        values = catalog[1]
        if len(values) != 2:
            return None
        d0, d1 = float(values[0]), float(values[1])
        return lambda t: (d0, d1)
    if kind == "sinusoidal":
        amp, freq = catalog[1], catalog[2]
        return lambda t: ((amp * sin(freq * t)),) * 2
    if kind == "piecewise_sinusoidal":
        a1, a2, freq, ts = catalog[1:]

        def delta(t):
            a = a1 if t <= ts else a2
            v = a * sin(freq * t)
            return v, v

        return delta
    return None


def _bound_scalar(catalog, delta_fn):
    """d(t) closure for a catalog disturbance bound, or None."""
    if catalog[0] == "constant":
        value = catalog[1]
        return lambda t: value
    if catalog[0] == "disturbance_norm":

        def d_bound(t):
            d0, d1 = delta_fn(t)
            return hypot(d0, d1)

        return d_bound
    return None


def try_fast_simulate(model, controller, params, config: SimConfig, initial,
                      gamma: float):
    """Run the scalar kernel if every ingredient is supported, else None."""
    if model.dim != 2 or model.constant_input_matrix is None:
        return None
    if config.scheme not in ("euler", "rk4"):
        return None

    db_cat = getattr(model.input_uncertainty, "catalog", None)
    if db_cat is None or (db_cat[0] == "scaled_ones" and db_cat[2]):
        return None
    if db_cat[0] not in ("zero", "scaled_ones"):
        return None
    db_coeff = db_cat[1] if db_cat[0] == "scaled_ones" else 0.0

    delta_cat = getattr(model.disturbance, "catalog", None)
    if delta_cat is None:
        return None
    delta_fn = _disturbance_scalar(delta_cat)
    if delta_fn is None:
        return None

    bound_cat = getattr(model.disturbance_bound, "catalog", None)
    if bound_cat is None:
        return None
    d_fn = _bound_scalar(bound_cat, delta_fn)
    if d_fn is None:
        return None

    adaptive = type(controller) is AdaptiveController
    if not adaptive and type(controller) is not SmcController:
        return None
    if controller.params is not params or controller.model is not model:
        return None
    if controller.gains.d_bound is not model.disturbance_bound:
        return None
    if adaptive and controller.adapt.switched:
        return None

    return _run(model, controller, params, config, initial, gamma,
                db_coeff, delta_fn, d_fn, adaptive)


def _run(model, controller, params, config, initial, gamma, db_coeff,
         delta_fn, d_fn, adaptive):
    # filter constants
    c0, c1 = params.cbf.center
    r2 = params.cbf.radius * params.cbf.radius
    g0_, g1_ = params.goal
    alpha = params.alpha.alpha
    s = params.smoothing

    # input matrix
    G = model.constant_input_matrix
    identity = model._identity
    gnorm = model._const_norm
    gi = model._const_inv
    gi00, gi01, gi10, gi11 = gi[0, 0], gi[0, 1], gi[1, 0], gi[1, 1]
    g00, g01, g10, g11 = G[0, 0], G[0, 1], G[1, 0], G[1, 1]

    kappa = controller.gains.kappa
    one_mu = 1.0 + controller.gains.mu
    tol = controller.tol_sigma
    if adaptive:
        eps = controller.adapt.epsilon
        half_eps = 0.5 * eps
        clamp_level = eps * (1.0 - 1.0 / BARRIER_GAIN_MAX)
    switched = False
    tau = None
    clamp_times = []

    dt = config.dt
    n_steps = int(round(config.horizon / dt))
    if n_steps < 1:
        raise ValueError("horizon shorter than one step")
    stride = config.record_stride
    rec_steps = list(range(0, n_steps + 1, stride))
    if rec_steps[-1] != n_steps:
        rec_steps.append(n_steps)
    n_rec = len(rec_steps)

    times = np.empty(n_rec)
    xs = np.empty((n_rec, 2))
    vs = np.empty((n_rec, 2))
    signorm = np.empty(n_rec)
    hs = np.empty(n_rec)
    hgs = np.empty(n_rec)
    gains = np.empty(n_rec)
    us = np.empty((n_rec, 2))

    def field(x, y):
        dx = x - c0
        dy = y - c1
        gx = 2.0 * dx
        gy = 2.0 * dy
        vdx = g0_ - x
        vdy = g1_ - y
        res = gx * vdx + gy * vdy + alpha * (dx * dx + dy * dy - r2)
        if res >= 0.0:
            return vdx, vdy
        nn = gx * gx + gy * gy
        if nn == 0.0:
            return vdx, vdy
        if res > -s:
            res = 0.5 * res * (1.0 - cos(res * pi / s))
        w = res / nn
        return vdx - w * gx, vdy - w * gy

    def control(t, x, y, vx, vy, frozen_switched):
        fx, fy = field(x, y)
        s0 = vx - fx
        s1 = vy - fy
        norm = sqrt(s0 * s0 + s1 * s1)
        if frozen_switched:
            if norm >= clamp_level:
                clamp_times.append(t)
                warnings.warn(
                    f"barrier gain clamped at t={t:.6g}: sliding variable "
                    "reached the tube radius",
                    RuntimeWarning,
                    stacklevel=2,
                )
                k = BARRIER_GAIN_MAX
            else:
                k = norm / (eps - norm)
        else:
            h_fd = 1e-6 * max(1.0, sqrt(x * x + y * y))
            inv2h = 1.0 / (2.0 * h_fd)
            fpx, fpy = field(x + h_fd, y)
            fmx, fmy = field(x - h_fd, y)
            j00 = (fpx - fmx) * inv2h
            j10 = (fpy - fmy) * inv2h
            fpx, fpy = field(x, y + h_fd)
            fmx, fmy = field(x, y - h_fd)
            j01 = (fpx - fmx) * inv2h
            j11 = (fpy - fmy) * inv2h
            jv0 = j00 * vx + j01 * vy
            jv1 = j10 * vx + j11 * vy
            rho = gnorm * d_fn(t) + sqrt(jv0 * jv0 + jv1 * jv1)
            k = (kappa + rho) / one_mu
        m = norm if norm > tol else tol
        q0 = s0 / m
        q1 = s1 / m
        if identity:
            return -k * q0, -k * q1, k, norm
        return (-k * (gi00 * q0 + gi01 * q1),
                -k * (gi10 * q0 + gi11 * q1), k, norm)

    def accel(t, x, y, u0, u1):
        if db_coeff != 0.0:
            w = db_coeff * sin(x) * (u0 + u1)
            i0 = u0 + w
            i1 = u1 + w
        else:
            i0 = u0
            i1 = u1
        d0, d1 = delta_fn(t)
        i0 += d0
        i1 += d1
        if identity:
            return i0, i1
        return g00 * i0 + g01 * i1, g10 * i0 + g11 * i1

    x, y = float(initial.x[0]), float(initial.x[1])
    vx, vy = float(initial.xdot[0]), float(initial.xdot[1])
    first_reach = None
    reach_threshold = config.reach_threshold
    rk4 = config.scheme == "rk4"
    rec = 0

    for k_step in range(n_steps + 1):
        t = k_step * dt
        # sample evaluation; the adaptive switch latches on samples only
        if adaptive and not switched:
            fx, fy = field(x, y)
            if hypot(vx - fx, vy - fy) <= half_eps:
                switched = True
                tau = t
        u0, u1, gain, snorm = control(t, x, y, vx, vy, switched)
        if k_step == 0 and snorm > 0.0 and kappa * dt >= snorm:
            warnings.warn(
                f"step kappa*dt={kappa * dt:.3g} is not small against "
                f"||sigma(x0)||={snorm:.3g}; reaching resolution will be poor",
                RuntimeWarning,
            )
        if first_reach is None and snorm <= reach_threshold:
            first_reach = t
        if k_step == rec_steps[rec]:
            times[rec] = t
            xs[rec, 0] = x
            xs[rec, 1] = y
            vs[rec, 0] = vx
            vs[rec, 1] = vy
            signorm[rec] = snorm
            dx = x - c0
            dy = y - c1
            hval = dx * dx + dy * dy - r2
            hs[rec] = hval
            hgs[rec] = hval + gamma
            gains[rec] = gain
            us[rec, 0] = u0
            us[rec, 1] = u1
            rec += 1
        if k_step == n_steps:
            break

        a0, a1 = accel(t, x, y, u0, u1)
        if rk4:
            half = 0.5 * dt
            th = t + half
            # stage 2
            x2 = x + half * vx
            y2 = y + half * vy
            vx2 = vx + half * a0
            vy2 = vy + half * a1
            b0, b1, _, _ = control(th, x2, y2, vx2, vy2, switched)
            a20, a21 = accel(th, x2, y2, b0, b1)
            # stage 3
            x3 = x + half * vx2
            y3 = y + half * vy2
            vx3 = vx + half * a20
            vy3 = vy + half * a21
            b0, b1, _, _ = control(th, x3, y3, vx3, vy3, switched)
            a30, a31 = accel(th, x3, y3, b0, b1)
            # stage 4
            tf = t + dt
            x4 = x + dt * vx3
            y4 = y + dt * vy3
            vx4 = vx + dt * a30
            vy4 = vy + dt * a31
            b0, b1, _, _ = control(tf, x4, y4, vx4, vy4, switched)
            a40, a41 = accel(tf, x4, y4, b0, b1)
            sixth = dt / 6.0
            x = x + sixth * (vx + 2.0 * vx2 + 2.0 * vx3 + vx4)
            y = y + sixth * (vy + 2.0 * vy2 + 2.0 * vy3 + vy4)
            vx = vx + sixth * (a0 + 2.0 * a20 + 2.0 * a30 + a40)
            vy = vy + sixth * (a1 + 2.0 * a21 + 2.0 * a31 + a41)
        else:
            x = x + dt * vx
            y = y + dt * vy
            vx = vx + dt * a0
            vy = vy + dt * a1
        if not (isfinite(x) and isfinite(y) and isfinite(vx) and isfinite(vy)):
            raise DivergenceError((k_step + 1) * dt, k_step + 1)

    if adaptive:
        if switched and not controller.adapt.switched:
            controller.adapt = replace(controller.adapt, switched=True, tau=tau)
        controller.clamp_times.extend(clamp_times)

    events = EventLog(
        tau=tau if adaptive else None,
        first_reach=first_reach,
        clamp_times=tuple(clamp_times),
    )
    return Trajectory(times, xs, vs, signorm, hs, hgs, gains, us, events,
                      dt=dt, scheme=config.scheme, record_stride=stride,
                      gamma=gamma)
