"""Compiled inner loops.  Everything here works on plain floats and arrays.

Parameter packing
-----------------
iso  : [k, alpha, A_bw, beta, gamma, n]
act  : [a2, a1, a0, b0, c_f]
ctrl : [kp, ki, ff_b0, ff_b1, ff_a1, integral_limit, dt]
plant state P : [x_m, v_m, a_m, z]
ctrl state    : [integral, e_prev, ff_u_prev, ff_y_prev]
"""
import numpy as np
from numba import njit

BIG = 1.0e6

FAULT_NONE = -1


@njit(cache=True)
def bw_rate(xdot, z, A_bw, beta, gamma, n):
    az = abs(z)
    if n == 1.0:
        return A_bw * xdot - beta * abs(xdot) * z - gamma * xdot * az
    return A_bw * xdot - beta * abs(xdot) * az ** (n - 1.0) * z - gamma * xdot * az**n


@njit(cache=True)
def ctrl_update(cs, ctrl, x_b, x_m):
    """One PI + lead-lag feedforward step; mutates ``cs`` and returns the command."""
    kp, ki, fb0, fb1, fa1, lim, dt = ctrl[0], ctrl[1], ctrl[2], ctrl[3], ctrl[4], ctrl[5], ctrl[6]
    e = x_b - x_m
    integ = cs[0] + 0.5 * dt * (e + cs[1])
    if integ > lim:
        integ = lim
    elif integ < -lim:
        integ = -lim
    ff = fb0 * x_b + fb1 * cs[2] - fa1 * cs[3]
    cs[0] = integ
    cs[1] = e
    cs[2] = x_b
    cs[3] = ff
    return kp * e + ki * integ + ff


@njit(cache=True)
def _plant_rhs(P, u, iso, act, out):
    x, v, a, z = P[0], P[1], P[2], P[3]
    R = iso[0] * x + iso[1] * z
    out[0] = v
    out[1] = a
    out[2] = -act[2] * x - act[1] * v - act[0] * a + act[3] * u - act[4] * R
    out[3] = bw_rate(v, z, iso[2], iso[3], iso[4], iso[5])


@njit(cache=True)
def plant_rk4(P, u, dt, iso, act):
    """Actuator + isolator advanced one step with the command held."""
    k1 = np.empty(4)
    k2 = np.empty(4)
    k3 = np.empty(4)
    k4 = np.empty(4)
    tmp = np.empty(4)
    _plant_rhs(P, u, iso, act, k1)
    for i in range(4):
        tmp[i] = P[i] + 0.5 * dt * k1[i]
    _plant_rhs(tmp, u, iso, act, k2)
    for i in range(4):
        tmp[i] = P[i] + 0.5 * dt * k2[i]
    _plant_rhs(tmp, u, iso, act, k3)
    for i in range(4):
        tmp[i] = P[i] + dt * k3[i]
    _plant_rhs(tmp, u, iso, act, k4)
    for i in range(4):
        P[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])


@njit(cache=True)
def actuator_rk4(S, u, F, dt, act):
    """Standalone actuator with a constant reaction force over the step."""
    k = np.empty((4, 3))
    tmp = S.copy()
    for s in range(4):
        if s == 1 or s == 2:
            for i in range(3):
                tmp[i] = S[i] + 0.5 * dt * k[s - 1, i]
        elif s == 3:
            for i in range(3):
                tmp[i] = S[i] + dt * k[2, i]
        k[s, 0] = tmp[1]
        k[s, 1] = tmp[2]
        k[s, 2] = -act[2] * tmp[0] - act[1] * tmp[1] - act[0] * tmp[2] + act[3] * u - act[4] * F
    for i in range(3):
        S[i] += dt / 6.0 * (k[0, i] + 2.0 * k[1, i] + 2.0 * k[2, i] + k[3, i])


@njit(cache=True)
def _struct_rhs(A, B, Z, g, F, out):
    m = Z.shape[0]
    for i in range(m):
        acc = B[i, 0] * g + B[i, 1] * F
        for j in range(m):
            acc += A[i, j] * Z[j]
        out[i] = acc


@njit(cache=True)
def linear_kernel(A, ag, dt, Zout, acc):
    """Monolithic RK4 of dZ = A Z + b*ag with b = [0, -1] (ground column only)."""
    N = ag.shape[0]
    m = A.shape[0]
    n = m // 2
    Z = np.zeros(m)
    k1 = np.empty(m)
    k2 = np.empty(m)
    k3 = np.empty(m)
    k4 = np.empty(m)
    tmp = np.empty(m)
    B = np.zeros((m, 2))
    for i in range(n, m):
        B[i, 0] = -1.0
    for t in range(N):
        g0 = ag[t]
        _struct_rhs(A, B, Z, g0, 0.0, k1)
        for i in range(m):
            Zout[t, i] = Z[i]
        for i in range(n):
            acc[t, i] = k1[n + i] + g0
        for i in range(m):
            v = Z[i]
            if not (abs(v) < BIG):
                return t, i
        if t + 1 == N:
            break
        g1 = ag[t + 1]
        gm = 0.5 * (g0 + g1)
        for i in range(m):
            tmp[i] = Z[i] + 0.5 * dt * k1[i]
        _struct_rhs(A, B, tmp, gm, 0.0, k2)
        for i in range(m):
            tmp[i] = Z[i] + 0.5 * dt * k2[i]
        _struct_rhs(A, B, tmp, gm, 0.0, k3)
        for i in range(m):
            tmp[i] = Z[i] + dt * k3[i]
        _struct_rhs(A, B, tmp, g1, 0.0, k4)
        for i in range(m):
            Z[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    return -1, -1


@njit(cache=True)
def _ideal_rhs(A, B, Z, z, g, F, iso, out):
    _struct_rhs(A, B, Z, g, F, out)
    n = Z.shape[0] // 2
    return bw_rate(Z[n], z, iso[2], iso[3], iso[4], iso[5])


@njit(cache=True)
def rths_kernel(
    A, B, ag, dt, iso, act, ideal, m_p, noise, accel_oracle, ctrl, delay, linear_hold,
    Z, P, cs, hist, t0, t1,
    Zout, acc, xb_out, xm_out, R_out, Rhat_out, Flc_out, cmd_out, fed_out,
):
    """Advance the coupled loop over samples ``t0 <= t < t1``.

    State (``Z``, ``P``, ``cs``, ``hist``) is updated in place so that the run
    can be resumed in chunks.  ``hist`` holds [x_m(t-1), x_m(t-2), v_b(t-1)].
    Returns (sample, channel) of the first fault or (-1, -1).
    """
    N = ag.shape[0]
    m = A.shape[0]
    n = m // 2
    k1 = np.empty(m)
    k2 = np.empty(m)
    k3 = np.empty(m)
    k4 = np.empty(m)
    tmp = np.empty(m)
    for t in range(t0, t1):
        x_b = Z[0]
        if ideal:
            P[0] = x_b
            P[1] = Z[n]
            P[2] = (Z[n] - hist[2]) / dt
        x_m = P[0]
        cmd = ctrl_update(cs, ctrl, x_b, x_m)
        R = iso[0] * x_m + iso[1] * P[3]
        a_true = P[2]
        F_lc = R + m_p * a_true + noise[t]
        if accel_oracle:
            a_est = a_true
        else:
            a_est = (x_m - 2.0 * hist[0] + hist[1]) / (dt * dt)
        R_hat = F_lc - m_p * a_est

        xb_out[t] = x_b
        xm_out[t] = x_m
        R_out[t] = R
        Rhat_out[t] = R_hat
        Flc_out[t] = F_lc
        cmd_out[t] = cmd
        fed_out[t] = Rhat_out[t - delay] if t >= delay else 0.0

        ia = t - delay + 1
        Ra = Rhat_out[ia] if ia >= 0 else 0.0
        Rb = Rhat_out[ia - 1] if ia >= 1 else 0.0
        slope = (Ra - Rb) if linear_hold else 0.0
        # the restoring force opposes the base motion
        F0 = -Ra
        Fm = -(Ra + 0.5 * slope)
        F1 = -(Ra + slope)

        g0 = ag[t]
        z0 = P[3]
        dz1 = _ideal_rhs(A, B, Z, z0, g0, F0, iso, k1)
        for i in range(m):
            Zout[t, i] = Z[i]
        for i in range(n):
            acc[t, i] = k1[n + i] + g0

        for i in range(m):
            if not (abs(Z[i]) < BIG):
                return t, i
        for i in range(4):
            if not (abs(P[i]) < BIG):
                return t, m + i
        if not (abs(cmd) < BIG):
            return t, m + 4
        if not (abs(R_hat) < 1e30):
            return t, m + 5

        hist[1] = hist[0]
        hist[0] = x_m
        hist[2] = Z[n]
        if t + 1 == N:
            break
        g1 = ag[t + 1]
        gm = 0.5 * (g0 + g1)
        if ideal:
            for i in range(m):
                tmp[i] = Z[i] + 0.5 * dt * k1[i]
            dz2 = _ideal_rhs(A, B, tmp, z0 + 0.5 * dt * dz1, gm, Fm, iso, k2)
            for i in range(m):
                tmp[i] = Z[i] + 0.5 * dt * k2[i]
            dz3 = _ideal_rhs(A, B, tmp, z0 + 0.5 * dt * dz2, gm, Fm, iso, k3)
            for i in range(m):
                tmp[i] = Z[i] + dt * k3[i]
            dz4 = _ideal_rhs(A, B, tmp, z0 + dt * dz3, g1, F1, iso, k4)
            P[3] = z0 + dt / 6.0 * (dz1 + 2.0 * dz2 + 2.0 * dz3 + dz4)
        else:
            plant_rk4(P, cmd, dt, iso, act)
            for i in range(m):
                tmp[i] = Z[i] + 0.5 * dt * k1[i]
            _struct_rhs(A, B, tmp, gm, Fm, k2)
            for i in range(m):
                tmp[i] = Z[i] + 0.5 * dt * k2[i]
            _struct_rhs(A, B, tmp, gm, Fm, k3)
            for i in range(m):
                tmp[i] = Z[i] + dt * k3[i]
            _struct_rhs(A, B, tmp, g1, F1, k4)
        for i in range(m):
            Z[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    return -1, -1
