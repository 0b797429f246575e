"""Numba-compiled trajectory integrator.

Same scheme and same counter-based noise stream as `_kernels_numpy` (see that
module for the equations); here each trajectory runs as a fused scalar loop,
which is roughly an order of magnitude faster than the vectorized fallback on
long runs. Keyed the same way, so either path reproduces the other's
increments exactly; float results may differ in the last ulp through libm.
"""

import numpy as np
from numba import njit

_GOLD = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_SKEY = np.uint64(0xD1342543DE82EF95)
_SADD = np.uint64(0x2545F4914F6CDD1D)
_TWO53 = 2.0 ** -53
_TWO_PI = 2.0 * np.pi


@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, inline="always")
def _stream_key(seed, stream):
    return _mix64(_mix64(seed + _GOLD) ^ (stream * _SKEY + _SADD))


@njit(cache=True)
def _heun_one(a, ap, b, bp, kappa, gamma_a, gamma_b, eps_b, eps_a,
              t_off_step, dt, n_steps, stride, key, bound2, out_traj):
    """Integrate one trajectory; returns the step index of divergence or -1."""
    ebc = np.conj(eps_b)
    eac = np.conj(eps_a)
    sdt = np.sqrt(dt)
    third = kappa / 3.0
    twok = 2.0 * kappa

    out_traj[0, 0] = a
    out_traj[0, 1] = ap
    out_traj[0, 2] = b
    out_traj[0, 3] = bp

    for k in range(n_steps):
        if k < t_off_step:
            ea0 = eps_a
            eac0 = eac
        else:
            ea0 = 0.0 + 0.0j
            eac0 = 0.0 + 0.0j
        if k + 1 < t_off_step:
            ea1 = eps_a
            eac1 = eac
        else:
            ea1 = 0.0 + 0.0j
            eac1 = 0.0 + 0.0j

        r1 = _mix64(key + np.uint64(2 * k) * _GOLD)
        r2 = _mix64(key + np.uint64(2 * k + 1) * _GOLD)
        u1 = float((r1 >> np.uint64(11)) + np.uint64(1)) * _TWO53
        u2 = float(r2 >> np.uint64(11)) * _TWO53
        rad = np.sqrt(-2.0 * np.log(u1))
        ang = _TWO_PI * u2
        dW1 = rad * np.cos(ang) * sdt
        dW2 = rad * np.sin(ang) * sdt

        fa = ea0 - gamma_a * a + kappa * ap * ap * b
        fap = eac0 - gamma_a * ap + kappa * a * a * bp
        fb = eps_b - gamma_b * b - third * a * a * a
        fbp = ebc - gamma_b * bp - third * ap * ap * ap
        g1 = np.sqrt(twok * ap * b)
        g2 = np.sqrt(twok * a * bp)

        pa = a + fa * dt + g1 * dW1
        pap = ap + fap * dt + g2 * dW2
        pb = b + fb * dt
        pbp = bp + fbp * dt

        fa2 = ea1 - gamma_a * pa + kappa * pap * pap * pb
        fap2 = eac1 - gamma_a * pap + kappa * pa * pa * pbp
        fb2 = eps_b - gamma_b * pb - third * pa * pa * pa
        fbp2 = ebc - gamma_b * pbp - third * pap * pap * pap
        g1p = np.sqrt(twok * pap * pb)
        g2p = np.sqrt(twok * pa * pbp)

        a = a + 0.5 * ((fa + fa2) * dt + (g1 + g1p) * dW1)
        ap = ap + 0.5 * ((fap + fap2) * dt + (g2 + g2p) * dW2)
        b = b + 0.5 * (fb + fb2) * dt
        bp = bp + 0.5 * (fbp + fbp2) * dt

        mag = a.real * a.real + a.imag * a.imag
        m2 = ap.real * ap.real + ap.imag * ap.imag
        if m2 > mag:
            mag = m2
        m2 = b.real * b.real + b.imag * b.imag
        if m2 > mag:
            mag = m2
        m2 = bp.real * bp.real + bp.imag * bp.imag
        if m2 > mag:
            mag = m2
        if not (mag <= bound2):  # also catches NaN
            for m in range((k + 1 + stride - 1) // stride, out_traj.shape[0]):
                out_traj[m, 0] = complex(np.nan, np.nan)
                out_traj[m, 1] = complex(np.nan, np.nan)
                out_traj[m, 2] = complex(np.nan, np.nan)
                out_traj[m, 3] = complex(np.nan, np.nan)
            return k

        if (k + 1) % stride == 0:
            m = (k + 1) // stride
            out_traj[m, 0] = a
            out_traj[m, 1] = ap
            out_traj[m, 2] = b
            out_traj[m, 3] = bp
    return -1


@njit(cache=True)
def heun_batch(a0, ap0, b0, bp0, kappa, gamma_a, gamma_b, eps_b, eps_a,
               t_off_step, dt, n_steps, stride, master_seed, stream0,
               bound, out, diverged):
    """Integrate a batch; out has shape (B, n_steps//stride + 1, 4)."""
    B = a0.shape[0]
    seed = np.uint64(master_seed)
    bound2 = bound * bound
    for i in range(B):
        key = _stream_key(seed, np.uint64(stream0 + i))
        kdiv = _heun_one(a0[i], ap0[i], b0[i], bp0[i], kappa, gamma_a, gamma_b,
                         eps_b, eps_a, t_off_step, dt, n_steps, stride, key,
                         bound2, out[i])
        if kdiv >= 0:
            diverged[i] = True
