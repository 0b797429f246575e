"""Pure-numpy trajectory integrator, vectorized over a batch.

Stochastic Heun (predictor-corrector with averaged diffusion) for the
truncated positive-P equations in (alpha, alpha_plus, beta, beta_plus):

    d alpha      = (eps_a  - ga*alpha  + k*alpha_plus^2*beta ) dt + sqrt(2 k alpha_plus beta) dW1
    d alpha_plus = (eps_a* - ga*alpha+ + k*alpha^2*beta_plus ) dt + sqrt(2 k alpha beta_plus) dW2
    d beta       = (eps_b  - gb*beta  - (k/3) alpha^3       ) dt
    d beta_plus  = (eps_b* - gb*beta+ - (k/3) alpha_plus^3  ) dt

dW1, dW2 are independent real Gaussians of variance dt. The noise amplitude
of each driven variable does not depend on that variable through its own
noise channel, so the Ito and Stratonovich forms coincide and the averaged
Heun step converges to the Ito solution.

Noise is a counter-based splitmix64 hash keyed by (master_seed, stream_id,
step, draw): trajectory i of a run always sees the same increments no matter
how trajectories are batched or which kernel path executes.
"""

import numpy as np

_GOLD = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_SKEY = np.uint64(0xD1342543DE82EF95)
_SADD = np.uint64(0x2545F4914F6CDD1D)
_TWO53 = float(2.0 ** -53)


def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def stream_keys(master_seed: int, stream0: int, n: int) -> np.ndarray:
    """Per-trajectory hash keys for streams stream0 .. stream0+n-1."""
    streams = np.arange(stream0, stream0 + n, dtype=np.uint64)
    seed = np.uint64(master_seed & 0xFFFFFFFFFFFFFFFF)
    return _mix64(_mix64(seed + _GOLD) ^ (streams * _SKEY + _SADD))


def _normal_pair(keys, counter):
    """One Box-Muller pair per key at the given step counter."""
    c1 = np.uint64(2 * counter)
    c2 = np.uint64(2 * counter + 1)
    r1 = _mix64(keys + c1 * _GOLD)
    r2 = _mix64(keys + c2 * _GOLD)
    u1 = ((r1 >> np.uint64(11)) + np.uint64(1)).astype(np.float64) * _TWO53
    u2 = (r2 >> np.uint64(11)).astype(np.float64) * _TWO53
    rad = np.sqrt(-2.0 * np.log(u1))
    ang = (2.0 * np.pi) * u2
    return rad * np.cos(ang), rad * np.sin(ang)


def heun_batch(a0, ap0, b0, bp0, kappa, gamma_a, gamma_b, eps_b, eps_a,
               t_off_step, dt, n_steps, stride, master_seed, stream0,
               bound, out, diverged):
    """Integrate a batch; out has shape (B, n_steps//stride + 1, 4).

    A trajectory whose largest |component| exceeds bound is frozen, flagged in
    diverged, and its remaining samples are NaN.
    """
    # frozen diverged trajectories keep producing inf/nan in unused lanes
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        _heun_batch_inner(a0, ap0, b0, bp0, kappa, gamma_a, gamma_b, eps_b, eps_a,
                          t_off_step, dt, n_steps, stride, master_seed, stream0,
                          bound, out, diverged)


def _heun_batch_inner(a0, ap0, b0, bp0, kappa, gamma_a, gamma_b, eps_b, eps_a,
                      t_off_step, dt, n_steps, stride, master_seed, stream0,
                      bound, out, diverged):
    B = a0.shape[0]
    a = a0.astype(np.complex128).copy()
    ap = ap0.astype(np.complex128).copy()
    b = b0.astype(np.complex128).copy()
    bp = bp0.astype(np.complex128).copy()
    keys = stream_keys(master_seed, stream0, B)
    ebc = np.conj(eps_b)
    sdt = np.sqrt(dt)
    third = kappa / 3.0
    twok = 2.0 * kappa
    alive = np.ones(B, dtype=bool)
    bound2 = bound * bound

    out[:, 0, 0] = a
    out[:, 0, 1] = ap
    out[:, 0, 2] = b
    out[:, 0, 3] = bp

    for k in range(n_steps):
        ea0 = eps_a if k < t_off_step else 0.0 + 0.0j
        ea1 = eps_a if (k + 1) < t_off_step else 0.0 + 0.0j
        eac0 = np.conj(ea0)
        eac1 = np.conj(ea1)

        z1, z2 = _normal_pair(keys, k)
        dW1 = z1 * sdt
        dW2 = z2 * sdt

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

        na = a + 0.5 * ((fa + fa2) * dt + (g1 + g1p) * dW1)
        nap = ap + 0.5 * ((fap + fap2) * dt + (g2 + g2p) * dW2)
        nb = b + 0.5 * (fb + fb2) * dt
        nbp = bp + 0.5 * (fbp + fbp2) * dt

        a = np.where(alive, na, a)
        ap = np.where(alive, nap, ap)
        b = np.where(alive, nb, b)
        bp = np.where(alive, nbp, bp)

        mag = np.maximum(
            np.maximum(a.real ** 2 + a.imag ** 2, ap.real ** 2 + ap.imag ** 2),
            np.maximum(b.real ** 2 + b.imag ** 2, bp.real ** 2 + bp.imag ** 2))
        blew = alive & ~(mag <= bound2)  # catches NaN as well
        if blew.any():
            diverged[blew] = True
            alive &= ~blew

        if (k + 1) % stride == 0:
            m = (k + 1) // stride
            out[:, m, 0] = np.where(alive, a, np.nan)
            out[:, m, 1] = np.where(alive, ap, np.nan)
            out[:, m, 2] = np.where(alive, b, np.nan)
            out[:, m, 3] = np.where(alive, bp, np.nan)
