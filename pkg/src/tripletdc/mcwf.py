"""Monte Carlo wave function cross-check in a truncated Fock basis.

Independent of the phase-space trajectory engine: the same physics is evolved
as jump-unraveled state vectors under

    H / hbar = (i kappa / 3) (adag^3 b - a^3 bdag)
             + i (eps_b bdag - conj(eps_b) b) + i (eps_a adag - conj(eps_a) a)

with collapse operators sqrt(jump_rate_factor * gamma_i) * (mode i). The
default jump_rate_factor = 2 makes photon number decay as exp(-2 gamma t),
matching amplitude damping -gamma in the phase-space equations; factor 1 is
kept as a switch for the other common rate convention.

First order scheme per step: jump with probability dt * <L^dag L>, otherwise
drift with (1 - i dt H_eff) and renormalize, H_eff = H - (i/2) sum L^dag L.
Steps where the total jump probability reaches max_jump_prob abort with
StepSizeError rather than silently losing accuracy.

Agreement between this method and the trajectory ensembles is only expected
at desk scale (small photon numbers, cutoffs of tens), which is what
compare_methods quantifies via z scores on shared observables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from tripletdc.exceptions import (ConfigurationError, ConsistencyError,
                                  StepSizeError)
from tripletdc.semiclassical import (DriveSchedule, SystemParams,
                                     integrate_semiclassical)

OBSERVABLES = ("na", "nb", "Xa", "Ya", "Xb", "Yb")

# fractional probability mass allowed in the top Fock level before the
# truncation is considered untrustworthy
LEAK_LIMIT = 1e-4


@dataclass(frozen=True)
class FockConfig:
    """Truncation and run shape for the wave-function method."""

    cutoff_a: int = 40
    cutoff_b: int = 20
    dt: float = 5e-4
    t_final: float = 6.0
    n_traj: int = 200
    sample_stride: int = 100
    master_seed: int = 0
    jump_rate_factor: float = 2.0
    max_jump_prob: float = 0.1

    def __post_init__(self):
        if self.cutoff_a < 4 or self.cutoff_b < 2:
            raise ConfigurationError("cutoffs too small to host the interaction")
        if not self.dt > 0 or not self.t_final > 0:
            raise ConfigurationError("dt and t_final must be > 0")
        if self.n_traj < 1 or self.sample_stride < 1:
            raise ConfigurationError("n_traj and sample_stride must be >= 1")
        if self.jump_rate_factor <= 0:
            raise ConfigurationError("jump_rate_factor must be > 0")
        if not 0 < self.max_jump_prob <= 0.5:
            raise ConfigurationError("max_jump_prob must lie in (0, 0.5]")

    def n_steps(self) -> int:
        raw = max(1, int(round(self.t_final / self.dt)))
        return ((raw + self.sample_stride - 1) // self.sample_stride) * self.sample_stride


@dataclass(frozen=True)
class Operators:
    """Sparse operators on the joint truncated space (CSR)."""

    dim: int
    a: sp.csr_matrix
    b: sp.csr_matrix
    h_on: sp.csr_matrix
    h_off: sp.csr_matrix
    jump_ops: tuple
    rate_diags: tuple
    na_diag: np.ndarray
    nb_diag: np.ndarray
    quad_ops: dict
    top_a_mask: np.ndarray
    top_b_mask: np.ndarray


def _destroy(n_levels: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, n_levels)), 1, format="csr")


def coherent_state(alpha: complex, n_levels: int) -> np.ndarray:
    """Truncated coherent state vector; rejects truncations losing mass."""
    n = np.arange(n_levels)
    coeff = np.empty(n_levels, dtype=np.complex128)
    coeff[0] = math.exp(-0.5 * abs(alpha) ** 2)
    for k in range(1, n_levels):
        coeff[k] = coeff[k - 1] * alpha / math.sqrt(k)
    lost = 1.0 - float(np.vdot(coeff, coeff).real)
    if lost > 1e-5:
        raise ConfigurationError(
            f"coherent state alpha={alpha} loses {lost:.2e} probability at cutoff {n_levels}")
    return coeff / np.linalg.norm(coeff)


def fock_state(n: int, n_levels: int) -> np.ndarray:
    if not 0 <= n < n_levels:
        raise ConfigurationError(f"Fock level {n} outside cutoff {n_levels}")
    v = np.zeros(n_levels, dtype=np.complex128)
    v[n] = 1.0
    return v


def product_state(vec_a: np.ndarray, vec_b: np.ndarray) -> np.ndarray:
    return np.kron(vec_a, vec_b)


def build_operators(params: SystemParams, schedule: DriveSchedule,
                    fock: FockConfig) -> Operators:
    na, nb = fock.cutoff_a, fock.cutoff_b
    a = sp.kron(_destroy(na), sp.identity(nb, format="csr"), format="csr")
    b = sp.kron(sp.identity(na, format="csr"), _destroy(nb), format="csr")
    adag = a.conj().T.tocsr()
    bdag = b.conj().T.tocsr()

    h_int = (1j * params.kappa / 3.0) * ((adag ** 3) @ b - (a ** 3) @ bdag)
    eps_b = complex(params.epsilon_b)
    h_pump = 1j * eps_b * bdag - 1j * np.conj(eps_b) * b
    eps_a = complex(schedule.epsilon_a)
    h_seed = 1j * eps_a * adag - 1j * np.conj(eps_a) * a

    na_grid = np.repeat(np.arange(na), nb).astype(float)
    nb_grid = np.tile(np.arange(nb), na).astype(float)
    rate_a = fock.jump_rate_factor * params.gamma_a
    rate_b = fock.jump_rate_factor * params.gamma_b
    jump_ops = (np.sqrt(rate_a) * a, np.sqrt(rate_b) * b)
    rate_diags = (rate_a * na_grid, rate_b * nb_grid)
    damp = sp.diags(-0.5j * (rate_diags[0] + rate_diags[1]))

    h_off = (h_int + h_pump + damp).tocsr()
    h_on = (h_off + h_seed).tocsr()

    quad_ops = {
        "Xa": (adag + a).tocsr(),
        "Ya": (1j * (adag - a)).tocsr(),
        "Xb": (bdag + b).tocsr(),
        "Yb": (1j * (bdag - b)).tocsr(),
    }
    return Operators(
        dim=na * nb, a=a, b=b, h_on=h_on, h_off=h_off,
        jump_ops=jump_ops, rate_diags=rate_diags,
        na_diag=na_grid, nb_diag=nb_grid, quad_ops=quad_ops,
        top_a_mask=(na_grid == na - 1), top_b_mask=(nb_grid == nb - 1),
    )


def validate_cutoffs(params: SystemParams, schedule: DriveSchedule, fock: FockConfig,
                     alpha0: complex, beta0: complex) -> None:
    """Reject truncations the expected dynamics would overrun.

    Photon numbers are estimated from the deterministic trajectory of the same
    initial condition; each cutoff must exceed that estimate by four standard
    deviations of a Poissonian of the same mean.
    """
    series = integrate_semiclassical(params, schedule, alpha0=alpha0, beta0=beta0,
                                     t_final=fock.t_final)
    n_a_est = float(np.max(np.abs(series.alpha) ** 2))
    n_b_est = float(np.max(np.abs(series.beta) ** 2))
    # pumped mode never stays empty; drive builds it toward eps_b / gamma_b
    n_b_est = max(n_b_est, abs(complex(params.epsilon_b) / params.gamma_b) ** 2)
    for label, est, cutoff in (("a", n_a_est, fock.cutoff_a), ("b", n_b_est, fock.cutoff_b)):
        need = est + 4.0 * math.sqrt(max(est, 1.0))
        if need >= cutoff - 1:
            raise ConfigurationError(
                f"mode {label} cutoff {cutoff} too small: expect <n> up to {est:.1f},"
                f" need at least {need + 1:.0f} levels")


@dataclass(frozen=True)
class McwfSeries:
    """Trajectory-averaged observables from the wave-function method."""

    times: np.ndarray
    n_traj: int
    mean: dict
    sem: dict
    cutoff_leak: float
    n_jumps_mean: float


def mcwf_trajectory(ops: Operators, psi0: np.ndarray, fock: FockConfig,
                    rng: np.random.Generator, t_off: float | None):
    """Evolve one unraveled trajectory; returns (samples, leak, n_jumps).

    samples has one row per sample time, columns ordered as OBSERVABLES.
    """
    n_steps = fock.n_steps()
    stride = fock.sample_stride
    n_samples = n_steps // stride + 1
    out = np.empty((n_samples, len(OBSERVABLES)))
    psi = psi0.astype(np.complex128, copy=True)
    nrm = np.linalg.norm(psi)
    if not np.isclose(nrm, 1.0, rtol=0, atol=1e-8):
        raise ConfigurationError("initial state is not normalized")
    psi /= nrm

    t_off_step = n_steps + 2 if t_off is None else int(round(t_off / fock.dt))
    leak = 0.0
    n_jumps = 0

    def record(m, psi):
        prob = np.abs(psi) ** 2
        out[m, 0] = float(prob @ ops.na_diag)
        out[m, 1] = float(prob @ ops.nb_diag)
        for j, name in enumerate(("Xa", "Ya", "Xb", "Yb")):
            out[m, 2 + j] = float(np.vdot(psi, ops.quad_ops[name] @ psi).real)
        return max(float(prob @ ops.top_a_mask), float(prob @ ops.top_b_mask))

    leak = record(0, psi)
    for k in range(n_steps):
        h = ops.h_on if k < t_off_step else ops.h_off
        prob = np.abs(psi) ** 2
        p_each = np.array([fock.dt * float(prob @ rd) for rd in ops.rate_diags])
        dp = float(p_each.sum())
        if dp >= fock.max_jump_prob:
            raise StepSizeError(
                f"jump probability {dp:.3f} per step at t={k * fock.dt:.4f};"
                f" reduce dt below {fock.dt * fock.max_jump_prob / dp:.2e}")
        r = rng.random()
        if r < dp:
            # pick the channel proportionally to its rate
            channel = 0 if r < p_each[0] else 1
            psi = ops.jump_ops[channel] @ psi
            psi /= np.linalg.norm(psi)
            n_jumps += 1
        else:
            psi = psi - 1j * fock.dt * (h @ psi)
            psi /= np.linalg.norm(psi)
        if (k + 1) % stride == 0:
            leak = max(leak, record((k + 1) // stride, psi))
    return out, leak, n_jumps


def mcwf_ensemble(params: SystemParams, schedule: DriveSchedule, fock: FockConfig,
                  initial=None, check_cutoffs: bool = True) -> McwfSeries:
    """Average an ensemble of unraveled trajectories.

    initial: None for vacuum, a (alpha0, beta0) pair for a coherent product
    state, or a raw normalized vector on the joint space. Observable streams
    are averaged across trajectories with their standard errors; the worst
    top-level occupancy seen is reported as cutoff_leak and must stay under
    LEAK_LIMIT.
    """
    ops = build_operators(params, schedule, fock)
    if initial is None:
        alpha0 = beta0 = 0.0
        psi0 = product_state(fock_state(0, fock.cutoff_a), fock_state(0, fock.cutoff_b))
    elif isinstance(initial, np.ndarray):
        alpha0 = beta0 = 0.0
        if initial.shape != (ops.dim,):
            raise ConfigurationError(f"initial vector must have length {ops.dim}")
        psi0 = initial
        check_cutoffs = False
    else:
        alpha0, beta0 = initial
        psi0 = product_state(coherent_state(alpha0, fock.cutoff_a),
                             coherent_state(beta0, fock.cutoff_b))
    if check_cutoffs:
        validate_cutoffs(params, schedule, fock, alpha0, beta0)

    n_samples = fock.n_steps() // fock.sample_stride + 1
    total = np.zeros((n_samples, len(OBSERVABLES)))
    total_sq = np.zeros_like(total)
    worst_leak = 0.0
    jumps = 0
    for i in range(fock.n_traj):
        rng = np.random.Generator(np.random.Philox(
            key=np.array([fock.master_seed & 0xFFFFFFFFFFFFFFFF, i], dtype=np.uint64)))
        samples, leak, n_jumps = mcwf_trajectory(ops, psi0, fock, rng, schedule.t_off)
        total += samples
        total_sq += samples ** 2
        worst_leak = max(worst_leak, leak)
        jumps += n_jumps
    mean = total / fock.n_traj
    dof = max(fock.n_traj - 1, 1)
    var = np.maximum(total_sq - fock.n_traj * mean ** 2, 0.0) / dof
    sem = np.sqrt(var / fock.n_traj)
    if worst_leak > LEAK_LIMIT:
        raise ConfigurationError(
            f"top Fock level reached occupancy {worst_leak:.2e}; raise the cutoffs")
    times = np.arange(n_samples) * (fock.sample_stride * fock.dt)
    return McwfSeries(
        times=times, n_traj=fock.n_traj,
        mean={name: mean[:, j] for j, name in enumerate(OBSERVABLES)},
        sem={name: sem[:, j] for j, name in enumerate(OBSERVABLES)},
        cutoff_leak=worst_leak, n_jumps_mean=jumps / fock.n_traj,
    )


@dataclass(frozen=True)
class ComparisonResult:
    """z-score summary between two methods on shared observables and times."""

    times: np.ndarray
    observables: tuple
    z: dict
    mean_abs_z: float
    max_abs_z: float
    n_points: int


def compare_methods(mcwf_series: McwfSeries, sde_series, observables=OBSERVABLES,
                    time_atol: float = 1e-9, diff_atol: float = 1e-6) -> ComparisonResult:
    """Match sample grids and score |difference| / combined standard error.

    Differences below diff_atol count as zero regardless of the errors; this
    absorbs state-preparation truncation at deterministic sample points (e.g.
    t=0, where both methods have zero standard error but the truncated
    coherent state is off by ~1e-8). A difference beyond diff_atol with zero
    combined error is a genuine inconsistency and scores inf.

    Grids that share sample times are compared at those times directly; when
    they interleave instead, the second series is resampled onto the first by
    linear interpolation over the overlapping range. Disjoint ranges are an
    error.
    """
    t1 = mcwf_series.times
    t2 = sde_series.times
    idx2 = np.searchsorted(t2, t1)
    pairs = []
    for i, j in enumerate(idx2):
        for jj in (j - 1, j):
            if 0 <= jj < t2.size and abs(t1[i] - t2[jj]) <= time_atol * max(1.0, abs(t1[i])):
                pairs.append((i, jj))
                break
    if pairs:
        i1 = np.array([p[0] for p in pairs])
        i2 = np.array([p[1] for p in pairs])

        def second(name):
            return (sde_series.mean[name].real[i2], sde_series.sem_re[name][i2])
    else:
        lo = max(t1[0], t2[0])
        hi = min(t1[-1], t2[-1])
        keep = (t1 >= lo - time_atol) & (t1 <= hi + time_atol)
        if not np.any(keep):
            raise ConsistencyError("sample time ranges do not overlap")
        i1 = np.nonzero(keep)[0]

        def second(name):
            return (np.interp(t1[i1], t2, sde_series.mean[name].real),
                    np.interp(t1[i1], t2, sde_series.sem_re[name]))
    zs = {}
    for name in observables:
        m1 = mcwf_series.mean[name][i1]
        s1 = mcwf_series.sem[name][i1]
        m2, s2 = second(name)
        diff = np.abs(m1 - m2)
        sem = np.hypot(s1, s2)
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(diff <= diff_atol, 0.0, diff / sem)
        zs[name] = z
    allz = np.concatenate([zs[n] for n in observables])
    return ComparisonResult(
        times=t1[i1], observables=tuple(observables), z=zs,
        mean_abs_z=float(np.mean(allz)), max_abs_z=float(np.max(allz)),
        n_points=int(allz.size),
    )
