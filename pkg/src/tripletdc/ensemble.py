"""Stochastic trajectory ensembles for the truncated positive-P equations.

Each cavity state is represented by four independent complex variables
(alpha, alpha_plus, beta, beta_plus); alpha_plus plays the role of the
conjugate but fluctuates independently, so normally ordered operator moments
are plain ensemble averages of products, e.g.

    <n_a>    = mean(alpha_plus * alpha)
    <X_a>    = mean(alpha + alpha_plus)          X = a_dag + a
    <X_a^2>  = mean(1 + 2 alpha alpha_plus + alpha^2 + alpha_plus^2)
    <Y_a>    = mean(i (alpha_plus - alpha))      Y = i (a_dag - a)
    <Y_a^2>  = mean(1 + 2 alpha alpha_plus - alpha^2 - alpha_plus^2)

Imaginary parts of these averages are pure sampling noise and are tracked so
tests can confirm they vanish within error.

Trajectories integrate with a fixed-step stochastic Heun scheme (see the
kernel modules); every trajectory owns a deterministic noise stream keyed by
(master_seed, stream index), so results are bit-identical for a given seed,
configuration and kernel path, independent of batching.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from tripletdc import accel
from tripletdc.exceptions import (ConfigurationError, InvalidParameterError,
                                  InvalidRunError, StatisticsError)
from tripletdc.semiclassical import DriveSchedule, SystemParams, steady_state_branches

QUANTITIES = ("na", "nb", "Xa", "Ya", "Xb", "Yb",
              "Xa2", "Ya2", "Xb2", "Yb2", "abs_a")

# fraction of diverged trajectories above which a run is not trusted
MAX_DIVERGED_FRACTION = 0.01


@dataclass(frozen=True)
class PhaseSpacePoint:
    """A point of the doubled phase space."""

    alpha: complex = 0.0
    alpha_plus: complex = 0.0
    beta: complex = 0.0
    beta_plus: complex = 0.0

    def __post_init__(self):
        for name in ("alpha", "alpha_plus", "beta", "beta_plus"):
            object.__setattr__(self, name, complex(getattr(self, name)))

    @classmethod
    def coherent(cls, alpha: complex = 0.0, beta: complex = 0.0) -> "PhaseSpacePoint":
        """Delta distribution representing the coherent product state."""
        return cls(alpha, np.conj(alpha), beta, np.conj(beta))

    @classmethod
    def vacuum(cls) -> "PhaseSpacePoint":
        return cls()

    def max_abs(self) -> float:
        return max(abs(self.alpha), abs(self.alpha_plus),
                   abs(self.beta), abs(self.beta_plus))


def phase_space_drift(point: PhaseSpacePoint, params: SystemParams,
                      epsilon_a: complex = 0.0) -> PhaseSpacePoint:
    """Deterministic part of the doubled-variable equations of motion.

    On the conjugate-symmetric slice (alpha_plus = alpha*, beta_plus = beta*)
    the first two components are conjugates of each other and the alpha/beta
    components reduce to `semiclassical_drift`.
    """
    a, ap = point.alpha, point.alpha_plus
    b, bp = point.beta, point.beta_plus
    k = params.kappa
    ea = complex(epsilon_a)
    return PhaseSpacePoint(
        alpha=ea - params.gamma_a * a + k * ap * ap * b,
        alpha_plus=np.conj(ea) - params.gamma_a * ap + k * a * a * bp,
        beta=params.epsilon_b - params.gamma_b * b - (k / 3.0) * a ** 3,
        beta_plus=np.conj(params.epsilon_b) - params.gamma_b * bp - (k / 3.0) * ap ** 3,
    )


def noise_amplitudes(point: PhaseSpacePoint, params: SystemParams) -> tuple[complex, complex]:
    """Multiplicative noise amplitudes (g1 on alpha, g2 on alpha_plus).

    Principal complex square roots of 2k*alpha_plus*beta and 2k*alpha*beta_plus;
    the beta equations carry no noise. From the doubled vacuum both amplitudes
    vanish, so an unseeded run never leaves the origin in the a mode.
    """
    g1 = complex(np.sqrt(complex(2.0 * params.kappa * point.alpha_plus * point.beta)))
    g2 = complex(np.sqrt(complex(2.0 * params.kappa * point.alpha * point.beta_plus)))
    return g1, g2


@dataclass(frozen=True)
class EnsembleConfig:
    """Run shape for a trajectory ensemble.

    divergence_bound None selects the automatic policy: 1000x the upper-branch
    magnitude above threshold, 1e6 below (never less than 1000x the initial
    point). backend None uses the path chosen by `tripletdc.accel`.
    The initial distribution is a delta at a PhaseSpacePoint; other vacuum
    representations would plug in here as samplers.
    """

    n_traj: int = 100_000
    t_final: float = 30.0
    dt: float = 1e-3
    sample_stride: int = 50
    master_seed: int = 0
    divergence_bound: float | None = None
    batch_size: int = 256
    backend: str | None = None

    def __post_init__(self):
        if self.n_traj < 1:
            raise ConfigurationError(f"n_traj must be >= 1, got {self.n_traj}")
        if not self.dt > 0:
            raise ConfigurationError(f"dt must be > 0, got {self.dt}")
        if not self.t_final > 0:
            raise ConfigurationError(f"t_final must be > 0, got {self.t_final}")
        if self.sample_stride < 1:
            raise ConfigurationError(f"sample_stride must be >= 1, got {self.sample_stride}")
        if self.batch_size < 1:
            raise ConfigurationError(f"batch_size must be >= 1, got {self.batch_size}")

    def n_steps(self) -> int:
        """Step count, rounded up to a whole number of sample strides."""
        raw = max(1, int(round(self.t_final / self.dt)))
        return ((raw + self.sample_stride - 1) // self.sample_stride) * self.sample_stride


@dataclass(frozen=True)
class MomentSeries:
    """Ensemble moment averages on the sample grid.

    mean maps quantity name to a complex per-time array; sem_re / sem_im are
    the standard errors of its real and imaginary parts. Quantity names are
    listed in QUANTITIES. valid is False when more than MAX_DIVERGED_FRACTION
    of trajectories diverged.
    """

    times: np.ndarray
    n_traj: int
    n_kept: int
    n_diverged: int
    valid: bool
    mean: dict = field(repr=False)
    sem_re: dict = field(repr=False)
    sem_im: dict = field(repr=False)

    def real_mean(self, name: str) -> np.ndarray:
        return self.mean[name].real

    def quadrature_width(self, name: str) -> np.ndarray:
        """Std dev of quadrature 'Xa', 'Ya', 'Xb' or 'Yb' at each time.

        Variance estimates may dip slightly negative from sampling noise; dips
        beyond 5 combined standard errors raise StatisticsError, smaller ones
        clamp to zero.
        """
        sq = self.mean[name + "2"].real
        mn = self.mean[name].real
        var = sq - mn * mn
        tol = 5.0 * (self.sem_re[name + "2"] + 2.0 * np.abs(mn) * self.sem_re[name]) + 1e-12
        if np.any(var < -tol):
            worst = float(np.min(var + tol))
            raise StatisticsError(
                f"variance of {name} negative beyond sampling tolerance ({worst:.3e})")
        return np.sqrt(np.maximum(var, 0.0))


@dataclass(frozen=True)
class EnsembleSnapshot:
    """Per-trajectory state of the kept trajectories at one time."""

    alpha: np.ndarray
    alpha_plus: np.ndarray
    beta: np.ndarray
    beta_plus: np.ndarray
    time: float


@dataclass(frozen=True)
class QuadratureStats:
    """Quadrature means, widths and relative-fluctuation ratios of a snapshot.

    ratio_a and ratio_b compare max(delta_X, delta_Y) against |<X>| per mode;
    a vanishing mean with finite width gives an infinite ratio.
    """

    mean_Xa: float
    delta_Xa: float
    mean_Ya: float
    delta_Ya: float
    mean_Xb: float
    delta_Xb: float
    mean_Yb: float
    delta_Yb: float
    ratio_a: float
    ratio_b: float
    n_samples: int


def auto_divergence_bound(params: SystemParams, initial: PhaseSpacePoint) -> float:
    branches = steady_state_branches(params, classify=False)
    radii = [abs(s.alpha_s) for s in branches if s.branch in ("lower", "upper", "degenerate")]
    bound = 1e3 * max(radii) if radii else 1e6
    return max(bound, 1e3 * max(initial.max_abs(), 1.0))


def _moment_samples(raw: np.ndarray) -> np.ndarray:
    """Map raw samples (B, T, 4) to moment samples (B, T, len(QUANTITIES))."""
    a = raw[..., 0]
    ap = raw[..., 1]
    b = raw[..., 2]
    bp = raw[..., 3]
    na = a * ap
    nb = b * bp
    a2 = a * a
    ap2 = ap * ap
    b2 = b * b
    bp2 = bp * bp
    out = np.empty(raw.shape[:2] + (len(QUANTITIES),), dtype=np.complex128)
    out[..., 0] = na
    out[..., 1] = nb
    out[..., 2] = a + ap
    out[..., 3] = 1j * (ap - a)
    out[..., 4] = b + bp
    out[..., 5] = 1j * (bp - b)
    out[..., 6] = 1.0 + 2.0 * na + a2 + ap2
    out[..., 7] = 1.0 + 2.0 * na - a2 - ap2
    out[..., 8] = 1.0 + 2.0 * nb + b2 + bp2
    out[..., 9] = 1.0 + 2.0 * nb - b2 - bp2
    out[..., 10] = np.abs(a)
    return out


def _pairwise_merge(parts: list) -> tuple:
    """Tree reduction of per-batch partials in a fixed order."""
    while len(parts) > 1:
        nxt = []
        for i in range(0, len(parts) - 1, 2):
            s0, r0, i0, c0 = parts[i]
            s1, r1, i1, c1 = parts[i + 1]
            nxt.append((s0 + s1, r0 + r1, i0 + i1, c0 + c1))
        if len(parts) % 2 == 1:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]


def run_ensemble(params: SystemParams, schedule: DriveSchedule, config: EnsembleConfig,
                 initial: PhaseSpacePoint = PhaseSpacePoint(),
                 return_snapshot: bool = False):
    """Integrate an ensemble and reduce it to a MomentSeries.

    Diverged trajectories (any |component| beyond the divergence bound) are
    excluded from every average and counted; if every trajectory diverges the
    run is unusable and InvalidRunError is raised. Noise streams are keyed by
    trajectory index alone, and the reduction order is fixed (pairwise within
    batches, fixed tree across batches), so a given configuration is
    bit-identical on reruns; changing batch_size regroups the sums and may
    move the last few floating-point digits.
    """
    backend_name, kernel = accel.get_backend(config.backend)
    n_steps = config.n_steps()
    stride = config.sample_stride
    n_samples = n_steps // stride + 1
    times = np.arange(n_samples) * (stride * config.dt)

    bound = config.divergence_bound
    if bound is None:
        bound = auto_divergence_bound(params, initial)
    if initial.max_abs() >= bound:
        raise ConfigurationError("initial point exceeds the divergence bound")

    if schedule.t_off is None:
        t_off_step = n_steps + 2
    else:
        t_off_step = int(round(schedule.t_off / config.dt))
        if abs(t_off_step * config.dt - schedule.t_off) > 1e-9 * max(1.0, schedule.t_off):
            raise ConfigurationError(
                f"t_off={schedule.t_off} does not land on the dt={config.dt} grid")

    nq = len(QUANTITIES)
    parts = []
    snap_arrays = [] if return_snapshot else None
    n_diverged = 0
    start = 0
    while start < config.n_traj:
        bsize = min(config.batch_size, config.n_traj - start)
        a0 = np.full(bsize, initial.alpha, dtype=np.complex128)
        ap0 = np.full(bsize, initial.alpha_plus, dtype=np.complex128)
        b0 = np.full(bsize, initial.beta, dtype=np.complex128)
        bp0 = np.full(bsize, initial.beta_plus, dtype=np.complex128)
        raw = np.empty((bsize, n_samples, 4), dtype=np.complex128)
        diverged = np.zeros(bsize, dtype=np.bool_)
        kernel(a0, ap0, b0, bp0, params.kappa, params.gamma_a, params.gamma_b,
               complex(params.epsilon_b), complex(schedule.epsilon_a),
               t_off_step, config.dt, n_steps, stride,
               np.uint64(config.master_seed & 0xFFFFFFFFFFFFFFFF), start,
               float(bound), raw, diverged)
        kept = ~diverged
        n_diverged += int(diverged.sum())
        q = _moment_samples(raw[kept])
        sums = q.sum(axis=0) if q.shape[0] else np.zeros((n_samples, nq), dtype=np.complex128)
        re2 = (q.real ** 2).sum(axis=0) if q.shape[0] else np.zeros((n_samples, nq))
        im2 = (q.imag ** 2).sum(axis=0) if q.shape[0] else np.zeros((n_samples, nq))
        parts.append((sums, re2, im2, int(kept.sum())))
        if return_snapshot:
            snap_arrays.append(raw[kept, -1, :])
        start += bsize

    sums, re2, im2, n_kept = _pairwise_merge(parts)
    if n_kept == 0:
        raise InvalidRunError("all trajectories diverged")
    mean = sums / n_kept
    dof = max(n_kept - 1, 1)
    var_re = np.maximum(re2 - n_kept * mean.real ** 2, 0.0) / dof
    var_im = np.maximum(im2 - n_kept * mean.imag ** 2, 0.0) / dof
    sem_re_all = np.sqrt(var_re / n_kept)
    sem_im_all = np.sqrt(var_im / n_kept)

    series = MomentSeries(
        times=times,
        n_traj=config.n_traj,
        n_kept=n_kept,
        n_diverged=n_diverged,
        valid=bool(n_diverged <= MAX_DIVERGED_FRACTION * config.n_traj),
        mean={name: mean[:, i] for i, name in enumerate(QUANTITIES)},
        sem_re={name: sem_re_all[:, i] for i, name in enumerate(QUANTITIES)},
        sem_im={name: sem_im_all[:, i] for i, name in enumerate(QUANTITIES)},
    )
    if return_snapshot:
        snap = np.concatenate(snap_arrays, axis=0) if snap_arrays else np.empty((0, 4), complex)
        snapshot = EnsembleSnapshot(snap[:, 0], snap[:, 1], snap[:, 2], snap[:, 3],
                                    time=float(times[-1]))
        return series, snapshot
    return series


def _snapshot_quadratures(vals, vals_sq, sems, sems_sq):
    var = vals_sq - vals * vals
    tol = 5.0 * (sems_sq + 2.0 * abs(vals) * sems) + 1e-12
    if var < -tol:
        raise StatisticsError(f"negative quadrature variance {var:.3e} beyond tolerance")
    return np.sqrt(max(var, 0.0))


def quadrature_statistics(snapshot: EnsembleSnapshot) -> QuadratureStats:
    """Quadrature means/widths of an ensemble snapshot.

    Widths use the normally ordered second-moment estimators, so a delta
    ensemble at the origin reports the vacuum widths delta_X = delta_Y = 1.
    """
    if snapshot.alpha.size == 0:
        raise StatisticsError("empty snapshot")
    n = snapshot.alpha.size
    a, ap = snapshot.alpha, snapshot.alpha_plus
    b, bp = snapshot.beta, snapshot.beta_plus
    out = {}
    for mode, (u, up) in {"a": (a, ap), "b": (b, bp)}.items():
        X = (u + up).real
        Y = (1j * (up - u)).real
        X2 = (1.0 + 2.0 * u * up + u * u + up * up).real
        Y2 = (1.0 + 2.0 * u * up - u * u - up * up).real
        mX, mY = X.mean(), Y.mean()
        semX = X.std(ddof=1) / np.sqrt(n) if n > 1 else 0.0
        semX2 = X2.std(ddof=1) / np.sqrt(n) if n > 1 else 0.0
        semY = Y.std(ddof=1) / np.sqrt(n) if n > 1 else 0.0
        semY2 = Y2.std(ddof=1) / np.sqrt(n) if n > 1 else 0.0
        dX = _snapshot_quadratures(mX, X2.mean(), semX, semX2)
        dY = _snapshot_quadratures(mY, Y2.mean(), semY, semY2)
        width = max(dX, dY)
        ratio = width / abs(mX) if mX != 0.0 else (np.inf if width > 0 else 0.0)
        out[mode] = (mX, dX, mY, dY, ratio)
    (mXa, dXa, mYa, dYa, ra) = out["a"]
    (mXb, dXb, mYb, dYb, rb) = out["b"]
    return QuadratureStats(mXa, dXa, mYa, dYa, mXb, dXb, mYb, dYb, ra, rb, n)


def transition_region_flag(stats: QuadratureStats, ratio_threshold: float = 0.5) -> bool:
    """True when fluctuations are too large for linearized spectra to be valid.

    Either mode having max(delta_X, delta_Y) > ratio_threshold * |<X>| trips
    the flag; a vanishing mean with finite width counts as infinitely large.
    """
    if ratio_threshold <= 0:
        raise InvalidParameterError("ratio_threshold must be > 0")
    return bool(stats.ratio_a > ratio_threshold or stats.ratio_b > ratio_threshold)


def convergence_audit(params: SystemParams, schedule: DriveSchedule,
                      config: EnsembleConfig, initial: PhaseSpacePoint = PhaseSpacePoint(),
                      quantity: str = "na") -> dict:
    """Weak-convergence audit: rerun at half the step and compare a moment.

    Returns the worst z score over the common sample times and a pass flag
    (z < 5). The halved run keeps the same master seed but its increments
    differ, so the comparison is statistical, not pathwise.
    """
    half = EnsembleConfig(n_traj=config.n_traj, t_final=config.t_final,
                          dt=config.dt / 2.0, sample_stride=config.sample_stride * 2,
                          master_seed=config.master_seed,
                          divergence_bound=config.divergence_bound,
                          batch_size=config.batch_size, backend=config.backend)
    s1 = run_ensemble(params, schedule, config, initial)
    s2 = run_ensemble(params, schedule, half, initial)
    m1, m2 = s1.mean[quantity].real, s2.mean[quantity].real
    sem = np.hypot(s1.sem_re[quantity], s2.sem_re[quantity])
    diff = np.abs(m1 - m2)
    z = np.where(diff == 0.0, 0.0, diff / np.maximum(sem, 1e-300))
    return {"max_z": float(z.max()), "passed": bool(z.max() < 5.0),
            "n_compared": int(z.size)}
