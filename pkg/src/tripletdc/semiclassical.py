"""Mean-field model of intracavity triplet down conversion.

Two cavity modes: a low-energy mode a (decay rate gamma_a, optional injected
signal epsilon_a) and a high-energy mode b at three times the frequency
(decay rate gamma_b, coherent pump epsilon_b). A cubic nonlinearity converts
one b photon into three a photons at rate kappa. Neglecting fluctuations the
coherent amplitudes obey

    d(alpha)/dt = epsilon_a + kappa * conj(alpha)^2 * beta - gamma_a * alpha
    d(beta)/dt  = epsilon_b - gamma_b * beta - (kappa/3) * alpha^3

With no injected signal the system has a pitchfork-like pump threshold

    |epsilon_b|_th = 4 (gamma_a gamma_b)^(3/4) / (3 sqrt(kappa))

above which a pair of non-trivial steady-state magnitudes appears, each with
three possible phases exp(3 i theta) = epsilon_b / |epsilon_b|. The magnitudes
solve the quartic

    r^4 - (3 |epsilon_b| / kappa) r + 3 gamma_a gamma_b / kappa^2 = 0

and the pump amplitude follows as beta_s = (epsilon_b - kappa alpha_s^3 / 3) / gamma_b.
The smaller root is a saddle (unstable), the larger is stable for
gamma_a < gamma_b, and the trivial solution alpha = 0, beta = epsilon_b/gamma_b
is always locally stable because the conversion has no linear gain.
"""

from __future__ import annotations

import cmath
import dataclasses
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from tripletdc.exceptions import ConvergenceError, IntegrationError, InvalidParameterError

# Eigenvalues of the fluctuation drift matrix closer to the imaginary axis
# than this are treated as marginal rather than strictly stable.
STABILITY_TOL = 1e-9


@dataclass(frozen=True)
class SystemParams:
    """Rates of the two-mode model. All rates in the same inverse-time unit."""

    kappa: float
    gamma_a: float
    gamma_b: float
    epsilon_b: complex

    def __post_init__(self):
        if not self.kappa > 0:
            raise InvalidParameterError(f"kappa must be > 0, got {self.kappa}")
        if not self.gamma_a > 0:
            raise InvalidParameterError(f"gamma_a must be > 0, got {self.gamma_a}")
        if not self.gamma_b > 0:
            raise InvalidParameterError(f"gamma_b must be > 0, got {self.gamma_b}")
        object.__setattr__(self, "epsilon_b", complex(self.epsilon_b))


@dataclass(frozen=True)
class DriveSchedule:
    """Injected signal on the low-energy mode, optionally switched off at t_off."""

    epsilon_a: complex = 0.0
    t_off: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "epsilon_a", complex(self.epsilon_a))
        if self.t_off is not None and self.t_off < 0:
            raise InvalidParameterError(f"t_off must be >= 0 or None, got {self.t_off}")

    def value_at(self, t: float) -> complex:
        if self.t_off is not None and t >= self.t_off:
            return 0.0 + 0.0j
        return self.epsilon_a


@dataclass(frozen=True)
class SteadyStateSolution:
    """One fixed point of the mean-field flow.

    branch is 'trivial', 'lower', 'upper', 'degenerate' (exactly at threshold)
    or 'numeric' (found by Newton iteration, e.g. with an injected signal).
    phase_index k in {0, 1, 2} selects theta = (arg(epsilon_b) + 2 pi k) / 3.
    marginal flags an eigenvalue of the linearization within STABILITY_TOL of
    the imaginary axis; such solutions are reported as not stable.
    """

    alpha_s: complex
    beta_s: complex
    branch: str
    phase_index: int = 0
    stable: bool = False
    marginal: bool = False


@dataclass(frozen=True)
class SemiclassicalSeries:
    """Mean-field trajectory sampled on a time grid."""

    times: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    steady_time: float | None = None


def semiclassical_drift(alpha: complex, beta: complex, params: SystemParams,
                        eps_a: complex = 0.0) -> tuple[complex, complex]:
    """Right-hand side of the mean-field equations at one phase-space point."""
    dalpha = eps_a + params.kappa * np.conj(alpha) ** 2 * beta - params.gamma_a * alpha
    dbeta = params.epsilon_b - params.gamma_b * beta - (params.kappa / 3.0) * alpha ** 3
    return complex(dalpha), complex(dbeta)


def pump_threshold(params: SystemParams) -> float:
    """Pump amplitude at which non-trivial steady states appear."""
    return float(4.0 * (params.gamma_a * params.gamma_b) ** 0.75
                 / (3.0 * math.sqrt(params.kappa)))


def _quartic(r: float, c1: float, c0: float) -> float:
    return ((r * r) * (r * r)) - c1 * r + c0


def _bisect_root(lo: float, hi: float, c1: float, c0: float) -> float:
    """Bisection to ~1e-14 relative, then Newton polish on the quartic."""
    flo = _quartic(lo, c1, c0)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        fmid = _quartic(mid, c1, c0)
        if (fmid > 0) == (flo > 0):
            lo, flo = mid, fmid
        else:
            hi = mid
        if hi - lo <= 1e-14 * hi:
            break
    r = 0.5 * (lo + hi)
    for _ in range(4):
        df = 4.0 * r ** 3 - c1
        if df == 0.0:
            break
        step = _quartic(r, c1, c0) / df
        r -= step
        if abs(step) <= 1e-15 * abs(r):
            break
    return r


def _nontrivial_radii(params: SystemParams) -> tuple[list[float], bool]:
    """Positive real roots of the steady-state quartic.

    Returns ([], False) below threshold, ([r], True) at the degenerate point,
    ([r_lower, r_upper], False) above threshold.
    """
    c1 = 3.0 * abs(params.epsilon_b) / params.kappa
    c0 = 3.0 * params.gamma_a * params.gamma_b / params.kappa ** 2
    if c1 <= 0.0:
        return [], False
    r_min = (c1 / 4.0) ** (1.0 / 3.0)
    f_min = _quartic(r_min, c1, c0)
    if abs(f_min) <= 1e-12 * c0:
        return [r_min], True
    if f_min > 0.0:
        return [], False
    r_lower = _bisect_root(0.0, r_min, c1, c0)
    # f(c1^(1/3)) = c0 > 0 so the upper root is bracketed by [r_min, c1^(1/3)]
    r_upper = _bisect_root(r_min, c1 ** (1.0 / 3.0), c1, c0)
    return [r_lower, r_upper], False


def _linearization(alpha_s: complex, beta_s: complex, params: SystemParams) -> np.ndarray:
    """Drift matrix A of the fluctuations d(dx) = -A dx dt + noise.

    Phase-space order (d alpha, d alpha_plus, d beta, d beta_plus), evaluated
    at a conjugate-symmetric point (alpha_plus = conj(alpha)).
    """
    k = params.kappa
    ac = np.conj(alpha_s)
    bc = np.conj(beta_s)
    return np.array([
        [params.gamma_a, -2.0 * k * ac * beta_s, -k * ac ** 2, 0.0],
        [-2.0 * k * alpha_s * bc, params.gamma_a, 0.0, -k * alpha_s ** 2],
        [k * alpha_s ** 2, 0.0, params.gamma_b, 0.0],
        [0.0, k * ac ** 2, 0.0, params.gamma_b],
    ], dtype=complex)


def classify_stability(solution: SteadyStateSolution, params: SystemParams,
                       tol: float = STABILITY_TOL) -> SteadyStateSolution:
    """Return the solution with stable/marginal set from the linearization.

    Stable means every eigenvalue of the drift matrix A has real part > tol.
    A minimum real part within tol of zero is marginal and reported unstable.
    """
    eigs = np.linalg.eigvals(_linearization(solution.alpha_s, solution.beta_s, params))
    min_re = float(eigs.real.min())
    marginal = abs(min_re) <= tol
    return dataclasses.replace(solution, stable=bool(min_re > tol and not marginal),
                               marginal=marginal)


def steady_state_branches(params: SystemParams, classify: bool = True) -> list[SteadyStateSolution]:
    """All steady states with no injected signal, trivial branch first.

    Above threshold the list is [trivial, lower(k=0..2), upper(k=0..2)];
    at threshold the degenerate branch appears once per phase, marked marginal.
    """
    eb = params.epsilon_b
    out = [SteadyStateSolution(0.0j, eb / params.gamma_b, "trivial")]
    radii, degen = _nontrivial_radii(params)
    names = ["degenerate"] if degen else ["lower", "upper"]
    phase0 = cmath.phase(eb) if eb != 0 else 0.0
    for name, r in zip(names, radii):
        for k in range(3):
            theta = (phase0 + 2.0 * np.pi * k) / 3.0
            alpha_s = r * cmath.exp(1j * theta)
            beta_s = (eb - params.kappa * alpha_s ** 3 / 3.0) / params.gamma_b
            out.append(SteadyStateSolution(alpha_s, beta_s, name, phase_index=k,
                                           marginal=degen))
    if classify:
        out = [classify_stability(s, params) for s in out]
    return out


def integrate_semiclassical(params: SystemParams, schedule: DriveSchedule,
                            alpha0: complex, beta0: complex, t_final: float,
                            t_eval: np.ndarray | None = None,
                            rtol: float = 1e-8, atol: float = 1e-10) -> SemiclassicalSeries:
    """Adaptive integration of the mean-field equations on [0, t_final].

    The drive switch-off at t_off is honored exactly by splitting the
    integration there. steady_time reports the first sampled time after which
    the drift norm stays below 1e-8 * max(1, state norm) for one time unit,
    or None if that never happens.
    """
    if t_final <= 0:
        raise InvalidParameterError(f"t_final must be > 0, got {t_final}")
    if t_eval is None:
        t_eval = np.linspace(0.0, t_final, 1001)
    t_eval = np.asarray(t_eval, dtype=float)
    if t_eval[0] < 0 or t_eval[-1] > t_final or np.any(np.diff(t_eval) <= 0):
        raise InvalidParameterError("t_eval must be increasing within [0, t_final]")

    def rhs(eps_a):
        def f(t, y):
            da, db = semiclassical_drift(y[0], y[1], params, eps_a)
            return [da, db]
        return f

    segments = [(0.0, t_final, schedule.epsilon_a)]
    if schedule.t_off is not None and 0.0 < schedule.t_off < t_final:
        segments = [(0.0, schedule.t_off, schedule.epsilon_a),
                    (schedule.t_off, t_final, 0.0 + 0.0j)]
    elif schedule.t_off is not None and schedule.t_off <= 0.0:
        segments = [(0.0, t_final, 0.0 + 0.0j)]

    y = np.array([alpha0, beta0], dtype=complex)
    ts_all, al_all, be_all = [], [], []
    for (t0, t1, eps_a) in segments:
        mask = (t_eval >= t0) & (t_eval <= t1)
        seg_eval = t_eval[mask]
        # segment endpoints must always be integrated to, even if not sampled
        sol = solve_ivp(rhs(eps_a), (t0, t1), y, method="RK45", rtol=rtol, atol=atol,
                        t_eval=seg_eval if seg_eval.size else None, dense_output=False)
        if not sol.success:
            raise IntegrationError(
                f"mean-field integration failed in [{t0}, {t1}]: {sol.message}",
                t=sol.t[-1] if sol.t.size else t0,
                state=sol.y[:, -1] if sol.t.size else y)
        if seg_eval.size:
            keep = slice(1, None) if (ts_all and seg_eval[0] == ts_all[-1]) else slice(None)
            ts_all.extend(sol.t[keep])
            al_all.extend(sol.y[0][keep])
            be_all.extend(sol.y[1][keep])
            # re-integrate to the segment end to hand exact state to next segment
            if sol.t[-1] != t1:
                sol2 = solve_ivp(rhs(eps_a), (sol.t[-1], t1), sol.y[:, -1], method="RK45",
                                 rtol=rtol, atol=atol)
                if not sol2.success:
                    raise IntegrationError(
                        f"mean-field integration failed in [{sol.t[-1]}, {t1}]: {sol2.message}",
                        t=sol2.t[-1], state=sol2.y[:, -1])
                y = sol2.y[:, -1]
            else:
                y = sol.y[:, -1]
        else:
            sol = solve_ivp(rhs(eps_a), (t0, t1), y, method="RK45", rtol=rtol, atol=atol)
            if not sol.success:
                raise IntegrationError(
                    f"mean-field integration failed in [{t0}, {t1}]: {sol.message}",
                    t=sol.t[-1], state=sol.y[:, -1])
            y = sol.y[:, -1]

    times = np.array(ts_all)
    alpha = np.array(al_all)
    beta = np.array(be_all)

    steady_time = None
    drift_norm = np.empty(times.size)
    state_norm = np.empty(times.size)
    for i, t in enumerate(times):
        da, db = semiclassical_drift(alpha[i], beta[i], params, schedule.value_at(t))
        drift_norm[i] = np.hypot(abs(da), abs(db))
        state_norm[i] = np.hypot(abs(alpha[i]), abs(beta[i]))
    # the integrated point sits ~rtol*|state| off the true flow, so the drift
    # there never falls below ~rtol*|state|*(fastest rate); 1e-8 is kept as
    # the floor for tightly resolved runs
    quiet = drift_norm < max(1e-8, 100.0 * rtol) * np.maximum(1.0, state_norm)
    for i in np.flatnonzero(quiet):
        window = (times >= times[i]) & (times <= times[i] + 1.0)
        if quiet[window].all() and (times[-1] - times[i]) >= 1.0:
            steady_time = float(times[i])
            break
    return SemiclassicalSeries(times, alpha, beta, steady_time)


def numeric_steady_state(params: SystemParams, eps_a: complex = 0.0,
                         guess: tuple[complex, complex] = (0.0j, 0.0j),
                         tol: float = 1e-10, max_iter: int = 100) -> SteadyStateSolution:
    """Damped Newton search for a fixed point, e.g. with an injected signal.

    Raises ConvergenceError carrying the best iterate if the residual does not
    reach tol within max_iter iterations.
    """

    def residual(x):
        da, db = semiclassical_drift(x[0] + 1j * x[1], x[2] + 1j * x[3], params, eps_a)
        return np.array([da.real, da.imag, db.real, db.imag])

    x = np.array([guess[0].real, guess[0].imag, guess[1].real, guess[1].imag], dtype=float)
    f = residual(x)
    best_x, best_norm = x.copy(), float(np.abs(f).max())
    for _ in range(max_iter):
        norm = float(np.abs(f).max())
        if norm < best_norm:
            best_x, best_norm = x.copy(), norm
        if norm <= tol:
            sol = SteadyStateSolution(complex(x[0], x[1]), complex(x[2], x[3]), "numeric")
            return classify_stability(sol, params)
        jac = np.empty((4, 4))
        for j in range(4):
            h = 1e-7 * max(1.0, abs(x[j]))
            xp, xm = x.copy(), x.copy()
            xp[j] += h
            xm[j] -= h
            jac[:, j] = (residual(xp) - residual(xm)) / (2.0 * h)
        try:
            step = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"singular Jacobian in Newton iteration: {exc}",
                                   best=best_x, residual=best_norm)
        s = 1.0
        base = np.linalg.norm(f)
        for _ in range(40):
            f_try = residual(x + s * step)
            if np.linalg.norm(f_try) < base:
                x = x + s * step
                f = f_try
                break
            s *= 0.5
        else:
            raise ConvergenceError("Newton line search stalled", best=best_x,
                                   residual=best_norm)
    raise ConvergenceError(f"no fixed point within {max_iter} iterations",
                           best=best_x, residual=best_norm)


def critical_seed_scan(params: SystemParams, eps_a_lo: float, eps_a_hi: float,
                       t_final: float = 60.0, n_bisect: int = 30) -> float:
    """Numerically locate the injected-signal amplitude separating decay from
    capture onto the high-amplitude branch, starting from vacuum.

    Both endpoints must bracket the change (low endpoint decays, high endpoint
    is captured), otherwise InvalidParameterError is raised.
    """
    branches = steady_state_branches(params, classify=False)
    radii = sorted(abs(s.alpha_s) for s in branches if s.branch in ("lower", "upper"))
    if not radii:
        raise InvalidParameterError("no non-trivial branch, pump below threshold")
    r_mid = 0.5 * (radii[0] + radii[-1])

    def captured(eps_a):
        series = integrate_semiclassical(params, DriveSchedule(eps_a, None),
                                         0.0j, 0.0j, t_final)
        return abs(series.alpha[-1]) > r_mid

    lo, hi = float(eps_a_lo), float(eps_a_hi)
    if captured(lo) or not captured(hi):
        raise InvalidParameterError(
            "endpoints do not bracket the capture transition")
    for _ in range(n_bisect):
        mid = 0.5 * (lo + hi)
        if captured(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
