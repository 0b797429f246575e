"""Linearized fluctuation spectra around a stable steady state.

Writing the doubled-phase-space variables as steady state plus fluctuation,
delta = (d_alpha, d_alpha_plus, d_beta, d_beta_plus), the truncated dynamics
linearize to

    d(delta) = -A delta dt + B dW,   D = B B^T

with A positive stable at a stable operating point. The stationary two-time
correlations then give the spectrum matrix

    S(w) = (A + i w I)^-1 D (A^H - i w I)^-1

and quadrature combinations follow by congruence with the fixed map Q from
(d_alpha, d_alpha_plus, ...) to (X_a, Y_a, X_b, Y_b). Measurable cavity
output spectra are V(w) = 1 + 2 gamma S^q_ii (vacuum = 1), and the pair
correlations enter the two-mode entanglement witnesses

    DS_pm = V(X_a) + V(X_b) +- 2 C(X_a X_b) + V(Y_a) + V(Y_b) -+ 2 C(Y_a Y_b)

which drop below 4 only for states with no separable model.

The local-oscillator phase of the pump-mode homodyne is a measurement choice;
the default here takes the b-mode LO phase that flips the sign of both cross
covariances, which makes DS_minus the violated witness. Pass b_lo_flip=False
for the unflipped convention (the violation then appears in DS_plus; the
single-mode variances are identical either way).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from tripletdc.exceptions import ConsistencyError, InvalidParameterError
from tripletdc.semiclassical import (SteadyStateSolution, SystemParams,
                                     _linearization, steady_state_branches)

# rows map (d_alpha, d_alpha_plus, d_beta, d_beta_plus) to (Xa, Ya, Xb, Yb)
QUAD_MAP = np.array([
    [1.0, 1.0, 0.0, 0.0],
    [-1j, 1j, 0.0, 0.0],
    [0.0, 0.0, 1.0, 1.0],
    [0.0, 0.0, -1j, 1j],
], dtype=np.complex128)

DS_BOUND = 4.0
_IMAG_TOL = 1e-8


def drift_matrix(solution: SteadyStateSolution, params: SystemParams) -> np.ndarray:
    """Negated drift Jacobian A at a steady state (positive stable = stable)."""
    return _linearization(solution.alpha_s, solution.beta_s, params)


def diffusion_matrix(solution: SteadyStateSolution, params: SystemParams) -> np.ndarray:
    """D = B B^T of the linearized noise, nonzero only in the signal block."""
    a_s = solution.alpha_s
    b_s = solution.beta_s
    d1 = 2.0 * params.kappa * np.conj(a_s) * b_s
    d2 = 2.0 * params.kappa * a_s * np.conj(b_s)
    return np.diag([d1, d2, 0.0, 0.0]).astype(np.complex128)


def stability_check(A: np.ndarray, tol: float = 1e-9):
    """(stable, eigenvalues) for the negated Jacobian; stable iff all Re > tol."""
    eig = np.linalg.eigvals(A)
    return bool(np.min(eig.real) > tol), eig


def spectrum_matrix(A: np.ndarray, D: np.ndarray, omegas: np.ndarray) -> np.ndarray:
    """Stationary spectrum matrix S(w) stacked over the frequency grid.

    Raises ConsistencyError when A is not positive stable, since the
    stationary spectrum does not exist there.
    """
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    stable, eig = stability_check(A, tol=0.0)
    if not stable:
        raise ConsistencyError(
            f"spectrum requested at a non-stable operating point (min Re eig = {eig.real.min():.3e})")
    eye = np.eye(4, dtype=np.complex128)
    m1 = A[None, :, :] + 1j * omegas[:, None, None] * eye
    y = np.linalg.solve(m1, np.broadcast_to(D, m1.shape))
    # S M2 = Y with M2 = A^H - i w I, solved via the transposed system
    m2t = np.conj(A)[None, :, :] - 1j * omegas[:, None, None] * eye
    s_t = np.linalg.solve(m2t, y.transpose(0, 2, 1))
    return s_t.transpose(0, 2, 1)


def quadrature_spectrum(S: np.ndarray) -> np.ndarray:
    """Congruence Q S Q^T onto the quadrature basis (Xa, Ya, Xb, Yb)."""
    stack = S[None, :, :] if S.ndim == 2 else S
    return np.einsum("ij,njk,lk->nil", QUAD_MAP, stack, QUAD_MAP)


@dataclass(frozen=True)
class OutputSpectra:
    """Measurable output quadrature spectra on a frequency grid."""

    omegas: np.ndarray
    V_Xa: np.ndarray
    V_Ya: np.ndarray
    V_Xb: np.ndarray
    V_Yb: np.ndarray
    C_XaXb: np.ndarray
    C_YaYb: np.ndarray
    b_lo_flip: bool


@dataclass(frozen=True)
class DuanSimon:
    """Two-mode combined variances against the separability bound 4."""

    omegas: np.ndarray
    ds_plus: np.ndarray
    ds_minus: np.ndarray
    bound: float = DS_BOUND


def _real_checked(arr: np.ndarray, what: str) -> np.ndarray:
    scale = np.maximum(1.0, np.abs(arr.real))
    if np.any(np.abs(arr.imag) > _IMAG_TOL * scale):
        worst = float(np.max(np.abs(arr.imag) / scale))
        raise ConsistencyError(f"{what} has imaginary residue {worst:.3e}")
    return arr.real


def output_covariances(Sq: np.ndarray, omegas: np.ndarray, params: SystemParams,
                       b_lo_flip: bool = True) -> OutputSpectra:
    """Cavity output variances and cross covariances from S^q.

    Input-output: V = 1 + 2 gamma S^q_ii for each quadrature, and the
    symmetrized cross spectra pick up sqrt(gamma_a gamma_b). All results must
    come out real; an imaginary residue beyond tolerance means the operating
    point was not the real-amplitude branch and raises ConsistencyError.
    """
    ga, gb = params.gamma_a, params.gamma_b
    sign = -1.0 if b_lo_flip else 1.0
    v_xa = _real_checked(1.0 + 2.0 * ga * Sq[:, 0, 0], "V_Xa")
    v_ya = _real_checked(1.0 + 2.0 * ga * Sq[:, 1, 1], "V_Ya")
    v_xb = _real_checked(1.0 + 2.0 * gb * Sq[:, 2, 2], "V_Xb")
    v_yb = _real_checked(1.0 + 2.0 * gb * Sq[:, 3, 3], "V_Yb")
    root = np.sqrt(ga * gb)
    c_xx = sign * _real_checked(root * (Sq[:, 0, 2] + Sq[:, 2, 0]), "C_XaXb")
    c_yy = sign * _real_checked(root * (Sq[:, 1, 3] + Sq[:, 3, 1]), "C_YaYb")
    return OutputSpectra(np.asarray(omegas, float), v_xa, v_ya, v_xb, v_yb,
                         c_xx, c_yy, bool(b_lo_flip))


def duan_simon(out: OutputSpectra) -> DuanSimon:
    total = out.V_Xa + out.V_Xb + out.V_Ya + out.V_Yb
    ds_plus = total + 2.0 * out.C_XaXb - 2.0 * out.C_YaYb
    ds_minus = total - 2.0 * out.C_XaXb + 2.0 * out.C_YaYb
    return DuanSimon(out.omegas, ds_plus, ds_minus)


def make_omega_grid(omega_max: float = 20.0, n_linear: int = 300, n_log: int = 100,
                    omega_min_log: float = 1e-3) -> np.ndarray:
    """Frequency grid: linear coverage plus log-spaced points near zero."""
    if omega_max <= 0 or n_linear < 2:
        raise InvalidParameterError("omega_max must be > 0 and n_linear >= 2")
    lin = np.linspace(0.0, omega_max, n_linear)
    log = np.geomspace(omega_min_log, omega_max, n_log) if n_log > 0 else np.empty(0)
    return np.unique(np.concatenate([lin, log]))


def lyapunov_covariance(A: np.ndarray, D: np.ndarray) -> np.ndarray:
    """Equal-time covariance from A G + G A^H = D (direct, no integral)."""
    return scipy.linalg.solve_continuous_lyapunov(A, D.astype(np.complex128))


def covariance_from_spectrum_integral(A: np.ndarray, D: np.ndarray,
                                      W: float | None = None,
                                      n_points: int = 20001) -> np.ndarray:
    """Equal-time covariance via (1/2pi) integral of S(w) dw over [-W, W].

    The integrand decays like D/w^2, so the truncated part is corrected by the
    analytic tail D/(pi W). Cross-checks solve_continuous_lyapunov(A, D).
    """
    if W is None:
        W = 100.0 * float(np.max(np.abs(np.linalg.eigvals(A))))
    grid = np.linspace(-W, W, n_points)
    S = spectrum_matrix(A, D, grid)
    G = np.trapezoid(S, grid, axis=0) / (2.0 * np.pi)
    return G + D / (np.pi * W)


@dataclass(frozen=True)
class SpectrumScanRow:
    """Squeezing and witness summary at one pump amplitude."""

    epsilon_b: float
    branch: str
    alpha_s: complex
    beta_s: complex
    V_Ya_zero: float
    V_Yb_zero: float
    min_V_Ya: float
    omega_min_V_Ya: float
    min_V_Yb: float
    omega_min_V_Yb: float
    min_ds: float
    omega_min_ds: float
    ds_violated: bool
    valid: bool


def select_operating_point(params: SystemParams) -> SteadyStateSolution:
    branches = steady_state_branches(params)
    stable = [s for s in branches if s.stable]
    if not stable:
        raise ConsistencyError(f"no stable steady state at epsilon_b={params.epsilon_b}")
    return max(stable, key=lambda s: abs(s.alpha_s))


def spectrum_scan(params: SystemParams, epsilon_b_values, omegas=None,
                  valid=None, b_lo_flip: bool = True) -> list:
    """Scan pump amplitude and summarize squeezing/witness structure per point.

    Operating point: the stable steady state of largest signal amplitude (the
    trivial state below threshold, where the spectra reduce exactly to vacuum
    because the linearized noise vanishes). valid, when given, must align with
    epsilon_b_values and records whether a linearized treatment is trusted at
    that pump (e.g. from a fluctuation-ratio check); rows keep the flag but
    are computed either way.
    """
    if omegas is None:
        omegas = make_omega_grid()
    omegas = np.asarray(omegas, dtype=float)
    eps_values = list(epsilon_b_values)
    if valid is None:
        flags = [True] * len(eps_values)
    else:
        flags = [bool(v) for v in valid]
        if len(flags) != len(eps_values):
            raise InvalidParameterError("valid must align with epsilon_b_values")
    rows = []
    for eps_b, flag in zip(eps_values, flags):
        p = SystemParams(kappa=params.kappa, gamma_a=params.gamma_a,
                         gamma_b=params.gamma_b, epsilon_b=eps_b)
        sol = select_operating_point(p)
        A = drift_matrix(sol, p)
        D = diffusion_matrix(sol, p)
        S = spectrum_matrix(A, D, omegas)
        out = output_covariances(quadrature_spectrum(S), omegas, p, b_lo_flip=b_lo_flip)
        ds = duan_simon(out)
        ds_min_arr = np.minimum(ds.ds_plus, ds.ds_minus)
        i0 = int(np.argmin(np.abs(omegas)))
        i_ya = int(np.argmin(out.V_Ya))
        i_yb = int(np.argmin(out.V_Yb))
        i_ds = int(np.argmin(ds_min_arr))
        rows.append(SpectrumScanRow(
            epsilon_b=float(np.real(eps_b)),
            branch=sol.branch,
            alpha_s=sol.alpha_s,
            beta_s=sol.beta_s,
            V_Ya_zero=float(out.V_Ya[i0]),
            V_Yb_zero=float(out.V_Yb[i0]),
            min_V_Ya=float(out.V_Ya[i_ya]),
            omega_min_V_Ya=float(omegas[i_ya]),
            min_V_Yb=float(out.V_Yb[i_yb]),
            omega_min_V_Yb=float(omegas[i_yb]),
            min_ds=float(ds_min_arr[i_ds]),
            omega_min_ds=float(omegas[i_ds]),
            ds_violated=bool(ds_min_arr[i_ds] < DS_BOUND),
            valid=flag,
        ))
    return rows
