"""Order-of-magnitude estimate of the triplet coupling rate from material data.

For a chi(3) ring or waveguide resonator phase matched for 3w -> w + w + w,
the coupling rate between the quantized modes is

    kappa = 3 hbar eps0 chi3 sqrt(w_a^3 w_b) sigma
            / (4 sqrt(eps_a^3 eps_b) L) * delta[m_b - 3 m_a]

with w_b = 3 w_a, eps_i the absolute permittivities at the two carriers,
L the propagation length (ring circumference) and sigma the inverse effective
area from the transverse profile overlap

    sigma = integral(u_a^3 conj(u_b)) /
            (integral |u_a|^2)^(3/2) (integral |u_b|^2)^(1/2).

The azimuthal selection rule m_b = 3 m_a is a hard zero when unmet. Matched
Gaussian profiles of waist w give sigma = 1/(pi w^2); a uniform patch of area
A gives 1/A.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import epsilon_0, hbar

from tripletdc.exceptions import ConfigurationError, InvalidParameterError


@dataclass(frozen=True)
class MaterialGeometry:
    """Material and resonator inputs for the coupling estimate.

    chi3 in m^2/V^2, omega_a in rad/s (the signal carrier; the pump sits at
    3 omega_a), relative permittivities at each carrier, length in m, and the
    azimuthal mode numbers subject to m_b = 3 m_a.
    """

    chi3: float
    omega_a: float
    eps_rel_a: float
    eps_rel_b: float
    length: float
    m_a: int
    m_b: int

    def __post_init__(self):
        if self.chi3 <= 0 or self.omega_a <= 0 or self.length <= 0:
            raise InvalidParameterError("chi3, omega_a and length must be > 0")
        if self.eps_rel_a < 1.0 or self.eps_rel_b < 1.0:
            raise InvalidParameterError("relative permittivities must be >= 1")


# microring used for the headline estimate: chi(3) of a few 1e-20 m^2/V^2,
# refractive index 2, radius 20 um, telecom-band signal
REFERENCE_GEOMETRY = MaterialGeometry(
    chi3=1.5e-20,
    omega_a=2.0 * math.pi * 194e12,
    eps_rel_a=4.0,
    eps_rel_b=4.0,
    length=2.0 * math.pi * 20e-6,
    m_a=54,
    m_b=162,
)
REFERENCE_SIGMA = 0.43e12  # 1 / m^2


@dataclass(frozen=True)
class ModeProfileGrid:
    """Sampled transverse mode profile on a uniform rectangular grid.

    File format: first non-comment line 'nx ny dx dy', then nx*ny rows of
    're im', x index varying fastest. Amplitude normalization is arbitrary;
    overlaps normalize it away.
    """

    values: np.ndarray  # (ny, nx) complex
    dx: float
    dy: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.ndim != 2 or v.shape[0] < 2 or v.shape[1] < 2:
            raise ConfigurationError("profile grid must be 2D with at least 2x2 points")
        if self.dx <= 0 or self.dy <= 0:
            raise ConfigurationError("grid spacings must be > 0")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_file(cls, path) -> "ModeProfileGrid":
        with open(path) as f:
            lines = [ln.strip() for ln in f
                     if ln.strip() and not ln.lstrip().startswith("#")]
        if not lines:
            raise ConfigurationError(f"empty profile file {path}")
        head = lines[0].split()
        if len(head) != 4:
            raise ConfigurationError("profile header must be 'nx ny dx dy'")
        nx, ny = int(head[0]), int(head[1])
        dx, dy = float(head[2]), float(head[3])
        if len(lines) - 1 != nx * ny:
            raise ConfigurationError(
                f"profile file has {len(lines) - 1} rows, expected nx*ny = {nx * ny}")
        data = np.array([[float(tok) for tok in ln.split()] for ln in lines[1:]])
        if data.shape[1] != 2:
            raise ConfigurationError("profile rows must be 're im' pairs")
        vals = (data[:, 0] + 1j * data[:, 1]).reshape(ny, nx)
        return cls(values=vals, dx=dx, dy=dy)

    def _integrate(self, field: np.ndarray) -> complex:
        x = np.arange(self.values.shape[1]) * self.dx
        y = np.arange(self.values.shape[0]) * self.dy
        return complex(np.trapezoid(np.trapezoid(field, x, axis=1), y, axis=0))


def modal_overlap(grid_a: ModeProfileGrid, grid_b: ModeProfileGrid) -> float:
    """Inverse effective area sigma from two sampled profiles (same grid)."""
    if grid_a.values.shape != grid_b.values.shape or \
            (grid_a.dx, grid_a.dy) != (grid_b.dx, grid_b.dy):
        raise ConfigurationError("profiles must share one grid")
    ua, ub = grid_a.values, grid_b.values
    num = grid_a._integrate(ua ** 3 * np.conj(ub))
    den_a = grid_a._integrate(np.abs(ua) ** 2).real
    den_b = grid_b._integrate(np.abs(ub) ** 2).real
    if den_a <= 0 or den_b <= 0:
        raise ConfigurationError("profiles must carry nonzero power")
    return abs(num) / (den_a ** 1.5 * math.sqrt(den_b))


def gaussian_sigma(w_a: float, w_b: float) -> float:
    """Closed-form sigma for Gaussian amplitude profiles exp(-r^2/w^2)."""
    if w_a <= 0 or w_b <= 0:
        raise InvalidParameterError("waists must be > 0")
    return (4.0 / math.pi) / ((3.0 / w_a ** 2 + 1.0 / w_b ** 2) * w_a ** 3 * w_b)


def estimate_kappa(geometry: MaterialGeometry, sigma: float) -> float:
    """Coupling rate in 1/s; exactly zero when the selection rule fails."""
    if sigma <= 0:
        raise InvalidParameterError("sigma must be > 0")
    if geometry.m_b != 3 * geometry.m_a:
        return 0.0
    omega_b = 3.0 * geometry.omega_a
    eps_a = geometry.eps_rel_a * epsilon_0
    eps_b = geometry.eps_rel_b * epsilon_0
    return (3.0 * hbar * epsilon_0 * geometry.chi3
            * math.sqrt(geometry.omega_a ** 3 * omega_b) * sigma
            / (4.0 * math.sqrt(eps_a ** 3 * eps_b) * geometry.length))
