"""Polariton trap eigenmodes on a finite-difference grid.

Traps are square wells carved into a barrier of fixed depth.  The lowest
eigenpairs of -ħ²∇²/2m + U(x, y) are found with a 5-point Laplacian,
Dirichlet walls and shift-invert Lanczos; half the splitting of the lowest
pair of a double well is the tunnel coupling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .constants import CONSTANTS, PhysConstants
from .errors import DomainError, NumericalError, ResolutionError

M_LP = 4e-5  # lower-polariton mass in units of m0


@dataclass(frozen=True)
class PotentialGrid:
    """Trap potential sampled on a regular grid.

    ``values[j, i]`` is the potential (meV) at ``(x[i], y[j])``.
    """

    dx: float
    dy: float
    x0: float
    y0: float
    values: np.ndarray = field(repr=False)
    m_eff: float = M_LP

    def __post_init__(self):
        ny, nx = self.values.shape
        if nx < 16 or ny < 16:
            raise ResolutionError(f"grid {nx}x{ny} is smaller than 16x16")
        if self.dx <= 0 or self.dy <= 0:
            raise DomainError("grid spacing must be positive")
        if self.m_eff <= 0:
            raise DomainError("effective mass must be positive")
        if np.any(self.values < 0):
            raise DomainError("potential values must be non-negative")

    @property
    def nx(self) -> int:
        return self.values.shape[1]

    @property
    def ny(self) -> int:
        return self.values.shape[0]

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.nx)

    @property
    def y(self) -> np.ndarray:
        return self.y0 + self.dy * np.arange(self.ny)


@dataclass(frozen=True)
class EigenSolution:
    """Lowest eigenpairs; ``wavefunctions[k]`` has the grid's (ny, nx) shape."""

    energies: np.ndarray
    wavefunctions: np.ndarray = field(repr=False)
    dx: float
    dy: float
    residual: float = 0.0


@dataclass(frozen=True)
class ModeGeometry:
    mode_area: float
    mode_length: float
    mode_volume: float
    gaussian_radius: float
    dbr_length: float
    cavity_length: float


@dataclass(frozen=True)
class HopfieldSplit:
    """Excitonic (r0²) and photonic (t0²) fractions of the J=±1 polaritons."""

    r0_sq_plus: float
    t0_sq_plus: float
    r0_sq_minus: float
    t0_sq_minus: float
    V: float
    omega_R: float


def trap_depth(delta_lambda: float, lambda_c: float, L_c: float, n: float,
               constants: PhysConstants = CONSTANTS) -> float:
    """Trap depth ħω_t = ħ 2πcΔλ/(nλL_c) in meV (lengths in µm)."""
    if delta_lambda < 0 or lambda_c <= 0 or L_c <= 0 or n <= 0:
        raise DomainError("trap_depth needs Δλ ≥ 0 and positive λ, L_c, n")
    return constants.hbar * 2 * np.pi * constants.speed_of_light * delta_lambda / (n * lambda_c * L_c)


def calibrated_cavity_length(depth: float = 7.0, delta_lambda: float = 0.005,
                             lambda_c: float = 0.910, n: float = 3.6,
                             constants: PhysConstants = CONSTANTS) -> float:
    """Effective cavity length (µm) for which ``trap_depth`` returns ``depth``."""
    if depth <= 0:
        raise DomainError("depth must be positive")
    return trap_depth(delta_lambda, lambda_c, 1.0, n, constants) / depth


def _grid_axis(half_extent: float, d: float) -> np.ndarray:
    m = int(np.ceil(half_extent / d - 1e-9))
    return d * np.arange(-m, m + 1)


def _square(x: np.ndarray, y: np.ndarray, xc: float, half: float, d: float) -> np.ndarray:
    eps = 1e-6 * d
    return (np.abs(x[None, :] - xc) <= half + eps) & (np.abs(y[:, None]) <= half + eps)


def build_coupled_well_potential(R: float, D: float, depth: float, dx: float = 0.02,
                                 padding: float = 2.0, m_eff: float = M_LP,
                                 dy: float | None = None) -> PotentialGrid:
    """Two square wells of side 2R, edge gap D along x, in a barrier of ``depth``.

    The grid is centred on the pair and extends ``padding`` beyond the wells.
    """
    dy = dx if dy is None else dy
    if R <= 0 or D < 0:
        raise DomainError("need R > 0 and D ≥ 0")
    if depth <= 0:
        raise DomainError("depth must be positive")
    if padding < 2 * R:
        raise DomainError("padding must be at least 2R")
    if dx > R / 10 or dy > R / 10:
        raise ResolutionError(f"dx={dx} µm is coarser than R/10={R / 10} µm")
    x = _grid_axis(2 * R + D / 2 + padding, dx)
    y = _grid_axis(R + padding, dy)
    inside = _square(x, y, -(R + D / 2), R, dx) | _square(x, y, R + D / 2, R, dx)
    values = np.where(inside, 0.0, float(depth))
    return PotentialGrid(dx, dy, float(x[0]), float(y[0]), values, m_eff)


def build_single_well_potential(R: float, depth: float, dx: float = 0.02,
                                padding: float = 2.0, m_eff: float = M_LP) -> PotentialGrid:
    """One square well of side 2R centred at the origin."""
    if R <= 0 or depth <= 0:
        raise DomainError("need R > 0 and depth > 0")
    if dx > R / 10:
        raise ResolutionError(f"dx={dx} µm is coarser than R/10={R / 10} µm")
    x = _grid_axis(R + padding, dx)
    values = np.where(_square(x, x, 0.0, R, dx), 0.0, float(depth))
    return PotentialGrid(dx, dx, float(x[0]), float(x[0]), values, m_eff)


def _laplacian_1d(n: int, d: float) -> sp.csr_matrix:
    return sp.diags([np.ones(n - 1), -2 * np.ones(n), np.ones(n - 1)], [-1, 0, 1]) / d**2


def hamiltonian(grid: PotentialGrid, constants: PhysConstants = CONSTANTS) -> sp.csc_matrix:
    """Sparse -ħ²∇²/2m + U with Dirichlet walls just outside the grid."""
    kin = constants.hbar2_over_2m0 / grid.m_eff
    lap = sp.kronsum(_laplacian_1d(grid.nx, grid.dx), _laplacian_1d(grid.ny, grid.dy))
    return (-kin * lap + sp.diags(grid.values.ravel())).tocsc()


def solve_eigenmodes(grid: PotentialGrid, k: int = 2, tol: float = 1e-9,
                     maxiter: int = 10_000,
                     constants: PhysConstants = CONSTANTS) -> EigenSolution:
    """Lowest ``k`` eigenpairs of the trap Hamiltonian."""
    if k < 1:
        raise DomainError("k must be at least 1")
    H = hamiltonian(grid, constants)
    v0 = np.ones(H.shape[0])
    try:
        w, v = eigsh(H, k=k, sigma=0.0, which="LM", v0=v0, tol=tol, maxiter=maxiter)
    except ArpackNoConvergence as exc:
        res = np.inf
        if len(exc.eigenvalues):
            r = H @ exc.eigenvectors - exc.eigenvectors * exc.eigenvalues
            res = float(np.linalg.norm(r, axis=0).max())
        raise NumericalError("eigensolver did not converge", residual=res) from exc
    order = np.argsort(w)
    w, v = w[order], v[:, order]
    residual = float(np.linalg.norm(H @ v - v * w, axis=0).max())
    area = grid.dx * grid.dy
    psis = []
    for j in range(k):
        psi = v[:, j] / np.sqrt(np.sum(v[:, j] ** 2) * area)
        if psi[np.argmax(np.abs(psi))] < 0:
            psi = -psi
        psis.append(psi.reshape(grid.ny, grid.nx))
    return EigenSolution(w, np.array(psis), grid.dx, grid.dy, residual)


def tunnel_coupling(sol: EigenSolution) -> float:
    """Half the splitting of the two lowest levels (meV)."""
    if len(sol.energies) < 2:
        raise DomainError("tunnel coupling needs at least two levels")
    return float(sol.energies[1] - sol.energies[0]) / 2


def coupled_trap_U(R: float, D: float, depth: float = 7.0, dx: float = 0.02,
                   padding: float = 2.0, m_eff: float = M_LP) -> float:
    """Convenience: tunnel coupling of two square traps."""
    grid = build_coupled_well_potential(R, D, depth, dx=dx, padding=padding, m_eff=m_eff)
    return tunnel_coupling(solve_eigenmodes(grid, 2))


def mode_area(psi: np.ndarray, dx: float, dy: float) -> float:
    """Effective area ∫|ψ|²/max|ψ|² (µm²)."""
    p = np.abs(np.asarray(psi)) ** 2
    peak = p.max() if p.size else 0.0
    if peak == 0:
        raise DomainError("mode_area of an identically zero field")
    return float(p.sum() * dx * dy / peak)


def mode_volume(a: float = 1.2, lam: float = 0.910, n1: float = 3.0, n2: float = 3.6,
                n_c: float = 3.6) -> ModeGeometry:
    """Mode geometry of a Gaussian trap mode in a DBR microcavity (µm units)."""
    if n1 == n2:
        raise ZeroDivisionError("DBR penetration depth diverges for n1 = n2")
    if min(a, lam, n1, n2, n_c) <= 0:
        raise DomainError("mode_volume inputs must be positive")
    area = np.pi * a**2 / 2
    l_dbr = lam / 2 * n1 * n2 / (n_c * abs(n1 - n2))
    l_c = lam + l_dbr
    length = l_c / 2
    return ModeGeometry(area, length, area * length, a, l_dbr, l_c)


def hopfield_coefficients(V: float, omega_R: float) -> HopfieldSplit:
    """Exciton/photon fractions of the J=±1 lower polaritons under Zeeman shift V.

    ``omega_R`` is half the Rabi splitting.
    """
    if omega_R <= 0:
        raise DomainError("omega_R must be positive")
    x = V / np.sqrt(V**2 + 4 * omega_R**2)
    rp, rm = 0.5 * (1 + x), 0.5 * (1 - x)
    return HopfieldSplit(float(rp), float(1 - rp), float(rm), float(1 - rm), V, omega_R)


def scale_exchange(V_ex_ref: float, A_ref: float, A: float) -> float:
    """Exchange energy rescaled to a new mode area (V_ex ∝ 1/A)."""
    if A <= 0 or A_ref <= 0:
        raise DomainError("areas must be positive")
    return V_ex_ref * A_ref / A


def gaussian_mode(grid_x: np.ndarray, grid_y: np.ndarray, a: float) -> np.ndarray:
    """Sampled Gaussian e^{-r²/a²} on a tensor grid."""
    return np.exp(-(grid_x[None, :] ** 2 + grid_y[:, None] ** 2) / a**2)
