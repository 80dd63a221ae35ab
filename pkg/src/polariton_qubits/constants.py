"""Physical constants in the package unit system (meV, ps, µm, T)."""

from __future__ import annotations

from dataclasses import dataclass

from scipy import constants as _sc


@dataclass(frozen=True)
class PhysConstants:
    """Constants used throughout, in meV / ps / µm / T units.

    Attributes
    ----------
    hbar : float
        Reduced Planck constant in meV·ps.
    mu_B : float
        Bohr magneton in meV/T.
    hbar2_over_2m0 : float
        ħ²/(2 m0) in meV·µm², the kinetic prefactor for a bare electron mass.
    speed_of_light : float
        c in µm/ps.
    """

    hbar: float = 0.658212
    mu_B: float = 0.057884
    hbar2_over_2m0: float = (_sc.hbar**2 / (2 * _sc.m_e)) / (_sc.e * 1e-3) * 1e12
    speed_of_light: float = _sc.c * 1e-6

    def __post_init__(self):
        for name in ("hbar", "mu_B", "hbar2_over_2m0", "speed_of_light"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def hc(self) -> float:
        """Planck constant times c, in meV·µm."""
        return 2 * 3.141592653589793 * self.hbar * self.speed_of_light


CONSTANTS = PhysConstants()
HBAR = CONSTANTS.hbar
MU_B = CONSTANTS.mu_B

# Joules per meV, for converting optical power to photon flux.
JOULE_PER_MEV = _sc.e * 1e-3
