"""Physical parameters of the driven spinning phonon cavity.

Model rates (Kerr strength, drive amplitude, drive detuning, rotation rate)
are stored in units of the cavity linewidth gamma.  The SI scale
(``omega``, ``quality_factor``) is kept alongside so values can be converted
back to rad/s at the I/O boundary.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

from .errors import DomainError

TWO_PI = 2.0 * math.pi

DEFAULT_OMEGA = TWO_PI * 3.0e9
DEFAULT_QUALITY_FACTOR = 1.0e7
DEFAULT_CHIRALITY = 0.12

# Spin-side defaults (rad/s).  With the cavity defaults above these give
# U = 20 gamma, i.e. U/2pi = 6 kHz.
DEFAULT_COUPLING_G = TWO_PI * 1.0e6
DEFAULT_DETUNING_BIG = TWO_PI * 10.0e6
DEFAULT_RABI = TWO_PI * 1.0e6 * 5.0 / 3.0

# Sign of the Sagnac shift for a left-port drive.  Flip to -1 to swap the
# direction convention everywhere.
LEFT_PORT_SIGN = 1


class DriveDirection(enum.Enum):
    LEFT = "left"
    RIGHT = "right"

    @classmethod
    def parse(cls, value: "DriveDirection | str") -> "DriveDirection":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"left": cls.LEFT, "leftport": cls.LEFT, "l": cls.LEFT,
                   "right": cls.RIGHT, "rightport": cls.RIGHT, "r": cls.RIGHT}
        try:
            return aliases[key]
        except KeyError:
            raise DomainError(f"unknown drive direction {value!r}") from None

    def flipped(self) -> "DriveDirection":
        return DriveDirection.RIGHT if self is DriveDirection.LEFT else DriveDirection.LEFT


def chirality_sign(direction: DriveDirection) -> int:
    """Sign of chi for a given drive port (the single place the convention lives)."""
    direction = DriveDirection.parse(direction)
    return LEFT_PORT_SIGN if direction is DriveDirection.LEFT else -LEFT_PORT_SIGN


def linewidth(omega: float, quality_factor: float) -> float:
    """Cavity dissipation rate gamma = omega / Q."""
    if not quality_factor > 0:
        raise DomainError(f"quality factor must be positive, got {quality_factor}")
    return omega / quality_factor


def nonlinearity_from_spin(coupling_g: float, rabi: float, detuning_big: float) -> float:
    """Spin-induced Kerr strength U = g^4 / (Omega_s * Delta^2).

    Valid only in the dispersive regime; a vanishing Rabi frequency or
    spin-cavity detuning has no dispersive limit and is rejected.
    """
    if rabi == 0 or detuning_big == 0:
        raise DomainError("dispersive regime requires nonzero Rabi frequency and detuning")
    if rabi < 0:
        raise DomainError(f"Rabi frequency must be positive, got {rabi}")
    return coupling_g**4 / (rabi * detuning_big**2)


def rotation_for_shift(shift: float, chirality_mag: float = DEFAULT_CHIRALITY) -> float:
    """Rotation rate giving a Sagnac shift of magnitude ``|shift|``."""
    if not chirality_mag > 0:
        raise DomainError("chirality magnitude must be positive")
    return abs(shift) / chirality_mag


@dataclass(frozen=True)
class SystemParams:
    """All model inputs.  Rates are in units of gamma unless noted.

    ``coupling_g``, ``detuning_big`` and ``rabi`` are optional SI (rad/s)
    records of the spin parameters the Kerr strength was derived from.
    """

    nonlinearity_u: float = 20.0
    drive_amp: float = 0.33
    drive_detuning: float = 0.0
    rotation_omega: float = 0.0
    chirality_mag: float = DEFAULT_CHIRALITY
    direction: DriveDirection = DriveDirection.LEFT
    omega: float = DEFAULT_OMEGA
    quality_factor: float = DEFAULT_QUALITY_FACTOR
    coupling_g: float | None = field(default=None, compare=False)
    detuning_big: float | None = field(default=None, compare=False)
    rabi: float | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "direction", DriveDirection.parse(self.direction))
        if not self.chirality_mag > 0:
            raise DomainError(f"chirality_mag must be positive, got {self.chirality_mag}")
        if not self.rotation_omega >= 0:
            raise DomainError(f"rotation_omega must be >= 0, got {self.rotation_omega}")
        if not self.quality_factor > 0:
            raise DomainError(f"quality_factor must be positive, got {self.quality_factor}")
        for name in ("nonlinearity_u", "drive_amp", "drive_detuning", "rotation_omega", "omega"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")

    @classmethod
    def from_physical(
        cls,
        *,
        omega: float = DEFAULT_OMEGA,
        quality_factor: float = DEFAULT_QUALITY_FACTOR,
        coupling_g: float = DEFAULT_COUPLING_G,
        detuning_big: float = DEFAULT_DETUNING_BIG,
        rabi: float = DEFAULT_RABI,
        nonlinearity_u: float | None = None,
        drive_amp: float = 0.0,
        drive_detuning: float = 0.0,
        rotation_omega: float = 0.0,
        chirality_mag: float = DEFAULT_CHIRALITY,
        direction: DriveDirection | str = DriveDirection.LEFT,
    ) -> "SystemParams":
        """Build from SI angular frequencies (rad/s).

        The Kerr strength is derived from the spin parameters unless
        ``nonlinearity_u`` (rad/s) is given explicitly.
        """
        gamma = linewidth(omega, quality_factor)
        if nonlinearity_u is None:
            nonlinearity_u = nonlinearity_from_spin(coupling_g, rabi, detuning_big)
        return cls(
            nonlinearity_u=nonlinearity_u / gamma,
            drive_amp=drive_amp / gamma,
            drive_detuning=drive_detuning / gamma,
            rotation_omega=rotation_omega / gamma,
            chirality_mag=chirality_mag,
            direction=DriveDirection.parse(direction),
            omega=omega,
            quality_factor=quality_factor,
            coupling_g=coupling_g,
            detuning_big=detuning_big,
            rabi=rabi,
        )

    @property
    def gamma(self) -> float:
        """Linewidth in rad/s."""
        return linewidth(self.omega, self.quality_factor)

    @property
    def chirality(self) -> float:
        return chirality_sign(self.direction) * self.chirality_mag

    @property
    def detuning_diff(self) -> float:
        """-Delta_L + Delta_F, the only detuning combination the model sees."""
        return -self.drive_detuning + sagnac_shift(self)

    def with_shift(self, shift: float) -> "SystemParams":
        """Copy whose rotation rate produces ``|shift|`` (gamma units)."""
        return replace(self, rotation_omega=rotation_for_shift(shift, self.chirality_mag))

    def with_direction(self, direction: DriveDirection | str) -> "SystemParams":
        return replace(self, direction=DriveDirection.parse(direction))

    def replace(self, **changes) -> "SystemParams":
        return replace(self, **changes)

    def to_si(self) -> dict[str, float]:
        """Model rates converted to rad/s."""
        g = self.gamma
        return {
            "gamma": g,
            "nonlinearity_u": self.nonlinearity_u * g,
            "drive_amp": self.drive_amp * g,
            "drive_detuning": self.drive_detuning * g,
            "rotation_omega": self.rotation_omega * g,
            "sagnac_shift": sagnac_shift(self) * g,
        }


def sagnac_shift(params: SystemParams) -> float:
    """Rotation-induced resonance shift Delta_F = chi * Omega (gamma units)."""
    # + 0.0 normalizes -0.0 so a non-rotating cavity is bit-identical in both directions
    return params.chirality * params.rotation_omega + 0.0
