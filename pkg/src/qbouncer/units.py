"""Physical constants and the dimensionless unit system of the bouncing neutron.

All simulation code works in scaled units in which the bouncer Hamiltonian
takes the form  H = p^2/2 + x/2 - eps * w_d(t)^2 * x * cos(phi_d(t)).
The four scales are

    length      a  = (hbar^2 / (2 m^2 g))^(1/3)      ~ 5.87 um
    time        T  = m a^2 / hbar                    ~ 0.547 ms
    energy      E0 = hbar / T                        ~ 1.20 peV
    frequency   f0 = 1 / T                           ~ 1.83 kHz

With these choices the scaled gravitational potential is exactly x/2, i.e.
the scaled acceleration unit a/T^2 equals 2g.  SI values appear only at I/O
boundaries; everything else stays dimensionless.
"""

from __future__ import annotations

from dataclasses import dataclass

import math

#: Joules per pico-electron-volt (elementary charge is exact in SI).
PEV = 1.602176634e-31

#: Supported tags for :func:`convert`.  "frequency-angular" and
#: "frequency-hertz" convert the *same* scaled quantity (an angular frequency
#: in units of 1/T) to rad/s and to Hz respectively, matching the convention
#: in which a scaled drive frequency of 1.205 corresponds to 350 Hz.
UNIT_TAGS = (
    "length",
    "time",
    "energy",
    "frequency-angular",
    "frequency-hertz",
    "acceleration",
)


@dataclass(frozen=True)
class PhysicalConstants:
    """SI constants of the problem: neutron mass, local gravity, hbar."""

    neutron_mass: float = 1.6749e-27  # kg
    gravity_g: float = 9.81          # m/s^2
    hbar: float = 1.0546e-34         # J s

    def __post_init__(self) -> None:
        for name in ("neutron_mass", "gravity_g", "hbar"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass(frozen=True)
class ScaledUnits:
    """The four conversion scales between SI and dimensionless units."""

    length_a: float      # m
    time_T: float        # s
    energy_E0: float     # J
    frequency_f0: float  # Hz

    @property
    def acceleration_scale(self) -> float:
        """SI acceleration per scaled acceleration unit, a/T^2 (= 2g)."""
        return self.length_a / self.time_T**2

    @property
    def energy_pev(self) -> float:
        """Energy scale expressed in peV."""
        return self.energy_E0 / PEV


def derive_scales(constants: PhysicalConstants = PhysicalConstants()) -> ScaledUnits:
    """Compute the four scales from the defining formulas.

    Raises
    ------
    ValueError
        If any constant is non-positive (via PhysicalConstants validation).
    """
    m = constants.neutron_mass
    g = constants.gravity_g
    hbar = constants.hbar
    a = (hbar**2 / (2.0 * m**2 * g)) ** (1.0 / 3.0)
    T = m * a**2 / hbar
    return ScaledUnits(length_a=a, time_T=T, energy_E0=hbar / T, frequency_f0=1.0 / T)


def _si_per_scaled(unit: str, scales: ScaledUnits) -> float:
    if unit == "length":
        return scales.length_a
    if unit == "time":
        return scales.time_T
    if unit == "energy":
        return scales.energy_E0
    if unit == "frequency-angular":
        return 1.0 / scales.time_T
    if unit == "frequency-hertz":
        return 1.0 / (2.0 * math.pi * scales.time_T)
    if unit == "acceleration":
        return scales.acceleration_scale
    raise ValueError(f"unknown unit tag {unit!r}; expected one of {UNIT_TAGS}")


def convert(value: float, unit: str, direction: str, scales: ScaledUnits) -> float:
    """Convert `value` between scaled and SI units.

    Parameters
    ----------
    value : float
        Number to convert.
    unit : str
        One of :data:`UNIT_TAGS`.
    direction : str
        "to-si" (scaled value in, SI out) or "to-scaled" (SI in, scaled out).
    scales : ScaledUnits
        Conversion scales from :func:`derive_scales`.
    """
    factor = _si_per_scaled(unit, scales)
    if direction == "to-si":
        return value * factor
    if direction == "to-scaled":
        return value / factor
    raise ValueError(f"unknown direction {direction!r}; expected 'to-si' or 'to-scaled'")


def to_si(value: float, unit: str, scales: ScaledUnits) -> float:
    """Scaled -> SI shorthand for :func:`convert`."""
    return convert(value, unit, "to-si", scales)


def to_scaled(value: float, unit: str, scales: ScaledUnits) -> float:
    """SI -> scaled shorthand for :func:`convert`."""
    return convert(value, unit, "to-scaled", scales)
