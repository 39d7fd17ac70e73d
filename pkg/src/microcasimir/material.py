"""Drude response and quasi-static nanoparticle polarizability at imaginary frequency.

Units are reduced (hbar = c = eps0 = 1): frequencies are inverse lengths.
Polarizabilities are always handled in the reduced form
``alpha / (4 pi eps0 rho^3) = (eps - 1) / (eps + 2)``.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Union

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s
DEFAULT_LENGTH_UNIT_M = 1e-9  # one reduced length unit is 1 nm unless told otherwise

#: value reported for eps(i*0), which is infinite for any Drude metal
EPS_STATIC_SENTINEL = sys.float_info.max

SERIES_WARNING_RATIO = 0.1


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


@dataclass(frozen=True)
class DrudeMaterial:
    plasma_frequency: float
    damping: float = 0.0
    radius: float = 1.0

    def __post_init__(self):
        if not self.plasma_frequency > 0:
            raise DomainError("plasma_frequency must be > 0")
        if not self.damping >= 0:
            raise DomainError("damping must be >= 0")
        if not self.radius > 0:
            raise DomainError("radius must be > 0")

    @property
    def plasma_wavelength(self) -> float:
        return 2.0 * math.pi / self.plasma_frequency

    @property
    def series_warning(self) -> bool:
        """True when damping is too large for the first-order small-damping forms."""
        return self.damping / self.plasma_frequency > SERIES_WARNING_RATIO


@dataclass(frozen=True)
class PerfectConductor:
    radius: float = 1.0

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError("radius must be > 0")

    @property
    def plasma_wavelength(self) -> float:
        return 0.0

    @property
    def series_warning(self) -> bool:
        return False


Material = Union[DrudeMaterial, PerfectConductor]


def _check_xi(xi):
    xi = np.asarray(xi, dtype=float)
    if np.any(xi < 0) or np.any(np.isnan(xi)):
        raise DomainError("imaginary frequency must be >= 0")
    return xi


def permittivity_imag_freq(m: DrudeMaterial, xi):
    """Drude permittivity ``1 + wp^2 / (xi^2 + Gamma xi)`` on the imaginary axis.

    At ``xi = 0`` the permittivity is infinite; :data:`EPS_STATIC_SENTINEL`
    is returned there instead of raising.
    """
    x = _check_xi(xi)
    denom = x * x + m.damping * x
    with np.errstate(divide="ignore"):
        eps = np.where(denom > 0, 1.0 + m.plasma_frequency ** 2 / np.where(denom > 0, denom, 1.0),
                       EPS_STATIC_SENTINEL)
    return float(eps) if eps.ndim == 0 else eps


def reduced_polarizability(m: Material, xi):
    """``(eps - 1)/(eps + 2) = wp^2 / (3 xi^2 + 3 Gamma xi + wp^2)``; identically 1 for a perfect conductor."""
    x = _check_xi(xi)
    if isinstance(m, PerfectConductor):
        out = np.ones_like(x)
    else:
        wp2 = m.plasma_frequency ** 2
        out = wp2 / (3.0 * x * x + 3.0 * m.damping * x + wp2)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# presets / config files
# ---------------------------------------------------------------------------

def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in {"1", "true", "yes", "on"}:
        return True
    if t in {"0", "false", "no", "off"}:
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_material_config(text: str, length_unit_m: float = DEFAULT_LENGTH_UNIT_M) -> Material:
    """Parse ``name = value`` lines into a material.

    Recognised keys: ``omega_p``, ``gamma``, ``radius``, ``perfect_conductor``
    and ``units`` (``si`` -- the default -- or ``reduced``).  In SI, frequencies
    are in 1/s and the radius in metres; they are converted to reduced units
    with one length unit equal to ``length_unit_m`` metres.
    """
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'name = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        values[key.lower()] = val

    unknown = set(values) - {"omega_p", "gamma", "radius", "perfect_conductor", "units", "name"}
    if unknown:
        raise ValueError(f"unknown keys: {sorted(unknown)}")
    units = values.get("units", "si").lower()
    if units not in {"si", "reduced"}:
        raise ValueError("units must be 'si' or 'reduced'")
    freq = 1.0 if units == "reduced" else length_unit_m / SPEED_OF_LIGHT
    length_unit = 1.0 if units == "reduced" else length_unit_m

    radius = float(values["radius"]) / length_unit if "radius" in values else 1.0
    if _parse_bool(values.get("perfect_conductor", "false")):
        return PerfectConductor(radius=radius)
    if "omega_p" not in values:
        raise ValueError("omega_p is required for a Drude material")
    return DrudeMaterial(
        plasma_frequency=float(values["omega_p"]) * freq,
        damping=float(values.get("gamma", 0.0)) * freq,
        radius=radius,
    )


def preset_names() -> list[str]:
    root = resources.files("microcasimir") / "presets"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".cfg"))


def load_material(name_or_path: str | Path, length_unit_m: float = DEFAULT_LENGTH_UNIT_M) -> Material:
    """Load a shipped preset (``gold``, ``perfect``) or a config file path."""
    path = Path(name_or_path)
    if path.is_file():
        return parse_material_config(path.read_text(), length_unit_m)
    res = resources.files("microcasimir") / "presets" / f"{name_or_path}.cfg"
    if not res.is_file():
        raise ValueError(f"unknown material {name_or_path!r}; presets: {preset_names()}")
    return parse_material_config(res.read_text(), length_unit_m)
