"""Result containers shared by every computation.

All energies are returned as a dimensionless coefficient times a physical
scale.  The scale tag says which combination of hbar, c, the nanoparticle
radius and the distances restores the physical energy.
"""
from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from typing import Any


class Scale(str, enum.Enum):
    """Unit-restoration factor multiplying an EnergyResult coefficient."""

    HBAR_C_RHO6_OVER_R7 = "hbar*c*rho^6/r^7"
    HBAR_OMEGA_P_RHO6_OVER_R6 = "hbar*omega_p*rho^6/r^6"
    HBAR_C_RHO9_OVER_L10 = "hbar*c*rho^9/L^10"
    HBAR_OMEGA_P_RHO9_OVER_ABC3 = "hbar*omega_p*rho^9/(a*b*c)^3"
    HBAR_C_RHO3_OVER_D4 = "hbar*c*rho^3/d^4"
    HBAR_C_OVER_D3 = "hbar*c/d^3"
    INVERSE_LENGTH5 = "1/d^5"
    INVERSE_LENGTH4 = "1/d^4"
    DIMENSIONLESS = "1"

    @property
    def label(self) -> str:
        return self.value


@dataclass(frozen=True)
class EnergyResult:
    """Dimensionless coefficient with its scale.

    ``value`` is ``coefficient * scale_value``, i.e. the energy in reduced
    units (hbar = c = 1) for the concrete lengths that were passed in.
    """

    coefficient: float
    scale: Scale
    error_estimate: float = 0.0
    scale_value: float = 1.0
    regime: str = "exact"
    converged: bool = True
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not self.error_estimate >= 0.0:
            raise ValueError(f"error_estimate must be >= 0, got {self.error_estimate}")

    @property
    def value(self) -> float:
        return self.coefficient * self.scale_value

    @property
    def value_error(self) -> float:
        return self.error_estimate * abs(self.scale_value)

    def to_dict(self) -> dict[str, Any]:
        return {
            "coefficient": self.coefficient,
            "scale": self.scale.value,
            "error": self.error_estimate,
            "regime": self.regime,
            "converged": self.converged,
        }


@dataclass(frozen=True)
class ConvergenceRow:
    param: float
    value: float
    error: float
    evals: int


@dataclass
class ConvergenceReport:
    """Rows of (control parameter, value, error, evaluations).

    By convention the last row of a finished study holds the extrapolated
    limit.
    """

    name: str
    rows: list[ConvergenceRow] = field(default_factory=list)
    notes: dict[str, Any] = field(default_factory=dict)

    def add(self, param: float, value: float, error: float, evals: int = 0) -> None:
        self.rows.append(ConvergenceRow(float(param), float(value), float(error), int(evals)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["param", "value", "error", "evals"])
        for row in self.rows:
            # repr() is locale independent and round-trips exactly
            writer.writerow([repr(row.param), repr(row.value), repr(row.error), str(row.evals)])
        return buf.getvalue()
