"""Two- and three-body dispersion energies between identical nanoparticles.

Reduced units, hbar = c = eps0 = 1.  With the reduced polarizability
``alpha~ = alpha / (4 pi rho^3)`` the frequency-integral prefactors collapse to

    U2 = -(1/pi) rho^6 / r^6            * int_0^inf alpha~^2(i xi) g2(xi r) dxi
    U3 = +(1/pi) rho^9 / (a b c)^3      * int_0^inf alpha~^3(i xi) g3(a xi, b xi, c xi) dxi

(see ``docs/derivations.md``).  Closed forms exist in the non-retarded
(``r << lambda_p``) and retarded (``r >> lambda_p``) limits; the perfect
conductor is retarded at every separation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .material import DomainError, DrudeMaterial, Material, PerfectConductor, reduced_polarizability
from .quadrature import QuadratureSpec, integrate_semi_infinite
from .results import EnergyResult, Scale

SQRT3 = math.sqrt(3.0)
RETARDED_C6 = 23.0 / (4.0 * math.pi)

#: auto regime: non-retarded below lambda_p / NONRET_FACTOR, retarded above RET_FACTOR * lambda_p
NONRET_FACTOR = 50.0
RET_FACTOR = 50.0


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class Triangle:
    """Three interparticle distances; ``cos_a`` is the cosine of the angle opposite ``a``."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        a, b, c = self.a, self.b, self.c
        if min(a, b, c) <= 0:
            raise GeometryError("triangle sides must be > 0")
        slack = 1e-12 * (a + b + c)
        if a > b + c + slack or b > a + c + slack or c > a + b + slack:
            raise GeometryError(f"sides {a}, {b}, {c} violate the triangle inequality")

    @staticmethod
    def _cos(opp, s1, s2):
        return min(1.0, max(-1.0, (s1 * s1 + s2 * s2 - opp * opp) / (2.0 * s1 * s2)))

    @cached_property
    def cos_a(self) -> float:
        return self._cos(self.a, self.b, self.c)

    @cached_property
    def cos_b(self) -> float:
        return self._cos(self.b, self.c, self.a)

    @cached_property
    def cos_c(self) -> float:
        return self._cos(self.c, self.a, self.b)

    @property
    def sides(self) -> tuple[float, float, float]:
        return self.a, self.b, self.c

    @property
    def cosines(self) -> tuple[float, float, float]:
        return self.cos_a, self.cos_b, self.cos_c

    @property
    def mean_side(self) -> float:
        return (self.a + self.b + self.c) / 3.0

    def scaled(self, k: float) -> "Triangle":
        return Triangle(k * self.a, k * self.b, k * self.c)


def _nonneg(*xs):
    arrs = [np.asarray(x, dtype=float) for x in xs]
    for x in arrs:
        if np.any(x < 0) or np.any(np.isnan(x)):
            raise DomainError("arguments must be >= 0")
    return arrs


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def g2(x):
    """``exp(-2x) (3 + 6x + 5x^2 + 2x^3 + x^4)``."""
    (x,) = _nonneg(x)
    return _scalar(np.exp(-2.0 * x) * (3.0 + x * (6.0 + x * (5.0 + x * (2.0 + x)))))


def g3(x, y, z, cos_a, cos_b, cos_c):
    """Three-body frequency kernel; ``cos_*`` are the angles opposite the sides scaled into x, y, z."""
    x, y, z = _nonneg(x, y, z)
    f = lambda u: 1.0 + u + u * u
    g = lambda u: 3.0 + 3.0 * u + u * u
    fx, fy, fz = f(x), f(y), f(z)
    gx, gy, gz = g(x), g(y), g(z)
    bracket = (3.0 * fx * fy * fz - gx * fy * fz - fx * gy * fz - fx * fy * gz
               + fx * gy * gz * cos_a ** 2 + gx * fy * gz * cos_b ** 2 + gx * gy * fz * cos_c ** 2
               + gx * gy * gz * cos_a * cos_b * cos_c)
    return _scalar(np.exp(-(x + y + z)) * bracket)


def retarded_geometry(a, b, c, cos_a=None, cos_b=None, cos_c=None):
    """Geometric factor ``f(a, b, c)`` of the retarded three-body energy ``(4/pi) rho^9 f``.

    Vectorised.  Cosines may be supplied when the caller can compute them
    more accurately than the law of cosines (nearly degenerate triangles).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    if cos_a is None:
        cos_a = (b * b + c * c - a * a) / (2.0 * b * c)
        cos_b = (a * a + c * c - b * b) / (2.0 * a * c)
        cos_c = (a * a + b * b - c * c) / (2.0 * a * b)
    s1 = a + b + c
    r2 = (a * a + b * b + c * c) / s1 ** 2
    r3 = (a ** 3 + b ** 3 + c ** 3) / s1 ** 3
    f1 = 9.0 - 39.0 * r2 + 22.0 * r3 + 54.0 * r2 * r2 - 65.0 * r2 * r3 + 20.0 * r3 * r3
    f3 = 1.0 + 39.0 * r2 - 17.0 * r3 - 72.0 * r2 * r2 + 75.0 * r2 * r3 - 20.0 * r3 * r3
    # f2 written with p = side / s1 to keep every term O(1)
    pa, pb, pc = a / s1, b / s1, c / s1

    def f2(p, q, r):
        return 3.0 * (p * p + 3.0 * p * p * (q + r) + 4.0 * q * r * (3.0 * p * p - q * r) - 20.0 * p * q * q * r * r)

    bracket = (f1 + f2(pa, pb, pc) * cos_a ** 2 + f2(pb, pc, pa) * cos_b ** 2
               + f2(pc, pa, pb) * cos_c ** 2 + f3 * cos_a * cos_b * cos_c)
    return _scalar(bracket / ((a * b * c) ** 3 * s1))


# ---------------------------------------------------------------------------
# two-body
# ---------------------------------------------------------------------------

def _check_r(r):
    if not r > 0:
        raise DomainError("separation must be > 0")


def u2_retarded(rho: float, r: float) -> EnergyResult:
    _check_r(r)
    return EnergyResult(-RETARDED_C6, Scale.HBAR_C_RHO6_OVER_R7, 0.0, rho ** 6 / r ** 7, regime="ret")


def u2_nonretarded(m: DrudeMaterial, r: float) -> EnergyResult:
    """Small-separation form, first order in ``Gamma / omega_p``."""
    _check_r(r)
    if not isinstance(m, DrudeMaterial):
        raise TypeError("non-retarded closed form needs a Drude material")
    coeff = -(SQRT3 / 4.0) * (1.0 - 2.0 * SQRT3 * m.damping / (math.pi * m.plasma_frequency))
    meta = {"truncation": "first order in Gamma/omega_p", "series_warning": m.series_warning,
            "outside_regime": r > m.plasma_wavelength / NONRET_FACTOR}
    return EnergyResult(coeff, Scale.HBAR_OMEGA_P_RHO6_OVER_R6, 0.0,
                        m.plasma_frequency * m.radius ** 6 / r ** 6, regime="nonret", metadata=meta)


def u2_full(m: Material, r: float, q: QuadratureSpec | None = None) -> EnergyResult:
    """Full frequency integral, reported on the retarded scale ``rho^6 / r^7``."""
    _check_r(r)
    q = q or QuadratureSpec()
    # in x = xi r the coefficient is -(1/pi) int alpha~^2(i x / r) g2(x) dx
    scale = 1.0
    if isinstance(m, DrudeMaterial):
        scale = min(1.0, m.plasma_frequency * r / SQRT3)
    res = integrate_semi_infinite(lambda x: reduced_polarizability(m, x / r) ** 2 * g2(x), q, scale=scale)
    return EnergyResult(-res.value / math.pi, Scale.HBAR_C_RHO6_OVER_R7, res.error_estimate / math.pi,
                        m.radius ** 6 / r ** 7, regime="full", converged=res.converged,
                        metadata={"evaluations": res.evaluations, "series_warning": m.series_warning})


def select_regime(m: Material, sides) -> str:
    if isinstance(m, PerfectConductor):
        return "ret"
    lp = m.plasma_wavelength
    if max(sides) < lp / NONRET_FACTOR:
        return "nonret"
    if min(sides) > RET_FACTOR * lp:
        return "ret"
    return "full"


def pair_energy(m: Material, r: float, regime: str = "auto", q: QuadratureSpec | None = None) -> EnergyResult:
    chosen = select_regime(m, (r,)) if regime == "auto" else regime
    if chosen == "ret":
        res = u2_retarded(m.radius, r)
    elif chosen == "nonret":
        res = u2_nonretarded(m, r)
    elif chosen == "full":
        res = u2_full(m, r, q)
    else:
        raise ValueError(f"unknown regime {regime!r}")
    if regime == "auto":
        res.metadata["auto_regime"] = chosen
    return res


# ---------------------------------------------------------------------------
# three-body
# ---------------------------------------------------------------------------

def u3_retarded(rho: float, t: Triangle) -> EnergyResult:
    """``(4/pi) rho^9 f(a, b, c)``, reported on the scale ``rho^9 / L^10`` with ``L`` the mean side."""
    L = t.mean_side
    f = retarded_geometry(t.a, t.b, t.c, *t.cosines)
    return EnergyResult(4.0 / math.pi * f * L ** 10, Scale.HBAR_C_RHO9_OVER_L10, 0.0,
                        rho ** 9 / L ** 10, regime="ret", metadata={"mean_side": L})


def u3_nonretarded(m: DrudeMaterial, t: Triangle) -> EnergyResult:
    if not isinstance(m, DrudeMaterial):
        raise TypeError("non-retarded closed form needs a Drude material")
    ca, cb, cc = t.cosines
    coeff = (3.0 * SQRT3 / 16.0) * (1.0 - 8.0 * SQRT3 * m.damping / (3.0 * math.pi * m.plasma_frequency)) \
        * (1.0 + 3.0 * ca * cb * cc)
    meta = {"truncation": "first order in Gamma/omega_p", "series_warning": m.series_warning,
            "outside_regime": max(t.sides) > m.plasma_wavelength / NONRET_FACTOR}
    return EnergyResult(coeff, Scale.HBAR_OMEGA_P_RHO9_OVER_ABC3, 0.0,
                        m.plasma_frequency * m.radius ** 9 / (t.a * t.b * t.c) ** 3, regime="nonret",
                        metadata=meta)


def u3_full(m: Material, t: Triangle, q: QuadratureSpec | None = None) -> EnergyResult:
    q = q or QuadratureSpec()
    L = t.mean_side
    a, b, c = (s / L for s in t.sides)
    ca, cb, cc = t.cosines
    scale = 1.0
    if isinstance(m, DrudeMaterial):
        scale = min(1.0, m.plasma_frequency * L / SQRT3)
    # x = xi L
    res = integrate_semi_infinite(
        lambda x: reduced_polarizability(m, x / L) ** 3 * g3(a * x, b * x, c * x, ca, cb, cc), q, scale=scale)
    pref = 1.0 / (math.pi * (a * b * c) ** 3)
    return EnergyResult(pref * res.value, Scale.HBAR_C_RHO9_OVER_L10, pref * res.error_estimate,
                        m.radius ** 9 / L ** 10, regime="full", converged=res.converged,
                        metadata={"evaluations": res.evaluations, "mean_side": L,
                                  "series_warning": m.series_warning})


def triplet_energy(m: Material, t: Triangle, regime: str = "auto", q: QuadratureSpec | None = None) -> EnergyResult:
    chosen = select_regime(m, t.sides) if regime == "auto" else regime
    if chosen == "ret":
        res = u3_retarded(m.radius, t)
    elif chosen == "nonret":
        res = u3_nonretarded(m, t)
    elif chosen == "full":
        res = u3_full(m, t, q)
    else:
        raise ValueError(f"unknown regime {regime!r}")
    if regime == "auto":
        res.metadata["auto_regime"] = chosen
    return res
