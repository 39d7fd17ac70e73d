"""Nanoparticle / perfectly conducting half-space: microscopic two- and three-body sums.

Geometry: the probe particle C sits at the origin, the half-space occupies
``z >= d`` and is filled with perfect-conductor nanoparticles of radius
``rho`` at density ``N = 3 / (4 pi rho^3)``.

Three-body term
---------------
The pair-summed triplet energy is ``W3 = (2/pi) rho^9 N^2 K(d)`` with

    K(d, lam) = int_{z_A>=d} int_{z_B>=d} Theta(|AB| - lam) f(|CA|, |CB|, |AB|) dV_A dV_B .

``K`` itself diverges as ``lam -> 0`` by a d-independent constant, so only
``dK/dd`` is integrated.  Differentiating the step functions pins one
particle (B) to the surface:

    dK/dd = -2 int_{z_B=d} d^2x_B int_{z_A>=d, |AB|>=lam} f dV_A .

The inner integral is done in spherical coordinates centred on B,
``A = B + c n`` with ``n`` in the upper hemisphere, so the exclusion ball
``|AB| >= lam`` is the coordinate bound ``c >= lam``.  Near ``c = 0``,
``f ~ (7/16)(1 - 3 (n.B^)^2) / (b^7 c^3)``; that term has zero mean over
every hemispherical shell and is subtracted shell by shell (with a smooth
radial window), which leaves a bounded integrand.  The integral is then
extrapolated to ``lam -> 0`` over a geometric ladder.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .kernels import RETARDED_C6, retarded_geometry, u2_retarded
from .quadrature import (IntegralResult, QuadratureSpec, integrate_adaptive_nd, semi_infinite_map)
from .results import ConvergenceReport, EnergyResult, Scale

W2_CP_COEFF = -69.0 / (160.0 * math.pi)
DIPOLE_COEFF = 7.0 / 16.0

DEFAULT_K_SPEC = QuadratureSpec(rel_tol=1e-5, max_subdivisions=400_000)
DEFAULT_LADDER_LEVELS = 4
DEFAULT_LAMBDA0_RATIO = 1.0 / 8.0


@dataclass(frozen=True)
class HalfspaceConfig:
    d: float
    radius: float = 1.0

    def __post_init__(self):
        if not self.d > 0:
            raise ValueError("distance d must be > 0")
        if not self.radius > 0:
            raise ValueError("radius must be > 0")

    @property
    def density(self) -> float:
        return 3.0 / (4.0 * math.pi * self.radius ** 3)

    @property
    def scale_value(self) -> float:
        return self.radius ** 3 / self.d ** 4


@dataclass
class KResult:
    alpha: float
    k_coefficient: float
    extrapolation_table: ConvergenceReport
    error: float
    d: float = 1.0
    metadata: dict = field(default_factory=dict)

    @property
    def value(self) -> float:
        """K(d) without the divergent constant."""
        return self.k_coefficient / self.d ** 4


# ---------------------------------------------------------------------------
# two-body
# ---------------------------------------------------------------------------

def w2_cp_analytic(cfg: HalfspaceConfig) -> EnergyResult:
    return EnergyResult(W2_CP_COEFF, Scale.HBAR_C_RHO3_OVER_D4, 0.0, cfg.scale_value, regime="ret")


def w2_cp_numeric(cfg: HalfspaceConfig, q: QuadratureSpec | None = None) -> EnergyResult:
    """Sum of the retarded pair energy over the half-space in spherical coordinates about C."""
    q = q or QuadratureSpec(rel_tol=1e-7, max_subdivisions=20_000)
    d, N, rho6 = cfg.d, cfg.density, cfg.radius ** 6

    def integrand(p):
        theta = 0.5 * math.pi * p[:, 0]
        r, jr = semi_infinite_map(p[:, 1], d / np.cos(theta), d, q.transform)
        val = -RETARDED_C6 * rho6 * r ** -5 * np.sin(theta) * jr * 2.0 * math.pi * N * 0.5 * math.pi
        return np.where(np.isfinite(val), val, 0.0)

    res = integrate_adaptive_nd(integrand, [0.0, 0.0], [1.0, 1.0], q)
    s = cfg.scale_value
    return EnergyResult(res.value / s, Scale.HBAR_C_RHO3_OVER_D4, res.error_estimate / s, s,
                        regime="ret", converged=res.converged, metadata={"evaluations": res.evaluations})


def lattice_sum(sites, weights, rho: float) -> float:
    """Direct sum of the retarded pair energy between C (origin) and weighted sites."""
    sites = np.atleast_2d(np.asarray(sites, dtype=float))
    r = np.linalg.norm(sites, axis=1)
    return float(np.sum(np.asarray(weights, dtype=float) * -RETARDED_C6 * rho ** 6 / r ** 7))


def lattice_oracle_w2(cfg: HalfspaceConfig, spacing: float, extent: float | None = None) -> EnergyResult:
    """Brute-force two-body sum over a simple-cubic lattice filling ``z >= d``.

    Sites sit at cell centres, ``((i+1/2) h, (j+1/2) h, d + (k+1/2) h)``,
    each carrying ``N h^3`` particles.  Sites farther than ``extent`` from C
    are replaced by the continuum integral over ``r > extent``.
    """
    d, h = cfg.d, spacing
    if not h > 0:
        raise ValueError("spacing must be > 0")
    R = 40.0 * d if extent is None else float(extent)
    if not R > d:
        raise ValueError("extent must exceed d")
    w = cfg.density * h ** 3
    n_xy = int(math.ceil(R / h))
    xy = (np.arange(n_xy) + 0.5) * h
    rho_xy2 = (xy[:, None] ** 2 + xy[None, :] ** 2).ravel()
    total = 0.0
    nsites = 0
    for k in range(int(math.ceil((R - d) / h))):
        z = d + (k + 0.5) * h
        r2 = rho_xy2 + z * z
        inside = r2 <= R * R
        # four quadrants by symmetry
        total += 4.0 * float(np.sum(r2[inside] ** -3.5))
        nsites += 4 * int(np.count_nonzero(inside))
    pref = -RETARDED_C6 * cfg.radius ** 6 * w
    lattice_part = pref * total
    # continuum beyond R: solid-angle fraction of the sphere of radius r lying in z >= d
    tail = -RETARDED_C6 * cfg.radius ** 6 * cfg.density * 2.0 * math.pi * (0.25 / R ** 4 - 0.2 * d / R ** 5)
    s = cfg.scale_value
    value = lattice_part + tail
    meta = {"sites": nsites, "spacing": h, "extent": R, "tail_fraction": abs(tail / value),
            "extent_warning": abs(tail) > 0.01 * abs(lattice_part)}
    return EnergyResult(value / s, Scale.HBAR_C_RHO3_OVER_D4, 0.0, s, regime="lattice", metadata=meta)


# ---------------------------------------------------------------------------
# three-body: dK/dd
# ---------------------------------------------------------------------------

def dk_integrand(p: np.ndarray, d: float, cutoff: float = 0.0, length_scale: float = 1.0,
                 subtract: bool = True) -> np.ndarray:
    """Integrand of dK/dd on the unit 4-cube (prefactors included).

    Coordinates: ``p[:, 0]`` -> in-plane distance ``s`` of B from the foot of
    C, ``p[:, 1]`` -> ``|AB| = c >= cutoff``, ``p[:, 2]`` -> ``cos`` of the
    polar angle of ``n = (A - B)/c``, ``p[:, 3]`` -> its azimuth over
    ``[0, pi]`` (the ``[pi, 2 pi]`` half is its mirror image).
    """
    s, js = semi_infinite_map(p[:, 0], 0.0, length_scale)
    c, jc = semi_infinite_map(p[:, 1], cutoff, length_scale)
    mu = p[:, 2]
    psi = math.pi * p[:, 3]
    st = np.sqrt(np.maximum(0.0, 1.0 - mu * mu))
    nx, ny, nz = st * np.cos(psi), st * np.sin(psi), mu

    b = np.sqrt(s * s + d * d)
    ax, ay, az = s + c * nx, c * ny, d + c * nz
    a = np.sqrt(ax * ax + ay * ay + az * az)
    n_dot_b = (nx * s + nz * d) / b
    cos_at_b = -n_dot_b  # angle opposite |CA|
    cos_at_a = (nx * ax + ny * ay + nz * az) / a  # angle opposite |CB|
    cos_at_c = (ax * s + az * d) / (a * b)  # angle opposite |AB|
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        f = retarded_geometry(a, b, c, cos_at_b, cos_at_a, cos_at_c)
        if subtract:
            window = b * b / (b * b + c * c)
            f = f - DIPOLE_COEFF * (1.0 - 3.0 * n_dot_b ** 2) / (b ** 7 * c ** 3) * window
        # -2 (either particle on the surface) * 2 pi (azimuth of B) * 2 (mirror in psi) * pi (psi jacobian)
        val = -8.0 * math.pi * math.pi * f * c * c * s * js * jc
    return np.where(np.isfinite(val), val, 0.0)


def probe_frame_integrand(p: np.ndarray, d: float, cutoff: float, length_scale: float = 1.0) -> np.ndarray:
    """Same dK/dd integral in spherical coordinates about C with a hard ``|AB| >= cutoff``.

    ``p[:, 0]`` -> polar angle of A, ``p[:, 1]`` -> ``|CA|`` beyond the
    surface, ``p[:, 2]`` -> relative azimuth over ``[0, pi]``, ``p[:, 3]`` ->
    polar angle of B (B on the surface).  No singular subtraction; meant
    for Monte Carlo cross-checks at finite cutoff.
    """
    th_a = 0.5 * math.pi * p[:, 0]
    th_b = 0.5 * math.pi * p[:, 3]
    phi = math.pi * p[:, 2]
    a, ja = semi_infinite_map(p[:, 1], d / np.cos(th_a), length_scale)
    b = d / np.cos(th_b)
    ax, ay, az = a * np.sin(th_a) * np.cos(phi), a * np.sin(th_a) * np.sin(phi), a * np.cos(th_a)
    bx, bz = b * np.sin(th_b), b * np.cos(th_b)
    ux, uy, uz = ax - bx, ay, az - bz
    c = np.sqrt(ux * ux + uy * uy + uz * uz)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        cos_at_b = (ux * bx + uz * bz) / (c * b)
        cos_at_a = -(ux * ax + uy * ay + uz * az) / (c * a)
        cos_at_c = (ax * bx + az * bz) / (a * b)
        f = np.where(c >= cutoff, retarded_geometry(a, b, c, cos_at_b, cos_at_a, cos_at_c), 0.0)
        val = -8.0 * math.pi * (0.5 * math.pi) ** 2 * math.pi * f * a * a * b * b * np.sin(th_a) * np.tan(th_b) * ja
    return np.where(np.isfinite(val), val, 0.0)


def dK_dd_at_cutoff(d: float, cutoff: float | None = None, q: QuadratureSpec | None = None) -> IntegralResult:
    """dK/dd for one cutoff (``q.singular_cutoff`` if not given; 0 is allowed)."""
    q = q or DEFAULT_K_SPEC
    lam = q.singular_cutoff if cutoff is None else cutoff
    if not d > 0:
        raise ValueError("d must be > 0")
    return integrate_adaptive_nd(lambda p: dk_integrand(p, d, lam), [0.0] * 4, [1.0] * 4, q)


def richardson(values, errors, ratio: float = 2.0):
    """Richardson table for ``v(h) = v0 + c1 h + c2 h^2 + ...`` sampled at ``h0 / ratio^k``.

    Returns ``(limit, propagated_error, truncation, diagonal)``.
    """
    n = len(values)
    weights = [np.eye(n)[k] for k in range(n)]
    table = [[values[k]] for k in range(n)]
    wtab = [[weights[k]] for k in range(n)]
    for j in range(1, n):
        fac = ratio ** j
        for k in range(j, n):
            table[k].append((fac * table[k][j - 1] - table[k - 1][j - 1]) / (fac - 1.0))
            wtab[k].append((fac * wtab[k][j - 1] - wtab[k - 1][j - 1]) / (fac - 1.0))
    limit = table[n - 1][n - 1]
    propagated = float(np.sum(np.abs(wtab[n - 1][n - 1]) * np.asarray(errors)))
    truncation = abs(limit - table[n - 1][n - 2]) if n > 1 else 0.0
    return limit, propagated, truncation, [table[k][k] for k in range(n)]


def lambda_ladder(d: float = 1.0, q: QuadratureSpec | None = None, levels: int = DEFAULT_LADDER_LEVELS,
                  lambda0: float | None = None) -> ConvergenceReport:
    """dK/dd on the ladder ``lambda0 / 2^k`` plus a final extrapolated (``param = 0``) row."""
    if levels < 1:
        raise ValueError("levels must be >= 1")
    q = q or DEFAULT_K_SPEC
    lam0 = lambda0 if lambda0 is not None else (q.singular_cutoff or DEFAULT_LAMBDA0_RATIO * d)
    report = ConvergenceReport(f"lambda-ladder d={d!r}")
    values, errors, evals = [], [], 0
    converged = True
    for k in range(levels):
        lam = lam0 / 2 ** k
        res = dK_dd_at_cutoff(d, lam, q)
        values.append(res.value)
        errors.append(res.error_estimate)
        evals += res.evaluations
        converged &= res.converged
        report.add(lam, res.value, res.error_estimate, res.evaluations)
    if levels == 1:
        limit, prop, trunc = values[0], errors[0], 0.0
    else:
        limit, prop, trunc, _ = richardson(values, errors)
    steps = np.diff(values)
    monotone = bool(np.all(np.sign(steps) == np.sign(steps[0])) and
                    np.all(np.abs(steps[1:]) < np.abs(steps[:-1]))) if len(steps) else True
    report.add(0.0, limit, prop + trunc, evals)
    report.notes.update({"d": d, "lambda0": lam0, "propagated_error": prop, "truncation": trunc,
                         "ladder_residual": trunc / abs(limit) if limit else math.inf,
                         "monotone": monotone, "converged": converged})
    return report


def dK_dd(d: float, q: QuadratureSpec | None = None, levels: int = DEFAULT_LADDER_LEVELS,
          lambda0: float | None = None) -> IntegralResult:
    """Continuum-limit dK/dd from the extrapolated cutoff ladder."""
    report = lambda_ladder(d, q, levels, lambda0)
    last = report.rows[-1]
    return IntegralResult(last.value, last.error, last.evals,
                          bool(report.notes["converged"] and report.notes["monotone"]))


@functools.lru_cache(maxsize=16)
def _unit_alpha(q: QuadratureSpec, levels: int, lambda0_ratio: float) -> tuple[float, float, ConvergenceReport]:
    report = lambda_ladder(1.0, q, levels, lambda0_ratio)
    return report.rows[-1].value, report.rows[-1].error, report


def k_of_d(d: float = 1.0, q: QuadratureSpec | None = None, levels: int = DEFAULT_LADDER_LEVELS,
           lambda0_ratio: float = DEFAULT_LAMBDA0_RATIO) -> KResult:
    """``K(d) = k / d^4`` with ``k = -alpha / 4`` and ``alpha = d^5 dK/dd`` computed once at ``d = 1``."""
    if not d > 0:
        raise ValueError("d must be > 0")
    alpha, err, report = _unit_alpha(q or DEFAULT_K_SPEC, levels, lambda0_ratio)
    return KResult(alpha=alpha, k_coefficient=-alpha / 4.0, extrapolation_table=report, error=err / 4.0, d=d,
                   metadata=dict(report.notes))


def w3_cp(cfg: HalfspaceConfig, q: QuadratureSpec | None = None, levels: int = DEFAULT_LADDER_LEVELS) -> EnergyResult:
    """Three-body Casimir-Polder energy ``(2/pi) rho^9 N^2 K(d) = (9 / 8 pi^3) k rho^3 / d^4``."""
    k = k_of_d(cfg.d, q, levels)
    pref = 9.0 / (8.0 * math.pi ** 3)
    meta = {"alpha": k.alpha, "k_coefficient": k.k_coefficient, **k.metadata}
    ok = bool(k.metadata.get("converged", True) and k.metadata.get("monotone", True))
    return EnergyResult(pref * k.k_coefficient, Scale.HBAR_C_RHO3_OVER_D4, pref * k.error, cfg.scale_value,
                        regime="ret", converged=ok, metadata=meta)
