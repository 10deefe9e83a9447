"""Local/global transition maps, return maps, analytic bifurcation curves,
and regime classification for the three-parameter unfolding of a planar
saddle-node/saddle separatrix loop.

Geometry: a saddle-node (or the fold pair it splits into) sits in box U1
of half-width ``delta`` with entry section Sigma1 and exit section Sigma2;
a hyperbolic saddle sits in box U2 of half-width ``eps`` with entry
section Sigma3 and exit section Sigma4. The local map through U1 is
``t12``, through U2 is ``t34``; the global legs Sigma2->Sigma3 and
Sigma4->Sigma1 are affine with slopes ``a1``/``a2`` and offsets
``mu2``/``mu3``. ``mu1`` unfolds the saddle-node.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "ParameterError",
    "DomainError",
    "RangeError",
    "DegeneracyError",
    "UnfoldingParams",
    "LoopType",
    "OutcomeKind",
    "MapOutcome",
    "SectionId",
    "Region",
    "SeparatrixFate",
    "RegimeLabel",
    "t12",
    "t34",
    "affine_global",
    "return_map",
    "fixed_points",
    "iterate_oracle",
    "OracleResult",
    "curve_homoclinic_p2",
    "curve_r1_zero",
    "classify_loop_type",
    "classify_regime",
    "slice_atlas",
    "sphere_atlas",
]

# below this magnitude mu1 is treated as exactly zero to avoid
# catastrophic cancellation in the arctan/log forms
MU1_ZERO = 1e-14


class ParameterError(ValueError):
    pass


class DomainError(ValueError):
    pass


class RangeError(ValueError):
    pass


class DegeneracyError(ValueError):
    pass


@dataclass(frozen=True)
class UnfoldingParams:
    """Full normal-form parameter set.

    ``rho`` is the non-central eigenvalue of the saddle-node,
    ``lambda_s``/``lambda_u`` the saddle eigenvalues, ``delta``/``eps``
    the box half-widths and ``a1``/``a2`` the global-map slopes.
    """

    mu1: float = 0.0
    mu2: float = 0.0
    mu3: float = 0.0
    rho: float = -1.0
    lambda_s: float = -2.0
    lambda_u: float = 1.0
    delta: float = 0.1
    eps: float = 0.1
    a1: float = -1.0
    a2: float = -1.0

    def __post_init__(self):
        if self.delta <= 0 or self.eps <= 0:
            raise ParameterError("delta and eps must be positive")
        if not (self.lambda_s < 0 < self.lambda_u):
            raise ParameterError("need lambda_s < 0 < lambda_u")
        if abs(self.lambda_s) == abs(self.lambda_u):
            raise DegeneracyError("|lambda_s| == |lambda_u| is a resonance")
        if self.rho == 0:
            raise ParameterError("rho must be nonzero")
        if self.mu1 > MU1_ZERO and math.sqrt(self.mu1) >= self.delta:
            raise ParameterError("sqrt(mu1) must be below delta")

    def with_mu(self, mu1: float, mu2: float, mu3: float) -> "UnfoldingParams":
        return replace(self, mu1=mu1, mu2=mu2, mu3=mu3)

    @property
    def saddle_ratio(self) -> float:
        """-lambda_s/lambda_u, the contraction exponent of the saddle map."""
        return -self.lambda_s / self.lambda_u

    def to_json(self) -> str:
        return json.dumps({k: getattr(self, k) for k in (
            "mu1", "mu2", "mu3", "rho", "lambda_s", "lambda_u",
            "delta", "eps", "a1", "a2")}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "UnfoldingParams":
        return cls(**json.loads(text))


class LoopType(enum.Enum):
    TYPE_I = "TypeI"
    TYPE_II = "TypeII"
    TYPE_III = "TypeIII"
    TYPE_IV = "TypeIV"


def classify_loop_type(rho: float, lambda_s: float, lambda_u: float) -> LoopType:
    """Sign-quadrant classification of the loop by (rho, |ls|-|lu|)."""
    if not (lambda_s < 0 < lambda_u):
        raise DegeneracyError("need lambda_s < 0 < lambda_u")
    if rho == 0:
        raise DegeneracyError("rho = 0 is degenerate")
    if abs(lambda_s) == abs(lambda_u):
        raise DegeneracyError("|lambda_s| == |lambda_u| is degenerate")
    if rho < 0:
        return LoopType.TYPE_I if abs(lambda_s) > abs(lambda_u) else LoopType.TYPE_II
    return LoopType.TYPE_III if abs(lambda_s) > abs(lambda_u) else LoopType.TYPE_IV


class OutcomeKind(enum.Enum):
    VALUE = "value"
    ESCAPED_LEFT = "escaped_left"
    ESCAPED_RIGHT = "escaped_right"
    ASYMPTOTIC = "asymptotic_to_equilibrium"


@dataclass(frozen=True)
class MapOutcome:
    kind: OutcomeKind
    value: float | None = None
    transit_time: float | None = None

    @property
    def escaped(self) -> bool:
        return self.kind in (OutcomeKind.ESCAPED_LEFT, OutcomeKind.ESCAPED_RIGHT)


def _value(v: float, tau: float) -> MapOutcome:
    return MapOutcome(OutcomeKind.VALUE, value=v, transit_time=tau)


def t12(x: float, p: UnfoldingParams) -> MapOutcome:
    """Local map through the saddle-node box, Sigma1 -> Sigma2.

    Flow x' = x^2 - mu1, y' = rho*y, entering at (x, delta) and leaving at
    (delta, value). Case split on sign(mu1); the boundary x = delta maps
    to itself with zero transit time.
    """
    d = p.delta
    if not (-d < x <= d):
        raise DomainError(f"Sigma1 coordinate {x} outside (-{d}, {d}]")
    mu1 = 0.0 if abs(p.mu1) < MU1_ZERO else p.mu1
    if mu1 < 0:
        r = math.sqrt(-mu1)
        tau = (math.atan(d / r) - math.atan(x / r)) / r
        return _value(d * math.exp(p.rho * tau), tau)
    if mu1 == 0.0:
        if x == 0.0:
            return MapOutcome(OutcomeKind.ASYMPTOTIC, transit_time=math.inf)
        if x < 0.0:
            return MapOutcome(OutcomeKind.ESCAPED_LEFT)
        tau = 1.0 / x - 1.0 / d
        return _value(d * math.exp(p.rho * tau), tau)
    s = math.sqrt(mu1)
    if x == s:
        return MapOutcome(OutcomeKind.ASYMPTOTIC, transit_time=math.inf)
    if x < s:
        return MapOutcome(OutcomeKind.ESCAPED_LEFT)
    tau = (math.log(abs((d - s) / (d + s)))
           - math.log(abs((x - s) / (x + s)))) / (2.0 * s)
    return _value(d * math.exp(p.rho * tau), tau)


def t34(x: float, p: UnfoldingParams) -> MapOutcome:
    """Local map through the saddle box, Sigma3 -> Sigma4.

    Flow x' = lambda_u*x, y' = lambda_s*y, entering at (x, -eps). Staying
    requires -eps <= x < 0; x = 0 limits onto the saddle; x > 0 leaves
    the loop neighborhood on the far side of the saddle.
    """
    e = p.eps
    if not (-e <= x < e):
        raise DomainError(f"Sigma3 coordinate {x} outside [-{e}, {e})")
    if x == 0.0:
        return MapOutcome(OutcomeKind.ASYMPTOTIC, transit_time=math.inf)
    if x > 0.0:
        return MapOutcome(OutcomeKind.ESCAPED_RIGHT)
    tau = math.log(e / abs(x)) / p.lambda_u
    return _value(-e * (abs(x) / e) ** p.saddle_ratio, tau)


def affine_global(x: float, slope: float, split: float) -> float:
    """First-order global transition leg: slope*x + split."""
    return slope * x + split


class SectionId(enum.Enum):
    SIGMA1 = "Sigma1"
    SIGMA3 = "Sigma3"


def _sigma1_floor(p: UnfoldingParams) -> float | None:
    """Leftmost Sigma1 coordinate that still transits U1 (None if all do)."""
    mu1 = 0.0 if abs(p.mu1) < MU1_ZERO else p.mu1
    if mu1 < 0:
        return None
    return math.sqrt(mu1) if mu1 > 0 else 0.0


def return_map(section: SectionId, x: float, p: UnfoldingParams) -> MapOutcome:
    """One full turn of the return map R1 (to Sigma1) or R3 (to Sigma3).

    Escapes propagate immediately. An orbit hitting an equilibrium
    insertion point exactly is continued along the equilibrium's outgoing
    separatrix (coordinate 0 on the exit section); the final outcome is
    then asymptotic, its ``value`` recording where the continuation lands
    back on the start section, or an escape when the continuation leaves.
    Transit time sums the local legs; the affine legs are instantaneous.
    """
    if section is SectionId.SIGMA1:
        stages = ("t12", "g23", "t34", "g41")
    elif section is SectionId.SIGMA3:
        stages = ("t34", "g41", "t12", "g23")
    else:
        raise ParameterError(f"unknown section {section!r}")

    v = x
    total = 0.0
    through_eq = False
    first = True
    for stage in stages:
        if stage == "t12":
            if not first and not (-p.delta < v <= p.delta):
                # landed off the entry section: the orbit leaves U
                return MapOutcome(OutcomeKind.ESCAPED_LEFT if v <= -p.delta
                                  else OutcomeKind.ESCAPED_RIGHT)
            out = t12(v, p)
        elif stage == "t34":
            if not first and not (-p.eps <= v < p.eps):
                return MapOutcome(OutcomeKind.ESCAPED_LEFT if v < -p.eps
                                  else OutcomeKind.ESCAPED_RIGHT)
            out = t34(v, p)
        elif stage == "g23":
            v = affine_global(v, p.a1, p.mu2)
            first = False
            continue
        else:
            v = affine_global(v, p.a2, p.mu3)
            first = False
            continue
        first = False
        if out.kind is OutcomeKind.VALUE:
            v = out.value
            total += out.transit_time
        elif out.kind is OutcomeKind.ASYMPTOTIC:
            through_eq = True
            total = math.inf
            v = 0.0  # outgoing separatrix coordinate on the exit section
        else:
            return out

    # the final affine leg lands back on the start section; landing off
    # the section means the orbit left the loop neighborhood
    if section is SectionId.SIGMA3:
        if v < -p.eps:
            return MapOutcome(OutcomeKind.ESCAPED_LEFT)
        if v >= p.eps:
            return MapOutcome(OutcomeKind.ESCAPED_RIGHT)
    else:
        if v <= -p.delta:
            return MapOutcome(OutcomeKind.ESCAPED_LEFT)
        if v > p.delta:
            return MapOutcome(OutcomeKind.ESCAPED_RIGHT)
    if through_eq:
        if section is SectionId.SIGMA3:
            if v > 0.0:
                return MapOutcome(OutcomeKind.ESCAPED_RIGHT)
        else:
            floor = _sigma1_floor(p)
            if floor is not None and v < floor:
                return MapOutcome(OutcomeKind.ESCAPED_LEFT)
        return MapOutcome(OutcomeKind.ASYMPTOTIC, value=v, transit_time=math.inf)
    return _value(v, total)


def _staying_interval(section: SectionId, p: UnfoldingParams) -> tuple[float, float]:
    if section is SectionId.SIGMA3:
        return (-p.eps, 0.0)
    floor = _sigma1_floor(p)
    return (-p.delta if floor is None else floor, p.delta)


def fixed_points(section: SectionId, p: UnfoldingParams,
                 grid_n: int = 10_000) -> list[tuple[float, float]]:
    """All solutions of return_map(x) = x on the staying interval.

    Sign-bracketing on a uniform grid, refined by bisection to residual
    below 1e-12; returns (x*, central-difference derivative) pairs.
    """
    lo, hi = _staying_interval(section, p)
    xs = np.linspace(lo, hi, grid_n + 2)[1:-1]

    def g(xv: float) -> float | None:
        out = return_map(section, xv, p)
        return out.value - xv if out.kind is OutcomeKind.VALUE else None

    roots: list[float] = []
    prev_x = prev_g = None
    for xv in xs:
        gv = g(float(xv))
        if gv is None:
            prev_x = prev_g = None
            continue
        if gv == 0.0:
            roots.append(float(xv))
        elif prev_g is not None and prev_g * gv < 0:
            a, b, ga = prev_x, float(xv), prev_g
            for _ in range(200):
                m = 0.5 * (a + b)
                gm = g(m)
                if gm is None or gm == 0.0 or abs(b - a) < 1e-16 * (1 + abs(m)):
                    break
                if ga * gm < 0:
                    b = m
                else:
                    a, ga = m, gm
            m = 0.5 * (a + b)
            gm = g(m)
            if gm is not None and abs(gm) < 1e-12:
                roots.append(m)
        prev_x, prev_g = float(xv), gv

    out: list[tuple[float, float]] = []
    for r in roots:
        if any(abs(r - r0) < 1e-10 * (1 + abs(r)) for r0, _ in out):
            continue
        h = 1e-7 * (1 + abs(r))
        h = min(h, 0.25 * (hi - r) if hi > r else h, 0.25 * (r - lo) if r > lo else h)
        lo_o = return_map(section, r - h, p)
        hi_o = return_map(section, r + h, p)
        if lo_o.kind is OutcomeKind.VALUE and hi_o.kind is OutcomeKind.VALUE:
            deriv = (hi_o.value - lo_o.value) / (2 * h)
        else:
            deriv = math.nan
        out.append((r, deriv))
    return out


@dataclass(frozen=True)
class OracleResult:
    kind: str  # converged | escaped | asymptotic_to_equilibrium | undecided
    x_star: float | None
    iterations: int


def iterate_oracle(section: SectionId, x0: float, p: UnfoldingParams,
                   max_iter: int = 500, conv_tol: float = 1e-12) -> OracleResult:
    """Brute-force iteration of the return map from x0."""
    x = x0
    for k in range(1, max_iter + 1):
        out = return_map(section, x, p)
        if out.escaped:
            return OracleResult("escaped", None, k)
        if out.kind is OutcomeKind.ASYMPTOTIC:
            return OracleResult("asymptotic_to_equilibrium", None, k)
        if abs(out.value - x) < conv_tol:
            return OracleResult("converged", out.value, k)
        x = out.value
    return OracleResult("undecided", x, max_iter)


def curve_homoclinic_p2(mu3: float, p: UnfoldingParams) -> float:
    """mu2 on the homoclinic-to-saddle curve: R3(0) = 0.

    Valid for mu3 > 0 at mu1 = 0 and mu3 > sqrt(mu1) for mu1 > 0;
    unrestricted (within Sigma1) for mu1 < 0.
    """
    mu1 = 0.0 if abs(p.mu1) < MU1_ZERO else p.mu1
    if mu1 >= 0:
        floor = math.sqrt(mu1)
        if mu3 <= floor:
            raise RangeError(f"mu3 must exceed {floor} for mu1 = {p.mu1}")
    if not (-p.delta < mu3 <= p.delta):
        raise RangeError(f"mu3 outside the Sigma1 section (|mu3| <= {p.delta})")
    return -p.a1 * t12(mu3, p).value


def curve_r1_zero(mu2: float, p: UnfoldingParams) -> float:
    """mu3 making R1 fix the saddle-node insertion point.

    mu1 = 0: the non-central SNIC curve; mu1 > 0: the homoclinic loop
    through the weak saddle born at the fold. Requires mu2 < 0 so the
    forward leg survives the saddle passage.
    """
    if mu2 >= 0:
        raise RangeError("mu2 must be negative")
    if mu2 < -p.eps:
        raise RangeError(f"mu2 outside the Sigma3 section (|mu2| <= {p.eps})")
    return -p.a2 * t34(mu2, p).value + math.sqrt(max(p.mu1, 0.0))


class Region(enum.Enum):
    NC_SNICEROCLINIC = "NonCentralSNICeroclinic"
    HETEROCLINIC_LOOP = "HeteroclinicLoop"
    HET_GAMMA1_ONLY = "HeteroclinicGamma1Only"
    NC_HET_GAMMA2_ONLY = "NonCentralHetGamma2Only"
    CENTRAL_HET_GAMMA2_WITH_PO = "CentralHetGamma2WithPO"
    CENTRAL_HETEROCLINIC_LOOP = "CentralHeteroclinicLoop"
    HOMOCLINIC_P2 = "HomoclinicP2"
    HOMOCLINIC_P1 = "HomoclinicP1"
    NC_SNIC = "NonCentralSNIC"
    CENTRAL_SNIC = "CentralSNIC"
    PO_BOTH = "PeriodicOrbitBothSeparatrices"
    PO_GAMMA2_ONLY = "PeriodicOrbitGamma2Only"
    PO_GAMMA1_ONLY = "PeriodicOrbitGamma1Only"
    NO_INVARIANT_SET = "NoInvariantSet"


class SeparatrixFate(enum.Enum):
    TENDS_TO_PO = "tends_to_PO"
    LEAVES_U = "leaves_U"
    FORMS_CONNECTION = "forms_connection"
    ABSENT = "absent"


@dataclass(frozen=True)
class RegimeLabel:
    region: Region
    separatrix_fate_g1: SeparatrixFate
    separatrix_fate_g2: SeparatrixFate

    @property
    def has_periodic_orbit(self) -> bool:
        return SeparatrixFate.TENDS_TO_PO in (self.separatrix_fate_g1,
                                               self.separatrix_fate_g2)


_PO = SeparatrixFate.TENDS_TO_PO
_LEAVES = SeparatrixFate.LEAVES_U
_CONN = SeparatrixFate.FORMS_CONNECTION
_ABSENT = SeparatrixFate.ABSENT


def _require_type_i(p: UnfoldingParams):
    if classify_loop_type(p.rho, p.lambda_s, p.lambda_u) is not LoopType.TYPE_I:
        raise ParameterError(
            "regime classification covers the stable case (rho < 0, "
            "|lambda_s| > |lambda_u|); analyze the time-reversed field "
            "for the unstable case")


def classify_regime(mu: tuple[float, float, float], p: UnfoldingParams,
                    tol: float = 1e-9) -> RegimeLabel:
    """Assign the qualitative regime at an unfolding-parameter point.

    ``tol`` sets membership bands for the measure-zero curves and axes.
    """
    if tol <= 0:
        raise ParameterError("tol must be positive")
    _require_type_i(p)
    mu1, mu2, mu3 = (float(m) for m in mu)
    p = p.with_mu(mu1, mu2, mu3)
    if abs(mu2) >= p.eps or abs(mu3) >= p.delta:
        raise ParameterError("splitting parameters must lie inside the "
                             "section boxes (|mu2| < eps, |mu3| < delta)")

    if abs(mu1) < MU1_ZERO:
        return _classify_mu1_zero(mu2, mu3, p, tol)
    if mu1 < 0:
        return _classify_mu1_negative(mu2, mu3, p, tol)
    return _classify_mu1_positive(mu2, mu3, p, tol)


def _classify_mu1_zero(mu2, mu3, p, tol) -> RegimeLabel:
    on_mu2_axis = abs(mu2) < tol
    on_mu3_axis = abs(mu3) < tol
    if on_mu2_axis and on_mu3_axis:
        return RegimeLabel(Region.NC_SNICEROCLINIC, _CONN, _CONN)
    if on_mu2_axis:
        if mu3 > 0:
            return RegimeLabel(Region.HET_GAMMA1_ONLY, _CONN, _PO)
        return RegimeLabel(Region.CENTRAL_HETEROCLINIC_LOOP, _CONN, _CONN)
    if on_mu3_axis:
        g1 = _PO if mu2 < 0 else _LEAVES
        return RegimeLabel(Region.NC_HET_GAMMA2_ONLY, g1, _CONN)
    if mu3 > 0:
        hc = -p.a1 * t12(mu3, p).value
        if abs(mu2 - hc) < tol:
            return RegimeLabel(Region.HOMOCLINIC_P2, _LEAVES, _CONN)
        if mu2 < 0:
            return RegimeLabel(Region.PO_BOTH, _PO, _PO)
        if mu2 < hc:
            return RegimeLabel(Region.PO_GAMMA2_ONLY, _LEAVES, _PO)
        return RegimeLabel(Region.NO_INVARIANT_SET, _LEAVES, _LEAVES)
    # mu3 < 0: the Gamma2 separatrix always re-enters centrally
    if mu2 > 0:
        return RegimeLabel(Region.NO_INVARIANT_SET, _LEAVES, _CONN)
    snic = -p.a2 * t34(mu2, p).value
    if abs(mu3 - snic) < tol:
        return RegimeLabel(Region.NC_SNIC, _CONN, _CONN)
    if mu3 > snic:
        return RegimeLabel(Region.CENTRAL_HET_GAMMA2_WITH_PO, _PO, _CONN)
    return RegimeLabel(Region.CENTRAL_SNIC, _CONN, _CONN)


def _classify_mu1_negative(mu2, mu3, p, tol) -> RegimeLabel:
    hc = -p.a1 * t12(mu3, p).value
    if abs(mu2 - hc) < tol:
        return RegimeLabel(Region.HOMOCLINIC_P2, _ABSENT, _CONN)
    if mu2 < hc:
        return RegimeLabel(Region.PO_GAMMA2_ONLY, _ABSENT, _PO)
    return RegimeLabel(Region.NO_INVARIANT_SET, _ABSENT, _LEAVES)


def _classify_mu1_positive(mu2, mu3, p, tol) -> RegimeLabel:
    s = math.sqrt(p.mu1)
    on_mu2_axis = abs(mu2) < tol
    on_het_line = abs(mu3 - s) < tol
    if on_mu2_axis and on_het_line:
        return RegimeLabel(Region.HETEROCLINIC_LOOP, _CONN, _CONN)
    if on_het_line:
        g1 = _PO if mu2 < 0 else _LEAVES
        return RegimeLabel(Region.NC_HET_GAMMA2_ONLY, g1, _CONN)
    if on_mu2_axis:
        g2 = _PO if mu3 > s else _LEAVES
        return RegimeLabel(Region.HET_GAMMA1_ONLY, _CONN, g2)
    if mu3 > s:
        hc = -p.a1 * t12(mu3, p).value
        if abs(mu2 - hc) < tol:
            return RegimeLabel(Region.HOMOCLINIC_P2, _LEAVES, _CONN)
        if mu2 < 0:
            return RegimeLabel(Region.PO_BOTH, _PO, _PO)
        if mu2 < hc:
            return RegimeLabel(Region.PO_GAMMA2_ONLY, _LEAVES, _PO)
        return RegimeLabel(Region.NO_INVARIANT_SET, _LEAVES, _LEAVES)
    # mu3 < sqrt(mu1): Gamma2 falls into the node born at the fold
    if mu2 > 0:
        return RegimeLabel(Region.NO_INVARIANT_SET, _LEAVES, _LEAVES)
    p1_curve = -p.a2 * t34(mu2, p).value + s
    if abs(mu3 - p1_curve) < tol:
        return RegimeLabel(Region.HOMOCLINIC_P1, _CONN, _LEAVES)
    if mu3 > p1_curve:
        return RegimeLabel(Region.PO_GAMMA1_ONLY, _PO, _LEAVES)
    return RegimeLabel(Region.NO_INVARIANT_SET, _LEAVES, _LEAVES)


def slice_atlas(mu1: float, mu2_range: tuple[float, float],
                mu3_range: tuple[float, float], n: int,
                p: UnfoldingParams, tol: float | None = None):
    """Classify an n-by-n grid at fixed mu1.

    Returns (mu2 nodes, mu3 nodes, labels) with labels[i][j] the regime at
    (mu2[i], mu3[j]), row-major and deterministic. ``tol`` defaults to half
    the larger grid cell so the analytic curves appear as one-node bands.
    """
    if n < 2:
        raise ParameterError("grid needs n >= 2")
    mu2s = np.linspace(mu2_range[0], mu2_range[1], n)
    mu3s = np.linspace(mu3_range[0], mu3_range[1], n)
    if tol is None:
        cell2 = (mu2_range[1] - mu2_range[0]) / (n - 1)
        cell3 = (mu3_range[1] - mu3_range[0]) / (n - 1)
        tol = 0.5 * max(abs(cell2), abs(cell3))
    labels = np.empty((n, n), dtype=object)
    for i, m2 in enumerate(mu2s):
        for j, m3 in enumerate(mu3s):
            labels[i, j] = classify_regime((mu1, float(m2), float(m3)), p, tol=tol)
    return mu2s, mu3s, labels


def fibonacci_sphere(n: int) -> np.ndarray:
    """n points quasi-uniform on the unit sphere (golden-angle spiral)."""
    i = np.arange(n, dtype=float)
    z = 1.0 - (2.0 * i + 1.0) / n
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    theta = math.pi * (1.0 + math.sqrt(5.0)) * i
    return np.column_stack([z, r * np.cos(theta), r * np.sin(theta)])


def stereographic(mu: np.ndarray, radius: float) -> tuple[float, float]:
    """Project from the +mu1 pole onto the mu1 = 0 plane.

    The mu1 = 0 equator maps to the circle of radius ``radius``; mu1 < 0
    lands inside it, mu1 > 0 outside.
    """
    scale = radius / (radius - mu[0])
    return (float(mu[1] * scale), float(mu[2] * scale))


def sphere_atlas(radius: float, n_samples: int, p: UnfoldingParams,
                 tol: float = 1e-9):
    """Classify Fibonacci-sphere samples of ||mu|| = radius.

    Each entry is (mu triple, stereographic (X, Y), RegimeLabel). The
    radius must stay below delta^2 so sqrt(mu1) < delta everywhere.
    """
    if n_samples < 1:
        raise ParameterError("need at least one sample")
    if not (0 < radius < p.delta ** 2):
        raise ParameterError(f"radius must lie in (0, delta^2 = {p.delta**2:g})")
    out = []
    for unit in fibonacci_sphere(n_samples):
        mu = radius * unit
        label = classify_regime((mu[0], mu[1], mu[2]), p, tol=tol)
        out.append((tuple(mu), stereographic(mu, radius), label))
    return out
