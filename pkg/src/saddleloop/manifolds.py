"""One-dimensional invariant manifolds, separatrix splitting, and
connection detection by parameter bisection.

Sections for splitting measurements default to short segments placed
near the target equilibrium, perpendicular to the approach
eigendirection; this keeps both shooting legs short where the dynamics
are strongly contracting in backward time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .flow import (Equilibrium, FlowError, NoCrossingError, PlanarField,
                   Section, SectionCrossing, Trajectory, find_equilibrium,
                   integrate, integrate_to_section)

__all__ = [
    "ManifoldError",
    "Separatrix",
    "SplittingMeasurement",
    "ConnectionSpec",
    "compute_separatrix",
    "splitting",
    "find_connection",
    "fold_point",
    "polynomial_singular_limit",
    "locate_saddle_node_loop",
    "LoopLocation",
]

FORWARD_FLAVORS = ("unstable", "center_unstable")
BACKWARD_FLAVORS = ("stable", "center_stable")


class ManifoldError(RuntimeError):
    pass


@dataclass(frozen=True)
class Separatrix:
    origin: Equilibrium
    flavor: str
    branch: str  # plus | minus
    offset: float
    seed: np.ndarray
    trajectory: Trajectory


def _flavor_direction(eq: Equilibrium, flavor: str) -> np.ndarray:
    if flavor in ("unstable", "stable"):
        return eq.real_eigenvector(flavor)
    if flavor in ("center_unstable", "center_stable"):
        return eq.real_eigenvector("center")
    raise ValueError(f"unknown flavor {flavor!r}")


def compute_separatrix(field: PlanarField, eq: Equilibrium, flavor: str,
                       branch: str = "plus", offset: float = 1e-5,
                       horizon: float = 100.0, rtol: float = 1e-10,
                       atol: float = 1e-12, max_step: float = np.inf) -> Separatrix:
    """Shoot a 1-D invariant manifold branch from ``eq``.

    Stable flavors integrate in reversed time. The seed sits at
    ``offset`` along the (sign-normalized) eigendirection; offsets are
    restricted to [1e-8, 1e-4] where seeding error stays higher order.
    """
    if not (1e-8 <= offset <= 1e-4):
        raise ValueError("offset must lie in [1e-8, 1e-4]")
    if branch not in ("plus", "minus"):
        raise ValueError("branch must be 'plus' or 'minus'")
    v = _flavor_direction(eq, flavor)
    seed = eq.position + (offset if branch == "plus" else -offset) * v
    span = (0.0, horizon) if flavor in FORWARD_FLAVORS else (0.0, -horizon)
    traj = integrate(field, seed, span, rtol=rtol, atol=atol, max_step=max_step)
    return Separatrix(origin=eq, flavor=flavor, branch=branch, offset=offset,
                      seed=seed, trajectory=traj)


def _shoot_to_section(field: PlanarField, eq: Equilibrium, flavor: str,
                      branch: str, offset: float, section: Section,
                      horizon: float, rtol: float, atol: float,
                      max_step: float, direction: int) -> tuple[SectionCrossing, str]:
    v = _flavor_direction(eq, flavor)
    sign = 1.0 if flavor in FORWARD_FLAVORS else -1.0
    branches = (branch,) if branch in ("plus", "minus") else ("plus", "minus")
    last_err = None
    for br in branches:
        seed = eq.position + (offset if br == "plus" else -offset) * v
        try:
            hit = integrate_to_section(field, seed, section, sign * horizon,
                                       rtol=rtol, atol=atol,
                                       direction=direction, max_step=max_step)
            return hit, br
        except (NoCrossingError, FlowError) as err:
            last_err = err
    raise ManifoldError(
        f"{flavor} manifold of equilibrium at {eq.position} missed the "
        f"section at {section.point}: {last_err}")


@dataclass(frozen=True)
class SplittingMeasurement:
    section: Section
    hit_unstable: SectionCrossing
    hit_stable: SectionCrossing
    gap: float


def _auto_section(field: PlanarField, to_eq: Equilibrium, to_flavor: str,
                  toward: np.ndarray, standoff: float) -> Section:
    """Section near ``to_eq``, perpendicular to its approach direction.

    Placed at ``standoff`` along the approach eigenvector, on the side
    facing ``toward`` (seen from the equilibrium).
    """
    v = _flavor_direction(to_eq, to_flavor)
    rel = toward - to_eq.position
    side = 1.0 if float(rel @ v) >= 0 else -1.0
    anchor = to_eq.position + side * standoff * v
    return Section(point=(float(anchor[0]), float(anchor[1])),
                   normal=(float(side * v[0]), float(side * v[1])),
                   half_width=max(4.0 * standoff, 1e-3))


def splitting(field: PlanarField, from_eq: Equilibrium, to_eq: Equilibrium,
              section: Section | None = None, *, from_flavor: str = "unstable",
              to_flavor: str = "stable", from_branch: str = "auto",
              to_branch: str = "auto", offset: float = 1e-5,
              horizon: float = 1e4, rtol: float = 1e-10, atol: float = 1e-12,
              max_step: float = np.inf, standoff: float = 0.5,
              direction: int = 0) -> SplittingMeasurement:
    """Signed gap between an outgoing and an incoming manifold on a section.

    gap = coordinate(unstable hit) - coordinate(stable hit); zero within
    tolerance exactly when the connection closes.
    """
    if section is None:
        section = _auto_section(field, to_eq, to_flavor, from_eq.position, standoff)
    hit_u, _ = _shoot_to_section(field, from_eq, from_flavor, from_branch,
                                 offset, section, horizon, rtol, atol,
                                 max_step, direction)
    hit_s, _ = _shoot_to_section(field, to_eq, to_flavor, to_branch,
                                 offset, section, horizon, rtol, atol,
                                 max_step, direction)
    gap = section.coordinate(hit_u.state) - section.coordinate(hit_s.state)
    return SplittingMeasurement(section=section, hit_unstable=hit_u,
                                hit_stable=hit_s, gap=float(gap))


@dataclass(frozen=True)
class ConnectionSpec:
    """How to measure the splitting gap at one parameter value."""

    from_guess: tuple[float, float]
    to_guess: tuple[float, float]
    from_flavor: str = "unstable"
    to_flavor: str = "stable"
    from_branch: str = "auto"
    to_branch: str = "auto"
    section: Section | None = None
    offset: float = 1e-5
    horizon: float = 1e4
    rtol: float = 1e-10
    atol: float = 1e-12
    max_step: float = np.inf
    standoff: float = 0.5
    direction: int = 0

    def gap(self, field: PlanarField) -> float:
        from_eq = find_equilibrium(field, self.from_guess)
        to_eq = find_equilibrium(field, self.to_guess)
        return splitting(field, from_eq, to_eq, self.section,
                         from_flavor=self.from_flavor, to_flavor=self.to_flavor,
                         from_branch=self.from_branch, to_branch=self.to_branch,
                         offset=self.offset, horizon=self.horizon,
                         rtol=self.rtol, atol=self.atol,
                         max_step=self.max_step, standoff=self.standoff,
                         direction=self.direction).gap


def find_connection(field: PlanarField, param_name: str,
                    bracket: tuple[float, float],
                    spec: ConnectionSpec | Callable[[PlanarField], float],
                    gap_tol: float = 1e-8, param_tol: float = 1e-12,
                    max_iter: int = 120) -> float:
    """Refine one parameter to a connection by safeguarded secant/bisection.

    ``spec`` is a ConnectionSpec or any callable mapping a field (with the
    trial parameter bound) to a signed gap. The bracket endpoints must
    give opposite gap signs.
    """
    gap_of = spec.gap if isinstance(spec, ConnectionSpec) else spec

    def g(value: float) -> float:
        return gap_of(field.with_params(**{param_name: value}))

    a, b = float(bracket[0]), float(bracket[1])
    ga, gb = g(a), g(b)
    if ga == 0.0:
        return a
    if gb == 0.0:
        return b
    if ga * gb > 0:
        raise ManifoldError(
            f"no sign change of the gap over {param_name} in [{a}, {b}] "
            f"(gaps {ga:.3e}, {gb:.3e})")
    for _ in range(max_iter):
        if abs(ga) < gap_tol:
            return a
        if abs(gb) < gap_tol:
            return b
        if abs(b - a) < param_tol:
            break
        # secant candidate, safeguarded to the inner half of the bracket
        m = a - ga * (b - a) / (gb - ga)
        width = b - a
        if not (min(a, b) + 0.1 * abs(width) < m < max(a, b) - 0.1 * abs(width)):
            m = 0.5 * (a + b)
        gm = g(m)
        if gm == 0.0:
            return m
        if ga * gm < 0:
            b, gb = m, gm
        else:
            a, ga = m, gm
    return a if abs(ga) <= abs(gb) else b


def fold_point(field: PlanarField, state_guess, param_name: str,
               param_guess: float, tol: float = 1e-12,
               max_iter: int = 80) -> tuple[np.ndarray, float]:
    """Solve {f(u; q) = 0, det Df(u; q) = 0} for (u, q) by Newton.

    Returns the saddle-node position and the parameter value at which the
    equilibrium pair collapses.
    """
    u = np.array([state_guess[0], state_guess[1], param_guess], dtype=float)

    def residual(v):
        fld = field.with_params(**{param_name: float(v[2])})
        F = fld(v[:2])
        d = float(np.linalg.det(fld.jacobian(v[:2])))
        return np.array([F[0], F[1], d])

    R = residual(u)
    for _ in range(max_iter):
        if np.linalg.norm(R) < tol:
            break
        J = np.empty((3, 3))
        for j in range(3):
            h = 1e-7 * (1.0 + abs(u[j]))
            d = np.zeros(3)
            d[j] = h
            J[:, j] = (residual(u + d) - residual(u - d)) / (2 * h)
        try:
            step = np.linalg.solve(J, R)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(J, R, rcond=None)[0]
        u = u - step
        R = residual(u)
    else:
        raise ManifoldError(f"fold solve did not converge (residual "
                            f"{np.linalg.norm(R):.3e})")
    return u[:2].copy(), float(u[2])


def polynomial_singular_limit() -> tuple[Fraction, Fraction, Fraction]:
    """Closed-form coefficients of the singular-limit loop.

    Solves g(-2) = -2, g(2) = 2, g'(-2) = 1/9 for g(x) = a x^2 + b x + c
    in exact rational arithmetic.
    """
    # 4a - 2b + c = -2 ; 4a + 2b + c = 2 ; -4a + b = 1/9
    b = (Fraction(2) - Fraction(-2)) / 4
    a = (b - Fraction(1, 9)) / 4
    c = Fraction(2) - 4 * a - 2 * b
    assert 4 * a - 2 * b + c == -2 and 4 * a + 2 * b + c == 2
    assert -4 * a + b == Fraction(1, 9)
    return a, b, c


@dataclass(frozen=True)
class LoopLocation:
    params: dict[str, float]
    saddle_node: np.ndarray
    saddle: np.ndarray
    gap_in: float   # outgoing-center leg against the saddle's stable manifold
    gap_out: float  # saddle's unstable manifold against the strong-stable leg
    fold_residual: float
    iterations: int


def locate_saddle_node_loop(field: PlanarField, free_params: tuple[str, str, str],
                            guess: dict[str, float], *, sn_guess, saddle_guess,
                            standoff: float = 0.5, offset: float = 1e-5,
                            horizon: float = 3e4, rtol: float = 1e-9,
                            atol: float = 1e-12, max_step: float = 5.0,
                            gap_tol: float = 1e-7,
                            max_iter: int = 12) -> LoopLocation:
    """Solve the three-condition system for a saddle-node/saddle loop.

    The third free parameter is slaved to the exact fold (extended Newton
    on {f = 0, det Df = 0}); the remaining two are driven by Broyden
    iteration on the two connection gaps, all conditions evaluated by
    shooting.
    """
    pa, pb, pc = free_params
    ab = np.array([float(guess[pa]), float(guess[pb])])
    pc_guess = float(guess[pc])
    sn_seed = np.asarray(sn_guess, dtype=float)
    p2_seed = np.asarray(saddle_guess, dtype=float)

    def gaps(v: np.ndarray) -> tuple[np.ndarray, float, dict]:
        fld0 = field.with_params(**{pa: float(v[0]), pb: float(v[1])})
        sn_pos, pc_val = fold_point(fld0, sn_seed, pc, pc_guess)
        fld = fld0.with_params(**{pc: pc_val})
        pq1 = find_equilibrium(fld, sn_pos, tol=1e-9)
        p2 = find_equilibrium(fld, p2_seed)
        m_in = splitting(fld, pq1, p2, from_flavor="center_unstable",
                         to_flavor="stable", offset=offset, horizon=horizon,
                         rtol=rtol, atol=atol, max_step=max_step,
                         standoff=standoff)
        m_out = splitting(fld, p2, pq1, from_flavor="unstable",
                          to_flavor="stable", offset=offset, horizon=horizon,
                          rtol=rtol, atol=atol, max_step=max_step,
                          standoff=standoff)
        det = float(np.linalg.det(fld.jacobian(pq1.position)))
        info = {"pc": pc_val, "pq1": pq1.position, "p2": p2.position,
                "fold_residual": abs(det)}
        return np.array([m_in.gap, m_out.gap]), pc_val, info

    G, pc_val, info = gaps(ab)
    J = np.empty((2, 2))
    for j in range(2):
        h = 2e-4 * (1.0 + abs(ab[j]))
        d = np.zeros(2)
        d[j] = h
        Gj, _, _ = gaps(ab + d)
        J[:, j] = (Gj - G) / h
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        if np.linalg.norm(G) < gap_tol:
            break
        step = np.linalg.solve(J, G)
        ab_new = ab - step
        G_new, pc_val, info = gaps(ab_new)
        s = ab_new - ab
        y = G_new - G
        J = J + np.outer(y - J @ s, s) / float(s @ s)
        ab, G = ab_new, G_new
    if np.linalg.norm(G) >= gap_tol:
        raise ManifoldError(f"loop solve stalled with gaps {G}")
    params = {pa: float(ab[0]), pb: float(ab[1]), pc: pc_val}
    return LoopLocation(params=params, saddle_node=info["pq1"],
                        saddle=info["p2"], gap_in=float(G[0]),
                        gap_out=float(G[1]),
                        fold_residual=info["fold_residual"],
                        iterations=n_iter)
