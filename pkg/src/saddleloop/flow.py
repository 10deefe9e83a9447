"""Planar vector-field engine: evaluation, integration, equilibria.

Fields are immutable; all operations here are pure functions of their
inputs and safe to call concurrently.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.integrate import solve_ivp

__all__ = [
    "FlowError",
    "NoCrossingError",
    "NewtonError",
    "PlanarField",
    "Section",
    "SectionCrossing",
    "Trajectory",
    "EquilibriumClass",
    "Equilibrium",
    "integrate",
    "integrate_to_section",
    "find_equilibrium",
    "find_all_equilibria",
    "numeric_jacobian",
]

BLOWUP_NORM = 1e8


class FlowError(RuntimeError):
    pass


class NoCrossingError(FlowError):
    """The trajectory never met the requested section."""


class NewtonError(FlowError):
    """Equilibrium solve failed to converge."""


@dataclass(frozen=True)
class PlanarField:
    """A planar ODE right-hand side with bound parameter values.

    ``eval_fn(state, params) -> (fx, fy)``; ``jac_fn`` optionally supplies
    an analytic Jacobian with the same signature.
    """

    name: str
    eval_fn: Callable[[np.ndarray, Mapping[str, float]], Sequence[float]]
    param_schema: tuple[tuple[str, float], ...] = ()
    params: Mapping[str, float] = field(default_factory=dict)
    jac_fn: Callable[[np.ndarray, Mapping[str, float]], np.ndarray] | None = None

    def __post_init__(self):
        merged = {k: float(v) for k, v in self.param_schema}
        for k, v in self.params.items():
            if k not in merged:
                raise KeyError(f"unknown parameter {k!r} for field {self.name!r}")
            merged[k] = float(v)
        object.__setattr__(self, "params", merged)

    def __call__(self, state, params: Mapping[str, float] | None = None) -> np.ndarray:
        p = self.params if params is None else params
        out = np.asarray(self.eval_fn(np.asarray(state, dtype=float), p), dtype=float)
        if not np.all(np.isfinite(out)):
            raise FlowError(f"field {self.name!r} returned non-finite value at {state}")
        return out

    def jacobian(self, state, params: Mapping[str, float] | None = None) -> np.ndarray:
        p = self.params if params is None else params
        if self.jac_fn is not None:
            return np.asarray(self.jac_fn(np.asarray(state, dtype=float), p), dtype=float)
        return numeric_jacobian(lambda s: self(s, p), state)

    def with_params(self, **overrides) -> "PlanarField":
        merged = dict(self.params)
        for k, v in overrides.items():
            if k not in merged:
                raise KeyError(f"unknown parameter {k!r} for field {self.name!r}")
            merged[k] = float(v)
        return replace(self, params=merged)

    def reversed(self) -> "PlanarField":
        """Time-reversed field (velocities negated)."""
        ev = self.eval_fn
        jf = self.jac_fn
        return replace(
            self,
            name=self.name + "_reversed",
            eval_fn=lambda s, p: -np.asarray(ev(s, p), dtype=float),
            jac_fn=(None if jf is None else (lambda s, p: -np.asarray(jf(s, p)))),
        )


def numeric_jacobian(fn: Callable, state, h_scale: float = None) -> np.ndarray:
    """Central-difference 2x2 Jacobian, step sqrt(eps)*(1+|x|)."""
    s = np.asarray(state, dtype=float)
    h = (h_scale or math.sqrt(np.finfo(float).eps)) * (1.0 + np.linalg.norm(s))
    J = np.empty((2, 2))
    for j in range(2):
        d = np.zeros(2)
        d[j] = h
        J[:, j] = (np.asarray(fn(s + d)) - np.asarray(fn(s - d))) / (2 * h)
    return J


@dataclass(frozen=True)
class Section:
    """Oriented line segment: anchor point, unit normal, half-width.

    The section coordinate of a state is its signed offset from ``point``
    along the tangent (normal rotated by +90 degrees).
    """

    point: tuple[float, float]
    normal: tuple[float, float]
    half_width: float

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        nn = np.linalg.norm(n)
        if nn == 0 or self.half_width <= 0:
            raise ValueError("section needs a nonzero normal and positive half-width")
        object.__setattr__(self, "normal", (n[0] / nn, n[1] / nn))

    @property
    def tangent(self) -> tuple[float, float]:
        nx, ny = self.normal
        return (-ny, nx)

    def signed_distance(self, state) -> float:
        return float((state[0] - self.point[0]) * self.normal[0]
                     + (state[1] - self.point[1]) * self.normal[1])

    def coordinate(self, state) -> float:
        tx, ty = self.tangent
        return float((state[0] - self.point[0]) * tx + (state[1] - self.point[1]) * ty)


@dataclass(frozen=True)
class SectionCrossing:
    section: Section
    state: np.ndarray
    t: float
    direction: int  # sign of forward-time normal velocity at the crossing


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray
    states: np.ndarray  # shape (n, 2)
    rtol: float
    atol: float
    termination: str  # time_end | event | blowup | step_underflow
    sol: object = None  # scipy dense-output interpolant

    def __len__(self):
        return len(self.t)

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


def _solve(field: PlanarField, x0, t_span, rtol, atol, events=None, max_step=np.inf):
    def rhs(t, s):
        return field(s)

    def blowup(t, s):
        return float(np.hypot(s[0], s[1]) - BLOWUP_NORM)

    blowup.terminal = True
    evs = [blowup] + (list(events) if events else [])
    return solve_ivp(
        rhs,
        t_span,
        np.asarray(x0, dtype=float),
        method="RK45",
        rtol=rtol,
        atol=atol,
        dense_output=True,
        events=evs,
        max_step=max_step,
    )


def integrate(field: PlanarField, x0, t_span, rtol: float = 1e-9,
              atol: float = 1e-12, max_step: float = np.inf) -> Trajectory:
    """Adaptive RK45 trajectory; negative span integrates in reversed time.

    Blowup is declared when the state norm exceeds 1e8.
    """
    t0, t1 = t_span
    if t1 == t0:
        raise ValueError("t_span must have nonzero length")
    res = _solve(field, x0, (t0, t1), rtol, atol, max_step=max_step)
    if res.status == 1:
        termination = "blowup"
    elif res.status == 0:
        termination = "time_end"
    else:
        termination = "step_underflow"
    return Trajectory(t=res.t, states=res.y.T, rtol=rtol, atol=atol,
                      termination=termination, sol=res.sol)


def integrate_to_section(field: PlanarField, x0, section: Section,
                         max_time: float, rtol: float = 1e-10,
                         atol: float = 1e-12, direction: int = 0,
                         max_step: float = np.inf) -> SectionCrossing:
    """First crossing of ``section`` with matching forward-time direction.

    ``direction`` filters on the sign of the normal velocity (0 = either).
    A crossing at t = 0 (seed already on the section) is skipped. Negative
    ``max_time`` integrates in reversed time; ``direction`` still refers to
    the forward-time normal velocity.
    """
    if max_time == 0:
        raise ValueError("max_time must be nonzero")
    time_sign = 1.0 if max_time > 0 else -1.0

    def hit(t, s):
        return section.signed_distance(s)

    # scipy's event direction is w.r.t. integration progress; map the
    # requested forward-time direction accordingly.
    hit.direction = direction * time_sign

    res = _solve(field, x0, (0.0, max_time), rtol, atol, events=[hit],
                 max_step=max_step)
    t_hits = res.t_events[1]
    scale = max(1.0, abs(max_time))
    for te in t_hits:
        if abs(te) <= 1e-12 * scale:
            continue
        state = res.sol(te)
        if abs(section.coordinate(state)) > section.half_width:
            continue
        # polish the crossing time on the dense output
        te = _polish_crossing(res.sol, section, te, scale)
        state = res.sol(te)
        vel = field(state)
        d = math.copysign(1.0, vel[0] * section.normal[0] + vel[1] * section.normal[1])
        return SectionCrossing(section=section, state=np.asarray(state),
                               t=float(te), direction=int(d))
    raise NoCrossingError(
        f"no matching crossing of section at {section.point} within {max_time}")


def _polish_crossing(sol, section: Section, te: float, scale: float) -> float:
    f = lambda t: section.signed_distance(sol(t))
    dt = 1e-7 * scale
    a, b = te - dt, te + dt
    fa, fb = f(a), f(b)
    if fa * fb > 0:
        return te  # already at the root to event-locator accuracy
    for _ in range(80):
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0.0:
            return m
        if fa * fm <= 0:
            b, fb = m, fm
        else:
            a, fa = m, fm
        if abs(b - a) < 1e-16 * scale:
            break
    return 0.5 * (a + b)


class EquilibriumClass(enum.Enum):
    STABLE_NODE = "StableNode"
    UNSTABLE_NODE = "UnstableNode"
    SADDLE = "Saddle"
    STABLE_FOCUS = "StableFocus"
    UNSTABLE_FOCUS = "UnstableFocus"
    SADDLE_NODE_CANDIDATE = "SaddleNodeCandidate"
    DEGENERATE = "Degenerate"


@dataclass(frozen=True)
class Equilibrium:
    position: np.ndarray
    jacobian: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns; real parts for complex pairs
    eq_class: EquilibriumClass
    residual: float

    def real_eigenvector(self, which: str) -> np.ndarray:
        """Unit eigenvector for 'unstable' | 'stable' | 'center' direction.

        'center' selects the smallest-magnitude eigenvalue. The returned
        vector has a deterministic sign (first nonzero component positive).
        """
        ev = self.eigenvalues
        if np.iscomplexobj(ev) and abs(ev.imag).max() > 1e-9 * (1 + abs(ev).max()):
            raise ValueError("complex eigenvalues have no real eigendirection")
        re = ev.real
        if which == "unstable":
            i = int(np.argmax(re))
            if re[i] <= 0:
                raise ValueError("no unstable eigendirection")
        elif which == "stable":
            i = int(np.argmin(re))
            if re[i] >= 0:
                raise ValueError("no stable eigendirection")
        elif which == "center":
            i = int(np.argmin(np.abs(re)))
        else:
            raise ValueError(f"unknown direction {which!r}")
        v = self.eigenvectors[:, i].real
        v = v / np.linalg.norm(v)
        nz = np.nonzero(np.abs(v) > 1e-12)[0][0]
        if v[nz] < 0:
            v = -v
        return v


def _classify(J: np.ndarray, eigenvalues: np.ndarray,
              tol_zero: float) -> EquilibriumClass:
    scale = max(np.abs(J).max(), 1e-300)
    ev = eigenvalues
    near_zero = np.abs(ev) / scale < tol_zero
    if near_zero.all():
        return EquilibriumClass.DEGENERATE
    if np.iscomplexobj(ev) and abs(ev.imag).max() / scale > tol_zero:
        re = ev.real
        if abs(re).max() / scale < tol_zero:
            return EquilibriumClass.DEGENERATE
        return (EquilibriumClass.STABLE_FOCUS if re[0] < 0
                else EquilibriumClass.UNSTABLE_FOCUS)
    re = np.sort(ev.real)
    if near_zero.any():
        return EquilibriumClass.SADDLE_NODE_CANDIDATE
    if re[0] < 0 < re[1]:
        return EquilibriumClass.SADDLE
    if re[1] < 0:
        return EquilibriumClass.STABLE_NODE
    return EquilibriumClass.UNSTABLE_NODE


def find_equilibrium(field: PlanarField, guess, tol: float = 1e-12,
                     tol_zero: float = 1e-6, max_iter: int = 50) -> Equilibrium:
    """Damped Newton solve for a fixed point; residual re-checked post hoc."""
    s = np.asarray(guess, dtype=float)
    if not np.all(np.isfinite(s)):
        raise ValueError("guess must be finite")
    fval = field(s)
    for _ in range(max_iter):
        norm0 = np.linalg.norm(fval)
        if norm0 < tol:
            break
        J = field.jacobian(s)
        try:
            step = np.linalg.solve(J, fval)
        except np.linalg.LinAlgError:
            step = np.linalg.pinv(J) @ fval
        lam = 1.0
        while lam > 1e-4:
            s_new = s - lam * step
            try:
                f_new = field(s_new)
            except FlowError:
                lam *= 0.5
                continue
            if np.linalg.norm(f_new) < norm0 or lam <= 2e-4:
                break
            lam *= 0.5
        s, fval = s_new, f_new
    else:
        raise NewtonError(f"Newton did not converge from {guess} "
                          f"(residual {np.linalg.norm(fval):.3e})")
    residual = float(np.linalg.norm(field(s)))
    if residual >= tol:
        raise NewtonError(f"Newton stalled at residual {residual:.3e}")
    J = field.jacobian(s)
    ev, V = np.linalg.eig(J)
    if abs(ev.imag).max() <= 1e-12 * (1 + abs(ev).max()):
        order = np.argsort(ev.real)
        ev, V = ev[order].real, V[:, order]
    return Equilibrium(position=s, jacobian=J, eigenvalues=ev, eigenvectors=V,
                       eq_class=_classify(J, ev, tol_zero), residual=residual)


def find_all_equilibria(field: PlanarField, box, grid_n: int = 15,
                        tol: float = 1e-12, tol_zero: float = 1e-6,
                        dedup: float = 1e-8) -> list[Equilibrium]:
    """Newton from a grid of seeds over ``box`` = (x_lo, x_hi, y_lo, y_hi).

    Roots are deduplicated by position and sorted lexicographically.
    """
    x_lo, x_hi, y_lo, y_hi = map(float, box)
    found: list[Equilibrium] = []
    for xg in np.linspace(x_lo, x_hi, grid_n):
        for yg in np.linspace(y_lo, y_hi, grid_n):
            try:
                eq = find_equilibrium(field, (xg, yg), tol=tol, tol_zero=tol_zero)
            except (NewtonError, FlowError):
                continue
            x, y = eq.position
            if not (x_lo - 1e-9 <= x <= x_hi + 1e-9
                    and y_lo - 1e-9 <= y <= y_hi + 1e-9):
                continue
            if any(np.linalg.norm(eq.position - o.position) < dedup for o in found):
                continue
            found.append(eq)
    found.sort(key=lambda e: (e.position[0], e.position[1]))
    return found
