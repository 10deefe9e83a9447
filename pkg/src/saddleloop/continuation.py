"""One-parameter continuation of equilibria with fold/Hopf test functions,
periodic-orbit tracking by simulation, and endpoint classification.

Periodic orbits are followed by integrating past a transient and
measuring section returns; only attracting cycles are tracked.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .flow import (PlanarField, Section, find_all_equilibria, integrate,
                   numeric_jacobian)

__all__ = [
    "BranchPoint",
    "BifurcationEvent",
    "BifurcationBranch",
    "CycleSample",
    "PeriodicBranch",
    "ContinuationError",
    "AmbiguousEndError",
    "continue_equilibria",
    "merged_events",
    "track_periodic",
    "classify_cycle_end",
    "branch_csv_rows",
]


class ContinuationError(RuntimeError):
    pass


class AmbiguousEndError(ContinuationError):
    pass


@dataclass(frozen=True)
class BranchPoint:
    param: float
    state: np.ndarray
    eigenvalues: np.ndarray
    test_fold: float  # det J
    test_hopf: float  # trace J
    stable: bool


@dataclass(frozen=True)
class BifurcationEvent:
    kind: str  # SN | HB
    param: float
    state: np.ndarray


@dataclass
class BifurcationBranch:
    points: list[BranchPoint] = dc_field(default_factory=list)
    events: list[BifurcationEvent] = dc_field(default_factory=list)
    termination: str = "range_end"


def _branch_point(field: PlanarField, param_name: str, q: float,
                  state: np.ndarray) -> BranchPoint:
    fld = field.with_params(**{param_name: q})
    J = fld.jacobian(state)
    ev = np.linalg.eigvals(J)
    return BranchPoint(param=float(q), state=np.asarray(state, dtype=float),
                       eigenvalues=ev, test_fold=float(np.linalg.det(J)),
                       test_hopf=float(np.trace(J)),
                       stable=bool(ev.real.max() < 0))


def _augmented(field: PlanarField, param_name: str):
    def F(u):
        fld = field.with_params(**{param_name: float(u[2])})
        return np.asarray(fld(u[:2]), dtype=float)

    def jac(u):
        fld = field.with_params(**{param_name: float(u[2])})
        J2 = fld.jacobian(u[:2])
        hq = 1e-7 * (1.0 + abs(u[2]))
        fq = (F(np.array([u[0], u[1], u[2] + hq]))
              - F(np.array([u[0], u[1], u[2] - hq]))) / (2 * hq)
        return np.column_stack([J2, fq])

    return F, jac


def _tangent(J_aug: np.ndarray, previous: np.ndarray | None) -> np.ndarray:
    _, _, vt = np.linalg.svd(J_aug)
    t = vt[-1]
    if previous is not None and float(t @ previous) < 0:
        t = -t
    return t


def _correct(F, jac, u_pred: np.ndarray, tangent: np.ndarray,
             tol: float = 1e-11, max_iter: int = 8):
    u = u_pred.copy()
    for k in range(max_iter):
        r = F(u)
        arc = float(tangent @ (u - u_pred))
        res = np.array([r[0], r[1], arc])
        if np.linalg.norm(res) < tol:
            return u, k
        A = np.vstack([jac(u), tangent])
        try:
            u = u - np.linalg.solve(A, res)
        except np.linalg.LinAlgError:
            return None, k
        if not np.all(np.isfinite(u)):
            return None, k
    r = F(u)
    if np.linalg.norm(r) < 1e-9:
        return u, max_iter
    return None, max_iter


def _refine_event(F, jac, u_a: np.ndarray, u_b: np.ndarray, test,
                  param_tol: float = 1e-9) -> np.ndarray | None:
    """Bisect a test-function sign change between consecutive branch points."""
    chord = u_b - u_a
    nc = np.linalg.norm(chord)
    if nc == 0:
        return None
    tangent = chord / nc
    ta, tb = test(u_a), test(u_b)
    a, b = u_a.copy(), u_b.copy()
    for _ in range(200):
        mid = 0.5 * (a + b)
        u_m, _ = _correct(F, jac, mid, tangent)
        if u_m is None:
            return None
        tm = test(u_m)
        if tm == 0.0:
            return u_m
        if ta * tm < 0:
            b, tb = u_m, tm
        else:
            a, ta = u_m, tm
        if abs(b[2] - a[2]) < param_tol and np.linalg.norm(b - a) < 1e-7:
            break
    return 0.5 * (a + b)


def _trace_branch(field: PlanarField, param_name: str, u0: np.ndarray,
                  direction: float, prange, ds0: float, ds_max: float,
                  ds_min: float, max_steps: int) -> list[np.ndarray]:
    F, jac = _augmented(field, param_name)
    lo, hi = min(prange), max(prange)
    margin = 0.02 * (hi - lo)
    pts = [u0.copy()]
    t = _tangent(jac(u0), None)
    if t[2] * direction < 0:
        t = -t
    ds = ds0
    u = u0.copy()
    for _ in range(max_steps):
        u_new = None
        while ds >= ds_min:
            u_try, n_iter = _correct(F, jac, u + ds * t, t)
            if u_try is not None and np.linalg.norm(u_try - u) < 10 * ds:
                u_new = u_try
                break
            ds *= 0.5
        if u_new is None:
            break
        pts.append(u_new.copy())
        t_new = _tangent(jac(u_new), t)
        u, t = u_new, t_new
        if n_iter <= 3:
            ds = min(ds * 1.3, ds_max)
        if not (lo - margin <= u[2] <= hi + margin):
            break
        if np.linalg.norm(u[:2]) > 1e6:
            break
    return pts


def continue_equilibria(field: PlanarField, param_name: str,
                        prange: tuple[float, float], *, seed_box,
                        seed_grid_n: int = 12, n_seed_slices: int = 9,
                        ds: float = 0.02, ds_max: float = 0.08,
                        ds_min: float = 1e-7,
                        max_steps: int = 40_000) -> list[BifurcationBranch]:
    """Pseudo-arclength continuation of all equilibrium branches in range.

    Branches pass through folds; det J (fold) and trace J with det J > 0
    (Hopf) sign changes are bisection-refined into events.
    """
    lo, hi = float(min(prange)), float(max(prange))
    F, jac = _augmented(field, param_name)

    seeds: list[np.ndarray] = []
    for q in np.linspace(lo, hi, n_seed_slices):
        fld = field.with_params(**{param_name: float(q)})
        for eq in find_all_equilibria(fld, seed_box, grid_n=seed_grid_n):
            seeds.append(np.array([eq.position[0], eq.position[1], q]))

    branches: list[BifurcationBranch] = []
    covered: list[np.ndarray] = []

    def is_covered(u) -> bool:
        for pt in covered:
            if (abs(pt[2] - u[2]) < 0.02 * (hi - lo + 1)
                    and np.linalg.norm(pt[:2] - u[:2]) < 1e-2):
                return True
        return False

    for seed in seeds:
        if is_covered(seed):
            continue
        back = _trace_branch(field, param_name, seed, -1.0, (lo, hi),
                             ds, ds_max, ds_min, max_steps)
        fwd = _trace_branch(field, param_name, seed, +1.0, (lo, hi),
                            ds, ds_max, ds_min, max_steps)
        us = back[::-1] + fwd[1:]
        if len(us) < 2:
            continue
        covered.extend(us)
        branch = BifurcationBranch()
        for u in us:
            branch.points.append(_branch_point(field, param_name, u[2], u[:2]))
        _detect_events(branch, F, jac, (lo, hi))
        branches.append(branch)
    return branches


def _detect_events(branch: BifurcationBranch, F, jac, prange):
    lo, hi = prange

    def det_test(u):
        return float(np.linalg.det(jac(u)[:, :2]))

    def tr_test(u):
        return float(np.trace(jac(u)[:, :2]))

    pts = branch.points
    for k in range(len(pts) - 1):
        a, b = pts[k], pts[k + 1]
        ua = np.array([a.state[0], a.state[1], a.param])
        ub = np.array([b.state[0], b.state[1], b.param])
        if a.test_fold * b.test_fold < 0:
            u_ev = _refine_event(F, jac, ua, ub, det_test)
            if u_ev is not None and lo <= u_ev[2] <= hi:
                branch.events.append(BifurcationEvent("SN", float(u_ev[2]),
                                                      u_ev[:2].copy()))
        if (a.test_hopf * b.test_hopf < 0
                and a.test_fold > 0 and b.test_fold > 0):
            u_ev = _refine_event(F, jac, ua, ub, tr_test)
            if u_ev is not None and lo <= u_ev[2] <= hi:
                branch.events.append(BifurcationEvent("HB", float(u_ev[2]),
                                                      u_ev[:2].copy()))
    branch.events.sort(key=lambda e: e.param)


def merged_events(branches: list[BifurcationBranch],
                  param_tol: float = 1e-6,
                  state_tol: float = 1e-4) -> list[BifurcationEvent]:
    """All events across branches, deduplicated."""
    out: list[BifurcationEvent] = []
    for br in branches:
        for ev in br.events:
            dup = any(ev.kind == o.kind and abs(ev.param - o.param) < param_tol
                      and np.linalg.norm(ev.state - o.state) < state_tol
                      for o in out)
            if not dup:
                out.append(ev)
    out.sort(key=lambda e: (e.param, e.kind))
    return out


@dataclass(frozen=True)
class CycleSample:
    param: float
    state: np.ndarray       # a point on the cycle
    period: float
    min_state: np.ndarray
    max_state: np.ndarray


@dataclass
class PeriodicBranch:
    samples: list[CycleSample] = dc_field(default_factory=list)
    lower_bracket: tuple[float, float] | None = None  # (no cycle, cycle)
    upper_bracket: tuple[float, float] | None = None  # (cycle, no cycle)
    endpoint_labels: dict = dc_field(default_factory=lambda: {"lower": "open",
                                                              "upper": "open"})


def _find_source(field: PlanarField, box) -> np.ndarray | None:
    for eq in find_all_equilibria(field, box, grid_n=12, tol=1e-11):
        if eq.eigenvalues.real.min() > 1e-9:
            return eq.position
    return None


def measure_cycle(field: PlanarField, q: float, param_name: str, *, box,
                  seed: np.ndarray | None = None, rtol: float = 1e-9,
                  atol: float = 1e-11, transient: float = 300.0,
                  transient_budget: float = 1e4, n_returns: int = 4,
                  max_return_time: float = 5e3) -> CycleSample | None:
    """Settle onto the attracting cycle at one parameter value, if any."""
    fld = field.with_params(**{param_name: q})
    if seed is None:
        src = _find_source(fld, box)
        if src is None:
            return None
        state = src + 1e-3 * (1.0 + np.abs(src))
    else:
        state = np.asarray(seed, dtype=float)

    traj = integrate(fld, state, (0.0, transient), rtol=rtol, atol=atol)
    if traj.termination != "time_end":
        return None
    state = traj.final_state
    vel = fld(state)
    nv = np.linalg.norm(vel)
    if nv < 1e-10:
        return None  # converged to an equilibrium
    section = Section(point=(float(state[0]), float(state[1])),
                      normal=(float(vel[0] / nv), float(vel[1] / nv)),
                      half_width=1e3)
    from .flow import NoCrossingError, integrate_to_section

    # settle: section returns must converge within the transient budget
    scale = 1.0 + np.linalg.norm(state)
    crossings = []
    cur = state
    total = transient
    settled_at = None
    for k in range(50):
        try:
            hit = integrate_to_section(fld, cur, section, max_return_time,
                                       rtol=rtol, atol=atol, direction=1)
        except NoCrossingError:
            return None
        crossings.append(hit)
        cur = hit.state
        total += hit.t
        if (len(crossings) >= 2 and np.linalg.norm(
                crossings[-1].state - crossings[-2].state) < 1e-6 * scale):
            settled_at = k
            if len(crossings) >= n_returns + 1:
                break
        if settled_at is None and total > transient_budget:
            return None
    if settled_at is None:
        return None
    times = [c.t for c in crossings[-n_returns:]]
    period = float(np.mean(times))
    loop = integrate(fld, crossings[-1].state, (0.0, period),
                     rtol=rtol, atol=atol, max_step=period / 400.0)
    return CycleSample(param=float(q), state=crossings[-1].state,
                       period=period,
                       min_state=loop.states.min(axis=0),
                       max_state=loop.states.max(axis=0))


def track_periodic(field: PlanarField, param_name: str,
                   prange: tuple[float, float], *, box, n_scan: int = 25,
                   end_param_tol: float = 1e-3,
                   end_period: float = 100.0, max_bisect: int = 48,
                   rtol: float = 1e-9) -> PeriodicBranch:
    """March the attracting cycle across ``prange``; refine both ends.

    Ends are bisected until the parameter bracket is below
    ``end_param_tol`` and the last measured period exceeds ``end_period``
    (or the bracket hits floating-point resolution).
    """
    lo, hi = float(min(prange)), float(max(prange))
    branch = PeriodicBranch()
    qs = np.linspace(lo, hi, n_scan)
    samples: dict[float, CycleSample] = {}
    first = None
    for q in qs:
        s = measure_cycle(field, float(q), param_name, box=box, rtol=rtol)
        if s is not None:
            samples[float(q)] = s
            first = float(q)
            break
    if first is None:
        raise ContinuationError("no attracting cycle found in range")

    # march outward with warm starts
    def march(q0: float, step: float):
        prev = samples[q0]
        q = q0
        while lo <= q + step <= hi:
            q = q + step
            s = measure_cycle(field, q, param_name, box=box,
                              seed=prev.state, rtol=rtol)
            if s is None:
                return q - step, q
            samples[q] = s
            prev = s
        return q, None

    step = (hi - lo) / (n_scan - 1)
    last_up, lost_up = march(first, step)
    last_dn, lost_dn = march(first, -step)

    def refine(q_have: float, q_lost: float | None, side: str):
        if q_lost is None:
            return None
        a, b = q_have, q_lost  # cycle at a, none at b
        for _ in range(max_bisect):
            width = abs(b - a)
            if width < abs(end_param_tol) and samples[a].period > end_period:
                break
            if width < 4 * np.finfo(float).eps * max(1.0, abs(a)):
                break
            m = 0.5 * (a + b)
            s = measure_cycle(field, m, param_name, box=box,
                              seed=samples[a].state, rtol=rtol)
            if s is None:
                b = m
            else:
                samples[m] = s
                a = m
        return (a, b) if side == "upper" else (b, a)

    branch.upper_bracket = refine(last_up, lost_up, "upper")
    branch.lower_bracket = refine(last_dn, lost_dn, "lower")
    branch.samples = [samples[q] for q in sorted(samples)]
    return branch


def classify_cycle_end(field: PlanarField, param_name: str,
                       cycle: CycleSample, *, side: str, box,
                       d_tol: float = 0.05, period_threshold: float = 100.0,
                       dq: float = 1e-3, rtol: float = 1e-10) -> str:
    """Label a period-blow-up branch end as SNIC, Homoclinic, or open.

    SNIC: the slow segment passes within ``d_tol`` of an equilibrium pair
    born at an adjacent fold. Homoclinic: it passes within ``d_tol`` of a
    saddle persisting on both sides of the end. ``side`` is 'upper' or
    'lower' (which way the cycle is lost).
    """
    if cycle.period <= period_threshold:
        raise ContinuationError(
            f"cycle period {cycle.period:.3g} below the blow-up threshold "
            f"{period_threshold:g}; cannot classify the branch end")
    fld = field.with_params(**{param_name: cycle.param})
    loop = integrate(fld, cycle.state, (0.0, cycle.period), rtol=rtol,
                     atol=1e-12, max_step=cycle.period / 2000.0)
    speeds = np.array([np.linalg.norm(fld(s)) for s in loop.states])
    slow_point = loop.states[int(np.argmin(speeds))]

    q_beyond = cycle.param + (dq if side == "upper" else -dq)
    eq_in = find_all_equilibria(fld, box, grid_n=14, tol=1e-11)
    eq_out = find_all_equilibria(field.with_params(**{param_name: q_beyond}),
                                 box, grid_n=14, tol=1e-11)

    def near(pos, eqs, r):
        return any(np.linalg.norm(pos - e.position) < r for e in eqs)

    fold_born = [e for e in eq_out
                 if not near(e.position, eq_in, 0.05 + 5 * dq)]
    snic_hit = near(slow_point, fold_born, d_tol) if fold_born else False

    saddles = [e for e in eq_in
               if e.eigenvalues.real.min() < 0 < e.eigenvalues.real.max()
               and near(e.position, eq_out, 0.05)]
    hom_hit = near(slow_point, saddles, d_tol)

    if snic_hit and hom_hit:
        raise AmbiguousEndError(
            "slow segment is close to both a fold-born pair and a "
            "persisting saddle")
    if snic_hit:
        return "SNIC"
    if hom_hit:
        return "Homoclinic"
    return "open"


def branch_csv_rows(branch: BifurcationBranch):
    """Rows (param, x, y, re1, im1, re2, im2, det, trace, stable)."""
    for pt in branch.points:
        ev = np.sort_complex(pt.eigenvalues)
        yield (pt.param, pt.state[0], pt.state[1],
               ev[0].real, ev[0].imag, ev[1].real, ev[1].imag,
               pt.test_fold, pt.test_hopf, int(pt.stable))
