"""Worst-case attack search over families and zero-rate thresholds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import families, keyrate, states

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
PARAM_TOL = 1e-10
PRESCAN_POINTS = 64


@dataclass
class OptimizationResult:
    """Minimizer output: worst-case parameter, rate and attack state.

    ``status`` is one of converged / boundary / infeasible; for infeasible
    runs the numeric fields are NaN/None and ``params`` is empty.
    """

    theta_star: float | None
    r_min: float
    state: np.ndarray | None
    iterations: int
    status: str
    params: dict = field(default_factory=dict)


def golden_section(f, lo: float, hi: float, tol: float = PARAM_TOL):
    """Golden-section minimum of f on [lo, hi] to parameter tolerance.

    A 64-point coarse pre-scan guards against non-unimodal landscapes;
    golden-section then refines the best coarse bracket.  Ties are broken
    toward the smaller parameter (the pre-scan argmin takes the first
    minimal point and the section step keeps the left bracket on equality).
    """
    span = hi - lo
    if span <= tol:
        return lo, f(lo), 0
    xs = np.linspace(lo, hi, PRESCAN_POINTS)
    fs = [f(x) for x in xs]
    best = int(np.argmin(fs))
    a = xs[max(best - 1, 0)]
    b = xs[min(best + 1, PRESCAN_POINTS - 1)]
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    iters = PRESCAN_POINTS
    while b - a > tol and iters < 500:
        iters += 1
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x), iters


def minimize_rate(family: families.AttackFamily, rate=None) -> OptimizationResult:
    """Minimize a rate functional over an attack family.

    ``rate`` maps an eigenvalue table to bits; by default the family's own
    rate method is used.  Fully constrained families evaluate directly;
    one-parameter families run the pre-scanned golden-section search.
    """
    if rate is None:
        objective = family.rate
    else:
        def objective(c=None):
            return rate(family.table(c))

    if family.n_free == 0:
        return OptimizationResult(
            theta_star=None,
            r_min=float(objective(None)),
            state=family.table(None),
            iterations=1,
            status="converged",
            params=family.params(None),
        )
    theta, r_min, iters = golden_section(objective, family.lo, family.hi)
    span = family.hi - family.lo
    edge = max(1e-7 * span, 10.0 * PARAM_TOL)
    on_edge = (theta - family.lo) < edge or (family.hi - theta) < edge
    return OptimizationResult(
        theta_star=float(theta),
        r_min=float(r_min),
        state=family.table(theta),
        iterations=iters,
        status="boundary" if on_edge else "converged",
        params=family.params(theta),
    )


def _infeasible() -> OptimizationResult:
    return OptimizationResult(theta_star=None, r_min=math.nan, state=None,
                              iterations=0, status="infeasible")


def optimize_scheme(d: int, scheme: str, q: float,
                    method: str = "numeric") -> OptimizationResult:
    """Worst-case rate of a MUB scheme at error rate Q.

    ``method``: "analytic" uses the closed-form optimum (available for the
    "2" and "d+1" schemes), "numeric" minimizes the closed-form rate over
    the family, "engine" minimizes the full density-matrix rate.
    """
    if method == "analytic":
        try:
            if scheme == "2":
                opt = families.optimal_2mubs(d, q)
            elif scheme == "d+1":
                opt = families.optimal_d1mubs(d, q)
            else:
                raise ValueError(f"no closed-form optimum for scheme {scheme!r}")
        except families.InfeasibleError:
            return _infeasible()
        fam = families.scheme_family(d, scheme, q)
        c = opt.c if fam.n_free else None
        return OptimizationResult(
            theta_star=opt.c, r_min=opt.r_min, state=fam.table(c),
            iterations=0, status="converged",
            params={"a": opt.a, "b": opt.b, "c": opt.c},
        )
    try:
        fam = families.scheme_family(d, scheme, q)
    except families.InfeasibleError:
        return _infeasible()
    if method == "engine":
        protocol = families.mub_protocol(d, scheme)

        def rate(u):
            return keyrate.sifted_rate(states.bell_diag_to_density(u), protocol).r_bar

        return minimize_rate(fam, rate)
    if method != "numeric":
        raise ValueError(f"unknown method {method!r}")
    return minimize_rate(fam)


def optimize_protocol(protocol: families.ProtocolSpec, q: float) -> OptimizationResult:
    """Worst-case engine rate of a qubit catalog protocol at error rate Q."""
    try:
        fam = families.symmetrized_family(protocol, q)
    except families.InfeasibleError:
        return _infeasible()
    return minimize_rate(fam)


def threshold_q(rate_curve, q_lo: float = 0.0, q_hi: float = 0.5,
                tol: float = 1e-8) -> float:
    """Bisection root of r_min(Q) = 0 on [q_lo, q_hi].

    Requires a sign change over the bracket (the curve is positive at low
    Q and monotonically decreasing in the scanned range).
    """
    r_lo = rate_curve(q_lo)
    r_hi = rate_curve(q_hi)
    if not (r_lo > 0.0 > r_hi):
        raise ValueError(
            f"no sign change on [{q_lo:g}, {q_hi:g}]: r = {r_lo:.3g}, {r_hi:.3g}")
    lo, hi = q_lo, q_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if rate_curve(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def scheme_q_limit(d: int, scheme: str) -> float:
    """Upper end of the error-rate bracket used for threshold scans."""
    if scheme == "d+1":
        return d / (d + 1) - 1e-9
    return (d - 1) / d


def scheme_threshold(d: int, scheme: str, method: str = "numeric") -> float:
    """Zero-rate error threshold of a MUB scheme."""
    return threshold_q(
        lambda q: optimize_scheme(d, scheme, q, method=method).r_min,
        q_hi=scheme_q_limit(d, scheme),
    )


def protocol_threshold(protocol: families.ProtocolSpec) -> float:
    """Zero-rate error threshold of a qubit catalog protocol.

    The scan ends at the maximally-mixed point Q = (d-1)/d, which every
    symmetrized family reaches (uniform Bell table) with a strictly
    negative rate; past it the rate curve turns back up, so larger
    brackets would lose the sign change.
    """
    d = protocol.d
    return threshold_q(
        lambda q: optimize_protocol(protocol, q).r_min, q_hi=(d - 1) / d)


def sweep_rows(selector: dict, q_values) -> list:
    """Optimization results over a Q grid, one row dict per grid point.

    ``selector`` carries either scheme/d (MUB schemes) or a prebuilt
    protocol.  Rows are ordered by Q ascending and record per-point
    infeasibility in ``status`` without aborting the sweep.
    """
    rows = []
    for q in sorted(float(v) for v in q_values):
        if "protocol" in selector:
            proto = selector["protocol"]
            res = optimize_protocol(proto, q)
            name, d = proto.name, proto.d
        else:
            name, d = selector["scheme"], selector["d"]
            res = optimize_scheme(d, name, q, method=selector.get("method", "numeric"))
        rows.append({
            "scheme": name,
            "d": d,
            "Q": q,
            "rate": res.r_min,
            "a": res.params.get("a"),
            "b": res.params.get("b"),
            "c": res.params.get("c"),
            "status": res.status,
        })
    return rows
