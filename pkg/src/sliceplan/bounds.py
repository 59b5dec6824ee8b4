"""Per-flow probabilistic delay bounds and the (theta, delta) search.

The bound for a flow with arrival envelope rate rho_a(theta), service
envelope rate rho_s(theta) and violation budget epsilon (split evenly
between the two envelopes) is

    W(theta, delta) = -2*[ln(eps/2) + ln(1 - exp(-theta*delta))]
                      / (theta * (rho_s(theta) - delta))

valid under the stability condition rho_s - delta > rho_a + delta. Both
the objective and the feasible region are non-convex, so the minimiser is
found by a deterministic derivative-free search: a log grid over theta
with a golden-section inner search over delta, then coordinate-descent
refinement around the best grid point. Identical inputs always produce
bit-identical results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericUnderflowError, StabilityViolatedError
from .radio import (
    McsPmf,
    McsTable,
    Numerology,
    _neg_log_mgf_scalar,
    mean_service_rate,
    per_rb_bits,
    service_rho_vec,
)
from .traffic import FlowSpec, arrival_rho, mean_bit_rate

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_INVPHI2 = (3.0 - math.sqrt(5.0)) / 2.0

_THETA_GRID_SIZE = 64
_THETA_GRID_LO = 1e-9
_DELTA_RELTOL = 1e-4
_REFINE_ROUNDS = 20
_REFINE_RELTOL = 1e-6


@dataclass(frozen=True)
class DelayBoundResult:
    """Outcome of the bound minimisation for one flow.

    w_seconds is None when no sampled theta had a positive stability gap
    (the flow cannot be stabilised at this allocation). When feasible,
    w_seconds equals the bound formula evaluated at (theta, delta).
    """

    w_seconds: float | None
    theta: float | None
    delta: float | None
    rho_a: float | None
    rho_s: float | None
    evaluations: int

    @property
    def feasible(self) -> bool:
        return self.w_seconds is not None


INFEASIBLE = DelayBoundResult(None, None, None, None, None, 0)


def delay_bound_at(
    rho_a: float, rho_s: float, epsilon: float, theta: float, delta: float
) -> float:
    """Evaluate the delay bound at one (theta, delta) point, in seconds.

    Raises StabilityViolatedError if rho_s - delta <= rho_a + delta and
    NumericUnderflowError if 1 - exp(-theta*delta) underflows to zero.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must be in (0, 1)")
    if theta <= 0 or delta <= 0:
        raise ValueError("theta and delta must be > 0")
    if not rho_s - delta > rho_a + delta:
        raise StabilityViolatedError(
            f"rho_s - delta = {rho_s - delta!r} must exceed "
            f"rho_a + delta = {rho_a + delta!r}"
        )
    one_minus_exp = -math.expm1(-theta * delta)
    if one_minus_exp == 0.0:
        raise NumericUnderflowError(f"1 - exp(-{theta * delta!r}) underflowed")
    return (
        -2.0
        * (math.log(epsilon / 2.0) + math.log(one_minus_exp))
        / (theta * (rho_s - delta))
    )


def _w_vec(thetas, rho_s, deltas, log_eps_half):
    """Vectorised bound; assumes stability already ensured by the caller."""
    term = np.log(-np.expm1(-thetas * deltas))
    return -2.0 * (log_eps_half + term) / (thetas * (rho_s - deltas))


def _gss_delta_vec(thetas, rho_s, lo, hi, log_eps_half, collect):
    """Lockstep golden-section over delta for each theta lane.

    Returns (best_delta, best_w, evaluations). Both probe points are
    evaluated every iteration; the per-lane running minimum over every
    probed point is kept so the final answer is never worse than any
    sampled one.
    """
    a = lo.copy()
    b = hi.copy()
    best_w = np.full(a.shape, np.inf)
    best_d = np.full(a.shape, np.nan)
    evals = 0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for _ in range(120):
            h = b - a
            c = a + _INVPHI2 * h
            d = a + _INVPHI * h
            wc = _w_vec(thetas, rho_s, c, log_eps_half)
            wd = _w_vec(thetas, rho_s, d, log_eps_half)
            evals += 2 * len(a)
            if collect is not None:
                collect.extend(zip(thetas, c, wc))
                collect.extend(zip(thetas, d, wd))
            for probe_d, probe_w in ((c, wc), (d, wd)):
                better = probe_w < best_w
                best_w = np.where(better, probe_w, best_w)
                best_d = np.where(better, probe_d, best_d)
            left = wc < wd
            b = np.where(left, d, b)
            a = np.where(left, a, c)
            width_ok = b - a <= _DELTA_RELTOL * np.maximum(np.abs(b), 1e-300)
            if bool(np.all(width_ok | ~np.isfinite(b - a))):
                break
    return best_d, best_w, evals


def _gss_scalar(f, a, b, reltol):
    """Golden-section minimisation of f on [a, b]; returns (fx, x, evals)."""
    c = a + _INVPHI2 * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    evals = 2
    best = min((fc, c), (fd, d))
    while b - a > reltol * max(abs(b), 1e-300) and evals < 200:
        if fc < fd:
            b, d, fd = d, c, fc
            c = a + _INVPHI2 * (b - a)
            fc = f(c)
            evals += 1
            best = min(best, (fc, c))
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
            evals += 1
            best = min(best, (fd, d))
    return best[0], best[1], evals


def optimize_delay_bound(
    flow: FlowSpec,
    pmf: McsPmf,
    table: McsTable,
    n_rb: float,
    numerology: Numerology,
    collect: list | None = None,
) -> DelayBoundResult:
    """Minimise the delay bound over (theta, delta) for one flow.

    Stage 1 sweeps a logarithmic theta grid and golden-sections delta
    inside each positive stability gap; stage 2 refines the best grid
    point by alternating golden-section searches in theta and delta.
    Returns INFEASIBLE when no sampled theta has rho_s > rho_a. collect,
    when given, receives every evaluated (theta, delta, w) triple.
    """
    epsilon = flow.violation_budget
    log_eps_half = math.log(epsilon / 2.0)

    if mean_service_rate(pmf, table, n_rb, numerology) <= mean_bit_rate(flow):
        # rho_s <= mean service <= mean arrivals <= rho_a for every theta.
        return INFEASIBLE

    theta_cap = flow.theta_cap
    grid_lo = min(_THETA_GRID_LO, theta_cap * 1e-3)
    thetas = np.logspace(
        math.log10(grid_lo), math.log10(theta_cap), _THETA_GRID_SIZE
    )
    rho_a_grid = np.array([arrival_rho(flow, t) for t in thetas])
    rho_s_grid = service_rho_vec(thetas, pmf, table, n_rb, numerology)
    gaps = rho_s_grid - rho_a_grid
    feasible = gaps > 0.0
    if not feasible.any():
        return INFEASIBLE

    th = thetas[feasible]
    rs = rho_s_grid[feasible]
    half_gap = gaps[feasible] / 2.0
    lo = half_gap * 1e-12
    hi = half_gap * (1.0 - 1e-12)
    best_d, best_w, evals = _gss_delta_vec(th, rs, lo, hi, log_eps_half, collect)

    i = int(np.argmin(best_w))
    w_best = float(best_w[i])
    theta_best = float(th[i])
    delta_best = float(best_d[i])
    if not math.isfinite(w_best):
        return INFEASIBLE

    # Precomputed per-level bits and packet-size terms make the scalar
    # refinement evaluations cheap.
    bits = [per_rb_bits(numerology, eta) for eta in table.etas]
    probs = pmf.probabilities
    sizes = flow.sizes.entries
    lam = flow.lambda_pps
    t_slot = numerology.t_slot_s
    rate = n_rb / t_slot

    def rho_a_fast(theta: float) -> float:
        return lam * math.fsum(p * math.expm1(theta * s) for s, p in sizes) / theta

    def rho_s_fast(theta: float) -> float:
        return rate * _neg_log_mgf_scalar(theta, probs, bits) / theta

    # Stage 2: coordinate descent around the best grid point. The theta
    # bracket spans one grid spacing to either side.
    ratio = (theta_cap / grid_lo) ** (1.0 / (_THETA_GRID_SIZE - 1))
    rho_a_cur = rho_a_fast(theta_best)
    rho_s_cur = rho_s_fast(theta_best)

    def w_at_theta(theta: float) -> float:
        ra = rho_a_fast(theta)
        rs_ = rho_s_fast(theta)
        if not rs_ - delta_best > ra + delta_best:
            return math.inf
        w = delay_bound_at(ra, rs_, epsilon, theta, delta_best)
        if collect is not None:
            collect.append((theta, delta_best, w))
        return w

    def w_at_delta(delta: float) -> float:
        w = delay_bound_at(rho_a_cur, rho_s_cur, epsilon, theta_best, delta)
        if collect is not None:
            collect.append((theta_best, delta, w))
        return w

    for _ in range(_REFINE_ROUNDS):
        w_round_start = w_best

        t_lo = max(theta_best / ratio, grid_lo)
        t_hi = min(theta_best * ratio, theta_cap)
        w_t, theta_t, ev = _gss_scalar(w_at_theta, t_lo, t_hi, 1e-4)
        evals += ev
        if w_t < w_best:
            w_best, theta_best = w_t, theta_t

        rho_a_cur = rho_a_fast(theta_best)
        rho_s_cur = rho_s_fast(theta_best)
        gap = rho_s_cur - rho_a_cur
        if gap > 0.0:
            d_lo = gap / 2.0 * 1e-12
            d_hi = gap / 2.0 * (1.0 - 1e-12)
            w_d, delta_d, ev = _gss_scalar(w_at_delta, d_lo, d_hi, _DELTA_RELTOL)
            evals += ev
            if w_d < w_best:
                w_best, delta_best = w_d, delta_d

        if w_best > w_round_start * (1.0 - _REFINE_RELTOL):
            break

    rho_a_star = arrival_rho(flow, theta_best)
    rho_s_star = rho_s_fast(theta_best)
    w_star = delay_bound_at(rho_a_star, rho_s_star, epsilon, theta_best, delta_best)
    return DelayBoundResult(
        w_seconds=w_star,
        theta=theta_best,
        delta=delta_best,
        rho_a=rho_a_star,
        rho_s=rho_s_star,
        evaluations=evals,
    )
