"""Sleep-rate assignment maximizing proportional-fair throughput.

Splits on the total target energy efficiency of the contenders:

* super-unit (sum of efficiencies >= 1): rates are shares of an optimal
  total rate, capped per device by a water-filling level so the radio-on
  constraints hold;
* sub-unit (sum < 1): every energy constraint binds and the rates solve a
  linear fixed point exactly.

Also provides the analytic optimality bounds for the assignment and a
grid-search oracle that maximizes the true (non-relaxed) problem for
small device counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .formulas import ContentionParams, RateVector, log_throughput_utility

SUPER_UNIT = "super_unit"
SUB_UNIT = "sub_unit"


class SubUnitRegime(ValueError):
    """Efficiencies sum below 1; the water-filling split does not apply."""


class SuperUnitRegime(ValueError):
    """Efficiencies sum to 1 or more; the fixed-point solution does not apply."""


class DegenerateBudget(ValueError):
    """A zero efficiency would force a zero rate and minus-infinite utility."""


class NoFeasiblePoint(RuntimeError):
    """Every oracle grid point violates the radio-on constraints."""


@dataclass(frozen=True)
class SleepRateAssignment:
    """Solver output: regime tag, water level, total rate and per-device rates.

    Every rate equals min(efficiency, c_star) * y_star.
    """

    case: str
    c_star: float
    y_star: float
    rates: RateVector
    budgets_used: np.ndarray

    def rate_for(self, efficiency: float) -> float:
        """Rate a device with the given efficiency derives from this broadcast."""
        return min(efficiency, self.c_star) * self.y_star


def _validated_budgets(efficiencies, allow_zero: bool = False) -> np.ndarray:
    b = np.asarray(efficiencies, dtype=float)
    if b.ndim != 1 or b.size == 0:
        raise ValueError("efficiencies must be a non-empty 1-D vector")
    if not np.all(np.isfinite(b)) or np.any(b < 0):
        raise ValueError("efficiencies must be finite and >= 0")
    if not allow_zero and np.any(b == 0):
        raise DegenerateBudget(
            f"devices {np.flatnonzero(b == 0).tolist()} have zero energy "
            "budget; exclude them or raise their lifetime target")
    return b


def water_filling_level(efficiencies) -> float:
    """Common cap c such that sum(min(b_i, c)) == 1, solved exactly.

    The map c -> sum(min(b_i, c)) is piecewise linear and nondecreasing
    with breakpoints at the b_i, so the root is found by sorting the
    breakpoints and solving the linear segment that brackets 1.  No
    iteration, no tolerance.

    Raises:
        SubUnitRegime: sum(b) < 1, where no solution exists.
    """
    b = _validated_budgets(efficiencies, allow_zero=True)
    if b.sum() < 1.0:
        raise SubUnitRegime(
            f"sum of efficiencies {b.sum():.6g} < 1; use solve_subunit")
    s = np.sort(b)
    n = s.size
    prefix = 0.0  # sum of breakpoints below the current segment
    for j in range(n):
        # On segment [s[j-1], s[j]]: sum(min) = prefix + (n - j) * c.
        c = (1.0 - prefix) / (n - j)
        if c <= s[j] + 1e-15:
            return c
        prefix += s[j]
    # sum(b) == 1 exactly: any c >= max(b) works; return the smallest.
    return float(s[-1])


def optimal_total_rate(n_devices: int, params: ContentionParams) -> float:
    """Total sleep rate maximizing the utility for the super-unit regime.

    Balances the idle-time loss of a low total rate against the collision
    loss of a high one; the stationary point of the one-dimensional
    objective has a closed form.  For a single device the collision term
    vanishes and the objective keeps increasing, so the divisor that would
    be n-1 is floored at 1 to return a finite, near-optimal rate.
    """
    if n_devices < 1:
        raise ValueError("n_devices must be >= 1")
    if params.sensing_time <= 0:
        raise ValueError("sensing_time must be > 0 to solve for the total rate")
    lt = params.busy_time
    nm1 = max(n_devices - 1, 1)
    disc = 1.0 + 4.0 * n_devices * lt / (nm1 * params.sensing_time)
    return (-1.0 + math.sqrt(disc)) / (2.0 * lt)


def solve_subunit(efficiencies, params: ContentionParams) -> SleepRateAssignment:
    """Exact assignment when the efficiencies sum below 1.

    All radio-on constraints bind; the unique fixed point of
    ``rate_n = b_n * (sum(rates) + 1/busy_time)`` is
    ``rate_n = b_n / (busy_time * (1 - sum(b)))``.  In the unified form
    the water level is 1 and the total-rate parameter is
    ``1 / (busy_time * (1 - sum(b)))``.
    """
    b = _validated_budgets(efficiencies)
    total = b.sum()
    if total >= 1.0:
        raise SuperUnitRegime(
            f"sum of efficiencies {total:.6g} >= 1; use the water-filling split")
    y_star = 1.0 / (params.busy_time * (1.0 - total))
    rates = RateVector(b * y_star)
    return SleepRateAssignment(SUB_UNIT, 1.0, y_star, rates, b)


def assign_rates(efficiencies, params: ContentionParams) -> SleepRateAssignment:
    """Full assignment procedure: regime split, (c*, y*), per-device rates."""
    b = _validated_budgets(efficiencies)
    if b.sum() >= 1.0:
        c_star = water_filling_level(b)
        y_star = optimal_total_rate(b.size, params)
        rates = RateVector(np.minimum(b, c_star) * y_star)
        return SleepRateAssignment(SUPER_UNIT, c_star, y_star, rates, b)
    return solve_subunit(b, params)


def relaxed_utility_at_total(total_rate: float, efficiencies,
                             params: ContentionParams) -> float:
    """Relaxed objective as a function of the total rate, water level fixed.

    This is the one-dimensional function whose maximizer is
    ``optimal_total_rate``; exposed so tests can cross-check the closed
    form numerically.
    """
    b = _validated_budgets(efficiencies, allow_zero=True)
    n = b.size
    c_star = water_filling_level(b)
    lt = params.busy_time
    return (n * math.log(total_rate)
            - n * math.log(total_rate + 1.0 / lt)
            - (n - 1) * total_rate * params.sensing_time
            + n * math.log(params.packet_time / lt)
            + float(np.log(np.minimum(b, c_star)).sum()))


def optimality_bounds(efficiencies, params: ContentionParams
                      ) -> tuple[float, float, float]:
    """(lower, upper, gap) bracketing the relaxed problem's optimum, in nats.

    The assignment achieves the lower bound; the upper bound drops the
    idle and collision losses entirely, so the gap
    ``n*log(1 + 1/(y* busy)) + (n-1) y* t_s`` vanishes as the sensing
    ratio goes to zero.  In the sub-unit regime the assignment is exactly
    optimal and the gap is zero.
    """
    b = _validated_budgets(efficiencies)
    n = b.size
    lt = params.busy_time
    if b.sum() < 1.0:
        value = log_throughput_utility(solve_subunit(b, params).rates, params)
        return value, value, 0.0
    c_star = water_filling_level(b)
    y_star = optimal_total_rate(n, params)
    shared = n * math.log(params.packet_time / lt) + float(
        np.log(np.minimum(b, c_star)).sum())
    gap = (n * math.log1p(1.0 / (y_star * lt))
           + (n - 1) * y_star * params.sensing_time)
    upper = shared
    lower = shared - gap
    return lower, upper, gap


@dataclass(frozen=True)
class OracleResult:
    """Best grid point of the true problem, with grid-resolution context."""

    rates: np.ndarray
    objective: float
    cell_span: float       # objective variation across the winning cell
    at_boundary: bool      # best point sits on the grid edge


def _grid_objective(combos: np.ndarray, params: ContentionParams,
                    b: np.ndarray) -> np.ndarray:
    """Vectorized true-constraint objective; -inf where infeasible."""
    y = combos.sum(axis=1)
    ts = params.sensing_time
    lt = params.busy_time
    n = combos.shape[1]
    ert = np.exp(-combos * ts)
    on = ((1.0 - ert) * y[:, None] + ert * combos) / (y + 1.0 / lt)[:, None]
    feasible = np.all(on <= b[None, :], axis=1)
    obj = (np.log(combos).sum(axis=1)
           - n * np.log(y + 1.0 / lt)
           - (n - 1) * y * ts
           + n * math.log(params.packet_time / lt))
    obj[~feasible] = -np.inf
    return obj


def _best_on_axes(axes: list[np.ndarray], params: ContentionParams,
                  b: np.ndarray) -> tuple[np.ndarray, float, np.ndarray]:
    """Exhaustive search over the cartesian product of per-device axes.

    Chunked along the first axis to bound memory; the argmax of the
    flattened row-major order breaks ties at the lexicographically
    smallest rate vector.
    """
    n = len(axes)
    rest = axes[1:]
    mesh = np.meshgrid(*rest, indexing="ij") if rest else []
    rest_combos = (np.stack([m.ravel() for m in mesh], axis=1)
                   if rest else np.zeros((1, 0)))
    best_obj = -np.inf
    best_idx = None
    for i, r0 in enumerate(axes[0]):
        combos = np.empty((rest_combos.shape[0], n))
        combos[:, 0] = r0
        combos[:, 1:] = rest_combos
        obj = _grid_objective(combos, params, b)
        j = int(np.argmax(obj))
        if obj[j] > best_obj:
            best_obj = float(obj[j])
            best_idx = (i, j)
    if best_idx is None or not math.isfinite(best_obj):
        raise NoFeasiblePoint("no grid point satisfies the radio-on constraints")
    i, j = best_idx
    rates = np.empty(n)
    rates[0] = axes[0][i]
    rates[1:] = rest_combos[j]
    index = np.array([i] + [int(k) for k in np.unravel_index(
        j, [a.size for a in rest])] if rest else [i])
    return rates, best_obj, index


def brute_force_oracle(efficiencies, params: ContentionParams,
                       grid_resolution: int = 50) -> OracleResult:
    """Estimate the true optimum by log-spaced grid search plus refinement.

    Maximizes the utility under the exact radio-on constraints (not the
    relaxation) over ``grid_resolution`` points per device spanning
    [1, 10 * y*], then re-grids the cell around the winner once at the
    same resolution.  Cost grows as resolution**n, so n is capped at 4.
    """
    b = _validated_budgets(efficiencies)
    n = b.size
    if n > 4:
        raise ValueError("oracle supports at most 4 devices")
    if grid_resolution < 50:
        raise ValueError("grid_resolution must be >= 50")
    scale = assign_rates(b, params).y_star
    lo, hi = 1.0, 10.0 * scale
    axes = [np.logspace(math.log10(lo), math.log10(hi), grid_resolution)
            for _ in range(n)]
    rates, obj, index = _best_on_axes(axes, params, b)

    at_boundary = bool(np.any(index == 0)
                       or np.any(index == grid_resolution - 1))
    refined_axes = []
    for d in range(n):
        axis = axes[d]
        k = index[d]
        a_lo = axis[max(k - 1, 0)]
        a_hi = axis[min(k + 1, axis.size - 1)]
        refined_axes.append(
            np.logspace(math.log10(a_lo), math.log10(a_hi), grid_resolution))
    r_rates, r_obj, r_index = _best_on_axes(refined_axes, params, b)
    if r_obj >= obj:
        rates, obj, index = r_rates, r_obj, r_index

    # Objective variation across one refined cell around the winner, used
    # as the resolution allowance when comparing against analytic bounds.
    span = 0.0
    for d in range(n):
        axis = refined_axes[d]
        k = min(int(r_index[d]), axis.size - 1)
        for nb in (k - 1, k + 1):
            if 0 <= nb < axis.size:
                probe = rates.copy()
                probe[d] = axis[nb]
                val = _grid_objective(probe[None, :], params, b)[0]
                if math.isfinite(val):
                    span = max(span, abs(obj - val))
    return OracleResult(rates, obj, span, at_boundary)
