"""Invert Pfa(tau) for a desired false-alarm rate.

The scale-weighted single-pulse rule inverts in closed form; everything else
goes through ``validated_pfa`` with geometric bracket growth followed by
bisection, which the strict monotonicity of every Pfa curve makes safe.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Optional

from .detectors import DetectorKind
from .errors import (NumericalFailureError, ParameterDomainError,
                     UnreachableTargetError)
from .oracles import AdjudicationReport, validated_pfa
from .pfa import _check_count, pfa_gm_partial_single

# Below this target the closed-form sums would need compensated summation.
_MIN_TARGET = 1e-12

_MAX_BRACKET_GROWTH = 400


def _check_target(target) -> float:
    if not (isinstance(target, (int, float)) and 0.0 < target < 1.0):
        raise ParameterDomainError(
            f"target Pfa must lie in (0, 1), got {target!r}"
        )
    if target < _MIN_TARGET:
        raise ParameterDomainError(
            f"target Pfa below {_MIN_TARGET:g} is not supported"
        )
    return float(target)


@dataclasses.dataclass(frozen=True)
class SolverConfig:
    """Target false-alarm rate plus stopping controls.

    ``abs_tol`` is on the Pfa scale and defaults to 1e-12 relative to the
    target.
    """

    target_pfa: float
    abs_tol: Optional[float] = None
    max_iterations: int = 200

    def __post_init__(self):
        target = _check_target(self.target_pfa)
        object.__setattr__(self, "target_pfa", target)
        if self.abs_tol is None:
            object.__setattr__(self, "abs_tol", 1e-12 * target)
        if not (isinstance(self.abs_tol, (int, float)) and self.abs_tol > 0.0):
            raise ParameterDomainError("abs_tol must be positive")
        object.__setattr__(self, "abs_tol", float(self.abs_tol))
        _check_count("max_iterations", self.max_iterations)


def solve_tau_partial_single(n_ref: int, target) -> float:
    """Closed-form threshold multiplier: target**(-1/n_ref) - 1."""
    n_ref = _check_count("n_ref", n_ref)
    target = _check_target(target)
    return target ** (-1.0 / n_ref) - 1.0


def solve_tau_numeric(kind: DetectorKind, n_cut: int, m_ref: int,
                      config: SolverConfig,
                      report: AdjudicationReport) -> float:
    """Find tau with |validated_pfa(tau) - target| <= abs_tol by bisection.

    The minimum-anchored rules with a single reference cell have
    tau-invariant Pfa, so no threshold exists for them; that is reported
    as an unreachable-target error, as is any target above the tau = 0
    ceiling of the curve.
    """
    n_cut = _check_count("n_cut", n_cut)
    m_ref = _check_count("m_ref", m_ref)
    if not isinstance(config, SolverConfig):
        raise ParameterDomainError("config must be a SolverConfig")
    target = config.target_pfa
    if kind.is_full and m_ref == 1:
        raise UnreachableTargetError(
            f"{kind.value} with one reference cell has tau-invariant Pfa; "
            "no threshold multiplier reaches the target"
        )
    if kind is DetectorKind.GM_PARTIAL_SINGLE:
        return solve_tau_partial_single(m_ref, target)

    quad_tol = min(1e-10, config.abs_tol / 10.0)

    def pfa_at(tau: float) -> float:
        return validated_pfa(kind, report, n_cut, m_ref, tau, tol=quad_tol)

    ceiling = pfa_at(0.0)
    if target >= ceiling:
        if target == ceiling:
            return 0.0
        raise UnreachableTargetError(
            f"target {target:g} exceeds the tau=0 ceiling {ceiling:.9g} "
            f"of {kind.value}"
        )

    lo, hi = 0.0, 1.0
    f_hi = pfa_at(hi)
    growth = 0
    while f_hi > target:
        lo, hi = hi, 2.0 * hi
        f_hi = pfa_at(hi)
        growth += 1
        if growth > _MAX_BRACKET_GROWTH:
            raise NumericalFailureError(
                f"could not bracket target {target:g} for {kind.value}",
                achieved=f_hi,
            )
    if abs(f_hi - target) <= config.abs_tol:
        return hi

    best_tau, best_err = hi, abs(f_hi - target)
    for _ in range(config.max_iterations):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        f_mid = pfa_at(mid)
        err = abs(f_mid - target)
        if err < best_err:
            best_tau, best_err = mid, err
        if err <= config.abs_tol:
            return mid
        if f_mid > target:
            lo = mid
        else:
            hi = mid
    if best_err <= config.abs_tol:
        return best_tau
    raise NumericalFailureError(
        f"bisection exhausted {config.max_iterations} iterations on "
        f"[{lo!r}, {hi!r}] for {kind.value} target {target:g}",
        achieved=best_err,
    )
