"""Closed-form false-alarm probabilities for the geometric-mean detectors.

Two of the four published formulas are suspected of typos, so the affected
detectors carry two candidate closed forms side by side:

* full-CFAR single pulse: ``(n/(n+1)) (1+tau)**-n`` as printed, versus
  ``(n/(n+1)) (1+tau)**-(n-1)`` from the representation
  ``Pfa = E[exp(-Ymin)] * E[exp(-tau*S)]`` with ``S ~ gamma(n-1, 1)``
  (the n=1 detector is tau-invariant, which only the second form honors);
* full-CFAR multi pulse: the printed double sum, versus a re-derivation that
  keeps the excess-over-minimum gamma shape at M-1 and retains the
  ``N**(l-n)`` binomial factor.

Neither is silently "corrected": both evaluate here, and the oracle module
decides which one the brute-force evidence supports.

All sums run over non-negative terms via stable recurrences; when a term
leaves the comfortable double range the evaluation restarts in the log
domain, so window sizes up to 10**3 neither overflow nor underflow.
"""

from __future__ import annotations

import enum
import math

import numpy as np

from .errors import ParameterDomainError, UnsupportedConfigurationError

# Linear-domain term recurrences fall back to log space outside this range.
_TERM_LO, _TERM_HI = 1e-280, 1e280


class PfaFormulaVariant(enum.Enum):
    """Which closed-form expression (or the quadrature oracle) to evaluate."""

    PAPER = "paper"
    CANDIDATE = "candidate"
    ORACLE_QUADRATURE = "quadrature"


def _check_count(name: str, value, minimum: int = 1) -> int:
    if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
        raise ParameterDomainError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ParameterDomainError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def _check_tau(tau) -> float:
    if not (isinstance(tau, (int, float, np.floating, np.integer))
            and math.isfinite(tau) and tau >= 0.0):
        raise ParameterDomainError(f"tau must be finite and >= 0, got {tau!r}")
    return float(tau)


def gamma_tail_poisson_sum(x: float, k: int) -> float:
    """P(gamma(k, 1) > x) as the finite Poisson sum sum_{l<k} x**l e**-x / l!.

    Valid for integer shape k >= 1.  For x large enough that e**-x
    underflows, the terms are accumulated in the log domain instead.
    """
    k = _check_count("k", k)
    if not (isinstance(x, (int, float, np.floating, np.integer)) and math.isfinite(x)):
        raise ParameterDomainError(f"x must be finite, got {x!r}")
    if x < 0.0:
        raise ParameterDomainError("x must be non-negative")
    x = float(x)
    if x == 0.0:
        return 1.0
    if x < 700.0:
        term = math.exp(-x)
        total = term
        for l in range(1, k):
            term *= x / l
            total += term
        return min(total, 1.0)
    # e**-x subnormal or zero: sum exp(l ln x - x - ln l!) term by term.
    log_x = math.log(x)
    logs = [l * log_x - x - math.lgamma(l + 1) for l in range(k)]
    peak = max(logs)
    if peak == -math.inf:
        return 0.0
    return math.exp(peak) * math.fsum(math.exp(v - peak) for v in logs)


def log_binomial(a: int, b: int) -> float:
    """Natural log of C(a, b).

    ``b == 0`` follows the empty-product convention C(a, 0) = 1 for any
    a >= -1; otherwise 0 <= b <= a is required.  Exact integer arithmetic is
    used while cheap; very large central coefficients switch to an exactly
    accumulated sum of logs (plain lgamma differences lose digits there).
    """
    if not isinstance(a, (int, np.integer)) or not isinstance(b, (int, np.integer)):
        raise ParameterDomainError("log_binomial arguments must be integers")
    a, b = int(a), int(b)
    if b == 0:
        if a < -1:
            raise ParameterDomainError(f"C({a}, 0) is outside the supported convention")
        return 0.0
    if b < 0 or b > a:
        raise ParameterDomainError(f"C({a}, {b}) is undefined (need 0 <= b <= a)")
    short = min(b, a - b)
    if short <= 2000:
        return math.log(math.comb(a, b))
    top = math.fsum(np.log(np.arange(a - short + 1, a + 1, dtype=np.float64)))
    bottom = math.fsum(np.log(np.arange(1, short + 1, dtype=np.float64)))
    return top - bottom


def pfa_gm_partial_single(n_ref: int, tau: float) -> float:
    """False-alarm probability of the scale-weighted single-pulse rule:
    (1 + tau)**-n_ref."""
    n_ref = _check_count("n_ref", n_ref)
    tau = _check_tau(tau)
    return (1.0 + tau) ** (-n_ref)


def pfa_gm_full_single(n_ref: int, tau: float, variant: PfaFormulaVariant) -> float:
    """False-alarm probability of the minimum-anchored single-pulse rule.

    PAPER evaluates the published ``(n/(n+1)) (1+tau)**-n``; CANDIDATE the
    re-derived ``(n/(n+1)) (1+tau)**-(n-1)``.  Pick via an adjudication
    report, not by taste.
    """
    n_ref = _check_count("n_ref", n_ref)
    tau = _check_tau(tau)
    front = n_ref / (n_ref + 1.0)
    if variant is PfaFormulaVariant.PAPER:
        return front * (1.0 + tau) ** (-n_ref)
    if variant is PfaFormulaVariant.CANDIDATE:
        return front * (1.0 + tau) ** (-(n_ref - 1))
    raise ParameterDomainError(
        "closed forms accept PAPER or CANDIDATE; use the oracles module for quadrature"
    )


def pfa_gm_partial_multi(n_cut: int, m_ref: int, tau: float) -> float:
    """False-alarm probability of the scale-weighted multi-pulse rule:
    sum_{l<N} C(M+l-1, l) tau**l / (1+tau)**(M+l).

    Equals P(W1 > tau W2) with W1 ~ gamma(N, 1) and W2 ~ gamma(M, 1).
    """
    n = _check_count("n_cut", n_cut)
    m = _check_count("m_ref", m_ref)
    tau = _check_tau(tau)

    term = (1.0 + tau) ** (-m)
    if _TERM_LO < term:
        total = term
        ratio = tau / (1.0 + tau)
        ok = True
        for l in range(n - 1):
            term *= (m + l) / (l + 1) * ratio
            if not _TERM_LO < term < _TERM_HI:
                ok = False
                break
            total += term
        if ok:
            return min(total, 1.0)
    return min(_logsum_terms(
        (log_binomial(m + l - 1, l) + _xlogy(l, tau) - (m + l) * math.log1p(tau)
         for l in range(n))
    ), 1.0)


def pfa_gm_full_multi(n_cut: int, m_ref: int, tau: float,
                      variant: PfaFormulaVariant) -> float:
    """False-alarm probability of the minimum-anchored multi-pulse rule.

    PAPER evaluates the published double sum
    ``M sum_l sum_n C(M+n-1, n) (N+M)**-(l-n+1) tau**n (1+tau)**-(M+n)``;
    CANDIDATE keeps the excess gamma shape at M-1 and the ``N**(l-n)``
    binomial factor:
    ``M sum_l sum_n C(M+n-2, n) N**(l-n) (N+M)**-(l-n+1) tau**n (1+tau)**-(M+n-1)``.

    Closed forms require m_ref >= 2; the m_ref = 1 detector is tau-invariant
    and is served by the quadrature oracle.
    """
    n = _check_count("n_cut", n_cut)
    m = _check_count("m_ref", m_ref)
    tau = _check_tau(tau)
    if variant is PfaFormulaVariant.ORACLE_QUADRATURE:
        raise ParameterDomainError(
            "closed forms accept PAPER or CANDIDATE; use the oracles module for quadrature"
        )
    if m < 2:
        raise UnsupportedConfigurationError(
            "closed-form Pfa requires m_ref >= 2; use quadrature_pfa_full_multi "
            "(the m_ref = 1 rule is tau-invariant)"
        )

    # Cauchy reorder of the double sum: Pfa = M * sum_n f(n) * G(N-1-n) with
    # G the prefix sums of g.
    if variant is PfaFormulaVariant.PAPER:
        f0 = (1.0 + tau) ** (-m)
        f_num_offset = m        # f(n+1) = f(n) * (m+n)/(n+1) * tau/(1+tau)
        g_ratio = 1.0 / (n + m)
    else:
        f0 = (1.0 + tau) ** (-(m - 1))
        f_num_offset = m - 1    # f(n+1) = f(n) * (m+n-1)/(n+1) * tau/(1+tau)
        g_ratio = n / (n + m)

    if f0 > _TERM_LO:
        ratio = tau / (1.0 + tau)
        f = f0
        g = 1.0 / (n + m)
        prefix = [g]
        ok = True
        for _ in range(n - 1):
            g *= g_ratio
            prefix.append(prefix[-1] + g)
            if not g > _TERM_LO:
                ok = False
                break
        if ok:
            total = 0.0
            for idx in range(n):
                if idx > 0:
                    f *= (f_num_offset + idx - 1) / idx * ratio
                    if not _TERM_LO < f < _TERM_HI:
                        ok = False
                        break
                total += f * prefix[n - 1 - idx]
            if ok:
                return min(m * total, 1.0)

    # Log-domain fallback over the raw double sum.
    log_m_tot = math.log(n + m)
    log1p_tau = math.log1p(tau)
    if variant is PfaFormulaVariant.PAPER:
        logs = (log_binomial(m + nn - 1, nn) - (ll - nn + 1) * log_m_tot
                + _xlogy(nn, tau) - (m + nn) * log1p_tau
                for ll in range(n) for nn in range(ll + 1))
    else:
        log_n = math.log(n)
        logs = (log_binomial(m + nn - 2, nn) + (ll - nn) * log_n
                - (ll - nn + 1) * log_m_tot
                + _xlogy(nn, tau) - (m + nn - 1) * log1p_tau
                for ll in range(n) for nn in range(ll + 1))
    return min(m * _logsum_terms(logs), 1.0)


def _xlogy(k: int, tau: float) -> float:
    """k * log(tau) with the 0 * log(0) = 0 convention used by the sums."""
    if k == 0:
        return 0.0
    return k * math.log(tau) if tau > 0.0 else -math.inf


def _logsum_terms(log_terms) -> float:
    """exp(logsumexp(...)) over an iterable of log-domain terms."""
    logs = [v for v in log_terms if v != -math.inf]
    if not logs:
        return 0.0
    peak = max(logs)
    return math.exp(peak) * math.fsum(math.exp(v - peak) for v in logs)
