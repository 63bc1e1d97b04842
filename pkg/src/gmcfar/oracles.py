"""Brute-force oracles and the adjudication workflow.

Every closed form in :mod:`gmcfar.pfa` can be checked against two independent
routes: Monte Carlo in the exponential dual domain, and deterministic
quadrature of the underlying gamma-tail integrals (whose incomplete gamma
comes from scipy, a different algorithm than the Poisson sum).  For the
minimum-anchored detectors the quadrature is evaluated under both candidate
shapes of the excess-over-minimum statistic, so the competing closed forms
each have a deterministic counterpart.

``adjudicate`` runs the full comparison over a grid and issues at most one
verdict per detector; ``validated_pfa`` is the dispatch the solver and CLI
bind to.
"""

from __future__ import annotations

import dataclasses
import enum
import json
import math
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaincc

from . import pfa as _pfa
from .detectors import DetectorKind
from .errors import (InconsistentReportError, NumericalFailureError,
                     ParameterDomainError, UnsupportedConfigurationError)
from .pfa import PfaFormulaVariant, _check_count, _check_tau
from .rng import RandomStream

# 95% two-sided normal quantile used by the Wilson interval.
_Z95 = 1.959963984540054

# Cap on scratch cells per Monte Carlo batch (keeps memory under ~70 MB).
_BATCH_CELLS = 1 << 23

# Verdicts below this trial count are withheld: the preconditions for
# separating candidate forms assume at least 10**6 trials.
_VERDICT_MIN_TRIALS = 10 ** 6

DEFAULT_TAUS = (0.1, 0.5, 1.0, 2.0, 5.0)
DEFAULT_N_CUT = (1, 2, 4)
DEFAULT_M_REF = (1, 2, 4, 8, 16)

_REPORT_SCHEMA_VERSION = 1


class ExcessShape(enum.Enum):
    """Gamma shape of the reference excess over its minimum.

    M_MINUS_ONE is the order-statistics result (sum of M-1 unit spacings);
    M reproduces the density the published derivation actually integrated.
    """

    M_MINUS_ONE = "m-minus-one"
    M = "m"


@dataclasses.dataclass(frozen=True)
class EstimateWithCI:
    """Monte Carlo probability estimate with a 95% Wilson interval."""

    estimate: float
    ci_low: float
    ci_high: float
    trials: int
    seed: int
    successes: int

    def __post_init__(self):
        if self.trials < 1:
            raise ParameterDomainError("trials must be >= 1")
        if not 0 <= self.successes <= self.trials:
            raise ParameterDomainError("successes must lie in [0, trials]")
        if not (0.0 <= self.ci_low <= self.estimate <= self.ci_high <= 1.0):
            raise ParameterDomainError(
                "require 0 <= ci_low <= estimate <= ci_high <= 1"
            )

    @property
    def sigma(self) -> float:
        """Normal-scale standard error implied by the Wilson interval."""
        return (self.ci_high - self.ci_low) / (2.0 * _Z95)


def wilson_interval(successes: int, trials: int) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ParameterDomainError("trials must be >= 1")
    if not 0 <= successes <= trials:
        raise ParameterDomainError("successes must lie in [0, trials]")
    p_hat = successes / trials
    z2 = _Z95 * _Z95
    denom = 1.0 + z2 / trials
    center = (p_hat + z2 / (2.0 * trials)) / denom
    half = _Z95 * math.sqrt(
        p_hat * (1.0 - p_hat) / trials + z2 / (4.0 * trials * trials)
    ) / denom
    low = max(0.0, center - half)
    high = min(1.0, center + half)
    # At the boundary counts center - half is analytically 0 (resp. 1)
    # but rounds to either side of it; pin the endpoints so the interval
    # always brackets the point estimate.
    if successes == 0:
        low = 0.0
    if successes == trials:
        high = 1.0
    return low, high


def _make_estimate(successes: int, trials: int, seed: int) -> EstimateWithCI:
    low, high = wilson_interval(successes, trials)
    return EstimateWithCI(estimate=successes / trials, ci_low=low,
                          ci_high=high, trials=trials, seed=seed,
                          successes=successes)


def _check_trials(trials) -> int:
    return _check_count("trials", trials)


def _check_seed(seed) -> int:
    if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool):
        raise ParameterDomainError("seed must be an integer")
    if not 0 <= seed < 1 << 64:
        raise ParameterDomainError("seed must fit in 64 unsigned bits")
    return int(seed)


def _mc_dual_counts(kind: DetectorKind, n_cut: int, m_ref: int,
                    taus: Sequence[float], trials: int, seed: int) -> list[int]:
    """Success counts P(margin > 0) for several taus over shared samples.

    The stream tags exclude tau, so every tau sees the same simulated
    windows: per-point results stay reproducible and tau-invariance
    fixtures hold exactly.
    """
    base = RandomStream(seed, 0).child("dual", kind.value, n_cut, m_ref)
    s_cut, s_ref = base.child("cut"), base.child("ref")
    taus = [_check_tau(t) for t in taus]
    counts = [0] * len(taus)
    full = kind.is_full
    batch = max(1, min(trials, _BATCH_CELLS // (n_cut + m_ref)))
    done = 0
    while done < trials:
        size = min(batch, trials - done)
        xs = s_cut.exponentials(n_cut * size, start=n_cut * done)
        sum_x = xs.reshape(size, n_cut).sum(axis=1)
        ys = s_ref.exponentials(m_ref * size, start=m_ref * done).reshape(size, m_ref)
        sum_y = ys.sum(axis=1)
        if full:
            y_min = ys.min(axis=1)
            for i, tau in enumerate(taus):
                rhs = (n_cut - m_ref * tau) * y_min + tau * sum_y
                counts[i] += int(np.count_nonzero(sum_x > rhs))
        else:
            for i, tau in enumerate(taus):
                counts[i] += int(np.count_nonzero(sum_x > tau * sum_y))
        done += size
    return counts


def mc_dual_pfa(kind: DetectorKind, n_cut: int, m_ref: int, tau,
                trials: int, seed: int = 0) -> EstimateWithCI:
    """Estimate a detector's Pfa by Monte Carlo on unit exponentials.

    Works in the dual domain where every detector margin is a linear
    combination of exponential sums: the scale-weighted rules reject when
    sum X* > tau * sum Y*, the minimum-anchored rules when
    sum X* > (N - M tau) Y*min + tau * sum Y*.
    """
    n_cut = _check_count("n_cut", n_cut)
    m_ref = _check_count("m_ref", m_ref)
    trials = _check_trials(trials)
    seed = _check_seed(seed)
    if kind.is_single and n_cut != 1:
        raise ParameterDomainError(f"{kind.value} requires n_cut == 1")
    counts = _mc_dual_counts(kind, n_cut, m_ref, [tau], trials, seed)
    return _make_estimate(counts[0], trials, seed)


def _check_tol(tol) -> float:
    if not (isinstance(tol, (int, float)) and 0.0 < tol <= 1e-6):
        raise ParameterDomainError(f"tol must lie in (0, 1e-6], got {tol!r}")
    return float(tol)


def _quad_checked(func, epsrel: float, context: str) -> float:
    # epsabs=0 forces the relative criterion, which the tiny tail values
    # need; QUADPACK rejects epsrel below ~50 machine epsilons.
    epsrel = max(epsrel, 1e-13)
    out = quad(func, 0.0, np.inf, epsabs=0.0, epsrel=epsrel,
               limit=200, full_output=1)
    if len(out) > 3 or out[2].get("ier", 0) != 0:
        raise NumericalFailureError(
            f"quadrature failed to converge for {context}",
            achieved=float(out[1]),
        )
    return float(out[0])


def quadrature_pfa_partial_multi(n_cut: int, m_ref: int, tau,
                                 tol: float = 1e-10) -> float:
    """P(W1 > tau W2), W1 ~ gamma(n_cut, 1), W2 ~ gamma(m_ref, 1), by
    integrating the gamma density of W2 against the scipy incomplete gamma."""
    n = _check_count("n_cut", n_cut)
    m = _check_count("m_ref", m_ref)
    tau = _check_tau(tau)
    tol = _check_tol(tol)
    if tau == 0.0:
        return 1.0
    lg_m = math.lgamma(m)

    def integrand(t: float) -> float:
        if t <= 0.0:
            return 0.0
        return math.exp((m - 1) * math.log(t) - t - lg_m) * gammaincc(n, tau * t)

    value = _quad_checked(integrand, tol,
                          f"partial-multi n={n} m={m} tau={tau}")
    return min(max(value, 0.0), 1.0)


def quadrature_pfa_full_multi(n_cut: int, m_ref: int, tau, tol: float = 1e-10,
                              excess_shape: ExcessShape = ExcessShape.M_MINUS_ONE,
                              ) -> float:
    """Pfa of the minimum-anchored rule by nested quadrature.

    Conditions on the reference minimum T ~ Exp(m_ref) and the excess
    W2 ~ gamma(k, 1) with k chosen by ``excess_shape``; the rejection
    probability given both is the gamma tail Q(n_cut, n_cut*T + tau*W2).
    ``excess_shape=M_MINUS_ONE`` with m_ref=1 uses the degenerate W2 = 0.
    """
    n = _check_count("n_cut", n_cut)
    m = _check_count("m_ref", m_ref)
    tau = _check_tau(tau)
    tol = _check_tol(tol)
    if not isinstance(excess_shape, ExcessShape):
        raise ParameterDomainError("excess_shape must be an ExcessShape")
    k = m - 1 if excess_shape is ExcessShape.M_MINUS_ONE else m
    inner_rel = tol / 50.0
    lg_k = math.lgamma(k) if k >= 1 else 0.0

    def inner(t: float) -> float:
        if k == 0 or tau == 0.0:
            return float(gammaincc(n, n * t))

        def w_integrand(w: float) -> float:
            if w <= 0.0:
                return 0.0
            return math.exp((k - 1) * math.log(w) - w - lg_k) \
                * gammaincc(n, n * t + tau * w)

        return _quad_checked(w_integrand, inner_rel,
                             f"full-multi inner n={n} m={m} tau={tau}")

    def outer(t: float) -> float:
        return m * math.exp(-m * t) * inner(t)

    value = _quad_checked(outer, tol / 2.0,
                          f"full-multi n={n} m={m} tau={tau}")
    return min(max(value, 0.0), 1.0)


@dataclasses.dataclass(frozen=True)
class GridPointRecord:
    """Every value computed at one (n_cut, m_ref, tau) grid point."""

    n_cut: int
    m_ref: int
    tau: float
    mc: EstimateWithCI
    quadrature: float
    quadrature_excess_m: Optional[float]
    paper: Optional[float]
    candidate: Optional[float]
    oracle_consistent: bool
    paper_verdict: str
    candidate_verdict: str
    discriminates: bool
    insufficient_precision: bool


@dataclasses.dataclass(frozen=True)
class AdjudicationReport:
    """Grid-wide comparison of closed forms against the oracles.

    ``verdict`` is one of ``paper``, ``candidate``, ``use-quadrature``,
    ``no-verdict-inconsistent-oracles`` or ``no-verdict-insufficient-trials``;
    ``validated_variant`` is set only for the first two.
    """

    detector: DetectorKind
    seed: int
    trials: int
    tol: float
    points: tuple[GridPointRecord, ...]
    internally_consistent: bool
    insufficient_precision: bool
    validated_variant: Optional[PfaFormulaVariant]
    verdict: str

    def to_json(self) -> str:
        doc = {
            "schema_version": _REPORT_SCHEMA_VERSION,
            "detector": self.detector.value,
            "seed": self.seed,
            "trials": self.trials,
            "tol": self.tol,
            "points": [
                {
                    "n_cut": p.n_cut,
                    "m_ref": p.m_ref,
                    "tau": p.tau,
                    "mc_estimate": p.mc.estimate,
                    "mc_ci_low": p.mc.ci_low,
                    "mc_ci_high": p.mc.ci_high,
                    "mc_successes": p.mc.successes,
                    "quadrature": p.quadrature,
                    "quadrature_excess_m": p.quadrature_excess_m,
                    "paper": p.paper,
                    "candidate": p.candidate,
                    "oracle_consistent": p.oracle_consistent,
                    "paper_verdict": p.paper_verdict,
                    "candidate_verdict": p.candidate_verdict,
                    "discriminates": p.discriminates,
                    "insufficient_precision": p.insufficient_precision,
                }
                for p in self.points
            ],
            "internally_consistent": self.internally_consistent,
            "insufficient_precision": self.insufficient_precision,
            "validated_variant": (None if self.validated_variant is None
                                  else self.validated_variant.value),
            "verdict": self.verdict,
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "AdjudicationReport":
        doc = json.loads(text)
        return cls.from_dict(doc)

    @classmethod
    def from_dict(cls, doc: dict) -> "AdjudicationReport":
        if doc.get("schema_version") != _REPORT_SCHEMA_VERSION:
            raise ParameterDomainError(
                f"unsupported report schema: {doc.get('schema_version')!r}"
            )
        detector = DetectorKind(doc["detector"])
        seed, trials = doc["seed"], doc["trials"]
        points = []
        for p in doc["points"]:
            mc = EstimateWithCI(
                estimate=p["mc_estimate"], ci_low=p["mc_ci_low"],
                ci_high=p["mc_ci_high"], trials=trials, seed=seed,
                successes=p["mc_successes"],
            )
            points.append(GridPointRecord(
                n_cut=p["n_cut"], m_ref=p["m_ref"], tau=p["tau"], mc=mc,
                quadrature=p["quadrature"],
                quadrature_excess_m=p["quadrature_excess_m"],
                paper=p["paper"], candidate=p["candidate"],
                oracle_consistent=p["oracle_consistent"],
                paper_verdict=p["paper_verdict"],
                candidate_verdict=p["candidate_verdict"],
                discriminates=p["discriminates"],
                insufficient_precision=p["insufficient_precision"],
            ))
        variant = doc["validated_variant"]
        return cls(
            detector=detector, seed=seed, trials=trials, tol=doc["tol"],
            points=tuple(points),
            internally_consistent=doc["internally_consistent"],
            insufficient_precision=doc["insufficient_precision"],
            validated_variant=(None if variant is None
                               else PfaFormulaVariant(variant)),
            verdict=doc["verdict"],
        )


def default_grid(kind: DetectorKind) -> tuple[tuple[int, int, float], ...]:
    """Adjudication grid: single-pulse kinds sweep the reference length,
    multi-pulse kinds sweep both window sizes."""
    n_values = (1,) if kind.is_single else DEFAULT_N_CUT
    return tuple((n, m, t) for n in n_values for m in DEFAULT_M_REF
                 for t in DEFAULT_TAUS)


def _closed_forms(kind: DetectorKind, n: int, m: int, tau: float,
                  ) -> tuple[Optional[float], Optional[float]]:
    """(paper, candidate) values; candidate is None where only one form
    exists, both are None where the closed forms refuse the configuration."""
    if kind is DetectorKind.GM_PARTIAL_SINGLE:
        return _pfa.pfa_gm_partial_single(m, tau), None
    if kind is DetectorKind.GM_PARTIAL_MULTI:
        return _pfa.pfa_gm_partial_multi(n, m, tau), None
    if kind is DetectorKind.GM_FULL_SINGLE:
        return (_pfa.pfa_gm_full_single(m, tau, PfaFormulaVariant.PAPER),
                _pfa.pfa_gm_full_single(m, tau, PfaFormulaVariant.CANDIDATE))
    try:
        return (_pfa.pfa_gm_full_multi(n, m, tau, PfaFormulaVariant.PAPER),
                _pfa.pfa_gm_full_multi(n, m, tau, PfaFormulaVariant.CANDIDATE))
    except UnsupportedConfigurationError:
        return None, None


def adjudicate(kind: DetectorKind,
               grid: Optional[Sequence[tuple[int, int, float]]] = None,
               trials: int = 10_000_000, seed: int = 0,
               tol: float = 1e-10) -> AdjudicationReport:
    """Compare closed forms with the oracles over a grid and pick a verdict.

    A variant is validated only when the report is internally consistent
    (Monte Carlo inside 4 sigma of the reference quadrature everywhere),
    trials reach 10**6, the variant sits inside the 4 sigma band at every
    point it evaluates, and the competing variant falls outside somewhere.
    """
    if grid is None:
        grid = default_grid(kind)
    grid = [( _check_count("n_cut", n), _check_count("m_ref", m), _check_tau(t))
            for n, m, t in grid]
    if not grid:
        raise ParameterDomainError("grid must be non-empty")
    trials = _check_trials(trials)
    seed = _check_seed(seed)
    tol = _check_tol(tol)
    if kind.is_single and any(n != 1 for n, _, _ in grid):
        raise ParameterDomainError(f"{kind.value} grid requires n_cut == 1")

    # One shared-sample MC pass per unique (n, m); tau reuses the draws.
    groups: dict[tuple[int, int], list[float]] = {}
    for n, m, tau in grid:
        groups.setdefault((n, m), [])
        if tau not in groups[(n, m)]:
            groups[(n, m)].append(tau)
    mc_by_point: dict[tuple[int, int, float], EstimateWithCI] = {}
    for (n, m), taus in groups.items():
        counts = _mc_dual_counts(kind, n, m, taus, trials, seed)
        for tau, successes in zip(taus, counts):
            mc_by_point[(n, m, tau)] = _make_estimate(successes, trials, seed)

    points = []
    for n, m, tau in grid:
        mc = mc_by_point[(n, m, tau)]
        if kind.is_full:
            quad_ref = quadrature_pfa_full_multi(n, m, tau, tol,
                                                 ExcessShape.M_MINUS_ONE)
            quad_alt = quadrature_pfa_full_multi(n, m, tau, tol,
                                                 ExcessShape.M)
        else:
            quad_ref = quadrature_pfa_partial_multi(n, m, tau, tol)
            quad_alt = None
        paper, candidate = _closed_forms(kind, n, m, tau)

        band = 4.0 * mc.sigma
        lo, hi = mc.estimate - band, mc.estimate + band
        oracle_ok = lo <= quad_ref <= hi

        def verdict_of(value: Optional[float]) -> str:
            if value is None:
                return "not-evaluated"
            return "consistent" if lo <= value <= hi else "inconsistent"

        paper_verdict = verdict_of(paper)
        candidate_verdict = ("not-applicable" if candidate is None and paper is not None
                             else verdict_of(candidate))
        both = paper is not None and candidate is not None
        discriminates = both and (
            (paper_verdict == "consistent") != (candidate_verdict == "consistent")
        )
        shy = both and paper != candidate and not discriminates
        points.append(GridPointRecord(
            n_cut=n, m_ref=m, tau=tau, mc=mc, quadrature=quad_ref,
            quadrature_excess_m=quad_alt, paper=paper, candidate=candidate,
            oracle_consistent=oracle_ok, paper_verdict=paper_verdict,
            candidate_verdict=candidate_verdict, discriminates=discriminates,
            insufficient_precision=shy,
        ))

    internally_consistent = all(p.oracle_consistent for p in points)
    paper_ok = all(p.paper_verdict == "consistent"
                   for p in points if p.paper is not None)
    candidate_ok = all(p.candidate_verdict == "consistent"
                       for p in points if p.candidate is not None)
    has_rivalry = any(p.paper is not None and p.candidate is not None
                      and p.paper != p.candidate for p in points)
    no_separation = has_rivalry and not any(p.discriminates for p in points)

    validated: Optional[PfaFormulaVariant] = None
    if not internally_consistent:
        verdict = "no-verdict-inconsistent-oracles"
    elif trials < _VERDICT_MIN_TRIALS:
        verdict = "no-verdict-insufficient-trials"
    elif not has_rivalry:
        # Single-form kinds: validate the printed formula or fall back.
        if paper_ok and any(p.paper is not None for p in points):
            validated = PfaFormulaVariant.PAPER
            verdict = "paper"
        else:
            verdict = "use-quadrature"
    elif paper_ok and not candidate_ok:
        validated = PfaFormulaVariant.PAPER
        verdict = "paper"
    elif candidate_ok and not paper_ok:
        validated = PfaFormulaVariant.CANDIDATE
        verdict = "candidate"
    else:
        verdict = "use-quadrature"

    return AdjudicationReport(
        detector=kind, seed=seed, trials=trials, tol=tol,
        points=tuple(points),
        internally_consistent=internally_consistent,
        insufficient_precision=(trials < _VERDICT_MIN_TRIALS or no_separation),
        validated_variant=validated, verdict=verdict,
    )


def validated_pfa(kind: DetectorKind, report: AdjudicationReport,
                  n_cut: int, m_ref: int, tau, tol: float = 1e-10) -> float:
    """Single Pfa entry point: the validated closed form when the report
    names one, otherwise the reference quadrature at ``tol``."""
    n = _check_count("n_cut", n_cut)
    m = _check_count("m_ref", m_ref)
    tau = _check_tau(tau)
    if report.detector is not kind:
        raise ParameterDomainError(
            f"report covers {report.detector.value}, not {kind.value}"
        )
    if not report.internally_consistent:
        raise InconsistentReportError(
            f"oracles disagree in the {kind.value} report; "
            "no Pfa value can be trusted from it"
        )
    if kind.is_single and n != 1:
        raise ParameterDomainError(f"{kind.value} requires n_cut == 1")

    if kind is DetectorKind.GM_PARTIAL_SINGLE:
        return _pfa.pfa_gm_partial_single(m, tau)

    variant = report.validated_variant
    if variant is not None:
        if kind is DetectorKind.GM_PARTIAL_MULTI:
            return _pfa.pfa_gm_partial_multi(n, m, tau)
        if kind is DetectorKind.GM_FULL_SINGLE:
            return _pfa.pfa_gm_full_single(m, tau, variant)
        if m >= 2:
            return _pfa.pfa_gm_full_multi(n, m, tau, variant)

    if kind.is_full:
        return quadrature_pfa_full_multi(n, m, tau, tol,
                                         ExcessShape.M_MINUS_ONE)
    return quadrature_pfa_partial_multi(n, m, tau, tol)
