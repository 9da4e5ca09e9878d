"""Exact and asymptotic closed-form evaluators for secrecy outage probability
(SOP) and intercept probability (IP) under all four tag-selection rules.

Structure of every outage expression: with a = phi / (P d_s^-u_s) the squared
source-gain activation threshold,

    SOP = P1 + P2,   P1 = P(g_s^2 < a)          (tag cannot power itself)
                     P2 = P(g_s^2 > a, ratio < tau)

where ratio = (1 + gamma_d) / (1 + gamma_e) and, because the reflection
coefficient satisfies beta* g_s^2 = g_s^2 - a on the active branch, the inner
event is

    W2 < A / (g_s^2 - a) + B W3,   A = (tau-1)/(eta1 Gamma_t),  B = tau eta2/eta1,

with W2 the (order-statistic) tag->destination gain and W3 the
tag->eavesdropper gain.  Expanding the CDF of W2 into exponentials and powers
turns the g_s^2 integral into int v^k exp(-p v - q/v) dv, i.e. a Bessel-K
term, and the W3 integral into an elementary Gamma moment.  IP is the tau-
independent event gamma_d < gamma_e, and the high-power asymptotes drop the
activation threshold; both reduce to the same Gamma-moment comparisons.

Several of the tabulated source expressions contain transcription slips; the
forms implemented here are re-derived and validated against the Monte Carlo
estimator (see FORMULA_NOTES.md for the exact list of corrections).

All raw sums are kept unclamped in `raw_value`; `value` clamps to [0, 1] at
the reporting layer only.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping, Optional

from .errors import NumericalInstabilityWarning
from .specfun import (
    CompensatedSum,
    bessel_k,
    compositions,
    multinomial_delta,
    reg_lower_inc_gamma,
    reg_upper_inc_gamma,
)
from .system import ProtocolKind, SystemParams

__all__ = [
    "CANCELLATION_THRESHOLD",
    "ClosedFormReport",
    "ip_asymptotic",
    "ip_exact",
    "p1",
    "sop_asymptotic",
    "sop_exact",
]

# Alternating sums whose magnitude/result ratio exceeds this raise a
# NumericalInstabilityWarning (the CLI maps it to a dedicated exit code).
CANCELLATION_THRESHOLD = 1e12


@dataclass(frozen=True)
class ClosedFormReport:
    """One evaluated closed form: clamped value for reporting, raw value for
    diagnosing formula trouble, and the named partial sums it was built from."""

    value: float
    raw_value: float
    protocol: ProtocolKind
    kind: str  # exact_sop | exact_ip | asymptotic_sop | asymptotic_ip
    term_breakdown: Mapping[str, float]

    @classmethod
    def build(cls, raw: float, protocol: ProtocolKind, kind: str,
              breakdown: dict) -> "ClosedFormReport":
        return cls(
            value=min(max(raw, 0.0), 1.0),
            raw_value=raw,
            protocol=protocol,
            kind=kind,
            term_breakdown=MappingProxyType(dict(breakdown)),
        )


class _Derived:
    """Scalar quantities shared by every closed form for one scenario."""

    __slots__ = ("ms", "lam_s", "md", "lam_d", "me", "lam_e",
                 "a", "eta1", "eta2", "tau", "c", "n", "cap_a", "cap_b")

    def __init__(self, params: SystemParams):
        params.require_homogeneous()
        ls = params.links_of("s")[0]
        ld = params.links_of("d")[0]
        le = params.links_of("e")[0]
        self.ms, self.lam_s = ls.m, ls.lambda_tilde
        self.md, self.lam_d = ld.m, ld.lambda_tilde
        self.me, self.lam_e = le.m, le.lambda_tilde
        self.a = params.gain_threshold
        self.eta1 = params.eta1
        self.eta2 = params.eta2
        self.tau = params.tau
        self.c = self.eta2 / self.eta1
        self.n = params.n_tags
        self.cap_a = (self.tau - 1.0) / (self.eta1 * params.gamma_t)
        self.cap_b = self.tau * self.c


def _checked(acc: CompensatedSum, label: str, threshold: Optional[float]) -> float:
    limit = CANCELLATION_THRESHOLD if threshold is None else threshold
    if acc.condition > limit:
        warnings.warn(
            f"{label}: cancellation ratio {acc.condition:.3g} exceeds {limit:.3g}; "
            "the returned value may be unreliable",
            NumericalInstabilityWarning,
            stacklevel=3,
        )
    return acc.value


def _g_integral(alpha: int, p: float, q: float) -> float:
    """int_0^inf v^(alpha-1) exp(-p v - q/v) dv for integer alpha; equals
    2 (q/p)^(alpha/2) K_alpha(2 sqrt(pq)), or Gamma(alpha)/p^alpha at q=0."""
    if q == 0.0:
        if alpha <= 0:
            raise ValueError("q=0 requires alpha >= 1")
        return math.exp(math.lgamma(alpha) - alpha * math.log(p))
    return 2.0 * (q / p) ** (alpha / 2.0) * bessel_k(alpha, 2.0 * math.sqrt(p * q))


def _w1_tail_integral(d: _Derived, q_coef: float, k: int) -> float:
    """int_a^inf (w - a)^k exp(-q_coef / (w - a)) f_{g_s^2}(w) dw.

    Binomial-expands (v + a)^(ms-1) around the shifted variable v = w - a,
    leaving one Bessel-type integral per power of v."""
    pref = math.exp(d.ms * math.log(d.lam_s) - math.lgamma(d.ms) - d.lam_s * d.a)
    total = 0.0
    for p in range(d.ms):
        total += (math.comb(d.ms - 1, p) * d.a ** (d.ms - 1 - p)
                  * _g_integral(p + k + 1, d.lam_s, q_coef))
    return pref * total


def _w3_moment(d: _Derived, q: int, rate_shift: float) -> float:
    """int_0^inf w^q exp(-rate_shift w) f_{g_e^2}(w) dw."""
    return math.exp(d.me * math.log(d.lam_e) - math.lgamma(d.me)
                    + math.lgamma(d.me + q)
                    - (d.me + q) * math.log(d.lam_e + rate_shift))


def _w3_min_moment(d: _Derived, q: int, rate_shift: float,
                   threshold: Optional[float]) -> float:
    """Same moment against the minimum-order-statistic density of the
    eavesdropper gains: int w^q exp(-rate_shift w) f_min(w) dw.

    Termwise, d/dt [t^t4 e^{-lam t3 t}] = (t4 t^(t4-1) - lam t3 t^t4) e^{...},
    so each expansion term contributes
        t4 Gamma(q+t4) / s^(q+t4) - lam_e t3 Gamma(q+t4+1) / s^(q+t4+1)
    with s = lam_e t3 + rate_shift (the t4 part vanishes when t4 == 0)."""
    acc = CompensatedSum()
    for ell in range(1, d.n + 1):
        outer = math.comb(d.n, ell) * (-1.0) ** (ell + 1)
        for comp in compositions(ell, d.me + 1):
            delta = multinomial_delta(ell, comp, d.me, d.lam_e)
            t3, t4 = delta.theta1, delta.theta2
            if t3 == 0:
                continue  # constant term of F^ell; zero derivative
            s = d.lam_e * t3 + rate_shift
            term = -d.lam_e * t3 * math.exp(math.lgamma(q + t4 + 1)
                                            - (q + t4 + 1) * math.log(s))
            if t4 > 0:
                term += t4 * math.exp(math.lgamma(q + t4) - (q + t4) * math.log(s))
            acc.add(outer * delta.value * term)
    return _checked(acc, "weakest-eavesdropper moment", threshold)


def p1(params: SystemParams) -> float:
    """Probability the selected tag cannot power its circuit,
    P(g_s^2 < phi / (P d_s^-u_s))."""
    d = _Derived(params)
    return reg_lower_inc_gamma(d.ms, d.lam_s * d.a)


def _p1_parts(d: _Derived) -> tuple[float, float]:
    x = d.lam_s * d.a
    return reg_lower_inc_gamma(d.ms, x), reg_upper_inc_gamma(d.ms, x)


def _cmp_max(d: _Derived, x: float, threshold: Optional[float],
             breakdown: Optional[dict] = None) -> float:
    """P(max of n destination gains < x * W3)."""
    acc = CompensatedSum()
    for comp in compositions(d.n, d.md + 1):
        delta = multinomial_delta(d.n, comp, d.md, d.lam_d)
        term = (delta.value * x ** delta.theta2
                * _w3_moment(d, delta.theta2, d.lam_d * delta.theta1 * x))
        acc.add(term)
        if breakdown is not None:
            breakdown[f"comp{comp.parts}"] = term
    return _checked(acc, "best-destination comparison", threshold)


def _cmp_single(d: _Derived, x: float) -> float:
    """P(single destination gain < x * W3)."""
    total = 0.0
    fact = 1.0
    for j in range(d.md):
        if j > 0:
            fact *= j
        total += (d.lam_d ** j / fact) * x ** j * _w3_moment(d, j, d.lam_d * x)
    return 1.0 - total


def _cmp_min(d: _Derived, x: float, threshold: Optional[float],
             breakdown: Optional[dict] = None) -> float:
    """P(single destination gain < x * min of n eavesdropper gains)."""
    total = 0.0
    fact = 1.0
    for j in range(d.md):
        if j > 0:
            fact *= j
        term = (d.lam_d ** j / fact) * x ** j * _w3_min_moment(d, j, d.lam_d * x, threshold)
        total += term
        if breakdown is not None:
            breakdown[f"j={j}"] = term
    return 1.0 - total


def _sots_p2(d: _Derived, threshold: Optional[float], breakdown: dict) -> float:
    acc = CompensatedSum()
    for comp in compositions(d.n, d.md + 1):
        delta = multinomial_delta(d.n, comp, d.md, d.lam_d)
        t1, t2 = delta.theta1, delta.theta2
        q_coef = d.lam_d * t1 * d.cap_a
        inner = 0.0
        for q in range(t2 + 1):
            inner += (math.comb(t2, q) * d.cap_b ** q * d.cap_a ** (t2 - q)
                      * _w1_tail_integral(d, q_coef, q - t2)
                      * _w3_moment(d, q, d.lam_d * t1 * d.cap_b))
        term = delta.value * inner
        acc.add(term)
        breakdown[f"p2.comp{comp.parts}"] = term
    return _checked(acc, "best-destination outage tail", threshold)


def _single_tail(d: _Derived, threshold: Optional[float],
                 breakdown: Optional[dict] = None, minimum_stat: bool = False) -> float:
    """P(g_s^2 > a, ratio >= tau) for one tag (minimum_stat=False) or with the
    eavesdropper gain replaced by the weakest of n (minimum_stat=True)."""
    q_coef = d.lam_d * d.cap_a
    total = CompensatedSum()
    fact = 1.0
    for j in range(d.md):
        if j > 0:
            fact *= j
        inner = 0.0
        for q in range(j + 1):
            if minimum_stat:
                w3 = _w3_min_moment(d, q, d.lam_d * d.cap_b, threshold)
            else:
                w3 = _w3_moment(d, q, d.lam_d * d.cap_b)
            inner += (math.comb(j, q) * d.cap_b ** q * d.cap_a ** (j - q)
                      * _w1_tail_integral(d, q_coef, q - j) * w3)
        term = (d.lam_d ** j / fact) * inner
        total.add(term)
        if breakdown is not None:
            breakdown[f"tail.j={j}"] = term
    return _checked(total, "survival tail", threshold)


def _build_exact_sop(protocol: ProtocolKind, params: SystemParams,
                     threshold: Optional[float]) -> tuple[float, dict]:
    d = _Derived(params)
    p1_val, _ = _p1_parts(d)
    breakdown: dict = {"p1": p1_val}

    if params.rate_threshold == 0.0:
        # Capacity is clamped at zero, so it can never fall below R = 0; only
        # the dead-tag event remains.
        breakdown["p2"] = 0.0
        return p1_val, breakdown

    if protocol is ProtocolKind.SOTS:
        p2 = _sots_p2(d, threshold, breakdown)
        breakdown["p2"] = p2
        return p1_val + p2, breakdown

    if protocol is ProtocolKind.METS:
        tail = _single_tail(d, threshold, breakdown, minimum_stat=True)
        breakdown["p2"] = 1.0 - p1_val - tail
        return 1.0 - tail, breakdown

    # OTS / RTS build on the single-tag outage.
    tail = _single_tail(d, threshold, breakdown)
    single = 1.0 - tail
    breakdown["single_tag_sop"] = single
    if protocol is ProtocolKind.OTS:
        breakdown["p2"] = single - p1_val
        return single ** d.n, breakdown
    if protocol is ProtocolKind.RTS:
        breakdown["p2"] = single - p1_val
        return single, breakdown
    raise ValueError(f"unknown protocol {protocol!r}")


def _build_exact_ip(protocol: ProtocolKind, params: SystemParams,
                    threshold: Optional[float]) -> tuple[float, dict]:
    d = _Derived(params)
    p1_val, survive = _p1_parts(d)
    breakdown: dict = {"p1": p1_val}

    if protocol is ProtocolKind.SOTS:
        cmp_val = _cmp_max(d, d.c, threshold, breakdown)
    elif protocol is ProtocolKind.METS:
        cmp_val = _cmp_min(d, d.c, threshold, breakdown)
    else:
        cmp_val = _cmp_single(d, d.c)
    breakdown["p3"] = survive * cmp_val

    single = p1_val + survive * cmp_val
    if protocol is ProtocolKind.OTS:
        breakdown["single_tag_ip"] = single
        return single ** d.n, breakdown
    return single, breakdown


def _build_asymptotic(protocol: ProtocolKind, params: SystemParams, metric: str,
                      threshold: Optional[float]) -> tuple[float, dict]:
    d = _Derived(params)
    breakdown: dict = {"p1": 0.0}
    if metric == "sop" and params.rate_threshold == 0.0:
        breakdown["p2"] = 0.0
        return 0.0, breakdown
    x = d.cap_b if metric == "sop" else d.c

    if protocol is ProtocolKind.SOTS:
        val = _cmp_max(d, x, threshold, breakdown)
    elif protocol is ProtocolKind.METS:
        val = _cmp_min(d, x, threshold, breakdown)
    else:
        single = _cmp_single(d, x)
        breakdown["single_tag"] = single
        val = single ** d.n if protocol is ProtocolKind.OTS else single
    return val, breakdown


def sop_exact(protocol: ProtocolKind, params: SystemParams,
              cancellation_threshold: Optional[float] = None) -> ClosedFormReport:
    """Exact secrecy outage probability for the given selection rule."""
    raw, breakdown = _build_exact_sop(protocol, params, cancellation_threshold)
    return ClosedFormReport.build(raw, protocol, "exact_sop", breakdown)


def ip_exact(protocol: ProtocolKind, params: SystemParams,
             cancellation_threshold: Optional[float] = None) -> ClosedFormReport:
    """Exact intercept probability (dead tag, or eavesdropper SNR above the
    destination's) for the given selection rule."""
    raw, breakdown = _build_exact_ip(protocol, params, cancellation_threshold)
    return ClosedFormReport.build(raw, protocol, "exact_ip", breakdown)


def sop_asymptotic(protocol: ProtocolKind, params: SystemParams,
                   cancellation_threshold: Optional[float] = None) -> ClosedFormReport:
    """High-transmit-power SOP limit; independent of gamma_t by construction."""
    raw, breakdown = _build_asymptotic(protocol, params, "sop", cancellation_threshold)
    return ClosedFormReport.build(raw, protocol, "asymptotic_sop", breakdown)


def ip_asymptotic(protocol: ProtocolKind, params: SystemParams,
                  cancellation_threshold: Optional[float] = None) -> ClosedFormReport:
    """High-transmit-power IP limit; independent of gamma_t by construction."""
    raw, breakdown = _build_asymptotic(protocol, params, "ip", cancellation_threshold)
    return ClosedFormReport.build(raw, protocol, "asymptotic_ip", breakdown)
