"""Closed-form finite-blocklength predictions for the three coding protocols:
fixed-rate source coding, random channel coding with a pairwise threshold
decoder, and rate-distortion coding.

Each protocol has an asymptotic step-function prediction whose threshold is
an information quantity (source entropy, channel mutual information /
capacity, rate-distortion function), and channel coding additionally carries
a finite-n complementary-error-function refinement driven by the variance of
the log information ratio.  Where enumeration is tractable the exact success
probability is computed from the type lattice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc, gammaln

from .alphabet import Channel, Distribution, JointDistribution, joint_from
from .errors import InstanceTooLarge, UndefinedRatio
from .info_measures import entropy, mutual_information, rate_distortion
from .type_classes import count_types

EXACT_TYPE_GUARD = 2 * 10**6


def codebook_size(rate: float, n: int) -> int:
    """Integer codebook size floor(exp(n * rate)); the predictions and the
    simulators share this convention.  A one-ulp nudge keeps rates that hit
    an integer exactly (e.g. n*rate = k ln 2) from flooring through it."""
    if rate <= 0 or n < 1:
        raise ValueError("rate must be positive and n >= 1")
    return int(math.floor(math.exp(min(n * rate, 700.0)) * (1.0 + 1e-12)))


# --- source coding ------------------------------------------------------------

SOURCE_DEPENDENT = "source-dependent"
UNIVERSAL = "universal"


@dataclass(frozen=True)
class SourceCodingSetup:
    source: Distribution
    rate: float
    n: int
    mode: str = SOURCE_DEPENDENT

    def __post_init__(self):
        if self.rate <= 0:
            raise ValueError("rate must be positive")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.mode not in (SOURCE_DEPENDENT, UNIVERSAL):
            raise ValueError(f"unknown mode {self.mode!r}")


def _binary_type_tables(n: int):
    k = np.arange(n + 1)
    log_binom = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
    return k, log_binom


def source_coding_exact_psuc(setup: SourceCodingSetup) -> float:
    """Exact success probability of the fixed-rate set encoder.

    A sequence is encodable iff its type T satisfies
    sum_x T(x) ln(1/Q(x)) <= R, with Q the source (source-dependent mode) or
    T itself (universal mode, i.e. H(T) <= R).  The success probability is
    the exact lattice sum of class_size * sequence probability over the
    encodable types.
    """
    p = setup.source.probs
    n, R = setup.n, setup.rate
    n_types = count_types(p.size, n)
    if n_types > EXACT_TYPE_GUARD:
        raise InstanceTooLarge(f"{n_types} types exceeds the enumeration guard")

    if p.size == 2:
        k, log_binom = _binary_type_tables(n)
        t = k / n
        types = np.stack([t, 1 - t], axis=1)
    else:
        from .type_classes import enumerate_types

        counts = np.array([t.counts for t in enumerate_types(p.size, n)], dtype=float)
        types = counts / n
        log_binom = gammaln(n + 1) - gammaln(counts + 1).sum(axis=1)

    with np.errstate(divide="ignore", invalid="ignore"):
        if setup.mode == SOURCE_DEPENDENT:
            cost = -types @ np.where(p > 0, np.log(p), -np.inf)
        else:
            cost = -np.sum(np.where(types > 0, types * np.log(np.where(types > 0, types, 1.0)), 0.0), axis=1)
        log_prob = n * types @ np.where(p > 0, np.log(p), -np.inf)
        log_prob = np.where(np.all((types == 0) | (p > 0), axis=1), log_prob, -np.inf)
    member = cost <= R
    terms = np.where(member & np.isfinite(log_prob), log_binom + log_prob, -np.inf)
    return float(np.exp(terms[np.isfinite(terms)]).sum()) if np.any(np.isfinite(terms)) else 0.0


def source_coding_asymptote(setup: SourceCodingSetup) -> int:
    """Large-n step: 1 iff rate >= source entropy (ties succeed)."""
    return 1 if setup.rate >= entropy(setup.source) else 0


# --- channel coding -------------------------------------------------------------

@dataclass(frozen=True)
class ChannelCodingPrediction:
    a: float            # mutual information of the operating joint, nats
    b: float            # variance of the log information ratio, nats^2
    rate: float
    n: int
    p_suc_step: int
    p_suc_erfc: float


def log_info_ratio_moments(joint: JointDistribution) -> tuple[float, float]:
    """(mean, variance) of ln P(x:y) under the joint; zero cells contribute 0."""
    p = joint.probs
    px = p.sum(axis=1, keepdims=True)
    py = p.sum(axis=0, keepdims=True)
    denom = px * py
    support = p > 0
    if np.any(support & (denom <= 0)):
        raise UndefinedRatio("information ratio vanishes on the support")
    v = np.zeros_like(p)
    v[support] = np.log(p[support] / denom[support])
    mean = float(np.sum(p * v))
    var = float(np.sum(p * v * v)) - mean * mean
    return mean, max(var, 0.0)


def channel_coding_prediction(channel: Channel, input_dist: Distribution,
                              rate: float, n: int) -> ChannelCodingPrediction:
    """Step and erfc predictions for random coding at the given input.

    a is the mutual information of the operating joint; b its log-ratio
    variance.  The refined prediction is (1/2) erfc(sqrt(n/2b) (R - a)),
    degenerating to the step when b = 0.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    joint = joint_from(channel, input_dist)
    a, b = log_info_ratio_moments(joint)
    step = 1 if rate < a else 0
    if b > 0:
        p_erfc = float(0.5 * erfc(math.sqrt(n / (2.0 * b)) * (rate - a)))
    else:
        p_erfc = float(step)
    return ChannelCodingPrediction(a, b, rate, n, step, p_erfc)


def channel_capacity_threshold(channel: Channel, tol: float = 1e-9) -> float:
    """Location of the asymptotic success step: the channel capacity."""
    from .info_measures import capacity

    return capacity(channel, tol).capacity_nats


def rate_achievable(capacity_nats: float, rate: float) -> bool:
    """Achievability predicate: vanishing error is possible iff R < C."""
    return rate < capacity_nats


def rate_within_converse(capacity_nats: float, rate: float) -> bool:
    """Converse predicate: reliable codes force R <= C."""
    return rate <= capacity_nats


# --- rate-distortion -------------------------------------------------------------

@dataclass(frozen=True)
class RateDistortionPrediction:
    distortion_bound: float
    rate: float
    threshold: float
    succeeds: bool


def rate_distortion_prediction(source: Distribution, d, D: float,
                               rate: float) -> RateDistortionPrediction:
    """Step prediction for distortion coding: success iff R exceeds the
    rate-distortion function at D.  At D = 0 the threshold is the source
    entropy, recovering the lossless criterion."""
    threshold = rate_distortion(source, d, D).rate_nats
    return RateDistortionPrediction(D, rate, threshold, rate > threshold)
