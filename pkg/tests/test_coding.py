"""Finite-blocklength coding predictions."""

import math

import numpy as np
import pytest

from ptshannon import (
    Channel,
    SourceCodingSetup,
    binary_entropy,
    binary_symmetric_channel,
    channel_capacity_threshold,
    channel_coding_prediction,
    codebook_size,
    entropy,
    hamming_distortion,
    make_distribution,
    rate_distortion_prediction,
    source_coding_asymptote,
    source_coding_exact_psuc,
    uniform_distribution,
)
from ptshannon.coding import rate_achievable, rate_within_converse
from ptshannon.errors import InstanceTooLarge

LN2 = math.log(2.0)


def test_codebook_size_convention():
    assert codebook_size(0.5, 10) == int(math.floor(math.exp(5.0)))
    assert codebook_size(LN2, 4) == 16
    with pytest.raises(ValueError):
        codebook_size(-0.1, 10)


# --- source coding -------------------------------------------------------------

def test_exact_psuc_saturates_when_every_block_is_encodable():
    src = make_distribution([0.9, 0.1])
    # universal acceptance costs are capped at ln 2
    p = source_coding_exact_psuc(SourceCodingSetup(src, LN2 + 0.01, 64, "universal"))
    assert p == pytest.approx(1.0, abs=1e-11)
    # source-dependent costs are capped at ln(1/min p)
    p = source_coding_exact_psuc(
        SourceCodingSetup(src, -math.log(0.1) + 0.01, 64))
    assert p == pytest.approx(1.0, abs=1e-11)
    # uniform source: both caps coincide at ln(alphabet size)
    for mode in ("source-dependent", "universal"):
        p = source_coding_exact_psuc(
            SourceCodingSetup(uniform_distribution(2), LN2 + 0.01, 64, mode))
        assert p == pytest.approx(1.0, abs=1e-11)


def test_exact_psuc_empty_below_min_cost():
    src = make_distribution([0.9, 0.1])
    rate = float(-np.log(0.9)) - 0.01  # below the cheapest block
    assert source_coding_exact_psuc(SourceCodingSetup(src, rate, 50)) == 0.0


def test_exact_psuc_above_entropy_is_near_one():
    src = make_distribution([0.9, 0.1])
    p = source_coding_exact_psuc(SourceCodingSetup(src, 0.5, 400))
    assert p >= 0.99


def test_exact_psuc_matches_direct_binomial_oracle():
    """Membership is a binomial tail: cost <= R iff enough heavy symbols."""
    from scipy.stats import binom

    src = make_distribution([0.9, 0.1])
    n, rate = 150, 0.4
    # cost(k) = -(k ln .9 + (n-k) ln .1)/n <= rate  <=>  k >= kmin
    c0, c1 = -math.log(0.9), -math.log(0.1)
    kmin = math.ceil((c1 - rate) * n / (c1 - c0) - 1e-12)
    oracle = float(binom.sf(kmin - 1, n, 0.9))
    assert source_coding_exact_psuc(SourceCodingSetup(src, rate, n)) == pytest.approx(
        oracle, abs=1e-12)


def test_exact_psuc_three_letter_alphabet():
    src = make_distribution([0.6, 0.3, 0.1])
    p = source_coding_exact_psuc(SourceCodingSetup(src, entropy(src) + 0.15, 60))
    assert 0.5 < p <= 1.0


def test_exact_psuc_guard():
    src = uniform_distribution(4)
    with pytest.raises(InstanceTooLarge):
        source_coding_exact_psuc(SourceCodingSetup(src, 0.5, 5000))


def test_asymptote_step_with_inclusive_tie():
    src = make_distribution([0.9, 0.1])
    h = entropy(src)
    assert source_coding_asymptote(SourceCodingSetup(src, h + 0.01, 10)) == 1
    assert source_coding_asymptote(SourceCodingSetup(src, h - 0.01, 10)) == 0
    assert source_coding_asymptote(SourceCodingSetup(src, h, 10)) == 1
    assert source_coding_asymptote(
        SourceCodingSetup(uniform_distribution(3), math.log(3), 10)) == 1


def test_exact_psuc_converges_to_step():
    src = make_distribution([0.9, 0.1])
    h = entropy(src)
    for mode in ("source-dependent", "universal"):
        hi = source_coding_exact_psuc(SourceCodingSetup(src, h + 0.05, 800, mode))
        lo = source_coding_exact_psuc(SourceCodingSetup(src, h - 0.05, 800, mode))
        assert hi >= 0.98
        assert lo <= 0.02


def test_universal_and_source_dependent_share_the_step():
    """No ordering is asserted between the two modes at finite n; both must
    converge to the same step at the source entropy."""
    src = make_distribution([0.9, 0.1])
    h = entropy(src)
    for mode in ("source-dependent", "universal"):
        vals = [source_coding_exact_psuc(SourceCodingSetup(src, h + 0.05, n, mode))
                for n in (200, 400, 800, 1600)]
        assert all(b > a for a, b in zip(vals, vals[1:]))
        assert vals[-1] > 0.99
        lows = [source_coding_exact_psuc(SourceCodingSetup(src, h - 0.05, n, mode))
                for n in (200, 800)]
        assert lows[-1] < 0.02


# --- channel coding -------------------------------------------------------------

def test_prediction_at_rate_equal_mi_is_half():
    ch = binary_symmetric_channel(0.11)
    u = uniform_distribution(2)
    a = channel_coding_prediction(ch, u, 0.3, 500).a
    pred = channel_coding_prediction(ch, u, a, 500)  # exact tie
    assert pred.p_suc_erfc == pytest.approx(0.5, abs=1e-12)
    assert pred.p_suc_step == 0  # strict comparison at the tie


def test_prediction_noiseless_channel_degenerates_to_step():
    pred = channel_coding_prediction(Channel(np.eye(2)), uniform_distribution(2), 0.5, 100)
    assert pred.b == 0.0
    assert pred.p_suc_erfc == pred.p_suc_step == 1
    pred = channel_coding_prediction(Channel(np.eye(2)), uniform_distribution(2), 0.8, 100)
    assert pred.p_suc_erfc == pred.p_suc_step == 0


def test_prediction_moments_match_direct_sums():
    ch = binary_symmetric_channel(0.11)
    u = uniform_distribution(2)
    pred = channel_coding_prediction(ch, u, 0.3, 250)
    v_same, v_diff = math.log(2 * 0.89), math.log(2 * 0.11)
    a = 0.89 * v_same + 0.11 * v_diff
    b = 0.89 * v_same**2 + 0.11 * v_diff**2 - a * a
    assert pred.a == pytest.approx(a, abs=1e-12)
    assert pred.b == pytest.approx(b, abs=1e-12)
    assert pred.b >= 0
    expected = 0.5 * math.erfc(math.sqrt(250 / (2 * b)) * (0.3 - a))
    assert pred.p_suc_erfc == pytest.approx(expected, abs=1e-12)


def test_prediction_b_nonnegative_random_channels():
    gen = np.random.default_rng(21)
    for _ in range(25):
        rows = gen.random((3, 3)) + 0.02
        rows /= rows.sum(1, keepdims=True)
        w = gen.random(3) + 0.05
        pred = channel_coding_prediction(Channel(rows), make_distribution(w), 0.2, 50)
        assert pred.b >= 0


def test_prediction_monotonicity():
    ch = binary_symmetric_channel(0.11)
    u = uniform_distribution(2)
    rates = np.linspace(0.05, 0.6, 40)
    vals = [channel_coding_prediction(ch, u, float(r), 300).p_suc_erfc for r in rates]
    assert all(b <= a + 1e-15 for a, b in zip(vals, vals[1:]))
    a = channel_coding_prediction(ch, u, 0.3, 1).a
    below = [channel_coding_prediction(ch, u, 0.3, n).p_suc_erfc
             for n in (100, 200, 400, 800)]
    assert 0.3 < a
    assert all(b >= x for x, b in zip(below, below[1:]))


def test_capacity_threshold_and_predicates():
    assert channel_capacity_threshold(Channel(np.eye(2))) == pytest.approx(LN2, abs=1e-9)
    assert channel_capacity_threshold(
        Channel(np.array([[0.4, 0.6], [0.4, 0.6]]))) == pytest.approx(0.0, abs=1e-9)
    c = channel_capacity_threshold(binary_symmetric_channel(0.11))
    assert c == pytest.approx(LN2 - binary_entropy(0.11), abs=1e-9)
    assert rate_achievable(c, c - 0.01) and not rate_achievable(c, c)
    assert rate_within_converse(c, c) and not rate_within_converse(c, c + 1e-6)


# --- rate-distortion -------------------------------------------------------------

def test_rd_prediction_zero_distortion():
    src = make_distribution([0.9, 0.1])
    pred = rate_distortion_prediction(src, hamming_distortion(2), 0.0, 0.4)
    assert pred.threshold == pytest.approx(entropy(src), abs=1e-7)
    assert pred.succeeds


def test_rd_prediction_large_distortion():
    src = make_distribution([0.9, 0.1])
    pred = rate_distortion_prediction(src, hamming_distortion(2), 0.9, 0.01)
    assert pred.threshold == 0.0
    assert pred.succeeds


def test_rd_prediction_binary_hamming():
    pred = rate_distortion_prediction(uniform_distribution(2), hamming_distortion(2),
                                      0.1, 0.5)
    assert pred.threshold == pytest.approx(LN2 - binary_entropy(0.1), abs=1e-6)
    assert pred.succeeds
    pred_lo = rate_distortion_prediction(uniform_distribution(2), hamming_distortion(2),
                                         0.1, 0.3)
    assert not pred_lo.succeeds
