"""Seeded Monte Carlo simulators of the three coding protocols.

All three draw fresh random structure per trial (annealed averaging): the
source simulator draws a source block and tests set membership; the channel
simulator draws a codebook, sends one codeword, and decodes with either the
pairwise-margin threshold decoder or maximum likelihood; the rate-distortion
simulator draws a reproduction codebook and asks whether some codeword both
clears the pairwise score margin and meets the distortion budget.

Codebooks have floor(exp(n*rate)) rows.  When that is small enough the
protocol is simulated literally; beyond the operation guard the simulators
switch to an exact conditional form: given the transmitted block, the
competing codewords are i.i.d., so the conditional success probability is a
computable function of the block's type, and one Bernoulli draw per trial
reproduces the protocol's success distribution without materializing the
codebook.  Both paths are deterministic given (config, seed) and agree in
distribution.

Trials use one substream per trial index, so reports do not depend on how
trials are scheduled across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .alphabet import Channel, Distribution, RngStream
from .coding import SOURCE_DEPENDENT, SourceCodingSetup, codebook_size
from .errors import CodebookTooLarge, DegenerateMarginal, DimensionMismatch
from .info_measures import _validate_distortion_matrix

OPS_GUARD = 10**9
LATTICE_GUARD = 4 * 10**6


@dataclass(frozen=True)
class Codebook:
    """Random code: row m holds codeword m."""

    words: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.words)
        if w.ndim != 2 or w.size == 0:
            raise DimensionMismatch("codebook must be a non-empty 2-D matrix")
        object.__setattr__(self, "words", w)

    @property
    def size(self) -> int:
        return self.words.shape[0]

    @property
    def blocklength(self) -> int:
        return self.words.shape[1]


@dataclass(frozen=True)
class TrialReport:
    successes: int
    trials: int
    p_hat: float
    ci95_halfwidth: float
    seed: int


def _report(successes: int, trials: int, rng: RngStream) -> TrialReport:
    p = successes / trials
    half = 1.96 * math.sqrt(max(p * (1 - p), 0.0) / trials)
    return TrialReport(int(successes), trials, p, half, rng.seed)


def _sample_rows(rows: np.ndarray, x: np.ndarray, gen: np.random.Generator) -> np.ndarray:
    """One draw from rows[x_j] for each position j."""
    cum = np.cumsum(rows, axis=1)
    u = gen.random(x.size)
    return (u[:, None] > cum[x]).sum(axis=1)


def _masked_dot(counts: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Row-wise sum of counts*values skipping zero counts, so absent -inf
    values do not poison the result.  Both lattice construction and
    transmitted-block scoring go through here, keeping floats bit-identical."""
    with np.errstate(invalid="ignore"):
        terms = np.where(counts > 0, counts * values[None, :], 0.0)
    return terms.sum(axis=1)


# --- source coding ------------------------------------------------------------

def simulate_source_coding(setup: SourceCodingSetup, trials: int, rng: RngStream) -> TrialReport:
    """Draw blocks i.i.d. from the source; success iff the block's type lies
    in the fixed-rate acceptance set (membership computed from the type)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    p = setup.source.probs
    with np.errstate(divide="ignore"):
        neglog = np.where(p > 0, -np.log(p), np.inf)
    successes = 0
    for i in range(trials):
        gen = rng.substream(i).generator()
        counts = np.bincount(gen.choice(p.size, size=setup.n, p=p), minlength=p.size)
        if setup.mode == SOURCE_DEPENDENT:
            cost = float(np.where(counts > 0, counts * neglog, 0.0).sum()) / setup.n
        else:
            t = counts[counts > 0] / setup.n
            cost = float(-(t * np.log(t)).sum())
        successes += cost <= setup.rate
    return _report(successes, trials, rng)


# --- score lattices -------------------------------------------------------------

class _Lattice:
    """Distribution of one random codeword's score, sorted, with log-scale
    tail lookups."""

    def __init__(self, values: np.ndarray, log_pmf: np.ndarray):
        order = np.argsort(values, kind="stable")
        self.values = values[order]
        self.log_pmf = log_pmf[order]
        with np.errstate(divide="ignore"):
            self._suffix = np.logaddexp.accumulate(self.log_pmf[::-1])[::-1]

    def log_tail_geq(self, t: float) -> float:
        i = np.searchsorted(self.values, t, side="left")
        return float(self._suffix[i]) if i < self.values.size else -math.inf

    def log_tail_gt(self, t: float) -> float:
        i = np.searchsorted(self.values, t, side="right")
        return float(self._suffix[i]) if i < self.values.size else -math.inf

    def log_mass_eq(self, t: float) -> float:
        lo = np.searchsorted(self.values, t, side="left")
        hi = np.searchsorted(self.values, t, side="right")
        if hi == lo:
            return -math.inf
        return float(np.logaddexp.reduce(self.log_pmf[lo:hi]))


def _composition_lattice(m: int, col_values: np.ndarray, col_logp: np.ndarray,
                         companion: np.ndarray | None = None):
    """Distribution of the sum of m i.i.d. draws from a finite value set,
    enumerated over occupancy vectors with multinomial weights."""
    from .type_classes import compositions

    k = col_values.size
    if k == 2:
        j = np.arange(m + 1, dtype=float)
        counts = np.stack([m - j, j], axis=1)
    else:
        counts = np.array(list(compositions(m, k)), dtype=float)
        if counts.shape[0] > LATTICE_GUARD:
            raise CodebookTooLarge("per-group composition lattice exceeds the guard")
    with np.errstate(invalid="ignore"):
        logw = np.where(counts > 0, counts * col_logp[None, :], 0.0)
    log_pmf = (gammaln(m + 1) - gammaln(counts + 1).sum(axis=1)) + logw.sum(axis=1)
    values = _masked_dot(counts, col_values)
    if companion is None:
        return values, log_pmf
    return values, log_pmf, counts @ companion


def _fold(values_a, logp_a, values_b, logp_b, extra_a=None, extra_b=None):
    """Outer sum of two independent lattices (values add, log-probs add)."""
    if values_a.size * values_b.size > LATTICE_GUARD:
        raise CodebookTooLarge(
            "conditional score lattice exceeds the guard; materialize instead"
        )
    v = (values_a[:, None] + values_b[None, :]).ravel()
    lp = (logp_a[:, None] + logp_b[None, :]).ravel()
    if extra_a is None:
        return v, lp
    e = (extra_a[:, None] + extra_b[None, :]).ravel()
    return v, lp, e


def _log_pow_one_minus(log_eps: float, log_m: float) -> float:
    """ln((1 - eps)^M) from ln(eps) and ln(M); exact for tiny eps even when
    M is far beyond integer range."""
    if log_eps == -math.inf:
        return 0.0
    if log_eps >= 0.0:
        return -math.inf
    if log_eps > -30.0:
        return math.exp(log_m) * math.log1p(-math.exp(log_eps))
    return -math.exp(log_m + log_eps)


# --- channel coding -------------------------------------------------------------

def _column_signature(col: np.ndarray, probs: np.ndarray) -> tuple:
    return tuple(sorted((float(v), float(p)) for v, p in zip(col, probs) if p > 0))


class _ChannelConditional:
    """Per-output-type cache of the competitor score distribution.

    Scores are per-symbol log likelihoods; only score differences enter the
    decoders, so common output-marginal terms are dropped.  When every output
    symbol induces the same score law on a random input symbol (true for
    symmetric channels with their capacity input), the per-output groups pool
    into a single lattice of size O(n).
    """

    def __init__(self, channel: Channel, input_dist: Distribution):
        self.rows = channel.rows
        self.p_in = input_dist.probs
        with np.errstate(divide="ignore"):
            self.g = np.where(self.rows > 0, np.log(self.rows), -np.inf)
            self.log_p_in = np.where(self.p_in > 0, np.log(self.p_in), -np.inf)
        sig0 = _column_signature(self.g[:, 0], self.p_in)
        self.mergeable = all(
            _column_signature(self.g[:, y], self.p_in) == sig0
            for y in range(1, self.rows.shape[1])
        )
        self._cache: dict[tuple, _Lattice] = {}

    def lattice(self, y_counts: tuple[int, ...]) -> _Lattice:
        key = ("merged", sum(y_counts)) if self.mergeable else y_counts
        if key in self._cache:
            return self._cache[key]
        if self.mergeable:
            v, lp = _composition_lattice(sum(y_counts), self.g[:, 0], self.log_p_in)
        else:
            v, lp = np.zeros(1), np.zeros(1)
            for y, m in enumerate(y_counts):
                if m == 0:
                    continue
                gv, glp = _composition_lattice(m, self.g[:, y], self.log_p_in)
                v, lp = _fold(v, lp, gv, glp)
        lat = _Lattice(v, lp)
        self._cache[key] = lat
        return lat

    def true_score(self, joint_counts: np.ndarray) -> float:
        """Transmitted codeword's score, computed with the same count-vector
        arithmetic as the lattice so exact-equality lookups are meaningful."""
        if self.mergeable:
            base = self.g[:, 0]
            total = np.zeros(base.size)
            for y in range(self.rows.shape[1]):
                col = self.g[:, y]
                for x in range(self.rows.shape[0]):
                    c = int(joint_counts[x, y])
                    if c == 0:
                        continue
                    total[int(np.nonzero(base == col[x])[0][0])] += c
            return float(_masked_dot(total[None, :], base)[0])
        score = 0.0
        for y in range(self.rows.shape[1]):
            counts = joint_counts[:, y].astype(float)
            if counts.sum() == 0:
                continue
            score += float(_masked_dot(counts[None, :], self.g[:, y])[0])
        return score


def simulate_channel_coding(channel: Channel, input_dist: Distribution, rate: float,
                            n: int, trials: int, decoder: str = "threshold",
                            rng: RngStream | None = None, *,
                            fresh_codebook: bool = True,
                            method: str = "auto",
                            ops_guard: int = OPS_GUARD) -> TrialReport:
    """Random-coding Monte Carlo through a memoryless channel.

    decoder:
      ``threshold``: the transmitted index succeeds iff it beats every
      competitor's log likelihood by more than n*rate, making it the unique
      index passing all pairwise margins; no passer counts as failure.
      ``ml``: argmax log likelihood with uniform tie-break.

    method ``auto`` materializes codebooks while N_m*n*trials fits the guard,
    otherwise switches to the exact conditional form (fresh codebooks only).
    """
    if rng is None:
        raise ValueError("an RngStream is required")
    if decoder not in ("threshold", "ml"):
        raise ValueError("decoder must be 'threshold' or 'ml'")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if channel.input_size != input_dist.alphabet_size:
        raise DimensionMismatch("input distribution does not match the channel")
    n_m = codebook_size(rate, n)
    if n_m < 2:
        raise ValueError("codebook needs at least 2 rows; raise rate or n")

    cost = float(n_m) * n * trials
    if method == "auto":
        method = "materialize" if cost <= ops_guard else "conditional"
    if method == "materialize":
        if cost > ops_guard:
            raise CodebookTooLarge(
                f"materialized run needs ~{cost:.2e} operations (guard {ops_guard:.0e})"
            )
        return _channel_materialized(channel, input_dist, rate, n, trials,
                                     decoder, rng, fresh_codebook, n_m)
    if method != "conditional":
        raise ValueError("method must be 'auto', 'materialize', or 'conditional'")
    if not fresh_codebook:
        raise CodebookTooLarge("fixed-codebook runs require materialization")
    return _channel_conditional(channel, input_dist, rate, n, trials, decoder, rng, n_m)


def _channel_materialized(channel, input_dist, rate, n, trials, decoder, rng,
                          fresh_codebook, n_m) -> TrialReport:
    rows = channel.rows
    with np.errstate(divide="ignore"):
        log_rows = np.where(rows > 0, np.log(rows), -np.inf)
    p_in = input_dist.probs
    margin = n * rate
    fixed_words = None
    if not fresh_codebook:
        fixed_words = rng.substream(2**31).generator().choice(
            p_in.size, size=(n_m, n), p=p_in)
    successes = 0
    for i in range(trials):
        gen = rng.substream(i).generator()
        words = fixed_words if fixed_words is not None else gen.choice(
            p_in.size, size=(n_m, n), p=p_in)
        m = int(gen.integers(n_m))
        y = _sample_rows(rows, words[m], gen)
        picked = log_rows[words, y[None, :]]
        with np.errstate(invalid="ignore"):
            scores = np.where(np.isneginf(picked).any(axis=1), -np.inf,
                              np.where(np.isfinite(picked), picked, 0.0).sum(axis=1))
        s_true = scores[m]
        others = np.delete(scores, m)
        top = others.max() if others.size else -math.inf
        if not np.isfinite(s_true):
            continue
        if decoder == "threshold":
            successes += True if top == -math.inf else bool(s_true - top > margin)
        else:
            if s_true > top:
                successes += 1
            elif s_true == top:
                ties = 1 + int(np.count_nonzero(others == top))
                successes += bool(gen.random() < 1.0 / ties)
    return _report(successes, trials, rng)


def _channel_conditional(channel, input_dist, rate, n, trials, decoder, rng, n_m) -> TrialReport:
    cond = _ChannelConditional(channel, input_dist)
    rows = channel.rows
    p_in = input_dist.probs
    successes = 0
    for i in range(trials):
        gen = rng.substream(i).generator()
        x = gen.choice(p_in.size, size=n, p=p_in)
        y = _sample_rows(rows, x, gen)
        joint_counts = np.zeros((p_in.size, rows.shape[1]), dtype=np.int64)
        np.add.at(joint_counts, (x, y), 1)
        lat = cond.lattice(tuple(int(c) for c in joint_counts.sum(axis=0)))
        s_true = cond.true_score(joint_counts)
        if decoder == "threshold":
            # pass iff every one of the N_m - 1 rivals scores below s - n*rate
            log_tail = lat.log_tail_geq(s_true - n * rate)
            p_win = math.exp(_log_pow_one_minus(log_tail, math.log(n_m - 1)))
        else:
            p_win = _ml_win_probability(lat, s_true, n_m)
        successes += bool(gen.random() < p_win)
    return _report(successes, trials, rng)


def _ml_win_probability(lat: _Lattice, s_true: float, n_m: int) -> float:
    """Chance that the transmitted word wins the argmax with uniform
    tie-break: [(1-p_gt)^Nm - (1-p_gt-p_eq)^Nm] / (Nm * p_eq)."""
    log_gt = lat.log_tail_gt(s_true)
    log_eq = lat.log_mass_eq(s_true)
    log_nm = math.log(n_m)
    log_x = _log_pow_one_minus(log_gt, log_nm)
    if log_x == -math.inf:
        return 0.0
    if log_eq == -math.inf:
        return math.exp(log_x)
    log_b = log_nm + log_eq
    if log_b < -30.0:
        return math.exp(log_x)
    log_y = _log_pow_one_minus(np.logaddexp(log_gt, log_eq), log_nm)
    d_l = log_y - log_x
    frac = -math.expm1(d_l) if d_l > -700.0 else 1.0
    if frac <= 0.0:
        return math.exp(log_x)
    return math.exp(log_x + math.log(frac) - log_b)


# --- rate-distortion --------------------------------------------------------------

class _DistortionConditional:
    """Per-source-type cache of one random codeword's (score, distortion) law."""

    def __init__(self, source: Distribution, test_channel: Channel, d: np.ndarray):
        if test_channel.input_size != source.alphabet_size:
            raise DimensionMismatch("test channel does not match the source")
        self.q_hat = source.probs @ test_channel.rows
        if np.any(self.q_hat <= 0):
            raise DegenerateMarginal("reproduction marginal has a zero entry")
        joint = source.probs[:, None] * test_channel.rows  # (x, x_hat)
        with np.errstate(divide="ignore"):
            # score of reproduction symbol against source symbol; the common
            # source-block terms cancel in pairwise comparisons
            self.g = np.where(joint.T > 0,
                              np.log(joint.T) - np.log(self.q_hat)[:, None],
                              -np.inf)  # (x_hat, x)
            self.log_q_hat = np.log(self.q_hat)
        self.d = np.asarray(d, dtype=float)
        self._cache: dict[tuple, tuple] = {}

    def law(self, x_counts: tuple[int, ...]):
        if x_counts in self._cache:
            return self._cache[x_counts]
        v, lp, dist = np.zeros(1), np.zeros(1), np.zeros(1)
        for x, m in enumerate(x_counts):
            if m == 0:
                continue
            gv, glp, gd = _composition_lattice(m, self.g[:, x], self.log_q_hat,
                                               companion=self.d[x, :])
            v, lp, dist = _fold(v, lp, gv, glp, extra_a=dist, extra_b=gd)
        out = (v, lp, dist)
        self._cache[x_counts] = out
        return out


def _rd_fail_probability(values, log_pmf, dist_totals, budget: float,
                         margin: float, n_m: int) -> float:
    """P(no codeword both meets the budget and clears the pairwise margin).

    Success happens iff the best budget-meeting codeword scores above the
    best non-meeting codeword minus the margin.  Failure decomposes over the
    location v of the non-meeting maximum:
      P(fail) = sum_v [ G(v)^Nm - G(v-)^Nm ],
    where G(v) is the per-codeword chance of landing in
    (non-meeting, score <= v) or (meeting, score <= v - margin), and G(v-)
    uses a strict inequality at v.  Complement masses are accumulated in log
    scale so powers with astronomically large Nm stay exact.
    """
    meet = dist_totals <= budget
    if not np.any(~meet):
        return 0.0  # every codeword meets the budget; the top one passes
    lat_meet = _Lattice(values[meet], log_pmf[meet]) if np.any(meet) else None
    lat_not = _Lattice(values[~meet], log_pmf[~meet])
    log_nm = math.log(n_m)

    def meet_above(t: float) -> float:
        return lat_meet.log_tail_gt(t) if lat_meet is not None else -math.inf

    p_fail = 0.0
    for v in np.unique(lat_not.values):
        log_meet_gt = meet_above(v - margin)
        eps1 = np.logaddexp(lat_not.log_tail_gt(v), log_meet_gt)
        eps0 = np.logaddexp(lat_not.log_tail_geq(v), log_meet_gt)
        p_fail += math.exp(_log_pow_one_minus(eps1, log_nm)) \
            - math.exp(_log_pow_one_minus(eps0, log_nm))
    return min(max(p_fail, 0.0), 1.0)


def simulate_rate_distortion(source: Distribution, test_channel: Channel, d, D: float,
                             rate: float, n: int, trials: int,
                             rng: RngStream | None = None, *,
                             method: str = "auto",
                             ops_guard: int = OPS_GUARD) -> TrialReport:
    """Covering Monte Carlo for distortion coding.

    Each trial draws a source block and a fresh codebook i.i.d. from the
    reproduction marginal of source * test_channel.  The trial succeeds iff
    some codeword passes the pairwise score margins at the given rate and its
    average distortion against the block is at most D.
    """
    if rng is None:
        raise ValueError("an RngStream is required")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    d = _validate_distortion_matrix(source, d)
    if D < 0:
        raise ValueError("D must be non-negative")
    cond = _DistortionConditional(source, test_channel, d)
    n_m = codebook_size(rate, n)
    if n_m < 2:
        raise ValueError("codebook needs at least 2 rows; raise rate or n")
    budget = n * D + 1e-9 * max(1.0, n * D)
    margin = n * rate

    cost = float(n_m) * n * trials
    if method == "auto":
        method = "materialize" if cost <= ops_guard else "conditional"
    if method == "materialize":
        if cost > ops_guard:
            raise CodebookTooLarge(
                f"materialized run needs ~{cost:.2e} operations (guard {ops_guard:.0e})"
            )
        return _rd_materialized(source, cond, d, budget, margin, n, trials, rng, n_m)
    if method != "conditional":
        raise ValueError("method must be 'auto', 'materialize', or 'conditional'")
    return _rd_conditional(source, cond, budget, margin, n, trials, rng, n_m)


def _rd_materialized(source, cond, d, budget, margin, n, trials, rng, n_m) -> TrialReport:
    p = source.probs
    successes = 0
    for i in range(trials):
        gen = rng.substream(i).generator()
        x = gen.choice(p.size, size=n, p=p)
        words = gen.choice(cond.q_hat.size, size=(n_m, n), p=cond.q_hat)
        picked = cond.g[words, x[None, :]]
        with np.errstate(invalid="ignore"):
            scores = np.where(np.isneginf(picked).any(axis=1), -np.inf,
                              np.where(np.isfinite(picked), picked, 0.0).sum(axis=1))
        dists = d[x[None, :], words].sum(axis=1)
        meets = dists <= budget
        if not np.any(meets):
            continue
        s_w = scores[meets].max()
        s_n = scores[~meets].max() if np.any(~meets) else -math.inf
        if s_n == -math.inf:
            successes += bool(s_w > -math.inf)
        else:
            successes += bool(s_w > s_n - margin)
    return _report(successes, trials, rng)


def _rd_conditional(source, cond, budget, margin, n, trials, rng, n_m) -> TrialReport:
    p = source.probs
    p_fail_by_type: dict[tuple, float] = {}
    successes = 0
    for i in range(trials):
        gen = rng.substream(i).generator()
        x = gen.choice(p.size, size=n, p=p)
        key = tuple(int(c) for c in np.bincount(x, minlength=p.size))
        if key not in p_fail_by_type:
            v, lp, dist = cond.law(key)
            p_fail_by_type[key] = _rd_fail_probability(v, lp, dist, budget, margin, n_m)
        successes += bool(gen.random() >= p_fail_by_type[key])
    return _report(successes, trials, rng)
