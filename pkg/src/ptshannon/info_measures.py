"""Information measures in nats, plus the two variational quantities the
coding predictions need: channel capacity and the rate-distortion function.

Entropies follow the 0 ln 0 = 0 convention.  Capacity and rate-distortion are
solved by Blahut-Arimoto alternating minimization, which yields a certified
optimality gap for capacity and a slope-parametrized sweep (bisection on the
Lagrange multiplier) for the distortion constraint.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .alphabet import Channel, Distribution, JointDistribution, joint_from
from .errors import (
    DimensionMismatch,
    InfeasibleDistortion,
    NonConvergence,
)

ITERATION_CAP = 10**6
CAPACITY_TOL = 1e-9
RATE_DISTORTION_TOL = 1e-7


# --- entropies ----------------------------------------------------------------

def entropy(dist: Distribution) -> float:
    """Plain entropy H = -sum p ln p, in nats."""
    return float(-xlogy(dist.probs, dist.probs).sum())


def _entropy_raw(p: np.ndarray) -> float:
    return float(-xlogy(p, p).sum())


def joint_entropy(joint: JointDistribution) -> float:
    return _entropy_raw(joint.probs)


def conditional_entropy(joint: JointDistribution) -> float:
    """H(y|x) = H(x, y) - H(x)."""
    return joint_entropy(joint) - entropy(joint.marginal_x())


def mutual_information(joint: JointDistribution) -> float:
    """H(y:x) = H(x) + H(y) - H(x, y); tiny negative rounding clamps to 0."""
    mi = entropy(joint.marginal_x()) + entropy(joint.marginal_y()) - joint_entropy(joint)
    return max(mi, 0.0) if mi > -1e-9 else mi


def conditional_mutual_information(triple: np.ndarray) -> float:
    """Conditional mutual information H(y:x|lam) of a 3-axis joint p[x, y, lam].

    The array is the flattened product-alphabet joint over (x, y, lam);
    it must be non-negative and sum to 1.
    """
    p = np.asarray(triple, dtype=float)
    if p.ndim != 3:
        raise DimensionMismatch("conditional MI needs a 3-axis joint p[x, y, lam]")
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
        raise DimensionMismatch("triple joint must be a normalized probability array")
    h_xl = _entropy_raw(p.sum(axis=1))
    h_yl = _entropy_raw(p.sum(axis=0))
    h_xyl = _entropy_raw(p)
    h_l = _entropy_raw(p.sum(axis=(0, 1)))
    cmi = h_xl + h_yl - h_xyl - h_l
    return max(cmi, 0.0) if cmi > -1e-9 else cmi


def relative_information(p: Distribution, q: Distribution) -> float:
    """D{P//Q} = sum p ln(p/q); +inf when p puts mass where q vanishes."""
    if p.alphabet_size != q.alphabet_size:
        raise DimensionMismatch("relative information needs a common alphabet")
    support = p.probs > 0
    if np.any(q.probs[support] == 0):
        return float("inf")
    ps, qs = p.probs[support], q.probs[support]
    d = float(np.sum(ps * (np.log(ps) - np.log(qs))))
    return max(d, 0.0)


# --- channel capacity ---------------------------------------------------------

@dataclass(frozen=True)
class CapacityResult:
    capacity_nats: float
    optimal_input: Distribution
    iterations: int
    gap_bound: float


def _row_kl(rows: np.ndarray, q_out: np.ndarray) -> np.ndarray:
    """KL(row_x || q_out) for every input x; rows with mass on q=0 give +inf."""
    with np.errstate(divide="ignore", invalid="ignore"):
        logq = np.where(q_out > 0, np.log(q_out), -np.inf)
    terms = xlogy(rows, rows) - rows * logq
    return np.where(rows > 0, terms, 0.0).sum(axis=1)


def capacity(channel: Channel, tol: float = CAPACITY_TOL) -> CapacityResult:
    """Channel capacity max_P H(y:x) with a certified gap bound.

    Standard Blahut-Arimoto ascent: for the current input r, the mutual
    information I(r) = sum_x r_x KL(row_x || q) is a lower bound on C and
    max_x KL(row_x || q) is an upper bound, so the loop exits exactly when the
    sandwich closes to ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    rows = channel.rows
    r = np.full(channel.input_size, 1.0 / channel.input_size)
    for it in range(1, ITERATION_CAP + 1):
        q_out = r @ rows
        d = _row_kl(rows, q_out)
        lower = float(r @ d)
        upper = float(d.max())
        if upper - lower <= tol:
            return CapacityResult(lower, Distribution(r), it, upper - lower)
        r = r * np.exp(d - d.max())
        r = r / r.sum()
    raise NonConvergence(
        f"capacity gap still above tol={tol} after {ITERATION_CAP} iterations"
    )


# --- rate-distortion ----------------------------------------------------------

@dataclass(frozen=True)
class RateDistortionPoint:
    distortion: float
    rate_nats: float
    optimal_test_channel: Channel


def _validate_distortion_matrix(source: Distribution, d: np.ndarray) -> np.ndarray:
    d = np.asarray(d, dtype=float)
    if d.ndim != 2 or d.shape[0] != source.alphabet_size:
        raise DimensionMismatch("distortion matrix must be (source symbols) x (reproductions)")
    if np.any(d < 0):
        raise InfeasibleDistortion("distortion entries must be non-negative")
    if d.shape[0] == d.shape[1] and np.any(np.diag(d) != 0):
        raise InfeasibleDistortion("d(x, x) must vanish on the diagonal")
    return d


def _blahut_fixed_slope(p: np.ndarray, A: np.ndarray, q0: np.ndarray,
                        inner_tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Minimize I - s*E[d] at fixed slope via Blahut iteration on the output
    marginal q.  A = exp(s * d).  Returns (q, test channel rows)."""
    q = q0.copy()
    for _ in range(ITERATION_CAP):
        denom = A @ q  # per input symbol
        c = (p / denom) @ A
        q_new = q * c
        # Blahut's sandwich: convergence when max_x ln c(x_hat) over the
        # retained support is within inner_tol of 0.
        gap = float(np.max(np.where(q_new > 0, np.log(np.maximum(c, 1e-300)), -np.inf)))
        q = q_new / q_new.sum()
        if gap <= inner_tol:
            break
    else:
        raise NonConvergence("rate-distortion inner loop hit the iteration cap")
    denom = A @ q
    rows = (A * q[None, :]) / denom[:, None]
    return q, rows


def _rd_point_from_rows(source: Distribution, d: np.ndarray, rows: np.ndarray) -> tuple[float, float]:
    joint = JointDistribution(source.probs[:, None] * rows)
    avg_d = float(np.sum(joint.probs * d))
    rate = mutual_information(joint)
    return avg_d, rate


def rate_distortion(source: Distribution, d, D: float,
                    tol: float = RATE_DISTORTION_TOL) -> RateDistortionPoint:
    """Rate-distortion function: minimum H(x_hat:x) over test channels with
    average distortion at most D.

    The constrained minimum is traced by a Lagrange-slope sweep: the Blahut
    inner loop solves each fixed-slope problem and the slope is bisected until
    the achieved distortion matches D.  Boundary ties resolve toward the
    smaller rate.
    """
    d = _validate_distortion_matrix(source, d)
    if D < 0:
        raise InfeasibleDistortion("D must be non-negative")
    p = source.probs
    n_hat = d.shape[1]
    inner_tol = min(tol, 1e-9) * 1e-2

    # Rate-zero regime: the best constant reproduction already meets D.
    col_dist = p @ d
    d_max = float(col_dist.min())
    if D >= d_max:
        best = int(np.argmin(col_dist))
        rows = np.zeros((p.size, n_hat))
        rows[:, best] = 1.0
        return RateDistortionPoint(d_max, 0.0, Channel(rows))

    # Zero-distortion regime: the slope -> -inf limit keeps only d = 0 cells.
    if D <= 0:
        A = (d == 0).astype(float)
        q0 = np.full(n_hat, 1.0 / n_hat)
        _, rows = _blahut_fixed_slope(p, A, q0, inner_tol)
        avg_d, rate = _rd_point_from_rows(source, d, rows)
        return RateDistortionPoint(avg_d, rate, Channel(rows))

    # Bisection on the slope s < 0; achieved distortion is increasing in s.
    d_pos = d[d > 0]
    s_lo = -700.0 / max(float(d_pos.min()), 1e-12)  # deep-compression end
    s_lo = max(s_lo, -1e8)
    s_hi = -1e-9
    q = np.full(n_hat, 1.0 / n_hat)
    best_rows = None
    for _ in range(200):
        s = 0.5 * (s_lo + s_hi)
        q, rows = _blahut_fixed_slope(p, np.exp(s * d), q, inner_tol)
        avg_d, rate = _rd_point_from_rows(source, d, rows)
        if abs(avg_d - D) <= max(tol * 1e-2, 1e-12):
            best_rows = rows
            break
        if avg_d > D:
            s_hi = s
        else:
            s_lo = s
            best_rows = rows  # feasible side: E[d] <= D
        if s_hi - s_lo <= 1e-13 * max(1.0, abs(s_lo)):
            break
    if best_rows is None:
        best_rows = rows
    avg_d, rate = _rd_point_from_rows(source, d, best_rows)
    return RateDistortionPoint(avg_d, rate, Channel(best_rows))


def rate_distortion_curve(source: Distribution, d, grid) -> list[RateDistortionPoint]:
    """Evaluate the rate-distortion function on a grid of distortions."""
    return [rate_distortion(source, d, float(D)) for D in grid]


def distortion_from_json(text: str) -> np.ndarray:
    """Parse a distortion matrix literal {"d": [[...], ...]}."""
    doc = json.loads(text)
    if not isinstance(doc, dict) or "d" not in doc:
        raise DimensionMismatch('expected a JSON object {"d": [[...], ...]}')
    d = np.asarray(doc["d"], dtype=float)
    if d.ndim != 2:
        raise DimensionMismatch("distortion matrix must be 2-D")
    return d


def hamming_distortion(n: int) -> np.ndarray:
    return 1.0 - np.eye(n)


def binary_entropy(p: float) -> float:
    """H_b(p) in nats."""
    return float(-xlogy(p, p) - xlogy(1 - p, 1 - p))
