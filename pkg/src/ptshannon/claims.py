"""Claim-verification battery: exact counting identities, asymptotic size
estimates, and polytope-integral oracles, each reported as one CSV row
(check, detail, value, reference, error, tolerance, status).

Status is ``pass``/``fail`` for gated checks and ``info`` for quantities that
are reported rather than gated (known approximation-regime mismatches are
surfaced with their measured values instead of being absorbed).
"""

from __future__ import annotations

import math

import numpy as np

from .alphabet import Distribution, RngStream, uniform_distribution
from .polytope import (
    SimplexGaussian,
    SmoothedDelta,
    conditional_simplex_gaussian_integral,
    det_first_order,
    dirichlet_integral,
    sherman_morrison,
    simplex_gaussian_integral,
    simplex_mc_integral,
    smoothed_delta_normalization,
)
from .saddle import saddle_normalization_estimate
from .type_classes import (
    SequenceType,
    class_size,
    class_size_int,
    count_types,
    enumerate_types,
    iid_type_probability,
    type_count_identity_check,
    type_density_estimate,
)

Row = tuple


def _row(check, detail, value, reference, tol, status=None) -> Row:
    err = abs(value - reference) if np.isfinite(value) and np.isfinite(reference) else math.inf
    if status is None:
        status = "pass" if err <= tol else "fail"
    return (check, detail, value, reference, err, tol, status)


# --- counting identities ---------------------------------------------------------

def partition_rows(max_n: int = 14) -> list[Row]:
    """Type classes partition the sequence space: exact size sum and the
    probability normalization sum over the lattice."""
    rows = []
    q_by_size = {2: Distribution(np.array([0.9, 0.1])),
                 3: Distribution(np.array([0.5, 0.3, 0.2]))}
    for N in (2, 3):
        q = q_by_size[N]
        for n in range(1, max_n + 1):
            total = 0
            prob_sum = 0.0
            for t in enumerate_types(N, n):
                size = class_size_int(t)
                total += size
                prob_sum += size * math.exp(iid_type_probability(t, q))
            rows.append(_row("type_partition_count", f"N={N},n={n}",
                             float(total), float(N**n), 0.0))
            rows.append(_row("type_partition_prob", f"N={N},n={n}",
                             prob_sum, 1.0, 1e-12))
    return rows


def stirling_rows() -> list[Row]:
    """Asymptotic class-size estimate at the balanced binary type: relative
    error below 1% by n=100 and strictly decreasing in n."""
    rows = []
    errors = []
    for n in range(20, 201, 20):
        cs = class_size(SequenceType((n // 2, n // 2), n))
        rel = abs(math.expm1(cs.stirling_log - cs.exact_log))
        errors.append(rel)
        if n == 100:
            rows.append(_row("stirling_rel_error", f"n={n}", rel, 0.0, 1e-2))
    decreasing = all(a > b for a, b in zip(errors, errors[1:]))
    rows.append(_row("stirling_monotone_decrease", "n=20..200 step 20",
                     float(decreasing), 1.0, 0.0))
    return rows


def density_rows() -> list[Row]:
    """Exact type count vs the leading-order density n^(N-1)/(N-1)!:
    the ratio lies in [1, 1 + 3N/n]."""
    rows = []
    for N in (2, 3):
        for n in (50, 100, 200, 400):
            ratio = count_types(N, n) / type_density_estimate(N, n)
            ok = 1.0 <= ratio <= 1.0 + 3.0 * N / n
            rows.append(_row("type_density_ratio", f"N={N},n={n}",
                             ratio, 1.0, 3.0 * N / n,
                             status="pass" if ok else "fail"))
    return rows


def chain_rule_rows(max_n: int = 8) -> list[Row]:
    """Conditional-class counting identities, binary x binary, exact integers."""
    rows = []
    for n in range(2, max_n + 1):
        rep = type_count_identity_check(2, 2, n)
        rows.append(_row("chain_rule_class_count", f"n={n}",
                         float(rep.lhs_class_count), float(rep.rhs_class_count), 0.0))
        rows.append(_row("chain_rule_sequence_count", f"n={n}",
                         float(rep.lhs_sequence_count), float(rep.rhs_sequence_count), 0.0))
    return rows


# --- polytope integrals ------------------------------------------------------------

def dirichlet_rows() -> list[Row]:
    rows = []
    for N in range(2, 7):
        val = dirichlet_integral(np.ones(N))
        rows.append(_row("dirichlet_all_ones", f"N={N}", val,
                         1.0 / math.factorial(N - 1), 0.0))
    rows.append(_row("dirichlet_beta", "a=(2,3)", dirichlet_integral([2.0, 3.0]),
                     1.0 / 12.0, 1e-14))
    return rows


def gaussian_rows(rng: RngStream, mc_samples: int = 200_000) -> list[Row]:
    rows = []
    # N=2 closed form vs quadrature
    lam = np.array([1000.0, 1500.0])
    center = Distribution(np.array([0.45, 0.55]))
    closed = simplex_gaussian_integral(SimplexGaussian(center, lambdas=lam))
    t = np.linspace(0.0, 1.0, 200_001)
    integrand = np.exp(-lam[0] * (t - 0.45) ** 2 - lam[1] * ((1 - t) - 0.55) ** 2)
    quad = float(np.trapezoid(integrand, t))
    rows.append(_row("simplex_gaussian_vs_quadrature", "N=2,lam=1e3",
                     closed / quad, 1.0, 1e-3))
    # N=3,4 closed form vs Monte Carlo within 3 standard errors
    for idx, N in enumerate((3, 4)):
        gen = rng.substream(100 + idx).generator()
        # 3/sqrt(lam_min) must clear the 1/N interior margin for any draw
        lam = gen.uniform(180.0, 500.0, size=N)
        center = uniform_distribution(N)
        closed = simplex_gaussian_integral(SimplexGaussian(center, lambdas=lam))

        def f(pts, lam=lam, c=center.probs):
            return np.exp(-np.sum(lam[None, :] * (pts - c[None, :]) ** 2, axis=1))

        est, se = simplex_mc_integral(f, N, mc_samples, rng.substream(200 + idx))
        ok = abs(est - closed) <= 3 * se
        rows.append(_row("simplex_gaussian_vs_mc", f"N={N}", est, closed, 3 * se,
                         status="pass" if ok else "fail"))
    # matrix form reduces to the diagonal form
    lam = np.array([130.0, 95.0, 250.0])
    center = uniform_distribution(3)
    diag_val = simplex_gaussian_integral(SimplexGaussian(center, lambdas=lam))
    mat_val = simplex_gaussian_integral(SimplexGaussian(center, matrix=np.diag(lam)))
    rows.append(_row("simplex_gaussian_matrix_diag", "N=3", mat_val, diag_val, 1e-12))
    return rows


def conditional_gaussian_rows(rng: RngStream) -> list[Row]:
    rows = []
    # single-block reduction: nx=1 conditional equals the matrix simplex form
    gen = rng.substream(300).generator()
    B = gen.normal(size=(3, 3))
    A = B @ B.T + 200.0 * np.eye(3)
    center = uniform_distribution(3)
    plain = simplex_gaussian_integral(SimplexGaussian(center, matrix=A))
    cond = conditional_simplex_gaussian_integral(A, 1, 3,
                                                 center_rows=center.probs[None, :])
    rows.append(_row("conditional_gaussian_single_block", "nx=1,ny=3",
                     cond, plain, 1e-12 * plain))
    # block-diagonal across x factorizes
    gen = rng.substream(301).generator()
    blocks = []
    vals = []
    rows_c = np.full((2, 2), 0.5)
    for _ in range(2):
        B = gen.normal(size=(2, 2))
        blk = B @ B.T + 150.0 * np.eye(2)
        blocks.append(blk)
        vals.append(simplex_gaussian_integral(
            SimplexGaussian(uniform_distribution(2), matrix=blk)))
    A = np.zeros((4, 4))
    A[:2, :2] = blocks[0]
    A[2:, 2:] = blocks[1]
    cond = conditional_simplex_gaussian_integral(A, 2, 2, center_rows=rows_c)
    rows.append(_row("conditional_gaussian_block_product", "nx=2,ny=2",
                     cond, vals[0] * vals[1], 1e-12 * vals[0] * vals[1]))
    # random positive-definite A vs 2-D quadrature (one free variable per row)
    gen = rng.substream(302).generator()
    B = gen.normal(size=(4, 4))
    A = B @ B.T + 2000.0 * np.eye(4)
    cond = conditional_simplex_gaussian_integral(A, 2, 2, center_rows=rows_c)
    u = np.linspace(-0.5, 0.5, 1201)
    du = u[1] - u[0]
    U0, U1 = np.meshgrid(u, u, indexing="ij")
    # row deviations: (u, -u) per row; quadratic form via the sign pattern
    sgn = np.array([1.0, -1.0, 0.0, 0.0])
    v0 = np.array([1.0, -1.0, 0.0, 0.0])
    v1 = np.array([0.0, 0.0, 1.0, -1.0])
    q00 = v0 @ A @ v0
    q01 = v0 @ A @ v1
    q11 = v1 @ A @ v1
    integrand = np.exp(-(q00 * U0**2 + 2 * q01 * U0 * U1 + q11 * U1**2))
    quad = float(integrand.sum() * du * du)
    rows.append(_row("conditional_gaussian_vs_quadrature", "nx=2,ny=2",
                     cond / quad, 1.0, 1e-2))
    return rows


def rank_one_rows(rng: RngStream, instances: int = 100) -> list[Row]:
    gen = rng.substream(400).generator()
    worst_inv = 0.0
    worst_det = 0.0
    for _ in range(instances):
        n = int(gen.integers(2, 7))
        E = gen.normal(size=(n, n)) + n * np.eye(n)
        p = gen.normal(size=n)
        q = gen.normal(size=n)
        Ei = np.linalg.inv(E)
        detE = float(np.linalg.det(E))
        Ai, detA = sherman_morrison(Ei, detE, p, q)
        A = E + np.outer(p, q)
        worst_inv = max(worst_inv, float(np.max(np.abs(Ai @ A - np.eye(n)))))
        ref_det = float(np.linalg.det(A))
        worst_det = max(worst_det, abs(detA - ref_det) / max(abs(ref_det), 1e-30))
    return [
        _row("sherman_morrison_inverse", f"{instances} instances", worst_inv, 0.0, 1e-12),
        _row("matrix_determinant_lemma", f"{instances} instances", worst_det, 0.0, 1e-10),
    ]


def det_expansion_rows(rng: RngStream) -> list[Row]:
    gen = rng.substream(500).generator()
    A = gen.normal(size=(4, 4))
    eps = 1e-3
    e1 = abs(np.linalg.det(np.eye(4) + eps * A) - det_first_order(A, eps))
    e2 = abs(np.linalg.det(np.eye(4) + 0.5 * eps * A) - det_first_order(A, 0.5 * eps))
    ratio = e1 / e2
    ok = 3.5 <= ratio <= 4.5
    return [_row("det_first_order_eps_halving", "4x4,eps=1e-3", ratio, 4.0, 0.5,
                 status="pass" if ok else "fail")]


def smoothed_delta_rows(n: int = 200, eps: float = 0.05) -> list[Row]:
    """Normalization of the smoothed type delta.

    The continuous form is gated (the closed form makes it exactly 1); the
    lattice discretization of the continuous form is gated loosely; the
    sequence-level sum is reported as info because the class-size ratio
    inside it biases the sum down by a factor depending on n*eps^2, a known
    limitation of the sharp-peak approximation at these parameters.
    """
    ref = SequenceType((n // 2, n // 2), n)
    rep = smoothed_delta_normalization(SmoothedDelta(eps, ref),
                                       Distribution(np.array([0.5, 0.5])))
    return [
        _row("smoothed_delta_continuous", f"n={n},eps={eps}",
             rep.continuous_value, 1.0, 1e-6),
        _row("smoothed_delta_type_sum", f"n={n},eps={eps}",
             rep.type_sum, 1.0, 1e-3),
        _row("smoothed_delta_sequence_sum", f"n={n},eps={eps}",
             rep.sequence_sum, 1.0, 5e-2, status="info"),
    ]


def saddle_rows() -> list[Row]:
    """Saddle self-consistency: the closed-form composition is exactly 1 and
    the continuous integral it approximates converges at rate 1/n."""
    rows = []
    q = Distribution(np.array([0.52, 0.48]))
    errs = []
    for n in (50, 100, 200):
        est = saddle_normalization_estimate(q, n)
        rows.append(_row("saddle_composition_identity", f"n={n}",
                         math.exp(est), 1.0, 1e-10))
        # continuous integral of the full integrand by quadrature
        t = np.linspace(1e-9, 1 - 1e-9, 400_001)
        L = n * (t * np.log(q.probs[0] / t) + (1 - t) * np.log(q.probs[1] / (1 - t)))
        pref = n / np.sqrt(2 * math.pi * n * t * (1 - t))
        val = float(np.trapezoid(pref * np.exp(L), t))
        errs.append(abs(val - 1.0))
        rows.append(_row("saddle_integral_vs_exact_sum", f"n={n}", val, 1.0, 2e-2))
    halves = all(errs[i + 1] <= 0.75 * errs[i] for i in range(len(errs) - 1))
    rows.append(_row("saddle_error_shrinks_with_n", "n=50,100,200",
                     float(halves), 1.0, 0.0))
    return rows


def run_all(params: dict, rng: RngStream, appendix_only: bool = False) -> list[Row]:
    rows: list[Row] = []
    try:
        if not appendix_only:
            max_n = int(params.get("partition_max_n", 14))
            if count_types(3, max_n) * 3**max_n > 10**9:
                raise_instance("type_partition", max_n)
            rows += partition_rows(max_n)
            rows += stirling_rows()
            rows += density_rows()
            rows += chain_rule_rows(int(params.get("chain_rule_max_n", 8)))
            rows += saddle_rows()
        rows += dirichlet_rows()
        rows += gaussian_rows(rng, int(params.get("mc_samples", 200_000)))
        rows += conditional_gaussian_rows(rng)
        rows += rank_one_rows(rng)
        rows += det_expansion_rows(rng)
        rows += smoothed_delta_rows(int(params.get("delta_n", 200)),
                                    float(params.get("delta_eps", 0.05)))
    except Exception:
        raise
    return rows


def raise_instance(check: str, n: int):
    from .errors import InstanceTooLarge

    raise InstanceTooLarge(f"check {check}: n={n} exceeds the enumeration guard")
