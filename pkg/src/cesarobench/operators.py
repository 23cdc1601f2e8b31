"""Finite sections of measure-induced Cesaro operators and their norms.

A positive measure mu on [0, 1) with moments mu_n acts on coefficient
vectors by (a_n) -> (mu_n * (a_0 + ... + a_n)).  Conjugating by the
diagonal maps that carry the alpha- and beta-weighted sequence spaces onto
plain l2 turns the operator norm into the largest singular value of the
lower-triangular matrix

    A[n, k] = (n+1)^((1-beta)/2) * mu_n * (k+1)^(-(1-alpha)/2),   k <= n.

Small sections go through a dense SVD; large ones use power iteration on
A^T A with both matrix-vector products applied matrix-free through prefix
sums, so no N x N array is ever formed.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .measures import Measure, moment_sequence
from .spaces import CoeffVec, SpaceIndex

__all__ = [
    "SectionOp",
    "OpNormEstimate",
    "apply",
    "truncate",
    "tail_section",
    "section_norm",
    "norm_growth_profile",
    "profile_to_csv",
]

# Largest section handled by the dense SVD route; beyond it the iterative
# path takes over.
DENSE_SVD_LIMIT = 512


@dataclass(frozen=True, eq=False)
class SectionOp:
    """Size-N section of the operator, with an output-row window.

    The window `rows` is half-open: output entries with index outside
    [rows[0], rows[1]) are zero.  A full section has rows == (0, size);
    truncations narrow the window from above and their complementary tail
    operators narrow it from below.  Moments are derived from the measure
    on construction, so they always satisfy moments[n] = moment(measure, n).
    """

    measure: Measure
    alpha: SpaceIndex
    beta: SpaceIndex
    size: int
    rows: tuple[int, int] | None = None
    moments: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.size < 1:
            raise ValueError("section size must be positive")
        rows = (0, self.size) if self.rows is None else (
            int(self.rows[0]),
            int(self.rows[1]),
        )
        if not 0 <= rows[0] <= rows[1] <= self.size:
            raise ValueError(f"row window {rows} out of range for size {self.size}")
        moments = moment_sequence(self.measure, self.size)
        moments.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "moments", moments)


@dataclass(frozen=True)
class OpNormEstimate:
    """Largest-singular-value estimate with its convergence record.

    `value` is a lower bound on the section norm (Rayleigh quotients of
    A^T A underestimate; the dense route is exact to machine precision).
    `residual` is the last gap between successive estimates; it exceeds the
    requested tolerance only when iteration stopped at max_iter.
    """

    value: float
    iterations: int
    residual: float
    method: str

    def __post_init__(self) -> None:
        if self.value < 0 or self.residual < 0:
            raise ValueError("estimate and residual must be nonnegative")
        if self.method not in ("dense_svd", "power_iteration"):
            raise ValueError(f"unknown method {self.method!r}")


def apply(op: SectionOp, f: CoeffVec) -> CoeffVec:
    """Image of f under the section: out_n = mu_n * (a_0 + ... + a_n).

    Computed with one running prefix sum, in the same left-to-right
    addition order as the literal double loop, so the two agree bitwise.
    Output has length op.size with zeros outside the row window.
    """
    a = f.coeffs
    if a.size > op.size:
        raise ValueError(f"input length {a.size} exceeds section size {op.size}")
    padded = np.zeros(op.size)
    padded[: a.size] = a
    out = op.moments * np.cumsum(padded)
    lo, hi = op.rows
    out[:lo] = 0.0
    out[hi:] = 0.0
    return CoeffVec(out)


def truncate(op: SectionOp, m: int) -> SectionOp:
    """Keep output rows 0..m only; rows above m become zero."""
    if not 0 <= m < op.size:
        raise ValueError(f"truncation row {m} out of range [0, {op.size})")
    lo, hi = op.rows
    return replace(op, rows=(lo, min(hi, m + 1)))


def tail_section(op: SectionOp, m: int) -> SectionOp:
    """Complementary rows above m: the operator minus its truncation at m."""
    if not 0 <= m < op.size:
        raise ValueError(f"truncation row {m} out of range [0, {op.size})")
    lo, hi = op.rows
    return replace(op, rows=(max(lo, m + 1), hi))


def _conjugation_weights(op: SectionOp) -> tuple[np.ndarray, np.ndarray]:
    """Column weights (k+1)^(-(1-alpha)/2) and windowed row weights."""
    idx = np.arange(1, op.size + 1, dtype=float)
    w_in = idx ** (-(1.0 - op.alpha.alpha) / 2.0)
    w_out = idx ** ((1.0 - op.beta.alpha) / 2.0) * op.moments
    lo, hi = op.rows
    w_out[:lo] = 0.0
    w_out[hi:] = 0.0
    return w_in, w_out


def weighted_matrix(op: SectionOp) -> np.ndarray:
    """The dense conjugated matrix A; rows outside the window are zero."""
    w_in, w_out = _conjugation_weights(op)
    return np.tril(np.outer(w_out, w_in))


def section_norm(
    op: SectionOp,
    tol: float = 1e-9,
    max_iter: int = 20000,
    method: str | None = None,
) -> OpNormEstimate:
    """Largest singular value of the conjugated section matrix.

    method=None picks dense SVD for size <= DENSE_SVD_LIMIT and power
    iteration above; pass an explicit method name to override (the dense
    route doubles as the oracle for the iterative one).  Power iteration
    starts from the all-ones vector, which has positive overlap with the
    top singular vector because every matrix entry is nonnegative, and
    stops when successive Rayleigh estimates differ by less than tol.
    Non-convergence is reported through residual > tol, never raised.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be positive")
    if method is None:
        method = "dense_svd" if op.size <= DENSE_SVD_LIMIT else "power_iteration"
    if method == "dense_svd":
        value = float(np.linalg.svd(weighted_matrix(op), compute_uv=False)[0])
        return OpNormEstimate(value=value, iterations=0, residual=0.0, method=method)
    if method != "power_iteration":
        raise ValueError(f"unknown method {method!r}")

    w_in, w_out = _conjugation_weights(op)
    v = np.full(op.size, 1.0 / math.sqrt(op.size))
    sigma_prev = None
    sigma = 0.0
    residual = math.inf
    for iteration in range(1, max_iter + 1):
        av = w_out * np.cumsum(w_in * v)
        sigma = math.sqrt(float(np.dot(av, av)))
        if sigma == 0.0:
            return OpNormEstimate(0.0, iteration, 0.0, method)
        if sigma_prev is not None:
            residual = abs(sigma - sigma_prev)
            if residual < tol:
                return OpNormEstimate(sigma, iteration, residual, method)
        sigma_prev = sigma
        btv = w_in * np.cumsum((w_out * av)[::-1])[::-1]
        btv_norm = float(np.linalg.norm(btv))
        if btv_norm == 0.0 or not math.isfinite(btv_norm):
            # The back-applied iterate underflowed (denormal sections);
            # sigma cannot improve from here.
            return OpNormEstimate(sigma, iteration, 0.0, method)
        v = btv / btv_norm
    return OpNormEstimate(sigma, max_iter, residual, method)


def _max_workers() -> int:
    raw = os.environ.get("CESARO_THREADS", "").strip()
    if not raw:
        return 1
    try:
        workers = int(raw)
    except ValueError:
        raise ValueError(
            f"CESARO_THREADS must be a positive integer, got {raw!r}"
        ) from None
    if workers < 1:
        raise ValueError(f"CESARO_THREADS must be a positive integer, got {raw!r}")
    return workers


def norm_growth_profile(
    measure: Measure,
    alpha: SpaceIndex,
    beta: SpaceIndex,
    sizes,
    tol: float = 1e-9,
    max_iter: int = 20000,
) -> list[tuple[int, OpNormEstimate]]:
    """Section norms at each size, ordered by size.

    Sections are nested, so the exact norms are nondecreasing; the
    estimates inherit that up to the reported residuals.  Entries are
    independent and may be computed on a thread pool (CESARO_THREADS),
    which cannot change any value, only wall time.
    """
    sizes = [int(n) for n in sizes]
    if not sizes or sizes[0] < 1:
        raise ValueError("sizes must be a nonempty list of positive integers")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("sizes must be strictly increasing")

    def entry(n: int) -> tuple[int, OpNormEstimate]:
        op = SectionOp(measure, alpha, beta, n)
        return n, section_norm(op, tol=tol, max_iter=max_iter)

    workers = _max_workers()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(entry, sizes))
    return [entry(n) for n in sizes]


def profile_to_csv(profile: list[tuple[int, OpNormEstimate]]) -> str:
    """Render a growth profile as CSV with a N,norm,method,... header."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["N", "norm", "method", "iterations", "residual"])
    for n, est in profile:
        writer.writerow(
            [n, repr(est.value), est.method, est.iterations, repr(est.residual)]
        )
    return buf.getvalue()
