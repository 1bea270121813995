"""
Elementary symmetric functions and Garding cones

sigma_k of an eigenvalue vector, membership in the open cone
Gamma_k = {sigma_1 > 0, ..., sigma_k > 0} and its closure, and the
trace inequality that holds for symmetric matrices with spectrum in the
closure of Gamma_2.
"""
import math
from itertools import combinations
from typing import List

import numpy as np

from loewner.errors import ArgumentError

# Up to this size sigma_k is summed over subsets of the sorted vector, which
# makes the result exactly invariant under permutation of the input.
SUBSET_EXPANSION_MAX_N = 12
CLOSURE_TOL = 1e-12
UNIT_TOL = 1e-12


def as_eigenvalue_vector(lam) -> np.ndarray:
    """Validate an eigenvalue vector of length at least 3"""
    arr = np.asarray(lam, dtype=float)
    if arr.ndim != 1 or arr.size < 3:
        raise ArgumentError(f"expected a vector of length >= 3, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ArgumentError("eigenvalue vector contains non-finite entries")
    return arr


def _check_order(k: int, n: int) -> None:
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or not 1 <= k <= n:
        raise ArgumentError(f"order k={k} outside 1..{n}")


def _newton_sigmas(arr: np.ndarray, k: int) -> List[float]:
    """sigma_0..sigma_k from power sums via Newton's identities"""
    powers = [0.0] + [float(np.sum(arr ** i)) for i in range(1, k + 1)]
    e = [1.0]
    for m in range(1, k + 1):
        total = math.fsum((-1) ** (i - 1) * e[m - i] * powers[i] for i in range(1, m + 1))
        e.append(total / m)
    return e


def _subset_sigma(ordered: List[float], k: int) -> float:
    return math.fsum(math.prod(c) for c in combinations(ordered, k))


def sigma(lam, k: int) -> float:
    """
    k-th elementary symmetric function of lam

    Args:
        lam: Eigenvalue vector, length n >= 3
        k: Order, 1 <= k <= n

    Returns:
        Sum over k-subsets of the products of their entries
    """
    arr = as_eigenvalue_vector(lam)
    _check_order(k, arr.size)
    if arr.size <= SUBSET_EXPANSION_MAX_N:
        return _subset_sigma(sorted(arr.tolist()), k)
    return _newton_sigmas(arr, k)[k]


def sigma_all(lam, k: int) -> List[float]:
    """[sigma_1, ..., sigma_k] of lam"""
    arr = as_eigenvalue_vector(lam)
    _check_order(k, arr.size)
    if arr.size <= SUBSET_EXPANSION_MAX_N:
        ordered = sorted(arr.tolist())
        return [_subset_sigma(ordered, j) for j in range(1, k + 1)]
    return _newton_sigmas(arr, k)[1:]


def in_gamma_k(lam, k: int) -> bool:
    """True if sigma_1, ..., sigma_k are all strictly positive"""
    return all(value > 0.0 for value in sigma_all(lam, k))


def in_gamma_k_closure(lam, k: int, tol: float = CLOSURE_TOL) -> bool:
    """True if sigma_1, ..., sigma_k are all >= -tol"""
    return all(value >= -tol for value in sigma_all(lam, k))


def gamma2bar_trace_gap(M, m) -> float:
    """
    trace(M) - m^T M m for symmetric M and unit vector m

    Nonnegative whenever the spectrum of M lies in the closure of Gamma_2.
    """
    mat = np.asarray(M, dtype=float)
    vec = np.asarray(m, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] < 3:
        raise ArgumentError(f"expected a square matrix of size >= 3, got shape {mat.shape}")
    if not np.array_equal(mat, mat.T):
        raise ArgumentError("matrix is not symmetric")
    if vec.shape != (mat.shape[0],):
        raise ArgumentError(f"vector shape {vec.shape} does not match matrix size {mat.shape[0]}")
    if abs(float(np.linalg.norm(vec)) - 1.0) > UNIT_TOL:
        raise ArgumentError("vector is not a unit vector")
    projector = np.eye(mat.shape[0]) - np.outer(vec, vec)
    return float(np.einsum('ij,ij->', mat, projector))


def random_unit_vector(rng: np.random.Generator, n: int) -> np.ndarray:
    vec = rng.normal(size=n)
    return vec / np.linalg.norm(vec)


def random_gamma2bar_matrix(rng: np.random.Generator, n: int, shift: float = 0.5,
                            max_tries: int = 10000) -> np.ndarray:
    """
    Random exactly symmetric matrix with spectrum in the closure of Gamma_2

    Eigenvalues are rejection-sampled from a shifted normal law and rotated
    by a random orthogonal matrix.
    """
    for _ in range(max_tries):
        eigs = rng.normal(loc=shift, size=n)
        if in_gamma_k_closure(eigs, 2, tol=0.0):
            break
    else:
        raise ArgumentError(f"no admissible spectrum after {max_tries} draws")
    q, r = np.linalg.qr(rng.normal(size=(n, n)))
    q = q * np.sign(np.diag(r))
    mat = q @ np.diag(eigs) @ q.T
    return 0.5 * (mat + mat.T)
