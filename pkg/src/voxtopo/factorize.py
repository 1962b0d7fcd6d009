"""Nonnegative matrix factorization of concatenated persistence images.

Plain NMF for the Frobenius objective ||V - W H||_F: W holds the
per-sample coefficients, rows of H are the concatenated feature
distributions.  Updates are hierarchical alternating least squares (one
exact nonnegative least-squares step per factor column), which preserves
nonnegativity, never increases the objective, and converges much faster
than multiplicative updates.  The seeded initialization makes the whole
fit deterministic.
"""

from dataclasses import dataclass, field

import numpy as np

EPS = 1e-12  # denominator floor in the updates


class FactorizeError(Exception):
    pass


@dataclass
class FactorModel:
    """Fitted NMF: coefficients (N x M), basis (M x F), and fit diagnostics."""

    components: int
    coefficients: np.ndarray = field(repr=False)
    basis: np.ndarray = field(repr=False)
    objective_trace: np.ndarray = field(repr=False)
    final_error: float = 0.0
    iterations: int = 0
    seed: int = 0


def nmf(V, M, seed=0, max_iter=500, rel_tol=1e-6):
    """Factor a nonnegative matrix into M nonnegative components.

    Stops when the relative decrease of ||V - WH||_F falls below rel_tol
    or after max_iter updates.  Components are sorted afterwards by
    descending total coefficient mass so their indices are reproducible.
    """
    V = np.asarray(V, dtype=float)
    if V.ndim != 2:
        raise FactorizeError("V must be a 2D matrix")
    if np.any(V < 0):
        raise FactorizeError("V must be nonnegative")
    N, F = V.shape
    if not 1 <= M <= min(N, F):
        raise FactorizeError(f"component count {M} outside [1, {min(N, F)}]")

    rng = np.random.default_rng(seed)
    scale = np.sqrt(max(V.mean(), EPS) / M)
    # uniform in (0, 1] so no factor entry starts at zero
    W = (1.0 - rng.random((N, M))) * scale
    H = (1.0 - rng.random((M, F))) * scale

    trace = [np.linalg.norm(V - W @ H)]
    it = 0
    for it in range(1, max_iter + 1):
        WtV = W.T @ V
        WtW = W.T @ W
        for m in range(M):
            H[m] = np.maximum(H[m] + (WtV[m] - WtW[m] @ H) / max(WtW[m, m], EPS), 0.0)
        VHt = V @ H.T
        HHt = H @ H.T
        for m in range(M):
            W[:, m] = np.maximum(
                W[:, m] + (VHt[:, m] - W @ HHt[:, m]) / max(HHt[m, m], EPS), 0.0
            )
        obj = np.linalg.norm(V - W @ H)
        prev = trace[-1]
        trace.append(obj)
        if prev > 0 and (prev - obj) / prev < rel_tol:
            break

    # reproducible component order: heaviest coefficient mass first
    mass = W.sum(axis=0)
    perm = np.lexsort((np.arange(M), -mass))
    W = W[:, perm]
    H = H[perm, :]

    vnorm = np.linalg.norm(V)
    final = trace[-1] / vnorm if vnorm > 0 else 0.0
    return FactorModel(
        components=M,
        coefficients=W,
        basis=H,
        objective_trace=np.array(trace),
        final_error=float(final),
        iterations=it,
        seed=seed,
    )


def split_components(model, offsets):
    """Cut each basis row into its per-dimension blocks.

    Returns a list of M triples [rho_0, rho_1, rho_2]; concatenating a
    triple reproduces the basis row exactly.
    """
    F = model.basis.shape[1]
    if not (0 == offsets[0] < offsets[1] < offsets[2] < F):
        raise FactorizeError(f"offsets {offsets} inconsistent with basis width {F}")
    out = []
    for row in model.basis:
        out.append(
            [
                row[offsets[0] : offsets[1]],
                row[offsets[1] : offsets[2]],
                row[offsets[2] :],
            ]
        )
    return out


def reconstruction_error(V, model):
    """Relative Frobenius residual ||V - WH||_F / ||V||_F."""
    V = np.asarray(V, dtype=float)
    resid = np.linalg.norm(V - model.coefficients @ model.basis)
    vnorm = np.linalg.norm(V)
    return resid / vnorm if vnorm > 0 else 0.0
