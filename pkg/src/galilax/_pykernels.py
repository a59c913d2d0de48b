"""Reference numpy implementation of the integration hot loop.

Every function mirrors one in ``_ckernels.pyx`` with the same signature and
return convention: the index of the first colliding pair (or -1) is returned
alongside the output.  ``deltas[k]`` is the Jacobi-space difference vector of
pair k, so that the squared distance of that pair is ``deltas[k] @ b @ deltas[k]``.
"""
import numpy as np

# relative collision threshold on r (squared below)
COLLISION_REL2 = 1e-24


def _collision(r2, eps2, singular):
    if not singular or eps2 > 0.0:
        return -1
    scale = r2.max() if r2.size else 0.0
    hit = np.flatnonzero(r2 <= COLLISION_REL2 * scale) if scale > 0 else np.arange(r2.size)
    return int(hit[0]) if hit.size else -1


def reduced_wc_power(b, deltas, coef, alpha, eps2, singular):
    """Reduced Wintner–Conley matrix for W = sum coef_k (r_k^2 + eps2)^(-alpha/2)."""
    r2 = np.einsum("pi,ij,pj->p", deltas, b, deltas)
    bad = _collision(r2, eps2, singular)
    if bad >= 0:
        return np.zeros_like(b), bad
    s = r2 + eps2
    if alpha == 1.0:
        w = coef / (s * np.sqrt(s))
    else:
        w = coef * alpha * s ** (-0.5 * alpha - 1.0)
    return (deltas.T * w) @ deltas, -1


def z_rhs_power(Z, deltas, coef, alpha, eps2, minv, singular):
    m = Z.shape[1] // 2
    X = Z[:, :m]
    Y = Z[:, m:]
    At, bad = reduced_wc_power(X.T @ X, deltas, coef, alpha, eps2, singular)
    return np.hstack([Y * minv, -X @ At]), bad


def k_rhs_power(K, deltas, coef, alpha, eps2, minv, singular):
    m = K.shape[0] // 2
    b = -K[m:, :m]
    b = 0.5 * (b + b.T)
    At, bad = reduced_wc_power(b, deltas, coef, alpha, eps2, singular)
    # P = J S = [[0, At], [-diag(minv), 0]]
    PK = np.vstack([At @ K[m:], -minv[:, None] * K[:m]])
    KP = np.hstack([-K[:, m:] * minv, K[:, :m] @ At])
    return PK - KP, bad
