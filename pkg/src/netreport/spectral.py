"""Iterative eigen/singular solvers over the sparse adjacency of a Graph.

All solvers start from fixed vectors (normalized all-ones, or a fixed-seed
perturbation where a symmetric start could be orthogonal to the target), so
repeated runs are bit-identical.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .graph import Graph, component_labels
from .na import NA

log = logging.getLogger(__name__)

START_SEED = 20220611  # fixed perturbation seed shared by all solvers
DEFAULT_ALPHA = 0.85
DANGLING_POLICIES = ("uniform", "self-loop", "error")
BASIS_BUDGET = 512 * 2**20  # bytes for the U and V Krylov bases of the SVD


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(f"{message} (residual {residual:.3e} after {iterations} iterations)")
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class Estimate:
    """Solver output plus convergence diagnostics."""

    value: float | NA
    iterations: int = 0
    residual: float = 0.0
    converged: bool = True
    upper_bound: bool = False  # value is σ₁, an upper bound on ρ

    @property
    def note(self) -> str:
        if self.upper_bound:
            return "upper-bound estimate (largest singular value)"
        return ""


@dataclass(frozen=True)
class PagerankConfig:
    alpha: float = DEFAULT_ALPHA
    tol: float = 1e-10
    max_iter: int = 1000
    dangling: str = "uniform"

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        if self.dangling not in DANGLING_POLICIES:
            raise ValueError(f"dangling policy must be one of {DANGLING_POLICIES}")


@dataclass(frozen=True)
class SingularValues:
    values: list[float]
    requested: int
    converged: bool
    iterations: int = 0
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class SpectralSummary:
    spectral_radius: Estimate
    algebraic_connectivity: Estimate
    singular_values: SingularValues
    convergence: dict = field(default_factory=dict)


def _rng() -> np.random.Generator:
    return np.random.default_rng(START_SEED)


def _orthonormalize(w: np.ndarray, basis: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Two-pass classical Gram–Schmidt of ``w`` against orthonormal ``basis`` columns."""
    if basis.shape[1] == 0:
        return w, np.zeros(0), float(np.linalg.norm(w))
    c = basis.T @ w
    w = w - basis @ c
    c2 = basis.T @ w
    w = w - basis @ c2
    return w, c + c2, float(np.linalg.norm(w))


def _random_orthogonal(rng: np.random.Generator, basis: np.ndarray) -> np.ndarray | None:
    n = basis.shape[0]
    if basis.shape[1] >= n:
        return None
    for _ in range(3):
        w, _, nrm = _orthonormalize(rng.standard_normal(n), basis)
        if nrm > 1e-8:
            return w / nrm
    return None


# ---- symmetric Lanczos ------------------------------------------------


def lanczos_largest(
    matvec,
    n: int,
    start: np.ndarray,
    tol: float,
    max_iter: int,
    krylov_dim: int = 60,
    deflate: np.ndarray | None = None,
) -> Estimate:
    """Largest eigenvalue of a symmetric operator by thick-restart Lanczos.

    ``deflate`` is an orthonormal block the search space is kept orthogonal to.
    Convergence is declared when the Ritz residual norm is at most ``tol``,
    which bounds the eigenvalue error for symmetric operators.
    """
    rng = _rng()
    defl = np.zeros((n, 0)) if deflate is None else deflate
    avail = n - defl.shape[1]
    if avail <= 0:
        return Estimate(NA("empty search space"), converged=False)
    m = max(1, min(krylov_dim, avail))
    V = np.zeros((n, m + 1), order="F")
    T = np.zeros((m, m))
    v, _, nrm = _orthonormalize(np.asarray(start, dtype=np.float64), defl)
    if nrm < 1e-12:
        v = _random_orthogonal(rng, defl)
        nrm = 1.0
    V[:, 0] = v / nrm
    p = 0
    iters = 0
    theta, resid = 0.0, np.inf
    while iters < max_iter:
        beta = 0.0
        for j in range(p, m):
            iters += 1
            w = matvec(V[:, j])
            w, _, _ = _orthonormalize(w, defl)
            w, c, beta = _orthonormalize(w, V[:, : j + 1])
            T[: j + 1, j] = c
            T[j, : j + 1] = c
            if beta <= 1e-12 * max(1.0, abs(c[-1])):
                extra = _random_orthogonal(rng, np.hstack([defl, V[:, : j + 1]]))
                if extra is None or j + 1 == m:
                    beta = 0.0
                    m_used = j + 1
                    break
                V[:, j + 1] = extra
                beta = 0.0
            else:
                V[:, j + 1] = w / beta
            if j + 1 < m:
                T[j + 1, j] = T[j, j + 1] = beta
            m_used = j + 1
        evals, evecs = np.linalg.eigh(T[:m_used, :m_used])
        theta = float(evals[-1])
        resid = abs(beta * evecs[-1, -1])
        if resid <= tol:
            return Estimate(theta, iters, resid, True)
        # thick restart: keep the leading Ritz vectors plus the residual direction
        p = max(1, min(m_used - 1, m_used // 2))
        keep = evecs[:, -p:][:, ::-1]
        top = evals[-p:][::-1]
        res_vec = V[:, m_used].copy()
        V[:, :p] = V[:, :m_used] @ keep
        T[:] = 0.0
        T[:p, :p] = np.diag(top)
        # coupling of the residual direction to the kept vectors is recomputed
        # by the Gram–Schmidt step at column p
        V[:, p] = res_vec
    return Estimate(theta, iters, resid, False)


# ---- spectral radius --------------------------------------------------


def spectral_radius(graph: Graph, tol: float = 1e-10, max_iter: int = 10000) -> Estimate:
    """Largest eigenvalue magnitude of the adjacency matrix."""
    n = graph.node_count
    if n == 0:
        return Estimate(NA("empty graph"), converged=False)
    a = graph.adjacency
    if a.nnz == 0:
        return Estimate(0.0)
    if not graph.directed:
        est = lanczos_largest(lambda x: a @ x, n, np.ones(n), tol, max_iter)
        if not est.converged:
            return Estimate(NA(f"Lanczos did not converge (residual {est.residual:.2e})"),
                            est.iterations, est.residual, False)
        return est
    return _directed_radius(graph, tol, max_iter)


def _directed_radius(graph: Graph, tol: float, max_iter: int) -> Estimate:
    # ρ(A) is the max over strongly connected blocks; each block is irreducible,
    # so its Perron root is simple and is the eigenvalue of largest real part.
    a = graph.adjacency
    count, labels = component_labels(graph, "strong")
    order = np.argsort(labels, kind="stable")
    bounds = np.searchsorted(labels[order], np.arange(count + 1))
    best = float(a.diagonal().max()) if a.nnz else 0.0
    blocks = []
    for i in range(count):
        idx = order[bounds[i] : bounds[i + 1]]
        if len(idx) >= 2:
            blocks.append(idx)
    blocks.sort(key=lambda b: (-len(b), int(b[0])))
    iters_total, worst_resid, ok = 0, 0.0, True
    for idx in blocks:
        sub = a[idx][:, idx]
        rowsum = np.asarray(sub.sum(axis=1)).ravel()
        if rowsum.max() <= best:
            continue
        est = _arnoldi_perron(sub, tol, max_iter)
        iters_total += est.iterations
        worst_resid = max(worst_resid, est.residual)
        if not est.converged:
            ok = False
            break
        best = max(best, float(est.value))
    if ok:
        return Estimate(best, iters_total, worst_resid, True)
    sv = top_k_singular_values(graph, 1, tol=1e-10)
    log.warning("directed spectral radius did not converge; reporting sigma_1 upper bound")
    return Estimate(sv.values[0] if sv.values else NA("no convergence"), iters_total,
                    worst_resid, False, upper_bound=True)


def _arnoldi_perron(a: sp.csr_matrix, tol: float, max_iter: int, krylov_dim: int = 60) -> Estimate:
    n = a.shape[0]
    m = min(krylov_dim, n)
    rng = _rng()
    V = np.zeros((n, m + 1), order="F")
    H = np.zeros((m + 1, m))
    V[:, 0] = 1.0 / np.sqrt(n)
    iters = 0
    theta, resid = 0.0, np.inf
    while iters < max_iter:
        H[:] = 0.0
        m_used = m
        for j in range(m):
            iters += 1
            w = a @ V[:, j]
            w, c, h = _orthonormalize(w, V[:, : j + 1])
            H[: j + 1, j] = c
            if h <= 1e-12 * max(1.0, np.abs(c).max()):
                m_used = j + 1
                h = 0.0
                break
            H[j + 1, j] = h
            V[:, j + 1] = w / h
        evals, evecs = np.linalg.eig(H[:m_used, :m_used])
        k = int(np.argmax(evals.real))
        theta = float(evals[k].real)
        y = evecs[:, k].real
        y /= np.linalg.norm(y)
        resid = abs(H[m_used, m_used - 1] * y[-1]) if m_used == m else 0.0
        if resid <= tol:
            return Estimate(theta, iters, resid, True)
        x = V[:, :m_used] @ y
        if x.sum() < 0:
            x = -x
        nrm = np.linalg.norm(x)
        if nrm < 1e-14:
            x = np.abs(rng.standard_normal(n))
            nrm = np.linalg.norm(x)
        V[:, 0] = x / nrm
    return Estimate(theta, iters, resid, False)


# ---- algebraic connectivity -------------------------------------------


def algebraic_connectivity(graph: Graph, tol: float = 1e-10, max_iter: int = 10000) -> Estimate:
    """Second-smallest eigenvalue of the Laplacian of the simplified undirected view."""
    n = graph.node_count
    if graph.directed:
        return Estimate(NA("undefined for directed graphs"), converged=False)
    if n == 0:
        return Estimate(NA("empty graph"), converged=False)
    if n == 1:
        return Estimate(NA("single-node graph has no second eigenvalue"), converged=False)
    count, _ = component_labels(graph, "weak")
    if count > 1:
        return Estimate(0.0)
    lap = graph.laplacian
    deg = lap.diagonal()
    shift = 2.0 * float(deg.max())  # λ_max(L) ≤ 2·max degree
    ones = np.full((n, 1), 1.0 / np.sqrt(n))
    start = _rng().standard_normal(n)
    est = lanczos_largest(lambda x: shift * x - lap @ x, n, start, tol, max_iter, deflate=ones)
    if not est.converged:
        return Estimate(NA(f"Lanczos did not converge (residual {est.residual:.2e})"),
                        est.iterations, est.residual, False)
    value = max(0.0, shift - float(est.value))
    return Estimate(value, est.iterations, est.residual, True)


# ---- PageRank ---------------------------------------------------------


def pagerank(graph: Graph, config: PagerankConfig | None = None) -> np.ndarray:
    """Unnormalized PageRank: the fixed point of ``x = α·A·D⁻¹·x + 1``.

    Columns of ``A·D⁻¹`` are the out-neighbor distributions; dangling nodes
    follow ``config.dangling``. The iteration matrix is column-stochastic, so
    it contracts by α in the 1-norm; stopping once ``α/(1-α)·‖Δ‖₁ <= tol``
    bounds the error of the returned vector (in any p-norm) by ``tol``.
    Raises ConvergenceError past ``max_iter``.
    """
    cfg = config or PagerankConfig()
    n = graph.node_count
    if n == 0:
        return np.zeros(0)
    a = graph.adjacency
    out = np.asarray(a.sum(axis=1)).ravel()
    dangling = out == 0
    if dangling.any() and cfg.dangling == "error":
        raise ValueError(f"{int(dangling.sum())} dangling node(s) and dangling policy is 'error'")
    inv = np.zeros(n)
    inv[~dangling] = 1.0 / out[~dangling]
    mt = a.T.tocsr()  # mt[v, u] = 1 for each edge u→v
    alpha = cfg.alpha
    gain = alpha / (1.0 - alpha)
    x = np.ones(n)
    delta = np.inf
    for it in range(1, cfg.max_iter + 1):
        y = mt @ (x * inv)
        if cfg.dangling == "uniform":
            y += x[dangling].sum() / n
        elif cfg.dangling == "self-loop":
            y[dangling] += x[dangling]
        y = alpha * y + 1.0
        delta = gain * float(np.abs(y - x).sum())
        x = y
        if delta <= cfg.tol:
            return x
    raise ConvergenceError("PageRank did not converge", delta, cfg.max_iter)


# ---- singular values --------------------------------------------------


def top_k_singular_values(
    graph: Graph, k: int | None = None, tol: float = 1e-6, max_restarts: int = 200
) -> SingularValues:
    """The ``k`` largest singular values of the adjacency matrix, descending."""
    n = graph.node_count
    if k is None:
        k = min(100, n)
    if k < 1:
        raise ValueError("k must be positive")
    warnings: list[str] = []
    if k > n:
        warnings.append(f"k={k} exceeds |V|={n}; clamped to {n}")
        log.warning(warnings[-1])
        k = n
    if n == 0:
        return SingularValues([], 0, True, 0, tuple(warnings))
    res = lanczos_svd(graph.adjacency, k, tol, max_restarts)
    if not res.converged:
        warnings.append(f"only {len(res.values)} of {k} singular values converged")
        log.warning(warnings[-1])
    return SingularValues(res.values, k, res.converged, res.iterations, tuple(warnings) + res.warnings)


def _orth_block(w: np.ndarray, basis: np.ndarray, small: float, rng: np.random.Generator, recent: int = 0):
    """Orthonormalize block ``w`` against ``basis``: ``w = basis @ C + Q @ R``.

    With ``recent > 0`` the dominant components are assumed to lie on the last
    ``recent`` basis columns (the Lanczos recurrence); those are removed first
    and a single full pass follows. Otherwise two full passes are made.
    Rank-deficient columns are replaced by fresh random directions with a zero
    diagonal entry in ``R``.
    """
    b = w.shape[1]
    nb = basis.shape[1]
    c = np.zeros((nb, b))
    if nb:
        if 0 < recent < nb:
            tail = basis[:, nb - recent :]
            ct = tail.T @ w
            w = w - tail @ ct
            c[nb - recent :] = ct
            passes = 1
        else:
            passes = 2
        for _ in range(passes):
            cc = basis.T @ w
            w = w - basis @ cc
            c += cc
    q, r = np.linalg.qr(w)
    if np.all(np.abs(np.diag(r)) > small):
        return q, r, c
    # column-wise fallback keeps the factorization exact when a column collapses
    q = np.zeros_like(w)
    r = np.zeros((b, b))
    for i in range(b):
        full = np.hstack([basis, q[:, :i]])
        col, coef, nrm = _orthonormalize(w[:, i], full)
        extra = coef[: basis.shape[1]]
        c[:, i] += extra
        r[:i, i] = coef[basis.shape[1]:]
        if nrm > small:
            q[:, i] = col / nrm
            r[i, i] = nrm
        else:
            fresh = _random_orthogonal(rng, full)
            q[:, i] = 0.0 if fresh is None else fresh
    return q, r, c


def _rotate_rows(X: np.ndarray, m: int, R: np.ndarray, rows: int = 16384) -> None:
    """``X[:, :p] = X[:, :m] @ R`` in row blocks, so no full-height temporary is built."""
    p = R.shape[1]
    for i in range(0, X.shape[0], rows):
        X[i : i + rows, :p] = X[i : i + rows, :m] @ R


def lanczos_svd(
    a: sp.spmatrix, k: int, tol: float = 1e-6, max_restarts: int = 200, block: int | None = None
) -> SingularValues:
    """Thick-restart block Golub–Kahan–Lanczos bidiagonalization.

    Maintains ``A V = U B`` with orthonormal ``U``, ``V`` (full
    reorthogonalization). Ritz triplets from the SVD of ``B`` satisfy
    ``A v = σ u`` exactly and ``‖Aᵀu − σ v‖ = ‖R·P_last·e_i‖``; a value is
    accepted once that residual is within ``tol`` relative to it.
    """
    a = a.tocsr()
    at = a.T.tocsr()
    n_rows, n_cols = a.shape
    dim = min(n_rows, n_cols)
    k = min(k, dim)
    if block is None:
        block = 1 if dim <= 500 else 8
    b = max(1, min(block, dim))
    m = min(dim, max(2 * k + 2 * b, k + 30))
    if 8 * (n_rows + n_cols) * (m + b) > BASIS_BUDGET:
        # narrower window: less memory, more restarts on flat spectra
        m = min(m, k + max(30, k // 2, 2 * b))
    if m < dim:
        m = b * max(1, m // b)
    elif dim % b:
        b = 1
    rng = _rng()
    absrow = np.asarray(abs(a).sum(axis=1)).max() if a.nnz else 0.0
    abscol = np.asarray(abs(a).sum(axis=0)).max() if a.nnz else 0.0
    anorm = float(np.sqrt(absrow * abscol)) or 1.0
    small = 1e-12 * anorm

    V = np.zeros((n_cols, m + b), order="F")
    U = np.zeros((n_rows, m), order="F")
    B = np.zeros((m, m))
    start = np.ones((n_cols, b)) / np.sqrt(n_cols)
    start += 0.1 * rng.standard_normal((n_cols, b)) / np.sqrt(n_cols)
    V[:, :b], _, _ = _orth_block(start, np.zeros((n_cols, 0)), 0.0, rng)
    p = 0
    iters = 0
    S = np.zeros(0)
    conv = np.zeros(0, dtype=bool)
    for _ in range(max_restarts):
        r2 = np.zeros((b, b))
        for c in range(p, m, b):
            iters += b
            q, r, coef = _orth_block(a @ V[:, c : c + b], U[:, :c], small, rng, 0 if c == p else b)
            U[:, c : c + b] = q
            B[:c, c : c + b] = coef
            B[c : c + b, c : c + b] = r
            q2, r2, _ = _orth_block(at @ q, V[:, : c + b], small, rng, b)
            V[:, c + b : c + 2 * b] = q2
            if c + b < m:
                B[c : c + b, c + b : c + 2 * b] = r2.T
        P, S, Qt = np.linalg.svd(B)
        resid = np.linalg.norm(r2 @ P[m - b :, :], axis=0)
        conv = resid[:k] <= tol * np.maximum(S[:k], 1e-8 * S[0]) + 1e-14 * anorm
        if conv.all() or (m == dim and np.abs(r2).max() <= small):
            return SingularValues([float(s) for s in S[:k]], k, True, iters)
        # keep the leading Ritz vectors; (m - p) stays a multiple of the block size
        keep = k + (m - k) // 2
        p = max(0, m - b * max(1, -(-(m - keep) // b)))
        f = V[:, m : m + b].copy()
        _rotate_rows(V, m, Qt[:p].T)
        _rotate_rows(U, m, P[:, :p])
        B[:] = 0.0
        B[:p, :p] = np.diag(S[:p])
        V[:, p : p + b] = f
    n_ok = int(np.argmin(conv)) if not conv.all() else k
    return SingularValues([float(s) for s in S[:n_ok]], k, False, iters)


def spectral_summary(graph: Graph, tol: float = 1e-10, svd_tol: float = 1e-6,
                     k: int | None = None, max_iter: int = 10000) -> SpectralSummary:
    rho = spectral_radius(graph, tol, max_iter)
    alg = algebraic_connectivity(graph, tol, max_iter)
    sv = top_k_singular_values(graph, k, svd_tol)
    conv = {
        "spectral_radius": (rho.iterations, rho.residual),
        "algebraic_connectivity": (alg.iterations, alg.residual),
        "singular_values": (sv.iterations, sv.converged),
    }
    return SpectralSummary(rho, alg, sv, conv)
