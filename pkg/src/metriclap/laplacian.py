"""Kernel graphs, graph Laplacians and the bandwidth/scaling schedules.

Dense matrices only, intended for desk scale (n <= 8192). Self-weights are
kept: W has unit diagonal and degrees are full row sums, so the diagonal
contributes to D but cancels in D - W.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .oracles import MetricOracle


def gaussian_kernel(d, eps):
    """Gaussian kernel exp(-d^2 / (2 eps)) in (0, 1]."""
    if eps <= 0:
        raise ValueError(f"bandwidth must be positive, got {eps}")
    return np.exp(-np.square(d) / (2.0 * eps))


def laplace_kernel(d, beta):
    """Laplace kernel exp(-d / (2 beta)).

    Applying the Gaussian kernel to a distance whose square is another
    distance (e.g. the rescaled rotating-ball L2, whose square is the L1
    distance) is the same as applying this kernel to the squared-distance
    metric with beta equal to the Gaussian bandwidth.
    """
    if beta <= 0:
        raise ValueError(f"bandwidth must be positive, got {beta}")
    return np.exp(-np.asarray(d, dtype=float) / (2.0 * beta))


@dataclass(frozen=True)
class KernelGraph:
    """Sample points with their Gaussian kernel weight matrix.

    W is symmetric with unit diagonal and entries in (0, 1]; degrees are the
    full row sums and are strictly positive.
    """

    points: np.ndarray
    epsilon: float
    W: np.ndarray
    degrees: np.ndarray

    @property
    def n(self) -> int:
        return self.W.shape[0]


@dataclass(frozen=True)
class ScheduleParams:
    """Inputs of the bandwidth schedule eps_n = 2 n^(-1/(m+2+alpha))."""

    n: int
    m: int = 1
    alpha: float = 0.01
    vol: float = 2.0 * np.pi

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")


def epsilon_schedule(params: ScheduleParams) -> float:
    """Bandwidth 2 n^(-1/(m+2+alpha)), strictly decreasing in n."""
    return 2.0 * float(params.n) ** (-1.0 / (params.m + 2 + params.alpha))


def scaling_constant(n: int, eps: float, m: int = 1, vol: float = 2.0 * np.pi) -> float:
    """Normalization 2 vol / (eps (2 pi eps)^(m/2) n) applied to the discrete Laplacian.

    With vol = 2 pi and m = 1 this is 4 pi / (eps (2 pi eps)^(1/2) n), the
    constant that sends the scaled discrete Laplacian of f on the uniformly
    sampled unit circle to the (positive) Laplace-Beltrami operator of f.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if n < 1:
        raise ValueError("n must be >= 1")
    return 2.0 * vol / (eps * (2.0 * np.pi * eps) ** (m / 2.0) * n)


def build_weight_matrix(points, metric: MetricOracle, eps: float) -> KernelGraph:
    """Assemble the Gaussian kernel graph over sample points.

    Parameters
    ----------
    points : array
        n chart coordinates; (n,) for scalar charts, (n, dim) for vector ones.
    metric : MetricOracle
        Pairwise distance oracle.
    eps : float
        Kernel bandwidth.

    Returns
    -------
    KernelGraph
        W[i, j] = exp(-d(x_i, x_j)^2 / (2 eps)); computed once on the upper
        triangle and mirrored, with the diagonal set to exactly 1.
    """
    pts = np.asarray(points, dtype=float)
    n = pts.shape[0]
    if n < 2:
        raise ValueError("need at least two points")
    if eps <= 0:
        raise ValueError(f"bandwidth must be positive, got {eps}")
    try:
        dist = metric.pairwise(pts)
    except Exception as exc:  # surface oracle failures with context
        raise RuntimeError(f"metric oracle {metric.name!r} failed on point set") from exc
    if not np.all(np.isfinite(dist)):
        i, j = np.argwhere(~np.isfinite(dist))[0]
        raise ValueError(
            f"metric oracle {metric.name!r} returned non-finite distance at pair ({i}, {j})"
        )
    K = gaussian_kernel(dist, eps)
    W = np.triu(K, 1)
    W = W + W.T
    np.fill_diagonal(W, 1.0)
    return KernelGraph(points=pts, epsilon=float(eps), W=W, degrees=W.sum(axis=1))


def unnormalized_laplacian(g: KernelGraph) -> np.ndarray:
    """L = D - W; symmetric with zero row sums."""
    L = -g.W.copy()
    np.fill_diagonal(L, g.degrees - np.diag(g.W))
    return L


def normalized_laplacian(g: KernelGraph) -> np.ndarray:
    """Random-walk normalization I - D^{-1} W; eigenvalues lie in [0, 2]."""
    Lrw = -g.W / g.degrees[:, None]
    Lrw[np.diag_indices_from(Lrw)] += 1.0
    return Lrw


def discrete_laplacian_apply(points, metric: MetricOracle, eps: float, f, x) -> float:
    """Evaluate sum_j k_eps(x, x_j) (f(x) - f(x_j)) at an arbitrary point x.

    x need not be one of the samples; with a single sample at x itself the
    value is 0, as it is for constant f.
    """
    pts = np.asarray(points, dtype=float)
    d = np.asarray(metric(x, pts), dtype=float)
    k = gaussian_kernel(d, eps)
    return float(np.sum(k * (f(x) - f(pts))))


def dump_matrix_csv(matrix: np.ndarray, path) -> None:
    """Debug dump of a dense matrix as comma-separated rows."""
    np.savetxt(path, matrix, delimiter=",")
