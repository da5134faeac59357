"""Closed-form metric oracles on the circle and on parameter spaces.

Every oracle is a pure pairwise-distance function on chart coordinates:
angles in radians for the circle families, vectors for the optimal-transport
families, a scalar in (-1, 1) for the cubic embedding. All functions
broadcast over numpy arrays; angles are canonicalized to [0, 2*pi) on entry.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

TWO_PI = 2.0 * np.pi

# quadrant boundaries where the weighted-l1 chart loses smoothness
WEIGHTED_L1_EXCLUDED = (0.0, 0.5 * np.pi, np.pi, 1.5 * np.pi)


def canonical_angle(theta):
    """Map any real angle to its representative in [0, 2*pi)."""
    wrapped = np.mod(theta, TWO_PI)
    # np.mod can round tiny negatives up to exactly 2*pi
    return np.where(wrapped == TWO_PI, 0.0, wrapped)


def circle_separation(theta, phi):
    """Geodesic (arc-length) separation of two angles, in [0, pi]."""
    d = np.abs(canonical_angle(theta) - canonical_angle(phi))
    return np.minimum(d, TWO_PI - d)


def chordal_distance(theta, phi):
    """Straight-line distance between (cos t, sin t) points: 2|sin((t-p)/2)|."""
    return 2.0 * np.abs(np.sin((canonical_angle(theta) - canonical_angle(phi)) / 2.0))


def geodesic_distance_circle(theta, phi):
    """Arc-length distance on the unit circle."""
    return circle_separation(theta, phi)


def _require_radius(r):
    if not (0.0 < r <= 1.0):
        raise ValueError(f"radius must lie in (0, 1], got {r}")


def disk_intersection_area(r, theta):
    """Overlap area of two radius-r disks centered on the unit circle.

    The disk centers are (1, 0) and (cos theta, sin theta). With
    s = sin(theta/2) the lens area is
        2 (r^2 arccos(s/r) - s sqrt(r^2 - s^2))
    when s < r, and 0 once the disks are disjoint (s >= r).
    """
    _require_radius(r)
    s = np.sin(canonical_angle(theta) / 2.0)
    q = np.clip(s / r, 0.0, 1.0)
    lens = 2.0 * (r * r * np.arccos(q) - s * np.sqrt(np.maximum(r * r - s * s, 0.0)))
    return np.where(s >= r, 0.0, lens)


def rotating_ball_l1(r, theta, phi):
    """L1 distance between height-1/(4r) disk indicators rotating on the circle.

    Each image is (1/4r) * 1_{B_r((cos a, sin a))}; the L1 distance is the
    symmetric-difference area scaled by 1/(4r). With s = sin(separation/2):
        pi*r/2 - r*arccos(s/r) + s*sqrt(1 - (s/r)^2)   if s < r,
        pi*r/2                                          otherwise (disjoint).
    """
    _require_radius(r)
    s = np.sin(circle_separation(theta, phi) / 2.0)
    q = np.clip(s / r, 0.0, 1.0)
    overlap = 0.5 * np.pi * r - r * np.arccos(q) + s * np.sqrt(np.maximum(1.0 - q * q, 0.0))
    return np.where(s >= r, 0.5 * np.pi * r, overlap)


def rotating_ball_l2(r, theta, phi):
    """Rescaled L2 distance sqrt(4r)*||.||_L2 between rotating disk indicators.

    With the 1/(4r) indicator height the square of this distance equals the
    L1 distance exactly, so it is computed as sqrt(rotating_ball_l1).
    """
    return np.sqrt(rotating_ball_l1(r, theta, phi))


def weighted_l1_circle(w1, w2, theta, phi):
    """Weighted l1 distance of circle points: w1|cos t - cos p| + w2|sin t - sin p|."""
    if w1 <= 0 or w2 <= 0:
        raise ValueError(f"weights must be positive, got w1={w1}, w2={w2}")
    t = canonical_angle(theta)
    p = canonical_angle(phi)
    return w1 * np.abs(np.cos(t) - np.cos(p)) + w2 * np.abs(np.sin(t) - np.sin(p))


def wasserstein_translation(theta, theta_prime):
    """W2 distance between translated copies of a fixed reference measure.

    Translating an absolutely continuous measure by theta and theta_prime
    gives W2 = |theta - theta_prime| (Euclidean norm over the last axis).
    """
    a = np.asarray(theta, dtype=float)
    b = np.asarray(theta_prime, dtype=float)
    if a.shape[-1:] != b.shape[-1:]:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return np.linalg.norm(a - b, axis=-1)


def wasserstein_dilation(theta, theta_prime, moments):
    """W2 distance between coordinatewise dilations of a reference measure.

    moments[j] is the second moment of the j-th coordinate of the reference
    measure; the distance is sqrt(sum_j moments[j] (theta_j - theta'_j)^2).
    Dilation factors must be strictly positive.
    """
    a = np.asarray(theta, dtype=float)
    b = np.asarray(theta_prime, dtype=float)
    c = np.asarray(moments, dtype=float)
    if np.any(a <= 0) or np.any(b <= 0):
        raise ValueError("dilation components must be strictly positive")
    if np.any(c < 0):
        raise ValueError("second moments must be nonnegative")
    return np.sqrt(np.sum(c * (a - b) ** 2, axis=-1))


def cubic_embedding_distance(x, y):
    """|x^3 - y^3| on (-1, 1); its squared form is flat to second order at 0."""
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if np.any(np.abs(xa) >= 1.0) or np.any(np.abs(ya) >= 1.0):
        raise ValueError("cubic embedding chart is (-1, 1)")
    return np.abs(xa**3 - ya**3)


@dataclass(frozen=True)
class MetricOracle:
    """A named pairwise-distance function over chart coordinates.

    fn must be symmetric, vanish on the diagonal, and broadcast over numpy
    arrays (vectors along the last axis when vector_dim is set). Oracles are
    pure and reentrant; there is no shared mutable state.
    """

    name: str
    fn: Callable
    params: Mapping[str, float] = field(default_factory=dict)
    domain_note: str = ""
    vector_dim: int | None = None

    def __call__(self, x, y):
        return self.fn(x, y)

    def pairwise(self, points) -> np.ndarray:
        """Full symmetric distance matrix for an array of chart points."""
        pts = np.asarray(points, dtype=float)
        if self.vector_dim is None:
            return np.asarray(self.fn(pts[:, None], pts[None, :]), dtype=float)
        return np.asarray(self.fn(pts[:, None, :], pts[None, :, :]), dtype=float)


def chordal_oracle() -> MetricOracle:
    return MetricOracle("chordal", chordal_distance)


def geodesic_oracle() -> MetricOracle:
    return MetricOracle("geodesic", geodesic_distance_circle)


def ball_l1_oracle(r: float) -> MetricOracle:
    _require_radius(r)
    return MetricOracle(
        "ball-l1",
        lambda t, p: rotating_ball_l1(r, t, p),
        params={"r": r},
    )


def ball_l2_oracle(r: float) -> MetricOracle:
    _require_radius(r)
    return MetricOracle(
        "ball-l2",
        lambda t, p: rotating_ball_l2(r, t, p),
        params={"r": r},
    )


def weighted_l1_oracle(w1: float, w2: float) -> MetricOracle:
    return MetricOracle(
        "weighted-l1",
        lambda t, p: weighted_l1_circle(w1, w2, t, p),
        params={"w1": w1, "w2": w2},
        domain_note="chart is smooth away from the quadrant boundaries "
        "{0, pi/2, pi, 3pi/2}",
    )


def translation_oracle(dim: int) -> MetricOracle:
    return MetricOracle("w2-translation", wasserstein_translation, vector_dim=dim)


def dilation_oracle(moments) -> MetricOracle:
    c = tuple(float(v) for v in np.atleast_1d(moments))
    return MetricOracle(
        "w2-dilation",
        lambda a, b: wasserstein_dilation(a, b, np.asarray(c)),
        params={f"c{j}": v for j, v in enumerate(c)},
        domain_note="dilation factors restricted to the positive orthant",
        vector_dim=len(c),
    )


def cubic_oracle() -> MetricOracle:
    return MetricOracle(
        "cubic",
        cubic_embedding_distance,
        domain_note="chart is (-1, 1); the induced form degenerates at 0",
    )


def make_oracle(name: str, **params) -> MetricOracle:
    """Construct an oracle by name + parameter map (experiment config entry point)."""
    if name == "chordal":
        return chordal_oracle()
    if name == "geodesic":
        return geodesic_oracle()
    if name == "ball-l1":
        return ball_l1_oracle(params.get("r", 0.75))
    if name == "ball-l2":
        return ball_l2_oracle(params.get("r", 0.75))
    if name == "weighted-l1":
        return weighted_l1_oracle(params.get("w1", 1.0), params.get("w2", 2.0))
    if name == "w2-translation":
        return translation_oracle(int(params.get("dim", 2)))
    if name == "w2-dilation":
        return dilation_oracle(params.get("moments", (1.0, 1.0)))
    if name == "cubic":
        return cubic_oracle()
    raise ValueError(f"unknown metric oracle: {name!r}")
