"""Spectral scene features.

A node's observation is summarized per category by the magnitude of the 2D
DFT of its binary mask: magnitudes are mean-pooled over the vertical
frequency axis (DC row included), truncated to the first ``eta`` horizontal
frequencies, passed through log1p (so empty masks map to exactly 0 and
features stay finite and nonnegative), and the whole K x eta matrix is
scaled by its maximum entry. Because only magnitudes are kept, the feature
is invariant to circular column shifts of the panorama, i.e. to the agent's
heading.

Instruction tokens get synthetic reference features: a single nonzero row
holding ``lambda * |sinc(j/2 - eta/4)|`` (normalized sinc, 0-based j), where
lambda is the category's median projected box width in pixels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .env import EnvGraph, PanoObservation, project_visible_boxes
from .errors import (
    ConfigurationError,
    DegenerateBoxError,
    MissingStatsError,
    ShapeError,
)

DEFAULT_ETA = 64  # quarter spectrum for the default 256-column panorama


@dataclass(frozen=True)
class SosFeature:
    """Nonnegative (K, eta) matrix; row k is category k's pooled spectrum."""

    values: np.ndarray

    def __post_init__(self):
        v = self.values
        if v.ndim != 2:
            raise ShapeError(f"feature must be 2-D, got shape {v.shape}")
        if not np.isfinite(v).all():
            raise ValueError("feature contains non-finite entries")
        if (v < 0).any():
            raise ValueError("feature contains negative entries")

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def to_doc(self) -> dict:
        """Record form for the results stream: (K, eta) header + row-major values."""
        return {
            "shape": [int(self.shape[0]), int(self.shape[1])],
            "values": [float(v) for v in self.values.ravel()],
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "SosFeature":
        K, eta = (int(v) for v in doc["shape"])
        return cls(values=np.array(doc["values"], dtype=float).reshape(K, eta))


@dataclass(frozen=True)
class CategoryStats:
    """Median projected box width/height (pixels) per category with samples."""

    category_count: int
    median_width: dict[int, float]
    median_height: dict[int, float]
    sample_count: dict[int, int]

    def has(self, category: int) -> bool:
        return category in self.median_width

    def absent_categories(self) -> list[int]:
        return [k for k in range(self.category_count) if k not in self.median_width]


def _max_normalize(values: np.ndarray) -> np.ndarray:
    peak = values.max()
    return values / peak if peak > 0 else values


def compute_sos(obs: PanoObservation, eta: int = DEFAULT_ETA) -> SosFeature:
    """Pooled log-magnitude spectrum of each category mask, max-normalized."""
    K, H, W = obs.masks.shape
    if not 1 <= eta <= W // 2 + 1:
        raise ConfigurationError(f"eta must be in [1, {W // 2 + 1}], got {eta}")
    mag = np.abs(np.fft.rfft2(obs.masks.astype(np.float64)))
    pooled = mag.mean(axis=1)[:, :eta]
    return SosFeature(values=_max_normalize(np.log1p(pooled)))


def reference_sos(
    token: int, stats: CategoryStats, eta: int = DEFAULT_ETA, K: int | None = None
) -> SosFeature:
    """Synthetic feature for an instruction token: a scaled |sinc| profile."""
    if K is None:
        K = stats.category_count
    if not stats.has(token):
        raise MissingStatsError(f"no box statistics for category {token}")
    lam = stats.median_width[token]
    profile = lam * np.abs(np.sinc(np.arange(eta) / 2.0 - eta / 4.0))
    values = np.zeros((K, eta))
    values[token] = profile
    return SosFeature(values=_max_normalize(values))


def reference_row_profile(eta: int = DEFAULT_ETA) -> np.ndarray:
    """The unscaled |sinc| row used by reference features; peak-normalized."""
    profile = np.abs(np.sinc(np.arange(eta) / 2.0 - eta / 4.0))
    return profile / profile.max()


def _lower_median(samples: list[int]) -> float:
    ordered = sorted(samples)
    return float(ordered[(len(ordered) - 1) // 2])


def collect_category_stats(env: EnvGraph) -> CategoryStats:
    """Median projected box width/height over all nodes' rendered panoramas."""
    widths: dict[int, list[int]] = {}
    heights: dict[int, list[int]] = {}
    for node in range(env.node_count):
        for box in project_visible_boxes(env, node):
            widths.setdefault(box.category, []).append(box.pixel_width)
            heights.setdefault(box.category, []).append(box.pixel_height)
    return CategoryStats(
        category_count=env.category_count,
        median_width={k: _lower_median(v) for k, v in widths.items()},
        median_height={k: _lower_median(v) for k, v in heights.items()},
        sample_count={k: len(v) for k, v in widths.items()},
    )


def cosine_similarity(a: SosFeature, b: SosFeature) -> float:
    """Cosine of the flattened features; 0.0 when either has zero norm."""
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch: {a.shape} vs {b.shape}")
    return cosine_of_vectors(a.flat(), b.flat())


def cosine_of_vectors(u: np.ndarray, v: np.ndarray) -> float:
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(u @ v) / (nu * nv)


# ---------------- front view -> panorama ----------------


@dataclass(frozen=True)
class PanoBox:
    """A panorama rectangle in continuous pixel coordinates, seam-split."""

    col_spans: tuple[tuple[float, float], ...]
    row_span: tuple[float, float]

    @property
    def width(self) -> float:
        return sum(b - a for a, b in self.col_spans)

    @property
    def height(self) -> float:
        return self.row_span[1] - self.row_span[0]


def frontview_to_pano_box(
    box: tuple[float, float, float, float],
    cam_heading: float,
    fov: float,
    front_dims: tuple[int, int],
    pano_dims: tuple[int, int],
) -> PanoBox:
    """Map a front-view rectangle onto the equirectangular panorama.

    ``box`` is (x0, y0, x1, y1) in front-view pixels, x right, y down. A
    pinhole camera with horizontal field of view ``fov`` looks along
    ``cam_heading``; square pixels fix the vertical field of view via the
    aspect ratio. Column x maps through
    theta = cam_heading + atan((2x/W_f - 1) * tan(fov/2)) and rows map
    analogously through the elevation angle. The output rectangle spans the
    transformed corners and splits in two when it crosses the 2*pi seam.
    """
    x0, y0, x1, y1 = box
    Wf, Hf = front_dims
    Wp, Hp = pano_dims
    if not 0 < fov < math.pi:
        raise ConfigurationError(f"fov must be in (0, pi), got {fov}")
    if x1 <= x0 or y1 <= y0:
        raise DegenerateBoxError(f"zero-area box {box}")
    if x0 < 0 or y0 < 0 or x1 > Wf or y1 > Hf:
        raise ValueError(f"box {box} exceeds front-view bounds {front_dims}")

    tan_half = math.tan(fov / 2)
    tan_half_v = tan_half * Hf / Wf

    def heading(x: float) -> float:
        return cam_heading + math.atan((2 * x / Wf - 1) * tan_half)

    def elevation(y: float) -> float:
        return math.atan((1 - 2 * y / Hf) * tan_half_v)

    def col(theta: float) -> float:
        return (theta % (2 * math.pi)) / (2 * math.pi) * Wp

    def row(phi: float) -> float:
        return (0.5 - phi / math.pi) * Hp

    c0, c1 = col(heading(x0)), col(heading(x1))
    r0, r1 = row(elevation(y0)), row(elevation(y1))
    if c1 >= c0:
        spans = ((c0, c1),)
    else:  # crosses the seam
        spans = ((c0, float(Wp)), (0.0, c1))
    return PanoBox(col_spans=spans, row_span=(r0, r1))
