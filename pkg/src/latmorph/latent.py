"""Latent-space statistics, interpolation, sweeps, and clustering.

Latent distance is measured in per-dimension standard deviations of the
training encodings: an endpoint pair at distance d is built by moving
every latent dimension d of its own standard deviation along a random
sign direction, starting from an origin offset (default -3 standard
deviations from the mean). A sweep evaluates every (distance, length)
configuration with several such directions and scores each decoded
transition with the geometric-smoothness and stiffness-continuity
metrics.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .homogenize import DEFAULT_MATERIAL, MaterialModel
from .metrics import geometric_smoothness, stiffness_continuity, transition_stiffness

SIGMA_FLOOR = 1e-8

SWEEP_DISTANCES = (1.0, 2.0, 3.0, 4.0, 5.0, 6.0)
SWEEP_LENGTHS = (5, 10, 15)
DEFAULT_ORIGIN_OFFSET = -3.0

SWEEP_CSV_HEADER = "model,distance_std,length,direction_seed,c_s_percent,c_k_percent"


class ClusteringError(RuntimeError):
    """k-means kept producing empty clusters."""


@dataclass
class LatentStats:
    """Per-dimension mean and population standard deviation of encoded means."""

    mu: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        self.mu = np.asarray(self.mu, dtype=np.float64).ravel()
        self.sigma = np.asarray(self.sigma, dtype=np.float64).ravel()
        if self.mu.shape != self.sigma.shape:
            raise ValueError("mu and sigma must have the same dimension")

    @property
    def collapsed(self) -> np.ndarray:
        return self.sigma <= SIGMA_FLOOR

    def to_dict(self) -> dict:
        return {"mu": self.mu.tolist(), "sigma": self.sigma.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "LatentStats":
        return cls(np.array(d["mu"]), np.array(d["sigma"]))


def latent_stats(checkpoint, train) -> LatentStats:
    """Encode every training cell and summarize the latent means.

    Dimensions with (near) zero spread are flagged collapsed and floored
    at SIGMA_FLOOR so distance-scaled endpoints stay finite.
    """
    mus = checkpoint.encode_mu(train.pixels(), train.stiffness_array())
    mu = mus.mean(axis=0)
    sigma = mus.std(axis=0)  # population std
    if np.any(sigma < SIGMA_FLOOR):
        collapsed = np.flatnonzero(sigma < SIGMA_FLOOR)
        warnings.warn(
            f"latent dimensions {collapsed.tolist()} are collapsed; sigma floored",
            stacklevel=2,
        )
        sigma = np.maximum(sigma, SIGMA_FLOOR)
    return LatentStats(mu=mu, sigma=sigma)


def interpolate_linear(z_a: np.ndarray, z_b: np.ndarray, n: int) -> np.ndarray:
    """n evenly spaced latent points from z_a to z_b inclusive (n >= 2)."""
    if n < 2:
        raise ValueError(f"need at least 2 points, got n={n}")
    z_a = np.asarray(z_a, dtype=np.float64)
    z_b = np.asarray(z_b, dtype=np.float64)
    t = np.arange(n)[:, None] / (n - 1)
    pts = z_a[None, :] + t * (z_b - z_a)[None, :]
    pts[0] = z_a
    pts[-1] = z_b
    return pts


@dataclass(frozen=True)
class TransitionSpec:
    """One endpoint-pair prescription for the standard-deviation sweep."""

    distance_std: float
    length: int
    direction: np.ndarray  # sign vector, entries in {-1, +1}
    origin_offset: float = DEFAULT_ORIGIN_OFFSET

    def __post_init__(self):
        object.__setattr__(
            self, "direction", np.asarray(self.direction, dtype=np.float64).ravel()
        )
        if self.distance_std < 0:
            raise ValueError("distance must be non-negative")
        if self.length < 2:
            raise ValueError("length must be at least 2")
        if not np.all(np.abs(self.direction) == 1.0):
            raise ValueError("direction entries must be -1 or +1")


def sweep_endpoints(stats: LatentStats, spec: TransitionSpec) -> tuple[np.ndarray, np.ndarray]:
    """Latent endpoints z(t0), z(t0 + d) along z(t) = mu + t * (sigma * u).

    Every dimension moves exactly `distance_std` of its own standard
    deviation, so the reported distance label is exact per dimension.
    """
    step = stats.sigma * spec.direction
    z_a = stats.mu + spec.origin_offset * step
    z_b = stats.mu + (spec.origin_offset + spec.distance_std) * step
    return z_a, z_b


@dataclass
class TransitionRegion:
    """Ordered decoded cells with their latent points and optional tensors."""

    cells: list
    latents: np.ndarray
    stiffnesses: list | None = None

    def __post_init__(self):
        if len(self.cells) != len(self.latents):
            raise ValueError("cells and latents must have equal length")
        if len(self.cells) < 2:
            raise ValueError("transition region needs at least 2 cells")

    def __len__(self) -> int:
        return len(self.cells)


def decode_transition(checkpoint, latents) -> TransitionRegion:
    """Decode a latent sequence into a transition region (grayscale cells)."""
    latents = np.atleast_2d(np.asarray(latents, dtype=np.float64))
    cells = checkpoint.decode(latents)
    return TransitionRegion(cells=[c for c in cells], latents=latents)


def encode_cell(checkpoint, cell: np.ndarray, stiffness: np.ndarray | None = None) -> np.ndarray:
    """Deterministic latent mean of one cell.

    Hybrid checkpoints need the cell's stiffness; when absent it is
    homogenized from the 0.5-thresholded cell. Geometry checkpoints
    ignore a provided stiffness (with a warning).
    """
    cell = np.asarray(cell, dtype=np.float64)
    if checkpoint.architecture == "geometry" and stiffness is not None:
        warnings.warn("geometry checkpoint ignores the stiffness argument", stacklevel=2)
        stiffness = None
    stiff_arr = None if stiffness is None else np.asarray(stiffness)[None, :, :]
    return checkpoint.encode_mu(cell[None, :, :], stiff_arr)[0]


def mesh_interpolate(
    checkpoint, corners, rows: int, cols: int
) -> tuple[np.ndarray, np.ndarray]:
    """Bilinear latent blend of 4 corners decoded on a rows x cols grid.

    corners order: (top-left, top-right, bottom-left, bottom-right).
    Returns (cells (rows, cols, 50, 50), latents (rows, cols, D)).
    """
    if rows < 2 or cols < 2:
        raise ValueError("mesh needs rows >= 2 and cols >= 2")
    z = np.stack([np.asarray(c, dtype=np.float64).ravel() for c in corners])
    if z.shape[0] != 4:
        raise ValueError(f"mesh needs exactly 4 corners, got {z.shape[0]}")
    a = np.arange(rows)[:, None] / (rows - 1)
    b = np.arange(cols)[None, :] / (cols - 1)
    w = np.stack([(1 - a) * (1 - b), (1 - a) * b, a * (1 - b), a * b])  # (4, rows, cols)
    latents = np.einsum("krc,kd->rcd", w, z)
    cells = checkpoint.decode(latents.reshape(-1, z.shape[1]))
    return cells.reshape(rows, cols, 50, 50), latents


@dataclass
class SweepRecord:
    model: str
    distance_std: float
    length: int
    direction_seed: int
    c_s: float
    c_k: float


def _direction_seed(seed: int, i_d: int, i_n: int, j: int) -> int:
    ss = np.random.SeedSequence([int(seed), i_d, i_n, j])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def direction_vector(direction_seed: int, dim: int) -> np.ndarray:
    """Sign vector in {-1,+1}^dim reproducible from its recorded seed."""
    r = np.random.default_rng(direction_seed).random(dim)
    return np.where(r < 0.5, -1.0, 1.0)


def run_sweep(
    checkpoint,
    stats: LatentStats | None = None,
    distances=SWEEP_DISTANCES,
    lengths=SWEEP_LENGTHS,
    directions_per_config: int = 20,
    seed: int = 0,
    material: MaterialModel | None = None,
    origin_offset: float = DEFAULT_ORIGIN_OFFSET,
    verbose: bool = False,
) -> list[SweepRecord]:
    """Evaluate every (distance, length, direction) interpolation.

    Deterministic for a fixed seed; records are ordered by (distance,
    length, direction index). Each record decodes a transition, scores
    C_s on the grayscale cells and C_K on the homogenized tensors of the
    0.5-thresholded cells, normalized with the checkpoint's training
    stiffness statistics.
    """
    stats = checkpoint.latent_stats if stats is None else stats
    material = checkpoint.material if material is None else material
    distances = [float(d) for d in distances]
    lengths = [int(n) for n in lengths]
    if min(lengths) < 4:
        raise ValueError("geometric smoothness needs transition lengths of at least 4")
    dim = stats.mu.size

    records = []
    total = len(distances) * len(lengths) * directions_per_config
    for i_d, d in enumerate(distances):
        for i_n, n in enumerate(lengths):
            for j in range(directions_per_config):
                dseed = _direction_seed(seed, i_d, i_n, j)
                spec = TransitionSpec(
                    distance_std=d,
                    length=n,
                    direction=direction_vector(dseed, dim),
                    origin_offset=origin_offset,
                )
                z_a, z_b = sweep_endpoints(stats, spec)
                region = decode_transition(checkpoint, interpolate_linear(z_a, z_b, n))
                tensors = transition_stiffness(region, material)
                c_s = geometric_smoothness(region.cells).c_s
                c_k = stiffness_continuity(tensors, checkpoint.stiffness_stats).c_k
                records.append(
                    SweepRecord(
                        model=checkpoint.architecture,
                        distance_std=d,
                        length=n,
                        direction_seed=dseed,
                        c_s=c_s,
                        c_k=c_k,
                    )
                )
                if verbose and len(records) % 30 == 0:
                    print(f"  sweep {len(records)}/{total}")
    return records


def sweep_records_to_csv(records) -> str:
    """Render sweep records with the fixed header, 6-decimal floats, LF endings."""
    lines = [SWEEP_CSV_HEADER]
    for r in records:
        lines.append(
            f"{r.model},{r.distance_std:.6f},{r.length},{r.direction_seed},"
            f"{r.c_s:.6f},{r.c_k:.6f}"
        )
    return "\n".join(lines) + "\n"


def parse_sweep_csv(text: str) -> list[SweepRecord]:
    lines = text.strip().split("\n")
    if not lines or lines[0] != SWEEP_CSV_HEADER:
        raise ValueError(f"line 1: expected header {SWEEP_CSV_HEADER!r}")
    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 6:
            raise ValueError(f"line {lineno}: expected 6 fields, got {len(parts)}")
        try:
            records.append(
                SweepRecord(
                    model=parts[0],
                    distance_std=float(parts[1]),
                    length=int(parts[2]),
                    direction_seed=int(parts[3]),
                    c_s=float(parts[4]),
                    c_k=float(parts[5]),
                )
            )
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if not records:
        raise ValueError("line 2: sweep CSV has no data rows")
    return records


# ---------------------------------------------------------------------------
# clustering
# ---------------------------------------------------------------------------

@dataclass
class ClusterResult:
    labels: np.ndarray
    centroids: np.ndarray
    inertia: float
    inertia_history: list[float] = field(default_factory=list)


def _kmeans_plus_plus(X: np.ndarray, k: int, rng) -> np.ndarray:
    n = X.shape[0]
    centroids = np.empty((k, X.shape[1]))
    centroids[0] = X[rng.integers(n)]
    d2 = ((X - centroids[0]) ** 2).sum(axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            centroids[i:] = X[rng.integers(n, size=k - i)]
            break
        centroids[i] = X[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, ((X - centroids[i]) ** 2).sum(axis=1))
    return centroids


def _kmeans_single(X: np.ndarray, k: int, rng, max_iter: int = 300) -> ClusterResult:
    centroids = _kmeans_plus_plus(X, k, rng)
    labels = np.zeros(X.shape[0], dtype=np.int64)
    history = []
    for _ in range(max_iter):
        d2 = ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_labels = d2.argmin(axis=1)
        history.append(float(d2[np.arange(X.shape[0]), new_labels].sum()))
        for c in range(k):  # empty clusters keep their centroid
            members = X[new_labels == c]
            if len(members):
                centroids[c] = members.mean(axis=0)
        if np.array_equal(new_labels, labels) and len(history) > 1:
            break
        labels = new_labels
    return ClusterResult(
        labels=labels, centroids=centroids, inertia=history[-1], inertia_history=history
    )


def cluster_latent(checkpoint, train, k: int = 4, seed: int = 0, n_init: int = 10) -> ClusterResult:
    """k-means over encoded training means (k-means++ seeding, best of n_init).

    Restarts that converge with an empty cluster are discarded; if all
    n_init attempts do, a ClusteringError is raised.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    X = checkpoint.encode_mu(train.pixels(), train.stiffness_array())
    if k > X.shape[0]:
        raise ValueError(f"k={k} exceeds the number of points {X.shape[0]}")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(n_init):
        result = _kmeans_single(X, k, rng)
        if len(np.unique(result.labels)) < k:
            continue
        if best is None or result.inertia < best.inertia:
            best = result
    if best is None:
        raise ClusteringError(f"all {n_init} k-means restarts produced an empty cluster")
    return best


def select_cluster_pair(labels: np.ndarray, rng, intra: bool) -> tuple[int, int]:
    """Random index pair with endpoints in the same (intra) or different clusters."""
    labels = np.asarray(labels)
    for _ in range(1000):
        i, j = rng.integers(0, labels.size, size=2)
        if i == j:
            continue
        if (labels[i] == labels[j]) == intra:
            return int(i), int(j)
    raise ClusteringError("could not sample a suitable endpoint pair")
