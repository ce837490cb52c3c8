"""Geometry-only and hybrid (geometry + stiffness) beta-VAEs.

Both models share the same convolutional backbone: four stride-2
convolutions (widths 32/64/128/256, spatial 50->25->13->7->4) feeding
two affine heads for the latent mean and log-variance, and a mirrored
transposed-convolution decoder ending in a logistic activation. The
hybrid encoder additionally passes the min-max normalized flattened
stiffness tensor through one affine layer to a 16-wide embedding that
is concatenated with the flattened geometry features before the heads.

The training objective is

    total = mse + beta_norm * kl,   beta_norm = beta * D / W

with mse the per-pixel mean squared reconstruction error and kl the
Gaussian KL divergence summed over latent dimensions. Training samples
z = mu + exp(logvar/2) * noise; evaluation and encoding use mu, so
downstream interpolation endpoints are deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import torch
from torch import nn

from .dataset import Dataset, SplitSpec
from .homogenize import DEFAULT_MATERIAL, MaterialModel, StiffnessStats, normalize_stiffness
from .latent import LatentStats, latent_stats

ARCHITECTURES = ("geometry", "hybrid")
ENCODER_CHANNELS = (32, 64, 128, 256)
_BOTTLENECK = 4  # spatial size after four stride-2 convolutions of a 50px image
MIN_LOSS_IMPROVEMENT = 1e-6


class TrainingDivergedError(RuntimeError):
    """Loss became non-finite; carries the 1-based epoch index."""

    def __init__(self, epoch: int):
        super().__init__(f"training diverged at epoch {epoch}")
        self.epoch = epoch


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 32
    learning_rate: float = 1e-3
    max_epochs: int = 200
    patience_epochs: int = 10
    beta: float = 1.0
    latent_dim: int = 16
    image_width: int = 50
    split: SplitSpec = field(default_factory=SplitSpec)
    seed: int = 0

    @property
    def beta_norm(self) -> float:
        return self.beta * self.latent_dim / self.image_width

    def to_dict(self) -> dict:
        return {
            "batch_size": self.batch_size,
            "learning_rate": self.learning_rate,
            "max_epochs": self.max_epochs,
            "patience_epochs": self.patience_epochs,
            "beta": self.beta,
            "latent_dim": self.latent_dim,
            "image_width": self.image_width,
            "split": {"train_fraction": self.split.train_fraction, "seed": self.split.seed},
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        d = dict(d)
        s = d.pop("split", {})
        return cls(split=SplitSpec(s.get("train_fraction", 0.85), s.get("seed", 0)), **d)


class _Encoder(nn.Module):
    """Convolutional feature stack shared by both architectures."""

    def __init__(self, channels, kernel_size: int):
        super().__init__()
        pad = kernel_size // 2  # odd kernels keep the 50->25->13->7->4 path
        layers = []
        prev = 1
        for width in channels:
            layers += [
                nn.Conv2d(prev, width, kernel_size=kernel_size, stride=2, padding=pad),
                nn.ReLU(),
            ]
            prev = width
        self.conv = nn.Sequential(*layers)
        self.out_features = channels[-1] * _BOTTLENECK * _BOTTLENECK

    def forward(self, x):
        return self.conv(x).flatten(1)


class _Decoder(nn.Module):
    def __init__(self, latent_dim: int, channels, kernel_size: int):
        super().__init__()
        pad = kernel_size // 2
        rev = list(reversed(channels))
        self.fc = nn.Linear(latent_dim, rev[0] * _BOTTLENECK * _BOTTLENECK)
        self.c0 = rev[0]
        layers = []
        for i, width in enumerate(rev[1:]):
            layers += [
                nn.ConvTranspose2d(rev[i], width, kernel_size=kernel_size, stride=2, padding=pad),
                nn.ReLU(),
            ]
        # final stage needs output_padding to land exactly on 50
        layers.append(
            nn.ConvTranspose2d(
                rev[-1], 1, kernel_size=kernel_size, stride=2, padding=pad, output_padding=1
            )
        )
        self.deconv = nn.Sequential(*layers)

    def forward(self, z):
        h = torch.relu(self.fc(z)).view(-1, self.c0, _BOTTLENECK, _BOTTLENECK)
        return torch.sigmoid(self.deconv(h))


class GeometryVAE(nn.Module):
    architecture = "geometry"

    def __init__(self, latent_dim: int = 16, channels=ENCODER_CHANNELS, kernel_size: int = 5):
        super().__init__()
        self.latent_dim = latent_dim
        self.channels = tuple(channels)
        self.kernel_size = kernel_size
        self.encoder = _Encoder(self.channels, kernel_size)
        self.fc_mu = nn.Linear(self.encoder.out_features, latent_dim)
        self.fc_logvar = nn.Linear(self.encoder.out_features, latent_dim)
        self.decoder = _Decoder(latent_dim, self.channels, kernel_size)

    def encode(self, x, k=None):
        h = self.encoder(x)
        return self.fc_mu(h), self.fc_logvar(h)

    def decode(self, z):
        return self.decoder(z)

    def forward(self, x, k=None, noise=None):
        mu, logvar = self.encode(x, k)
        z = mu if noise is None else mu + torch.exp(0.5 * logvar) * noise
        return self.decode(z), mu, logvar


class HybridVAE(nn.Module):
    architecture = "hybrid"

    def __init__(self, latent_dim: int = 16, channels=ENCODER_CHANNELS, kernel_size: int = 5,
                 stiffness_embed: int = 16):
        super().__init__()
        self.latent_dim = latent_dim
        self.channels = tuple(channels)
        self.kernel_size = kernel_size
        self.encoder = _Encoder(self.channels, kernel_size)
        self.fc_stiffness = nn.Linear(9, stiffness_embed)
        joint = self.encoder.out_features + stiffness_embed
        self.fc_mu = nn.Linear(joint, latent_dim)
        self.fc_logvar = nn.Linear(joint, latent_dim)
        self.decoder = _Decoder(latent_dim, self.channels, kernel_size)

    def encode(self, x, k):
        if k is None:
            raise ValueError("hybrid encoder requires the normalized stiffness input")
        h = torch.cat([self.encoder(x), self.fc_stiffness(k)], dim=1)
        return self.fc_mu(h), self.fc_logvar(h)

    def decode(self, z):
        return self.decoder(z)

    def forward(self, x, k, noise=None):
        mu, logvar = self.encode(x, k)
        z = mu if noise is None else mu + torch.exp(0.5 * logvar) * noise
        return self.decode(z), mu, logvar


def build_model(architecture: str, config: TrainConfig, seed: int | None = None,
                channels=ENCODER_CHANNELS, kernel_size: int = 5):
    """Fresh model with weights deterministically initialized from the seed."""
    if architecture not in ARCHITECTURES:
        raise ValueError(f"unknown architecture {architecture!r}; expected one of {ARCHITECTURES}")
    torch.manual_seed(config.seed if seed is None else seed)
    if architecture == "geometry":
        return GeometryVAE(config.latent_dim, channels, kernel_size)
    return HybridVAE(config.latent_dim, channels, kernel_size)


def loss_terms(recon, target, mu, logvar, beta_norm: float):
    """(total, mse, kl) averaged over the batch.

    mse is the mean over pixels of the squared error; kl is
    -0.5 * sum_d (1 + logvar - mu^2 - exp(logvar)) per sample.
    """
    mse = torch.mean((recon - target) ** 2)
    kl = (-0.5 * (1.0 + logvar - mu**2 - torch.exp(logvar)).sum(dim=1)).mean()
    return mse + beta_norm * kl, mse, kl


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------

class EarlyStopper:
    """Stop after `patience` consecutive epochs without the best loss improving."""

    def __init__(self, patience: int, min_delta: float = MIN_LOSS_IMPROVEMENT):
        self.patience = patience
        self.min_delta = min_delta
        self.best = math.inf
        self.stale = 0

    def update(self, loss: float) -> bool:
        """Record one epoch's loss; True means training should stop now."""
        if self.best - loss >= self.min_delta:
            self.best = loss
            self.stale = 0
        else:
            self.stale += 1
        return self.stale >= self.patience

    @property
    def improved(self) -> bool:
        return self.stale == 0


def _dataset_tensors(ds: Dataset, stats: StiffnessStats | None):
    x = torch.from_numpy(ds.pixels().astype(np.float32)).unsqueeze(1)
    if stats is None:
        return x, None
    k = np.stack([normalize_stiffness(r.stiffness, stats) for r in ds.records])
    return x, torch.from_numpy(k.astype(np.float32))


def _evaluate(model, x, k, beta_norm: float, batch: int = 256):
    """Deterministic (z = mu) loss terms and R-squared over a dataset."""
    model.eval()
    total = mse = kl = 0.0
    sse = 0.0
    n = x.shape[0]
    with torch.no_grad():
        mean_pix = x.mean()
        sst = ((x - mean_pix) ** 2).sum().item()
        for lo in range(0, n, batch):
            xb = x[lo : lo + batch]
            kb = None if k is None else k[lo : lo + batch]
            recon, mu, logvar = model(xb, kb)
            t, m, kld = loss_terms(recon, xb, mu, logvar, beta_norm)
            w = xb.shape[0] / n
            total += t.item() * w
            mse += m.item() * w
            kl += kld.item() * w
            sse += ((recon - xb) ** 2).sum().item()
    r2 = 1.0 - sse / sst if sst > 0 else 0.0
    return total, mse, kl, r2


def train(
    model,
    train_ds: Dataset,
    test_ds: Dataset,
    config: TrainConfig,
    dataset_hash: str | None = None,
    verbose: bool = False,
) -> "ModelCheckpoint":
    """Train to the best test loss with early stopping; returns a checkpoint.

    Hybrid models consume stiffness statistics computed from the training
    split only. The checkpoint keeps the weights of the best test-loss
    epoch, the latent statistics of the training encodings under those
    weights, and the full per-epoch history.
    """
    if not train_ds.records or not test_ds.records:
        raise ValueError("training and test datasets must be non-empty")
    from .homogenize import stiffness_stats as compute_stiffness_stats

    stats = compute_stiffness_stats(train_ds)  # train split only
    is_hybrid = model.architecture == "hybrid"
    x_train, k_train = _dataset_tensors(train_ds, stats if is_hybrid else None)
    x_test, k_test = _dataset_tensors(test_ds, stats if is_hybrid else None)

    beta_norm = config.beta_norm
    opt = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    gen = torch.Generator().manual_seed(config.seed + 1)
    order_rng = np.random.default_rng(config.seed)
    stopper = EarlyStopper(config.patience_epochs)
    history = []
    best_state = {k_: v.detach().clone() for k_, v in model.state_dict().items()}
    n = x_train.shape[0]

    for epoch in range(1, config.max_epochs + 1):
        model.train()
        perm = order_rng.permutation(n)
        run_total = run_mse = run_kl = 0.0
        for lo in range(0, n, config.batch_size):
            idx = perm[lo : lo + config.batch_size]
            xb = x_train[idx]
            kb = None if k_train is None else k_train[idx]
            noise = torch.randn((len(idx), config.latent_dim), generator=gen)
            recon, mu, logvar = model(xb, kb, noise=noise)
            total, mse, kl = loss_terms(recon, xb, mu, logvar, beta_norm)
            if not torch.isfinite(total):
                raise TrainingDivergedError(epoch)
            opt.zero_grad()
            total.backward()
            opt.step()
            w = len(idx) / n
            run_total += total.item() * w
            run_mse += mse.item() * w
            run_kl += kl.item() * w

        test_total, test_mse, test_kl, test_r2 = _evaluate(model, x_test, k_test, beta_norm)
        if not math.isfinite(test_total):
            raise TrainingDivergedError(epoch)
        history.append(
            {
                "epoch": epoch,
                "train_total": run_total,
                "train_mse": run_mse,
                "train_kl": run_kl,
                "test_total": test_total,
                "test_mse": test_mse,
                "test_kl": test_kl,
                "test_r2": test_r2,
            }
        )
        stop = stopper.update(test_total)
        if stopper.improved:
            best_state = {k_: v.detach().clone() for k_, v in model.state_dict().items()}
        if verbose:
            print(
                f"  epoch {epoch:3d}  train {run_total:.5f}  test {test_total:.5f}"
                f"  R2 {test_r2:.4f}{'  *' if stopper.improved else ''}"
            )
        if stop:
            break

    model.load_state_dict(best_state)
    checkpoint = ModelCheckpoint(
        architecture=model.architecture,
        channels=model.channels,
        kernel_size=model.kernel_size,
        state_dict=best_state,
        config=config,
        latent_stats=LatentStats(np.zeros(config.latent_dim), np.ones(config.latent_dim)),
        stiffness_stats=stats,
        material=train_ds.material,
        dataset_hash=train_ds.content_hash() if dataset_hash is None else dataset_hash,
        history=history,
    )
    checkpoint.latent_stats = latent_stats(checkpoint, train_ds)
    return checkpoint


def reconstruction_report(checkpoint: "ModelCheckpoint", data: Dataset) -> tuple[float, float]:
    """(r_squared, pixel_accuracy) of deterministic reconstructions.

    r_squared is 1 - SSE/SST over all pixel values with SST about the
    global pixel mean; pixel_accuracy thresholds the reconstruction at
    0.5 and counts matches against the binary target.
    """
    if not data.records:
        raise ValueError("dataset is empty")
    pix = data.pixels()
    mus = checkpoint.encode_mu(pix, data.stiffness_array())
    recon = checkpoint.decode(mus)
    sse = float(((recon - pix) ** 2).sum())
    sst = float(((pix - pix.mean()) ** 2).sum())
    r2 = 1.0 - sse / sst if sst > 0 else 0.0
    accuracy = float(((recon >= 0.5) == (pix >= 0.5)).mean())
    return r2, accuracy


# ---------------------------------------------------------------------------
# checkpoints
# ---------------------------------------------------------------------------

@dataclass
class ModelCheckpoint:
    """Self-contained trained model: weights plus everything downstream needs."""

    architecture: str
    channels: tuple
    kernel_size: int
    state_dict: dict
    config: TrainConfig
    latent_stats: LatentStats
    stiffness_stats: StiffnessStats
    material: MaterialModel
    dataset_hash: str
    history: list
    _model: nn.Module | None = None

    def model(self) -> nn.Module:
        if self._model is None:
            m = build_model(self.architecture, self.config, seed=0, channels=self.channels,
                            kernel_size=self.kernel_size)
            m.load_state_dict(self.state_dict)
            m.eval()
            self._model = m
        return self._model

    def encode_mu(self, cells: np.ndarray, stiffness: np.ndarray | None = None) -> np.ndarray:
        """Latent means of (n, 50, 50) cells; deterministic.

        Hybrid checkpoints need (n, 3, 3) stiffness tensors; when absent
        they are homogenized from the 0.5-thresholded cells.
        """
        cells = np.asarray(cells, dtype=np.float64)
        if cells.ndim == 2:
            cells = cells[None, :, :]
        if cells.ndim != 3 or cells.shape[1:] != (50, 50):
            raise ValueError(f"expected (n, 50, 50) cells, got {cells.shape}")
        m = self.model()
        x = torch.from_numpy(cells.astype(np.float32)).unsqueeze(1)
        k = None
        if self.architecture == "hybrid":
            if stiffness is None:
                from .homogenize import homogenize_cell

                stiffness = np.stack(
                    [homogenize_cell((c >= 0.5).astype(np.float64), self.material) for c in cells]
                )
            kn = np.stack([normalize_stiffness(s, self.stiffness_stats) for s in stiffness])
            k = torch.from_numpy(kn.astype(np.float32))
        out = []
        with torch.no_grad():
            for lo in range(0, x.shape[0], 256):
                kb = None if k is None else k[lo : lo + 256]
                mu, _ = m.encode(x[lo : lo + 256], kb)
                out.append(mu.numpy())
        return np.concatenate(out).astype(np.float64)

    def decode(self, z: np.ndarray) -> np.ndarray:
        """Decode (n, D) latent points to (n, 50, 50) grayscale cells."""
        z = np.atleast_2d(np.asarray(z, dtype=np.float64))
        m = self.model()
        out = []
        with torch.no_grad():
            for lo in range(0, z.shape[0], 256):
                zt = torch.from_numpy(z[lo : lo + 256].astype(np.float32))
                out.append(m.decode(zt).squeeze(1).numpy())
        return np.concatenate(out).astype(np.float64)

    def save(self, path) -> None:
        payload = {
            "format": "latmorph-checkpoint",
            "version": 1,
            "architecture": self.architecture,
            "channels": list(self.channels),
            "kernel_size": self.kernel_size,
            "state_dict": self.state_dict,
            "config": self.config.to_dict(),
            "latent_stats": self.latent_stats.to_dict(),
            "stiffness_stats": self.stiffness_stats.to_dict(),
            "material": {
                "e0": self.material.e0,
                "nu": self.material.nu,
                "emin": self.material.emin,
            },
            "dataset_hash": self.dataset_hash,
            "history": self.history,
        }
        torch.save(payload, path)

    @classmethod
    def load(cls, path) -> "ModelCheckpoint":
        payload = torch.load(path, weights_only=True)
        if payload.get("format") != "latmorph-checkpoint":
            raise ValueError(f"{path}: not a latmorph checkpoint")
        mat = payload["material"]
        return cls(
            architecture=payload["architecture"],
            channels=tuple(payload["channels"]),
            kernel_size=payload["kernel_size"],
            state_dict=payload["state_dict"],
            config=TrainConfig.from_dict(payload["config"]),
            latent_stats=LatentStats.from_dict(payload["latent_stats"]),
            stiffness_stats=StiffnessStats.from_dict(payload["stiffness_stats"]),
            material=MaterialModel(mat["e0"], mat["nu"], mat["emin"]),
            dataset_hash=payload["dataset_hash"],
            history=payload["history"],
        )
