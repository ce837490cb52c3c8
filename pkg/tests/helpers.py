"""Shared test machinery that both the unit tests and the acceptance gate use."""

import numpy as np
import torch

from latmorph.vae import TrainConfig, build_model, loss_terms


def vae_gradient_check(seed: int = 0, batch: int = 3, step: float = 1e-4,
                       max_params: int = 400) -> float:
    """Max relative error between autograd and central-difference gradients.

    Runs a reduced-width network in float64 on a small batch with fixed
    reparameterization noise, so the loss is a deterministic smooth
    function of the parameters.
    """
    cfg = TrainConfig(latent_dim=4, beta=0.5, seed=seed)
    model = build_model("geometry", cfg, channels=(2, 3, 4, 5)).double()
    g = torch.Generator().manual_seed(seed)
    x = torch.rand((batch, 1, 50, 50), generator=g, dtype=torch.float64)
    noise = torch.randn((batch, cfg.latent_dim), generator=g, dtype=torch.float64)

    def compute_loss():
        recon, mu, logvar = model(x, noise=noise)
        total, _, _ = loss_terms(recon, x, mu, logvar, cfg.beta_norm)
        return total

    model.zero_grad()
    compute_loss().backward()
    analytic = {name: p.grad.detach().clone() for name, p in model.named_parameters()}

    rng = np.random.default_rng(seed)
    worst = 0.0
    with torch.no_grad():
        flat_index = []
        for name, p in model.named_parameters():
            for j in range(p.numel()):
                flat_index.append((name, j))
        picks = rng.choice(len(flat_index), size=min(max_params, len(flat_index)), replace=False)
        params = dict(model.named_parameters())
        for k in picks:
            name, j = flat_index[k]
            p = params[name].view(-1)
            orig = p[j].item()
            p[j] = orig + step
            up = compute_loss().item()
            p[j] = orig - step
            down = compute_loss().item()
            p[j] = orig
            fd = (up - down) / (2.0 * step)
            an = analytic[name].view(-1)[j].item()
            denom = max(abs(an), abs(fd), 1e-8)
            worst = max(worst, abs(an - fd) / denom)
    return worst
