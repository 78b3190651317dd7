"""Loss functions for policy, value, and discriminator updates.

Each function is a pure map from model parameters and a fixed batch to a
scalar, so gradients can be validated against finite differences.  Weighting
terms that the algorithms treat as constants (advantages, regression weights)
enter as plain tensors supplied by the caller.
"""

from __future__ import annotations

import torch

from .models import Discriminator, GaussianPolicy, ValueFunction


def ppo_policy_loss(
    policy: GaussianPolicy,
    obs: torch.Tensor,
    actions: torch.Tensor,
    logprobs_old: torch.Tensor,
    advantages: torch.Tensor,
    clip_epsilon: float,
) -> tuple[torch.Tensor, dict]:
    """Clipped-surrogate objective; an infinite clip gives the vanilla form."""
    logprobs = policy.log_prob(obs, actions)
    ratio = torch.exp(logprobs - logprobs_old)
    clipped = torch.clamp(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon)
    loss = -torch.minimum(ratio * advantages, clipped * advantages).mean()
    with torch.no_grad():
        clip_frac = ((ratio - 1.0).abs() > clip_epsilon).double().mean().item()
        kl = (logprobs_old - logprobs).mean().item()
    return loss, {"clip_fraction": clip_frac, "kl": kl}


def value_loss(value_fn: ValueFunction, obs: torch.Tensor,
               returns: torch.Tensor) -> torch.Tensor:
    return (value_fn(obs) - returns).square().mean()


def awr_policy_loss(
    policy: GaussianPolicy,
    obs: torch.Tensor,
    actions: torch.Tensor,
    weights: torch.Tensor,
) -> torch.Tensor:
    """Advantage-weighted log-likelihood; weights are precomputed constants."""
    return -(weights * policy.log_prob(obs, actions)).mean()


def awr_weights(advantages: torch.Tensor, beta: float,
                weight_max: float) -> torch.Tensor:
    return torch.clamp(torch.exp(advantages / beta), max=weight_max)


def discriminator_loss(
    disc: Discriminator,
    real: torch.Tensor,
    fake: torch.Tensor,
    grad_penalty_coef: float,
) -> tuple[torch.Tensor, dict]:
    """Least-squares objective pushing D(real) to +1, D(fake) to -1.

    The gradient penalty is the mean squared norm of the input gradient of D
    on the real batch, which keeps the decision boundary smooth around the
    reference data.
    """
    real = real.detach().requires_grad_(True)
    d_real = disc(real)
    d_fake = disc(fake)
    adv_loss = (d_real - 1.0).square().mean() + (d_fake + 1.0).square().mean()
    grad = torch.autograd.grad(d_real.sum(), real, create_graph=True)[0]
    penalty = grad.square().sum(dim=-1).mean()
    loss = adv_loss + grad_penalty_coef * penalty
    stats = {
        "disc_real_mean": d_real.detach().mean().item(),
        "disc_fake_mean": d_fake.detach().mean().item(),
        "disc_grad_penalty": penalty.detach().item(),
    }
    return loss, stats


def style_reward(d: torch.Tensor) -> torch.Tensor:
    """Map discriminator scores to [0, 1] rewards: 1 at d=1, 0 at or below d=-1."""
    return torch.clamp(1.0 - 0.25 * (d - 1.0).square(), min=0.0)
