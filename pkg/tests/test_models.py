"""Network heads: distributions, initialization, flat parameter IO."""

import math

import torch
import pytest

from motionrl.learning.models import (
    ActorCritic,
    Discriminator,
    GaussianPolicy,
    ModelConfig,
    ValueFunction,
    flat_gradients,
    flat_parameters,
    set_flat_parameters,
)

CFG = ModelConfig(hidden_sizes=(16, 8), activation="relu")


def test_output_shapes():
    torch.manual_seed(0)
    policy = GaussianPolicy(5, 3, CFG)
    vf = ValueFunction(5, CFG)
    disc = Discriminator(7, CFG)
    obs = torch.randn(11, 5)
    assert policy(obs).shape == (11, 3)
    assert policy.log_prob(obs, torch.randn(11, 3)).shape == (11,)
    assert vf(obs).shape == (11,)
    assert disc(torch.randn(11, 7)).shape == (11,)
    actions, logp = policy.act(obs)
    assert actions.shape == (11, 3) and logp.shape == (11,)


def test_final_layer_is_scaled_down():
    torch.manual_seed(0)
    policy = GaussianPolicy(5, 3, CFG)
    final = policy.net[-1]
    assert final.weight.abs().max().item() < 0.05
    assert torch.all(final.bias == 0.0)
    # near-zero means at init: actions start close to the reference offsets
    obs = torch.randn(64, 5)
    assert policy(obs).abs().max().item() < 0.5
    # the value head keeps its default init
    torch.manual_seed(0)
    vf = ValueFunction(5, CFG)
    assert vf.net[-1].weight.abs().max().item() > 0.05


def test_log_prob_matches_torch_distributions():
    torch.manual_seed(1)
    policy = GaussianPolicy(4, 2, CFG, dtype=torch.float64)
    obs = torch.randn(32, 4, dtype=torch.float64)
    actions = torch.randn(32, 2, dtype=torch.float64)
    dist = torch.distributions.Normal(policy(obs), policy.log_std.exp())
    expected = dist.log_prob(actions).sum(dim=-1)
    assert torch.allclose(policy.log_prob(obs, actions), expected, atol=1e-12)


def test_entropy_closed_form():
    torch.manual_seed(2)
    policy = GaussianPolicy(3, 4, CFG, dtype=torch.float64)
    with torch.no_grad():
        policy.log_std[:] = torch.tensor([0.1, -0.5, 0.0, 1.0], dtype=torch.float64)
    dist = torch.distributions.Normal(torch.zeros(4), policy.log_std.exp())
    assert torch.allclose(policy.entropy(), dist.entropy().sum(), atol=1e-12)
    by_hand = sum(0.5 * (1.0 + math.log(2 * math.pi)) + s
                  for s in [0.1, -0.5, 0.0, 1.0])
    assert policy.entropy().item() == pytest.approx(by_hand, rel=1e-12)


def test_deterministic_act_returns_mean():
    torch.manual_seed(3)
    policy = GaussianPolicy(4, 2, CFG)
    obs = torch.randn(8, 4)
    actions, logp = policy.act(obs, deterministic=True)
    assert torch.equal(actions, policy(obs))
    # log-prob of the mean is the distribution's peak density
    expected = (-policy.log_std - 0.5 * math.log(2 * math.pi)).sum()
    assert torch.allclose(logp, expected.expand(8), atol=1e-6)


def test_sampling_respects_generator_seed():
    torch.manual_seed(4)
    policy = GaussianPolicy(4, 2, CFG)
    obs = torch.randn(6, 4)
    a1, lp1 = policy.act(obs, generator=torch.Generator().manual_seed(9))
    a2, lp2 = policy.act(obs, generator=torch.Generator().manual_seed(9))
    a3, _ = policy.act(obs, generator=torch.Generator().manual_seed(10))
    assert torch.equal(a1, a2) and torch.equal(lp1, lp2)
    assert not torch.equal(a1, a3)
    # sampled log-probs agree with the evaluated ones
    assert torch.allclose(lp1, policy.log_prob(obs, a1), atol=1e-6)


def test_actor_critic_architecture_dict():
    torch.manual_seed(5)
    ac = ActorCritic(6, 3, CFG, disc_obs_dim=10)
    assert ac.architecture() == {
        "obs_dim": 6,
        "action_dim": 3,
        "hidden_sizes": [16, 8],
        "activation": "relu",
        "disc_obs_dim": 10,
    }
    plain = ActorCritic(6, 3, CFG)
    assert plain.discriminator is None
    assert plain.architecture()["disc_obs_dim"] == 0


def test_flat_parameters_round_trip():
    torch.manual_seed(6)
    ac = ActorCritic(4, 2, CFG)
    vec = flat_parameters(ac)
    other = ActorCritic(4, 2, CFG)  # different random init
    assert not torch.equal(flat_parameters(other), vec)
    set_flat_parameters(other, vec)
    assert torch.equal(flat_parameters(other), vec)
    obs = torch.randn(5, 4)
    assert torch.equal(ac.policy(obs), other.policy(obs))
    assert torch.equal(ac.value(obs), other.value(obs))


def test_set_flat_parameters_validates_length():
    torch.manual_seed(7)
    ac = ActorCritic(4, 2, CFG)
    vec = flat_parameters(ac)
    with pytest.raises(ValueError, match="entries"):
        set_flat_parameters(ac, torch.cat([vec, torch.zeros(1)]))


def test_flat_gradients_layout():
    torch.manual_seed(8)
    policy = GaussianPolicy(3, 2, CFG, dtype=torch.float64)
    obs = torch.randn(4, 3, dtype=torch.float64)
    actions = torch.randn(4, 2, dtype=torch.float64)
    policy.zero_grad()
    policy.log_prob(obs, actions).sum().backward()
    flat = flat_gradients(policy)
    assert flat.shape == flat_parameters(policy).shape
    offset = 0
    for p in policy.parameters():
        n = p.numel()
        assert torch.equal(flat[offset:offset + n], p.grad.reshape(-1))
        offset += n
    # zero_grad + no backward yields explicit zeros, not an error
    fresh = GaussianPolicy(3, 2, CFG)
    assert torch.all(flat_gradients(fresh) == 0.0)


def test_model_config_validation():
    with pytest.raises(ValueError, match="activation"):
        ModelConfig(hidden_sizes=(8,), activation="softplus")
    with pytest.raises(ValueError, match="unknown model config"):
        ModelConfig.from_dict({"hidden_sizes": [8], "dropout": 0.5})
    cfg = ModelConfig.from_dict({"hidden_sizes": [64, 32], "activation": "elu"})
    assert cfg.hidden_sizes == (64, 32)
