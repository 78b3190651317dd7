"""Agent training loops: determinism, resume, episode accounting."""

import numpy as np
import pytest
import torch

from motionrl.learning import (
    AgentConfig,
    TrainingDivergedError,
    build_agent,
    load_agent_config,
)
from motionrl.learning.agents import ADDAgent, AMPAgent, AWRAgent, PPOAgent

from conftest import fast_agent_config, make_amp_env, make_tracking_env


def seeded_agent(env, config, seed):
    """Model weights draw from torch's global RNG; seed it like the worker
    group does before each build."""
    torch.manual_seed(seed)
    return build_agent(env, config, seed=seed)


def stats_equal(a: dict, b: dict) -> bool:
    if set(a) != set(b):
        return False
    return all(a[k] == b[k] for k in a)


@pytest.mark.parametrize("agent_type", ["ppo", "awr", "amp", "add"])
def test_same_seed_training_is_deterministic(agent_type):
    runs = []
    for _ in range(2):
        if agent_type == "amp":
            env = make_amp_env(seed=3)
        else:
            task = "add" if agent_type == "add" else "deepmimic"
            env = make_tracking_env(seed=3, task=task)
        agent = seeded_agent(env, fast_agent_config(agent_type), 11)
        runs.append([agent.train_iteration() for _ in range(3)])
    for s1, s2 in zip(runs[0], runs[1]):
        assert stats_equal(s1, s2)


def test_build_agent_dispatches_types():
    env = make_tracking_env()
    assert isinstance(build_agent(env, fast_agent_config("ppo")), PPOAgent)
    assert isinstance(build_agent(env, fast_agent_config("awr")), AWRAgent)
    add_env = make_tracking_env(task="add")
    agent = build_agent(add_env, fast_agent_config("add"))
    assert isinstance(agent, ADDAgent)
    amp_env = make_amp_env()
    assert isinstance(build_agent(amp_env, fast_agent_config("amp")), AMPAgent)


def test_amp_agent_requires_disc_env():
    env = make_tracking_env()  # deepmimic: no discriminator observations
    with pytest.raises(ValueError, match="disc"):
        build_agent(env, fast_agent_config("amp"))


def test_agent_config_validation_and_coercion():
    cfg = AgentConfig.from_dict(
        {"agent": "ppo", "model": {"hidden_sizes": [8]}, "epochs": 2}
    )
    assert cfg.model.hidden_sizes == (8,)
    with pytest.raises(ValueError, match="unknown agent"):
        AgentConfig.from_dict({"agent": "sac"})
    with pytest.raises(ValueError, match="unknown"):
        AgentConfig.from_dict({"agent": "ppo", "learning_rate": 1e-3})
    with pytest.raises(ValueError):
        AgentConfig.from_dict({"agent": "ppo", "epochs": 0})
    with pytest.raises(ValueError):
        AgentConfig.from_dict({"agent": "ppo", "max_iterations": 0})


def test_load_agent_config_from_yaml(tmp_path):
    path = tmp_path / "agent.yaml"
    path.write_text("agent: awr\nsteps_per_env: 16\nawr: {beta: 0.1}\n")
    cfg = load_agent_config(path)
    assert cfg.agent == "awr"
    assert cfg.steps_per_env == 16
    assert cfg.awr.beta == 0.1


def test_yaml_scientific_notation_reads_as_float(tmp_path):
    # YAML 1.1 parses 3e-4 (no decimal point) as a string; the config must cast it
    path = tmp_path / "agent.yaml"
    path.write_text("agent: ppo\npolicy_lr: 3e-4\ndisc: {lr: 1e-3}\n")
    cfg = load_agent_config(path)
    assert cfg.policy_lr == pytest.approx(3e-4)
    assert cfg.disc.lr == pytest.approx(1e-3)
    with pytest.raises(ValueError, match="policy_lr"):
        AgentConfig.from_dict({"agent": "ppo", "policy_lr": "fast"})


def test_training_statistics_keys():
    env = make_tracking_env()
    agent = build_agent(env, fast_agent_config("ppo"), seed=0)
    stats = agent.train_iteration()
    for key in ("mean_return", "mean_ep_len", "episodes", "mean_step_reward",
                "pose_error", "vel_error", "policy_loss", "value_loss",
                "clip_fraction", "kl", "entropy"):
        assert key in stats, key

    amp_env = make_amp_env()
    amp_stats = build_agent(amp_env, fast_agent_config("amp"), seed=0).train_iteration()
    for key in ("disc_loss", "disc_real_mean", "disc_fake_mean",
                "disc_grad_penalty", "style_reward_mean"):
        assert key in amp_stats, key

    awr_stats = build_agent(make_tracking_env(), fast_agent_config("awr"),
                            seed=0).train_iteration()
    assert "mean_weight" in awr_stats


def test_episode_accounting_over_time_limits():
    # episode_length 0.2 s at 30 Hz = 6 steps; 8-step rollouts see the ends
    env = make_tracking_env(num_envs=2, episode_length=0.2, rsi=False)
    agent = build_agent(env, fast_agent_config("ppo"), seed=0)
    total_eps = 0
    for _ in range(3):
        stats = agent.train_iteration()
        total_eps += stats["episodes"]
        assert stats["mean_ep_len"] <= 6.0
    # 2 envs x 24 steps with 6-step episodes = 8 completed episodes
    assert total_eps == 8
    assert agent.total_samples == 3 * 2 * 8
    assert agent.iteration == 3


def test_resume_from_state_matches_uninterrupted():
    def fresh_agent():
        env = make_tracking_env(seed=9)
        return seeded_agent(env, fast_agent_config("ppo"), 4)

    straight = fresh_agent()
    for _ in range(3):
        straight.train_iteration()
    expected = [straight.train_iteration() for _ in range(2)]

    first = fresh_agent()
    for _ in range(3):
        first.train_iteration()
    payload = first.state()

    resumed = fresh_agent()
    resumed.load_state(payload)
    assert resumed.iteration == 3
    actual = [resumed.train_iteration() for _ in range(2)]
    for s1, s2 in zip(expected, actual):
        assert stats_equal(s1, s2)


@pytest.mark.parametrize("agent_type", ["awr", "amp"])
def test_resume_preserves_replay_buffers(agent_type):
    def fresh_agent():
        env = make_amp_env(seed=2) if agent_type == "amp" else make_tracking_env(seed=2)
        return seeded_agent(env, fast_agent_config(agent_type), 1)

    first = fresh_agent()
    for _ in range(2):
        first.train_iteration()
    payload = first.state()

    resumed = fresh_agent()
    resumed.load_state(payload)
    expected = first.train_iteration()
    actual = resumed.train_iteration()
    assert stats_equal(expected, actual)


def test_act_is_deterministic_and_bounded():
    env = make_tracking_env()
    agent = build_agent(env, fast_agent_config("ppo"), seed=0)
    obs = env.reset()
    a1 = agent.act(obs, deterministic=True)
    a2 = agent.act(obs, deterministic=True)
    assert np.array_equal(a1, a2)
    assert a1.shape == (env.num_envs, env.action_dim)
    assert np.all(np.isfinite(a1))


def test_divergence_raises_with_stats():
    env = make_tracking_env()
    cfg = fast_agent_config("ppo", policy_lr=1e30, value_lr=1e30)
    agent = build_agent(env, cfg, seed=0)
    with pytest.raises(TrainingDivergedError) as err:
        for _ in range(10):
            agent.train_iteration()
    assert isinstance(err.value.stats, dict)
