"""Generalized advantage estimation with done-flag boundary semantics."""

from __future__ import annotations

import numpy as np

from ..envs import DoneFlag


def compute_returns_advantages(
    rewards: np.ndarray,
    values: np.ndarray,
    dones: np.ndarray,
    bootstrap_values: np.ndarray,
    discount: float,
    gae_lambda: float,
    terminal_penalty: float = 0.0,
    terminal_bonus: float = 0.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Compute lambda-returns and GAE advantages over a (T, E) rollout window.

    The boundary value after step t depends on the done flag: FAIL uses the
    terminal penalty, SUCC the terminal bonus, TIME bootstraps from the value
    of the terminal observation, and NULL continues into step t+1 (or
    bootstraps at the end of the window).  ``bootstrap_values[t, e]`` must hold
    the critic's estimate of the observation that step returned wherever it is
    needed for bootstrapping.
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    dones = np.asarray(dones, dtype=np.int64)
    bootstrap_values = np.asarray(bootstrap_values, dtype=np.float64)
    if not (rewards.shape == values.shape == dones.shape == bootstrap_values.shape):
        raise ValueError("rewards, values, dones, bootstrap_values must share one shape")
    if rewards.ndim != 2:
        raise ValueError("expected (steps, envs) arrays")
    T = rewards.shape[0]

    needs_bootstrap = dones == int(DoneFlag.TIME)
    needs_bootstrap[-1] |= dones[-1] == int(DoneFlag.NULL)
    if not np.all(np.isfinite(bootstrap_values[needs_bootstrap])):
        raise ValueError("missing bootstrap value at a time-limit or window boundary")

    fail = dones == int(DoneFlag.FAIL)
    succ = dones == int(DoneFlag.SUCC)
    cont = dones == int(DoneFlag.NULL)

    next_value = bootstrap_values.copy()
    next_value[fail] = terminal_penalty
    next_value[succ] = terminal_bonus
    if T > 1:
        interior = cont[:-1]
        next_value[:-1][interior] = values[1:][interior]

    deltas = rewards + discount * next_value - values
    advantages = np.zeros_like(rewards)
    acc = np.zeros(rewards.shape[1], dtype=np.float64)
    for t in reversed(range(T)):
        acc = deltas[t] + discount * gae_lambda * acc * cont[t]
        advantages[t] = acc
    returns = advantages + values
    return returns, advantages
