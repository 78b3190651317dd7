"""Synchronous data-parallel training over thread workers.

Every worker owns an env shard and a full model replica.  The only
cross-worker interaction is a synchronous reduction (gradient average,
normalizer moments, advantage statistics) executed in fixed worker order, so
replicas that start identical stay bit-identical after every update.
"""

from __future__ import annotations

import threading

import numpy as np
import torch

from .agents import Agent, SoloComm, build_agent
from .config import AgentConfig
from .normalizer import RunningNormalizer


def allreduce_gradients(grad_lists: list[list[torch.Tensor]]) -> list[torch.Tensor]:
    """Elementwise mean of per-worker gradient lists, accumulated in worker order."""
    if not grad_lists:
        raise ValueError("no gradients to reduce")
    n = len(grad_lists[0])
    for grads in grad_lists[1:]:
        if len(grads) != n or any(
            g.shape != g0.shape for g, g0 in zip(grads, grad_lists[0])
        ):
            raise ValueError("gradient layouts differ across workers")
    out = []
    for i in range(n):
        acc = grad_lists[0][i].clone()
        for grads in grad_lists[1:]:
            acc += grads[i]
        out.append(acc / len(grad_lists))
    return out


class _Reducer:
    """All workers deposit a value, worker 0 combines in index order, all read."""

    def __init__(self, num_workers: int):
        self.barrier = threading.Barrier(num_workers)
        self.slots: list = [None] * num_workers
        self.result = None

    def reduce(self, worker_id: int, value, combine):
        self.slots[worker_id] = value
        self.barrier.wait()
        if worker_id == 0:
            self.result = combine(self.slots)
        self.barrier.wait()
        out = self.result
        self.barrier.wait()
        return out


def _merge_moment_slots(slots):
    count, mean, m2 = slots[0]
    acc = RunningNormalizer(np.asarray(mean).shape[0])
    acc.merge_moments(count, np.asarray(mean), np.asarray(m2))
    for c, mu, s in slots[1:]:
        acc.merge_moments(c, np.asarray(mu), np.asarray(s))
    return acc.count, acc.mean, acc.m2


def _sum_slots(slots):
    acc = np.array(slots[0], dtype=np.float64)
    for s in slots[1:]:
        acc = acc + s
    return acc


class WorkerComm:
    """Reduction endpoint handed to one worker's agent."""

    def __init__(self, reducer: _Reducer, worker_id: int):
        self.reducer = reducer
        self.worker_id = worker_id

    def moments(self, count, mean, m2):
        return self.reducer.reduce(
            self.worker_id, (count, mean.copy(), m2.copy()), _merge_moment_slots
        )

    def scalar_sums(self, values: np.ndarray) -> np.ndarray:
        return self.reducer.reduce(self.worker_id, np.array(values), _sum_slots)

    def average_gradients(self, params) -> None:
        grads = [p.grad for p in params if p.grad is not None]
        averaged = self.reducer.reduce(self.worker_id, grads, allreduce_gradients)
        for g, avg in zip(grads, averaged):
            g.copy_(avg)


class WorkerGroup:
    """Drives num_workers agents in lockstep; handles one worker transparently."""

    def __init__(self, env_builder, config: AgentConfig, num_envs: int,
                 num_workers: int, seed: int = 0):
        if num_workers < 1:
            raise ValueError("num_workers must be >= 1")
        if num_envs % num_workers != 0:
            raise ValueError(
                f"num_envs ({num_envs}) must divide evenly across "
                f"{num_workers} workers"
            )
        self.config = config
        self.num_workers = num_workers
        self._reducer = _Reducer(num_workers)
        self.agents: list[Agent] = []
        for w in range(num_workers):
            env = env_builder(num_envs // num_workers, seed + 1000003 * (w + 1))
            torch.manual_seed(seed)  # identical model replicas across workers
            agent = build_agent(env, config, seed=seed + 7919 * w)
            if num_workers > 1:
                agent.comm = WorkerComm(self._reducer, w)
            else:
                agent.comm = SoloComm()
            self.agents.append(agent)

    @property
    def lead(self) -> Agent:
        return self.agents[0]

    def train_iteration(self) -> dict:
        if self.num_workers == 1:
            return self.agents[0].train_iteration()
        results: list = [None] * self.num_workers
        errors: list = [None] * self.num_workers

        def run(w: int) -> None:
            try:
                results[w] = self.agents[w].train_iteration()
            except BaseException as e:  # noqa: BLE001 - must unblock peers
                errors[w] = e
                self._reducer.barrier.abort()

        threads = [
            threading.Thread(target=run, args=(w,), name=f"worker-{w}")
            for w in range(self.num_workers)
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        for e in errors:
            if e is not None and not isinstance(e, threading.BrokenBarrierError):
                raise e
        if any(errors):
            raise RuntimeError("worker group aborted")
        return results[0]

    def state(self) -> dict:
        return {
            "num_workers": self.num_workers,
            "workers": [agent.state() for agent in self.agents],
        }

    def load_state(self, payload: dict) -> None:
        if payload.get("num_workers") != self.num_workers:
            raise ValueError(
                f"checkpoint was written with {payload.get('num_workers')} workers, "
                f"group has {self.num_workers}"
            )
        for agent, state in zip(self.agents, payload["workers"]):
            agent.load_state(state, resume=True)
