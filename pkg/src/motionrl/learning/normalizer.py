"""Running mean/variance normalization with order-independent merging."""

from __future__ import annotations

import numpy as np


class RunningNormalizer:
    """Tracks mean and population variance of a stream of vectors.

    Updates merge batch moments with Chan's parallel algorithm, so the final
    statistics match a two-pass computation on the concatenated data no matter
    how the stream was chunked.  ``normalize`` standardizes inputs and clamps
    the result to ``[-clip, clip]``.
    """

    def __init__(self, dim: int, clip: float = 10.0, eps: float = 1e-5):
        self.dim = dim
        self.clip = float(clip)
        self.eps = float(eps)
        self.count = 0.0
        self.mean = np.zeros(dim, dtype=np.float64)
        self.m2 = np.zeros(dim, dtype=np.float64)

    @staticmethod
    def batch_moments(batch: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
        """Return (count, mean, sum of squared deviations) for a (N, dim) batch."""
        batch = np.asarray(batch, dtype=np.float64)
        batch = batch.reshape(-1, batch.shape[-1])
        count = float(batch.shape[0])
        mean = batch.mean(axis=0)
        m2 = np.square(batch - mean).sum(axis=0)
        return count, mean, m2

    def update(self, batch: np.ndarray) -> None:
        self.merge_moments(*self.batch_moments(batch))

    def merge_moments(self, count: float, mean: np.ndarray, m2: np.ndarray) -> None:
        if count <= 0:
            return
        if self.count == 0.0:
            self.count = count
            self.mean = np.array(mean, dtype=np.float64)
            self.m2 = np.array(m2, dtype=np.float64)
            return
        total = self.count + count
        delta = mean - self.mean
        self.mean = self.mean + delta * (count / total)
        self.m2 = self.m2 + m2 + np.square(delta) * (self.count * count / total)
        self.count = total

    @property
    def variance(self) -> np.ndarray:
        if self.count == 0.0:
            return np.ones(self.dim, dtype=np.float64)
        return self.m2 / self.count

    @property
    def std(self) -> np.ndarray:
        return np.sqrt(self.variance + self.eps)

    def normalize(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return np.clip((x - self.mean) / self.std, -self.clip, self.clip)

    def state(self) -> dict:
        return {
            "count": self.count,
            "mean": self.mean.copy(),
            "m2": self.m2.copy(),
            "clip": self.clip,
            "eps": self.eps,
        }

    def load_state(self, state: dict) -> None:
        if state["mean"].shape != (self.dim,):
            raise ValueError(
                f"normalizer dim mismatch: expected {self.dim}, got {state['mean'].shape[0]}"
            )
        self.count = float(state["count"])
        self.mean = np.array(state["mean"], dtype=np.float64)
        self.m2 = np.array(state["m2"], dtype=np.float64)
        self.clip = float(state["clip"])
        self.eps = float(state["eps"])
