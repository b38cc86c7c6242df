"""Uniform time grid shared by noise synthesis and integration."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class TimeGrid:
    """Grid 0 = t_0 < t_1 < ... < t_K = T with step dt."""

    T: float
    dt: float
    K: int

    @classmethod
    def from_spec(cls, T: float, dt: float) -> "TimeGrid":
        if T <= 0 or dt <= 0:
            raise ConfigError(f"need T > 0 and dt > 0, got T={T}, dt={dt}")
        K = int(round(T / dt))
        if K < 1 or abs(K * dt - T) > 1e-12 * max(1.0, abs(T)):
            raise ConfigError(f"dt={dt} does not divide T={T} within 1e-12")
        return cls(T=T, dt=dt, K=K)

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.K + 1) * self.dt

    def index_of(self, t: float) -> int:
        i = int(round(t / self.dt))
        if not 0 <= i <= self.K or abs(i * self.dt - t) > 1e-9 * max(1.0, self.T):
            raise ValueError(f"time {t} is not on the grid (T={self.T}, dt={self.dt})")
        return i

    def halve(self) -> "TimeGrid":
        return TimeGrid(T=self.T, dt=self.dt / 2.0, K=self.K * 2)
