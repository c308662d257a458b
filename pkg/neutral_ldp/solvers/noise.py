"""Counter-based Brownian increments.

Every stream (replica, particle) owns a Philox generator keyed by (master_seed, replica,
particle), so its increments never depend on which other streams were drawn, in what order,
or on which thread.
"""
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from ..core.grid import TimeGrid
from ..errors import ConfigurationError

_M64 = (1 << 64) - 1
_M32 = (1 << 32) - 1

StreamId = Tuple[int, int]


def stream_key(master_seed: int, replica: int, particle: int) -> int:
    return ((master_seed & _M64) << 64) | ((replica & _M32) << 32) | (particle & _M32)


def stream_generator(master_seed: int, stream: StreamId) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=stream_key(master_seed, *stream)))


@dataclass(frozen=True)
class NoiseBundle:
    master_seed: int
    streams: Tuple[StreamId, ...]

    def __post_init__(self):
        streams = tuple((int(r), int(p)) for r, p in self.streams)
        if not streams:
            raise ConfigurationError("a noise bundle needs at least one stream")
        object.__setattr__(self, "streams", streams)
        # drawn increments per (grid, m), so one bundle can drive several schemes
        object.__setattr__(self, "_drawn", {})

    @classmethod
    def for_replicas(cls, master_seed: int, replicas: Sequence[int]) -> "NoiseBundle":
        return cls(master_seed, tuple((r, 0) for r in replicas))

    @classmethod
    def for_cloud(cls, master_seed: int, cloud: int, particles: int) -> "NoiseBundle":
        return cls(master_seed, tuple((cloud, i) for i in range(particles)))

    @property
    def size(self) -> int:
        return len(self.streams)

    def increments(self, grid: TimeGrid, m: int) -> np.ndarray:
        """(streams, cells, m) Gaussian increments with variance h; read-only."""
        key = (grid, m)
        if key not in self._drawn:
            scale = np.sqrt(grid.h)
            out = np.empty((self.size, grid.cells, m))
            for i, stream in enumerate(self.streams):
                out[i] = stream_generator(self.master_seed, stream).standard_normal((grid.cells, m)) * scale
            out.setflags(write=False)
            self._drawn[key] = out
        return self._drawn[key]

    def brownian(self, grid: TimeGrid, m: int) -> np.ndarray:
        """(streams, cells + 1, m) Brownian paths on [0, T] starting at 0."""
        increments = self.increments(grid, m)
        paths = np.zeros((self.size, grid.cells + 1, m))
        np.cumsum(increments, axis=1, out=paths[:, 1:])
        return paths
