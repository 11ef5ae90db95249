"""Named, independently seeded random streams.

Every stochastic process in the model draws from its own stream. A stream's
state is derived from ``(master_seed, stream name)`` only, so two runs that
share a master seed see the same numbers on every stream no matter how the
draws interleave. That is what makes baseline/perturbed comparisons use
common random numbers.

All non-constant distributions are sampled by inversion of a single uniform,
so e.g. raising a Bernoulli probability can only turn failures into
successes on the same draw.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from scorsim.errors import ConfigError

STREAM_NAMES = (
    "demand_interarrival",
    "demand_burst",
    "service_time",
    "inspection",
    "supplier_lead",
    "worker_tenure",
    "recruitment",
)

_BLOCK = 4096


def stream_key(name: str) -> int:
    """Stable 32-bit identity of a stream name (independent of PYTHONHASHSEED)."""
    return int.from_bytes(hashlib.blake2b(name.encode(), digest_size=4).digest(), "little")


@dataclass(frozen=True)
class Uniform:
    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)) or self.a > self.b:
            raise ConfigError(f"Uniform({self.a}, {self.b}): need finite a <= b")

    @property
    def mean(self) -> float:
        return 0.5 * (self.a + self.b)

    def invert(self, u: float) -> float:
        return self.a + (self.b - self.a) * u


@dataclass(frozen=True)
class Exponential:
    mean: float

    def __post_init__(self):
        if not (math.isfinite(self.mean) and self.mean > 0):
            raise ConfigError(f"Exponential(mean={self.mean}): need mean > 0")

    def invert(self, u: float) -> float:
        return -self.mean * math.log1p(-u)


@dataclass(frozen=True)
class Bernoulli:
    p: float

    def __post_init__(self):
        if not (0.0 <= self.p <= 1.0):
            raise ConfigError(f"Bernoulli(p={self.p}): need 0 <= p <= 1")

    @property
    def mean(self) -> float:
        return self.p

    def invert(self, u: float) -> float:
        return 1.0 if u < self.p else 0.0


@dataclass(frozen=True)
class Constant:
    c: float

    def __post_init__(self):
        if not (math.isfinite(self.c) and self.c >= 0):
            raise ConfigError(f"Constant({self.c}): need c >= 0")

    @property
    def mean(self) -> float:
        return self.c


Dist = Uniform | Exponential | Bernoulli | Constant


def dist_from_dict(d: dict) -> Dist:
    """Build a distribution from ``{"kind": "uniform", "a": .., "b": ..}`` style dicts."""
    kinds = {"uniform": Uniform, "exponential": Exponential, "bernoulli": Bernoulli, "constant": Constant}
    d = dict(d)
    try:
        cls = kinds[d.pop("kind").lower()]
    except KeyError as exc:
        raise ConfigError(f"unknown distribution kind {exc.args[0]!r}") from None
    try:
        return cls(**{k: float(v) for k, v in d.items()})
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {cls.__name__}: {exc}") from None


def dist_to_dict(dist: Dist) -> dict:
    name = type(dist).__name__.lower()
    if isinstance(dist, Uniform):
        return {"kind": name, "a": dist.a, "b": dist.b}
    if isinstance(dist, Exponential):
        return {"kind": name, "mean": dist.mean}
    if isinstance(dist, Bernoulli):
        return {"kind": name, "p": dist.p}
    return {"kind": name, "c": dist.c}


class Stream:
    """One generator state, handing out uniforms from a prefetched block."""

    __slots__ = ("name", "_gen", "_buf", "_pos", "drawn")

    def __init__(self, name: str, master_seed: int):
        self.name = name
        seq = np.random.SeedSequence(entropy=master_seed, spawn_key=(stream_key(name),))
        self._gen = np.random.Generator(np.random.PCG64(seq))
        self._buf: list[float] = []
        self._pos = 0
        self.drawn = 0

    def uniform(self) -> float:
        if self._pos == len(self._buf):
            self._buf = self._gen.random(_BLOCK).tolist()
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        self.drawn += 1
        return u


class RngStreams:
    def __init__(self, master_seed: int, names=STREAM_NAMES):
        self._names = tuple(names)
        self.reseed(master_seed)

    def reseed(self, master_seed: int) -> None:
        if not 0 <= master_seed < 2**64:
            raise ConfigError(f"master_seed must be a 64-bit unsigned integer, got {master_seed}")
        self.master_seed = int(master_seed)
        self.streams = {name: Stream(name, self.master_seed) for name in self._names}

    def __getitem__(self, name: str) -> Stream:
        try:
            return self.streams[name]
        except KeyError:
            raise ConfigError(f"unknown random stream {name!r}") from None

    def sample(self, name: str, dist: Dist) -> float:
        stream = self[name]
        if isinstance(dist, Constant):
            return dist.c
        return dist.invert(stream.uniform())
