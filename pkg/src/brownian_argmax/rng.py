"""Reproducible per-replica random streams.

Every stream is a Philox (counter-based) generator keyed by
``(master_seed, namespace, stream_id)`` through :class:`numpy.random.SeedSequence`,
so the draws of replica ``r`` never depend on which worker runs it or when.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

RandomStream = np.random.Generator

U64_MAX = 2**64 - 1

# Namespaces keep independent families of replicas apart under one master seed.
NS_THETA = 0
NS_REVERSAL = 1
NS_GUE = 2
NS_DIRICHLET = 3
NS_AUX = 4


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int
    stream_id: int
    namespace: int = NS_THETA

    def __post_init__(self):
        for name in ("master_seed", "stream_id", "namespace"):
            value = getattr(self, name)
            if not 0 <= int(value) <= U64_MAX:
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {value}")


def make_stream(seed: SeedSpec) -> RandomStream:
    ss = np.random.SeedSequence(
        entropy=int(seed.master_seed),
        spawn_key=(int(seed.namespace), int(seed.stream_id)),
    )
    return np.random.Generator(np.random.Philox(ss))


def stream_for(master_seed: int, stream_id: int, namespace: int = NS_THETA) -> RandomStream:
    return make_stream(SeedSpec(master_seed, stream_id, namespace))


def uniform64(stream: RandomStream, size=None):
    """Raw 64-bit unsigned outputs of the stream."""
    return stream.integers(0, U64_MAX, size=size, dtype=np.uint64, endpoint=True)


def standard_normal(stream: RandomStream, size=None):
    # numpy's ziggurat; the statistical contract is checked in the tests.
    return stream.standard_normal(size)


def open_uniform(stream: RandomStream, size=None):
    """Uniform variates on (0, 1]; safe to raise to negative powers or take logs of."""
    return 1.0 - stream.random(size)
