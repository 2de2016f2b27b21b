"""Monte Carlo sampling of the forest-fire process with ignition at the origin.

On Z+ the burnout times of site n+1 are a thinning of those of site n:
right after a parent burnout the child is vacant, so it burns at the next
parent burnout exactly when its Exp(1) occupation clock has rung within the
parent gap. Each gap gets an independent clock, which turns a whole
propagation stage into one vectorized filter over the parent stream.
The literal arrival-clock coupling is available too (``method="arrival"``).

On a general finite graph nothing burns between ignitions of the origin,
so :func:`simulate_graph_fire` only steps from ignition to ignition.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Union

import numpy as np

from .errors import BudgetError, DomainError, EmptyRequestError
from .graph import GraphSpec

EULER_GAMMA = 0.5772156649015329

# largest n * samples sample_tau accepts unless told otherwise
DEFAULT_BUDGET = 2 * 10**9


@dataclass(frozen=True)
class RngHandle:
    """Seed plus stream id; the same handle always yields the same draws."""

    seed: int
    stream: int = 0
    replica: Optional[int] = None

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.stream < 0 or (self.replica is not None and self.replica < 0):
            raise ValueError("stream and replica ids must be nonnegative")

    def generator(self) -> np.random.Generator:
        key = (self.stream,) if self.replica is None else (self.stream, self.replica)
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=key)))

    def for_replica(self, i: int) -> "RngHandle":
        return RngHandle(self.seed, self.stream, i)


RngLike = Union[RngHandle, np.random.Generator]


def _gen(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, RngHandle):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngHandle or numpy Generator, got {type(rng).__name__}")


@dataclass(frozen=True)
class BurnStream:
    """Burnout instants of one site, in increasing order."""

    site_index: int
    times: np.ndarray

    def __post_init__(self):
        t = np.array(self.times, dtype=float)
        if t.ndim != 1:
            raise ValueError("times must be one-dimensional")
        if t.size and not (t[0] > 0 and np.all(np.diff(t) > 0)):
            raise ValueError("burnout times must be positive and strictly increasing")
        if self.site_index < 0:
            raise ValueError("site_index must be nonnegative")
        t.setflags(write=False)
        object.__setattr__(self, "times", t)

    def __len__(self):
        return self.times.size

    @property
    def gaps(self) -> np.ndarray:
        """Inter-burnout intervals, the first measured from time 0."""
        return np.diff(self.times, prepend=0.0)


def sample_site0(count: int, rng: RngLike) -> BurnStream:
    """Burnout times of the origin: a rate-1 Poisson process."""
    if count < 1:
        raise EmptyRequestError("count must be at least 1")
    gen = _gen(rng)
    return BurnStream(0, np.cumsum(gen.standard_exponential(count)))


def couple(parent_times, clocks: Iterable[float]) -> np.ndarray:
    """Arrival-clock coupling with explicit occupation clocks.

    After each child burnout at t0 (initially 0) the next clock value c gives
    the occupation time t0 + c, and the child burns at the first parent time
    at or after it. Stops when the parent stream or the clocks run out.
    """
    parent = np.asarray(parent_times, dtype=float)
    out = []
    t0 = 0.0
    start = 0
    for c in clocks:
        idx = start + int(np.searchsorted(parent[start:], t0 + c, side="left"))
        if idx >= parent.size:
            break
        t0 = float(parent[idx])
        out.append(t0)
        start = idx + 1
    return np.array(out, dtype=float)


def _thin(parent: np.ndarray, last_parent: float, gen: np.random.Generator) -> np.ndarray:
    gaps = np.diff(parent, prepend=last_parent)
    return parent[gen.standard_exponential(parent.size) <= gaps]


def propagate(parent: BurnStream, rng: RngLike, method: str = "thinning") -> BurnStream:
    """Burnout stream of site ``parent.site_index + 1`` given its parent's.

    Both methods produce the exact law; every output time is an element of
    the parent stream. ``"thinning"`` is vectorized, ``"arrival"`` follows
    a single occupation clock per child burnout.
    """
    if len(parent) == 0:
        raise EmptyRequestError("parent stream is empty")
    gen = _gen(rng)
    if method == "thinning":
        child = _thin(parent.times, 0.0, gen)
    elif method == "arrival":
        child = _arrival(parent.times, gen)
    else:
        raise ValueError(f"unknown method {method!r}")
    return BurnStream(parent.site_index + 1, child)


def _arrival(parent: np.ndarray, gen: np.random.Generator) -> np.ndarray:
    def clocks():
        while True:
            yield from gen.standard_exponential(1024).tolist()

    return couple(parent, clocks())


def expected_gap(n: int) -> float:
    """Rough mean of tau_n used only to size sampling chunks."""
    return 1.0 + math.exp(EULER_GAMMA) * math.log(n + 1)


def sample_tau(n: int, samples: int, rng: RngLike, budget: int = DEFAULT_BUDGET,
               max_chunk: int = 1 << 20) -> np.ndarray:
    """`samples` consecutive inter-burnout gaps at site n.

    The origin stream is generated in chunks that pass through all n
    thinning stages; chunk sizes double until enough site-n gaps exist.
    Gaps are i.i.d. from the first one since every site starts vacant.
    """
    if n < 0:
        raise DomainError("site index n must be nonnegative")
    if samples < 1:
        raise EmptyRequestError("samples must be at least 1")
    if n * samples > budget:
        raise BudgetError(f"n * samples = {n * samples} exceeds budget {budget}")
    gen = _gen(rng)
    last = np.zeros(n)  # latest burnout time of each parent site 0..n-1
    t0 = 0.0
    prev = 0.0
    out = []
    have = 0
    chunk = max(256, min(max_chunk, int(1.1 * samples * expected_gap(n)) // 4 + 1))
    while have < samples:
        times = t0 + np.cumsum(gen.standard_exponential(chunk))
        t0 = times[-1]
        for k in range(n):
            if times.size == 0:
                break
            parent_last = last[k]
            last[k] = times[-1]
            times = _thin(times, parent_last, gen)
        if times.size:
            out.append(np.diff(times, prepend=prev))
            prev = times[-1]
            have += times.size
        chunk = min(2 * chunk, max_chunk)
    return np.concatenate(out)[:samples]


def _tau_job(args):
    n, samples, handle, budget = args
    return sample_tau(n, samples, handle, budget)


def sample_tau_replicas(n: int, samples: int, seed: int, streams: int = 1,
                        workers: int = 1, budget: int = DEFAULT_BUDGET):
    """Split `samples` site-n gaps over independent chains.

    Chain i uses ``RngHandle(seed, stream=i)``, so the output depends on
    (seed, streams) only, never on the worker count. Returns the gaps and
    the chain id of each gap.
    """
    if streams < 1:
        raise ValueError("streams must be at least 1")
    if samples < streams:
        raise EmptyRequestError("need at least one sample per stream")
    sizes = [samples // streams + (i < samples % streams) for i in range(streams)]
    jobs = [(n, m, RngHandle(seed, stream=i), budget) for i, m in enumerate(sizes)]
    if workers > 1 and streams > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_tau_job, jobs))
    else:
        parts = [_tau_job(j) for j in jobs]
    replica = np.repeat(np.arange(streams), sizes)
    return np.concatenate(parts), replica


@dataclass(frozen=True)
class Burnt:
    """The target burned for the first time at `time`."""

    time: float


@dataclass(frozen=True)
class Censored:
    """The target had not burned by `horizon`."""

    horizon: float


def simulate_graph_fire(g: GraphSpec, target: int, horizon: float, rng: RngLike):
    """First burnout time of `target`, starting from an all-vacant graph.

    Between two ignitions of the origin every vacant vertex independently
    becomes occupied with probability 1 - exp(-gap), and occupied vertices
    stay put. At an ignition the occupied cluster of the origin burns.
    Returns :class:`Burnt` or :class:`Censored`.
    """
    if not 0 <= target < g.n_vertices:
        raise DomainError(f"target {target} not a vertex")
    if not horizon > 0:
        raise DomainError("horizon must be positive")
    gen = _gen(rng)
    v0 = g.origin
    occupied = np.zeros(g.n_vertices, dtype=bool)
    t = 0.0
    while True:
        gap = gen.standard_exponential()
        t += gap
        if t > horizon:
            return Censored(horizon)
        occupied |= gen.standard_exponential(g.n_vertices) <= gap
        cluster = g.cluster_of(v0, occupied)
        if _contains(cluster, target):
            return Burnt(t)
        occupied[cluster] = False


def _contains(sorted_idx: np.ndarray, v: int) -> bool:
    i = np.searchsorted(sorted_idx, v)
    return bool(i < sorted_idx.size and sorted_idx[i] == v)


@dataclass(frozen=True)
class FirstBurnouts:
    """First-burnout times over replicas; censored entries carry the horizon."""

    times: np.ndarray
    censored: np.ndarray
    horizon: float

    @property
    def observed(self) -> np.ndarray:
        return self.times[~self.censored]


def _fire_job(args):
    g, target, horizon, handle, start, stop = args
    times = np.empty(stop - start)
    cens = np.zeros(stop - start, dtype=bool)
    for j, i in enumerate(range(start, stop)):
        res = simulate_graph_fire(g, target, horizon, handle.for_replica(i))
        if isinstance(res, Censored):
            times[j], cens[j] = horizon, True
        else:
            times[j] = res.time
    return times, cens


def first_burnouts(g: GraphSpec, target: int, horizon: float, replicas: int,
                   rng: RngHandle, workers: int = 1) -> FirstBurnouts:
    """Independent replicas of :func:`simulate_graph_fire`.

    Replica i uses ``rng.for_replica(i)``; results do not depend on `workers`.
    """
    if replicas < 1:
        raise EmptyRequestError("replicas must be at least 1")
    if workers > 1:
        bounds = np.linspace(0, replicas, min(workers * 4, replicas) + 1).astype(int)
        jobs = [(g, target, horizon, rng, a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_fire_job, jobs))
    else:
        parts = [_fire_job((g, target, horizon, rng, 0, replicas))]
    times = np.concatenate([p[0] for p in parts])
    cens = np.concatenate([p[1] for p in parts])
    return FirstBurnouts(times, cens, horizon)
