"""Planar surface-code memory under i.i.d. Z noise with matching-based recovery.

Geometry (primal lattice, distance d): vertices sit at integer (row, col)
with rows 0..d and cols 0..d-1. Rows 0 and d are the rough boundaries where
e anyons may vanish; all other vertices carry an X-type star check. Vertical
edges join (r, c)-(r+1, c) and get indices r*d + c; horizontal edges join
interior neighbours (r, c)-(r, c+1) and are numbered after all vertical ones.
That gives n = d^2 + (d-1)^2 qubits, d(d-1) star checks and d(d-1) plaquettes.

The dual lattice (X errors, plaquette checks, smooth left/right boundaries)
reuses the same qubit indices, so both sectors share one decoder.
"""

from __future__ import annotations

import itertools
import math
import statistics
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

BOUNDARY = -1
# edge endpoints below zero name the absorbing boundary the edge runs into
SIDE_A, SIDE_B = -1, -2
WILSON_Z = statistics.NormalDist().inv_cdf(0.975)
BLOCK_SIZE = 4096


class DecoderError(AssertionError):
    """A residual that still carries a syndrome: the decoder is broken."""


class NoCrossing(RuntimeError):
    pass


class BoundDivergenceWarning(UserWarning):
    pass


@dataclass(eq=False)
class SurfaceLattice:
    """Check graph of one error sector.

    ``edge_ends[e]`` lists the two checks touched by qubit e; SIDE_A / SIDE_B
    stand for the two opposite absorbing boundaries. ``logical`` is a minimal
    boundary-to-boundary chain and each entry of ``cuts`` is the support of a
    conjugate logical; a residual cycle fails iff it overlaps a cut oddly.
    """

    d: int
    sector: str
    n_qubits: int
    edge_ends: np.ndarray
    check_coords: list[tuple[int, int]]
    check_kinds: list[str]
    logical: tuple[int, ...]
    cuts: tuple[tuple[int, ...], ...]
    other_checks: tuple[tuple[int, ...], ...]
    incidence: np.ndarray = field(init=False, repr=False)
    dist: np.ndarray = field(init=False, repr=False)
    bdist: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        nc = len(self.check_coords)
        inc = np.zeros((nc, self.n_qubits), dtype=np.uint8)
        for e, (a, b) in enumerate(self.edge_ends):
            for v in (a, b):
                if v >= 0:
                    inc[v, e] ^= 1
        self.incidence = inc
        self._adj = [[] for _ in range(nc)]
        self._boundary_edges = {}
        for e, (a, b) in enumerate(self.edge_ends):
            if a >= 0 and b >= 0:
                self._adj[a].append((b, e))
                self._adj[b].append((a, e))
            else:
                v = a if a >= 0 else b
                self._boundary_edges.setdefault(v, []).append(e)
        self.dist = np.array([self._bfs(s) for s in range(nc)], dtype=np.int64)
        self.bdist = self._boundary_bfs()
        self._paths: dict[tuple[int, int], tuple[int, ...]] = {}
        self._decode_cache: dict[bytes, np.ndarray] = {}

    # -- structure --------------------------------------------------------

    @property
    def n_checks(self) -> int:
        return len(self.check_coords)

    @property
    def n_vertex_checks(self) -> int:
        return self.n_checks

    @property
    def n_plaquettes(self) -> int:
        return len(self.other_checks)

    def star(self, v: int) -> tuple[int, ...]:
        return tuple(int(e) for e in np.flatnonzero(self.incidence[v]))

    def _bfs(self, src: int) -> list[int]:
        out = [-1] * self.n_checks
        out[src] = 0
        queue = deque([src])
        while queue:
            u = queue.popleft()
            for w, _ in self._adj[u]:
                if out[w] < 0:
                    out[w] = out[u] + 1
                    queue.append(w)
        return out

    def _boundary_bfs(self) -> np.ndarray:
        out = np.full(self.n_checks, -1, dtype=np.int64)
        queue = deque()
        for v in self._boundary_edges:
            out[v] = 1
            queue.append(v)
        while queue:
            u = queue.popleft()
            for w, _ in self._adj[u]:
                if out[w] < 0:
                    out[w] = out[u] + 1
                    queue.append(w)
        return out

    def boundary_to_boundary_distance(self) -> int:
        """Shortest chain joining the two opposite absorbing boundaries."""
        near = {SIDE_A: set(), SIDE_B: set()}
        for e, (p, q) in enumerate(self.edge_ends):
            if p < 0 and q < 0 and p != q:
                return 1
            for x, y in ((p, q), (q, p)):
                if x < 0 and y >= 0:
                    near[x].add(int(y))
        return 2 + min(int(self.dist[u, v]) for u in near[SIDE_A] for v in near[SIDE_B])

    # -- chains -----------------------------------------------------------

    def syndrome_bits(self, mask: np.ndarray) -> np.ndarray:
        """Check parities for one mask (n,) or a batch (B, n)."""
        return (np.asarray(mask, dtype=np.uint8) @ self.incidence.T) & 1

    def path(self, u: int, v: int) -> tuple[int, ...]:
        """Lexicographically smallest (by sorted edge indices) shortest chain.

        ``v`` may be BOUNDARY. Greedy: the smallest-index edge lying on any
        shortest path must belong to the answer; split there and recurse on
        both halves, which are edge-disjoint.
        """
        key = (u, v)
        if key in self._paths:
            return self._paths[key]
        chosen = []
        segments = [(u, v)]
        while segments:
            best = None
            for si, (a, b) in enumerate(segments):
                e, x, y = self._min_edge_on_geodesic(a, b)
                if best is None or e < best[0]:
                    best = (e, si, x, y)
            e, si, x, y = best
            a, b = segments.pop(si)
            chosen.append(e)
            if a != x:
                segments.append((a, x))
            if y >= 0 and y != b:
                segments.append((y, b))
        out = tuple(sorted(chosen))
        self._paths[key] = out
        return out

    def _dist_to(self, x: int, b: int) -> int:
        return int(self.bdist[x]) if b == BOUNDARY else int(self.dist[x, b])

    def _min_edge_on_geodesic(self, a: int, b: int):
        total = self._dist_to(a, b)
        best = None
        for e, (p, q) in enumerate(self.edge_ends):
            for x, y in ((p, q), (q, p)):
                if x < 0:
                    continue
                if y < 0:
                    if b != BOUNDARY:
                        continue
                    ok = self.dist[a, x] + 1 == total
                else:
                    ok = self.dist[a, x] + 1 + self._dist_to(y, b) == total
                if ok and (best is None or e < best[0]):
                    best = (e, x, y)
            if best is not None and best[0] == e:
                break
        return best


def build_lattice(d: int, sector: str = "Z") -> SurfaceLattice:
    """Distance-d planar lattice for Z errors (``sector='Z'``) or its dual (``'X'``)."""
    if d % 2 == 0 or not 3 <= d <= 25:
        raise ValueError(f"distance must be odd and in [3, 25], got {d}")
    if sector not in ("Z", "X"):
        raise ValueError(f"sector must be 'Z' or 'X', got {sector!r}")
    n_vert = d * d

    def vert(r, c):
        return r * d + c

    def horiz(r, c):
        return n_vert + (r - 1) * (d - 1) + c

    n = d * d + (d - 1) ** 2
    star_coords = [(r, c) for r in range(1, d) for c in range(d)]
    star_index = {rc: i for i, rc in enumerate(star_coords)}
    plaq_coords = [(r, c) for r in range(d) for c in range(d - 1)]
    plaq_index = {rc: i for i, rc in enumerate(plaq_coords)}

    star_ends = np.empty((n, 2), dtype=np.int64)
    plaq_ends = np.empty((n, 2), dtype=np.int64)
    for r in range(d):
        for c in range(d):
            e = vert(r, c)
            star_ends[e] = [star_index.get((r, c), SIDE_A), star_index.get((r + 1, c), SIDE_B)]
            plaq_ends[e] = [plaq_index.get((r, c - 1), SIDE_A), plaq_index.get((r, c), SIDE_B)]
    for r in range(1, d):
        for c in range(d - 1):
            e = horiz(r, c)
            star_ends[e] = [star_index[(r, c)], star_index[(r, c + 1)]]
            plaq_ends[e] = [plaq_index[(r - 1, c)], plaq_index[(r, c)]]

    def supports(ends, count):
        sets = [[] for _ in range(count)]
        for e, pair in enumerate(ends):
            for v in pair:
                if v >= 0:
                    sets[v].append(e)
        return tuple(tuple(s) for s in sets)

    column_paths = tuple(tuple(vert(r, c) for r in range(d)) for c in range(d))
    row_cuts = tuple(tuple(vert(r, c) for c in range(d)) for r in range(d))
    if sector == "Z":
        lat = SurfaceLattice(
            d, "Z", n, star_ends, star_coords,
            ["interior-check"] * len(star_coords),
            logical=column_paths[0], cuts=row_cuts,
            other_checks=supports(plaq_ends, len(plaq_coords)),
        )
    else:
        lat = SurfaceLattice(
            d, "X", n, plaq_ends, plaq_coords,
            ["plaquette"] * len(plaq_coords),
            logical=row_cuts[0], cuts=column_paths,
            other_checks=supports(star_ends, len(star_coords)),
        )
    if lat.n_checks != d * (d - 1) or lat.n_plaquettes != d * (d - 1):
        raise AssertionError("check counts do not match d(d-1)")
    if n - 2 * d * (d - 1) != 1:
        raise AssertionError("lattice does not encode exactly one qubit")
    return lat


def boundary_vertex_kinds(d: int) -> dict[tuple[int, int], str]:
    """Classification of every primal vertex by position."""
    kinds = {}
    for r in range(d + 1):
        for c in range(d):
            if r == 0:
                kinds[(r, c)] = "rough-boundary-top"
            elif r == d:
                kinds[(r, c)] = "rough-boundary-bottom"
            else:
                kinds[(r, c)] = "interior-check"
    return kinds


# --- chains and syndromes ----------------------------------------------------

@dataclass(frozen=True)
class ErrorChain:
    flipped: frozenset[int]

    def __init__(self, flipped: Iterable[int] = ()):
        object.__setattr__(self, "flipped", frozenset(int(e) for e in flipped))

    @classmethod
    def from_mask(cls, mask) -> ErrorChain:
        return cls(np.flatnonzero(mask))

    def mask(self, n: int) -> np.ndarray:
        out = np.zeros(n, dtype=np.uint8)
        out[list(self.flipped)] = 1
        return out

    def __xor__(self, other: ErrorChain) -> ErrorChain:
        return ErrorChain(self.flipped ^ other.flipped)

    def __len__(self):
        return len(self.flipped)


@dataclass(frozen=True)
class Syndrome:
    anyons: frozenset[int]

    def __init__(self, anyons: Iterable[int] = ()):
        object.__setattr__(self, "anyons", frozenset(int(v) for v in anyons))

    def __bool__(self):
        return bool(self.anyons)

    def __len__(self):
        return len(self.anyons)


def _check_chain(lat: SurfaceLattice, chain: ErrorChain) -> None:
    bad = [e for e in chain.flipped if not 0 <= e < lat.n_qubits]
    if bad:
        raise ValueError(f"edges {sorted(bad)} are not on the lattice")


def logical_operators(lat: SurfaceLattice) -> tuple[frozenset[int], frozenset[int]]:
    """(Z-bar support, X-bar support) as edge sets."""
    if lat.sector == "Z":
        return frozenset(lat.logical), frozenset(lat.cuts[0])
    return frozenset(lat.cuts[0]), frozenset(lat.logical)


def sample_errors(lat: SurfaceLattice, eps: float, rng: np.random.Generator) -> ErrorChain:
    if not 0 <= eps <= 1:
        raise ValueError(f"error rate must be in [0, 1], got {eps}")
    return ErrorChain.from_mask(rng.random(lat.n_qubits) < eps)


def syndrome_of(lat: SurfaceLattice, chain: ErrorChain) -> Syndrome:
    _check_chain(lat, chain)
    return Syndrome(np.flatnonzero(lat.syndrome_bits(chain.mask(lat.n_qubits))))


# --- decoding -----------------------------------------------------------------

def _components(adj: np.ndarray) -> list[list[int]]:
    k = adj.shape[0]
    seen = [False] * k
    out = []
    for s in range(k):
        if seen[s]:
            continue
        seen[s] = True
        comp, stack = [], [s]
        while stack:
            u = stack.pop()
            comp.append(u)
            for w in np.flatnonzero(adj[u]):
                if not seen[w]:
                    seen[w] = True
                    stack.append(int(w))
        out.append(sorted(comp))
    return out


def match_anyons(lat: SurfaceLattice, anyons: Sequence[int]) -> list[tuple[int, int]]:
    """Minimum-weight pairing of anyons with each other or the boundary.

    Each anyon gets a private boundary node (anyon-boundary weight = its
    boundary distance, boundary-boundary weight 0) and Edmonds' blossom
    algorithm solves the perfect matching. Anyon pairs with
    dist >= bdist_i + bdist_j are dropped beforehand since routing both to
    the boundary is never worse; the graph then splits into independent
    components. Returns (anyon, partner) pairs, partner BOUNDARY allowed.
    """
    a = np.asarray(sorted(anyons), dtype=np.int64)
    k = a.size
    if k == 0:
        return []
    dist = lat.dist[np.ix_(a, a)]
    bd = lat.bdist[a]
    adj = dist < bd[:, None] + bd[None, :]
    np.fill_diagonal(adj, False)
    pairs = []
    for comp in _components(adj):
        if len(comp) == 1:
            pairs.append((int(a[comp[0]]), BOUNDARY))
        elif len(comp) == 2:
            pairs.append((int(a[comp[0]]), int(a[comp[1]])))
        else:
            pairs.extend(_blossom(a, comp, dist, bd, adj))
    return pairs


def _blossom(a, comp, dist, bd, adj) -> list[tuple[int, int]]:
    size = len(comp)
    sub = dist[np.ix_(comp, comp)]
    top = int(max(bd[comp].max(), sub.max())) + 1
    g = nx.Graph()
    # minimum weight = maximum of (top - w) at maximum cardinality; boundary
    # copies are joined only where their anyons are, which is all an optimal
    # matching ever needs (copies pair up exactly when their anyons do)
    for i, u in enumerate(comp):
        g.add_edge(i, size + i, weight=top - int(bd[u]))
        for j in range(i + 1, size):
            if adj[u, comp[j]]:
                g.add_edge(i, j, weight=top - int(sub[i, j]))
                g.add_edge(size + i, size + j, weight=top)
    mate = nx.max_weight_matching(g, maxcardinality=True)
    pairs = []
    for x, y in mate:
        x, y = min(x, y), max(x, y)
        if x >= size:
            continue
        if y >= size:
            pairs.append((int(a[comp[x]]), BOUNDARY))
        else:
            pairs.append((int(a[comp[x]]), int(a[comp[y]])))
    return sorted(pairs)


def matching_weight(lat: SurfaceLattice, pairs) -> int:
    return sum(int(lat.bdist[u]) if v == BOUNDARY else int(lat.dist[u, v]) for u, v in pairs)


def _decode_mask(lat: SurfaceLattice, bits: np.ndarray) -> np.ndarray:
    key = np.packbits(bits).tobytes()
    hit = lat._decode_cache.get(key)
    if hit is not None:
        return hit
    mask = np.zeros(lat.n_qubits, dtype=np.uint8)
    for u, v in match_anyons(lat, np.flatnonzero(bits)):
        mask[list(lat.path(u, v))] ^= 1
    if not np.array_equal(lat.syndrome_bits(mask), bits):
        raise DecoderError("correction does not reproduce the syndrome")
    lat._decode_cache[key] = mask
    return mask


def decode_mwpm(lat: SurfaceLattice, syn: Syndrome) -> ErrorChain:
    bits = np.zeros(lat.n_checks, dtype=np.uint8)
    bits[list(syn.anyons)] = 1
    return ErrorChain.from_mask(_decode_mask(lat, bits))


def crosses(lat: SurfaceLattice, mask: np.ndarray, cut: int = 0) -> np.ndarray:
    """Overlap parity of chain(s) with one conjugate-logical cut."""
    return np.asarray(mask, dtype=np.uint8)[..., list(lat.cuts[cut])].sum(axis=-1) & 1


def is_logical_failure(lat: SurfaceLattice, residual: ErrorChain, cut: int = 0) -> bool:
    mask = residual.mask(lat.n_qubits)
    if lat.syndrome_bits(mask).any():
        raise DecoderError("residual is not a cycle: its syndrome is non-empty")
    return bool(crosses(lat, mask, cut))


# --- Monte Carlo --------------------------------------------------------------

@dataclass(frozen=True)
class TrialStats:
    d: int
    epsilon: float
    trials: int
    failures: int
    p_logical: float
    ci_low: float
    ci_high: float
    seed: int

    @property
    def sigma(self) -> float:
        p = self.p_logical
        return math.sqrt(max(p * (1 - p), 0.0) / self.trials)

    def csv_row(self):
        return (self.d, self.epsilon, self.trials, self.failures,
                self.p_logical, self.ci_low, self.ci_high, self.seed)


TRIAL_COLUMNS = ("d", "epsilon", "trials", "failures", "p_logical", "ci_low", "ci_high", "seed")


def wilson_interval(failures: int, trials: int, z: float = WILSON_Z) -> tuple[float, float]:
    p = failures / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if failures == 0 else max(0.0, centre - half)
    hi = 1.0 if failures == trials else min(1.0, centre + half)
    return lo, hi


def block_generator(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


_LATTICES: dict[tuple[int, str], SurfaceLattice] = {}


def _cached_lattice(d: int, sector: str) -> SurfaceLattice:
    key = (d, sector)
    if key not in _LATTICES:
        _LATTICES[key] = build_lattice(d, sector)
    return _LATTICES[key]


def decode_batch(lat: SurfaceLattice, errors: np.ndarray) -> np.ndarray:
    """Corrections for a (B, n) batch of error masks; soundness checked per row."""
    syn = lat.syndrome_bits(errors)
    corr = np.empty_like(errors, dtype=np.uint8)
    for i in range(errors.shape[0]):
        corr[i] = _decode_mask(lat, syn[i])
    residual_syn = lat.syndrome_bits(errors ^ corr)
    if residual_syn.any():
        raise DecoderError("a residual error carries a non-empty syndrome")
    return corr


def _run_block(args) -> int:
    d, sector, eps, seed, block, size = args
    lat = _cached_lattice(d, sector)
    rng = block_generator(seed, block)
    errors = (rng.random((size, lat.n_qubits)) < eps).astype(np.uint8)
    corr = decode_batch(lat, errors)
    return int(crosses(lat, errors ^ corr).sum())


def run_trials(lat: SurfaceLattice | int, eps: float, trials: int, seed: int,
               workers: int = 1) -> TrialStats:
    """Logical failure statistics of ``trials`` independent memory experiments.

    Trials are grouped in fixed blocks of BLOCK_SIZE, block b drawing from a
    generator seeded by (seed, b), so the result depends only on
    (d, eps, trials, seed) and never on ``workers``.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    if not 0 <= eps <= 1:
        raise ValueError(f"error rate must be in [0, 1], got {eps}")
    if isinstance(lat, int):
        lat = _cached_lattice(lat, "Z")
    else:
        _LATTICES.setdefault((lat.d, lat.sector), lat)
    jobs = []
    for b, start in enumerate(range(0, trials, BLOCK_SIZE)):
        jobs.append((lat.d, lat.sector, eps, seed, b, min(BLOCK_SIZE, trials - start)))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            failures = sum(pool.map(_run_block, jobs))
    else:
        failures = sum(map(_run_block, jobs))
    lo, hi = wilson_interval(failures, trials)
    return TrialStats(lat.d, float(eps), trials, failures, failures / trials, lo, hi, seed)


def exhaustive_failure_table(lat: SurfaceLattice) -> tuple[np.ndarray, np.ndarray]:
    """(weight, failed) for every one of the 2^n error patterns."""
    if lat.d > 3:
        raise ValueError("exhaustive enumeration is limited to d = 3")
    n = lat.n_qubits
    idx = np.arange(2**n, dtype=np.int64)
    errors = ((idx[:, None] >> np.arange(n)) & 1).astype(np.uint8)
    corr = decode_batch(lat, errors)
    failed = crosses(lat, errors ^ corr).astype(bool)
    return errors.sum(axis=1), failed


def exhaustive_logical_rate(lat: SurfaceLattice, eps: float) -> float:
    weight, failed = exhaustive_failure_table(lat)
    n = lat.n_qubits
    probs = eps ** weight.astype(float) * (1 - eps) ** (n - weight).astype(float)
    return float(probs[failed].sum())


def union_bound(d: int, eps: float) -> float:
    """d * sum_{l=d}^{n} (36 eps)^{l/2} with n = d^2 + (d-1)^2."""
    if eps >= 1 / 36:
        import warnings

        warnings.warn(f"eps={eps} >= 1/36: the path-counting bound no longer converges",
                      BoundDivergenceWarning, stacklevel=2)
    n = d * d + (d - 1) ** 2
    base = math.sqrt(36 * eps)
    return d * sum(base**ell for ell in range(d, n + 1))


# --- threshold ----------------------------------------------------------------

@dataclass(frozen=True)
class Crossing:
    d_small: int
    d_large: int
    epsilon: float
    sigma: float


@dataclass(frozen=True)
class ThresholdReport:
    estimate: float
    spread: float
    uncertainty: float
    crossings: tuple[Crossing, ...]
    stats: tuple[TrialStats, ...]
    seed: int

    def lines(self) -> list[str]:
        out = [
            f"threshold estimate={self.estimate:.5f} spread={self.spread:.5f} "
            f"uncertainty={self.uncertainty:.5f} seed={self.seed}"
        ]
        for c in self.crossings:
            out.append(f"crossing d={c.d_small},{c.d_large} epsilon={c.epsilon:.5f} sigma={c.sigma:.5f}")
        return out


def _logit(failures, trials):
    p = (np.asarray(failures, dtype=float) + 0.5) / (trials + 1.0)
    return np.log(p / (1 - p))


def crossing_point(eps_grid: Sequence[float], fail_small, fail_large, trials) -> float:
    """First sign change of logit(p_small) - logit(p_large), interpolated linearly."""
    diff = _logit(fail_small, trials) - _logit(fail_large, trials)
    for i in range(len(eps_grid) - 1):
        if diff[i] > 0 and diff[i + 1] <= 0:
            x0, x1 = eps_grid[i], eps_grid[i + 1]
            return float(x0 + (x1 - x0) * diff[i] / (diff[i] - diff[i + 1]))
    raise NoCrossing("p_logical curves do not cross inside the grid")


def threshold_estimate(ds: Sequence[int], eps_grid: Sequence[float], trials_per_point: int,
                       seed: int, workers: int = 1, bootstrap: int = 400) -> ThresholdReport:
    ds = sorted(ds)
    eps_grid = sorted(eps_grid)
    if len(ds) < 2:
        raise ValueError("need at least two distances")
    if len(eps_grid) < 4:
        raise ValueError("need at least four grid points")
    stats = {}
    for d in ds:
        lat = _cached_lattice(d, "Z")
        for eps in eps_grid:
            stats[d, eps] = run_trials(lat, eps, trials_per_point, seed, workers=workers)
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(2**31,)))
    crossings = []
    for d1, d2 in zip(ds, ds[1:]):
        f1 = np.array([stats[d1, e].failures for e in eps_grid])
        f2 = np.array([stats[d2, e].failures for e in eps_grid])
        x = crossing_point(eps_grid, f1, f2, trials_per_point)
        samples = []
        p1, p2 = f1 / trials_per_point, f2 / trials_per_point
        for _ in range(bootstrap):
            b1 = rng.binomial(trials_per_point, p1)
            b2 = rng.binomial(trials_per_point, p2)
            try:
                samples.append(crossing_point(eps_grid, b1, b2, trials_per_point))
            except NoCrossing:
                pass
        sigma = float(np.std(samples)) if len(samples) > 1 else math.inf
        crossings.append(Crossing(d1, d2, x, sigma))
    xs = np.array([c.epsilon for c in crossings])
    sig = np.array([c.sigma for c in crossings])
    estimate = float(xs.mean())
    spread = float(xs.std()) if xs.size > 1 else 0.0
    uncertainty = float(math.sqrt(spread**2 + (np.sqrt((sig**2).sum()) / sig.size) ** 2))
    ordered = tuple(stats[d, e] for d in ds for e in eps_grid)
    return ThresholdReport(estimate, spread, uncertainty, tuple(crossings), ordered, seed)


# --- exhaustive matching oracle --------------------------------------------------

def exhaustive_matching_weight(lat: SurfaceLattice, anyons: Sequence[int]) -> int:
    """Minimum total weight over every way of pairing anyons or sending them to the boundary."""
    anyons = sorted(anyons)
    if len(anyons) > 10:
        raise ValueError("exhaustive pairing limited to 10 anyons")

    def best(rest: tuple[int, ...]) -> int:
        if not rest:
            return 0
        u, others = rest[0], rest[1:]
        value = int(lat.bdist[u]) + best(others)
        for i, v in enumerate(others):
            value = min(value, int(lat.dist[u, v]) + best(others[:i] + others[i + 1:]))
        return value

    return best(tuple(anyons))


def all_pairings(items: Sequence[int]):
    """Every partition of ``items`` into pairs and boundary singletons."""
    items = list(items)
    if not items:
        yield []
        return
    u, rest = items[0], items[1:]
    for tail in all_pairings(rest):
        yield [(u, BOUNDARY)] + tail
    for i, v in enumerate(rest):
        for tail in all_pairings(rest[:i] + rest[i + 1:]):
            yield [(u, v)] + tail


def reachable_syndromes(lat: SurfaceLattice) -> list[Syndrome]:
    """Every syndrome produced by some error pattern, by enumeration (d = 3 only)."""
    if lat.n_qubits > 16:
        raise ValueError("syndrome enumeration limited to 16 qubits")
    idx = np.arange(2**lat.n_qubits, dtype=np.int64)
    errors = ((idx[:, None] >> np.arange(lat.n_qubits)) & 1).astype(np.uint8)
    bits = np.unique(lat.syndrome_bits(errors), axis=0)
    return sorted((Syndrome(np.flatnonzero(b)) for b in bits), key=lambda s: sorted(s.anyons))


# --- code conditions on explicit 13-qubit states --------------------------------

@dataclass(frozen=True)
class PauliError:
    """X^x Z^z on the code block (x, z are qubit bitmasks); phase ignored."""

    x: int
    z: int

    @property
    def weight(self) -> int:
        return bin(self.x | self.z).count("1")

    def label(self) -> str:
        if not self.x | self.z:
            return "I"
        parts = []
        for q in range((self.x | self.z).bit_length()):
            bx, bz = self.x >> q & 1, self.z >> q & 1
            if bx or bz:
                parts.append(("Y" if bx and bz else "X" if bx else "Z") + str(q))
        return " ".join(parts)

    def apply(self, amps: np.ndarray) -> np.ndarray:
        idx = np.arange(amps.size)
        out = amps
        if self.z:
            parity = _parity(idx & self.z)
            out = out * (1 - 2 * parity)
        if self.x:
            out = out[idx ^ self.x]
        return out


def _parity(x: np.ndarray) -> np.ndarray:
    x = x.copy()
    p = np.zeros_like(x)
    while x.any():
        p ^= x & 1
        x >>= 1
    return p


def _mask_of(edges: Iterable[int]) -> int:
    return sum(1 << int(e) for e in set(edges))


def code_states(lat: SurfaceLattice) -> tuple[np.ndarray, np.ndarray]:
    """(|0>, |1>) logical states of the primal code as 2^n amplitude arrays.

    |0> is |0...0> projected onto the +1 eigenspace of every star check
    (X on the star), which makes it a +1 eigenstate of Z-bar; |1> = X-bar|0>.
    """
    if lat.sector != "Z":
        raise ValueError("code states are built on the primal lattice")
    n = lat.n_qubits
    if n > 13:
        raise ValueError("explicit code states limited to d = 3 (13 qubits)")
    psi = np.zeros(2**n, dtype=np.complex128)
    psi[0] = 1.0
    for v in range(lat.n_checks):
        star = PauliError(_mask_of(lat.star(v)), 0)
        psi = 0.5 * (psi + star.apply(psi))
    psi /= np.linalg.norm(psi)
    zbar, xbar = logical_operators(lat)
    one = PauliError(_mask_of(xbar), 0).apply(psi)
    return psi, one


def pauli_errors_up_to(n: int, max_weight: int) -> list[PauliError]:
    out = [PauliError(0, 0)]
    for w in range(1, max_weight + 1):
        for qubits in itertools.combinations(range(n), w):
            for kinds in itertools.product("XYZ", repeat=w):
                x = sum(1 << q for q, k in zip(qubits, kinds) if k in "XY")
                z = sum(1 << q for q, k in zip(qubits, kinds) if k in "ZY")
                out.append(PauliError(x, z))
    return out


@dataclass(frozen=True)
class CodeConditionReport:
    n_errors: int
    pairs_checked: int
    max_bit_overlap: float
    max_phase_overlap: float
    max_element_gap: float
    tolerance: float
    first_violation: tuple[str, str, str] | None

    @property
    def passed(self) -> bool:
        return self.first_violation is None

    def lines(self) -> list[str]:
        out = [
            f"errors={self.n_errors} ordered_pairs={self.pairs_checked} tolerance={self.tolerance:g}",
            f"max |<0|Ea^dag Eb|1>| = {self.max_bit_overlap:.3e}",
            f"max |(Ea|+>)^dag Eb|->| = {self.max_phase_overlap:.3e}",
            f"max |<0|Ea^dag Eb|0> - <1|Ea^dag Eb|1>| = {self.max_element_gap:.3e}",
        ]
        if self.first_violation:
            cond, ea, eb = self.first_violation
            out.append(f"VIOLATED {cond} at Ea=[{ea}] Eb=[{eb}]")
        else:
            out.append("all conditions hold")
        return out


def check_error_set(lat: SurfaceLattice, errors: Sequence[PauliError],
                    tol: float = 1e-9) -> CodeConditionReport:
    """Both distinguishability conditions and the matrix-element equality
    for every ordered pair of errors in ``errors``."""
    zero, one = code_states(lat)
    plus, minus = (zero + one) / math.sqrt(2), (zero - one) / math.sqrt(2)
    e0 = np.array([e.apply(zero) for e in errors])
    e1 = np.array([e.apply(one) for e in errors])
    ep = np.array([e.apply(plus) for e in errors])
    em = np.array([e.apply(minus) for e in errors])
    bit = np.abs(e0.conj() @ e1.T)
    phase = np.abs(ep.conj() @ em.T)
    gap = np.abs(e0.conj() @ e0.T - e1.conj() @ e1.T)
    first = None
    for name, mat in (("bit-flip orthogonality", bit), ("phase orthogonality", phase),
                      ("matrix-element equality", gap)):
        bad = np.argwhere(mat > tol)
        if bad.size and first is None:
            i, j = bad[0]
            first = (name, errors[i].label(), errors[j].label())
    return CodeConditionReport(
        len(errors), len(errors) ** 2,
        float(bit.max()), float(phase.max()), float(gap.max()), tol, first,
    )


def verify_code_conditions(d: int = 3, max_error_weight: int = 1,
                           tol: float = 1e-9) -> CodeConditionReport:
    if d != 3:
        raise ValueError("explicit code-condition check is limited to d = 3")
    lat = build_lattice(d, "Z")
    return check_error_set(lat, pauli_errors_up_to(lat.n_qubits, max_error_weight), tol)


def logical_error_reports(d: int = 3, tol: float = 1e-9) -> dict[str, CodeConditionReport]:
    """Condition checks on {I, Z-bar} and {I, X-bar}: both must fail."""
    lat = build_lattice(d, "Z")
    zbar, xbar = logical_operators(lat)
    ident = PauliError(0, 0)
    return {
        "Zbar": check_error_set(lat, [ident, PauliError(0, _mask_of(zbar))], tol),
        "Xbar": check_error_set(lat, [ident, PauliError(_mask_of(xbar), 0)], tol),
    }
