"""Generators for the benchmark chains and their companion data.

Complete graphs, cycles (optionally lazy), Viscek trees with their block
structure and linear test functions, torus products Z_a x Z_b, plus seeded
random chains used by the verification suites.
"""

from collections import deque
from dataclasses import dataclass

import numpy as np

from .chain import add_laziness, build_chain, chain_from_kernel_pi
from .errors import (
    DegenerateGenerators,
    InvalidBlock,
    SizeCap,
    ValidationFailed,
)

SIZE_CAP = 2000


def complete_graph(n):
    """Uniform kernel K(x,y) = 1/n, self-loops included."""
    if n < 2:
        raise ValidationFailed(f"complete graph needs n >= 2, got {n}")
    return build_chain(np.full((n, n), 1.0 / n))


def cycle(n, lazy_alpha=0.0):
    """Simple random walk on Z_n, optionally made lazy."""
    if n < 3:
        raise ValidationFailed(f"cycle needs n >= 3, got {n}")
    K = np.zeros((n, n))
    for i in range(n):
        K[i, (i + 1) % n] = 0.5
        K[i, (i - 1) % n] = 0.5
    chain = build_chain(K)
    if lazy_alpha:
        chain = add_laziness(chain, lazy_alpha)
    return chain


def torus_product(a, b):
    """SRW on Z_a x Z_b with steps (+-1, 0), (0, +-1) at rate 1/4 each."""
    if a < 3 or b < 3:
        raise DegenerateGenerators(
            f"sides ({a}, {b}) below 3 collapse the generators")
    n = a * b
    if n > SIZE_CAP:
        raise SizeCap(f"torus has {n} states > cap {SIZE_CAP}")
    K = np.zeros((n, n))
    for i in range(a):
        for j in range(b):
            u = i * b + j
            for v in ((i + 1) % a * b + j, (i - 1) % a * b + j,
                      i * b + (j + 1) % b, i * b + (j - 1) % b):
                K[u, v] += 0.25
    return build_chain(K)


# -- Viscek trees ----------------------------------------------------------------

@dataclass(frozen=True)
class ViscekBlock:
    """A sub-tree isomorphic to an earlier generation.

    ``corners`` are its tips (pairwise at the block diameter), ``center``
    the meeting point of the tip-to-tip paths.
    """

    level: int
    vertices: frozenset
    corners: tuple
    center: int


@dataclass(frozen=True)
class ViscekGraph:
    """The self-similar tree of branching parameter N at generation gen."""

    N: int
    gen: int
    num_vertices: int
    edges: tuple
    corners: tuple
    center: int
    blocks: tuple

    @property
    def num_edges(self):
        return len(self.edges)

    @property
    def diameter(self):
        return 2 * 3 ** self.gen

    def adjacency(self):
        adj = [set() for _ in range(self.num_vertices)]
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def blocks_at(self, level):
        return tuple(b for b in self.blocks if b.level == level)


def _star(N):
    edges = tuple((0, i) for i in range(1, N + 1))
    block = ViscekBlock(level=0, vertices=frozenset(range(N + 1)),
                        corners=tuple(range(1, N + 1)), center=0)
    return N + 1, edges, tuple(range(1, N + 1)), 0, [block]


def _viscek_structure(N, gen):
    if gen == 0:
        return _star(N)
    nv0, edges0, corners0, center0, blocks0 = _viscek_structure(N, gen - 1)

    parent = list(range(nv0 * (N + 1)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    edges = []
    for c in range(N + 1):
        off = c * nv0
        edges.extend((off + u, off + v) for u, v in edges0)
    for i in range(1, N + 1):
        # glue corner i of the central copy to corner i of copy i
        a = find(0 * nv0 + corners0[i - 1])
        b = find(i * nv0 + corners0[i - 1])
        parent[a] = b
    reps = sorted({find(x) for x in range(nv0 * (N + 1))})
    label = {r: i for i, r in enumerate(reps)}

    def relabel(x):
        return label[find(x)]

    edges = tuple(sorted((min(relabel(u), relabel(v)),
                          max(relabel(u), relabel(v))) for u, v in edges))
    # new corner i: the first corner of copy i other than the glued one
    corners = tuple(
        relabel(i * nv0 + corners0[(1 if i != 1 else 2) - 1])
        for i in range(1, N + 1)
    )
    center = relabel(center0)
    blocks = []
    for c in range(N + 1):
        off = c * nv0
        for blk in blocks0:
            blocks.append(ViscekBlock(
                level=blk.level,
                vertices=frozenset(relabel(off + v) for v in blk.vertices),
                corners=tuple(relabel(off + v) for v in blk.corners),
                center=relabel(off + blk.center),
            ))
    nv = len(reps)
    blocks.append(ViscekBlock(level=gen, vertices=frozenset(range(nv)),
                              corners=corners, center=center))
    return nv, edges, corners, center, blocks


def viscek(N, gen):
    """Build the generation-`gen` tree and its SRW chain.

    Returns (graph, chain); the walk moves uniformly over neighbors, so the
    stationary mass of a vertex is deg/(2|E|).
    """
    if N < 2:
        raise ValidationFailed(f"branching parameter N={N} must be >= 2")
    if gen < 0:
        raise ValidationFailed(f"generation {gen} must be >= 0")
    expected = N * (N + 1) ** gen + 1
    if expected > SIZE_CAP:
        raise SizeCap(f"V_{N}({gen}) has {expected} vertices > cap {SIZE_CAP}")
    nv, edges, corners, center, blocks = _viscek_structure(N, gen)
    graph = ViscekGraph(N=N, gen=gen, num_vertices=nv, edges=edges,
                        corners=corners, center=center, blocks=tuple(blocks))
    adj = graph.adjacency()
    K = np.zeros((nv, nv))
    for u in range(nv):
        for v in adj[u]:
            K[u, v] = 1.0 / len(adj[u])
    deg = np.array([len(adj[u]) for u in range(nv)])
    pi = deg / deg.sum()
    chain = chain_from_kernel_pi(K, pi)
    return graph, chain


def _bfs_dist(adj, sources):
    dist = {}
    q = deque()
    for s in sources:
        dist[s] = 0
        q.append(s)
    while q:
        u = q.popleft()
        for v in adj[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                q.append(v)
    return dist


@dataclass(frozen=True)
class TestFunctionData:
    """A block test function with its Rayleigh data.

    The function is 1 at the block center, 0 at the tips, linear along the
    tip paths, and constant on branches hanging off them (each branch takes
    the value of its attachment point).  ``profile_point`` is the implied
    (mass, energy/variance) upper-envelope point for the spectral profile.
    """

    f: np.ndarray
    energy: float
    norm2: float
    variance: float
    mass: float

    @property
    def profile_point(self):
        return self.mass, self.energy / self.variance


def viscek_test_function(graph, chain, block):
    """The linear bump supported on a block, with its Rayleigh data."""
    if block not in graph.blocks:
        raise InvalidBlock("block does not belong to this graph")
    adj = graph.adjacency()
    scale = 3 ** block.level
    # diagonals: tip-to-tip shortest paths = union of center->corner paths
    dist_center = _bfs_dist(adj, [block.center])
    diagonal = set()
    for c in block.corners:
        # walk back from the corner toward the center
        cur = c
        diagonal.add(cur)
        while cur != block.center:
            for u in adj[cur]:
                if u in block.vertices and dist_center[u] == dist_center[cur] - 1:
                    cur = u
                    break
            diagonal.add(cur)
    # nearest-diagonal projection within the block (unique in a tree)
    proj_dist = {}
    proj_val = {}
    q = deque()
    for v in diagonal:
        proj_dist[v] = 0
        proj_val[v] = 1.0 - dist_center[v] / scale
        q.append(v)
    while q:
        u = q.popleft()
        for v in adj[u]:
            if v in block.vertices and v not in proj_dist:
                proj_dist[v] = proj_dist[u] + 1
                proj_val[v] = proj_val[u]
                q.append(v)
    f = np.zeros(graph.num_vertices)
    for v, val in proj_val.items():
        f[v] = val
    energy = float(
        sum((f[u] - f[v]) ** 2 for u, v in graph.edges) / (2 * graph.num_edges)
    )
    pi = chain.pi
    norm2 = float(np.dot(pi, f * f))
    mean = float(np.dot(pi, f))
    var = norm2 - mean ** 2
    mass = float(pi[list(block.vertices)].sum())
    return TestFunctionData(f=f, energy=energy, norm2=norm2, variance=var,
                            mass=mass)


# -- seeded random chains (verification plumbing) ----------------------------------

def random_reversible(n, rng, min_entry=0.1):
    """Random reversible chain from symmetric positive weights."""
    rng = np.random.default_rng(rng)
    W = rng.uniform(min_entry, 1.0, size=(n, n))
    W = (W + W.T) / 2.0
    K = W / W.sum(axis=1, keepdims=True)
    return build_chain(K)


def random_chain(n, rng, min_entry=0.05):
    """Random (generally non-reversible) chain with full support."""
    rng = np.random.default_rng(rng)
    K = rng.uniform(min_entry, 1.0, size=(n, n))
    K /= K.sum(axis=1, keepdims=True)
    return build_chain(K)


def random_doubly_stochastic(n, rng, iters=200):
    """Sinkhorn-scaled random kernel; stationary distribution is uniform."""
    rng = np.random.default_rng(rng)
    K = rng.uniform(0.1, 1.0, size=(n, n))
    for _ in range(iters):
        K /= K.sum(axis=1, keepdims=True)
        K /= K.sum(axis=0, keepdims=True)
    K /= K.sum(axis=1, keepdims=True)
    return build_chain(K)


def random_function(n, rng, nonnegative=False):
    rng = np.random.default_rng(rng)
    f = rng.normal(size=n)
    return np.abs(f) if nonnegative else f
