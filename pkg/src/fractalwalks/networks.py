"""Deterministic construction of Sierpinski gasket/carpet networks and their duals.

Conventions
-----------
* Generation ``g`` counts iterations the way the node-count formulas do:
  ``SG(1)`` is a single triangle (3 nodes), ``SC(1)`` a single square
  (4 nodes).  A gasket of generation ``g`` is made of ``3**(g-1)`` unit
  triangles on a side-``2**(g-1)`` lattice; a carpet of generation ``g`` of
  ``8**(g-1)`` unit squares on a side-``3**(g-1)`` lattice.
* Gasket coordinates are skewed lattice coordinates ``(x, y)`` (Euclidean
  position would be ``x*(1,0) + y*(1/2, sqrt(3)/2)``).  All coordinates are
  exact integers, so merging shared corners is dictionary equality, never a
  float comparison.
* Dual networks replace every smallest building block by a node, indexed by
  the block's lower-left corner.  Dual triangles are adjacent when they share
  a lattice vertex; dual squares only when they share a lattice edge
  (horizontal/vertical neighbours, never diagonal).  The dual of a
  generation-``g`` structure has ``3**(g-1)`` resp. ``8**(g-1)`` nodes and is
  therefore labelled generation ``g-1``:  ``dualize(generate(SG, g))``
  equals ``generate(DSG, g-1)``.
* Node indices are assigned lexicographically by ``(y, x)``, which makes
  matrices, serialized files and trap placements reproducible across runs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import log
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import (
    BadGraphFile,
    GenerationTooLarge,
    InvalidGeneration,
    NoInnerHole,
    NotDualizable,
    ValidationError,
)

SG = "SG"
DSG = "DSG"
SC = "SC"
DSC = "DSC"
KINDS = (SG, DSG, SC, DSC)

DEFAULT_NODE_CAP = 500_000

# (fractal dimension, spectral dimension) per family; duals share the values
# of their primal structure.
_DIMENSIONS = {
    SG: (log(3) / log(2), 2 * log(3) / log(5)),
    DSG: (log(3) / log(2), 2 * log(3) / log(5)),
    SC: (log(8) / log(3), 1.805),
    DSC: (log(8) / log(3), 1.805),
}

DUAL_KIND = {SG: DSG, SC: DSC}


def node_count(kind: str, g: int) -> int:
    """Closed-form number of nodes of ``kind`` at generation ``g``."""
    if kind == SG:
        return (3**g + 3) // 2
    if kind == DSG:
        return 3**g
    if kind == SC:
        n = Fraction(11, 70) * 8**g + Fraction(8, 15) * 3**g + Fraction(8, 7)
        assert n.denominator == 1
        return int(n)
    if kind == DSC:
        return 8**g
    raise ValidationError(f"unknown kind {kind!r}")


@dataclass(frozen=True)
class NodeRoles:
    """Distinguished node sets: outer corners and inner-hole corners."""

    outer: tuple[int, ...]
    inner: tuple[int, ...]


@dataclass(frozen=True)
class Network:
    """Immutable graph with integer node coordinates.

    ``coords`` is an ``(N, 2)`` int array ordered by ``(y, x)``; ``edges`` an
    ``(E, 2)`` int array with ``i < j`` rows, lexicographically sorted.  The
    arrays are never mutated after construction.
    """

    kind: str
    generation: int
    coords: np.ndarray
    edges: np.ndarray
    d_f: float | None = None
    d_s: float | None = None
    roles: NodeRoles | None = field(default=None, compare=False)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n)

    def coordinate_index(self) -> dict[tuple[int, int], int]:
        return {(int(x), int(y)): i for i, (x, y) in enumerate(self.coords)}


# ---------------------------------------------------------------------------
# cell sets

def _gasket_cells(g: int) -> set[tuple[int, int]]:
    """Lower-left corners of the unit up-triangles of SG(g)."""
    cells = {(0, 0)}
    for i in range(1, g):
        s = 2 ** (i - 1)
        cells = cells | {(x + s, y) for x, y in cells} | {(x, y + s) for x, y in cells}
    return cells


def _carpet_cells(g: int) -> set[tuple[int, int]]:
    """Retained unit squares of SC(g): no base-3 digit position has both
    coordinates equal to 1."""
    side = 3 ** (g - 1)

    def keep(x: int, y: int) -> bool:
        while x or y:
            if x % 3 == 1 and y % 3 == 1:
                return False
            x //= 3
            y //= 3
        return True

    return {(x, y) for x in range(side) for y in range(side) if keep(x, y)}


# ---------------------------------------------------------------------------
# graph assembly

def _finish(kind, generation, nodes, edge_pairs, roles_coords=None):
    order = sorted(nodes, key=lambda p: (p[1], p[0]))
    index = {p: i for i, p in enumerate(order)}
    edges = sorted({tuple(sorted((index[u], index[v]))) for u, v in edge_pairs})
    coords = np.array(order, dtype=np.int64).reshape(len(order), 2)
    edges = np.array(edges, dtype=np.int64).reshape(len(edges), 2)
    d_f, d_s = _DIMENSIONS[kind]
    roles = None
    if roles_coords is not None:
        outer, inner = roles_coords
        roles = NodeRoles(
            outer=tuple(index[p] for p in outer),
            inner=tuple(index[p] for p in inner),
        )
    return Network(kind=kind, generation=generation, coords=coords, edges=edges,
                   d_f=d_f, d_s=d_s, roles=roles)


def _gasket_network(g: int) -> Network:
    nodes = set()
    pairs = []
    for x, y in _gasket_cells(g):
        a, b, c = (x, y), (x + 1, y), (x, y + 1)
        nodes.update((a, b, c))
        pairs += [(a, b), (a, c), (b, c)]
    return _finish(SG, g, nodes, pairs, _gasket_roles(g))


def _carpet_network(g: int) -> Network:
    nodes = set()
    pairs = []
    for x, y in _carpet_cells(g):
        a, b, c, d = (x, y), (x + 1, y), (x, y + 1), (x + 1, y + 1)
        nodes.update((a, b, c, d))
        pairs += [(a, b), (a, c), (b, d), (c, d)]
    return _finish(SC, g, nodes, pairs, _carpet_roles(g))


def _dual_network(kind: str, cells: set[tuple[int, int]], generation: int) -> Network:
    if kind == DSG:
        by_corner: dict[tuple[int, int], list] = {}
        for x, y in cells:
            for p in ((x, y), (x + 1, y), (x, y + 1)):
                by_corner.setdefault(p, []).append((x, y))
        pairs = []
        for incident in by_corner.values():
            for i in range(len(incident)):
                for j in range(i + 1, len(incident)):
                    pairs.append((incident[i], incident[j]))
    else:
        pairs = []
        for x, y in cells:
            for nb in ((x + 1, y), (x, y + 1)):
                if nb in cells:
                    pairs.append(((x, y), nb))
    if generation == 0:
        roles = (tuple(cells), ())
    else:
        roles = _dual_roles(kind, generation)
    return _finish(kind, generation, cells, pairs, roles)


# ---------------------------------------------------------------------------
# distinguished coordinates

def _gasket_roles(g: int):
    s = 2 ** (g - 1)
    outer = ((0, 0), (s, 0), (0, s))
    if g == 1:
        return outer, ()
    h = s // 2
    return outer, ((h, 0), (0, h), (h, h))


def _carpet_roles(g: int):
    side = 3 ** (g - 1)
    outer = ((0, 0), (side, 0), (0, side), (side, side))
    if g == 1:
        return outer, ()
    c = side // 3
    return outer, ((c, c), (2 * c, c), (c, 2 * c), (2 * c, 2 * c))


def _dual_roles(kind: str, g: int):
    if kind == DSG:
        s = 2**g
        outer = ((0, 0), (s - 1, 0), (0, s - 1))
        if g == 1:
            return outer, ()
        h = s // 2
        # one cell per corner of the central hole, picked consistently
        inner = ((h - 1, 0), (h, h - 1), (0, h))
        return outer, inner
    side = 3**g
    outer = ((0, 0), (side - 1, 0), (0, side - 1), (side - 1, side - 1))
    if g == 1:
        return outer, ()
    c = side // 3
    # cells diagonally outward of the four corners of the central hole
    inner = ((c - 1, c - 1), (2 * c, c - 1), (c - 1, 2 * c), (2 * c, 2 * c))
    return outer, inner


# ---------------------------------------------------------------------------
# public operations

def generate(kind: str, g: int, node_cap: int = DEFAULT_NODE_CAP) -> Network:
    """Construct the generation-``g`` network of the given kind.

    Deterministic: identical ``(kind, g)`` yields identical node ordering and
    edge set on every run and platform.
    """
    if kind not in KINDS:
        raise ValidationError(f"unknown kind {kind!r}; expected one of {KINDS}")
    if g < 1:
        raise InvalidGeneration(f"generation must be >= 1, got {g}")
    n = node_count(kind, g)
    if n > node_cap:
        raise GenerationTooLarge(
            f"{kind} g={g} has {n} nodes, above the cap of {node_cap}"
        )
    if kind == SG:
        return _gasket_network(g)
    if kind == SC:
        return _carpet_network(g)
    if kind == DSG:
        return _dual_network(DSG, _gasket_cells(g + 1), g)
    return _dual_network(DSC, _carpet_cells(g + 1), g)


def laplacian(network: Network) -> sp.csr_array:
    """Connectivity matrix: node degrees on the diagonal, -1 per edge."""
    n = network.n
    i, j = network.edges[:, 0], network.edges[:, 1]
    deg = network.degrees().astype(np.float64)
    rows = np.concatenate([i, j, np.arange(n)])
    cols = np.concatenate([j, i, np.arange(n)])
    vals = np.concatenate([-np.ones(2 * len(i)), deg])
    return sp.csr_array((vals, (rows, cols)), shape=(n, n))


def node_roles(network: Network) -> NodeRoles:
    """Outer-corner and inner-hole-corner node indices.

    The inner list is empty at ``g = 1`` where the central hole does not
    exist yet; asking for it explicitly raises :class:`NoInnerHole` through
    the trap-placement helpers instead.
    """
    if network.roles is not None:
        return network.roles
    if network.kind not in KINDS:
        raise ValidationError(
            f"roles are only defined for {KINDS}, not {network.kind!r}"
        )
    index = network.coordinate_index()
    g = network.generation
    if network.kind == SG:
        outer, inner = _gasket_roles(g)
    elif network.kind == SC:
        outer, inner = _carpet_roles(g)
    else:
        outer, inner = _dual_roles(network.kind, g)
        if g < 2:
            inner = ()
    return NodeRoles(
        outer=tuple(index[p] for p in outer),
        inner=tuple(index[p] for p in inner),
    )


def dualize(network: Network) -> Network:
    """Replace every smallest building block by a node.

    Only defined for the primal kinds; the result carries generation
    ``g - 1`` (it has ``3**(g-1)`` resp. ``8**(g-1)`` nodes).  Dualizing a
    generation-1 structure leaves a single isolated node, labelled
    generation 0.
    """
    if network.kind not in DUAL_KIND:
        raise NotDualizable(f"{network.kind} has no dual here (already a dual?)")
    g = network.generation
    canonical = generate(network.kind, g)
    if not (
        np.array_equal(canonical.coords, network.coords)
        and np.array_equal(canonical.edges, network.edges)
    ):
        raise NotDualizable(
            f"network does not match the canonical {network.kind} g={g} construction"
        )
    cells = _gasket_cells(g) if network.kind == SG else _carpet_cells(g)
    return _dual_network(DUAL_KIND[network.kind], cells, g - 1)


def inner_hole_nodes(network: Network) -> tuple[int, ...]:
    """Inner-hole corner nodes; raises :class:`NoInnerHole` at g = 1."""
    roles = node_roles(network)
    if not roles.inner:
        raise NoInnerHole(
            f"{network.kind} g={network.generation} has no central hole"
        )
    return roles.inner


def is_connected(network: Network) -> bool:
    """True when every node is reachable from node 0."""
    n = network.n
    if n == 1:
        return True
    neighbours: list[list[int]] = [[] for _ in range(n)]
    for i, j in network.edges:
        neighbours[i].append(j)
        neighbours[j].append(i)
    seen = np.zeros(n, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        u = stack.pop()
        for v in neighbours[u]:
            if not seen[v]:
                seen[v] = True
                stack.append(v)
    return bool(seen.all())


# ---------------------------------------------------------------------------
# JSON interchange

def to_json_dict(network: Network) -> dict:
    roles = network.roles
    if roles is None and network.kind in KINDS and network.generation >= 1:
        roles = node_roles(network)
    return {
        "kind": network.kind,
        "generation": network.generation,
        "n": network.n,
        "edges": network.edges.tolist(),
        "coords": network.coords.tolist(),
        "roles": {
            "outer": list(roles.outer) if roles else [],
            "inner": list(roles.inner) if roles else [],
        },
    }


def save(network: Network, path: str | Path) -> None:
    Path(path).write_text(json.dumps(to_json_dict(network)) + "\n")


def load(path: str | Path) -> Network:
    """Load a network from the JSON interchange format.

    Files produced by :func:`save` round-trip exactly.  Arbitrary graphs are
    accepted as long as they satisfy the structural invariants (connected,
    no self-loops or duplicate edges, unique integer coordinates); their
    ``kind`` may be any label, in which case no fractal metadata is attached.
    """
    try:
        raw = json.loads(Path(path).read_text())
        kind = str(raw["kind"])
        generation = int(raw["generation"])
        n = int(raw["n"])
        coords = np.array(raw["coords"], dtype=np.int64).reshape(n, 2)
        edges = np.array(raw["edges"], dtype=np.int64).reshape(-1, 2)
        roles_raw = raw.get("roles") or {}
    except (KeyError, ValueError, TypeError, json.JSONDecodeError) as exc:
        raise BadGraphFile(f"cannot parse graph file {path}: {exc}") from exc

    if len(np.unique(coords, axis=0)) != n:
        raise BadGraphFile("coordinates are not unique per node")
    if edges.size:
        if edges.min() < 0 or edges.max() >= n:
            raise BadGraphFile("edge endpoint out of range")
        if (edges[:, 0] >= edges[:, 1]).any():
            raise BadGraphFile("edges must satisfy i < j")
        if len(np.unique(edges, axis=0)) != len(edges):
            raise BadGraphFile("duplicate edges")
    roles = None
    if roles_raw.get("outer") or roles_raw.get("inner"):
        roles = NodeRoles(
            outer=tuple(int(i) for i in roles_raw.get("outer", [])),
            inner=tuple(int(i) for i in roles_raw.get("inner", [])),
        )
    d_f, d_s = _DIMENSIONS.get(kind, (None, None))
    network = Network(kind=kind, generation=generation, coords=coords,
                      edges=edges, d_f=d_f, d_s=d_s, roles=roles)
    if kind in KINDS:
        expected = node_count(kind, generation)
        if n != expected:
            raise BadGraphFile(
                f"{kind} g={generation} must have {expected} nodes, file has {n}"
            )
    if not is_connected(network):
        raise BadGraphFile("graph is not connected")
    return network
