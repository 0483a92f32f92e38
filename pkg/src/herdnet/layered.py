"""Signed layered graph construction and dilation analysis.

The layered graph unrolls a signed digraph by walk length from the input:
layer k holds every node reachable in k-1 steps, with sign-annotated edges
from the previous layer.  A virtual root at layer 0 carries the input
attachments, so their signs take part in the analysis.  The unrolling is
truncated at n layers, matching the number of useful controllability
columns.
"""
from __future__ import annotations

from dataclasses import dataclass

from .system import InputMode, Sign, StructuredSystem

ROOT = 0  # source index used for layer-1 in-edges from the virtual input root


@dataclass(frozen=True)
class LayerOccurrence:
    node: int
    layer: int
    in_edges: tuple[tuple[int, Sign], ...]  # (source node at layer-1, sign), sorted

    @property
    def multiplicity(self) -> int:
        return len(self.in_edges)


@dataclass(frozen=True)
class DriverLayers:
    """Layer structure for one input signal (all leaders share one)."""
    driver: int  # 1-based driver index; always 1 in single-input mode
    depth: int
    layers: tuple[tuple[LayerOccurrence, ...], ...]  # index 0 <-> layer 1

    def occurrence(self, node: int, layer: int) -> LayerOccurrence | None:
        if not (1 <= layer <= self.depth):
            return None
        for occ in self.layers[layer - 1]:
            if occ.node == node:
                return occ
        return None

    def occurs(self, node: int, layer: int) -> bool:
        return self.occurrence(node, layer) is not None

    def layer_nodes(self, layer: int) -> tuple[int, ...]:
        return tuple(occ.node for occ in self.layers[layer - 1])

    def layer_multiset(self, layer: int) -> tuple[int, ...]:
        """Nodes of a layer repeated once per incoming edge."""
        out: list[int] = []
        for occ in self.layers[layer - 1]:
            out.extend([occ.node] * occ.multiplicity)
        return tuple(sorted(out))

    def occurrence_layers(self, node: int) -> tuple[int, ...]:
        return tuple(k for k in range(1, self.depth + 1) if self.occurs(node, k))


@dataclass(frozen=True)
class SignedLayeredGraph:
    depth: int
    mode: InputMode
    per_driver: tuple[DriverLayers, ...]

    @property
    def single(self) -> DriverLayers:
        if len(self.per_driver) != 1:
            raise ValueError("graph has one layer structure per driver; pick one")
        return self.per_driver[0]


class WalkSignSummary:
    """Sets of achievable walk-product signs, by node, length and driver.

    The input-attachment sign is the first factor of every product, so the
    length-0 entry of an input node is its attachment sign.
    """

    def __init__(self, sets: dict[tuple[int, int, int], frozenset[Sign]], depth: int,
                 drivers: int):
        self._sets = sets
        self.depth = depth
        self.drivers = drivers

    def get(self, node: int, length: int, driver: int = 1) -> frozenset[Sign]:
        return self._sets.get((node, length, driver), frozenset())

    def items(self):
        return self._sets.items()


@dataclass(frozen=True)
class DilationReport:
    classic_dilations: tuple[frozenset[int], ...]
    signed_dilation_nodes: frozenset[int]
    delta_sets: dict[int, tuple[frozenset[int], frozenset[int], frozenset[int]]]
    layer_dilations: frozenset[int]


def _seed_groups(system: StructuredSystem) -> list[list]:
    if system.mode is InputMode.MULTI_DRIVER:
        return [[a] for a in system.inputs]
    return [list(system.inputs)]


def build_layered(system: StructuredSystem) -> SignedLayeredGraph:
    """Unroll the digraph into per-driver layer structures of depth n."""
    depth = system.n
    out_adj: dict[int, list] = {}
    for e in system.edges:
        out_adj.setdefault(e.src, []).append(e)

    structures = []
    for idx, seeds in enumerate(_seed_groups(system), start=1):
        layers: list[tuple[LayerOccurrence, ...]] = []
        first = tuple(
            LayerOccurrence(a.node, 1, ((ROOT, a.sign),))
            for a in sorted(seeds, key=lambda a: a.node))
        layers.append(first)
        for k in range(2, depth + 1):
            incoming: dict[int, set[tuple[int, Sign]]] = {}
            for occ in layers[-1]:
                for e in out_adj.get(occ.node, ()):
                    incoming.setdefault(e.dst, set()).add((e.src, e.sign))
            layer = tuple(
                LayerOccurrence(node, k, tuple(sorted(srcs, key=lambda t: (t[0], t[1].value))))
                for node, srcs in sorted(incoming.items()))
            layers.append(layer)
        structures.append(DriverLayers(idx, depth, tuple(layers)))
    return SignedLayeredGraph(depth, system.mode, tuple(structures))


def walk_sign_sets(system: StructuredSystem) -> WalkSignSummary:
    """Sign-set propagation: set(j, k) = union over edges (i, j) of
    sign(i, j) * set(i, k-1), seeded by the input-attachment signs."""
    drivers = _seed_groups(system)
    sets: dict[tuple[int, int, int], frozenset[Sign]] = {}
    for idx, seeds in enumerate(drivers, start=1):
        current: dict[int, set[Sign]] = {}
        for a in seeds:
            current.setdefault(a.node, set()).add(a.sign)
        for node, signs in current.items():
            sets[(node, 0, idx)] = frozenset(signs)
        for k in range(1, system.n):
            nxt: dict[int, set[Sign]] = {}
            for e in system.edges:
                if e.src in current:
                    nxt.setdefault(e.dst, set()).update(e.sign * s for s in current[e.src])
            for node, signs in nxt.items():
                sets[(node, k, idx)] = frozenset(signs)
            current = nxt
            if not current:
                break
    return WalkSignSummary(sets, system.n, len(drivers))


def detect_layer_dilations(gs: SignedLayeredGraph, system: StructuredSystem) -> frozenset[int]:
    """Layers whose outgoing edge signs are mixed.

    Layer 0 is the virtual input root; in single-input mode mixed attachment
    signs across leaders are reported as a layer-0 dilation.
    """
    out_signs: dict[int, set[Sign]] = {}
    for e in system.edges:
        out_signs.setdefault(e.src, set()).add(e.sign)
    found: set[int] = set()
    for dl in gs.per_driver:
        root_signs = {occ.in_edges[0][1] for occ in dl.layers[0]}
        if len(root_signs) > 1:
            found.add(0)
        for k in range(1, dl.depth):  # edges out of layer depth would leave the unrolling
            signs: set[Sign] = set()
            for occ in dl.layers[k - 1]:
                signs.update(out_signs.get(occ.node, ()))
            if len(signs) > 1:
                found.add(k)
    return frozenset(found)


def _classic_dilation_witness(system: StructuredSystem) -> tuple[frozenset[int], ...]:
    """Lin form-II scan: a follower set S with fewer edge origins than members.

    Detected through bipartite matching (followers against their in-neighbor
    origins); a Hall violator is returned as the witness set.
    """
    followers = [v for v in range(1, system.n + 1) if v not in system.input_nodes]
    origins: dict[int, list[int]] = {v: [] for v in followers}
    for e in system.edges:
        if e.dst in origins:
            origins[e.dst].append(e.src)
    match_of_origin: dict[int, int] = {}

    def try_assign(v: int, seen: set[int]) -> bool:
        for origin in origins[v]:
            if origin in seen:
                continue
            seen.add(origin)
            if origin not in match_of_origin or try_assign(match_of_origin[origin], seen):
                match_of_origin[origin] = v
                return True
        return False

    unmatched = [v for v in followers if not try_assign(v, set())]
    if not unmatched:
        return ()
    # Alternating reachability from an unmatched follower yields a violator.
    v0 = unmatched[0]
    violator = {v0}
    frontier_origins: set[int] = set()
    changed = True
    while changed:
        changed = False
        for v in list(violator):
            for origin in origins[v]:
                if origin not in frontier_origins:
                    frontier_origins.add(origin)
                    changed = True
                    w = match_of_origin.get(origin)
                    if w is not None and w not in violator:
                        violator.add(w)
    return (frozenset(violator),)


def signed_dilation_sets(system: StructuredSystem,
                         gs: SignedLayeredGraph | None = None) -> DilationReport:
    """Out-neighbor sets and their sign partition for every node."""
    if gs is None:
        gs = build_layered(system)
    delta_sets: dict[int, tuple[frozenset[int], frozenset[int], frozenset[int]]] = {}
    dilation_nodes: set[int] = set()
    for i in range(1, system.n + 1):
        pos = frozenset(e.dst for e in system.edges if e.src == i and e.sign is Sign.PLUS)
        neg = frozenset(e.dst for e in system.edges if e.src == i and e.sign is Sign.MINUS)
        delta_sets[i] = (pos | neg, pos, neg)
        if pos and neg:
            dilation_nodes.add(i)
    return DilationReport(
        classic_dilations=_classic_dilation_witness(system),
        signed_dilation_nodes=frozenset(dilation_nodes),
        delta_sets=delta_sets,
        layer_dilations=detect_layer_dilations(gs, system),
    )


def exclusive_delta_rows(system: StructuredSystem, i: int, layers: tuple[int, int],
                         gs: SignedLayeredGraph | None = None,
                         driver: int = 1) -> tuple[int, ...]:
    """Members of a dilation set reached solely through node i at both layers.

    ``layers`` are occurrence layers of node i itself; its out-neighbors then
    occur one layer deeper.  A neighbor qualifies only if every in-edge of its
    occurrence at both deeper layers comes from node i.
    """
    if gs is None:
        gs = build_layered(system)
    dl = gs.per_driver[driver - 1]
    delta = sorted(e.dst for e in system.edges if e.src == i)
    rows = []
    for c in delta:
        ok = True
        for layer in layers:
            occ = dl.occurrence(c, layer + 1)
            if occ is None or any(src != i for src, _ in occ.in_edges):
                ok = False
                break
        if ok:
            rows.append(c)
    return tuple(rows)


def export_dot(gs: SignedLayeredGraph, driver: int = 1) -> str:
    """Deterministic DOT rendering: one cluster per layer, v<node>@L<layer>."""
    dl = gs.per_driver[driver - 1]
    lines = ["digraph gs {", "  rankdir=TB;"]
    lines.append("  subgraph cluster_L0 {")
    lines.append('    label="L0";')
    lines.append('    "u" [shape=box];')
    lines.append("  }")
    for k in range(1, dl.depth + 1):
        lines.append(f"  subgraph cluster_L{k} {{")
        lines.append(f'    label="L{k}";')
        for occ in sorted(dl.layers[k - 1], key=lambda o: o.node):
            lines.append(f'    "v{occ.node}@L{k}";')
        lines.append("  }")
    for k in range(1, dl.depth + 1):
        for occ in sorted(dl.layers[k - 1], key=lambda o: o.node):
            for src, sign in occ.in_edges:
                src_name = '"u"' if src == ROOT else f'"v{src}@L{k - 1}"'
                lines.append(f'  {src_name} -> "v{occ.node}@L{k}" [label="{sign.glyph}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
