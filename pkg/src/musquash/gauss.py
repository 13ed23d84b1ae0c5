"""Gauss words of intersection tables and planar realizability.

Traversing the closed polygon and recording each crossing as it is met
yields a cyclic double-occurrence word: every crossing symbol (an unordered
pair of edge labels) appears exactly twice.  This module derives that word
from a table, computes interlacement and the classical evenness condition,
and decides whether an abstract double-occurrence word is the crossing code
of some closed curve in the plane.

Realizability is decided by a gadget reduction to graph planarity: the
4-regular curve graph has each crossing replaced by a wheel whose rim pins
the cyclic order of the four incident arc-ends to a transversal order (up to
reflection), so the gadget graph is planar iff a genus-0 transversal
embedding exists.  An independent brute-force oracle enumerates the two
transversal rotations per crossing and traces faces; the two deciders are
held to agree on large word corpora by the test suite.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

import networkx as nx

from .tables import IntersectionTable, rotate, validate

Crossing = tuple[int, int]

# Arc-end slots at a crossing, in the transversal cyclic order used
# throughout: first-visit-in, second-visit-in, first-visit-out,
# second-visit-out.
IN1, IN2, OUT1, OUT2 = 0, 1, 2, 3


class WordError(ValueError):
    """Input is not a double-occurrence word (or violates word invariants)."""


@dataclass(frozen=True)
class GaussWord:
    """Double-occurrence word of crossing pairs, with edge-run boundaries.

    ``symbols[boundaries[i-1] : boundaries[i]]`` is the run of edge ``e_i``
    (the crossings met along it, in order); ``boundaries`` has one entry per
    edge and starts at 0.
    """

    n: int
    symbols: tuple[Crossing, ...]
    boundaries: tuple[int, ...]

    def runs(self) -> list[tuple[Crossing, ...]]:
        ends = list(self.boundaries[1:]) + [len(self.symbols)]
        return [self.symbols[b:e] for b, e in zip(self.boundaries, ends)]


def _symbols(word: GaussWord | Sequence[Hashable]) -> tuple[Hashable, ...]:
    if isinstance(word, GaussWord):
        return word.symbols
    return tuple(word)


def check_double_occurrence(word: GaussWord | Sequence[Hashable]) -> tuple[Hashable, ...]:
    syms = _symbols(word)
    counts: dict[Hashable, int] = {}
    for s in syms:
        counts[s] = counts.get(s, 0) + 1
    bad = {s: c for s, c in counts.items() if c != 2}
    if bad:
        raise WordError(f"not a double-occurrence word: {bad}")
    return syms


def gauss_word(table: IntersectionTable) -> GaussWord:
    """Traverse edges ``1..n``; within edge ``i`` emit ``{i, row_i[t]}`` in row order."""
    validate(table)
    n = table.n
    symbols: list[Crossing] = []
    for i in range(1, n + 1):
        for j in table.rows[i - 1]:
            symbols.append((i, j) if i < j else (j, i))
    word = GaussWord(
        n=n,
        symbols=tuple(symbols),
        boundaries=tuple((i - 1) * (n - 3) for i in range(1, n + 1)),
    )
    check_double_occurrence(word)
    return word


def _occurrences(syms: Sequence[Hashable]) -> dict[Hashable, tuple[int, int]]:
    occ: dict[Hashable, list[int]] = {}
    for t, s in enumerate(syms):
        occ.setdefault(s, []).append(t)
    out = {}
    for s, positions in occ.items():
        if len(positions) != 2:
            raise WordError(f"symbol {s!r} occurs {len(positions)} times")
        out[s] = (positions[0], positions[1])
    return out


@dataclass(frozen=True)
class InterlacementGraph:
    """Symbols as vertices; two crossings adjacent iff their occurrences alternate."""

    vertices: tuple[Hashable, ...]
    adjacency: dict[Hashable, frozenset]

    def degree(self, v: Hashable) -> int:
        return len(self.adjacency[v])

    def edges(self) -> set[frozenset]:
        return {frozenset((u, v)) for u in self.vertices for v in self.adjacency[u]}


def interlacement(word: GaussWord | Sequence[Hashable]) -> InterlacementGraph:
    syms = check_double_occurrence(word)
    occ = _occurrences(syms)
    vertices = sorted(occ)
    adj: dict[Hashable, set] = {v: set() for v in vertices}
    for x, y in itertools.combinations(vertices, 2):
        ax, bx = occ[x]
        inside = sum(1 for t in occ[y] if ax < t < bx)
        if inside == 1:
            adj[x].add(y)
            adj[y].add(x)
    return InterlacementGraph(
        vertices=tuple(vertices),
        adjacency={v: frozenset(adj[v]) for v in vertices},
    )


def parity_check(word: GaussWord | Sequence[Hashable]) -> bool:
    """Classical evenness condition: every interlacement degree is even.

    Necessary (not sufficient) for a word to be the crossing code of a
    closed planar curve.
    """
    graph = interlacement(word)
    return all(graph.degree(v) % 2 == 0 for v in graph.vertices)


def rotational_symmetry(table: IntersectionTable) -> int:
    """Largest divisor ``s`` of ``n`` with ``rotate(table, n/s) == table``."""
    n = table.n
    for d in range(1, n + 1):
        if n % d == 0 and rotate(table, d) == table:
            return n // d
    return 1


def word_rotate(word: GaussWord, k: int) -> GaussWord:
    """Image of the Gauss word under the table rotation ``e_i -> e_{i+k}``.

    Relabels every pair and cyclically shifts the symbol sequence by ``k``
    edge-runs, so ``word_rotate(gauss_word(T), k) == gauss_word(rotate(T, k))``.
    """
    n, run = word.n, len(word.symbols) // word.n
    relabeled = [
        tuple(sorted(((v - 1 + k) % n + 1 for v in sym)))
        for sym in word.symbols
    ]
    shift = (k % n) * run
    shifted = relabeled[-shift:] + relabeled[:-shift] if shift else relabeled
    return GaussWord(n=n, symbols=tuple(shifted), boundaries=word.boundaries)


# ---------------------------------------------------------------------------
# The 4-regular curve graph and its face-traced embeddings.

def _arc_ends(syms: Sequence[Hashable]) -> tuple[list[tuple[Hashable, int]], list[tuple[Hashable, int]]]:
    """Per arc ``t`` (position ``t`` to ``t+1``, cyclically): tail and head ends.

    An end is ``(symbol, slot)``; the tail leaves through OUT1/OUT2 of the
    visit at ``t``, the head arrives through IN1/IN2 of the visit at ``t+1``.
    """
    occ = _occurrences(syms)
    first = {s: a for s, (a, b) in occ.items()}
    ln = len(syms)
    tails, heads = [], []
    for t in range(ln):
        s_out, s_in = syms[t], syms[(t + 1) % ln]
        tails.append((s_out, OUT1 if t == first[s_out] else OUT2))
        heads.append((s_in, IN1 if (t + 1) % ln == first[s_in] else IN2))
    return tails, heads


def quad_gadget_graph(word: GaussWord | Sequence[Hashable]) -> nx.Graph:
    """Planarity gadget: a wheel per crossing, a subdivided edge per arc.

    The wheel (hub plus 4-cycle rim) is 3-connected, so any planar embedding
    fixes the rim's cyclic order up to reflection; attaching the four arc
    ends to the rim in slot order therefore forces a transversal crossing.
    Arc midpoints keep the graph simple.  ``7C`` vertices for ``C`` crossings.
    """
    syms = check_double_occurrence(word)
    g = nx.Graph()
    if not syms:
        # Crossing-free closed curve: a bare cycle.
        g.add_edges_from([(("loop", 0), ("loop", 1)), (("loop", 1), ("loop", 2)),
                          (("loop", 2), ("loop", 0))])
        return g
    for s in set(syms):
        hub = ("hub", s)
        for k in range(4):
            g.add_edge(hub, ("rim", s, k))
        for k in range(4):
            g.add_edge(("rim", s, k), ("rim", s, (k + 1) % 4))
    tails, heads = _arc_ends(syms)
    for t, (tail, head) in enumerate(zip(tails, heads)):
        mid = ("mid", t)
        g.add_edge(("rim", tail[0], tail[1]), mid)
        g.add_edge(mid, ("rim", head[0], head[1]))
    return g


# Transversal rotations at a crossing: cyclic order of the four slots.
_ROTATIONS = {
    +1: (IN1, IN2, OUT1, OUT2),
    -1: (IN1, OUT2, OUT1, IN2),
}


def _trace_faces(syms: Sequence[Hashable], orientation: dict[Hashable, int]) -> int:
    """Face count of the curve graph embedded per crossing orientations."""
    tails, heads = _arc_ends(syms)
    ln = len(syms)
    # Leaving dart for every end: out-ends traverse their arc forward,
    # in-ends traverse the arriving arc backward.
    out_dart: dict[tuple[Hashable, int], tuple[int, int]] = {}
    for t in range(ln):
        out_dart[tails[t]] = (t, +1)
        out_dart[heads[t]] = (t, -1)
    succ: dict[Hashable, dict[int, int]] = {}
    for s, orient in orientation.items():
        cyc = _ROTATIONS[orient]
        succ[s] = {cyc[i]: cyc[(i + 1) % 4] for i in range(4)}
    darts = [(t, d) for t in range(ln) for d in (+1, -1)]
    seen: set[tuple[int, int]] = set()
    faces = 0
    for start in darts:
        if start in seen:
            continue
        faces += 1
        d = start
        while d not in seen:
            seen.add(d)
            t, direction = d
            head = heads[t] if direction == +1 else tails[t]
            s, slot = head
            d = out_dart[(s, succ[s][slot])]
    return faces


def brute_force_realizable(word: GaussWord | Sequence[Hashable]) -> bool:
    """Oracle: try both transversal rotations at every crossing, trace faces.

    A word with ``C`` crossings is planar-realizable iff some assignment
    yields ``V - E + F = C - 2C + F = 2``.  Refuses ``C > 20``.
    """
    syms = check_double_occurrence(word)
    symbols = sorted(set(syms))
    c = len(symbols)
    if c > 20:
        raise WordError(f"brute-force oracle limited to 20 crossings, got {c}")
    if c == 0:
        return True
    target = c + 2
    for bits in itertools.product((+1, -1), repeat=c):
        orientation = dict(zip(symbols, bits))
        if _trace_faces(syms, orientation) == target:
            return True
    return False


@dataclass(frozen=True)
class EmbeddingWitness:
    """Certificate for a realizable word: crossing rotations plus face count."""

    face_count: int
    rotations: tuple[tuple[Hashable, int], ...]


@dataclass(frozen=True)
class RealizabilityReport:
    parity_ok: bool
    realizable: bool
    witness: EmbeddingWitness | None = None


def _hub_orientation(embedding: nx.PlanarEmbedding, s: Hashable) -> int:
    order = [node[2] for node in embedding.neighbors_cw_order(("hub", s))]
    i = order.index(IN1)
    cyc = order[i:] + order[:i]
    if cyc == [IN1, IN2, OUT1, OUT2]:
        return +1
    if cyc == [IN1, OUT2, OUT1, IN2]:
        return -1
    raise RuntimeError(f"wheel rim order broken at crossing {s!r}: {order}")


def realizable(word: GaussWord | Sequence[Hashable]) -> RealizabilityReport:
    """Decide planar realizability via the gadget graph; witness on success.

    When the gadget is planar, the embedding's rotation at each hub is read
    back as a transversal orientation of the crossing and the curve graph's
    faces are traced; the sphere condition ``V - E + F = 2`` is re-checked
    on that witness.
    """
    syms = check_double_occurrence(word)
    parity_ok = parity_check(syms)
    if not syms:
        return RealizabilityReport(parity_ok=True, realizable=True,
                                   witness=EmbeddingWitness(2, ()))
    is_planar, embedding = nx.check_planarity(quad_gadget_graph(syms))
    if not is_planar:
        return RealizabilityReport(parity_ok=parity_ok, realizable=False)
    symbols = sorted(set(syms))
    orientation = {s: _hub_orientation(embedding, s) for s in symbols}
    faces = _trace_faces(syms, orientation)
    if len(symbols) - 2 * len(symbols) + faces != 2:
        raise RuntimeError(
            "planar gadget produced a non-spherical curve embedding: "
            f"C={len(symbols)}, F={faces}"
        )
    witness = EmbeddingWitness(
        face_count=faces,
        rotations=tuple((s, orientation[s]) for s in symbols),
    )
    return RealizabilityReport(parity_ok=parity_ok, realizable=True, witness=witness)


# ---------------------------------------------------------------------------
# Chordal representation: word symbols around a circle, a chord per crossing.

@dataclass(frozen=True)
class ChordDiagram:
    point_count: int
    chords: tuple[tuple[int, int], ...]
    labels: tuple[str, ...]
    boundaries: tuple[int, ...]
    n: int


def chord_diagram(word: GaussWord | Sequence[Hashable]) -> ChordDiagram:
    """Positions in word order on a circle; one chord joins each symbol's occurrences."""
    syms = check_double_occurrence(word)
    occ = _occurrences(syms)
    chords = tuple(occ[s] for s in sorted(occ))
    labels = tuple(
        "-".join(str(v) for v in s) if isinstance(s, tuple) else str(s)
        for s in sorted(occ)
    )
    if isinstance(word, GaussWord):
        n, boundaries = word.n, word.boundaries
    else:
        n, boundaries = 1, (0,)
    return ChordDiagram(
        point_count=len(syms),
        chords=chords,
        labels=labels,
        boundaries=boundaries,
        n=n,
    )


def chords_cross(a: tuple[int, int], b: tuple[int, int]) -> bool:
    (a1, a2), (b1, b2) = sorted(a), sorted(b)
    return a1 < b1 < a2 < b2 or b1 < a1 < b2 < a2


# ---------------------------------------------------------------------------
# Word text format: "i-j" tokens, edge runs separated by "|".

def serialize_word(word: GaussWord) -> str:
    parts = []
    for run in word.runs():
        parts.append(" ".join("-".join(str(v) for v in sym) for sym in run))
    return " | ".join(parts) + "\n"


def parse_word(text: str) -> GaussWord:
    runs = [chunk.split() for chunk in text.strip().split("|")]
    symbols: list[Crossing] = []
    boundaries = []
    for run in runs:
        boundaries.append(len(symbols))
        for token in run:
            try:
                i, j = (int(part) for part in token.split("-"))
            except ValueError:
                raise WordError(f"malformed symbol token {token!r}") from None
            symbols.append((i, j) if i < j else (j, i))
    word = GaussWord(n=len(runs), symbols=tuple(symbols), boundaries=tuple(boundaries))
    check_double_occurrence(word)
    return word
