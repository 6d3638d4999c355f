"""Face lattice of the cyclohedron W_n as partial cyclic bracketings.

A face of W_n (equivalently, a boundary stratum of the compactified
configuration space of n cyclically ordered points on the circle) is a family
of brackets. A proper bracket is a cyclic interval of 2..n-1 consecutive
indices; the full bracket collects all n indices and carries a cut, the
position after which the collapsed cluster is read as a linear word.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Any

import networkx as nx

MIN_N = 3
MAX_N = 9

SHAPE_NAMES = {4: "parallelogram", 5: "pentagon", 6: "hexagon"}

_BRACKET_RE = re.compile(r"\(([1-9]+)\)")


class CyclohedronError(Exception):
    """Raised when a bracket, stratum label or lattice request is invalid."""


def _check_n(n: int) -> None:
    if not MIN_N <= n <= MAX_N:
        raise CyclohedronError(f"n must be between {MIN_N} and {MAX_N}, got {n}")


@dataclass(frozen=True)
class Bracket:
    """A cyclic interval of indices, or the full bracket with a cut.

    Indices are 1-based. A full bracket has ``length == n`` and ``cut`` set;
    its word starts at ``cut % n + 1``.
    """

    start: int
    length: int
    cut: int | None = None

    @classmethod
    def proper(cls, start: int, length: int, n: int) -> Bracket:
        bracket = cls(start=start, length=length)
        bracket.validate(n)
        return bracket

    @classmethod
    def full(cls, cut: int, n: int) -> Bracket:
        bracket = cls(start=cut % n + 1, length=n, cut=cut)
        bracket.validate(n)
        return bracket

    @classmethod
    def parse(cls, text: str, n: int) -> Bracket:
        """Parse bracket notation such as ``(12)`` or ``(3412)``.

        Args:
            text: Parenthesised word of consecutive indices
            n: Number of points

        Returns:
            The parsed bracket

        Raises:
            CyclohedronError: If the word is not a run of consecutive indices
        """
        match = _BRACKET_RE.fullmatch(text.strip())
        if not match:
            raise CyclohedronError(f"Invalid bracket notation: {text!r}")
        word = [int(ch) for ch in match.group(1)]
        for prev, nxt in zip(word, word[1:]):
            if nxt != prev % n + 1:
                raise CyclohedronError(f"Bracket {text!r} is not a cyclic interval for n={n}")
        if len(word) == n:
            return cls.full((word[0] - 2) % n + 1, n)
        return cls.proper(word[0], len(word), n)

    @property
    def is_full(self) -> bool:
        return self.cut is not None

    def validate(self, n: int) -> None:
        """Check the bracket against n.

        Raises:
            CyclohedronError: If the bracket is not valid for n points
        """
        if not 1 <= self.start <= n:
            raise CyclohedronError(f"Bracket start {self.start} outside 1..{n}")
        if self.is_full:
            if self.length != n or not 1 <= self.cut <= n or self.start != self.cut % n + 1:
                raise CyclohedronError(f"Inconsistent full bracket {self} for n={n}")
        elif not 2 <= self.length <= n - 1:
            raise CyclohedronError(f"Proper bracket length {self.length} outside 2..{n - 1}")

    def members(self, n: int) -> tuple[int, ...]:
        """Indices covered by the bracket, in cyclic order from its start."""
        return tuple((self.start - 1 + k) % n + 1 for k in range(self.length))

    def notation(self, n: int) -> str:
        return "(" + "".join(str(i) for i in self.members(n)) + ")"

    def rotate(self, k: int, n: int) -> Bracket:
        """Relabel every index i as i + k (mod n)."""
        start = (self.start - 1 + k) % n + 1
        if self.is_full:
            return Bracket(start=start, length=n, cut=(self.cut - 1 + k) % n + 1)
        return Bracket(start=start, length=self.length)

    def sort_key(self) -> tuple[int, int, int]:
        return (self.start, self.length, self.cut or 0)


def compatible(a: Bracket, b: Bracket, n: int) -> bool:
    """Whether two brackets can belong to the same stratum label.

    Proper brackets must be nested or disjoint. A proper bracket is compatible
    with a full bracket iff it does not straddle the cut. Two different full
    brackets never are.
    """
    if a == b:
        return True
    if a.is_full and b.is_full:
        return False
    if a.is_full or b.is_full:
        full, other = (a, b) if a.is_full else (b, a)
        members = set(other.members(n))
        return not (full.cut in members and full.cut % n + 1 in members)
    sa, sb = set(a.members(n)), set(b.members(n))
    return sa <= sb or sb <= sa or not (sa & sb)


def all_brackets(n: int) -> list[Bracket]:
    """Every proper bracket and every full bracket for n points."""
    brackets = [Bracket(start=s, length=length) for s in range(1, n + 1) for length in range(2, n)]
    brackets += [Bracket(start=c % n + 1, length=n, cut=c) for c in range(1, n + 1)]
    return sorted(brackets, key=Bracket.sort_key)


@dataclass(frozen=True)
class StratumLabel:
    """A compatible family of brackets naming a face of W_n."""

    n: int
    brackets: tuple[Bracket, ...] = ()

    def __post_init__(self) -> None:
        if self.n < MIN_N:
            raise CyclohedronError(f"n must be at least {MIN_N}, got {self.n}")
        canonical = tuple(sorted(set(self.brackets), key=Bracket.sort_key))
        object.__setattr__(self, "brackets", canonical)
        for bracket in canonical:
            bracket.validate(self.n)
        for i, a in enumerate(canonical):
            for b in canonical[i + 1 :]:
                if not compatible(a, b, self.n):
                    raise CyclohedronError(
                        f"Incompatible brackets {a.notation(self.n)} and {b.notation(self.n)}"
                    )

    @classmethod
    def parse(cls, text: str, n: int) -> StratumLabel:
        """Parse a label such as ``(23)(41)``; the empty string is the top face."""
        stripped = text.replace(" ", "")
        if _BRACKET_RE.sub("", stripped):
            raise CyclohedronError(f"Invalid stratum notation: {text!r}")
        return cls(n, tuple(Bracket.parse(m.group(0), n) for m in _BRACKET_RE.finditer(stripped)))

    @property
    def codim(self) -> int:
        return len(self.brackets)

    @property
    def dim(self) -> int:
        return self.n - 1 - self.codim

    @property
    def is_interior(self) -> bool:
        return not self.brackets

    @property
    def full_bracket(self) -> Bracket | None:
        return next((b for b in self.brackets if b.is_full), None)

    def notation(self) -> str:
        return "".join(b.notation(self.n) for b in self.brackets)

    def __str__(self) -> str:
        return self.notation() or "()"

    def key(self) -> tuple[tuple[int, int, int], ...]:
        return tuple(b.sort_key() for b in self.brackets)

    def rotate(self, k: int) -> StratumLabel:
        return StratumLabel(self.n, tuple(b.rotate(k, self.n) for b in self.brackets))

    def without(self, bracket: Bracket) -> StratumLabel:
        return StratumLabel(self.n, tuple(b for b in self.brackets if b != bracket))

    def to_dict(self) -> dict[str, Any]:
        return {"brackets": [b.notation(self.n) for b in self.brackets], "dim": self.dim}


@dataclass
class FaceLattice:
    """All faces of W_n with their cover relations.

    ``covers`` holds ``(lower, upper)`` index pairs into ``faces``; the top
    face (no brackets) is ``faces[0]``.
    """

    n: int
    faces: list[StratumLabel]
    covers: list[tuple[int, int]] = field(default_factory=list)

    def index(self, label: StratumLabel) -> int:
        return self._positions()[label]

    def _positions(self) -> dict[StratumLabel, int]:
        return {face: i for i, face in enumerate(self.faces)}

    def f_vector(self) -> list[int]:
        return f_vector(self)

    def hasse_diagram(self) -> nx.DiGraph:
        """Directed graph with an edge from each face to every face covering it."""
        graph = nx.DiGraph()
        for i, face in enumerate(self.faces):
            graph.add_node(i, dim=face.dim, label=str(face))
        graph.add_edges_from(self.covers)
        return graph

    def is_rotation_invariant(self) -> bool:
        """Whether relabelling i -> i+1 maps the face set onto itself."""
        faces = set(self.faces)
        return {face.rotate(1) for face in self.faces} == faces

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "faces": [face.to_dict() for face in self.faces],
            "covers": [[lower, upper] for lower, upper in self.covers],
        }


def enumerate_faces(n: int) -> FaceLattice:
    """Enumerate every face of W_n.

    Brackets are enumerated by backtracking over a precomputed compatibility
    bitmask, so every compatible family is produced exactly once.

    Args:
        n: Number of points, 3..9

    Returns:
        The face lattice, faces sorted by codimension then brackets

    Raises:
        CyclohedronError: If n is out of range
    """
    _check_n(n)
    brackets = all_brackets(n)
    masks = []
    for i, a in enumerate(brackets):
        mask = 0
        for j, b in enumerate(brackets):
            if i != j and compatible(a, b, n):
                mask |= 1 << j
        masks.append(mask)

    families: list[tuple[int, ...]] = []

    def extend(chosen: list[int], allowed: int) -> None:
        families.append(tuple(chosen))
        while allowed:
            low = allowed & -allowed
            j = low.bit_length() - 1
            allowed ^= low
            chosen.append(j)
            extend(chosen, allowed & masks[j])
            chosen.pop()

    extend([], (1 << len(brackets)) - 1)

    faces = [StratumLabel(n, tuple(brackets[j] for j in family)) for family in families]
    faces.sort(key=lambda face: (face.codim, face.key()))
    positions = {face: i for i, face in enumerate(faces)}

    covers = []
    for i, face in enumerate(faces):
        for bracket in face.brackets:
            covers.append((i, positions[face.without(bracket)]))
    covers.sort()
    return FaceLattice(n=n, faces=faces, covers=covers)


def f_vector(lattice: FaceLattice) -> list[int]:
    """Number of faces per dimension 0..n-1."""
    counts = Counter(face.dim for face in lattice.faces)
    return [counts.get(d, 0) for d in range(lattice.n)]


def euler_characteristic(lattice: FaceLattice) -> int:
    """Alternating face count of the boundary complex (dimensions 0..n-2)."""
    return sum((-1) ** d * f for d, f in enumerate(f_vector(lattice)[:-1]))


def vertex_count(n: int) -> int:
    """Closed-form number of vertices of W_n."""
    return math.comb(2 * n - 2, n - 1)


def is_graded(lattice: FaceLattice) -> bool:
    """Check gradedness on the Hasse diagram.

    Every cover raises the dimension by one, the only face without an upper
    cover is the top face, the faces without a lower cover are exactly the
    vertices, and the longest chain has length n-1.
    """
    graph = lattice.hasse_diagram()
    dims = nx.get_node_attributes(graph, "dim")
    if any(dims[upper] != dims[lower] + 1 for lower, upper in graph.edges):
        return False
    sinks = [v for v in graph.nodes if graph.out_degree(v) == 0]
    sources = {v for v in graph.nodes if graph.in_degree(v) == 0}
    if sinks != [0] or sources != {v for v, d in dims.items() if d == 0}:
        return False
    return nx.dag_longest_path_length(graph) == lattice.n - 1


@dataclass(frozen=True)
class FacetShape:
    """Shape of the facet named by a single bracket."""

    bracket: Bracket
    ridges: int
    factors: tuple[str, ...]
    name: str


def facet_shape(label: StratumLabel) -> FacetShape:
    """Describe the facet [label, top] of a codimension-1 label.

    A proper bracket of length L gives K_L x W_{n-L+1}, the full bracket gives
    the associahedron K_n. The ridge count is the number of brackets
    compatible with the facet's bracket; for n = 4 it names the polygon.

    Raises:
        CyclohedronError: If the label does not have codimension 1
    """
    if label.codim != 1:
        raise CyclohedronError(f"facet_shape needs a codimension-1 label, got codim {label.codim}")
    n = label.n
    (bracket,) = label.brackets
    ridges = sum(1 for other in all_brackets(n) if other != bracket and compatible(bracket, other, n))
    if bracket.is_full:
        factors: tuple[str, ...] = (f"K_{n}",)
    else:
        factors = tuple(f for f in (f"K_{bracket.length}", f"W_{n - bracket.length + 1}") if f != "K_2")
    if n == 4:
        name = SHAPE_NAMES.get(ridges, f"{ridges}-gon")
    else:
        name = " x ".join(factors)
    return FacetShape(bracket=bracket, ridges=ridges, factors=factors, name=name)


def facet_census(lattice: FaceLattice) -> Counter:
    """Count facets by shape name."""
    return Counter(facet_shape(face).name for face in lattice.faces if face.codim == 1)
