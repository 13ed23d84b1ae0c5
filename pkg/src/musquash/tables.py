"""Intersection tables of thrackled polygons.

For a closed polygon with edges ``e_1 .. e_n`` drawn so that every pair of
non-adjacent edges crosses exactly once, the intersection table records, for
each edge, the ordered list of the ``n - 3`` edges it crosses.  Row ``i``
lists the crossings along ``e_i`` from ``v_i`` toward ``v_{i+1}``; edge
labels are always normalised to ``1 .. n``.

A table is *musquash* when row 1 generates every row by the modular shift
``row_i[t] = row_1[t] + (i - 1)``, and *bi-musquash* when ``n`` is even,
row 1 generates the odd rows (shift ``i - 1``) and row 2 generates the even
rows (shift ``i - 2``).  This module houses those generation rules, the
explicit SET1/SET2 generator formulas for length ``2p`` (``p`` odd), and the
symmetry group used to compare tables: rotation relabelling, traversal
reversal and mirror.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence


class TableError(ValueError):
    """An intersection table (or generator row) violates an invariant."""


class ParseError(ValueError):
    """Malformed textual table input; message carries line/column info."""


@dataclass(frozen=True)
class IntersectionTable:
    """``n`` rows of length ``n - 3``; row ``i`` is the crossing order of ``e_i``.

    Construction enforces only the structural shape (row count, row length,
    label range).  Semantic validity -- each row a permutation of the
    non-neighbours of its edge -- is checked by :func:`validate` /
    :func:`classify`, so candidate tables that are *not* valid can still be
    carried around and classified.
    """

    n: int
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        n = self.n
        if not isinstance(n, int) or n < 5:
            raise TableError(f"polygon length must be an integer >= 5, got {n!r}")
        if len(self.rows) != n:
            raise TableError(f"expected {n} rows, got {len(self.rows)}")
        for i, row in enumerate(self.rows, start=1):
            if len(row) != n - 3:
                raise TableError(
                    f"row {i} has length {len(row)}, expected n-3 = {n - 3}"
                )
            for v in row:
                if not isinstance(v, int) or not 1 <= v <= n:
                    raise TableError(f"row {i} entry {v!r} outside 1..{n}")

    def row(self, i: int) -> tuple[int, ...]:
        """Row of edge ``e_i`` (1-based, cyclic)."""
        return self.rows[(i - 1) % self.n]

    def flat(self) -> tuple[int, ...]:
        """Rows concatenated; the key used for lexicographic comparison."""
        return tuple(v for row in self.rows for v in row)


@dataclass(frozen=True)
class GeneratorPair:
    """Rows 1 and 2 of a table; ``row2`` is absent for musquash generation."""

    n: int
    row1: tuple[int, ...]
    row2: tuple[int, ...] | None = None


@dataclass(frozen=True)
class TableClassification:
    valid_rows: bool
    is_musquash: bool
    is_bimusquash: bool


class GeneratorSet(Enum):
    """The two explicit generator formulas for bi-musquash length ``2p``."""

    SET1 = 1
    SET2 = 2


def non_neighbors(i: int, n: int) -> frozenset[int]:
    """Labels of the ``n - 3`` edges not adjacent to (and not equal to) ``e_i``."""
    return frozenset(range(1, n + 1)) - {
        (i - 2) % n + 1,
        i,
        i % n + 1,
    }


def _shift(row: Sequence[int], k: int, n: int) -> tuple[int, ...]:
    """Add ``k`` to every label, representatives in ``1..n``."""
    return tuple((v - 1 + k) % n + 1 for v in row)


def _check_generator_row(row: Sequence[int], n: int, which: str, support: frozenset[int]) -> tuple[int, ...]:
    row = tuple(row)
    if len(row) != n - 3:
        raise TableError(f"{which} has length {len(row)}, expected n-3 = {n - 3}")
    seen = set()
    for v in row:
        if not isinstance(v, int):
            raise TableError(f"{which} entry {v!r} is not an integer")
        if v in seen:
            raise TableError(f"{which} contains duplicate entry {v}")
        seen.add(v)
    if seen != support:
        missing = sorted(support - seen)
        extra = sorted(seen - support)
        raise TableError(
            f"{which} support mismatch: missing {missing}, unexpected {extra}"
        )
    return row


def check_generator_pair(gen: GeneratorPair) -> None:
    """Raise :class:`TableError` unless the generator rows are well formed."""
    if gen.n < 5:
        raise TableError(f"polygon length must be >= 5, got {gen.n}")
    _check_generator_row(gen.row1, gen.n, "row1", non_neighbors(1, gen.n))
    if gen.row2 is not None:
        _check_generator_row(gen.row2, gen.n, "row2", non_neighbors(2, gen.n))


def expand_musquash(row1: Sequence[int], n: int) -> IntersectionTable:
    """Expand a single generator row by the shift rule ``row_i = row_1 + (i-1)``."""
    row1 = _check_generator_row(row1, n, "row1", non_neighbors(1, n))
    rows = tuple(_shift(row1, i - 1, n) for i in range(1, n + 1))
    return IntersectionTable(n, rows)


def expand_bimusquash(gen: GeneratorPair) -> IntersectionTable:
    """Expand a generator pair: odd rows from row 1, even rows from row 2.

    Row ``i`` is ``row1 + (i - 1)`` for odd ``i`` and ``row2 + (i - 2)`` for
    even ``i``, labels mod ``n`` with representatives in ``1..n``.
    """
    if gen.n % 2 != 0:
        raise TableError("bi-musquash requires even n")
    if gen.row2 is None:
        raise TableError("bi-musquash expansion needs both generator rows")
    check_generator_pair(gen)
    rows = tuple(
        _shift(gen.row1, i - 1, gen.n) if i % 2 == 1 else _shift(gen.row2, i - 2, gen.n)
        for i in range(1, gen.n + 1)
    )
    return IntersectionTable(gen.n, rows)


def _set1_rows(p: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    half = (p - 3) // 2
    row1 = [p + 1, p]
    for k in range(1, half + 1):
        row1 += [2 * p - 2 * k, p - 2 * k]
    for k in range(1, half + 1):
        row1 += [2 * p - 2 * k + 1, p - 2 * k + 1]
    row1.append(p + 2)
    row2 = [p + 2, p + 1]
    for k in range(1, half + 1):
        row2 += [p - 2 * k + 1, 2 * p - 2 * k + 1]
    for k in range(0, half):
        row2 += [p - 2 * k, 2 * p - 2 * k]
    row2.append(p + 3)
    return tuple(row1), tuple(row2)


def _set2_rows(p: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    # Literal reading of the second display: same terms with the leading
    # entry moved to the end of each row.
    half = (p - 3) // 2
    row1 = [p]
    for k in range(1, half + 1):
        row1 += [2 * p - 2 * k, p - 2 * k]
    for k in range(1, half + 1):
        row1 += [2 * p - 2 * k + 1, p - 2 * k + 1]
    row1 += [p + 2, p + 1]
    row2 = [p + 1]
    for k in range(1, half + 1):
        row2 += [p - 2 * k + 1, 2 * p - 2 * k + 1]
    for k in range(0, half):
        row2 += [p - 2 * k, 2 * p - 2 * k]
    row2 += [p + 3, p + 2]
    return tuple(row1), tuple(row2)


def set_generators(which: GeneratorSet | int, p: int) -> GeneratorPair:
    """The explicit SET1/SET2 generator rows for a bi-musquash of length ``2p``.

    ``p`` must be odd and at least 5: at ``p = 3`` the formula terms collide
    (``2p - 2 = p + 1``), so the 6-gon is handled by exhaustive search
    instead.
    """
    which = GeneratorSet(which)
    if p % 2 == 0:
        raise TableError(f"p must be odd, got {p}")
    if p < 5:
        raise TableError(f"p must be >= 5, got {p} (the n=6 case has no SET formula)")
    set1 = _set1_rows(p)
    if which is GeneratorSet.SET1:
        row1, row2 = set1
    else:
        row1, row2 = _set2_rows(p)
        # Independent construction must agree with the leading-entry cyclic
        # shift of SET1; both derivations are kept and cross-checked.
        shifted = (set1[0][1:] + set1[0][:1], set1[1][1:] + set1[1][:1])
        if (row1, row2) != shifted:
            raise AssertionError("SET2 formula and SET1 cyclic shift disagree")
    gen = GeneratorPair(2 * p, row1, row2)
    check_generator_pair(gen)
    return gen


def rows_valid(table: IntersectionTable) -> bool:
    """True iff every row is a permutation of its edge's non-neighbours."""
    return all(
        frozenset(table.rows[i - 1]) == non_neighbors(i, table.n)
        and len(set(table.rows[i - 1])) == table.n - 3
        for i in range(1, table.n + 1)
    )


def validate(table: IntersectionTable) -> None:
    """Raise :class:`TableError` naming the first violated row invariant."""
    n = table.n
    pair_seen: dict[frozenset[int], int] = {}
    for i in range(1, n + 1):
        row = table.rows[i - 1]
        support = non_neighbors(i, n)
        if len(set(row)) != len(row):
            dup = next(v for v in row if row.count(v) > 1)
            raise TableError(f"row {i} contains duplicate entry {dup}")
        if frozenset(row) != support:
            raise TableError(
                f"row {i} is not a permutation of the non-neighbours of e_{i}: "
                f"expected {sorted(support)}, got {sorted(set(row))}"
            )
        for j in row:
            pair_seen[frozenset((i, j))] = pair_seen.get(frozenset((i, j)), 0) + 1
    # Automatic given the per-row check, still asserted: every unordered
    # non-adjacent pair occurs once in each of its two rows.
    for pair, count in pair_seen.items():
        if count != 2:
            a, b = sorted(pair)
            raise TableError(f"pair {{{a},{b}}} appears {count} times, expected 2")
    if len(pair_seen) != n * (n - 3) // 2:
        raise TableError(
            f"table has {len(pair_seen)} distinct crossing pairs, "
            f"expected n(n-3)/2 = {n * (n - 3) // 2}"
        )


def _condition_d(table: IntersectionTable) -> bool:
    row1 = table.rows[0]
    return all(
        table.rows[i - 1] == _shift(row1, i - 1, table.n)
        for i in range(2, table.n + 1)
    )


def _condition_d_prime(table: IntersectionTable) -> bool:
    if table.n % 2 != 0:
        return False
    row1, row2 = table.rows[0], table.rows[1]
    return all(
        table.rows[i - 1]
        == (_shift(row1, i - 1, table.n) if i % 2 == 1 else _shift(row2, i - 2, table.n))
        for i in range(1, table.n + 1)
    )


def classify(table: IntersectionTable) -> TableClassification:
    """Row validity plus the two shift-generation properties."""
    valid = rows_valid(table)
    musq = valid and _condition_d(table)
    bimusq = valid and table.n % 2 == 0 and _condition_d_prime(table)
    return TableClassification(valid_rows=valid, is_musquash=musq, is_bimusquash=bimusq)


def rotate(table: IntersectionTable, k: int) -> IntersectionTable:
    """Relabel ``e_i -> e_{i+k}``: new row ``i`` is old row ``i-k`` shifted by ``k``."""
    n = table.n
    k %= n
    rows = tuple(
        _shift(table.rows[(i - 1 - k) % n], k, n) for i in range(1, n + 1)
    )
    return IntersectionTable(n, rows)


def mirror(table: IntersectionTable) -> IntersectionTable:
    """Plane reflection: the crossing order along every edge reverses."""
    return IntersectionTable(table.n, tuple(tuple(reversed(r)) for r in table.rows))


def reverse_traversal(table: IntersectionTable) -> IntersectionTable:
    """Reverse the polygon orientation: relabel ``e_j -> e_{n+1-j}``, reverse rows."""
    n = table.n
    rows = tuple(
        tuple(n + 1 - v for v in reversed(table.rows[(n + 1 - i) - 1]))
        for i in range(1, n + 1)
    )
    return IntersectionTable(n, rows)


def table_group_orbit(table: IntersectionTable) -> Iterable[IntersectionTable]:
    """All images of the table under rotations, traversal reversal and mirror."""
    for base in (table, reverse_traversal(table)):
        for mirrored in (base, mirror(base)):
            for k in range(table.n):
                yield rotate(mirrored, k)


def canonical_form(table: IntersectionTable) -> IntersectionTable:
    """Lexicographically smallest table in the symmetry-group orbit.

    Two tables describe the same unlabelled, unoriented drawing iff their
    canonical forms are equal.
    """
    return min(table_group_orbit(table), key=IntersectionTable.flat)


def canonical_form_chiral(table: IntersectionTable) -> IntersectionTable:
    """Canonical form under the mirror-free subgroup (rotations and reversal).

    Distinguishes a drawing from its reflection; two tables are chiral-
    equivalent but not equal-with-mirror exactly when they are reflections.
    """
    candidates = (
        rotate(base, k)
        for base in (table, reverse_traversal(table))
        for k in range(table.n)
    )
    return min(candidates, key=IntersectionTable.flat)


# ---------------------------------------------------------------------------
# Serialisation.  Two interchangeable formats:
#   * JSON document with fields "schema_version", "kind", "n", "rows";
#   * the bare TSV layout, row i on line i with n-3 tab-separated labels.

SCHEMA_VERSION = 1


def serialize_table(table: IntersectionTable, fmt: str = "json") -> str:
    if fmt == "tsv":
        return "".join("\t".join(str(v) for v in row) + "\n" for row in table.rows)
    if fmt == "json":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "kind": "intersection_table",
            "n": table.n,
            "rows": [list(row) for row in table.rows],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    raise ValueError(f"unknown table format {fmt!r}")


def _parse_tsv(text: str) -> IntersectionTable:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    n = len(lines)
    if n < 5:
        raise ParseError(f"line {n + 1}: expected at least 5 rows, got {n}")
    rows = []
    for lineno, line in enumerate(lines, start=1):
        fields = line.split("\t") if "\t" in line else line.split()
        row = []
        col = 1
        for field in fields:
            try:
                row.append(int(field))
            except ValueError:
                raise ParseError(
                    f"line {lineno}, column {col}: {field!r} is not an integer"
                ) from None
            col += len(field) + 1
        if len(row) != n - 3:
            raise ParseError(
                f"line {lineno}: expected {n - 3} entries for n={n}, got {len(row)}"
            )
        rows.append(tuple(row))
    try:
        table = IntersectionTable(n, tuple(rows))
        validate(table)
    except TableError as exc:
        raise ParseError(str(exc)) from None
    return table


def _parse_json(text: str) -> IntersectionTable:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict) or "n" not in doc or "rows" not in doc:
        raise ParseError("table document must carry fields 'n' and 'rows'")
    try:
        table = IntersectionTable(int(doc["n"]), tuple(tuple(r) for r in doc["rows"]))
        validate(table)
    except (TableError, TypeError) as exc:
        raise ParseError(str(exc)) from None
    return table


def parse_table(text: str) -> IntersectionTable:
    """Parse either format (auto-detected); validates all table invariants."""
    if text.lstrip().startswith("{"):
        return _parse_json(text)
    return _parse_tsv(text)
