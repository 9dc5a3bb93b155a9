"""Instances, allocations and their text/JSON formats.

All values are :class:`fractions.Fraction`; nothing in the library goes
through binary floating point.  Agents and goods are 0-based.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

Rational = Fraction

DEFAULT_KVALUE_CAP = 8


class ParseError(ValueError):
    """Malformed instance or allocation text, with a 1-based position."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


class InvalidAllocation(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    """An exhaustive search would exceed its configured budget."""


_NUMBER = re.compile(r"^\s*(\d+)(?:/(\d+)|\.(\d*))?\s*$")


def parse_rational(token: str) -> Fraction:
    """Parse ``"3"``, ``"p/q"`` or a decimal such as ``"0.1"`` exactly.

    Negative numbers are rejected; the library only handles goods.
    """
    m = _NUMBER.match(token)
    if m is None:
        if token.strip().startswith("-"):
            raise ValueError(f"negative value {token.strip()!r}")
        raise ValueError(f"not a number: {token.strip()!r}")
    whole, den, frac = m.groups()
    if den is not None:
        if int(den) == 0:
            raise ValueError(f"zero denominator in {token.strip()!r}")
        return Fraction(int(whole), int(den))
    if frac:
        return Fraction(int(whole + frac), 10 ** len(frac))
    return Fraction(int(whole))


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def _lcm_of_denominators(values: Iterable[Fraction]) -> int:
    out = 1
    for v in values:
        out = math.lcm(out, v.denominator)
    return out


@dataclass(frozen=True)
class Instance:
    """Additive valuations: ``values[i][g]`` is agent ``i``'s value for good ``g``."""

    values: tuple[tuple[Fraction, ...], ...]
    m_goods: int | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        rows = tuple(tuple(Fraction(v) for v in row) for row in self.values)
        if len(rows) < 1:
            raise ValueError("an instance needs at least one agent")
        m = len(rows[0]) if self.m_goods is None else self.m_goods
        for i, row in enumerate(rows):
            if len(row) != m:
                raise ValueError(f"agent {i} has {len(row)} values, expected {m}")
            for g, v in enumerate(row):
                if v < 0:
                    raise ValueError(f"negative value {v} for agent {i}, good {g}")
        object.__setattr__(self, "values", rows)
        object.__setattr__(self, "m_goods", m)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], m: int | None = None) -> "Instance":
        """Build from nested sequences of ints, Fractions or rational strings."""
        conv = [[v if isinstance(v, (int, Fraction)) else parse_rational(str(v)) for v in row] for row in rows]
        return cls(tuple(tuple(r) for r in conv), m)

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def m(self) -> int:
        return self.m_goods

    def value(self, agent: int, good: int) -> Fraction:
        return self.values[agent][good]

    @cached_property
    def row_scale(self) -> tuple[int, ...]:
        """Per-agent lcm of denominators; ``values[i] * row_scale[i]`` is integral."""
        return tuple(_lcm_of_denominators(row) for row in self.values)

    @cached_property
    def int_rows(self) -> tuple[tuple[int, ...], ...]:
        """Each row scaled to integers by its own denominator lcm.

        Envy comparisons only ever compare values of the same agent, so
        they can run on these.
        """
        return tuple(
            tuple(int(v * s) for v in row) for row, s in zip(self.values, self.row_scale)
        )

    @cached_property
    def common_scale(self) -> int:
        return _lcm_of_denominators(v for row in self.values for v in row)

    def positive_goods(self) -> list[int]:
        """Goods that at least one agent values positively."""
        return [g for g in range(self.m) if any(row[g] > 0 for row in self.values)]

    def scaled_row(self, agent: int, factor) -> "Instance":
        rows = list(self.values)
        rows[agent] = tuple(v * Fraction(factor) for v in rows[agent])
        return Instance(tuple(rows), self.m)


@dataclass(frozen=True)
class Allocation:
    """A vector of ``n`` bundles; each bundle is a sorted tuple of good indices."""

    bundles: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "bundles", tuple(tuple(sorted(b)) for b in self.bundles))

    @classmethod
    def from_owner(cls, owner: Sequence[int], n: int, goods: Sequence[int] | None = None) -> "Allocation":
        """``owner[k]`` receives ``goods[k]`` (``goods`` defaults to ``range(len(owner))``)."""
        if goods is None:
            goods = range(len(owner))
        bundles: list[list[int]] = [[] for _ in range(n)]
        for g, i in zip(goods, owner):
            bundles[i].append(g)
        return cls(tuple(tuple(b) for b in bundles))

    @property
    def n(self) -> int:
        return len(self.bundles)

    def owner(self, m: int) -> list[int]:
        """Inverse map good -> agent; ``-1`` for unallocated goods."""
        out = [-1] * m
        for i, b in enumerate(self.bundles):
            for g in b:
                out[g] = i
        return out

    def goods(self) -> list[int]:
        return sorted(g for b in self.bundles for g in b)

    def __str__(self):
        return "(" + ", ".join("{" + ",".join(f"g{g + 1}" for g in b) + "}" if b else "∅" for b in self.bundles) + ")"


def bundle_value(inst: Instance, agent: int, bundle: Iterable[int]) -> Fraction:
    if not 0 <= agent < inst.n:
        raise IndexError(f"agent {agent} out of range for n={inst.n}")
    row = inst.values[agent]
    total = Fraction(0)
    for g in bundle:
        if not 0 <= g < inst.m:
            raise IndexError(f"good {g} out of range for m={inst.m}")
        total += row[g]
    return total


def allocation_problem(inst: Instance, alloc: Allocation) -> str | None:
    """Describe the first way ``alloc`` fails to be a complete partition, or ``None``."""
    if alloc.n != inst.n:
        return f"allocation has {alloc.n} bundles, instance has {inst.n} agents"
    seen: dict[int, int] = {}
    for i, b in enumerate(alloc.bundles):
        for g in b:
            if not 0 <= g < inst.m:
                return f"agent {i} holds good {g}, which is out of range for m={inst.m}"
            if g in seen:
                return f"good {g} is held by agents {seen[g]} and {i}"
            seen[g] = i
    if len(seen) != inst.m:
        missing = min(set(range(inst.m)) - set(seen))
        return f"good {missing} is not allocated"
    return None


def validate_allocation(inst: Instance, alloc: Allocation) -> bool:
    return allocation_problem(inst, alloc) is None


def require_valid(inst: Instance, alloc: Allocation) -> None:
    problem = allocation_problem(inst, alloc)
    if problem is not None:
        raise InvalidAllocation(problem)


# --- classification -------------------------------------------------------


@dataclass(frozen=True)
class ValueClass:
    """Most specific value class of an instance.

    ``tag`` is one of ``"binary"``, ``"kvalue"``, ``"interval"``, ``"general"``.
    ``values`` is the sorted distinct value set (always filled in when it is
    no larger than the cap), ``intervals`` the per-agent ``(min, max)`` and is
    ``None`` when there are no goods.
    """

    tag: str
    values: tuple[Fraction, ...] | None
    intervals: tuple[tuple[Fraction, Fraction], ...] | None

    @property
    def k(self) -> int | None:
        return None if self.values is None else len(self.values)

    def is_two_value(self) -> bool:
        return self.values is not None and len(self.values) <= 2

    def max_ratio(self, agent: int) -> Fraction | None:
        """``max/min`` of the agent's values, ``None`` if the minimum is zero."""
        if self.intervals is None:
            return Fraction(1)
        lo, hi = self.intervals[agent]
        if lo == 0:
            return None
        return hi / lo


def classify(inst: Instance, kvalue_cap: int = DEFAULT_KVALUE_CAP) -> ValueClass:
    distinct = sorted({v for row in inst.values for v in row})
    intervals = None
    if inst.m > 0:
        intervals = tuple((min(row), max(row)) for row in inst.values)
    if all(v in (0, 1) for v in distinct):
        return ValueClass("binary", tuple(distinct), intervals)
    if len(distinct) <= kvalue_cap:
        return ValueClass("kvalue", tuple(distinct), intervals)
    if intervals is not None and all(lo > 0 for lo, _ in intervals):
        return ValueClass("interval", None, intervals)
    return ValueClass("general", None, intervals)


# --- text and JSON formats ------------------------------------------------


def _content_lines(text: str):
    """Yield ``(lineno, line)`` pairs, skipping ``#`` comments."""
    for k, line in enumerate(text.splitlines(), start=1):
        if line.lstrip().startswith("#"):
            continue
        yield k, line


def parse_instance(text: str) -> Instance:
    """Parse the text format (``n m`` header, ``n`` comma-separated rows) or its JSON mirror."""
    if text.lstrip().startswith("{"):
        return _instance_from_json(text)
    lines = [(k, line) for k, line in _content_lines(text)]
    while lines and not lines[-1][1].strip():
        lines.pop()
    if not lines:
        raise ParseError("empty instance", 1, 1)
    k0, header = lines[0]
    parts = header.split()
    if len(parts) != 2 or not all(p.isdigit() for p in parts):
        raise ParseError(f"header must be 'n m', got {header.strip()!r}", k0, 1)
    n, m = int(parts[0]), int(parts[1])
    if n < 1:
        raise ParseError("need at least one agent", k0, 1)
    rows_src = lines[1:]
    if m == 0:
        rows_src = [(k, line) for k, line in rows_src if line.strip()]
        if rows_src:
            k, _ = rows_src[0]
            raise ParseError("values given for an instance with m=0", k, 1)
        return Instance(tuple(() for _ in range(n)), 0)
    if len(rows_src) != n:
        k = rows_src[-1][0] + 1 if rows_src else k0 + 1
        raise ParseError(f"expected {n} value rows, found {len(rows_src)}", k, 1)
    rows = []
    for k, line in rows_src:
        tokens = line.split(",")
        if len(tokens) != m:
            raise ParseError(f"expected {m} values, found {len(tokens)}", k, 1)
        row = []
        col = 1
        for tok in tokens:
            try:
                row.append(parse_rational(tok))
            except ValueError as exc:
                raise ParseError(str(exc), k, col + len(tok) - len(tok.lstrip())) from None
            col += len(tok) + 1
        rows.append(tuple(row))
    return Instance(tuple(rows), m)


def _instance_from_json(text: str) -> Instance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    try:
        n, m, values = int(data["n"]), int(data["m"]), data["values"]
    except (KeyError, TypeError, ValueError):
        raise ParseError("JSON instance needs integer 'n', 'm' and a 'values' matrix") from None
    if n < 1:
        raise ParseError("need at least one agent")
    if len(values) != n:
        raise ParseError(f"expected {n} value rows, found {len(values)}")
    rows = []
    for i, row in enumerate(values):
        if len(row) != m:
            raise ParseError(f"row {i}: expected {m} values, found {len(row)}")
        try:
            rows.append(tuple(parse_rational(str(v)) for v in row))
        except ValueError as exc:
            raise ParseError(f"row {i}: {exc}") from None
    return Instance(tuple(rows), m)


def serialize_instance(inst: Instance) -> str:
    lines = [f"{inst.n} {inst.m}"]
    if inst.m:
        lines.extend(",".join(format_rational(v) for v in row) for row in inst.values)
    return "\n".join(lines) + "\n"


def instance_to_json(inst: Instance) -> dict:
    return {
        "n": inst.n,
        "m": inst.m,
        "values": [[format_rational(v) for v in row] for row in inst.values],
    }


def parse_allocation(text: str, n: int | None = None) -> Allocation:
    """Parse ``n`` lines of space-separated good indices, or JSON (``[[...], ...]`` or ``{"bundles": ...}``).

    Trailing empty bundles may be omitted from the text format when ``n`` is given.
    """
    if text.lstrip()[:1] in ("{", "["):
        try:
            data = json.loads(text)
            if isinstance(data, dict):
                data = data["bundles"]
            bundles = [[int(g) for g in b] for b in data]
        except (json.JSONDecodeError, KeyError, TypeError, ValueError):
            raise ParseError("JSON allocation must be a list of index lists (optionally under 'bundles')") from None
        if n is not None and len(bundles) != n:
            raise ParseError(f"expected {n} bundles, found {len(bundles)}")
        return Allocation(tuple(tuple(b) for b in bundles))
    lines = [(k, line) for k, line in _content_lines(text)]
    if n is None:
        while lines and not lines[-1][1].strip():
            lines.pop()
    else:
        while len(lines) > n and not lines[-1][1].strip():
            lines.pop()
        if len(lines) > n:
            raise ParseError(f"expected {n} bundles, found {len(lines)}", lines[n][0], 1)
    bundles = []
    for k, line in lines:
        bundle = []
        col = 1
        for tok in line.split(" "):
            if tok:
                if not tok.isdigit():
                    raise ParseError(f"bad good index {tok!r}", k, col)
                bundle.append(int(tok))
            col += len(tok) + 1
        bundles.append(tuple(bundle))
    if n is not None:
        bundles.extend(() for _ in range(n - len(bundles)))
    return Allocation(tuple(bundles))


def serialize_allocation(alloc: Allocation) -> str:
    return "".join(" ".join(str(g) for g in b) + "\n" for b in alloc.bundles)


def allocation_to_json(alloc: Allocation) -> list[list[int]]:
    return [list(b) for b in alloc.bundles]
