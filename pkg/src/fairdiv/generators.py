"""Random instance generators, the worked-example fixtures and the MNW-vs-EFX search."""

from __future__ import annotations

import itertools
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

from .core import Allocation, Instance, format_rational, parse_rational
from .fairness import Witness, check, efx_factor, vefx_factor
from .nash import MnwKey, brute_force_mnw, mnw_key, nash_welfare

KINDS = ("binary", "two_value", "k_value", "interval")


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else parse_rational(str(x)) if isinstance(x, str) else Fraction(x)


def _coin(rng: random.Random, p: Fraction) -> bool:
    """Exact Bernoulli(p) draw for rational ``p``."""
    return rng.randrange(p.denominator) < p.numerator


@dataclass(frozen=True)
class GeneratorSpec:
    """``kind`` plus its parameters:

    * ``binary``: ``density`` (probability of a 1)
    * ``two_value``: ``a > b >= 0`` and ``p_a`` (probability of ``a``)
    * ``k_value``: ``values``, drawn uniformly
    * ``interval``: ``x_lo <= x_hi`` (range of each agent's lower end), ``ratio >= 1``
      and ``resolution`` (grid steps inside ``[x, ratio x]``)
    """

    kind: str
    n: int
    m: int
    seed: int = 0
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        if self.n < 1 or self.m < 0:
            raise ValueError("need n >= 1 and m >= 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        p = self.resolved_params()
        if self.kind == "binary" and not 0 <= p["density"] <= 1:
            raise ValueError("density must lie in [0, 1]")
        if self.kind == "two_value":
            if not p["a"] > p["b"] >= 0:
                raise ValueError("two_value needs a > b >= 0")
            if not 0 <= p["p_a"] <= 1:
                raise ValueError("p_a must lie in [0, 1]")
        if self.kind == "k_value":
            vs = p["values"]
            if not vs or any(v < 0 for v in vs):
                raise ValueError("k_value needs a non-empty set of non-negative values")
        if self.kind == "interval":
            if not 0 < p["x_lo"] <= p["x_hi"]:
                raise ValueError("interval needs 0 < x_lo <= x_hi")
            if p["ratio"] < 1 or p["resolution"] < 1:
                raise ValueError("interval needs ratio >= 1 and resolution >= 1")

    def resolved_params(self) -> dict[str, Any]:
        p = dict(self.params)
        if self.kind == "binary":
            return {"density": _frac(p.get("density", Fraction(1, 2)))}
        if self.kind == "two_value":
            return {
                "a": _frac(p.get("a", 2)),
                "b": _frac(p.get("b", 1)),
                "p_a": _frac(p.get("p_a", Fraction(1, 2))),
            }
        if self.kind == "k_value":
            raw = p.get("values", (1, 2, 3))
            if isinstance(raw, str):
                raw = raw.split(",")
            return {"values": tuple(sorted({_frac(v) for v in raw}))}
        return {
            "x_lo": _frac(p.get("x_lo", 1)),
            "x_hi": _frac(p.get("x_hi", 1)),
            "ratio": _frac(p.get("ratio", 2)),
            "resolution": int(p.get("resolution", 20)),
        }


def generate(spec: GeneratorSpec) -> Instance:
    """Deterministic instance for ``spec``; equal specs give equal instances."""
    rng = random.Random(spec.seed)
    p = spec.resolved_params()
    n, m = spec.n, spec.m
    if spec.kind == "binary":
        rows = [[Fraction(int(_coin(rng, p["density"]))) for _ in range(m)] for _ in range(n)]
    elif spec.kind == "two_value":
        rows = [[p["a"] if _coin(rng, p["p_a"]) else p["b"] for _ in range(m)] for _ in range(n)]
    elif spec.kind == "k_value":
        rows = [[rng.choice(p["values"]) for _ in range(m)] for _ in range(n)]
    else:
        res = p["resolution"]
        rows = []
        for _ in range(n):
            x = p["x_lo"] + (p["x_hi"] - p["x_lo"]) * Fraction(rng.randint(0, res), res)
            rows.append([x * (1 + (p["ratio"] - 1) * Fraction(rng.randint(0, res), res)) for _ in range(m)])
    return Instance(tuple(tuple(r) for r in rows), m)


# --- fixtures ---------------------------------------------------------------------


@dataclass(frozen=True)
class Fact:
    """One machine-checkable claim about a fixture.

    ``kind`` is one of ``mnw_key``, ``mnw_optima``, ``key``, ``nash_welfare``,
    ``holds``, ``witness``, ``efx_factor``, ``vefx_factor``, ``vefx_at_least``.
    """

    kind: str
    expected: Any
    alloc: str | None = None
    notion: str | None = None

    def describe(self) -> str:
        target = f"[{self.alloc}]" if self.alloc else ""
        notion = f" {self.notion}" if self.notion else ""
        return f"{self.kind}{notion}{target} = {_show(self.expected)}"


@dataclass(frozen=True)
class Fixture:
    id: str
    params: dict[str, Fraction]
    instance: Instance
    allocations: dict[str, Allocation]
    facts: tuple[Fact, ...]


@dataclass(frozen=True)
class FactCheck:
    fact: Fact
    actual: Any
    ok: bool


def _show(x) -> str:
    if isinstance(x, Fraction):
        return format_rational(x)
    if isinstance(x, MnwKey):
        return f"({x.positive_count}, {format_rational(x.product)})"
    if isinstance(x, frozenset):
        return "{" + ", ".join(sorted(str(a) for a in x)) + "}"
    if isinstance(x, Witness):
        return f"({x.envier}, {x.envied}, {x.good})"
    return str(x)


def _alloc(n: int, *bundles: Sequence[int]) -> Allocation:
    """Allocation from 1-based good labels, matching how the worked examples name goods."""
    assert len(bundles) == n
    return Allocation(tuple(tuple(sorted(g - 1 for g in b)) for b in bundles))


FIXTURE_DEFAULTS: dict[str, dict[str, Fraction]] = {
    "zero-nw": {},
    "zero-good": {},
    "three-value": {"eps": Fraction(1, 10)},
    "vefx": {"w": Fraction(3), "eps": Fraction(1, 10)},
    "thm7-efx": {"alpha": Fraction(1, 2)},
    "thm7-vefx": {"alpha": Fraction(1, 2), "gamma": Fraction(4)},
}


def fixture(fixture_id: str, params: dict[str, Any] | None = None) -> Fixture:
    """Build a named worked example with its allocations and expected facts.

    Parameters outside the range where the facts are claimed raise ``ValueError``.
    """
    if fixture_id not in FIXTURE_DEFAULTS:
        raise ValueError(f"unknown fixture {fixture_id!r}; expected one of {', '.join(FIXTURE_DEFAULTS)}")
    p = dict(FIXTURE_DEFAULTS[fixture_id])
    for k, v in (params or {}).items():
        if k not in p:
            raise ValueError(f"fixture {fixture_id} has no parameter {k!r}")
        p[k] = _frac(v)
    build = _BUILDERS[fixture_id]
    inst, allocs, facts = build(**p)
    return Fixture(fixture_id, p, inst, allocs, tuple(facts))


def _zero_nw():
    inst = Instance.from_rows([[1, 0, 0], [1, 0, 0], [0, 1, 1]])
    allocs = {
        "all-to-3": _alloc(3, [], [], [1, 2, 3]),
        "max-positive": _alloc(3, [1, 2], [], [3]),
        "mnw": _alloc(3, [1], [], [2, 3]),
    }
    facts = [
        Fact("mnw_key", MnwKey(2, Fraction(2))),
        Fact("mnw_optima", frozenset({allocs["mnw"], _alloc(3, [], [1], [2, 3])})),
        Fact("nash_welfare", Fraction(0), "mnw"),
        Fact("holds", False, "all-to-3", "efx0"),
        Fact("holds", False, "max-positive", "efx0"),
        Fact("witness", Witness(1, 0, 1), "max-positive", "efx0"),
        Fact("holds", True, "mnw", "efx0"),
    ]
    return inst, allocs, facts


def _zero_good():
    inst = Instance.from_rows([[1, 0, 0, 0], [1, 0, 0, 0], [0, 1, 1, 0]])
    allocs = {
        "zero-good-to-1": _alloc(3, [1, 4], [], [2, 3]),
        "mnw": _alloc(3, [1], [4], [2, 3]),
    }
    facts = [
        Fact("mnw_key", MnwKey(2, Fraction(2))),
        Fact("mnw_optima", frozenset({allocs["mnw"], _alloc(3, [4], [1], [2, 3])})),
        Fact("key", MnwKey(2, Fraction(2)), "zero-good-to-1"),
        Fact("holds", False, "zero-good-to-1", "efx0"),
        Fact("holds", True, "mnw", "efx0"),
    ]
    return inst, allocs, facts


def _three_value(eps):
    if not 0 < eps < 1:
        raise ValueError("three-value needs 0 < eps < 1")
    inst = Instance.from_rows([[1 - eps, 1, 1 + eps], [1, 1 - eps, 1 + eps]])
    allocs = {"A1": _alloc(2, [2], [1, 3]), "A2": _alloc(2, [2, 3], [1])}
    facts = [Fact("mnw_key", MnwKey(2, 2 + eps)), Fact("mnw_optima", frozenset(allocs.values()))]
    for name in allocs:
        facts.append(Fact("holds", False, name, "efx"))
        facts.append(Fact("vefx_factor", 1 / (2 - eps), name))
    return inst, allocs, facts


def _vefx(w, eps):
    if not (w > 1 and 0 < eps < 1 / (2 * w)):
        raise ValueError("vefx needs w > 1 and 0 < eps < 1/(2w)")
    inst = Instance.from_rows([[w, 0, Fraction(1, 2)], [w, 1, eps]])
    allocs = {"mnw": _alloc(2, [1, 3], [2]), "nearby-efx": _alloc(2, [1], [2, 3])}
    facts = [
        Fact("mnw_key", MnwKey(2, w + Fraction(1, 2))),
        Fact("mnw_optima", frozenset({allocs["mnw"]})),
        Fact("holds", False, "mnw", "efx"),
        Fact("efx_factor", 1 / w, "mnw"),
        Fact("vefx_factor", 1 / (1 + eps), "mnw"),
        Fact("holds", True, "nearby-efx", "efx"),
    ]
    return inst, allocs, facts


def _thm7_efx(alpha):
    if not 0 < alpha < 1:
        raise ValueError("thm7-efx needs 0 < alpha < 1")
    row = [1, 1 / alpha, 1 / alpha]
    inst = Instance.from_rows([row, row])
    allocs = {"A": _alloc(2, [1], [2, 3])}
    facts = [
        Fact("holds", False, "A", "efx"),
        Fact("efx_factor", alpha, "A"),
        Fact("vefx_factor", alpha / (1 + alpha), "A"),
    ]
    return inst, allocs, facts


def _thm7_vefx(alpha, gamma):
    if not 0 < alpha < 1:
        raise ValueError("thm7-vefx needs 0 < alpha < 1")
    if not gamma > (1 - alpha) / alpha:
        raise ValueError("thm7-vefx needs gamma > (1 - alpha)/alpha")
    row = [1, gamma, (1 - alpha) / alpha]
    inst = Instance.from_rows([row, row])
    allocs = {"A": _alloc(2, [1], [2, 3])}
    # agent 0 reaches EFX by taking g3 (value 1/alpha) unless it already is EFX
    already = gamma <= 1 and alpha >= Fraction(1, 2)
    facts = [
        Fact("vefx_at_least", alpha, "A"),
        Fact("vefx_factor", Fraction(1) if already else alpha, "A"),
        Fact("efx_factor", min(Fraction(1), 1 / gamma), "A"),
    ]
    return inst, allocs, facts


_BUILDERS = {
    "zero-nw": _zero_nw,
    "zero-good": _zero_good,
    "three-value": _three_value,
    "vefx": _vefx,
    "thm7-efx": _thm7_efx,
    "thm7-vefx": _thm7_vefx,
}


def _actual(fx: Fixture, fact: Fact):
    inst = fx.instance
    alloc = fx.allocations.get(fact.alloc) if fact.alloc else None
    if fact.kind == "mnw_key":
        return brute_force_mnw(inst).key
    if fact.kind == "mnw_optima":
        return frozenset(brute_force_mnw(inst, all_optima=True).allocations)
    if fact.kind == "key":
        return mnw_key(inst, alloc)
    if fact.kind == "nash_welfare":
        return nash_welfare(inst, alloc)
    if fact.kind == "holds":
        return check(inst, alloc, fact.notion).holds
    if fact.kind == "witness":
        return check(inst, alloc, fact.notion).witness
    if fact.kind == "efx_factor":
        return efx_factor(inst, alloc)
    if fact.kind in ("vefx_factor", "vefx_at_least"):
        return vefx_factor(inst, alloc).factor
    raise ValueError(f"unknown fact kind {fact.kind!r}")


def verify_fixture(fx: Fixture) -> list[FactCheck]:
    """Recompute every fact of ``fx`` from scratch."""
    out = []
    for fact in fx.facts:
        actual = _actual(fx, fact)
        ok = actual >= fact.expected if fact.kind == "vefx_at_least" else actual == fact.expected
        out.append(FactCheck(fact, actual, ok))
    return out


# --- exhaustive search ----------------------------------------------------------------


@dataclass(frozen=True)
class SearchHit:
    instance: Instance
    key: MnwKey
    failing: tuple[Allocation, ...]  # MNW optima that fail the notion


@dataclass
class SearchResult:
    hits: list[SearchHit]
    examined: int  # canonical instances solved
    cursor: str | None  # where to resume; None once the enumeration is complete

    @property
    def complete(self) -> bool:
        return self.cursor is None


def canonical_columns(rows: Sequence[Sequence]) -> tuple[tuple, ...]:
    """Canonical form under agent and good relabeling.

    For each row order the columns are sorted; the smallest result over all
    row orders is the canonical form.
    """
    n = len(rows)
    m = len(rows[0]) if rows else 0
    best = None
    for perm in itertools.permutations(range(n)):
        cols = tuple(sorted(tuple(rows[i][g] for i in perm) for g in range(m)))
        if best is None or cols < best:
            best = cols
    return best


def _matrix(code: int, values: Sequence[Fraction], n: int, m: int) -> list[list[Fraction]]:
    k = len(values)
    digits = []
    for _ in range(n * m):
        code, d = divmod(code, k)
        digits.append(values[d])
    digits.reverse()
    return [digits[i * m : (i + 1) * m] for i in range(n)]


def _is_canonical(rows) -> bool:
    m = len(rows[0])
    own = tuple(tuple(r[g] for r in rows) for g in range(m))
    return own == canonical_columns(rows)


def parse_cursor(cursor: str | None) -> tuple[int, int]:
    if not cursor:
        return 0, 0
    try:
        m, code = cursor.split(":")
        return int(m), int(code)
    except ValueError:
        raise ValueError(f"bad search cursor {cursor!r}; expected 'GOODS:CODE'") from None


def search_mnw_vs_efx(
    values: Sequence,
    n: int,
    goods: int | Sequence[int],
    budget: int = 10**9,
    cursor: str | None = None,
    notion: str = "efx0",
    threads: int = 1,
) -> SearchResult:
    """Every instance over ``values`` (up to relabeling) with an MNW optimum failing ``notion``.

    ``goods`` is one good count or a range of them.  ``budget`` caps the
    total number of allocations enumerated; when it runs out the partial
    result carries a cursor ``"GOODS:CODE"`` that resumes the enumeration.
    """
    vals = sorted({_frac(v) for v in values})
    if not vals or any(v < 0 for v in vals):
        raise ValueError("need a non-empty set of non-negative values")
    if n < 1:
        raise ValueError("need at least one agent")
    counts = [goods] if isinstance(goods, int) else sorted(set(goods))
    if any(m < 1 for m in counts):
        raise ValueError("good counts must be positive")
    start_m, start_code = parse_cursor(cursor)
    hits: list[SearchHit] = []
    examined = 0
    spent = 0
    for m in counts:
        if m < start_m:
            continue
        first = start_code if m == start_m else 0
        total = len(vals) ** (n * m)
        cost = n**m
        batch: list[tuple[int, list]] = []
        code = first
        while code < total:
            # collect a batch of canonical instances that fits the remaining budget
            batch.clear()
            while code < total and len(batch) < 64 * max(1, threads):
                rows = _matrix(code, vals, n, m)
                if _is_canonical(rows):
                    if spent + cost > budget:
                        break
                    spent += cost
                    batch.append((code, rows))
                code += 1
            for hit in _solve_batch(batch, m, notion, threads):
                hits.append(hit)
            examined += len(batch)
            if code < total and spent + cost > budget:
                return SearchResult(hits, examined, f"{m}:{code}")
    return SearchResult(hits, examined, None)


def _solve_one(rows, m: int, notion: str) -> SearchHit | None:
    inst = Instance(tuple(tuple(r) for r in rows), m)
    res = brute_force_mnw(inst, all_optima=True, budget=10**12)
    failing = tuple(a for a in res.allocations if not check(inst, a, notion).holds)
    return SearchHit(inst, res.key, failing) if failing else None


def _solve_batch(batch, m: int, notion: str, threads: int):
    if threads > 1 and len(batch) > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(lambda item: _solve_one(item[1], m, notion), batch))
    else:
        results = [_solve_one(rows, m, notion) for _, rows in batch]
    return [h for h in results if h is not None]


def contains_up_to_symmetry(hits: Sequence[SearchHit], inst: Instance) -> bool:
    target = canonical_columns(inst.values)
    return any(canonical_columns(h.instance.values) == target for h in hits)

