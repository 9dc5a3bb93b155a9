"""Nash welfare, the refined MNW objective, exact MNW by enumeration, and binary MNW."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from . import kernels
from .core import (
    Allocation,
    BudgetExceeded,
    Instance,
    bundle_value,
    classify,
    format_rational,
    require_valid,
)
from .matching import BipartiteGraph, max_matching

DEFAULT_BUDGET = 2 * 10**7


@dataclass(frozen=True, order=True)
class MnwKey:
    """Lexicographic objective: agents with positive value, then the product of their values."""

    positive_count: int
    product: Fraction

    def to_json(self) -> dict:
        return {"positive_count": self.positive_count, "product": format_rational(self.product)}


@dataclass(frozen=True)
class MnwResult:
    key: MnwKey
    allocations: tuple[Allocation, ...]
    search_space_size: int


def agent_values(inst: Instance, alloc: Allocation) -> list[Fraction]:
    return [bundle_value(inst, i, b) for i, b in enumerate(alloc.bundles)]


def nash_welfare(inst: Instance, alloc: Allocation) -> Fraction:
    require_valid(inst, alloc)
    out = Fraction(1)
    for v in agent_values(inst, alloc):
        out *= v
    return out


def mnw_key(inst: Instance, alloc: Allocation) -> MnwKey:
    require_valid(inst, alloc)
    count = 0
    prod = Fraction(1)
    for v in agent_values(inst, alloc):
        if v > 0:
            count += 1
            prod *= v
    return MnwKey(count, prod)


def complete_with_zero_goods(inst: Instance, partial: Allocation) -> Allocation:
    """Hand every good nobody values to one least-off agent (lowest index on ties).

    ``partial`` must allocate exactly the goods that someone values positively.
    """
    positive = inst.positive_goods()
    if partial.n != inst.n or partial.goods() != positive:
        raise ValueError("partial allocation must cover exactly the positively valued goods")
    pos_set = set(positive)
    zero = [g for g in range(inst.m) if g not in pos_set]
    if not zero:
        return partial
    vals = agent_values(inst, partial)
    poorest = vals.index(min(vals))
    bundles = list(partial.bundles)
    bundles[poorest] = bundles[poorest] + tuple(zero)
    return Allocation(tuple(bundles))


def _ranges(total: int, parts: int) -> list[tuple[int, int]]:
    parts = max(1, min(parts, total))
    step, extra = divmod(total, parts)
    out = []
    lo = 0
    for p in range(parts):
        hi = lo + step + (1 if p < extra else 0)
        out.append((lo, hi))
        lo = hi
    return out


def brute_force_mnw(
    inst: Instance,
    all_optima: bool = False,
    budget: int = DEFAULT_BUDGET,
    threads: int = 1,
    use_compiled: bool = True,
) -> MnwResult:
    """Exact MNW by enumerating every assignment of the positively valued goods.

    The optima of the refined objective are then completed with the zero-valued
    goods.  Without ``all_optima`` only the lexicographically first optimum
    (by owner vector) is returned.  ``budget`` bounds the number of
    assignments enumerated, ``n`` to the power of the positive-good count.
    """
    positive = inst.positive_goods()
    n, k = inst.n, len(positive)
    space = n**k
    if space > budget:
        raise BudgetExceeded(f"{n}^{k} = {space} assignments exceed the budget of {budget}")
    scale = inst.common_scale
    vals = [[int(row[g] * scale) for g in positive] for row in inst.values]
    chunks = _ranges(space, threads)
    if len(chunks) == 1:
        best = tuple(kernels.mnw_best(vals, 0, space, use_compiled))
    else:
        with ThreadPoolExecutor(len(chunks)) as pool:
            parts = pool.map(lambda r: tuple(kernels.mnw_best(vals, r[0], r[1], use_compiled)), chunks)
            best = max(parts)
    count, prod = best
    codes = kernels.mnw_collect(vals, 0, space, count, prod, use_compiled)
    if not all_optima:
        codes = codes[:1]
    allocations = []
    for code in codes:
        owner = kernels.decode(code, n, k)
        partial = Allocation.from_owner(owner, n, positive)
        allocations.append(complete_with_zero_goods(inst, partial))
    key = MnwKey(count, Fraction(prod, scale**count))
    return MnwResult(key, tuple(allocations), space)


# --- binary instances -------------------------------------------------------


def _likes(inst: Instance, agent: int, good: int) -> bool:
    return inst.values[agent][good] == 1


def binary_mnw(inst: Instance) -> Allocation:
    """MNW allocation of a binary instance in polynomial time.

    A maximum matching on the value-1 edges fixes which agents can get
    positive value; a greedy balancing pass then evens out their bundle
    sizes along alternating paths; zero-valued goods go last.
    """
    if classify(inst).tag != "binary":
        raise ValueError("binary_mnw needs a binary (0/1) instance")
    positive = inst.positive_goods()
    col = {g: c for c, g in enumerate(positive)}
    graph = BipartiteGraph(
        inst.n,
        len(positive),
        tuple(tuple(col[g] for g in positive if _likes(inst, i, g)) for i in range(inst.n)),
    )
    matching = max_matching(graph)
    agents = sorted(matching.pairs)
    bundles: dict[int, list[int]] = {i: [] for i in range(inst.n)}
    held = set()
    for i, c in matching.pairs.items():
        bundles[i].append(positive[c])
        held.add(positive[c])
    # every positive good is liked by some matched agent, else the matching could grow
    for g in positive:
        if g not in held:
            owner = next(i for i in agents if _likes(inst, i, g))
            bundles[owner].append(g)
    _balance(inst, agents, bundles)
    partial = Allocation(tuple(tuple(bundles[i]) for i in range(inst.n)))
    return complete_with_zero_goods(inst, partial)


def _balance(inst: Instance, agents: list[int], bundles: dict[int, list[int]]) -> None:
    """Shift goods along alternating paths until no path runs from an agent to one
    holding at least two fewer goods.  Each shift lowers the sum of squared
    bundle sizes, so this terminates."""
    while True:
        path = None
        for src in sorted(agents, key=lambda i: (-len(bundles[i]), i)):
            path = _improving_path(inst, agents, bundles, src)
            if path is not None:
                break
        if path is None:
            return
        # path: [(from_agent, good, to_agent), ...]
        for frm, g, to in path:
            bundles[frm].remove(g)
            bundles[to].append(g)


def _improving_path(inst, agents, bundles, src):
    target = len(bundles[src]) - 2
    parent: dict[int, tuple[int, int] | None] = {src: None}
    frontier = [src]
    while frontier:
        nxt = []
        for x in frontier:
            for g in sorted(bundles[x]):
                for y in agents:
                    if y in parent or not _likes(inst, y, g):
                        continue
                    parent[y] = (x, g)
                    if len(bundles[y]) <= target:
                        steps = []
                        cur = y
                        while parent[cur] is not None:
                            p, pg = parent[cur]
                            steps.append((p, pg, cur))
                            cur = p
                        return list(reversed(steps))
                    nxt.append(y)
        frontier = nxt
    return None
