"""Constructive allocation algorithms.

* :func:`match_and_freeze` builds an EFX0 allocation for two-value instances.
* :func:`modified_round_robin` builds an EFX allocation when every agent's
  values lie within a factor two of each other.
* :func:`perturb_for_efx0` turns EFX0 into EFX by replacing zeros with a
  small enough positive value.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

from .core import Allocation, Instance, classify, format_rational
from .fairness import check
from .matching import BipartiteGraph, max_matching

EXACT_GAP_MAX_GOODS = 20


class InvariantViolation(RuntimeError):
    """An algorithm produced output contradicting its guarantee."""


# --- Match&Freeze -------------------------------------------------------------


@dataclass
class RoundRecord:
    index: int  # 1-based round number
    order: list[int]  # agent order at the start of the round
    active: list[int]  # participating agents, in that order
    remaining: list[int]  # unallocated goods at the start of the round
    matched: dict[int, int]
    fallback: list[tuple[int, int]]
    frozen: list[int]
    rejoin: dict[int, int | None]  # round in which each frozen agent is active again; None = never

    def to_json(self) -> dict:
        return {
            "round": self.index,
            "order": self.order,
            "active": self.active,
            "remaining": self.remaining,
            "matched": {str(i): g for i, g in self.matched.items()},
            "fallback": [list(p) for p in self.fallback],
            "frozen": self.frozen,
            "rejoin": {str(i): r for i, r in self.rejoin.items()},
        }


@dataclass
class MatchFreezeTrace:
    a: Fraction
    b: Fraction
    freeze_rounds: int | None  # None means frozen agents never return
    rounds: list[RoundRecord] = field(default_factory=list)
    freeze_count: list[int] = field(default_factory=list)
    last_a_round: list[int | None] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "a": format_rational(self.a),
            "b": format_rational(self.b),
            "freeze_rounds": self.freeze_rounds,
            "freeze_count": self.freeze_count,
            "last_a_round": self.last_a_round,
            "rounds": [r.to_json() for r in self.rounds],
        }


def two_values(inst: Instance) -> tuple[Fraction, Fraction]:
    """The pair ``(a, b)`` with ``a > b >= 0`` covering every value of ``inst``."""
    vc = classify(inst)
    if vc.values is None or len(vc.values) > 2:
        raise ValueError("Match&Freeze needs an instance with at most two distinct values")
    vals = vc.values
    if len(vals) == 2:
        return vals[1], vals[0]
    if len(vals) == 1 and vals[0] > 0:
        return vals[0], Fraction(0)
    return Fraction(1), Fraction(0)


def match_and_freeze(inst: Instance, validate: bool = True) -> tuple[Allocation, MatchFreezeTrace]:
    """Round-based EFX0 allocation for two-value instances.

    Each round the active agents get one good each: a maximum matching on
    the edges they value ``a``, then the lowest-index remaining good for
    every unmatched agent in list order.  Agents whose gain looks too large
    to some agent stuck with a ``b``-good are frozen for ``floor(a/b - 1)``
    rounds (for good when ``b = 0``) and moved to the back of the list.
    When fewer goods than active agents remain, only the front of the list
    takes part, which puts never-frozen agents first.
    """
    a, b = two_values(inst)
    n, m = inst.n, inst.m
    vals = inst.values
    freeze_rounds = None if b == 0 else math.floor(a / b - 1)
    trace = MatchFreezeTrace(a, b, freeze_rounds, freeze_count=[0] * n)

    order = list(range(n))
    rejoin: list[int | None] = [1] * n
    remaining = list(range(m))
    bundles: list[list[int]] = [[] for _ in range(n)]
    got_in_round: list[dict[int, int]] = []
    r = 0
    while remaining:
        r += 1
        active = [i for i in order if rejoin[i] is not None and rejoin[i] <= r]
        if len(remaining) < len(active):
            active = active[: len(remaining)]
        graph = BipartiteGraph(
            len(active),
            len(remaining),
            tuple(tuple(c for c, g in enumerate(remaining) if vals[i][g] == a) for i in active),
        )
        matched = {active[u]: remaining[c] for u, c in max_matching(graph).pairs.items()}
        taken = set(matched.values())
        free = [g for g in remaining if g not in taken]
        fallback = []
        for i in active:
            if i not in matched and free:
                fallback.append((i, free.pop(0)))
        got = dict(matched)
        got.update(fallback)
        for i, g in got.items():
            bundles[i].append(g)
        record = RoundRecord(r, list(order), active, list(remaining), matched, fallback, [], {})
        remaining = free

        frozen = _freeze_set(vals, a, b, active, got)
        if frozen and len(frozen) == len(active):
            raise InvariantViolation(f"round {r}: every active agent would freeze")
        for i in frozen:
            rejoin[i] = None if freeze_rounds is None else r + freeze_rounds + 1
            trace.freeze_count[i] += 1
            record.rejoin[i] = rejoin[i]
        record.frozen = frozen
        order = [i for i in order if i not in set(frozen)] + frozen
        trace.rounds.append(record)
        got_in_round.append(got)

    last_a: list[int | None] = [None] * n
    for rec, got in zip(trace.rounds, got_in_round):
        for g in got.values():
            for i in range(n):
                if vals[i][g] == a:
                    last_a[i] = rec.index
    trace.last_a_round = last_a
    alloc = Allocation(tuple(tuple(bk) for bk in bundles))
    if validate:
        problems = trace_problems(inst, alloc, trace)
        report = check(inst, alloc, "efx0")
        if not report.holds:
            problems.append(f"output is not EFX0: {report.witness}")
        if problems:
            raise InvariantViolation("; ".join(problems))
    return alloc, trace


def _freeze_set(vals, a, b, active, got) -> list[int]:
    """Agents some ``b``-receiving agent would envy, closed under the ``a``-edges of frozen agents.

    Active agents who received nothing this round take no part.
    """
    holders = [i for i in active if i in got]
    losers = [j for j in holders if vals[j][got[j]] == b]
    frozen = {i for i in holders if any(vals[j][got[i]] == a for j in losers)}
    grew = True
    while grew:
        grew = False
        for i in holders:
            if i not in frozen and any(vals[j][got[i]] == a for j in frozen):
                frozen.add(i)
                grew = True
    return sorted(frozen)


def trace_problems(inst: Instance, alloc: Allocation, trace: MatchFreezeTrace) -> list[str]:
    """Check a Match&Freeze run against the properties its analysis guarantees.

    * every good is handed out exactly once, in at most ``m`` rounds;
    * the freeze set is always a strict subset of the active agents;
    * before its last ``a``-round an agent receives an ``a``-good every round;
    * an agent freezes at most once, only in its last ``a``-round and only
      right after receiving an ``a``-good.
    """
    out = []
    vals = inst.values
    a = trace.a
    handed = []
    for rec in trace.rounds:
        handed.extend(rec.matched.values())
        handed.extend(g for _, g in rec.fallback)
        if rec.frozen and not set(rec.frozen) < set(rec.active):
            out.append(f"round {rec.index}: freeze set {rec.frozen} is not a strict subset of {rec.active}")
    if sorted(handed) != list(range(inst.m)):
        out.append("goods were not each allocated exactly once")
    if len(trace.rounds) > inst.m:
        out.append(f"{len(trace.rounds)} rounds for {inst.m} goods")
    for i in range(inst.n):
        if trace.freeze_count[i] > 1:
            out.append(f"agent {i} froze {trace.freeze_count[i]} times")
        ri = trace.last_a_round[i]
        for rec in trace.rounds:
            got = rec.matched.get(i)
            if got is None:
                got = next((g for j, g in rec.fallback if j == i), None)
            if ri is not None and rec.index < ri and (got is None or vals[i][got] != a):
                out.append(f"agent {i} missed an a-good in round {rec.index} < r_i = {ri}")
            if i in rec.frozen:
                if ri is None or rec.index != ri:
                    out.append(f"agent {i} froze in round {rec.index}, but r_i = {ri}")
                if got is None or vals[i][got] != a:
                    out.append(f"agent {i} froze in round {rec.index} without receiving an a-good")
    return out


# --- modified round-robin -------------------------------------------------------


def ratio_violations(inst: Instance, bound: Fraction = Fraction(2)) -> list[int]:
    """Agents whose values are not all positive and within ``bound`` of each other."""
    vc = classify(inst)
    return [i for i in range(inst.n) if (q := vc.max_ratio(i)) is None or q > bound]


def modified_round_robin(inst: Instance, strict: bool = True, validate: bool = True) -> Allocation:
    """Round-robin picking with the final partial round in reverse order.

    With ``m = k*n + r`` goods, agents ``0..n-1`` each pick a most valued
    remaining good (lowest index on ties) for ``k`` rounds; then agents
    ``n-1, n-2, ..., n-r`` pick once more.  The EFX guarantee needs every
    agent's values to lie in some ``[x, 2x]`` with ``x > 0``; with
    ``strict=False`` a violation only warns.
    """
    bad = ratio_violations(inst)
    if bad:
        msg = f"agents {bad} have values outside a [x, 2x] interval"
        if strict:
            raise ValueError(msg)
        warnings.warn(msg, stacklevel=2)
    n, m = inst.n, inst.m
    k, r = divmod(m, n)
    remaining = list(range(m))
    bundles: list[list[int]] = [[] for _ in range(n)]
    picks = [i for _ in range(k) for i in range(n)] + list(range(n - 1, n - 1 - r, -1))
    for i in picks:
        row = inst.values[i]
        g = max(remaining, key=lambda q: (row[q], -q))
        remaining.remove(g)
        bundles[i].append(g)
    alloc = Allocation(tuple(tuple(bk) for bk in bundles))
    if validate and not bad:
        report = check(inst, alloc, "efx")
        if not report.holds:
            raise InvariantViolation(f"modified round-robin output is not EFX: {report.witness}")
    return alloc


# --- EFX0 through perturbation -----------------------------------------------------


def min_gap(inst: Instance, mode: str = "exact") -> Fraction | None:
    """Smallest positive difference between two bundle values of one agent.

    ``mode="bound"`` returns ``1/L`` for ``L`` the lcm of all denominators,
    a lower bound valid because every bundle value is a multiple of ``1/L``.
    ``mode="exact"`` enumerates all subset sums (``m <= 20``) and returns
    ``None`` if no agent distinguishes any two bundles.
    """
    if mode == "bound":
        return Fraction(1, inst.common_scale)
    if mode != "exact":
        raise ValueError(f"unknown mode {mode!r}")
    if inst.m > EXACT_GAP_MAX_GOODS:
        raise ValueError(f"exact gap needs m <= {EXACT_GAP_MAX_GOODS}, got {inst.m}")
    best = None
    for row, scale in zip(inst.int_rows, inst.row_scale):
        sums = {0}
        for v in row:
            if v:
                sums |= {s + v for s in sums}
        ordered = sorted(sums)
        for lo, hi in zip(ordered, ordered[1:]):
            gap = Fraction(hi - lo, scale)
            if best is None or gap < best:
                best = gap
    return best


@dataclass(frozen=True)
class PerturbedInstance:
    instance: Instance
    epsilon: Fraction | None  # None when there are no goods to perturb
    original: Instance


def perturb_for_efx0(inst: Instance) -> PerturbedInstance:
    """Replace every zero value by ``eps = 1/((m+1) L)``.

    ``eps`` is strictly below ``gap/m`` for the minimum gap, so every EFX
    allocation of the perturbed instance is EFX0 for the original one.
    """
    if inst.m == 0:
        return PerturbedInstance(inst, None, inst)
    eps = min_gap(inst, "bound") / (inst.m + 1)
    rows = tuple(tuple(v if v > 0 else eps for v in row) for row in inst.values)
    return PerturbedInstance(Instance(rows, inst.m), eps, inst)
