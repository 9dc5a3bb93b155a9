"""Envy-based fairness: EF, EF1, EFX, EFX0, the alpha-EFX factor and the EFX-value."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from . import kernels
from .core import Allocation, Instance, format_rational, require_valid

DEFAULT_SUBSET_CAP = 22


class Notion(str, Enum):
    EF = "ef"
    EF1 = "ef1"
    EFX = "efx"
    EFX0 = "efx0"

    @property
    def label(self) -> str:
        return {"ef": "EF", "ef1": "EF1", "efx": "EFX", "efx0": "EFX0"}[self.value]


# strongest first: each notion implies every later one
IMPLICATION_CHAIN = (Notion.EF, Notion.EFX0, Notion.EFX, Notion.EF1)


@dataclass(frozen=True)
class Witness:
    envier: int
    envied: int
    good: int | None  # None for plain envy (EF)


@dataclass(frozen=True)
class FairnessReport:
    notion: Notion
    holds: bool
    witness: Witness | None = None

    def to_json(self) -> dict:
        w = self.witness
        return {
            "notion": self.notion.value,
            "holds": self.holds,
            "witness": None if w is None else {"envier": w.envier, "envied": w.envied, "good": w.good},
        }


def check(inst: Instance, alloc: Allocation, notion: Notion | str) -> FairnessReport:
    """Evaluate ``notion`` exactly.

    On failure the witness is the first violating ``(i, j, g)`` in ascending
    order of envier, envied agent and good.
    """
    notion = Notion(notion)
    require_valid(inst, alloc)
    hit = kernels.first_violation(inst.int_rows, alloc.owner(inst.m), kernels.NOTION_CODES[notion.value])
    if hit is None:
        return FairnessReport(notion, True)
    i, j, g = hit
    return FairnessReport(notion, False, Witness(i, j, None if g < 0 else g))


def holds(inst: Instance, alloc: Allocation, notion: Notion | str) -> bool:
    return check(inst, alloc, notion).holds


def _bundle_worths(inst: Instance, alloc: Allocation) -> list[list[Fraction]]:
    """``w[i][j] = v_i(A_j)``."""
    return [[sum((row[g] for g in b), Fraction(0)) for b in alloc.bundles] for row in inst.values]


def efx_factor(inst: Instance, alloc: Allocation) -> Fraction:
    """Largest alpha in [0, 1] for which ``alloc`` is alpha-EFX.

    Only the smallest positively valued good of each bundle can bind, so
    each ordered pair is settled by one ratio.  Pairs where dropping that
    good leaves nothing of value contribute 1.
    """
    require_valid(inst, alloc)
    worth = _bundle_worths(inst, alloc)
    alpha = Fraction(1)
    for i, row in enumerate(inst.values):
        mine = worth[i][i]
        for j, b in enumerate(alloc.bundles):
            if i == j:
                continue
            positive = [row[g] for g in b if row[g] > 0]
            if not positive:
                continue
            rest = worth[i][j] - min(positive)
            if rest > 0 and mine < alpha * rest:
                alpha = mine / rest
    return alpha


@dataclass(frozen=True)
class EfxValue:
    """EFX-value of one agent: ``chi`` and the minimal augmenting set per other agent."""

    agent: int
    chi: Fraction
    witnesses: dict[int, tuple[int, ...]]
    worst: int | None  # the other agent attaining chi


def efx_value(inst: Instance, alloc: Allocation, i: int, subset_cap: int = DEFAULT_SUBSET_CAP) -> EfxValue:
    """Exhaustive search for the EFX-value of agent ``i``.

    For each ``j != i`` every subset ``X`` of ``A_j`` is tried; ``X`` is
    feasible when ``v_i(A_i + X)`` is at least ``v_i(A_j - X - g)`` for every
    remaining ``g``.  Among feasible sets the one of least value wins, then
    the smaller set, then the lexicographically smaller one.
    """
    require_valid(inst, alloc)
    if not 0 <= i < inst.n:
        raise IndexError(f"agent {i} out of range for n={inst.n}")
    for j, b in enumerate(alloc.bundles):
        if j != i and len(b) > subset_cap:
            raise ValueError(f"bundle of agent {j} has {len(b)} goods, above the subset-search cap {subset_cap}")
    row = inst.int_rows[i]
    scale = inst.row_scale[i]
    mine = sum(row[g] for g in alloc.bundles[i])
    best_chi = None
    worst = None
    witnesses: dict[int, tuple[int, ...]] = {}
    for j, b in enumerate(alloc.bundles):
        if j == i:
            continue
        val, subset = _min_augmentation(row, mine, b)
        witnesses[j] = subset
        if best_chi is None or val > best_chi:
            best_chi = val
            worst = j
    if best_chi is None:
        best_chi = mine
    return EfxValue(i, Fraction(best_chi, scale), witnesses, worst)


def _min_augmentation(row, mine, bundle):
    vals = [row[g] for g in bundle]
    k = len(vals)
    total = sum(vals)
    best = None
    for mask in range(1 << k):
        taken = 0
        size = 0
        least_left = None
        for t in range(k):
            if mask >> t & 1:
                taken += vals[t]
                size += 1
            elif least_left is None or vals[t] < least_left:
                least_left = vals[t]
        have = mine + taken
        if least_left is not None and have < total - taken - least_left:
            continue
        subset = tuple(bundle[t] for t in range(k) if mask >> t & 1)
        key = (have, size, subset)
        if best is None or key < best:
            best = key
    return best[0], best[2]


@dataclass(frozen=True)
class VefxReport:
    chi: tuple[Fraction, ...]
    witness_agent: tuple[int | None, ...]
    witnesses: tuple[dict[int, tuple[int, ...]], ...]
    ratios: tuple[Fraction, ...]
    factor: Fraction

    def to_json(self) -> dict:
        return {
            "factor": format_rational(self.factor),
            "agents": [
                {
                    "chi": format_rational(c),
                    "ratio": format_rational(r),
                    "worst": w,
                    "witnesses": {str(j): list(x) for j, x in ws.items()},
                }
                for c, r, w, ws in zip(self.chi, self.ratios, self.witness_agent, self.witnesses)
            ],
        }


def vefx_factor(inst: Instance, alloc: Allocation, subset_cap: int = DEFAULT_SUBSET_CAP) -> VefxReport:
    """Largest alpha such that every agent holds at least alpha times its EFX-value."""
    values = [efx_value(inst, alloc, i, subset_cap) for i in range(inst.n)]
    ratios = []
    for i, ev in enumerate(values):
        own = sum((inst.values[i][g] for g in alloc.bundles[i]), Fraction(0))
        ratios.append(Fraction(1) if ev.chi == 0 else own / ev.chi)
    return VefxReport(
        chi=tuple(ev.chi for ev in values),
        witness_agent=tuple(ev.worst for ev in values),
        witnesses=tuple(ev.witnesses for ev in values),
        ratios=tuple(ratios),
        factor=min(ratios),
    )
