"""Reduction from 2P2N-3SAT to MNW on three-value instances.

A formula with ``n`` variables and ``m`` clauses becomes an instance with
``3m + 2n`` agents and ``2m + 5n`` goods over the values ``{a, 1, 0}``;
it is satisfiable exactly when some allocation reaches Nash welfare
``U = 2**n * a**(2m + n)``.

Index layout (all 0-based): variable ``i`` owns agents ``T_i = 2i``,
``F_i = 2i + 1`` and goods ``s_{i,k} = 5i + k``; clause ``j`` owns agents
``C_j^t = 2n + 3j + t`` and goods ``p_j = 5n + 2j``, ``q_j = 5n + 2j + 1``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .core import Allocation, Instance, require_valid
from .nash import agent_values, nash_welfare


class FormulaError(ValueError):
    pass


@dataclass(frozen=True)
class Formula2P2N:
    """CNF over variables ``1..var_count``; literals are signed DIMACS integers."""

    var_count: int
    clauses: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        pos = [0] * (self.var_count + 1)
        neg = [0] * (self.var_count + 1)
        for k, clause in enumerate(self.clauses):
            if len(clause) != 3:
                raise FormulaError(f"clause {k + 1} has {len(clause)} literals, expected 3")
            for lit in clause:
                if lit == 0 or abs(lit) > self.var_count:
                    raise FormulaError(f"clause {k + 1}: literal {lit} out of range")
                (pos if lit > 0 else neg)[abs(lit)] += 1
        for x in range(1, self.var_count + 1):
            if pos[x] != 2 or neg[x] != 2:
                raise FormulaError(
                    f"variable {x} occurs {pos[x]} times positively and {neg[x]} times negatively, expected 2 and 2"
                )
        if self.var_count < 1:
            raise FormulaError("formula has no variables")

    @property
    def n(self) -> int:
        return self.var_count

    @property
    def m(self) -> int:
        return len(self.clauses)

    def satisfied_by(self, assignment: Sequence[bool]) -> bool:
        return all(any(_literal_true(lit, assignment) for lit in c) for c in self.clauses)

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.var_count} {len(self.clauses)}"]
        lines.extend(" ".join(str(lit) for lit in c) + " 0" for c in self.clauses)
        return "\n".join(lines) + "\n"


def _literal_true(lit: int, assignment: Sequence[bool]) -> bool:
    value = bool(assignment[abs(lit) - 1])
    return value if lit > 0 else not value


def parse_formula(text: str) -> Formula2P2N:
    """Read DIMACS CNF (``c`` comments, ``p cnf V C`` header, ``0``-terminated clauses)."""
    header = None
    clauses: list[tuple[int, ...]] = []
    current: list[int] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("c") or s.startswith("%"):
            continue
        if s.startswith("p"):
            parts = s.split()
            if len(parts) != 4 or parts[1] != "cnf" or not (parts[2].isdigit() and parts[3].isdigit()):
                raise FormulaError(f"line {lineno}: bad header {s!r}")
            header = (int(parts[2]), int(parts[3]))
            continue
        if header is None:
            raise FormulaError(f"line {lineno}: clause before the 'p cnf' header")
        for tok in s.split():
            try:
                lit = int(tok)
            except ValueError:
                raise FormulaError(f"line {lineno}: bad literal {tok!r}") from None
            if lit == 0:
                clauses.append(tuple(current))
                current = []
            else:
                current.append(lit)
    if header is None:
        raise FormulaError("missing 'p cnf' header")
    if current:
        clauses.append(tuple(current))
    if len(clauses) != header[1]:
        raise FormulaError(f"header announces {header[1]} clauses, found {len(clauses)}")
    return Formula2P2N(header[0], tuple(clauses))


def random_2p2n(var_count: int, rng: random.Random, planted: Sequence[bool] | None = None) -> Formula2P2N:
    """Random 2P2N formula; with ``planted`` it is resampled until that assignment satisfies it."""
    if var_count % 3:
        raise ValueError("2P2N-3SAT needs a multiple of 3 variables (3m = 4n)")
    literals = [s * x for x in range(1, var_count + 1) for s in (1, 1, -1, -1)]
    while True:
        rng.shuffle(literals)
        clauses = tuple(tuple(literals[k : k + 3]) for k in range(0, len(literals), 3))
        f = Formula2P2N(var_count, clauses)
        if planted is None or f.satisfied_by(planted):
            return f


def var_agent(i: int, true_side: bool) -> int:
    return 2 * i if true_side else 2 * i + 1


def var_good(i: int, k: int) -> int:
    return 5 * i + k


@dataclass(frozen=True)
class ReductionOutput:
    formula: Formula2P2N
    instance: Instance
    a: int
    U: int
    agent_roles: tuple[str, ...]
    good_roles: tuple[str, ...]
    literal_good: dict[tuple[int, int], int]  # (clause, position) -> the one variable-good that clause-agent values

    def clause_agent(self, j: int, t: int) -> int:
        return 2 * self.formula.n + 3 * j + t

    def clause_goods(self, j: int) -> tuple[int, int]:
        base = 5 * self.formula.n + 2 * j
        return base, base + 1

    def a_is_large_enough(self) -> bool:
        """``(a + 1)**(2m) < 2 a**(2m)``, i.e. ``a > 1 / (2**(1/(2m)) - 1)``, checked exactly."""
        e = 2 * self.formula.m
        return (self.a + 1) ** e < 2 * self.a**e


def reduce(f: Formula2P2N) -> ReductionOutput:
    """Build the three-value instance, with ``a = 3m``.

    ``3m`` clears the threshold because ``2**(1/(2m)) >= 1 + ln 2/(2m)``
    bounds it by ``2m/ln 2 < 2.9m``.
    """
    n, m = f.n, f.m
    a = 3 * m
    n_agents = 3 * m + 2 * n
    n_goods = 2 * m + 5 * n
    rows = [[0] * n_goods for _ in range(n_agents)]
    agent_roles = [""] * n_agents
    good_roles = [""] * n_goods
    for i in range(n):
        t_agent, f_agent = var_agent(i, True), var_agent(i, False)
        agent_roles[t_agent] = f"T{i + 1}"
        agent_roles[f_agent] = f"F{i + 1}"
        for k in range(5):
            good_roles[var_good(i, k)] = f"s{i + 1},{k}"
        rows[t_agent][var_good(i, 0)] = a
        rows[f_agent][var_good(i, 0)] = a
        rows[t_agent][var_good(i, 1)] = rows[t_agent][var_good(i, 2)] = 1
        rows[f_agent][var_good(i, 3)] = rows[f_agent][var_good(i, 4)] = 1
    unused = {i: {True: [1, 2], False: [3, 4]} for i in range(n)}
    literal_good = {}
    for j, clause in enumerate(f.clauses):
        p, q = 5 * n + 2 * j, 5 * n + 2 * j + 1
        good_roles[p] = f"p{j + 1}"
        good_roles[q] = f"q{j + 1}"
        for t, lit in enumerate(clause):
            c = 2 * n + 3 * j + t
            agent_roles[c] = f"C{j + 1}^{t + 1}"
            rows[c][p] = rows[c][q] = a
            i = abs(lit) - 1
            g = var_good(i, unused[i][lit > 0].pop(0))
            rows[c][g] = 1
            literal_good[(j, t)] = g
    inst = Instance(tuple(tuple(Fraction(v) for v in row) for row in rows), n_goods)
    return ReductionOutput(
        formula=f,
        instance=inst,
        a=a,
        U=2**n * a ** (2 * m + n),
        agent_roles=tuple(agent_roles),
        good_roles=tuple(good_roles),
        literal_good=literal_good,
    )


def allocation_from_assignment(r: ReductionOutput, assignment: Sequence[bool]) -> Allocation:
    """Allocation with Nash welfare at least ``U`` built from a satisfying assignment.

    Each clause hands its designated variable-good to the agent of its first
    true literal and ``p_j``, ``q_j`` to the other two.  Goods left over go
    to the lowest-index agent that values them.
    """
    f = r.formula
    if len(assignment) != f.n:
        raise ValueError(f"assignment has {len(assignment)} entries, formula has {f.n} variables")
    if not f.satisfied_by(assignment):
        raise ValueError("assignment does not satisfy the formula")
    owner: dict[int, int] = {}
    for i in range(f.n):
        if assignment[i]:
            owner[var_good(i, 0)] = var_agent(i, True)
            owner[var_good(i, 3)] = owner[var_good(i, 4)] = var_agent(i, False)
        else:
            owner[var_good(i, 0)] = var_agent(i, False)
            owner[var_good(i, 1)] = owner[var_good(i, 2)] = var_agent(i, True)
    for j, clause in enumerate(f.clauses):
        first = next(t for t, lit in enumerate(clause) if _literal_true(lit, assignment))
        others = [t for t in range(3) if t != first]
        p, q = r.clause_goods(j)
        owner[p] = r.clause_agent(j, others[0])
        owner[q] = r.clause_agent(j, others[1])
        owner[r.literal_good[(j, first)]] = r.clause_agent(j, first)
    inst = r.instance
    for g in range(inst.m):
        if g not in owner:
            owner[g] = next((i for i in range(inst.n) if inst.values[i][g] > 0), 0)
    return Allocation.from_owner([owner[g] for g in range(inst.m)], inst.n)


def _other_valuer(inst: Instance, g: int, exclude: int) -> int:
    return next(i for i in range(inst.n) if i != exclude and inst.values[i][g] > 0)


def normalize_allocation(r: ReductionOutput, alloc: Allocation, max_moves: int | None = None) -> Allocation:
    """Rewrite ``alloc`` without lowering its Nash welfare until

    1. every good sits with an agent that values it,
    2. ``p_j`` and ``q_j`` sit with different clause-agents, and
    3. the holder of ``s_{i,0}`` keeps none of its own unit goods.
    """
    inst = r.instance
    require_valid(inst, alloc)
    f = r.formula
    owner = alloc.owner(inst.m)
    worth = [Fraction(0)] * inst.n
    for g, i in enumerate(owner):
        worth[i] += inst.values[i][g]

    def move(g: int, to: int) -> None:
        frm = owner[g]
        worth[frm] -= inst.values[frm][g]
        worth[to] += inst.values[to][g]
        owner[g] = to

    def rule_valued() -> bool:
        for g, i in enumerate(owner):
            if inst.values[i][g] == 0:
                fans = [k for k in range(inst.n) if inst.values[k][g] > 0]
                if fans:
                    move(g, min(fans, key=lambda k: (worth[k], k)))
                    return True
        return False

    def rule_split_clause_goods() -> bool:
        for j in range(f.m):
            p, q = r.clause_goods(j)
            holder = owner[p]
            if owner[q] != holder:
                continue
            others = [r.clause_agent(j, t) for t in range(3) if r.clause_agent(j, t) != holder]
            poor = [c for c in others if worth[c] == 0]
            move(q, (poor or others)[0])
            return True
        return False

    def rule_unit_goods() -> bool:
        for i in range(f.n):
            holder = owner[var_good(i, 0)]
            if holder == var_agent(i, True):
                ks = (1, 2)
            elif holder == var_agent(i, False):
                ks = (3, 4)
            else:
                continue
            for k in ks:
                g = var_good(i, k)
                if owner[g] == holder:
                    move(g, _other_valuer(inst, g, holder))
                    return True
        return False

    limit = max_moves if max_moves is not None else 4 * inst.m + 10
    for _ in range(limit):
        if not (rule_valued() or rule_split_clause_goods() or rule_unit_goods()):
            break
    else:
        raise RuntimeError("normalization did not reach a fixpoint")
    return Allocation.from_owner(owner, inst.n)


def assignment_from_allocation(r: ReductionOutput, alloc: Allocation) -> list[bool]:
    """Read ``x_i`` from who holds ``s_{i,0}``.

    Satisfaction is only guaranteed when the (normalized) allocation reaches
    Nash welfare ``U``.
    """
    require_valid(r.instance, alloc)
    owner = alloc.owner(r.instance.m)
    out = []
    for i in range(r.formula.n):
        holder = owner[var_good(i, 0)]
        if holder == var_agent(i, True):
            out.append(True)
        elif holder == var_agent(i, False):
            out.append(False)
        else:
            raise ValueError(f"s{i + 1},0 is held by agent {holder}, neither T{i + 1} nor F{i + 1}")
    return out


def group_products(r: ReductionOutput, alloc: Allocation) -> tuple[list[Fraction], list[Fraction]]:
    """Products of agent values per variable pair and per clause triple."""
    vals = agent_values(r.instance, alloc)
    var_products = [vals[var_agent(i, True)] * vals[var_agent(i, False)] for i in range(r.formula.n)]
    clause_products = []
    for j in range(r.formula.m):
        prod = Fraction(1)
        for t in range(3):
            prod *= vals[r.clause_agent(j, t)]
        clause_products.append(prod)
    return var_products, clause_products


def meets_threshold(r: ReductionOutput, alloc: Allocation) -> bool:
    return nash_welfare(r.instance, alloc) >= r.U


def infer_parameters(inst: Instance) -> tuple[int, int, Fraction]:
    """Recover ``(n, m, a)`` of a reduction instance from its shape and largest value."""
    n_agents, n_goods = inst.n, inst.m
    m3, n3 = 5 * n_agents - 2 * n_goods, 3 * n_goods - 2 * n_agents
    if m3 % 11 or n3 % 11 or m3 <= 0 or n3 <= 0:
        raise ValueError(f"{n_agents} agents and {n_goods} goods do not fit 3m+2n agents, 2m+5n goods")
    a = max(v for row in inst.values for v in row)
    return n3 // 11, m3 // 11, a


def threshold_for(inst: Instance) -> Fraction:
    n, m, a = infer_parameters(inst)
    return 2**n * Fraction(a) ** (2 * m + n)
