from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from fairdiv.core import Allocation, Instance, InvalidAllocation
from fairdiv.fairness import (
    IMPLICATION_CHAIN,
    Notion,
    check,
    efx_factor,
    efx_value,
    holds,
    vefx_factor,
)
from strategies import instance_and_allocation

F = Fraction
ZERO_NW = Instance.from_rows([[1, 0, 0], [1, 0, 0], [0, 1, 1]])
THREE = Instance.from_rows([["9/10", 1, "11/10"], [1, "9/10", "11/10"]])
VEFX = Instance.from_rows([[3, 0, "1/2"], [3, 1, "1/10"]])


def alloc(*bundles):
    return Allocation(tuple(tuple(b) for b in bundles))


class TestCheckExamples:
    def test_zero_nw_good_allocation(self):
        assert check(ZERO_NW, alloc([0], [], [1, 2]), "efx0").holds

    def test_zero_nw_bad_allocation_witness(self):
        rep = check(ZERO_NW, alloc([0, 1], [], [2]), "efx0")
        assert not rep.holds
        assert (rep.witness.envier, rep.witness.envied, rep.witness.good) == (1, 0, 1)

    def test_everything_to_one_agent_fails_efx0(self):
        assert not holds(ZERO_NW, alloc([], [], [0, 1, 2]), "efx0")

    def test_single_agent_is_envy_free(self):
        inst = Instance.from_rows([[1, 2, 3]])
        assert holds(inst, alloc([0, 1, 2]), "ef")

    def test_three_value_optima(self):
        a1 = alloc([1], [0, 2])
        rep = check(THREE, a1, "efx")
        assert (rep.witness.envier, rep.witness.envied, rep.witness.good) == (0, 1, 0)
        a2 = alloc([1, 2], [0])
        rep = check(THREE, a2, "efx")
        assert (rep.witness.envier, rep.witness.envied, rep.witness.good) == (1, 0, 1)
        assert holds(THREE, a1, "ef1") and holds(THREE, a2, "ef1")

    def test_ef_witness_has_no_good(self):
        rep = check(ZERO_NW, alloc([], [0], [1, 2]), "ef")
        assert rep.witness.good is None
        assert rep.to_json()["witness"] == {"envier": 0, "envied": 1, "good": None}

    def test_efx_ignores_zero_goods_but_efx0_does_not(self):
        inst = Instance.from_rows([[1, 0], [1, 1]])
        a = alloc([], [0, 1])
        assert holds(inst, a, "efx")
        assert not holds(inst, a, "efx0")

    def test_invalid_allocation(self):
        with pytest.raises(InvalidAllocation):
            check(ZERO_NW, alloc([0], [1], []), "ef")

    def test_unknown_notion(self):
        with pytest.raises(ValueError):
            check(ZERO_NW, alloc([0], [], [1, 2]), "mms")


@given(instance_and_allocation(max_n=3, max_m=6), st.sampled_from(list(Notion)))
def test_check_matches_definition(pair, notion):
    inst, a = pair
    rep = check(inst, a, notion)
    assert rep.holds == oracles.fair(inst, a, notion.value)
    assert (rep.witness is None) == rep.holds


@given(instance_and_allocation(max_n=3, max_m=6), st.sampled_from(list(Notion)))
def test_witness_really_violates(pair, notion):
    inst, a = pair
    rep = check(inst, a, notion)
    if rep.holds:
        return
    i, j, g = rep.witness.envier, rep.witness.envied, rep.witness.good
    mine = oracles.v(inst, i, a.bundles[i])
    if notion == Notion.EF:
        assert mine < oracles.v(inst, i, a.bundles[j])
    elif notion == Notion.EF1:
        assert all(mine < oracles.v(inst, i, set(a.bundles[j]) - {h}) for h in a.bundles[j])
    else:
        assert g in a.bundles[j]
        assert mine < oracles.v(inst, i, set(a.bundles[j]) - {g})
        if notion == Notion.EFX:
            assert inst.values[i][g] > 0


@given(instance_and_allocation(max_n=3, max_m=6))
def test_implication_chain(pair):
    inst, a = pair
    verdicts = [holds(inst, a, n) for n in IMPLICATION_CHAIN]
    for stronger, weaker in zip(verdicts, verdicts[1:]):
        assert not stronger or weaker


class TestEfxFactor:
    def test_vefx_instance(self):
        assert efx_factor(VEFX, alloc([0, 2], [1])) == F(1, 3)

    def test_efx_factor_one_half(self):
        inst = Instance.from_rows([[1, 2, 2], [1, 2, 2]])
        assert efx_factor(inst, alloc([0], [1, 2])) == F(1, 2)

    def test_zero_own_value_gives_zero(self):
        inst = Instance.from_rows([[0, 1, 1], [1, 1, 1]])
        assert efx_factor(inst, alloc([0], [1, 2])) == 0

    @given(instance_and_allocation(max_n=3, max_m=6))
    def test_matches_definition(self, pair):
        inst, a = pair
        f = efx_factor(inst, a)
        assert f == oracles.efx_factor(inst, a)
        assert 0 <= f <= 1
        assert (f == 1) == holds(inst, a, "efx")


class TestEfxValue:
    def test_vefx_instance_agent_2(self):
        ev = efx_value(VEFX, alloc([0, 2], [1]), 1)
        assert ev.chi == F(11, 10)
        assert ev.witnesses[0] == (2,)
        assert ev.worst == 0

    def test_efx_value_takes_cheapest_good(self):
        inst = Instance.from_rows([[1, 3, 1], [1, 3, 1]])
        ev = efx_value(inst, alloc([0], [1, 2]), 0)
        assert ev.chi == 2
        assert ev.witnesses[1] == (2,)

    def test_no_envy_means_empty_witnesses(self):
        inst = Instance.from_rows([[3, 1, 1], [1, 1, 1]])
        ev = efx_value(inst, alloc([0], [1, 2]), 0)
        assert ev.chi == 3 and ev.witnesses == {1: ()}

    def test_tie_break_prefers_smaller_then_lexicographic_set(self):
        # X = {g2} and X = {g3} both reach value 2; the lexicographically first wins
        inst = Instance.from_rows([[1, 1, 1, 1, 0], [1, 1, 1, 1, 1]])
        ev = efx_value(inst, alloc([0], [1, 2, 3, 4]), 0)
        assert ev.chi == 2
        assert ev.witnesses[1] == (1,)

    def test_subset_cap(self):
        inst = Instance.from_rows([[1] * 5, [1] * 5])
        with pytest.raises(ValueError, match="cap"):
            efx_value(inst, alloc([], [0, 1, 2, 3, 4]), 0, subset_cap=4)

    @given(instance_and_allocation(max_n=3, max_m=6))
    def test_matches_definition_and_witnesses_are_feasible(self, pair):
        inst, a = pair
        for i in range(inst.n):
            ev = efx_value(inst, a, i)
            assert ev.chi == oracles.chi(inst, a, i)
            assert ev.chi >= oracles.v(inst, i, a.bundles[i])
            for j, X in ev.witnesses.items():
                have = oracles.v(inst, i, a.bundles[i] + X)
                left = set(a.bundles[j]) - set(X)
                assert all(have >= oracles.v(inst, i, left - {g}) for g in left)


class TestVefxFactor:
    def test_vefx_instance(self):
        assert vefx_factor(VEFX, alloc([0, 2], [1])).factor == F(10, 11)

    def test_three_value_optima(self):
        for a in (alloc([1], [0, 2]), alloc([1, 2], [0])):
            assert vefx_factor(THREE, a).factor == F(10, 19)

    def test_report_json(self):
        data = vefx_factor(VEFX, alloc([0, 2], [1])).to_json()
        assert data["factor"] == "10/11"
        assert data["agents"][1]["chi"] == "11/10"
        assert data["agents"][1]["witnesses"] == {"0": [2]}

    @given(instance_and_allocation(max_n=3, max_m=6))
    def test_properties(self, pair):
        inst, a = pair
        rep = vefx_factor(inst, a)
        assert rep.factor == oracles.vefx_factor(inst, a)
        alpha = efx_factor(inst, a)
        if alpha > 0:
            assert rep.factor >= alpha / (1 + alpha)
        if holds(inst, a, "efx"):
            assert rep.factor == 1


@given(instance_and_allocation(max_n=3, max_m=5), st.data())
def test_scale_invariance(pair, data):
    inst, a = pair
    agent = data.draw(st.integers(0, inst.n - 1))
    c = data.draw(st.sampled_from([F(1, 3), F(2), F(7, 5)]))
    scaled = inst.scaled_row(agent, c)
    for notion in Notion:
        assert holds(inst, a, notion) == holds(scaled, a, notion)
    before, after = vefx_factor(inst, a), vefx_factor(scaled, a)
    assert before.ratios[agent] == after.ratios[agent]
    assert after.chi[agent] == c * before.chi[agent]
