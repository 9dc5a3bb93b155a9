import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fairdiv.core import (
    Allocation,
    Instance,
    InvalidAllocation,
    ParseError,
    allocation_problem,
    bundle_value,
    classify,
    format_rational,
    instance_to_json,
    parse_allocation,
    parse_instance,
    parse_rational,
    require_valid,
    serialize_allocation,
    serialize_instance,
    validate_allocation,
)
from strategies import instance_and_allocation, instances

F = Fraction
THREE_VALUE = "2 3\n9/10,1,11/10\n1,9/10,11/10\n"


class TestRationals:
    @pytest.mark.parametrize(
        "text, expected",
        [("3", F(3)), ("0", F(0)), ("6/4", F(3, 2)), ("0.5", F(1, 2)), ("0.1", F(1, 10)), (" 2.25 ", F(9, 4)), ("7.", F(7))],
    )
    def test_parse(self, text, expected):
        assert parse_rational(text) == expected

    @pytest.mark.parametrize("text", ["-1", "1/0", "abc", "", "1e3", "0x10", "1/2/3"])
    def test_reject(self, text):
        with pytest.raises(ValueError):
            parse_rational(text)

    def test_decimal_is_not_binary_float(self):
        assert parse_rational("0.1") + parse_rational("0.2") == parse_rational("0.3")

    @given(st.fractions(min_value=0, max_value=1000))
    def test_format_round_trip(self, x):
        assert parse_rational(format_rational(x)) == x


class TestInstanceFormat:
    def test_three_value_example(self):
        inst = parse_instance(THREE_VALUE)
        assert (inst.n, inst.m) == (2, 3)
        assert inst.values[0] == (F(9, 10), F(1), F(11, 10))

    def test_zero_goods(self):
        inst = parse_instance("1 0\n")
        assert (inst.n, inst.m) == (1, 0)
        assert inst.values == ((),)

    def test_comments_and_trailing_blank_lines(self):
        inst = parse_instance("# header comment\n2 2\n1,0.5\n# mid\n0,2\n\n")
        assert inst.values == ((F(1), F(1, 2)), (F(0), F(2)))

    def test_json_mirror(self):
        inst = parse_instance('{"n": 2, "m": 3, "values": [["9/10", "1", "11/10"], ["1", "9/10", "11/10"]]}')
        assert inst == parse_instance(THREE_VALUE)

    @pytest.mark.parametrize(
        "text, line, column",
        [
            ("2 3\n1,2,3\n", 3, 1),  # missing row
            ("2 3\n1,2,3\n1,2\n", 3, 1),  # short row
            ("1 2\n1,-2\n", 2, 3),  # negative value, column of the token
            ("1 2\n1,x\n", 2, 3),
            ("two 3\n", 1, 1),
            ("0 2\n", 1, 1),
        ],
    )
    def test_errors_carry_position(self, text, line, column):
        with pytest.raises(ParseError) as info:
            parse_instance(text)
        assert (info.value.line, info.value.column) == (line, column)

    def test_negative_value_message(self):
        with pytest.raises(ParseError, match="negative"):
            parse_instance("1 1\n-1\n")

    @given(instances(max_n=4, max_m=6))
    def test_serialize_parse_round_trip(self, inst):
        text = serialize_instance(inst)
        assert parse_instance(text) == inst
        assert serialize_instance(parse_instance(text)) == text

    def test_json_round_trip(self):
        import json

        inst = parse_instance(THREE_VALUE)
        assert parse_instance(json.dumps(instance_to_json(inst))) == inst


class TestAllocationFormat:
    def test_text(self):
        a = parse_allocation("0\n\n1 2\n", n=3)
        assert a.bundles == ((0,), (), (1, 2))
        assert serialize_allocation(a) == "0\n\n1 2\n"

    def test_trailing_empty_bundles_may_be_omitted(self):
        assert parse_allocation("1 0\n", n=3).bundles == ((0, 1), (), ())

    def test_json(self):
        assert parse_allocation('{"bundles": [[0], [], [2, 1]]}').bundles == ((0,), (), (1, 2))

    def test_too_many_lines(self):
        with pytest.raises(ParseError):
            parse_allocation("0\n1\n2\n", n=2)

    def test_bad_token(self):
        with pytest.raises(ParseError) as info:
            parse_allocation("0 x\n")
        assert (info.value.line, info.value.column) == (1, 3)

    def test_str_uses_one_based_labels(self):
        assert str(Allocation(((0,), (), (1, 2)))) == "({g1}, ∅, {g2,g3})"


class TestValidation:
    inst = parse_instance("2 3\n1,1,1\n1,1,1\n")

    def test_complete_partition(self):
        assert validate_allocation(self.inst, Allocation(((0,), (1, 2))))

    def test_overlap(self):
        bad = Allocation(((0,), (0, 1)))
        assert not validate_allocation(self.inst, bad)
        assert "held by agents" in allocation_problem(self.inst, bad)

    def test_incomplete(self):
        bad = Allocation(((0,), (1,)))
        assert not validate_allocation(self.inst, bad)
        with pytest.raises(InvalidAllocation, match="good 2 is not allocated"):
            require_valid(self.inst, bad)

    def test_wrong_agent_count_and_range(self):
        assert not validate_allocation(self.inst, Allocation(((0, 1, 2),)))
        assert not validate_allocation(self.inst, Allocation(((0, 1, 5), ())))

    def test_instance_invariants(self):
        with pytest.raises(ValueError):
            Instance(((F(1), F(2)), (F(1),)))
        with pytest.raises(ValueError):
            Instance(((F(-1),),))
        with pytest.raises(ValueError):
            Instance(())


class TestBundleValue:
    inst = parse_instance(THREE_VALUE)

    def test_examples(self):
        assert bundle_value(self.inst, 0, [0, 2]) == 2
        assert bundle_value(self.inst, 1, [0, 2]) == F(21, 10)
        assert bundle_value(self.inst, 0, []) == 0
        ones = Instance.from_rows([[1] * 5])
        assert bundle_value(ones, 0, range(5)) == 5

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            bundle_value(self.inst, 2, [0])
        with pytest.raises(IndexError):
            bundle_value(self.inst, 0, [3])

    @given(instance_and_allocation(max_n=3, max_m=6))
    def test_additive(self, pair):
        inst, alloc = pair
        for i in range(inst.n):
            a, b = alloc.bundles[0], alloc.bundles[-1] if inst.n > 1 else ()
            assert bundle_value(inst, i, a + b) == bundle_value(inst, i, a) + bundle_value(inst, i, b)


class TestClassify:
    def test_binary(self):
        vc = classify(Instance.from_rows([[1, 0], [0, 1]]))
        assert vc.tag == "binary"
        assert vc.values == (0, 1)

    def test_two_value(self):
        vc = classify(Instance.from_rows([[2, 1], [1, 2]]))
        assert vc.tag == "kvalue" and vc.values == (1, 2)

    def test_three_value_example(self):
        vc = classify(parse_instance(THREE_VALUE))
        assert vc.tag == "kvalue"
        assert vc.values == (F(9, 10), 1, F(11, 10))
        assert vc.intervals == ((F(9, 10), F(11, 10)), (F(9, 10), F(11, 10)))

    def test_cap_interval_and_general(self):
        rows = [[1, 2, 3, 4, 5], [6, 7, 8, 9, 10]]
        assert classify(Instance.from_rows(rows), kvalue_cap=8).tag == "interval"
        assert classify(Instance.from_rows(rows), kvalue_cap=10).tag == "kvalue"
        rows[0][0] = 0
        assert classify(Instance.from_rows(rows), kvalue_cap=8).tag == "general"

    @given(instances(values=st.sampled_from([F(0), F(1)])))
    def test_binary_is_always_binary(self, inst):
        assert classify(inst).tag == "binary"


def test_allocation_json_list_round_trip():
    from fairdiv.core import allocation_to_json

    a = Allocation(((0, 2), (), (1,)))
    assert parse_allocation(json.dumps(allocation_to_json(a)), 3) == a
    assert parse_allocation(json.dumps({"bundles": allocation_to_json(a)}), 3) == a
