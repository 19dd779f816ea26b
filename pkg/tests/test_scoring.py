import pytest

from fractions import Fraction

from i3audit import ClassScheme, Dataset, EmptyReferenceSetError, Paper
from i3audit.evolution import (Delta, apply_delta, example_a, example_a_variant, example_b_endpoints, replay,
                               EXAMPLE_A1)
from i3audit.scoring import (CountingRule, PolicyError, PolicyKind, RankBasis, ScoringPolicy, TiePolicy, i3,
                             fractional_weight, per_owner_report, r_indicator, rank_owners, weigh, weights_table)
from i3audit.util import format_rational

SCHEME = ClassScheme.six_pr()
STRICT_LOWEST = ScoringPolicy(counting="strict-less", ties="lowest")
STRICT_HIGHEST = ScoringPolicy(counting="strict-less", ties="highest")
STRICT_AVERAGE_RANK = ScoringPolicy(counting="strict-less", ties="average-rank")
STRICT_AVERAGE_WEIGHT = ScoringPolicy(counting="strict-less", ties="average-weight")
INCLUSIVE_LOWEST = ScoringPolicy(counting="inclusive", ties="lowest")
INCLUSIVE_AVERAGE_WEIGHT = ScoringPolicy(counting="inclusive", ties="average-weight")
PLUS_LOWEST = ScoringPolicy(counting="plus-0.9", ties="lowest")
FRACTIONAL = ScoringPolicy(kind="fractional")


def a_cases():
    return replay(example_a())


def test_policy_labels_and_defaults():
    assert ScoringPolicy() == STRICT_LOWEST
    assert ScoringPolicy.default() == STRICT_LOWEST
    assert STRICT_AVERAGE_WEIGHT.label == "strict-less/average-weight"
    assert FRACTIONAL.label == "fractional"
    assert FRACTIONAL.counting is None and FRACTIONAL.ties is None
    assert FRACTIONAL.kind == PolicyKind.FRACTIONAL
    assert str(PLUS_LOWEST) == "plus-0.9/lowest"


def test_policy_from_names():
    assert ScoringPolicy.from_names("inclusive", "average-weight") == INCLUSIVE_AVERAGE_WEIGHT
    assert ScoringPolicy.from_names("fractional") == FRACTIONAL
    assert ScoringPolicy.from_names(ties="highest") == STRICT_HIGHEST

    with pytest.raises(PolicyError, match="tie policy"):
        ScoringPolicy.from_names("fractional", "lowest")
    with pytest.raises(PolicyError, match="counting rule"):
        ScoringPolicy.from_names("rounded")
    with pytest.raises(PolicyError, match="tie policy"):
        ScoringPolicy.from_names("strict-less", "random")


def test_weights_table_case_a1():
    rows = weights_table(a_cases()[0], SCHEME, STRICT_LOWEST)
    assert list(rows) == [0, 1, 3, 5, 7]
    assert [row["n"] for row in rows.values()] == [20, 10, 6, 2, 2]
    assert [row["c_n"] for row in rows.values()] == [0, 10, 18, 10, 14]
    assert [row["n_less"] for row in rows.values()] == [0, 20, 30, 36, 38]
    assert [row["percentage"] for row in rows.values()] == [0, 50, 75, 90, 95]
    assert [row["class"] for row in rows.values()] == [1, 2, 3, 4, 5]
    assert [row["weight"] for row in rows.values()] == [1, 2, 3, 4, 5]
    assert [row["w_n"] for row in rows.values()] == [20, 20, 18, 8, 10]


def test_case_a1_and_a2():
    a1, a2 = a_cases()[:2]
    assert i3(a1, SCHEME, STRICT_LOWEST) == 76
    assert r_indicator(a1, SCHEME, STRICT_LOWEST) == Fraction(19, 10)

    singly = [wp for wp in weigh(a2, SCHEME, STRICT_LOWEST) if wp.paper.citations == 1]
    assert len(singly) == 11
    assert {wp.percentage for wp in singly} == {Fraction(95, 2)}
    assert {(wp.class_index, wp.weight) for wp in singly} == {(1, 1)}
    assert i3(a2, SCHEME, STRICT_LOWEST) == 66
    assert r_indicator(a2, SCHEME, STRICT_LOWEST) == Fraction(33, 20)


def test_case_a1_citation_decreases_i3():
    a1, a2 = a_cases()[:2]
    assert a2.total_citations == a1.total_citations + 1
    assert i3(a2, SCHEME, STRICT_LOWEST) < i3(a1, SCHEME, STRICT_LOWEST)


def test_example_a_series():
    cases = a_cases()
    assert [i3(case, SCHEME, STRICT_LOWEST) for case in cases] == [76, 66, 67, 61, 62, 60, 61, 59, 60]
    r_values = [r_indicator(case, SCHEME, STRICT_LOWEST) for case in cases]
    assert r_values[2:4] == [Fraction(67, 40), Fraction(61, 40)]
    assert r_values[6:8] == [Fraction(61, 40), Fraction(59, 40)]
    assert [format_rational(r, 2, "ROUND_HALF_UP") for r in r_values] == \
        ["1.90", "1.65", "1.68", "1.53", "1.55", "1.50", "1.53", "1.48", "1.50"]


def test_average_weight_example_a():
    cases = a_cases()
    assert all(i3(case, SCHEME, STRICT_AVERAGE_WEIGHT) == 76 for case in cases)
    assert all(r_indicator(case, SCHEME, STRICT_AVERAGE_WEIGHT) == Fraction(19, 10) for case in cases)

    singly = [wp for wp in weigh(cases[1], SCHEME, STRICT_AVERAGE_WEIGHT) if wp.paper.citations == 1]
    assert {wp.weight for wp in singly} == {Fraction(21, 11)}
    # provisional ranks span classes 1 and 2
    assert {wp.class_index for wp in singly} == {None}


def test_inclusive_average_weight_example_a():
    for case in a_cases():
        assert i3(case, SCHEME, INCLUSIVE_AVERAGE_WEIGHT) == 77
        assert r_indicator(case, SCHEME, INCLUSIVE_AVERAGE_WEIGHT) == Fraction(77, 40)
    assert format_rational(Fraction(77, 40)) == "1.9250"


def test_highest_rank():
    assert i3(a_cases()[1], SCHEME, STRICT_HIGHEST) == 77
    singly = [wp for wp in weigh(a_cases()[1], SCHEME, STRICT_HIGHEST) if wp.paper.citations == 1]
    assert {wp.percentage for wp in singly} == {Fraction(145, 2)}
    assert i3(example_a_variant(21, 9), SCHEME, STRICT_HIGHEST) == 96


def test_average_rank():
    variant = example_a_variant(12, 18)
    rows = weights_table(variant, SCHEME, STRICT_AVERAGE_RANK)
    assert rows[1]["percentage"] == 51
    assert rows[1]["weight"] == 2
    assert rows[0]["w_n"] + rows[1]["w_n"] == 12 + 36
    assert i3(variant, SCHEME, STRICT_AVERAGE_RANK) == 84

    cited = apply_delta(variant, Delta.add_citation("_", 0))
    rows = weights_table(cited, SCHEME, STRICT_AVERAGE_RANK)
    assert rows[1]["n"] == 19
    assert rows[1]["percentage"] == Fraction(945, 19)
    assert rows[1]["weight"] == 1
    assert rows[0]["w_n"] + rows[1]["w_n"] == 11 + 19
    assert i3(cited, SCHEME, STRICT_AVERAGE_RANK) == 66


def test_fractional_top_paper_weights():
    assert fractional_weight(40, 40, SCHEME) == Fraction(27, 5)
    assert fractional_weight(40, 40, SCHEME) / 40 == Fraction(135, 1000)
    assert fractional_weight(16, 16, SCHEME) / 16 == Fraction(31, 100)
    assert fractional_weight(1, 40, SCHEME) == 1
    with pytest.raises(ValueError):
        fractional_weight(0, 40, SCHEME)


def test_fractional_example_a():
    for case in a_cases():
        assert r_indicator(case, SCHEME, FRACTIONAL) == Fraction(191, 100)
    top = [wp for wp in weigh(a_cases()[0], SCHEME, FRACTIONAL) if wp.paper.citations == 7]
    # ranks 39 and 40 share the mean of 5 and 27/5
    assert {wp.weight for wp in top} == {Fraction(26, 5)}
    assert {wp.class_index for wp in top} == {None}


def test_top_paper_contributions():
    a8, a9 = a_cases()[7:9]
    top_a9 = [wp for wp in weigh(a9, SCHEME, STRICT_LOWEST) if wp.paper.citations == 8]
    assert top_a9[0].weight / 40 == Fraction(1, 8)
    top_a9 = [wp for wp in weigh(a9, SCHEME, INCLUSIVE_LOWEST) if wp.paper.citations == 8]
    assert top_a9[0].weight / 40 == Fraction(3, 20)
    top_a9 = [wp for wp in weigh(a9, SCHEME, FRACTIONAL) if wp.paper.citations == 8]
    assert top_a9[0].weight / 40 == Fraction(27, 200)

    top_a8 = [wp for wp in weigh(a8, SCHEME, STRICT_LOWEST) if wp.paper.citations == 7]
    assert len(top_a8) == 3 and top_a8[0].weight == 4


def test_plus_point_nine_pathology():
    dataset = Dataset.from_histogram("P", {0: 109, 1: 1, 2: 1})
    weighted = {wp.paper.citations: wp for wp in weigh(dataset, SCHEME, PLUS_LOWEST)}
    assert weighted[1].percentage == Fraction(10990, 111)
    assert weighted[1].percentage > 99
    assert weighted[1].class_index == 6

    strict = {wp.paper.citations: wp for wp in weigh(dataset, SCHEME, STRICT_LOWEST)}
    assert strict[1].class_index == 5


def test_plus_point_nine_composes_with_tie_policies():
    dataset = Dataset.from_histogram("P", {0: 10, 1: 10})
    for ties in TiePolicy:
        policy = ScoringPolicy(counting=CountingRule.PLUS_POINT_NINE, ties=ties)
        assert len(weigh(dataset, SCHEME, policy)) == 20
    highest = ScoringPolicy(counting="plus-0.9", ties="highest")
    assert weigh(dataset, SCHEME, highest)[0].percentage == Fraction(99, 2)


def test_weigh_empty_dataset():
    with pytest.raises(EmptyReferenceSetError):
        weigh(Dataset(), SCHEME, STRICT_LOWEST)


def test_single_uncited_paper():
    dataset = Dataset(papers=[Paper(id=1)])
    for policy in (STRICT_LOWEST, STRICT_HIGHEST, STRICT_AVERAGE_RANK, STRICT_AVERAGE_WEIGHT):
        assert i3(dataset, SCHEME, policy) == 1
    # a lone paper is also the most cited one
    assert i3(dataset, SCHEME, INCLUSIVE_LOWEST) == 6
    assert i3(dataset, SCHEME, PLUS_LOWEST) == 4
    assert i3(dataset, SCHEME, FRACTIONAL) == Fraction(191, 100)


def test_example_b_anchor():
    b1, _, _ = example_b_endpoints()
    report = per_owner_report(b1, SCHEME, STRICT_LOWEST)
    assert report.total_i3 == 19
    assert report.total_r == Fraction(19, 15)
    assert format_rational(report.total_r, 2) == "1.27"
    assert {owner: ind.i3 for owner, ind in report.per_owner.items()} == {"H": 8, "L": 7, "M": 4}

    b2 = b1.add_paper("N", label="B2")
    report = per_owner_report(b2, SCHEME, STRICT_LOWEST)
    assert report.total_i3 == 28
    assert report.total_r == Fraction(7, 4)
    weights = {wp.paper.owner: wp.weight for wp in weigh(b2, SCHEME, STRICT_LOWEST)}
    assert weights == {"H": 3, "M": 2, "L": 1, "N": 1}


def test_example_b1_average_weight_ranking():
    b1, _, _ = example_b_endpoints()
    weights = {wp.paper.owner: wp.weight for wp in weigh(b1, SCHEME, STRICT_AVERAGE_WEIGHT)}
    assert weights == {"H": 3, "M": Fraction(7, 4), "L": 1}

    by_i3 = per_owner_report(b1, SCHEME, STRICT_AVERAGE_WEIGHT, rank_by="i3")
    assert by_i3.rank_by == RankBasis.I3
    assert by_i3.per_owner["M"].i3 == by_i3.per_owner["L"].i3 == 7
    assert {owner: ind.rank for owner, ind in by_i3.per_owner.items()} == \
        {"H": 1, "L": Fraction(5, 2), "M": Fraction(5, 2)}
    assert by_i3.ranked_owners() == ["H", "L", "M"]

    by_r = per_owner_report(b1, SCHEME, STRICT_AVERAGE_WEIGHT, rank_by="r")
    assert {owner: ind.rank for owner, ind in by_r.per_owner.items()} == {"H": 1, "M": 2, "L": 3}


def test_rank_owners():
    assert rank_owners({"a": Fraction(3), "b": Fraction(2), "c": Fraction(2), "d": Fraction(1)}) == \
        {"a": 1, "b": Fraction(5, 2), "c": Fraction(5, 2), "d": 4}
    assert rank_owners({"a": Fraction(1), "b": Fraction(1), "c": Fraction(1)}) == {"a": 2, "b": 2, "c": 2}
    assert rank_owners({}) == {}


def test_report_unattributed_owner_is_not_ranked():
    dataset = Dataset.from_records([{"id": 1, "owner": "_", "citations": 0},
                                    {"id": 2, "owner": "X", "citations": 1},
                                    {"id": 3, "owner": "Y", "citations": 4}], label="mixed")
    report = per_owner_report(dataset, SCHEME, STRICT_LOWEST)
    assert report.per_owner["_"].rank is None
    assert report.per_owner["Y"].rank == 1 and report.per_owner["X"].rank == 2
    assert sum(ind.i3 for ind in report.per_owner.values()) == report.total_i3
    assert sum(ind.share for ind in report.per_owner.values()) == report.total_r
    assert report.ranked_owners() == ["Y", "X"]


def test_report_json_and_print(capsys):
    report = per_owner_report(a_cases()[0], SCHEME, STRICT_LOWEST)
    data = report.json()
    assert data["total_i3"] == {"num": 76, "den": 1, "decimal": "76"}
    assert data["total_r"] == {"num": 19, "den": 10, "decimal": "1.9000"}
    assert data["policy"] == "strict-less/lowest"
    assert data["rank_by"] == "r"
    assert data["per_owner"]["_"]["rank"] is None
    assert '"num": 76' in report.json(string=True)

    report.print()
    out = capsys.readouterr().out
    assert "I3 = 76" in out
    assert "R = 1.9000" in out
    assert "strict-less/lowest" in out


def test_defaults_come_from_configuration():
    a1 = a_cases()[0]
    assert i3(a1) == 76
    assert per_owner_report(a1) == per_owner_report(a1, SCHEME, STRICT_LOWEST, "r")


def test_rank_by_validation():
    with pytest.raises(PolicyError):
        per_owner_report(a_cases()[0], SCHEME, STRICT_LOWEST, rank_by="h")


def test_example_a1_matches_builtin_histogram():
    assert a_cases()[0] == Dataset.from_histogram("A1", EXAMPLE_A1)
