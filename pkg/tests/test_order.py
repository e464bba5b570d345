import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from docstruct.detect import ChainDecodeResult
from docstruct.model import (
    BBox,
    GroupCategory,
    LogicalRole,
    ReadingOrderGroup,
    Region,
    RelationEdge,
    RelationLabel,
    RelationTypeDistribution,
    ScoreMatrix,
)
from docstruct.order import (
    OrderResult,
    build_groups,
    classify_links,
    decode_inter_succ,
    reading_sequence,
)

T, G = RelationLabel.TEXT_ORDER, RelationLabel.GRAPHICAL_LINK
P = LogicalRole.PARAGRAPH


def para(i, y, x=50, page=0, w=230, role=P):
    return Region(i, role, BBox(x, y, x + w, y + 20), page, (i,))


def figure(i, y, x=50, page=0, w=230):
    return Region(i, LogicalRole.FIGURE, BBox(x, y, x + w, y + 100), page, (), i)


def edge(a, b, label, score=1.0):
    return RelationEdge(a, b, label=label, score=score)


def test_decode_inter_succ_chain():
    m = ScoreMatrix((0, 1, 2), ((0.1, 0.8, 0.1), (0.1, 0.1, 0.8), (0.2, 0.2, 0.6)))
    assert decode_inter_succ(m).targets() == {0: 1, 1: 2, 2: 2}


def test_classify_links():
    dist = RelationTypeDistribution(
        {(0, 1): (0.7, 0.2, 0.1), (2, 9): (0.1, 0.8, 0.1), (1, 2): (0.2, 0.2, 0.6)}
    )
    e = ChainDecodeResult((RelationEdge(0, 1), RelationEdge(2, 9), RelationEdge(1, 2), RelationEdge(9, 9)))
    out = classify_links(e, dist)
    assert [(x.src, x.dst, x.label) for x in out] == [(0, 1, T), (2, 9, G)]


def test_classify_links_missing_pair():
    with pytest.raises(KeyError, match=r"\(0, 1\)"):
        classify_links(ChainDecodeResult((RelationEdge(0, 1),)), RelationTypeDistribution({}))


def test_single_chain_is_one_group():
    regions = [para(0, 0), para(1, 30), para(2, 60)]
    r = build_groups([edge(0, 1, T), edge(1, 2, T)], regions)
    assert r.groups == (ReadingOrderGroup(GroupCategory.TEXT, (0, 1, 2)),)


def test_figure_with_caption():
    regions = [figure(5, 0), para(7, 110, role=LogicalRole.CAPTION)]
    r = build_groups([edge(7, 5, G)], regions)
    assert r.groups == (ReadingOrderGroup(GroupCategory.GRAPHICAL, (5, 7)),)


def test_two_disjoint_chains():
    regions = [para(0, 0), para(1, 30), para(2, 0, x=320), para(3, 30, x=320)]
    r = build_groups([edge(0, 1, T), edge(2, 3, T)], regions)
    assert [g.members for g in r.text_groups()] == [(0, 1), (2, 3)]


def test_graphical_link_between_text_regions_is_ignored():
    regions = [para(0, 0), para(1, 30)]
    r = build_groups([edge(0, 1, G)], regions)
    assert [g.members for g in r.groups] == [(0,), (1,)]


def test_cycle_is_broken_at_weakest_edge():
    regions = [para(0, 0), para(1, 30), para(2, 60)]
    r = build_groups([edge(0, 1, T, 0.9), edge(1, 2, T, 0.8), edge(2, 0, T, 0.3)], regions)
    assert [g.members for g in r.groups] == [(0, 1, 2)]


def test_competing_predecessors_keep_best():
    regions = [para(0, 0), para(1, 30), para(2, 60)]
    r = build_groups([edge(0, 2, T, 0.9), edge(1, 2, T, 0.4)], regions)
    assert sorted(g.members for g in r.groups) == [(0, 2), (1,)]


def test_linked_regions_ordered_by_score():
    regions = [figure(5, 100), para(3, 60, role=LogicalRole.CAPTION), para(8, 210, role=LogicalRole.FOOTNOTE)]
    r = build_groups([edge(3, 5, G, 0.6), edge(8, 5, G, 0.9)], regions)
    assert r.groups[0].members == (5, 8, 3)


@settings(max_examples=60)
@given(st.integers(0, 10_000))
def test_groups_partition_regions(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 9)
    regions = []
    for i in range(n):
        if rng.random() < 0.3:
            regions.append(figure(i, 120 * i))
        else:
            role = rng.choice([P, P, LogicalRole.CAPTION])
            regions.append(para(i, 30 * i, role=role))
    labeled = []
    for i in range(n):
        j = rng.randrange(n)
        if j != i:
            labeled.append(edge(i, j, rng.choice([T, G]), rng.random()))
    r = build_groups(labeled, regions)
    for cat in GroupCategory:
        members = [m for g in r.groups if g.category is cat for m in g.members]
        assert len(members) == len(set(members))
    everything = sorted(m for g in r.groups for m in g.members)
    assert everything == list(range(n))
    assert all(g.members for g in r.groups)
    assert sorted(reading_sequence(r, regions)) == list(range(n))


# -- reading sequence ---------------------------------------------------------------

def test_sequence_of_single_text_group():
    regions = [para(0, 0), para(1, 30)]
    r = OrderResult((ReadingOrderGroup(GroupCategory.TEXT, (1, 0)),))
    assert reading_sequence(r, regions) == [1, 0]


def test_sequence_empty():
    assert reading_sequence(OrderResult(()), []) == []


def test_figure_spliced_after_text_above_it():
    regions = [para(0, 0), para(1, 200), figure(9, 60), para(10, 170, role=LogicalRole.CAPTION)]
    r = OrderResult(
        (
            ReadingOrderGroup(GroupCategory.TEXT, (0, 1)),
            ReadingOrderGroup(GroupCategory.GRAPHICAL, (9, 10)),
        )
    )
    assert reading_sequence(r, regions) == [0, 9, 10, 1]


def test_figure_in_right_column_follows_left_column():
    regions = [para(0, 0), para(1, 400), para(2, 300, x=320), figure(9, 100, x=320)]
    r = OrderResult(
        (
            ReadingOrderGroup(GroupCategory.TEXT, (0, 1, 2)),
            ReadingOrderGroup(GroupCategory.GRAPHICAL, (9,)),
        )
    )
    assert reading_sequence(r, regions) == [0, 1, 9, 2]


def test_footer_does_not_anchor_a_figure():
    footer = para(4, 760, x=290, w=10, role=LogicalRole.FOOTER)
    regions = [para(0, 0), para(1, 400), footer, figure(9, 100, x=320)]
    r = OrderResult(
        (
            ReadingOrderGroup(GroupCategory.TEXT, (0, 1)),
            ReadingOrderGroup(GroupCategory.TEXT, (4,)),
            ReadingOrderGroup(GroupCategory.GRAPHICAL, (9,)),
        )
    )
    assert reading_sequence(r, regions) == [0, 1, 9, 4]


def test_figure_with_nothing_before_goes_to_page_end():
    regions = [para(0, 0, page=0), para(1, 300, page=1), figure(9, 0, page=1)]
    r = OrderResult(
        (
            ReadingOrderGroup(GroupCategory.TEXT, (0, 1)),
            ReadingOrderGroup(GroupCategory.GRAPHICAL, (9,)),
        )
    )
    assert reading_sequence(r, regions) == [0, 1, 9]


def test_figure_on_textless_page_follows_earlier_page():
    regions = [para(0, 0, page=0), para(1, 300, page=2), figure(9, 0, page=1)]
    r = OrderResult(
        (
            ReadingOrderGroup(GroupCategory.TEXT, (0, 1)),
            ReadingOrderGroup(GroupCategory.GRAPHICAL, (9,)),
        )
    )
    assert reading_sequence(r, regions) == [0, 9, 1]


def test_figure_before_any_text_goes_first():
    regions = [para(1, 300, page=1), figure(9, 0, page=0)]
    r = OrderResult(
        (
            ReadingOrderGroup(GroupCategory.TEXT, (1,)),
            ReadingOrderGroup(GroupCategory.GRAPHICAL, (9,)),
        )
    )
    assert reading_sequence(r, regions) == [9, 1]
