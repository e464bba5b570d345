import json
import math

import numpy as np
import pytest

from docstruct import io
from docstruct.model import (
    ROOT,
    BBox,
    Document,
    GraphicalObject,
    GroupCategory,
    LogicalRole,
    Page,
    ReadingOrderGroup,
    Region,
    RelationLabel,
    RelationTypeDistribution,
    ScoreMatrix,
    Structure,
    TextLine,
    TreeNode,
    validate_document,
)
from docstruct.scoring import row_softmax


def two_line_doc():
    return Document(
        (Page(0, 100, 200),),
        (TextLine(0, 0, BBox(10, 10, 90, 20), "a"), TextLine(1, 0, BBox(10, 22, 90, 32), "b")),
    )


# -- validation -------------------------------------------------------------

def test_valid_document_has_no_violations():
    assert validate_document(two_line_doc()) == []


def test_duplicate_id_is_reported():
    doc = Document(
        (Page(0, 100, 100),),
        (TextLine(7, 0, BBox(0, 0, 1, 1)), TextLine(7, 0, BBox(0, 2, 1, 3))),
    )
    v = validate_document(doc)
    assert any(x.element == 7 and "duplicate id 7" in x.rule for x in v)


def test_inverted_bbox_is_reported():
    doc = Document((Page(0, 100, 100),), (TextLine(3, 0, BBox(5, 0, 1, 1)),))
    assert [x.rule for x in validate_document(doc)] == ["inverted bbox"]


def test_line_and_graphic_share_id_space():
    doc = Document(
        (Page(0, 100, 100),),
        (TextLine(1, 0, BBox(0, 0, 1, 1)),),
        (GraphicalObject(1, 0, BBox(0, 0, 5, 5), "table"),),
    )
    assert any("duplicate id 1" in x.rule for x in validate_document(doc))


def test_page_range_and_graphic_class():
    doc = Document(
        (Page(0, 100, 100),),
        (TextLine(1, 3, BBox(0, 0, 1, 1)),),
        (GraphicalObject(2, 0, BBox(0, 0, 5, 5), "chart"),),
    )
    rules = [x.rule for x in validate_document(doc)]
    assert "page index 3 out of range" in rules
    assert "unknown graphic class 'chart'" in rules


def test_negative_id_and_bad_page_size():
    doc = Document((Page(0, 0, 100),), (TextLine(-4, 0, BBox(0, 0, 1, 1)),))
    rules = [x.rule for x in validate_document(doc)]
    assert "negative id -4" in rules
    assert "page 0 has non-positive size" in rules


# -- core types -----------------------------------------------------------------

def test_tree_preorder_and_size():
    t = TreeNode(ROOT, (TreeNode(1, (TreeNode(2),)), TreeNode(3)))
    assert t.preorder_ids() == [1, 2, 3]
    assert t.preorder_ids(include_root=True) == [ROOT, 1, 2, 3]
    assert t.size() == 3
    assert TreeNode(ROOT).size() == 0


def test_score_matrix_restrict_renormalizes():
    m = ScoreMatrix((1, 2, 3), ((0.2, 0.2, 0.6), (0.5, 0.5, 0.0), (0.0, 0.0, 1.0)))
    r = m.restrict([1, 2])
    assert r.rows[0] == pytest.approx((0.5, 0.5))
    assert r.rows[1] == pytest.approx((0.5, 0.5))


def test_score_matrix_restrict_dead_row_becomes_self_loop():
    m = ScoreMatrix((1, 2, 3), ((0.0, 0.0, 1.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)))
    assert m.restrict([1, 2]).rows[0] == (1.0, 0.0)


def test_relation_label_argmax_and_tie():
    d = RelationTypeDistribution({(0, 1): (0.7, 0.2, 0.1), (1, 2): (0.4, 0.4, 0.2), (2, 0): (0.2, 0.2, 0.6)})
    assert d.label(0, 1) is RelationLabel.TEXT_ORDER
    assert d.label(1, 2) is RelationLabel.TEXT_ORDER
    assert d.label(2, 0) is RelationLabel.NONE


# -- JSON -------------------------------------------------------------------------

def test_document_round_trip():
    doc = Document(
        (Page(0, 612, 792),),
        (TextLine(0, 0, BBox(1, 2, 3, 4), "x"),),
        (GraphicalObject(5, 0, BBox(10, 10, 50, 50), "table"),),
    )
    assert io.document_from_dict(json.loads(io.dumps(io.document_to_dict(doc)))) == doc


def test_structure_round_trip():
    s = Structure(
        regions=(
            Region(0, LogicalRole.SECTION, BBox(0, 0, 1, 1), 0, (0,)),
            Region(5, LogicalRole.FIGURE, BBox(0, 2, 1, 3), 0, (), 5),
        ),
        groups=(ReadingOrderGroup(GroupCategory.TEXT, (0,)), ReadingOrderGroup(GroupCategory.GRAPHICAL, (5,))),
        toc=TreeNode(ROOT, (TreeNode(0),)),
        hierarchy=TreeNode(ROOT, (TreeNode(0, (TreeNode(5, (), LogicalRole.FIGURE, ""),), LogicalRole.SECTION, "1 A"),)),
        reading_order=(0, 5),
    )
    back = io.structure_from_dict(json.loads(io.dumps(io.structure_to_dict(s))))
    assert back == s


def test_malformed_bbox_names_field():
    data = io.document_to_dict(two_line_doc())
    data["lines"][1]["bbox"] = [0, 0, 1]
    with pytest.raises(io.FormatError, match=r"lines\[1\]\.bbox"):
        io.document_from_dict(data)


def test_non_numeric_page_size_names_field():
    data = io.document_to_dict(two_line_doc())
    data["pages"][0]["width"] = "wide"
    with pytest.raises(io.FormatError, match=r"pages\[0\]\.width"):
        io.document_from_dict(data)


def test_read_json_reports_line(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "pages": [\n  oops\n}\n')
    with pytest.raises(io.FormatError, match="line 3"):
        io.read_json(p)


def test_scores_round_trip(tmp_path):
    rng = np.random.default_rng(4)
    m = row_softmax(rng.normal(size=(5, 5)), ids=[3, 1, 4, 0, 9], kind="intra-succ")
    path = tmp_path / "m.json"
    io.store_scores(m, path)
    back = io.load_scores(path)
    assert back.ids == m.ids and back.cols == m.cols
    assert np.allclose(back.rows, m.rows, atol=1e-9)


def test_scores_shape_mismatch():
    with pytest.raises(io.FormatError, match="shape mismatch"):
        io.scores_from_dict({"ids": [0, 1, 2], "rows": [[1, 0, 0]] * 4})


def test_scores_row_length_mismatch():
    with pytest.raises(io.FormatError, match="shape mismatch"):
        io.scores_from_dict({"ids": [0, 1, 2], "rows": [[1, 0, 0, 0]] * 3})


def test_scores_nan_names_cell():
    with pytest.raises(io.FormatError, match=r"row 1, col 2"):
        io.scores_from_dict({"ids": [0, 1, 2], "rows": [[1, 0, 0], [0, 0, math.nan], [0, 0, 1]]})


def test_scores_nan_survives_json_text(tmp_path):
    p = tmp_path / "m.json"
    p.write_text('{"ids": [0, 1], "rows": [[1, 0], [NaN, 1]]}')
    with pytest.raises(io.FormatError, match=r"row 1, col 0"):
        io.load_scores(p)


def test_scores_unknown_ids():
    with pytest.raises(io.FormatError, match="unknown ids"):
        io.scores_from_dict({"ids": [0, 8], "rows": [[1, 0], [0, 1]]}, known_ids=[0, 1])


def test_parent_matrix_with_root_column_round_trip():
    m = ScoreMatrix((4, 6), ((0.5, 0.5, 0.0), (0.0, 0.0, 1.0)), cols=(ROOT, 4, 6), kind="toc-parent")
    d = io.scores_to_dict(m)
    assert d["cols"] == [ROOT, 4, 6]
    assert io.scores_from_dict(d, known_ids=[4, 6]) == m


def test_relation_types_round_trip():
    d = RelationTypeDistribution({(0, 1): (0.8, 0.1, 0.1), (1, 0): (0.1, 0.1, 0.8)})
    back = io.relation_types_from_dict(io.relation_types_to_dict([0, 1], d))
    assert back.label(0, 1) is RelationLabel.TEXT_ORDER
    assert back.label(1, 0) is RelationLabel.NONE


def test_relation_types_from_labels_only():
    data = {"ids": [0, 1], "labels": [["none", "graphical-region-link"], ["none", "none"]]}
    assert io.relation_types_from_dict(data).label(0, 1) is RelationLabel.GRAPHICAL_LINK


def test_roles_round_trip():
    roles = {2: LogicalRole.CAPTION, 0: LogicalRole.TITLE}
    assert io.roles_from_dict(io.roles_to_dict(roles)) == roles
    with pytest.raises(io.FormatError, match="unknown role"):
        io.roles_from_dict({"ids": [0], "roles": ["banner"]})
