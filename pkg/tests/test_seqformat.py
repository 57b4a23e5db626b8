import random

import pytest

from docrec.model import (
    BoundingBox,
    Category,
    Document,
    DocumentValidationError,
    Element,
    FigureContent,
    FormulaContent,
    ParagraphContent,
    TableCell,
    TableContent,
    TextLine,
)
from docrec.seqformat import (
    AXES,
    Axis,
    CategoryTok,
    CoordTok,
    HtmlTagTok,
    LineSepTok,
    ParseError,
    ParseErrorKind,
    ScanError,
    SepTok,
    TextTok,
    TokenSequence,
    parse,
    render_tokens,
    scan_tokens,
    serialize,
)
from helpers import random_document


def _figure_doc():
    return Document(
        1000.0,
        1000.0,
        (Element(Category.FIGURE, BoundingBox(0, 0, 1000, 1000), FigureContent()),),
    )


def test_serialize_single_figure():
    seq = serialize(_figure_doc(), bins=1000)
    assert list(seq.tokens) == [
        CategoryTok(Category.FIGURE),
        CoordTok(Axis.X_MIN, 0),
        CoordTok(Axis.Y_MIN, 0),
        CoordTok(Axis.X_MAX, 999),
        CoordTok(Axis.Y_MAX, 999),
        SepTok(),
    ]


def test_serialize_empty_document():
    assert len(serialize(Document(100.0, 100.0, ()))) == 0


def _two_line_paragraph():
    return Document(
        1000.0,
        1000.0,
        (
            Element(
                Category.PARAGRAPH,
                BoundingBox(0, 0, 500, 200),
                ParagraphContent(
                    (
                        TextLine(BoundingBox(0, 0, 500, 100), "ab"),
                        TextLine(BoundingBox(0, 100, 500, 200), "cd"),
                    )
                ),
            ),
        ),
    )


def test_serialize_paragraph_line_separator():
    seq = serialize(_two_line_paragraph())
    tokens = list(seq.tokens)
    seps = [i for i, t in enumerate(tokens) if isinstance(t, LineSepTok)]
    assert len(seps) == 1
    # category + quartet + (quartet + 2 chars) + linesep + (quartet + 2 chars) + sep
    assert len(tokens) == 1 + 4 + 6 + 1 + 6 + 1
    assert seps[0] == 1 + 4 + 6
    assert isinstance(tokens[-1], SepTok)


def test_serialize_requires_valid_document():
    doc = Document(
        100.0,
        100.0,
        (Element(Category.FIGURE, BoundingBox(50, 0, 10, 10), FigureContent()),),
    )
    with pytest.raises(DocumentValidationError) as err:
        serialize(doc)
    assert err.value.violations


def test_sep_count_equals_element_count():
    rng = random.Random(5)
    for _ in range(30):
        doc = random_document(rng, 0, 6)
        seq = serialize(doc)
        assert sum(isinstance(t, SepTok) for t in seq.tokens) == len(doc.elements)


def _structure(doc):
    """Quantization-independent skeleton of a document."""
    out = []
    for el in doc.elements:
        if isinstance(el.content, ParagraphContent):
            detail = tuple(l.text for l in el.content.lines)
        elif isinstance(el.content, TableContent):
            detail = tuple(
                tuple((c.rowspan, c.colspan, c.text) for c in row)
                for row in el.content.rows
            )
        elif isinstance(el.content, FormulaContent):
            detail = el.content.latex
        else:
            detail = None
        out.append((el.category, detail))
    return out


def _boxes(doc):
    out = []
    for el in doc.elements:
        out.append(el.bbox)
        if isinstance(el.content, ParagraphContent):
            out.extend(l.bbox for l in el.content.lines)
        elif isinstance(el.content, TableContent):
            out.extend(c.bbox for row in el.content.rows for c in row)
    return out


def test_round_trip_document():
    rng = random.Random(11)
    for _ in range(100):
        doc = random_document(rng, 0, 6, tricky_text=True)
        bins = rng.choice((100, 1000, 1024))
        seq = serialize(doc, bins=bins)
        back = parse(seq, doc.page_width, doc.page_height)
        assert _structure(back) == _structure(doc)
        for a, b in zip(_boxes(back), _boxes(doc)):
            assert abs(a.x_min - b.x_min) <= doc.page_width / bins
            assert abs(a.x_max - b.x_max) <= doc.page_width / bins
            assert abs(a.y_min - b.y_min) <= doc.page_height / bins
            assert abs(a.y_max - b.y_max) <= doc.page_height / bins
        # Token-level round trip is exact.
        assert serialize(back, bins=bins) == seq


def test_parse_missing_category():
    seq = TokenSequence((CoordTok(Axis.X_MIN, 0),))
    with pytest.raises(ParseError) as err:
        parse(seq, 100, 100)
    assert err.value.kind is ParseErrorKind.MISSING_CATEGORY
    assert err.value.offset == 0


def test_parse_truncated_quartet():
    seq = TokenSequence(
        (CategoryTok(Category.FIGURE), CoordTok(Axis.X_MIN, 1), CoordTok(Axis.Y_MIN, 1))
    )
    with pytest.raises(ParseError) as err:
        parse(seq, 100, 100)
    assert err.value.kind is ParseErrorKind.TRUNCATED_COORD_QUARTET
    assert err.value.offset == 3


def test_parse_unterminated_element():
    tokens = serialize(_figure_doc()).tokens[:-1]  # drop the final Sep
    with pytest.raises(ParseError) as err:
        parse(TokenSequence(tokens), 1000, 1000)
    assert err.value.kind is ParseErrorKind.UNTERMINATED_ELEMENT
    assert err.value.offset == len(tokens)


def _table_doc():
    return Document(
        1000.0,
        1000.0,
        (
            Element(
                Category.TABLE,
                BoundingBox(0, 0, 400, 200),
                TableContent(
                    ((TableCell(BoundingBox(0, 0, 200, 100), 1, 1, "x"),),)
                ),
            ),
        ),
    )


def test_parse_missing_td_close_is_malformed_table():
    seq = serialize(_table_doc())
    tokens = list(seq.tokens)
    drop = next(
        i for i, t in enumerate(tokens) if isinstance(t, HtmlTagTok) and t.name == "/td"
    )
    del tokens[drop]
    with pytest.raises(ParseError) as err:
        parse(TokenSequence(tokens), 1000, 1000)
    assert err.value.kind is ParseErrorKind.MALFORMED_TABLE_TAGS
    # The </tr> now sits where </td> was expected.
    assert err.value.offset == drop
    assert isinstance(tokens[drop], HtmlTagTok) and tokens[drop].name == "/tr"


def test_parse_stray_table_tag_in_paragraph():
    seq = serialize(_two_line_paragraph())
    tokens = list(seq.tokens)
    tokens.insert(len(tokens) - 1, HtmlTagTok("tr"))
    with pytest.raises(ParseError) as err:
        parse(TokenSequence(tokens), 1000, 1000)
    assert err.value.kind is ParseErrorKind.UNEXPECTED_TOKEN


def test_parse_coord_out_of_range():
    tokens = (
        CategoryTok(Category.FIGURE),
        CoordTok(Axis.X_MIN, 0),
        CoordTok(Axis.Y_MIN, 1000),
        CoordTok(Axis.X_MAX, 10),
        CoordTok(Axis.Y_MAX, 10),
        SepTok(),
    )
    with pytest.raises(ParseError) as err:
        parse(TokenSequence(tokens, bins=1000), 100, 100)
    assert err.value.kind is ParseErrorKind.COORD_OUT_OF_RANGE
    assert err.value.offset == 2


def test_parse_text_inside_figure_is_unexpected():
    tokens = list(serialize(_figure_doc()).tokens)
    tokens.insert(5, TextTok("!"))
    with pytest.raises(ParseError) as err:
        parse(TokenSequence(tokens), 1000, 1000)
    assert err.value.kind is ParseErrorKind.UNEXPECTED_TOKEN
    assert err.value.offset == 5


def test_parse_allows_invalid_geometry():
    # min > max parses fine; geometry is validate_document's job.
    tokens = (
        CategoryTok(Category.FIGURE),
        CoordTok(Axis.X_MIN, 50),
        CoordTok(Axis.Y_MIN, 0),
        CoordTok(Axis.X_MAX, 10),
        CoordTok(Axis.Y_MAX, 10),
        SepTok(),
    )
    doc = parse(TokenSequence(tokens, bins=100), 100, 100)
    assert doc.elements[0].bbox.x_min > doc.elements[0].bbox.x_max


_FUZZ_POOL = (
    CategoryTok(Category.PARAGRAPH),
    CategoryTok(Category.TABLE),
    CategoryTok(Category.FORMULA),
    CategoryTok(Category.FIGURE),
    CoordTok(Axis.X_MIN, 3),
    CoordTok(Axis.Y_MIN, 7),
    CoordTok(Axis.X_MAX, 90),
    CoordTok(Axis.Y_MAX, 2000),
    TextTok("a"),
    TextTok("<"),
    LineSepTok(),
    SepTok(),
    HtmlTagTok("tr"),
    HtmlTagTok("/tr"),
    HtmlTagTok("td"),
    HtmlTagTok("td", rowspan=2),
    HtmlTagTok("/td"),
)


def test_parse_total_on_fuzzed_streams():
    rng = random.Random(2024)
    for _ in range(500):
        tokens = tuple(rng.choice(_FUZZ_POOL) for _ in range(rng.randint(0, 30)))
        try:
            parse(TokenSequence(tokens, bins=1000), 500, 500)
        except ParseError:
            pass  # structured failure is the contract


def test_parse_total_on_mutated_serializations():
    rng = random.Random(77)
    for _ in range(200):
        doc = random_document(rng, 1, 4)
        tokens = list(serialize(doc).tokens)
        op = rng.choice(("drop", "dup", "insert", "swap"))
        if op == "drop" and tokens:
            del tokens[rng.randrange(len(tokens))]
        elif op == "dup" and tokens:
            i = rng.randrange(len(tokens))
            tokens.insert(i, tokens[i])
        elif op == "insert":
            tokens.insert(rng.randint(0, len(tokens)), rng.choice(_FUZZ_POOL))
        elif len(tokens) > 1:
            i = rng.randrange(len(tokens) - 1)
            tokens[i], tokens[i + 1] = tokens[i + 1], tokens[i]
        try:
            parse(TokenSequence(tokens), doc.page_width, doc.page_height)
        except ParseError:
            pass


def test_render_single_figure():
    assert render_tokens(serialize(_figure_doc())) == "<Figure><0><0><999><999><Sep>"


def test_render_one_element_per_line():
    rng = random.Random(13)
    doc = random_document(rng, 3, 6)
    text = render_tokens(serialize(doc))
    # Escaped text never contains a raw newline, so lines == elements.
    assert len(text.split("\n")) == len(doc.elements)
    assert not text.endswith("\n")


def test_scan_render_round_trip():
    rng = random.Random(17)
    for _ in range(100):
        doc = random_document(rng, 0, 5, tricky_text=True)
        seq = serialize(doc)
        assert scan_tokens(render_tokens(seq)) == seq


def test_render_escapes():
    seq = TokenSequence((TextTok("<"), TextTok("\\"), TextTok("\n"), TextTok(">")))
    assert render_tokens(seq) == "\\<\\\\\\n>"
    assert scan_tokens(render_tokens(seq)) == seq


def test_scan_td_attributes():
    seq = scan_tokens('<td rowspan="2" colspan="3">')
    assert seq.tokens == (HtmlTagTok("td", rowspan=2, colspan=3),)
    assert render_tokens(seq) == '<td rowspan="2" colspan="3">'


def test_scan_unknown_tag():
    with pytest.raises(ScanError) as err:
        scan_tokens("<Chart>")
    assert err.value.offset == 0
    with pytest.raises(ScanError) as err:
        scan_tokens("abc<Chart>")
    assert err.value.offset == 3


def test_scan_unterminated_tag_and_bad_escape():
    with pytest.raises(ScanError):
        scan_tokens("<Figure")
    with pytest.raises(ScanError):
        scan_tokens("ab\\q")
    with pytest.raises(ScanError):
        scan_tokens("ab\\")


def test_scan_assigns_axes_cyclically():
    seq = scan_tokens("<Figure><1><2><3><4>x<5>")
    coords = [t for t in seq.tokens if isinstance(t, CoordTok)]
    assert [c.axis for c in coords[:4]] == list(AXES)
    # Run reset by the text token: the fifth coordinate starts a new quartet.
    assert coords[4].axis is Axis.X_MIN
