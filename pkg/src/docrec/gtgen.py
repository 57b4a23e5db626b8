"""Ground-truth assembly: attach raw text lines to layout elements.

Pipeline: order the elements geometrically, assign each raw line to the
element covering it best, consolidate split line fragments, and emit a
valid document. Lines nothing claims are reported, never dropped.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .metrics import edit_distance
from .model import (
    BoundingBox,
    Category,
    Document,
    Element,
    FigureContent,
    FormulaContent,
    ParagraphContent,
    TableContent,
    TextLine,
)
from .readorder import OrderConfig, xy_cut_order


@dataclass(frozen=True)
class RawLine:
    """An extracted text line not yet owned by any element."""

    bbox: BoundingBox
    text: str


@dataclass(frozen=True)
class AssocConfig:
    iou_threshold: float = 0.5
    fuzzy_threshold: float = 0.9

    def __post_init__(self) -> None:
        if not 0 < self.iou_threshold <= 1:
            raise ValueError(f"iou_threshold must be in (0, 1], got {self.iou_threshold}")
        if not 0 <= self.fuzzy_threshold <= 1:
            raise ValueError(f"fuzzy_threshold must be in [0, 1], got {self.fuzzy_threshold}")


def associate_lines(
    elements: Sequence[tuple[Category, BoundingBox]],
    lines: Sequence[RawLine],
    cfg: AssocConfig | None = None,
) -> list[int | None]:
    """Assign each line to the element covering the largest share of its area.

    The score is intersection area over line area (a small line fully inside
    a large element scores 1.0). Lines below ``iou_threshold`` everywhere
    stay unassigned (None); ties prefer the smaller element, then the lower
    index.
    """
    cfg = cfg or AssocConfig()
    result: list[int | None] = []
    for line in lines:
        line_area = line.bbox.area
        best: int | None = None
        best_key: tuple[float, float, int] | None = None
        if line_area > 0:
            for idx, (_, box) in enumerate(elements):
                ratio = line.bbox.intersection_area(box) / line_area
                if ratio < cfg.iou_threshold:
                    continue
                key = (-ratio, box.area, idx)
                if best_key is None or key < best_key:
                    best_key = key
                    best = idx
        result.append(best)
    return result


def merge_boxes(boxes: Sequence[BoundingBox]) -> BoundingBox:
    """Tight axis-aligned union of one or more boxes."""
    if not boxes:
        raise ValueError("merge_boxes requires at least one box")
    return BoundingBox(
        min(b.x_min for b in boxes),
        min(b.y_min for b in boxes),
        max(b.x_max for b in boxes),
        max(b.y_max for b in boxes),
    )


def _normalize_for_match(s: str) -> str:
    return " ".join(s.split()).lower()


def fuzzy_match(a: str, b: str) -> float:
    """Similarity in [0, 1] after lowercasing and collapsing whitespace runs."""
    na = _normalize_for_match(a)
    nb = _normalize_for_match(b)
    if not na and not nb:
        return 1.0
    return 1.0 - edit_distance(na, nb) / max(len(na), len(nb))


@dataclass(frozen=True)
class AssemblyResult:
    """Assembled document plus the fate of every input line.

    ``assignments[i]`` is the index (in document order) of the element that
    claimed line i, or None; ``unassigned`` lists the None positions.
    """

    document: Document
    assignments: tuple[int | None, ...]
    unassigned: tuple[int, ...]


def _consolidate_lines(
    owned: list[RawLine], y_tolerance: float
) -> tuple[TextLine, ...]:
    """Turn a paragraph's raw lines into TextLines, top to bottom.

    Fragments whose tops fall in the same y-band are pieces of one visual
    line: their boxes merge and their texts join left to right.
    """
    if not owned:
        return ()
    by_top = sorted(
        range(len(owned)),
        key=lambda i: (
            owned[i].bbox.y_min,
            owned[i].bbox.x_min,
            owned[i].bbox.x_max,
            owned[i].bbox.y_max,
        ),
    )
    bands: list[list[int]] = []
    anchor = None
    for i in by_top:
        y = owned[i].bbox.y_min
        if anchor is None or y - anchor > y_tolerance:
            bands.append([i])
            anchor = y
        else:
            bands[-1].append(i)
    lines = []
    for band in bands:
        members = sorted(
            band,
            key=lambda i: (
                owned[i].bbox.x_min,
                owned[i].bbox.y_min,
                owned[i].bbox.x_max,
                owned[i].bbox.y_max,
            ),
        )
        lines.append(
            TextLine(
                bbox=merge_boxes([owned[i].bbox for i in members]),
                text=" ".join(owned[i].text for i in members),
            )
        )
    return tuple(lines)


_EMPTY_CONTENT = {
    Category.TABLE: TableContent(()),
    Category.FORMULA: FormulaContent(""),
    Category.FIGURE: FigureContent(),
}


def assemble_ground_truth(
    elements: Sequence[tuple[Category, BoundingBox]],
    lines: Sequence[RawLine],
    page_width: float,
    page_height: float,
    order_cfg: OrderConfig | None = None,
    assoc_cfg: AssocConfig | None = None,
) -> AssemblyResult:
    """Order elements, attach lines, and build a document.

    Lines assigned to paragraphs become their TextLines; lines landing on
    table/formula/figure elements stay recorded in ``assignments`` but the
    content is left for external recognizers. Every input line ends up
    either assigned or listed in ``unassigned``.
    """
    order_cfg = order_cfg or OrderConfig()
    assoc_cfg = assoc_cfg or AssocConfig()
    order = xy_cut_order([box for _, box in elements], order_cfg)
    position = {orig: new for new, orig in enumerate(order)}
    raw_assignments = associate_lines(elements, lines, assoc_cfg)
    assignments = tuple(
        position[a] if a is not None else None for a in raw_assignments
    )
    owned: dict[int, list[RawLine]] = {}
    for line_idx, target in enumerate(assignments):
        if target is not None:
            owned.setdefault(target, []).append(lines[line_idx])
    built = []
    for new_idx, orig in enumerate(order):
        category, box = elements[orig]
        if category is Category.PARAGRAPH:
            content = ParagraphContent(
                _consolidate_lines(owned.get(new_idx, []), order_cfg.y_tolerance)
            )
        else:
            content = _EMPTY_CONTENT[category]
        built.append(Element(category=category, bbox=box, content=content))
    document = Document(
        page_width=page_width, page_height=page_height, elements=tuple(built)
    )
    unassigned = tuple(i for i, a in enumerate(assignments) if a is None)
    return AssemblyResult(document=document, assignments=assignments, unassigned=unassigned)
