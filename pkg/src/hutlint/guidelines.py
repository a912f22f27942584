"""Usability guideline rule catalog and page evaluator.

Seventeen checks, each a total function from a parsed document to one of
three verdicts: N (neutral, rule not applicable), V (violate), R (respect).
Whole-site errors are not decided here; they belong to the pipeline.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Iterator
from urllib.parse import urljoin

from .doc_model import Document, Element, collapse_whitespace, text_content


class Verdict(enum.Enum):
    NEUTRAL = "N"
    VIOLATE = "V"
    RESPECT = "R"

    @property
    def letter(self) -> str:
        return self.value


N, V, R = Verdict.NEUTRAL, Verdict.VIOLATE, Verdict.RESPECT

# Font families considered broadly available (or generic), acceptable as a
# fallback in a face list.
PORTABLE_FONT_FACES = frozenset({
    "arial", "helvetica", "times", "times new roman", "courier",
    "courier new", "georgia", "verdana", "serif", "sans-serif",
    "monospace", "cursive", "fantasy",
})

# href values that point at the site root / homepage regardless of base URL.
# "." covers "./" after trailing-slash normalization.
_HOME_HREFS = frozenset({
    "/", ".", "./", "index.html", "index.htm", "default.htm", "default.html",
})
_INDEX_FILES = ("index.html", "index.htm", "default.htm", "default.html")
_HOME_LABELS = frozenset({"home", "homepage", "home page"})

_DATE_META_NAMES = frozenset({"date", "last-modified", "dc.date", "revised"})
_AUTHOR_META_NAMES = frozenset({"author", "dc.creator"})


def _blank(value: str | None) -> bool:
    return value is None or value.strip() == ""


def normalize_href(href: str) -> str:
    """Trim, drop the fragment, and strip one trailing slash (keeping "/")."""
    s = href.strip().split("#", 1)[0]
    if len(s) > 1 and s.endswith("/"):
        s = s[:-1]
    return s


def label_text(el: Element) -> str:
    """Visible label of an element: its text plus alt text of nested images."""
    parts: list[str] = []
    stack: list[Element | str] = [el]
    while stack:
        node = stack.pop()
        if isinstance(node, str):
            parts.append(node)
            continue
        if node.tag == "img":
            alt = node.get("alt")
            if alt:
                parts.append(" " + alt + " ")
        stack.extend(reversed(node.children))
    return collapse_whitespace("".join(parts))


def _owned_descendants(container: Element, container_tag: str) -> Iterator[Element]:
    """Descendants of ``container`` not nested in another ``container_tag``.

    Used where an inner table/form claims its own descendants: a ``th``
    belongs to its nearest ancestor table, a control to its nearest form.
    """
    stack = list(reversed(container.child_elements()))
    while stack:
        el = stack.pop()
        yield el
        if el.tag != container_tag:
            stack.extend(reversed(el.child_elements()))


# ---------------------------------------------------------------------------
# Rule implementations. Each takes (doc, base_url) and returns a Verdict.
# ---------------------------------------------------------------------------


def check_link_labels(doc: Document, base_url: str | None) -> Verdict:
    # 1.1: anchors sharing a normalized href must carry identical labels.
    groups: dict[str, set[str]] = {}
    counts: dict[str, int] = {}
    for a in doc.find_all("a"):
        href = a.get("href")
        if _blank(href):
            continue
        key = normalize_href(href)
        counts[key] = counts.get(key, 0) + 1
        groups.setdefault(key, set()).add(label_text(a))
    shared = [key for key, n in counts.items() if n >= 2]
    if not shared:
        return N
    if any(len(groups[key]) >= 2 for key in shared):
        return V
    return R


def check_freshness(doc: Document, base_url: str | None) -> Verdict:
    # 2.1: page must carry both a date stamp and an author stamp.
    has_date = False
    has_author = False
    for meta in doc.find_all("meta"):
        content = meta.get("content")
        if _blank(content):
            continue
        name = (meta.get("name") or "").strip().lower()
        http_equiv = (meta.get("http-equiv") or "").strip().lower()
        if name in _DATE_META_NAMES or http_equiv == "last-modified":
            has_date = True
        if name in _AUTHOR_META_NAMES:
            has_author = True
    if not has_author:
        has_author = any(text_content(el) != "" for el in doc.find_all("address"))
    return R if (has_date and has_author) else V


def check_noframes(doc: Document, base_url: str | None) -> Verdict:
    # 3.1: framed pages need a noframes fallback with at least one real link.
    if not doc.find_all("frameset") and not doc.find_all("frame"):
        return N
    for noframes in doc.find_all("noframes"):
        for el in noframes.iter_elements():
            if el.tag == "a" and not _blank(el.get("href")):
                return R
    return V


def _base_url_variants(base_url: str) -> set[str]:
    variants = {normalize_href(base_url)}
    root = base_url if base_url.endswith("/") else base_url + "/"
    for name in _INDEX_FILES:
        variants.add(normalize_href(urljoin(root, name)))
    return variants


def check_link_to_home(doc: Document, base_url: str | None) -> Verdict:
    # 3.2: some anchor must lead back to the homepage, by href or by label.
    variants = _base_url_variants(base_url) if base_url else set()
    for a in doc.find_all("a"):
        href = a.get("href")
        if _blank(href):
            continue
        normalized = normalize_href(href)
        if normalized in _HOME_HREFS:
            return R
        if variants:
            resolved = normalize_href(urljoin(base_url, href.strip()))
            if resolved in variants:
                return R
        if label_text(a).lower() in _HOME_LABELS:
            return R
    return V


def check_frame_titles(doc: Document, base_url: str | None) -> Verdict:
    # 3.3: every frame and iframe carries a non-blank title attribute.
    frames = doc.find_all("frame") + doc.find_all("iframe")
    if not frames:
        return N
    for frame in frames:
        if _blank(frame.get("title")):
            return V
    return R


def check_table_sizing(doc: Document, base_url: str | None) -> Verdict:
    # 4.1: tables declare both width and height explicitly.
    tables = doc.find_all("table")
    if not tables:
        return N
    for table in tables:
        if _blank(table.get("width")) or _blank(table.get("height")):
            return V
    return R


def check_image_sizing(doc: Document, base_url: str | None) -> Verdict:
    # 4.2: images declare both width and height explicitly.
    images = doc.find_all("img")
    if not images:
        return N
    for img in images:
        if _blank(img.get("width")) or _blank(img.get("height")):
            return V
    return R


def check_mailto_labels(doc: Document, base_url: str | None) -> Verdict:
    # 5.1: a mailto link must show the address it sends to.
    mailtos = []
    for a in doc.find_all("a"):
        href = (a.get("href") or "").strip()
        if href.lower().startswith("mailto:"):
            mailtos.append((a, href))
    if not mailtos:
        return N
    for a, href in mailtos:
        address = href[len("mailto:"):].split("?", 1)[0].strip()
        if not address or address.lower() not in label_text(a).lower():
            return V
    return R


def check_page_title(doc: Document, base_url: str | None) -> Verdict:
    # 5.2: the page has a non-empty title element.
    titles = doc.find_all("title")
    if not titles or text_content(titles[0]) == "":
        return V
    return R


def check_table_headers(doc: Document, base_url: str | None) -> Verdict:
    # 5.3: each table owns at least one th (nearest-ancestor ownership).
    tables = doc.find_all("table")
    if not tables:
        return N
    for table in tables:
        if not any(el.tag == "th" for el in _owned_descendants(table, "table")):
            return V
    return R


def check_link_targets(doc: Document, base_url: str | None) -> Verdict:
    # 6.1: in framed pages, target="_blank" breaks the frame context.
    if not (doc.find_all("frameset") or doc.find_all("frame") or doc.find_all("iframe")):
        return N
    for el in doc.all_elements():
        target = el.get("target")
        if target is not None and target.strip().lower() == "_blank":
            return V
    return R


def _face_tokens(face: str) -> list[str]:
    return [token.strip().strip("'\"").strip().lower() for token in face.split(",")]


def check_font_faces(doc: Document, base_url: str | None) -> Verdict:
    # 6.2: every font face list offers at least one portable family.
    faced = [f for f in doc.find_all("font") if f.has_attr("face")]
    if not faced:
        return N
    for font in faced:
        tokens = _face_tokens(font.get("face") or "")
        if not any(token in PORTABLE_FONT_FACES for token in tokens):
            return V
    return R


def check_image_alt(doc: Document, base_url: str | None) -> Verdict:
    # 7.1: every image carries a non-blank alt text.
    images = doc.find_all("img")
    if not images:
        return N
    for img in images:
        alt = img.get("alt")
        if alt is None or alt.strip() == "":
            return V
    return R


def _has_fixed_size_token(value: str | None) -> bool:
    if value is None:
        return False
    return any(token.strip().isdigit() for token in value.split(","))


def check_frame_resizing(doc: Document, base_url: str | None) -> Verdict:
    # 7.2: frameset rows/cols use relative sizes, not fixed pixel counts.
    framesets = doc.find_all("frameset")
    if not framesets:
        return N
    for fs in framesets:
        if _has_fixed_size_token(fs.get("rows")) or _has_fixed_size_token(fs.get("cols")):
            return V
    return R


def _is_submit_control(el: Element) -> bool:
    if el.tag == "input":
        return (el.get("type") or "").strip().lower() in ("submit", "image")
    if el.tag == "button":
        type_ = el.get("type")
        return type_ is None or type_.strip().lower() == "submit"
    return False


def _is_reset_control(el: Element) -> bool:
    if el.tag in ("input", "button"):
        return (el.get("type") or "").strip().lower() == "reset"
    return False


def check_form_controls(doc: Document, base_url: str | None) -> Verdict:
    # 8.1: each form offers both a submit and a reset control.
    forms = doc.find_all("form")
    if not forms:
        return N
    for form in forms:
        owned = list(_owned_descendants(form, "form"))
        if not any(_is_submit_control(el) for el in owned):
            return V
        if not any(_is_reset_control(el) for el in owned):
            return V
    return R


def check_meta_information(doc: Document, base_url: str | None) -> Verdict:
    # 9.1: both keywords and description meta entries are present and filled.
    has_keywords = False
    has_description = False
    for meta in doc.find_all("meta"):
        if _blank(meta.get("content")):
            continue
        name = (meta.get("name") or "").strip().lower()
        if name == "keywords":
            has_keywords = True
        elif name == "description":
            has_description = True
    return R if (has_keywords and has_description) else V


def check_animation(doc: Document, base_url: str | None) -> Verdict:
    # 9.2: marquee and blink are never acceptable.
    if doc.find_all("marquee") or doc.find_all("blink"):
        return V
    return R


# ---------------------------------------------------------------------------
# Catalog
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Guideline:
    id: str
    category: str
    name: str
    description: str
    check: Callable[[Document, str | None], Verdict]


GUIDELINES: tuple[Guideline, ...] = (
    Guideline(
        "1.1", "Consistency of presentation and controls", "Link label",
        "links pointing at the same resource carry the same label",
        check_link_labels,
    ),
    Guideline(
        "2.1", "Adequate feedback", "Freshness",
        "page carries a date stamp and an author stamp",
        check_freshness,
    ),
    Guideline(
        "3.1", "Contextual navigation", "NOFRAMES validity",
        "framed pages provide a noframes fallback with navigation links",
        check_noframes,
    ),
    Guideline(
        "3.2", "Contextual navigation", "Link to home",
        "page links back to the homepage",
        check_link_to_home,
    ),
    Guideline(
        "3.3", "Contextual navigation", "Frame titles",
        "frames set a title attribute",
        check_frame_titles,
    ),
    Guideline(
        "4.1", "Efficient navigation", "Table coding",
        "tables declare explicit width and height",
        check_table_sizing,
    ),
    Guideline(
        "4.2", "Efficient navigation", "Image coding",
        "images declare explicit width and height",
        check_image_sizing,
    ),
    Guideline(
        "5.1", "Clear and meaningful labels", "Explicit mailto addresses",
        "mailto link labels show the target email address",
        check_mailto_labels,
    ),
    Guideline(
        "5.2", "Clear and meaningful labels", "Missing page title",
        "page has a non-empty title",
        check_page_title,
    ),
    Guideline(
        "5.3", "Clear and meaningful labels", "Table headers",
        "tables have header cells",
        check_table_headers,
    ),
    Guideline(
        "6.1", "Robustness", "Link targets",
        "framed pages avoid target=_blank",
        check_link_targets,
    ),
    Guideline(
        "6.2", "Robustness", "Portable font-faces",
        "font face lists include a portable family",
        check_font_faces,
    ),
    Guideline(
        "7.1", "Flexibility", "Image ALT",
        "images carry alternative text descriptions",
        check_image_alt,
    ),
    Guideline(
        "7.2", "Flexibility", "Frames resizing",
        "framesets use relative sizes",
        check_frame_resizing,
    ),
    Guideline(
        "8.1", "Support of users goals", "Form coding",
        "forms offer submit and reset controls",
        check_form_controls,
    ),
    Guideline(
        "9.1", "Other", "Keywords/description",
        "page provides keywords and description meta entries",
        check_meta_information,
    ),
    Guideline(
        "9.2", "Other", "Marquee,blink",
        "page avoids marquee and blink animation",
        check_animation,
    ),
)

GUIDELINE_ORDER: tuple[str, ...] = tuple(g.id for g in GUIDELINES)
GUIDELINES_BY_ID: dict[str, Guideline] = {g.id: g for g in GUIDELINES}

# Rules whose applicability is gated on in-scope elements being present.
GATED_GUIDELINE_IDS = frozenset({
    "1.1", "3.1", "3.3", "4.1", "4.2", "5.1", "5.3", "6.1", "6.2",
    "7.1", "7.2", "8.1",
})


@dataclass(frozen=True)
class VerdictVector:
    """Exactly one verdict per guideline, in catalog order."""

    verdicts: tuple[Verdict, ...]

    def __post_init__(self) -> None:
        if len(self.verdicts) != len(GUIDELINES):
            raise ValueError(
                f"expected {len(GUIDELINES)} verdicts, got {len(self.verdicts)}"
            )

    def __getitem__(self, guideline_id: str) -> Verdict:
        return self.verdicts[_INDEX_BY_ID[guideline_id]]

    def items(self) -> list[tuple[str, Verdict]]:
        return list(zip(GUIDELINE_ORDER, self.verdicts))

    def count(self, verdict: Verdict) -> int:
        return sum(1 for v in self.verdicts if v is verdict)

    def letters(self) -> str:
        return "".join(v.letter for v in self.verdicts)

    @classmethod
    def from_letters(cls, letters: str) -> "VerdictVector":
        return cls(tuple(Verdict(ch) for ch in letters))


_INDEX_BY_ID = {gid: i for i, gid in enumerate(GUIDELINE_ORDER)}


def run_guideline(doc: Document, guideline_id: str, base_url: str | None = None) -> Verdict:
    """Evaluate a single guideline against a parsed document."""
    return GUIDELINES_BY_ID[guideline_id].check(doc, base_url)


def evaluate_page(doc: Document, base_url: str | None = None) -> VerdictVector:
    """Run every guideline in catalog order over one page."""
    return VerdictVector(tuple(g.check(doc, base_url) for g in GUIDELINES))
