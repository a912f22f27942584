"""Lenient HTML document model.

Parses arbitrary byte sequences into an immutable element tree by scanning
the whole page for tags, attributes and text. Malformed markup degrades to
a best-effort tree of recognized elements plus text; parsing never raises.
Tag and attribute names are stored lowercase, comments and doctype
declarations are dropped, and duplicate attributes keep their first
occurrence.
"""
from __future__ import annotations

import codecs
import re
from dataclasses import dataclass, field
from html import escape, unescape

# Elements that never take content. Anything following them is a sibling,
# not a child, even when the closing tag is omitted (it always is).
VOID_TAGS = frozenset({
    "area", "base", "basefont", "br", "col", "embed", "frame", "hr", "img",
    "input", "isindex", "link", "meta", "param", "source", "track", "wbr",
})

# Opening one of these tags implicitly closes any of the listed open tags
# sitting on top of the stack (common browser recovery for omitted end tags).
_CLOSE_ON_OPEN = {
    "li": frozenset({"li"}),
    "p": frozenset({"p"}),
    "dt": frozenset({"dt", "dd"}),
    "dd": frozenset({"dt", "dd"}),
    "td": frozenset({"td", "th"}),
    "th": frozenset({"td", "th"}),
    "tr": frozenset({"tr", "td", "th"}),
    "option": frozenset({"option"}),
}

# Content of these elements is opaque text: no tags are recognized inside,
# and entities are left untouched so serialization round-trips.
_RAW_TEXT_TAGS = frozenset({"script", "style"})

# Structure nested deeper than this is flattened: the text survives but the
# element nodes are dropped. Bounds memory on adversarial input.
MAX_DEPTH = 512

ROOT_TAG = "#document"

_CHARSET_RE = re.compile(rb"""charset\s*=\s*["']?\s*([a-zA-Z0-9._\-]+)""", re.I)
_WS_RE = re.compile(r"\s+")

# One token per scan step: comment, declaration or processing instruction
# (all discarded), end tag, or start tag with its raw attribute text.
_TOKEN_RE = re.compile(
    r"<!--.*?(?:-->|$)"
    r"|<!\[CDATA\[.*?(?:\]\]>|$)"
    r"|<![^>]*>?"
    r"|<\?[^>]*>?"
    r"|</\s*([a-zA-Z][^\s>/]*)[^>]*>"
    r"|<([a-zA-Z][^\s>/]*)((?:\"[^\"]*\"|'[^']*'|[^>\"'])*)(/?)>",
    re.S,
)

_ATTR_RE = re.compile(
    r"""([^\s=/>]+)(?:\s*=\s*("[^"]*"|'[^']*'|[^\s>]*))?"""
)

_RAW_END_RE = {
    tag: re.compile(rf"</\s*{tag}", re.I) for tag in _RAW_TEXT_TAGS
}


def collapse_whitespace(text: str) -> str:
    """Collapse whitespace runs to single spaces and trim the ends."""
    return _WS_RE.sub(" ", text).strip()


class Element:
    """One element of the parsed tree.

    ``children`` holds ``Element`` and plain ``str`` text nodes in document
    order. Trees are frozen after parsing; treat instances as read-only.
    """

    __slots__ = ("tag", "attributes", "children")

    def __init__(self, tag: str, attributes: dict[str, str] | None = None,
                 children: tuple["Element | str", ...] = ()) -> None:
        self.tag = tag
        self.attributes = attributes if attributes is not None else {}
        self.children = children

    def get(self, name: str, default: str | None = None) -> str | None:
        """Attribute value by case-insensitive name, or ``default``."""
        return self.attributes.get(name.lower(), default)

    def has_attr(self, name: str) -> bool:
        return name.lower() in self.attributes

    def child_elements(self) -> list["Element"]:
        return [c for c in self.children if isinstance(c, Element)]

    def iter_elements(self):
        """All descendant elements in depth-first pre-order, self excluded."""
        stack = [c for c in reversed(self.children) if isinstance(c, Element)]
        while stack:
            el = stack.pop()
            yield el
            stack.extend(c for c in reversed(el.children) if isinstance(c, Element))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Element):
            return NotImplemented
        return (self.tag == other.tag
                and self.attributes == other.attributes
                and self.children == other.children)

    def __repr__(self) -> str:  # keep reprs short; trees can be huge
        return f"<Element {self.tag} attrs={len(self.attributes)} children={len(self.children)}>"


@dataclass(eq=True)
class Document:
    """Immutable parse result: a synthetic root plus a per-tag index."""

    root: Element
    source_length: int
    _by_tag: dict[str, tuple[Element, ...]] = field(default_factory=dict, repr=False, compare=False)
    _all: tuple[Element, ...] = field(default=(), repr=False, compare=False)

    def find_all(self, tag: str) -> tuple[Element, ...]:
        """All elements with the given tag, in document order."""
        return self._by_tag.get(tag.lower(), ())

    def all_elements(self) -> tuple[Element, ...]:
        return self._all


class _TreeAssembler:
    """Builds the element stack with tag-soup recovery rules."""

    def __init__(self) -> None:
        self.root = Element(ROOT_TAG)
        self._stack: list[Element] = [self.root]
        self._children: dict[int, list] = {id(self.root): []}
        self._skipped: dict[str, int] = {}

    def start(self, tag: str, attributes: dict[str, str], self_closing: bool) -> None:
        stack = self._stack
        close_set = _CLOSE_ON_OPEN.get(tag)
        if close_set:
            while len(stack) > 1 and stack[-1].tag in close_set:
                stack.pop()

        if len(stack) > MAX_DEPTH:
            if tag not in VOID_TAGS and not self_closing:
                self._skipped[tag] = self._skipped.get(tag, 0) + 1
            return

        node = Element(tag, attributes)
        self._children[id(node)] = []
        self._children[id(stack[-1])].append(node)
        if not self_closing and tag not in VOID_TAGS:
            stack.append(node)

    def end(self, tag: str) -> None:
        if tag in VOID_TAGS:
            return
        if self._skipped.get(tag):
            self._skipped[tag] -= 1
            return
        stack = self._stack
        for i in range(len(stack) - 1, 0, -1):
            if stack[i].tag == tag:
                del stack[i:]
                return
        # no matching open tag: stray end tag, ignore

    def data(self, text: str) -> None:
        if not text:
            return
        kids = self._children[id(self._stack[-1])]
        if kids and isinstance(kids[-1], str):
            kids[-1] += text
        else:
            kids.append(text)

    def finish(self) -> Element:
        """Close anything left open and freeze children lists to tuples."""
        order: list[Element] = [self.root]
        i = 0
        while i < len(order):
            el = order[i]
            i += 1
            order.extend(c for c in self._children[id(el)] if isinstance(c, Element))
        for el in order:
            el.children = tuple(self._children[id(el)])
        return self.root


def _parse_attributes(raw: str) -> dict[str, str]:
    attributes: dict[str, str] = {}
    if not raw or raw.isspace():
        return attributes
    for m in _ATTR_RE.finditer(raw):
        name = m.group(1).lower()
        if name in attributes:  # first occurrence wins
            continue
        value = m.group(2)
        if value is None:
            value = ""
        elif value[:1] in "\"'" and value[:1] == value[-1:] and len(value) >= 2:
            value = value[1:-1]
        if "&" in value:
            value = unescape(value)
        attributes[name] = value
    return attributes


def _scan(text: str, asm: _TreeAssembler) -> None:
    pos = 0
    n = len(text)
    search = _TOKEN_RE.search
    while pos < n:
        m = search(text, pos)
        if m is None:
            asm.data(_text_data(text[pos:]))
            return
        start = m.start()
        if start > pos:
            asm.data(_text_data(text[pos:start]))
        pos = m.end()
        end_name = m.group(1)
        if end_name is not None:
            asm.end(end_name.lower())
            continue
        tag_name = m.group(2)
        if tag_name is None:
            continue  # comment, doctype or processing instruction
        tag = tag_name.lower()
        self_closing = m.group(4) == "/"
        asm.start(tag, _parse_attributes(m.group(3)), self_closing)
        if not self_closing and tag in _RAW_TEXT_TAGS:
            end_m = _RAW_END_RE[tag].search(text, pos)
            if end_m is None:
                asm.data(text[pos:])
                asm.end(tag)
                return
            asm.data(text[pos:end_m.start()])
            asm.end(tag)
            gt = text.find(">", end_m.start())
            pos = n if gt == -1 else gt + 1


def _text_data(chunk: str) -> str:
    return unescape(chunk) if "&" in chunk else chunk


def _detect_encoding(data: bytes, hint: str | None) -> str:
    if hint:
        try:
            codecs.lookup(hint)
            return hint
        except LookupError:
            pass
    if data.startswith(codecs.BOM_UTF8):
        return "utf-8-sig"
    if data.startswith(codecs.BOM_UTF16_LE) or data.startswith(codecs.BOM_UTF16_BE):
        return "utf-16"
    m = _CHARSET_RE.search(data[:2048])
    if m:
        label = m.group(1).decode("ascii", "replace")
        try:
            codecs.lookup(label)
            return label
        except LookupError:
            pass
    return "utf-8"


def parse_document(data: bytes | str, encoding_hint: str | None = None) -> Document:
    """Parse raw page bytes into a Document. Never raises on malformed input.

    Decoding uses, in order: the caller's hint, a byte-order mark, a charset
    declaration found in the first 2 KiB, then UTF-8. Undecodable bytes are
    replaced, not fatal.
    """
    if isinstance(data, str):
        text = data
        source_length = len(data.encode("utf-8", "replace"))
    else:
        source_length = len(data)
        encoding = _detect_encoding(data, encoding_hint)
        text = data.decode(encoding, errors="replace")

    asm = _TreeAssembler()
    try:
        _scan(text, asm)
        root = asm.finish()
    except Exception:
        # The scanner is total in practice; if it ever chokes, degrade to a
        # text-only document rather than failing the pipeline.
        root = Element(ROOT_TAG, {}, (text,))

    doc = Document(root=root, source_length=source_length)
    by_tag: dict[str, list[Element]] = {}
    all_elements = tuple(root.iter_elements())
    for el in all_elements:
        by_tag.setdefault(el.tag, []).append(el)
    doc._by_tag = {tag: tuple(els) for tag, els in by_tag.items()}
    doc._all = all_elements
    return doc


def select_elements(doc: Document, tag: str) -> list[Element]:
    """All elements with the given tag in document (pre-)order."""
    return list(doc.find_all(tag))


def text_content(el: Element) -> str:
    """Concatenated descendant text, whitespace-collapsed and trimmed."""
    parts: list[str] = []
    stack: list[Element | str] = [el]
    while stack:
        node = stack.pop()
        if isinstance(node, str):
            parts.append(node)
        else:
            stack.extend(reversed(node.children))
    return collapse_whitespace("".join(parts))


def serialize_element(el: Element) -> str:
    """Render an element subtree back to HTML text.

    Re-parsing the output reproduces the same tree of recognized elements,
    which is what the round-trip tests lean on.
    """
    out: list[str] = []
    _serialize_into(el, out)
    return "".join(out)


def serialize_document(doc: Document) -> str:
    out: list[str] = []
    for child in doc.root.children:
        if isinstance(child, str):
            out.append(escape(child, quote=False))
        else:
            _serialize_into(child, out)
    return "".join(out)


def _serialize_into(el: Element, out: list[str]) -> None:
    attrs = "".join(
        f' {name}="{escape(value, quote=True)}"' for name, value in el.attributes.items()
    )
    out.append(f"<{el.tag}{attrs}>")
    if el.tag in VOID_TAGS:
        return
    raw = el.tag in _RAW_TEXT_TAGS
    for child in el.children:
        if isinstance(child, str):
            out.append(child if raw else escape(child, quote=False))
        else:
            _serialize_into(child, out)
    out.append(f"</{el.tag}>")
