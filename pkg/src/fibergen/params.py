"""Typed, documented hierarchical parameters with prm, json and xml renderings.

Every entry has a pattern, a default, a current value, a documentation
string, a global pattern index and a verbosity class. Values are kept as
strings, exactly as written in a parameter file, and validated against the
pattern whenever they are set.

Key encoding in json and xml replaces each space by ``_20``.
"""

from __future__ import annotations

import copy
import enum
import json
import math
import os
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from .errors import (
    DuplicateEntry,
    EmptyName,
    ParamSyntaxError,
    PatternMismatch,
    UnknownEntry,
    UnknownSubsection,
)

INT_MIN, INT_MAX = -2147483648, 2147483647
UINT_MAX = 4294967295

FORMATS = ("prm", "json", "xml")
VERBOSITY = {"minimal": 0, "standard": 1, "full": 2}


class PatternKind(enum.Enum):
    BOOL = "Bool"
    INTEGER = "Integer"
    DOUBLE = "Double"
    SELECTION = "Selection"
    FILENAME_INPUT = "FileNameInput"
    FILENAME_OUTPUT = "FileNameOutput"
    LIST = "List"
    STRING = "String"


def _fmt_number(x):
    return f"{x:g}"


@dataclass(frozen=True)
class Pattern:
    kind: PatternKind
    lower: float | None = None
    upper: float | None = None
    choices: tuple = ()
    element: "Pattern | None" = None
    separator: str = ","
    min_length: int = 0
    max_length: int = UINT_MAX

    def __post_init__(self):
        if self.kind is PatternKind.SELECTION and not self.choices:
            raise ValueError("a selection needs at least one choice")
        if self.lower is not None and self.upper is not None and self.lower > self.upper:
            raise ValueError("pattern bounds must satisfy lower <= upper")
        if self.kind is PatternKind.LIST and self.element is None:
            raise ValueError("a list pattern needs an element pattern")

    # constructors ---------------------------------------------------------
    @classmethod
    def bool(cls):
        return cls(PatternKind.BOOL)

    @classmethod
    def integer(cls, lower=INT_MIN, upper=INT_MAX):
        return cls(PatternKind.INTEGER, lower, upper)

    @classmethod
    def double(cls, lower=None, upper=None):
        return cls(PatternKind.DOUBLE, lower, upper)

    @classmethod
    def selection(cls, *choices):
        return cls(PatternKind.SELECTION, choices=tuple(choices))

    @classmethod
    def filename(cls, output=False):
        return cls(PatternKind.FILENAME_OUTPUT if output else PatternKind.FILENAME_INPUT)

    @classmethod
    def list(cls, element, min_length=0, max_length=UINT_MAX, separator=","):
        return cls(PatternKind.LIST, element=element, separator=separator,
                   min_length=min_length, max_length=max_length)

    @classmethod
    def anything(cls):
        return cls(PatternKind.STRING)

    # ---------------------------------------------------------------------
    def description(self):
        k = self.kind
        if k is PatternKind.BOOL:
            return "[Bool]"
        if k is PatternKind.INTEGER:
            return f"[Integer range {int(self.lower)}...{int(self.upper)} (inclusive)]"
        if k is PatternKind.DOUBLE:
            lo = "-MAX_DOUBLE" if self.lower is None else _fmt_number(self.lower)
            hi = "MAX_DOUBLE" if self.upper is None else _fmt_number(self.upper)
            return f"[Double {lo}...{hi} (inclusive)]"
        if k is PatternKind.SELECTION:
            return f"[Selection {'|'.join(self.choices)} ]"
        if k is PatternKind.FILENAME_INPUT:
            return "[FileName (Type: input)]"
        if k is PatternKind.FILENAME_OUTPUT:
            return "[FileName (Type: output)]"
        if k is PatternKind.LIST:
            sep = "" if self.separator == "," else f" separated by <{self.separator}>"
            return (f"[List of <{self.element.description()}> of length "
                    f"{self.min_length}...{self.max_length} (inclusive){sep}]")
        return "[Anything]"

    def split(self, value):
        value = value.strip()
        if not value:
            return []
        if self.separator.strip():
            return [v.strip() for v in value.split(self.separator)]
        return value.split()

    def match(self, value):
        try:
            self.convert(value)
        except ValueError:
            return False
        return True

    def convert(self, value):
        """Typed Python value for ``value``; raises ValueError if it does not match."""
        v = value.strip()
        k = self.kind
        if k in (PatternKind.INTEGER, PatternKind.DOUBLE) and "_" in v:
            raise ValueError(v)  # python accepts digit separators, parameter files do not
        if k is PatternKind.BOOL:
            if v not in ("true", "false"):
                raise ValueError(v)
            return v == "true"
        if k is PatternKind.INTEGER:
            x = int(v)
            if not self.lower <= x <= self.upper:
                raise ValueError(v)
            return x
        if k is PatternKind.DOUBLE:
            x = float(v)
            if not math.isfinite(x):
                raise ValueError(v)
            if (self.lower is not None and x < self.lower) or (self.upper is not None and x > self.upper):
                raise ValueError(v)
            return x
        if k is PatternKind.SELECTION:
            if v not in self.choices:
                raise ValueError(v)
            return v
        if k is PatternKind.LIST:
            items = self.split(v)
            if not self.min_length <= len(items) <= self.max_length:
                raise ValueError(v)
            return [self.element.convert(item) for item in items]
        return v


@dataclass
class ParamEntry:
    name: str
    default_value: str
    pattern: Pattern
    documentation: str = ""
    verbosity: str = "standard"
    value: str | None = None
    pattern_index: int = -1

    def __post_init__(self):
        self.name = self.name.strip()
        if not self.name:
            raise EmptyName("parameter names must be non-empty")
        if self.verbosity not in VERBOSITY:
            raise ValueError(f"unknown verbosity class {self.verbosity!r}")
        if self.value is None:
            self.value = self.default_value

    @property
    def typed(self):
        return self.pattern.convert(self.value)


@dataclass
class Section:
    name: str
    entries: dict = field(default_factory=dict)
    subsections: dict = field(default_factory=dict)
    order: list = field(default_factory=list)  # ("entry"|"section", name) in declaration order

    def items(self):
        for kind, name in self.order:
            yield kind, (self.entries[name] if kind == "entry" else self.subsections[name])


def _join(path):
    return "/".join(path)


def _storable(value):
    # prm has no escaping: no comment starts and no line breaks inside a value
    return "#" not in value and len(value.splitlines()) <= 1


def _normalise_path(path):
    if isinstance(path, str):
        path = [p for p in path.split("/")] if path else []
    path = tuple(p.strip() for p in path)
    if any(not p for p in path):
        raise EmptyName("subsection names must be non-empty", _join(path))
    return path


class ParamTree:
    """Hierarchy of subsections holding declared parameter entries."""

    def __init__(self):
        self.root = Section("")
        self._next_index = 0

    # declaration ------------------------------------------------------------
    def declare(self, path, entry):
        """Declare ``entry`` under subsection ``path``; returns the stored entry."""
        path = _normalise_path(path)
        where = _join((*path, entry.name))
        section = self.root
        for name in path:
            if name in section.entries:
                raise DuplicateEntry(f"{name!r} is already an entry", where)
            if name not in section.subsections:
                section.subsections[name] = Section(name)
                section.order.append(("section", name))
            section = section.subsections[name]
        if entry.name in section.entries or entry.name in section.subsections:
            raise DuplicateEntry("already declared", where)
        for v in (entry.default_value, entry.value):
            if not _storable(v) or not entry.pattern.match(v):
                raise PatternMismatch(v, entry.pattern.description(), where)
        entry = copy.deepcopy(entry)
        entry.pattern_index = self._next_index
        self._next_index += 1
        section.entries[entry.name] = entry
        section.order.append(("entry", entry.name))
        return entry

    # access -----------------------------------------------------------------
    def section(self, path):
        path = _normalise_path(path)
        section = self.root
        for i, name in enumerate(path):
            if name not in section.subsections:
                raise UnknownSubsection("subsection is not declared", _join(path[: i + 1]))
            section = section.subsections[name]
        return section

    def entry(self, path):
        path = _normalise_path(path)
        section = self.section(path[:-1])
        if path[-1] not in section.entries:
            raise UnknownEntry("entry is not declared", _join(path))
        return section.entries[path[-1]]

    def get(self, path):
        return self.entry(path).value

    def typed(self, path):
        return self.entry(path).typed

    def set(self, path, value):
        path = _normalise_path(path)
        entry = self.entry(path)
        value = str(value).strip()
        if not _storable(value) or not entry.pattern.match(value):
            raise PatternMismatch(value, entry.pattern.description(), _join(path))
        entry.value = value

    def walk(self, section=None, path=()):
        """Yield ``(path, entry)`` for every entry in declaration order."""
        section = self.root if section is None else section
        for kind, item in section.items():
            if kind == "entry":
                yield (*path, item.name), item
            else:
                yield from self.walk(item, (*path, item.name))

    def values(self):
        return {p: e.value for p, e in self.walk()}

    def defaults(self):
        return {p: e.default_value for p, e in self.walk()}

    def copy(self):
        return copy.deepcopy(self)

    def reset(self):
        for _, e in self.walk():
            e.value = e.default_value


# --------------------------------------------------------------------------
# rendering

def encode_key(name):
    return name.replace(" ", "_20")


def decode_key(key):
    return key.replace("_20", " ")


def _admitted(entry, level):
    return VERBOSITY[entry.verbosity] <= level


def _has_entries(section, level):
    return any(_admitted(e, level) for e in section.entries.values()) or any(
        _has_entries(s, level) for s in section.subsections.values())


def _render_prm(tree, level):
    out = ["# Listing of Parameters", "# ---------------------"]

    def emit(section, depth):
        pad = "  " * depth
        entries = [e for e in section.entries.values() if _admitted(e, level)]
        subs = [s for s in section.subsections.values() if _has_entries(s, level)]
        width = max((len(e.name) for e in entries), default=0)
        blocks = []
        for e in entries:
            lines = [f"{pad}# {line}".rstrip() for line in e.documentation.splitlines()]
            line = f"{pad}set {e.name.ljust(width)} = {e.value}"
            if e.value != e.default_value:
                line += f" # default: {e.default_value}"
            lines.append(line.rstrip())
            blocks.append(lines)
        for s in subs:
            lines = [f"{pad}subsection {s.name}"]
            lines += emit(s, depth + 1)
            lines.append(f"{pad}end")
            blocks.append(lines)
        body = []
        for i, block in enumerate(blocks):
            if i:
                body.append("")
            body.extend(block)
        return body

    out.extend(emit(tree.root, 0))
    return "\n".join(out) + "\n"


def _entry_record(e):
    return {
        "value": e.value,
        "default_value": e.default_value,
        "documentation": e.documentation,
        "pattern": str(e.pattern_index),
        "pattern_description": e.pattern.description(),
    }


def _render_json(tree, level):
    def build(section):
        node = {}
        for kind, item in section.items():
            if kind == "entry":
                if _admitted(item, level):
                    node[encode_key(item.name)] = _entry_record(item)
            elif _has_entries(item, level):
                node[encode_key(item.name)] = build(item)
        return node

    text = json.dumps(build(tree.root), indent=2, ensure_ascii=False)
    # slashes only occur inside strings; escaped the way the reference files do
    return text.replace("/", "\\/") + "\n"


def _render_xml(tree, level):
    root = ET.Element("ParameterHandler")

    def build(section, parent):
        for kind, item in section.items():
            if kind == "entry":
                if _admitted(item, level):
                    node = ET.SubElement(parent, encode_key(item.name))
                    for key, text in _entry_record(item).items():
                        ET.SubElement(node, key).text = text or None
            elif _has_entries(item, level):
                build(item, ET.SubElement(parent, encode_key(item.name)))

    build(tree.root, root)
    ET.indent(root, space="  ")
    body = ET.tostring(root, encoding="unicode").replace(" />", "/>")
    return '<?xml version="1.0" encoding="utf-8"?>\n' + body + "\n"


def generate_file(tree, fmt="prm", verbosity="standard"):
    """Render the tree's current values in ``fmt`` at the given verbosity."""
    if verbosity not in VERBOSITY:
        raise ValueError(f"unknown verbosity {verbosity!r}")
    level = VERBOSITY[verbosity]
    renderer = {"prm": _render_prm, "json": _render_json, "xml": _render_xml}[fmt]
    return renderer(tree, level)


# --------------------------------------------------------------------------
# parsing

def _parse_prm(tree, text):
    stack = [tree.root]
    path = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        word, _, rest = line.partition(" ")
        rest = rest.strip()
        if word == "subsection":
            if not rest:
                raise ParamSyntaxError(f"line {lineno}: subsection without a name")
            name = " ".join(rest.split())
            if name not in stack[-1].subsections:
                raise UnknownSubsection("subsection is not declared", _join((*path, name)))
            stack.append(stack[-1].subsections[name])
            path.append(name)
        elif word == "end" and not rest:
            if len(stack) == 1:
                raise ParamSyntaxError(f"line {lineno}: 'end' without a matching subsection")
            stack.pop()
            path.pop()
        elif word == "set":
            name, eq, value = rest.partition("=")
            if not eq:
                raise ParamSyntaxError(f"line {lineno}: expected 'set <name> = <value>'")
            tree.set((*path, " ".join(name.split())), value.strip())
        else:
            raise ParamSyntaxError(f"line {lineno}: cannot parse {raw.strip()!r}")
    if len(stack) != 1:
        raise ParamSyntaxError(f"subsection {_join(path)!r} is not closed")


def _scalar(value, where):
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    raise ParamSyntaxError("expected a string value", where)


def _parse_json(tree, text):
    try:
        data = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ParamSyntaxError(f"invalid json: {exc}") from None
    if not isinstance(data, dict):
        raise ParamSyntaxError("top-level json value must be an object")

    def visit(section, node, path):
        for key, value in node.items():
            name = decode_key(key)
            where = (*path, name)
            if name in section.entries:
                if isinstance(value, dict):
                    if "value" not in value:
                        raise ParamSyntaxError("entry object has no 'value' key", _join(where))
                    value = value["value"]
                tree.set(where, _scalar(value, _join(where)))
            elif name in section.subsections:
                if not isinstance(value, dict):
                    raise ParamSyntaxError("subsection must be an object", _join(where))
                visit(section.subsections[name], value, where)
            elif isinstance(value, dict) and "value" not in value:
                raise UnknownSubsection("subsection is not declared", _join(where))
            else:
                raise UnknownEntry("entry is not declared", _join(where))

    visit(tree.root, data, ())


def _parse_xml(tree, text):
    try:
        root = ET.fromstring(text.strip().encode("utf-8"))
    except ET.ParseError as exc:
        raise ParamSyntaxError(f"invalid xml: {exc}") from None
    if root.tag != "ParameterHandler":
        raise ParamSyntaxError(f"root element must be ParameterHandler, got {root.tag!r}")

    def visit(section, node, path):
        for child in node:
            name = decode_key(child.tag)
            where = (*path, name)
            value_node = child.find("value")
            if name in section.entries:
                if value_node is None:
                    raise ParamSyntaxError("entry has no <value> element", _join(where))
                tree.set(where, value_node.text or "")
            elif name in section.subsections:
                visit(section.subsections[name], child, where)
            elif value_node is None:
                raise UnknownSubsection("subsection is not declared", _join(where))
            else:
                raise UnknownEntry("entry is not declared", _join(where))

    visit(tree.root, root, ())


def parse_file(tree, text, fmt="prm"):
    """Return a copy of ``tree`` whose values are overridden by ``text``.

    Entries absent from ``text`` keep their defaults.
    """
    parsed = tree.copy()
    parsed.reset()
    parser = {"prm": _parse_prm, "json": _parse_json, "xml": _parse_xml}[fmt]
    parser(parsed, text)
    return parsed


def convert(tree, text, in_fmt, out_fmt, verbosity="full"):
    return generate_file(parse_file(tree, text, in_fmt), out_fmt, verbosity)


def format_from_path(path):
    """Parameter format implied by a file extension; unknown extensions mean prm."""
    ext = os.path.splitext(str(path))[1].lower().lstrip(".")
    return ext if ext in FORMATS else "prm"
