"""Line-oriented block text format shared by scenario, paint table and model files.

The grammar is deliberately small::

    # comment
    key = value
    kind [label] {
        key = value
    }

Blocks are one level deep; every value is kept as its raw string and
converted by the consumer, so type errors can point at the offending line.
"""
from __future__ import annotations

from dataclasses import dataclass, field


class BlockFormatError(ValueError):
    """Parse or conversion failure, carrying file path and line number."""

    def __init__(self, message: str, path: str = "<text>", line: int = 0):
        super().__init__(f"{path}:{line}: {message}" if line else f"{path}: {message}")
        self.path = path
        self.line = line
        self.reason = message


@dataclass
class Entry:
    key: str
    value: str
    line: int
    path: str = "<text>"

    def _fail(self, message: str) -> BlockFormatError:
        return BlockFormatError(f"key '{self.key}': {message}", self.path, self.line)

    def as_str(self) -> str:
        return self.value

    def as_int(self) -> int:
        try:
            return int(self.value)
        except ValueError:
            raise self._fail(f"expected integer, got '{self.value}'") from None

    def as_float(self) -> float:
        try:
            return float(self.value)
        except ValueError:
            raise self._fail(f"expected number, got '{self.value}'") from None

    def as_bool(self) -> bool:
        low = self.value.lower()
        if low in ("true", "yes", "on", "1"):
            return True
        if low in ("false", "no", "off", "0"):
            return False
        raise self._fail(f"expected boolean, got '{self.value}'")

    def as_list(self) -> list[str]:
        # Either whitespace or comma separated.
        parts = [p for p in self.value.replace(",", " ").split() if p]
        if not parts:
            raise self._fail("expected a non-empty list")
        return parts

    def as_float_list(self) -> list[float]:
        out = []
        for part in self.as_list():
            try:
                out.append(float(part))
            except ValueError:
                raise self._fail(f"expected numbers, got '{part}'") from None
        return out


@dataclass
class Block:
    kind: str
    label: str | None
    line: int
    path: str = "<text>"
    entries: list[Entry] = field(default_factory=list)

    def name(self) -> str:
        return f"{self.kind} {self.label}" if self.label else self.kind

    def keys(self) -> list[str]:
        return [e.key for e in self.entries]

    def find(self, key: str) -> Entry | None:
        for entry in self.entries:
            if entry.key == key:
                return entry
        return None

    def require(self, key: str) -> Entry:
        entry = self.find(key)
        if entry is None:
            raise BlockFormatError(
                f"block '{self.name()}' is missing required key '{key}'",
                self.path, self.line)
        return entry


@dataclass
class Document:
    path: str = "<text>"
    entries: list[Entry] = field(default_factory=list)
    blocks: list[Block] = field(default_factory=list)

    def find(self, key: str) -> Entry | None:
        for entry in self.entries:
            if entry.key == key:
                return entry
        return None

    def blocks_of(self, kind: str) -> list[Block]:
        return [b for b in self.blocks if b.kind == kind]


def parse_text(text: str, path: str = "<text>") -> Document:
    doc = Document(path=path)
    current: Block | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if line == "}":
            if current is None:
                raise BlockFormatError("unexpected '}'", path, lineno)
            current = None
            continue
        if line.endswith("{"):
            if current is not None:
                raise BlockFormatError(
                    f"nested block inside '{current.name()}' is not allowed",
                    path, lineno)
            head = line[:-1].split()
            if len(head) == 1:
                current = Block(head[0], None, lineno, path)
            elif len(head) == 2:
                current = Block(head[0], head[1], lineno, path)
            else:
                raise BlockFormatError(
                    f"bad block header '{line}'", path, lineno)
            doc.blocks.append(current)
            continue
        if "=" in line:
            key, _, value = line.partition("=")
            entry = Entry(key.strip(), value.strip(), lineno, path)
            if not entry.key:
                raise BlockFormatError("empty key", path, lineno)
            if current is None:
                doc.entries.append(entry)
            else:
                current.entries.append(entry)
            continue
        raise BlockFormatError(f"cannot parse line '{line}'", path, lineno)
    if current is not None:
        raise BlockFormatError(
            f"block '{current.name()}' opened at line {current.line} is never closed",
            path, current.line)
    return doc


def parse_file(path: str) -> Document:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_text(handle.read(), path=str(path))


def format_value(value) -> str:
    """Render a scalar or sequence as block-file text. Floats use repr so
    they survive a write/parse round trip bit for bit."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return " ".join(format_value(v) for v in value)
    return str(value)


class Writer:
    """Accumulates entries and blocks and renders the canonical text."""

    def __init__(self):
        self._lines: list[str] = []

    def entry(self, key: str, value) -> None:
        self._lines.append(f"{key} = {format_value(value)}")

    def comment(self, text: str) -> None:
        self._lines.append(f"# {text}")

    def blank(self) -> None:
        self._lines.append("")

    def block(self, kind: str, items: dict, label: str | None = None) -> None:
        head = f"{kind} {label} {{" if label else f"{kind} {{"
        self._lines.append(head)
        for key, value in items.items():
            self._lines.append(f"    {key} = {format_value(value)}")
        self._lines.append("}")

    def text(self) -> str:
        return "\n".join(self._lines) + "\n"


def _strip_comment(line: str) -> str:
    pos = line.find("#")
    return line if pos < 0 else line[:pos]
