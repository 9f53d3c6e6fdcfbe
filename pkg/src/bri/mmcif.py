"""Minimal STAR/mmCIF reader.

Handles what deposited PDBx files use: ``data_`` blocks, ``loop_`` tables,
single ``_tag value`` pairs, quoted values and semicolon text fields. Only the
first data block is read. Values come back as raw strings; ``.`` and ``?`` are
left for the caller to interpret.
"""
from __future__ import annotations

import gzip
import io
import os
from typing import Iterator, TextIO

from .errors import ParseError

Category = dict[str, list[str]]


def _open_text(source) -> TextIO:
    """Text handle for a path, bytes, or a binary/text stream; gzip is sniffed."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            data = fh.read()
    elif isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    else:
        data = source.read()
        if isinstance(data, str):
            return io.StringIO(data)
    if data[:2] == b"\x1f\x8b":
        data = gzip.decompress(data)
    return io.StringIO(data.decode("utf-8", errors="replace"))


def _tokens(fh: TextIO) -> Iterator[tuple[str, int, bool]]:
    """Yield ``(token, line_number, is_value_literal)``.

    ``is_value_literal`` is true for quoted strings and text fields, which may
    never be read as keywords or tags.
    """
    lineno = 0
    pending_text: list[str] | None = None
    text_start = 0
    for raw in fh:
        lineno += 1
        line = raw.rstrip("\r\n")
        if pending_text is not None:
            if line.startswith(";"):
                yield "\n".join(pending_text), text_start, True
                pending_text = None
                line = line[1:]
            else:
                pending_text.append(line)
                continue
        elif line.startswith(";"):
            pending_text = [line[1:]]
            text_start = lineno
            continue
        i, n = 0, len(line)
        while i < n:
            ch = line[i]
            if ch in " \t":
                i += 1
            elif ch == "#":
                break
            elif ch in "'\"":
                j = i + 1
                while True:
                    j = line.find(ch, j)
                    if j < 0:
                        raise ParseError("unterminated quoted value", lineno)
                    if j + 1 == n or line[j + 1] in " \t":
                        break
                    j += 1
                yield line[i + 1 : j], lineno, True
                i = j + 1
            else:
                j = i
                while j < n and line[j] not in " \t":
                    j += 1
                yield line[i:j], lineno, False
                i = j
    if pending_text is not None:
        raise ParseError("unterminated semicolon text field", text_start)


def _split_tag(tag: str, lineno: int) -> tuple[str, str]:
    if "." not in tag:
        raise ParseError("tag without category", lineno, tag)
    cat, item = tag[1:].split(".", 1)
    return cat, item


def read_cif(source) -> tuple[str, dict[str, Category]]:
    """Parse the first data block into ``(block_name, {category: {item: values}})``."""
    fh = _open_text(source)
    tokens = _tokens(fh)
    block: str | None = None
    cats: dict[str, Category] = {}
    pushback: list[tuple[str, int, bool]] = []

    def nxt():
        if pushback:
            return pushback.pop()
        return next(tokens, None)

    while True:
        tok = nxt()
        if tok is None:
            break
        text, lineno, literal = tok
        low = text.lower()
        if not literal and low.startswith("data_"):
            if block is not None:
                break
            block = text[5:]
        elif not literal and low == "loop_":
            tags: list[tuple[str, str]] = []
            while True:
                t = nxt()
                if t is None or t[2] or not t[0].startswith("_"):
                    if t is not None:
                        pushback.append(t)
                    break
                tags.append(_split_tag(t[0], t[1]))
            if not tags:
                raise ParseError("loop_ without tags", lineno)
            values: list[str] = []
            last_line = lineno
            while True:
                t = nxt()
                if t is None:
                    break
                if not t[2] and (t[0].startswith("_") or t[0].lower() in ("loop_", "stop_") or t[0].lower().startswith(("data_", "save_"))):
                    pushback.append(t)
                    break
                values.append(t[0])
                last_line = t[1]
            if len(values) % len(tags):
                raise ParseError(
                    f"loop has {len(values)} values for {len(tags)} columns", last_line, f"{tags[0][0]}"
                )
            ncol = len(tags)
            for k, (cat, item) in enumerate(tags):
                cats.setdefault(cat, {})[item] = values[k::ncol]
        elif not literal and text.startswith("_"):
            cat, item = _split_tag(text, lineno)
            val = nxt()
            if val is None or (not val[2] and (val[0].startswith("_") or val[0].lower() == "loop_")):
                raise ParseError("tag without value", lineno, text)
            cats.setdefault(cat, {})[item] = [val[0]]
        elif not literal and low.startswith("save_"):
            continue
        else:
            if block is None:
                raise ParseError("content before data_ block", lineno, text)
            raise ParseError("value without tag", lineno, text)
    if block is None:
        raise ParseError("no data_ block found")
    return block, cats
