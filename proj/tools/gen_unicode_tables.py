#!/usr/bin/env python3
"""Regenerate src/unicode_data.cpp.

Probes the Python `regex` module for the \\p{L}, \\p{N} and \\s character
classes and emits them as sorted codepoint ranges. The `regex` module is the
reference engine for the gpt4 pretokenization pattern, so the C++ splitter
classifies codepoints identically by construction.

Usage: python3 tools/gen_unicode_tables.py > src/unicode_data.cpp
"""

import sys

import regex

CLASSES = [
    ("kLetterRanges", r"\p{L}"),
    ("kNumberRanges", r"\p{N}"),
    ("kWhitespaceRanges", r"\s"),
]


def ranges_for(expr: str):
    pat = regex.compile(expr)
    out = []
    start = None
    for cp in range(0x110000):
        ok = not (0xD800 <= cp <= 0xDFFF) and pat.fullmatch(chr(cp)) is not None
        if ok and start is None:
            start = cp
        elif not ok and start is not None:
            out.append((start, cp - 1))
            start = None
    if start is not None:
        out.append((start, 0x10FFFF))
    return out


def main() -> None:
    w = sys.stdout.write
    w("// Generated by tools/gen_unicode_tables.py (regex module %s). Do not edit.\n" % regex.__version__)
    w("\n#include \"batchtok/unicode.hpp\"\n\n")
    w("namespace batchtok::detail {\n")
    for name, expr in CLASSES:
        rs = ranges_for(expr)
        w("\nconst CodepointRange %s[] = {\n" % name)
        for i in range(0, len(rs), 4):
            row = ", ".join("{0x%X, 0x%X}" % r for r in rs[i : i + 4])
            w("    %s,\n" % row)
        w("};\n")
        w("const std::size_t %s_size = sizeof(%s) / sizeof(%s[0]);\n" % (name, name, name))
    w("\n}  // namespace batchtok::detail\n")


if __name__ == "__main__":
    main()
