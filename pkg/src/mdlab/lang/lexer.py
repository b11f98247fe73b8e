"""Tokenizer for MiniJ source text."""

from __future__ import annotations

from dataclasses import dataclass

from .nodes import Diagnostic, Span

KEYWORDS = frozenset(
    """class extends static final private new this null true false
       if else while try catch throw return break continue print
       void int bool str""".split()
)

_TWO_CHAR = ("<=", ">=", "==", "!=")
_ONE_CHAR = "{}();,.=<>+-*/%!"

_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "\\": "\\", '"': '"'}
_UNESCAPES = {v: k for k, v in _ESCAPES.items()}


@dataclass(frozen=True)
class Token:
    kind: str  # ident | kw | int | string | punct | eof
    value: str
    span: Span
    text: str = ""  # raw matched text (strings keep their decoded value in `value`)


def escape_string(s: str, escape_newlines: bool = True) -> str:
    """Render `s` as a MiniJ double-quoted literal.

    With escape_newlines=False a raw newline is emitted verbatim, which is
    not re-lexable as a single literal; the parser recovers from it with an
    unterminated-string diagnostic.  That switch exists so a decompiler
    backend can reproduce the classic unescaped-literal defect.
    """
    out = ['"']
    for ch in s:
        if ch == "\n" and not escape_newlines:
            out.append(ch)
        elif ch in _UNESCAPES:
            out.append("\\" + _UNESCAPES[ch])
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def tokenize(text: str) -> tuple[list[Token], list[Diagnostic]]:
    """Produce the token stream plus any recovered lexical diagnostics.

    The only recovery implemented is the unterminated string literal: the
    literal is closed at the newline (or end of input) and lexing resumes,
    so a parse can still succeed with the error recorded.
    """
    toks: list[Token] = []
    diags: list[Diagnostic] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            i += 1
            continue
        if ch == "/" and i + 1 < n and text[i + 1] == "/":
            j = text.find("\n", i)
            i = n if j < 0 else j + 1
            continue
        start = i
        if ch.isalpha() or ch == "_":
            while i < n and (text[i].isalnum() or text[i] == "_"):
                i += 1
            word = text[start:i]
            kind = "kw" if word in KEYWORDS else "ident"
            toks.append(Token(kind, word, (start, i)))
            continue
        if ch.isdigit():
            while i < n and text[i].isdigit():
                i += 1
            toks.append(Token("int", text[start:i], (start, i)))
            continue
        if ch == '"':
            i += 1
            buf: list[str] = []
            closed = False
            saw_newline = False
            while i < n:
                c = text[i]
                if c == '"':
                    i += 1
                    closed = True
                    break
                if c == "\n":
                    # Raw line breaks inside a literal are diagnosed but the
                    # literal keeps going: the value survives intact, the
                    # parse can still succeed, and the error stays anchored
                    # to the member that contains it.
                    saw_newline = True
                    buf.append(c)
                    i += 1
                    continue
                if c == "\\" and i + 1 < n:
                    esc = text[i + 1]
                    if esc in _ESCAPES:
                        buf.append(_ESCAPES[esc])
                        i += 2
                        continue
                    diags.append(
                        Diagnostic(f"unknown escape '\\{esc}' in string literal", (i, i + 2))
                    )
                    buf.append(esc)
                    i += 2
                    continue
                buf.append(c)
                i += 1
            if not closed:
                diags.append(Diagnostic("unterminated string literal", (start, i)))
            elif saw_newline:
                diags.append(
                    Diagnostic("string literal contains an unescaped line break", (start, i))
                )
            toks.append(Token("string", "".join(buf), (start, i)))
            continue
        two = text[i : i + 2]
        if two in _TWO_CHAR:
            toks.append(Token("punct", two, (start, i + 2)))
            i += 2
            continue
        if ch in _ONE_CHAR:
            toks.append(Token("punct", ch, (start, i + 1)))
            i += 1
            continue
        diags.append(Diagnostic(f"unexpected character {ch!r}", (start, start + 1)))
        i += 1
    toks.append(Token("eof", "", (n, n)))
    return toks, diags
