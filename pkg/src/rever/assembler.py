"""Two-pass assembler and disassembler for the ReveR assembly dialect.

Syntax, one statement per line:

    Inc DIP        ; instruction (mnemonic matched case-insensitively)
    :@loop         ; label, bound to the address of the next word
    #@2-@1-1       ; immediate word: signed sum of labels and integers

``;`` starts a comment anywhere on a line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from rever.isa import TABLE, InstructionTable
from rever.word import WORD_MASK, WORD_MIN, wrap

INSTRUCTION = "instruction"
IMMEDIATE = "immediate"
LABEL = "label"
BLANK = "blank"

_LABEL_RE = re.compile(r"@\w+")
_TERM_RE = re.compile(r"\s*([+-])?\s*(@\w+|0[xX][0-9a-fA-F]+|\d+)\s*")

JUMPS = ("Jmp dNx", "CJmp dNx")
# words a jump may legitimately land on
_LANDING = ("Jmp dNx", "CJmp dNx", "Subr", "Ret")


class AsmError(Exception):
    def __init__(self, message: str, line_no: Optional[int] = None):
        self.line_no = line_no
        self.message = message
        super().__init__(f"line {line_no}: {message}" if line_no is not None else message)


class UnknownMnemonic(AsmError):
    pass


class DuplicateLabel(AsmError):
    pass


class UndefinedLabel(AsmError):
    pass


class MalformedExpression(AsmError):
    pass


class ImmediateOverflow(AsmError):
    pass


@dataclass(frozen=True)
class SourceLine:
    kind: str
    text: str
    line_no: int
    body: str = ""


@dataclass(frozen=True)
class ImmExpr:
    # (sign, label-or-int) pairs
    terms: tuple[tuple[int, Union[str, int]], ...]

    def labels(self) -> list[str]:
        return [t for _, t in self.terms if isinstance(t, str)]

    def evaluate(self, symbols: dict[str, int], line_no: Optional[int] = None) -> int:
        total = 0
        for sign, term in self.terms:
            if isinstance(term, str):
                if term not in symbols:
                    raise UndefinedLabel(f"undefined label {term}", line_no)
                term = symbols[term]
            total += sign * term
        return total


@dataclass
class Image:
    words: list[int]
    symbols: dict[str, int] = field(default_factory=dict)
    # address -> (source line number, source text)
    listing: dict[int, tuple[int, str]] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def listing_text(self) -> str:
        lines = []
        for addr, word in enumerate(self.words):
            _, src = self.listing.get(addr, (0, ""))
            lines.append(f"{addr}\t{word}\t{src}")
        return "\n".join(lines) + ("\n" if lines else "")


def classify(text: str, line_no: int) -> SourceLine:
    body = text.split(";", 1)[0].strip()
    if not body:
        return SourceLine(BLANK, text, line_no)
    if body.startswith(":"):
        return SourceLine(LABEL, text, line_no, body[1:].strip())
    if body.startswith("#"):
        return SourceLine(IMMEDIATE, text, line_no, body[1:].strip())
    return SourceLine(INSTRUCTION, text, line_no, body)


def parse_expr(text: str, line_no: Optional[int] = None, strict: bool = False) -> ImmExpr:
    terms = []
    pos = 0
    text = text.replace("−", "-")
    if not text.strip():
        raise MalformedExpression("empty immediate", line_no)
    while pos < len(text):
        m = _TERM_RE.match(text, pos)
        if not m or m.end() == pos:
            raise MalformedExpression(f"cannot parse immediate {text!r}", line_no)
        sign_text, tok = m.groups()
        if sign_text is None and terms:
            raise MalformedExpression(f"missing operator in {text!r}", line_no)
        sign = -1 if sign_text == "-" else 1
        if tok.startswith("@"):
            terms.append((sign, tok))
        elif tok[:2].lower() == "0x":
            if strict:
                raise MalformedExpression(f"hexadecimal literal {tok} in strict mode", line_no)
            terms.append((sign, int(tok, 16)))
        else:
            terms.append((sign, int(tok)))
        pos = m.end()
    return ImmExpr(tuple(terms))


def assemble(source: str, table: InstructionTable = TABLE, strict: bool = False) -> Image:
    """Assemble source text into an Image based at address 0."""
    lines = [classify(t, n) for n, t in enumerate(source.splitlines(), start=1)]

    # pass 1: addresses and labels
    symbols: dict[str, int] = {}
    addr = 0
    for ln in lines:
        if ln.kind == LABEL:
            name = ln.body
            if not _LABEL_RE.fullmatch(name):
                raise MalformedExpression(f"bad label name {name!r}", ln.line_no)
            if name in symbols:
                raise DuplicateLabel(f"duplicate label {name}", ln.line_no)
            symbols[name] = addr
        elif ln.kind in (INSTRUCTION, IMMEDIATE):
            addr += 1

    # pass 2: emit
    image = Image([], symbols)
    exprs: dict[int, ImmExpr] = {}
    for ln in lines:
        if ln.kind == INSTRUCTION:
            d = table.lookup(ln.body)
            if d is None:
                raise UnknownMnemonic(f"unknown mnemonic {ln.body!r}", ln.line_no)
            word = d.opcode
        elif ln.kind == IMMEDIATE:
            expr = parse_expr(ln.body, ln.line_no, strict)
            value = expr.evaluate(symbols, ln.line_no)
            if not WORD_MIN <= value <= WORD_MASK:
                raise ImmediateOverflow(f"immediate {value} does not fit in 32 bits", ln.line_no)
            exprs[len(image.words)] = expr
            word = wrap(value)
        else:
            continue
        image.listing[len(image.words)] = (ln.line_no, ln.text.strip())
        image.words.append(word)

    image.warnings = _lint(lines, image, exprs, table)
    return image


def _lint(
    lines: Sequence[SourceLine],
    image: Image,
    exprs: dict[int, ImmExpr],
    table: InstructionTable,
) -> list[str]:
    warnings = []
    code = [ln for ln in lines if ln.kind in (INSTRUCTION, IMMEDIATE)]
    if not code or code[0].kind != INSTRUCTION or table.lookup(code[0].body) is not table.lookup("Inc DIP"):
        warnings.append("no Inc DIP: program does not start with Inc DIP")

    for addr, ln in enumerate(code):
        if ln.kind != INSTRUCTION:
            continue
        d = table.lookup(ln.body)
        if not d.reads_immediate:
            continue
        if addr + 1 >= len(code) or code[addr + 1].kind != IMMEDIATE:
            warnings.append(f"line {ln.line_no}: {d.mnemonic} is not followed by an immediate")
            continue
        if d.mnemonic not in JUMPS:
            continue
        for sign, term in exprs[addr + 1].terms:
            if sign < 0 or not isinstance(term, str):
                continue
            target = image.symbols[term]
            landing = image.words[target] if target < len(image.words) else None
            if landing is None or landing not in [table.lookup(m).opcode for m in _LANDING]:
                warnings.append(
                    f"line {ln.line_no}: jump target {term} has no compensating Jmp dNx"
                )
    return warnings


def disassemble(
    image: Union[Image, Sequence[int]], table: InstructionTable = TABLE
) -> str:
    """Render words as source text that assembles back to the same words."""
    if isinstance(image, Image):
        words, symbols = image.words, image.symbols
    else:
        words, symbols = list(image), {}
    labels_at: dict[int, list[str]] = {}
    for name, addr in symbols.items():
        labels_at.setdefault(addr, []).append(name)

    out = []
    expect_immediate = False
    for addr, word in enumerate(words):
        for name in labels_at.get(addr, ()):
            out.append(f":{name}")
        if expect_immediate:
            out.append(f"#{word}")
            expect_immediate = False
        elif word in table:
            d = table[word]
            out.append(d.mnemonic)
            expect_immediate = d.reads_immediate
        else:
            out.append(f"#{word} ; not an opcode")
    # labels bound past the last word
    for name, addr in symbols.items():
        if addr >= len(words):
            out.append(f":{name}")
    return "\n".join(out) + ("\n" if out else "")
