"""The 26 basic instructions and their nanoprograms."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Sequence

from rever.machine import CLRA, ELEMENTARY_OPS, OP_BY_NAME, UCLA, inverse_code


@dataclass(frozen=True)
class InstructionDef:
    opcode: int
    mnemonic: str
    nano: tuple[int, ...]
    reads_immediate: bool = False

    def nano_text(self) -> str:
        return "; ".join(ELEMENTARY_OPS[c].name for c in self.nano)


def parse_nano(text: str) -> tuple[int, ...]:
    """Turn "SWP DIP; NOT RA; ..." into a tuple of elementary codes."""
    return tuple(OP_BY_NAME[" ".join(tok.split())] for tok in text.split(";") if tok.strip())


def normalize_mnemonic(text: str) -> str:
    text = " ".join(text.split()).lower()
    return re.sub(r"\s*([,\[\]+])\s*", r"\1", text)


# Subr as printed reads "... SWP SP; SWP MP; SWPSP; NEG RA; NOT RA; SWP SP".
# Traced literally it leaves SP = RA - 1 instead of SP - 1, so the third
# token of that line is dropped, giving the same tail as Push RA.
SUBR_AS_PRINTED = (
    "SWP SP; SWP MP; SWP SP; SWP DIP; SWP MEM; NOT RA; NEG RA; SWP DIP; "
    "SWP SP; SWP MP; SWP SP; NEG RA; NOT RA; SWP SP"
)

_DEFS = (
    # opcode, mnemonic, nanoprogram, reads [IP+1]
    (0, "Nop", "NOP", False),
    (1, "Inc DIP", "SWP DIP; NOT RA; NEG RA; SWP DIP", False),
    (2, "Dec DIP", "SWP DIP; NEG RA; NOT RA; SWP DIP", False),
    (3, "Inc RA", "NOT RA; NEG RA", False),
    (4, "Dec RA", "NEG RA; NOT RA", False),
    (5, "Swap RA,RB", "SWP RB", False),
    (6, "Swap RA,RC", "SWP RC", False),
    (7, "Swap RA,DIP", "SWP DIP", False),
    (8, "Swap RA,SP", "SWP SP", False),
    (9, "Swap RA,MP", "SWP MP", False),
    (10, "Swap RA,[MP]", "SWP MEM", False),
    (11, "Add RA,RB", "NEG RA; NSUB", False),
    (12, "Sub RA,RB", "NSUB; NEG RA", False),
    (13, "Add RA,[IP+1]", "NEG RA; NX SUB", True),
    (14, "Sub RA,[IP+1]", "NX SUB; NEG RA", True),
    (15, "Add RA,IP", "NEG RA; NSUB IP", False),
    (16, "Sub RA,IP", "NSUB IP; NEG RA", False),
    (17, "Neg RA", "NEG RA", False),
    (18, "Jmp dNx", "SWP DIP; NEG RA; NX SUB; SWP DIP", True),
    (
        19,
        "Subr",
        "SWP SP; SWP MP; SWP SP; SWP DIP; SWP MEM; NOT RA; NEG RA; SWP DIP; "
        "SWP SP; SWP MP; NEG RA; NOT RA; SWP SP",
        False,
    ),
    (
        20,
        "Ret",
        "SWP SP; NOT RA; NEG RA; SWP MP; SWP SP; SWP DIP; NEG RA; NOT RA; "
        "SWP MEM; SWP SP; SWP MP; SWP SP; NX SUB; SWP DIP",
        True,
    ),
    (21, "CJmp dNx", "SWP DIP; NEG RA; CNX SUB; SWP DIP", True),
    (22, "CAdd RA,RB", "NEG RA; CNSUB", False),
    (
        23,
        "Push RA",
        "SWP SP; SWP MP; SWP SP; SWP MEM; SWP SP; SWP MP; NEG RA; NOT RA; SWP SP",
        False,
    ),
    (
        24,
        "Pop RA",
        "SWP SP; NOT RA; NEG RA; SWP MP; SWP SP; SWP MEM; SWP SP; SWP MP; SWP SP",
        False,
    ),
    (25, "Clear RA", "CLRA", False),
)


class InstructionTable:
    """Immutable opcode -> InstructionDef map with mnemonic lookup."""

    def __init__(self, defs: Sequence[InstructionDef]):
        self._defs = tuple(defs)
        self._by_mnemonic = {normalize_mnemonic(d.mnemonic): d for d in self._defs}
        self._check()

    def _check(self) -> None:
        assert [d.opcode for d in self._defs] == list(range(len(self._defs)))
        assert len(self._by_mnemonic) == len(self._defs), "duplicate mnemonic"
        for d in self._defs:
            assert 1 <= len(d.nano) <= 14, d
            assert all(0 <= c < len(ELEMENTARY_OPS) for c in d.nano), d
            assert UCLA not in d.nano, d
            assert CLRA not in d.nano or d.mnemonic == "Clear RA", d

    def __getitem__(self, opcode: int) -> InstructionDef:
        return self._defs[opcode]

    def __len__(self) -> int:
        return len(self._defs)

    def __iter__(self) -> Iterator[InstructionDef]:
        return iter(self._defs)

    def __contains__(self, opcode: object) -> bool:
        return isinstance(opcode, int) and 0 <= opcode < len(self._defs)

    def lookup(self, mnemonic: str) -> InstructionDef | None:
        return self._by_mnemonic.get(normalize_mnemonic(mnemonic))


def build_table() -> InstructionTable:
    return InstructionTable(
        InstructionDef(opcode, mnemonic, parse_nano(nano), imm)
        for opcode, mnemonic, nano, imm in _DEFS
    )


def inverse_nano(d: InstructionDef | Sequence[int]) -> tuple[int, ...]:
    """Inverse ops of a nanoprogram, in reverse order."""
    codes = d.nano if isinstance(d, InstructionDef) else d
    return tuple(inverse_code(c) for c in reversed(codes))


TABLE = build_table()
