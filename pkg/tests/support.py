"""Random machine states and an independent oracle-driven stepper for tests."""

from __future__ import annotations

import random

from hypothesis import strategies as st

from rever.isa import TABLE
from rever.machine import HistoryTape, MachineState, Memory, RegisterFile, Fault, FaultKind
from rever.oracle import oracle_internal
from rever.word import WORD_MAX, WORD_MIN, wrap

SMALL_MEM = 32


def _rand_word(rng: random.Random, mem_size: int) -> int:
    pick = rng.random()
    if pick < 0.5:
        return rng.randrange(mem_size - 1)
    if pick < 0.7:
        return rng.randint(-3, 3)
    if pick < 0.8:
        return rng.choice((WORD_MIN, WORD_MAX, -1, WORD_MIN + 1))
    return rng.randint(WORD_MIN, WORD_MAX)


def random_state(rng: random.Random, mem_size: int = SMALL_MEM) -> MachineState:
    """A state with CM = 0 whose other fields are mostly in-range addresses."""
    regs = RegisterFile(0, *(_rand_word(rng, mem_size) for _ in range(7)))
    mem = Memory(mem_size, [_rand_word(rng, mem_size) for _ in range(mem_size)])
    history = HistoryTape([rng.randint(WORD_MIN, WORD_MAX) for _ in range(rng.randrange(4))])
    return MachineState(regs, mem, history)


words = st.one_of(
    st.integers(0, SMALL_MEM - 2),
    st.integers(-3, 3),
    st.sampled_from([WORD_MIN, WORD_MAX, -1]),
    st.integers(WORD_MIN, WORD_MAX),
)


@st.composite
def states(draw, mem_size: int = SMALL_MEM) -> MachineState:
    regs = RegisterFile(0, *(draw(words) for _ in range(7)))
    cells = draw(st.lists(words, min_size=mem_size, max_size=mem_size))
    history = draw(st.lists(st.integers(WORD_MIN, WORD_MAX), max_size=3))
    return MachineState(regs, Memory(mem_size, cells), HistoryTape(history))


def oracle_step(state: MachineState) -> MachineState:
    """One forward step built from the reference semantics instead of nanoprograms."""
    word = state.mem[state.regs.ip]
    if not 0 <= word < 26:
        raise Fault(FaultKind.INVALID_OPCODE, f"opcode {word}")
    s = oracle_internal(state, word)
    s.regs.ip = wrap(s.regs.ip + s.regs.dip)
    s.steps_executed = state.steps_executed + 1
    return s


def random_program(rng: random.Random, length: int = 60) -> list[int]:
    """Inc DIP followed by random instructions, each reader followed by an immediate."""
    words = [1]
    while len(words) < length:
        op = rng.randrange(len(TABLE))
        words.append(op)
        if TABLE[op].reads_immediate:
            words.append(rng.randint(-4, 4))
    return words
