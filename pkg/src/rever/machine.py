"""Machine state, elementary reversible operations and the two-phase step.

A step is

    CM := CM + MEM[IP]; Internal(CM); CM := CM - MEM[IP]; IP := IP + DIP

and its inverse is

    IP := IP - DIP; CM := CM + MEM[IP]; Internal^-1(CM); CM := CM - MEM[IP]

where ``Internal`` runs the nanoprogram bound to opcode CM and
``Internal^-1`` runs the inverse of each elementary operation in reverse
order.  All steps are transactional: a fault leaves the state exactly as
it was before the step began.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Callable, Optional, Sequence

from rever.word import WORD_MASK, wrap

if TYPE_CHECKING:
    from rever.isa import InstructionTable

DEFAULT_MEMORY_SIZE = 65536
DEFAULT_HISTORY_CAP = 1 << 20


class FaultKind(Enum):
    MEMORY_OUT_OF_RANGE = "MemoryOutOfRange"
    INVALID_OPCODE = "InvalidOpcode"
    UCLA_NONZERO_RA = "UclaNonzeroRA"
    UCLA_EMPTY_HISTORY = "UclaEmptyHistory"
    HISTORY_OVERFLOW = "HistoryOverflow"
    STEP_LIMIT_EXCEEDED = "StepLimitExceeded"


class Fault(Exception):
    """A runtime fault.

    ``position`` is the index inside the nanoprogram where the failing
    elementary operation sits (None for faults raised by the external
    phase).  ``state`` is a snapshot of the machine as it was before the
    faulting step.
    """

    def __init__(
        self,
        kind: FaultKind,
        detail: str = "",
        *,
        at_step: Optional[int] = None,
        position: Optional[int] = None,
        state: Optional["MachineState"] = None,
    ):
        self.kind = kind
        self.detail = detail
        self.at_step = at_step
        self.position = position
        self.state = state
        super().__init__(self._message())

    def _message(self) -> str:
        msg = self.kind.value
        if self.detail:
            msg += f": {self.detail}"
        if self.position is not None:
            msg += f" (nanoprogram position {self.position})"
        if self.at_step is not None:
            msg += f" at step {self.at_step}"
        return msg

    def __str__(self) -> str:
        return self._message()


# ---------------------------------------------------------------------------
# Machine state

REGISTER_NAMES = ("cm", "ip", "dip", "sp", "mp", "ra", "rb", "rc")


@dataclass(slots=True)
class RegisterFile:
    cm: int = 0
    ip: int = 0
    dip: int = 0
    sp: int = 0
    mp: int = 0
    ra: int = 0
    rb: int = 0
    rc: int = 0

    def copy(self) -> "RegisterFile":
        return RegisterFile(
            self.cm, self.ip, self.dip, self.sp, self.mp, self.ra, self.rb, self.rc
        )

    def as_dict(self) -> dict[str, int]:
        return {name: getattr(self, name) for name in REGISTER_NAMES}


class Memory:
    """Flat word-addressed memory shared by code, data and the stack."""

    __slots__ = ("cells",)

    def __init__(self, size: int = DEFAULT_MEMORY_SIZE, words: Sequence[int] = ()):
        if size < 0:
            raise ValueError("memory size must be non-negative")
        if len(words) > size:
            raise ValueError(f"image of {len(words)} words does not fit in {size} words")
        self.cells = [wrap(w) for w in words]
        self.cells.extend([0] * (size - len(self.cells)))

    @property
    def size(self) -> int:
        return len(self.cells)

    def index(self, address: int) -> int:
        """Map a word-valued address to a cell index, faulting when out of range."""
        i = address & WORD_MASK
        if i >= len(self.cells):
            raise Fault(
                FaultKind.MEMORY_OUT_OF_RANGE,
                f"address {i:#x} outside memory of {len(self.cells)} words",
            )
        return i

    def __getitem__(self, address: int) -> int:
        return self.cells[self.index(address)]

    def __setitem__(self, address: int, value: int) -> None:
        self.cells[self.index(address)] = wrap(value)

    def __len__(self) -> int:
        return len(self.cells)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Memory):
            return NotImplemented
        return self.cells == other.cells

    def copy(self) -> "Memory":
        m = Memory.__new__(Memory)
        m.cells = self.cells.copy()
        return m


class HistoryTape:
    """Stack of words discarded by Clear RA."""

    __slots__ = ("stack", "cap")

    def __init__(self, stack: Sequence[int] = (), cap: int = DEFAULT_HISTORY_CAP):
        self.stack = list(stack)
        self.cap = cap

    @property
    def depth(self) -> int:
        return len(self.stack)

    def top(self) -> Optional[int]:
        return self.stack[-1] if self.stack else None

    def push(self, value: int) -> None:
        if len(self.stack) >= self.cap:
            raise Fault(FaultKind.HISTORY_OVERFLOW, f"history tape full ({self.cap} entries)")
        self.stack.append(value)

    def pop(self) -> int:
        if not self.stack:
            raise Fault(FaultKind.UCLA_EMPTY_HISTORY, "history tape is empty")
        return self.stack.pop()

    def __len__(self) -> int:
        return len(self.stack)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HistoryTape):
            return NotImplemented
        return self.stack == other.stack

    def copy(self) -> "HistoryTape":
        return HistoryTape(self.stack, self.cap)


@dataclass(eq=False)
class MachineState:
    regs: RegisterFile = field(default_factory=RegisterFile)
    mem: Memory = field(default_factory=Memory)
    history: HistoryTape = field(default_factory=HistoryTape)
    steps_executed: int = 0

    @classmethod
    def boot(
        cls,
        words: Sequence[int] = (),
        memory_size: int = DEFAULT_MEMORY_SIZE,
        history_cap: int = DEFAULT_HISTORY_CAP,
    ) -> "MachineState":
        """Power-on state: image at address 0, SP at the last cell, all else zero."""
        mem = Memory(memory_size, words)
        regs = RegisterFile(sp=wrap(memory_size - 1))
        return cls(regs, mem, HistoryTape(cap=history_cap))

    def copy(self) -> "MachineState":
        return MachineState(
            self.regs.copy(), self.mem.copy(), self.history.copy(), self.steps_executed
        )

    def __eq__(self, other: object) -> bool:
        # steps_executed is bookkeeping and deliberately not compared
        if not isinstance(other, MachineState):
            return NotImplemented
        return (
            self.regs == other.regs
            and self.mem == other.mem
            and self.history == other.history
        )


# ---------------------------------------------------------------------------
# Elementary operations

NOP, NOT_RA, NEG_RA, SWP_RB, SWP_RC, SWP_DIP, SWP_SP, SWP_MP = range(8)
SWP_MEM, NSUB, NX_SUB, NSUB_IP, CNSUB, CNX_SUB, CLRA, UCLA = range(8, 16)


@dataclass(frozen=True)
class ElementaryOp:
    code: int
    name: str
    inverse_code: int


ELEMENTARY_OPS: tuple[ElementaryOp, ...] = tuple(
    ElementaryOp(code, name, code if code < CLRA else (UCLA if code == CLRA else CLRA))
    for code, name in enumerate(
        (
            "NOP", "NOT RA", "NEG RA", "SWP RB", "SWP RC", "SWP DIP", "SWP SP",
            "SWP MP", "SWP MEM", "NSUB", "NX SUB", "NSUB IP", "CNSUB", "CNX SUB",
            "CLRA", "UCLA",
        )
    )
)

OP_BY_NAME = {op.name: op.code for op in ELEMENTARY_OPS}


def inverse_code(code: int) -> int:
    return ELEMENTARY_OPS[code].inverse_code


def _nop(s: MachineState) -> None:
    pass


def _not_ra(s: MachineState) -> None:
    r = s.regs
    r.ra = wrap(-1 - r.ra)


def _neg_ra(s: MachineState) -> None:
    r = s.regs
    r.ra = wrap(-r.ra)


def _swp_rb(s: MachineState) -> None:
    r = s.regs
    r.ra, r.rb = r.rb, r.ra


def _swp_rc(s: MachineState) -> None:
    r = s.regs
    r.ra, r.rc = r.rc, r.ra


def _swp_dip(s: MachineState) -> None:
    r = s.regs
    r.ra, r.dip = r.dip, r.ra


def _swp_sp(s: MachineState) -> None:
    r = s.regs
    r.ra, r.sp = r.sp, r.ra


def _swp_mp(s: MachineState) -> None:
    r = s.regs
    r.ra, r.mp = r.mp, r.ra


def _swp_mem(s: MachineState) -> None:
    r = s.regs
    cells = s.mem.cells
    i = s.mem.index(r.mp)
    r.ra, cells[i] = cells[i], r.ra


def _nsub(s: MachineState) -> None:
    r = s.regs
    r.ra = wrap(r.rb - r.ra)


def _nx_sub(s: MachineState) -> None:
    r = s.regs
    r.ra = wrap(s.mem[wrap(r.ip + 1)] - r.ra)


def _nsub_ip(s: MachineState) -> None:
    r = s.regs
    r.ra = wrap(r.ip - r.ra)


def _cnsub(s: MachineState) -> None:
    r = s.regs
    r.ra = wrap((r.rb if r.rc > 0 else 0) - r.ra)


def _cnx_sub(s: MachineState) -> None:
    r = s.regs
    # the immediate cell is addressed even when the condition is false
    nx = s.mem[wrap(r.ip + 1)]
    r.ra = wrap((nx if r.rc > 0 else 0) - r.ra)


def _clra(s: MachineState) -> None:
    s.history.push(s.regs.ra)
    s.regs.ra = 0


def _ucla(s: MachineState) -> None:
    if s.regs.ra != 0:
        raise Fault(FaultKind.UCLA_NONZERO_RA, f"RA = {s.regs.ra}")
    s.regs.ra = s.history.pop()


_DISPATCH: tuple[Callable[[MachineState], None], ...] = (
    _nop, _not_ra, _neg_ra, _swp_rb, _swp_rc, _swp_dip, _swp_sp, _swp_mp,
    _swp_mem, _nsub, _nx_sub, _nsub_ip, _cnsub, _cnx_sub, _clra, _ucla,
)


def apply_elementary(state: MachineState, code: int) -> None:
    """Apply one elementary operation in place.

    Faults are raised before any field is modified.
    """
    if not 0 <= code < len(_DISPATCH):
        raise ValueError(f"elementary code {code} outside 0..15")
    _DISPATCH[code](state)


NanoHook = Callable[[int, int, MachineState], None]


def run_nanoprogram(
    state: MachineState,
    codes: Sequence[int],
    backward: bool = False,
    on_op: Optional[NanoHook] = None,
) -> None:
    """Execute a nanoprogram in place, or its inverse when ``backward``.

    On a fault the operations already applied are undone, so the state is
    left as it was on entry, and the fault records the failing position.
    ``on_op(position, code, state)`` is called after each applied op.
    """
    n = len(codes)
    if backward:
        order = range(n - 1, -1, -1)
        seq = [inverse_code(codes[i]) for i in order]
    else:
        order = range(n)
        seq = list(codes)
    done = 0
    try:
        for pos, code in zip(order, seq):
            _DISPATCH[code](state)
            done += 1
            if on_op is not None:
                on_op(pos, code, state)
    except Fault as f:
        for code in reversed(seq[:done]):
            _DISPATCH[inverse_code(code)](state)
        f.position = list(order)[done]
        raise


# ---------------------------------------------------------------------------
# Steps


def _default_table() -> "InstructionTable":
    from rever.isa import TABLE

    return TABLE


def _internal(
    state: MachineState,
    isa: "InstructionTable",
    word: int,
    backward: bool,
    on_op: Optional[NanoHook],
) -> int:
    r = state.regs
    opcode = r.cm + word
    if not 0 <= opcode < len(isa):
        raise Fault(FaultKind.INVALID_OPCODE, f"opcode {opcode} at address {r.ip & WORD_MASK:#x}")
    r.cm = opcode
    ip = r.ip
    try:
        run_nanoprogram(state, isa[opcode].nano, backward, on_op)
    finally:
        assert r.cm == opcode and r.ip == ip, "internal phase modified CM or IP"
        # re-read: an instruction that rewrote its own word leaves CM != 0
        r.cm = wrap(r.cm - state.mem[ip])
    return opcode


def step_forward(
    state: MachineState,
    isa: Optional["InstructionTable"] = None,
    on_op: Optional[NanoHook] = None,
) -> int:
    """Execute one step in place and return the opcode executed."""
    if isa is None:
        isa = _default_table()
    r = state.regs
    try:
        word = state.mem[r.ip]
        opcode = _internal(state, isa, word, False, on_op)
    except Fault as f:
        f.at_step = state.steps_executed
        f.state = state.copy()
        raise
    r.ip = wrap(r.ip + r.dip)
    state.steps_executed += 1
    return opcode


def step_backward(
    state: MachineState,
    isa: Optional["InstructionTable"] = None,
    on_op: Optional[NanoHook] = None,
) -> int:
    """Undo one step in place and return the opcode that was reversed."""
    if isa is None:
        isa = _default_table()
    r = state.regs
    old_ip = r.ip
    r.ip = wrap(r.ip - r.dip)
    try:
        word = state.mem[r.ip]
        opcode = _internal(state, isa, word, True, on_op)
    except Fault as f:
        r.ip = old_ip
        f.at_step = state.steps_executed
        f.state = state.copy()
        raise
    state.steps_executed -= 1
    return opcode


# ---------------------------------------------------------------------------
# Driver


class HaltReason(Enum):
    HALTED = "halted"
    STEP_LIMIT = "step_limit"
    FAULT = "fault"


@dataclass
class RunResult:
    state: MachineState
    reason: HaltReason
    steps: int
    fault: Optional[Fault] = None


StepHook = Callable[[MachineState, int, int], None]


def is_fixed_point(state: MachineState) -> bool:
    """True when a step cannot change anything: DIP = 0 over a Nop word."""
    r = state.regs
    if r.dip != 0 or r.cm != 0:
        return False
    try:
        return state.mem[r.ip] == 0
    except Fault:
        return False


def run(
    state: MachineState,
    isa: Optional["InstructionTable"] = None,
    max_steps: int = 10**6,
    backward: bool = False,
    on_step: Optional[StepHook] = None,
    on_op: Optional[NanoHook] = None,
) -> RunResult:
    """Step repeatedly in one direction, mutating ``state``.

    The run halts after any step that leaves DIP = 0, since the machine
    would otherwise re-execute the same word forever, and also stops
    without stepping at a literal fixed point.  ``on_step(state, ip,
    opcode)`` receives the address of the instruction just executed (or
    undone).
    """
    if max_steps < 0:
        raise ValueError("max_steps must be non-negative")
    if isa is None:
        isa = _default_table()
    step = step_backward if backward else step_forward
    if max_steps == 0:
        return RunResult(state, HaltReason.STEP_LIMIT, 0)
    if is_fixed_point(state):
        return RunResult(state, HaltReason.HALTED, 0)
    r = state.regs
    taken = 0
    while taken < max_steps:
        ip = r.ip
        try:
            opcode = step(state, isa, on_op)
        except Fault as f:
            return RunResult(state, HaltReason.FAULT, taken, f)
        taken += 1
        if on_step is not None:
            on_step(state, r.ip if backward else ip, opcode)
        if r.dip == 0:
            return RunResult(state, HaltReason.HALTED, taken)
    return RunResult(state, HaltReason.STEP_LIMIT, taken)


# ---------------------------------------------------------------------------
# Raw image format: little-endian 32-bit words loaded at address 0


def words_from_bytes(data: bytes) -> list[int]:
    if len(data) % 4:
        raise ValueError(f"image length {len(data)} is not a multiple of 4 bytes")
    return list(struct.unpack(f"<{len(data) // 4}i", data))


def words_to_bytes(words: Sequence[int]) -> bytes:
    return struct.pack(f"<{len(words)}i", *(wrap(w) for w in words))
