"""Reference semantics for the internal phase of each instruction.

Every instruction is written out directly as register and memory
assignments.  Nothing here goes through nanoprograms or elementary
operations, so disagreements with the executor point at a wrong
nanoprogram or a wrong elementary op.
"""

from __future__ import annotations

from rever.machine import Fault, FaultKind, MachineState
from rever.word import WORD_MASK, wrap


def _addr(state: MachineState, address: int) -> int:
    i = address & WORD_MASK
    if i >= len(state.mem.cells):
        raise Fault(FaultKind.MEMORY_OUT_OF_RANGE, f"address {i:#x}")
    return i


def _nx(state: MachineState) -> int:
    return state.mem.cells[_addr(state, state.regs.ip + 1)]


def oracle_internal(state: MachineState, opcode: int) -> MachineState:
    """Return a new state with the internal phase of ``opcode`` applied.

    The input state is never modified.
    """
    s = state.copy()
    r = s.regs
    mem = s.mem.cells

    if opcode == 0:  # Nop
        pass
    elif opcode == 1:  # Inc DIP
        r.dip = wrap(r.dip + 1)
    elif opcode == 2:  # Dec DIP
        r.dip = wrap(r.dip - 1)
    elif opcode == 3:  # Inc RA
        r.ra = wrap(r.ra + 1)
    elif opcode == 4:  # Dec RA
        r.ra = wrap(r.ra - 1)
    elif opcode == 5:
        r.ra, r.rb = r.rb, r.ra
    elif opcode == 6:
        r.ra, r.rc = r.rc, r.ra
    elif opcode == 7:
        r.ra, r.dip = r.dip, r.ra
    elif opcode == 8:
        r.ra, r.sp = r.sp, r.ra
    elif opcode == 9:
        r.ra, r.mp = r.mp, r.ra
    elif opcode == 10:  # Swap RA,[MP]
        i = _addr(s, r.mp)
        r.ra, mem[i] = mem[i], r.ra
    elif opcode == 11:  # Add RA,RB
        r.ra = wrap(r.ra + r.rb)
    elif opcode == 12:  # Sub RA,RB
        r.ra = wrap(r.ra - r.rb)
    elif opcode == 13:  # Add RA,[IP+1]
        r.ra = wrap(r.ra + _nx(s))
    elif opcode == 14:  # Sub RA,[IP+1]
        r.ra = wrap(r.ra - _nx(s))
    elif opcode == 15:  # Add RA,IP
        r.ra = wrap(r.ra + r.ip)
    elif opcode == 16:  # Sub RA,IP
        r.ra = wrap(r.ra - r.ip)
    elif opcode == 17:  # Neg RA
        r.ra = wrap(-r.ra)
    elif opcode == 18:  # Jmp dNx
        r.dip = wrap(r.dip + _nx(s))
    elif opcode == 19:  # Subr: DIP <-> [SP]; DIP += 1; SP -= 1
        i = _addr(s, r.sp)
        r.dip, mem[i] = mem[i], r.dip
        r.dip = wrap(r.dip + 1)
        r.sp = wrap(r.sp - 1)
    elif opcode == 20:  # Ret: SP += 1; DIP -= 1; DIP <-> [SP]; DIP <- [IP+1] - DIP
        _addr(s, r.ip + 1)
        sp = wrap(r.sp + 1)
        i = _addr(s, sp)
        r.sp = sp
        r.dip = wrap(r.dip - 1)
        r.dip, mem[i] = mem[i], r.dip
        # read after the exchange: [SP] and [IP+1] may be the same cell
        r.dip = wrap(_nx(s) - r.dip)
    elif opcode == 21:  # CJmp dNx
        nx = _nx(s)
        if r.rc > 0:
            r.dip = wrap(r.dip + nx)
    elif opcode == 22:  # CAdd RA,RB
        if r.rc > 0:
            r.ra = wrap(r.ra + r.rb)
    elif opcode == 23:  # Push RA: A <-> [SP]; SP -= 1
        i = _addr(s, r.sp)
        r.ra, mem[i] = mem[i], r.ra
        r.sp = wrap(r.sp - 1)
    elif opcode == 24:  # Pop RA: SP += 1; [SP] <-> A
        sp = wrap(r.sp + 1)
        i = _addr(s, sp)
        r.sp = sp
        r.ra, mem[i] = mem[i], r.ra
    elif opcode == 25:  # Clear RA
        s.history.push(r.ra)
        r.ra = 0
    else:
        raise Fault(FaultKind.INVALID_OPCODE, f"opcode {opcode}")
    return s
