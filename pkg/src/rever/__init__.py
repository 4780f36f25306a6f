"""Simulator, assembler and reference semantics for the ReveR reversible processor."""

from rever.isa import TABLE, InstructionDef, InstructionTable, build_table, inverse_nano
from rever.machine import (
    Fault,
    FaultKind,
    HaltReason,
    MachineState,
    apply_elementary,
    run,
    run_nanoprogram,
    step_backward,
    step_forward,
)

__all__ = [
    "TABLE",
    "Fault",
    "FaultKind",
    "HaltReason",
    "InstructionDef",
    "InstructionTable",
    "MachineState",
    "apply_elementary",
    "build_table",
    "inverse_nano",
    "run",
    "run_nanoprogram",
    "step_backward",
    "step_forward",
]
