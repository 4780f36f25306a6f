"""Command-line front end: asm, disasm, run, step."""

from __future__ import annotations

import argparse
import cmd
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, TextIO

from rever.assembler import AsmError, assemble, disassemble
from rever.isa import TABLE
from rever.machine import (
    DEFAULT_HISTORY_CAP,
    DEFAULT_MEMORY_SIZE,
    ELEMENTARY_OPS,
    Fault,
    HaltReason,
    MachineState,
    RunResult,
    run,
    step_backward,
    step_forward,
    words_from_bytes,
    words_to_bytes,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAULT = 2
EXIT_STEP_LIMIT = 3

_EXIT_FOR = {
    HaltReason.HALTED: EXIT_OK,
    HaltReason.FAULT: EXIT_FAULT,
    HaltReason.STEP_LIMIT: EXIT_STEP_LIMIT,
}

TRACE_HEADER = "# step\tip\topcode\tmnemonic\tra\trb\trc\tdip\tsp\tmp\thist"


@dataclass
class RunConfig:
    memory_size: int = DEFAULT_MEMORY_SIZE
    max_steps: int = 10**6
    trace: bool = False
    trace_nano: bool = False
    history_cap: int = DEFAULT_HISTORY_CAP


def format_regs(state: MachineState) -> str:
    r = state.regs
    return (
        f"CM={r.cm} IP={r.ip} DIP={r.dip} SP={r.sp} MP={r.mp} "
        f"RA={r.ra} RB={r.rb} RC={r.rc}"
    )


def trace_record(step: int, ip: int, opcode: int, state: MachineState) -> str:
    r = state.regs
    fields = (
        step, ip, opcode, TABLE[opcode].mnemonic,
        r.ra, r.rb, r.rc, r.dip, r.sp, r.mp, state.history.depth,
    )
    return "\t".join(str(f) for f in fields)


def load_words(path: Path) -> list[int]:
    """Read a raw image, or assemble on the fly when given a .rasm source."""
    if path.suffix == ".rasm":
        return assemble(path.read_text(encoding="utf-8")).words
    return words_from_bytes(path.read_bytes())


def _traced_run(
    state: MachineState, config: RunConfig, backward: bool, max_steps: int, out: TextIO
) -> RunResult:
    on_step = on_op = None
    if config.trace or config.trace_nano:

        def on_step(st: MachineState, ip: int, opcode: int) -> None:
            step = st.steps_executed + 1 if backward else st.steps_executed
            out.write(trace_record(step, ip, opcode, st) + "\n")

    if config.trace_nano:

        def on_op(pos: int, code: int, st: MachineState) -> None:
            r = st.regs
            out.write(
                f"  {pos}\t{ELEMENTARY_OPS[code].name}\t"
                f"{r.ra}\t{r.rb}\t{r.rc}\t{r.dip}\t{r.sp}\t{r.mp}\t{st.history.depth}\n"
            )

    return run(state, TABLE, max_steps, backward, on_step, on_op)


def _report(result: RunResult, out: TextIO) -> None:
    st = result.state
    if result.fault is not None:
        out.write(f"fault: {result.fault}\n")
        st = result.fault.state or st
    out.write(f"{result.reason.value} after {result.steps} steps\n")
    out.write(format_regs(st) + "\n")
    out.write(f"history depth={st.history.depth}\n")


def cmd_asm(
    input_path: Path,
    output_path: Optional[Path] = None,
    listing: bool = False,
    strict: bool = False,
    out: Optional[TextIO] = None,
    err: Optional[TextIO] = None,
) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        image = assemble(input_path.read_text(encoding="utf-8"), strict=strict)
    except AsmError as e:
        err.write(f"{input_path}:{e.line_no}: {type(e).__name__}: {e.message}\n")
        return EXIT_USAGE
    except OSError as e:
        err.write(f"{e}\n")
        return EXIT_USAGE
    for w in image.warnings:
        err.write(f"{input_path}: warning: {w}\n")
    if output_path is None:
        output_path = input_path.with_suffix(".img")
    output_path.write_bytes(words_to_bytes(image.words))
    if listing:
        out.write(image.listing_text())
    return EXIT_OK


def cmd_disasm(image_path: Path, out: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    out.write(disassemble(words_from_bytes(image_path.read_bytes())))
    return EXIT_OK


def cmd_run(
    image_path: Path,
    config: RunConfig,
    backward: bool = False,
    then_reverse: bool = False,
    out: Optional[TextIO] = None,
) -> int:
    out = out or sys.stdout
    words = load_words(image_path)
    state = MachineState.boot(words, config.memory_size, config.history_cap)
    initial = state.copy()
    if config.trace or config.trace_nano:
        out.write(TRACE_HEADER + "\n")
    result = _traced_run(state, config, backward, config.max_steps, out)
    _report(result, out)
    code = _EXIT_FOR[result.reason]
    if then_reverse:
        back = _traced_run(state, config, not backward, result.steps, out)
        restored = back.steps == result.steps and state == initial
        if back.fault is not None:
            out.write(f"fault while reversing: {back.fault}\n")
        out.write(f"state restored: {'yes' if restored else 'no'}\n")
        if not restored:
            code = EXIT_FAULT
    return code


class Stepper(cmd.Cmd):
    """Interactive bidirectional stepper."""

    prompt = "rever> "

    def __init__(self, state: MachineState, stdin=None, stdout=None):
        super().__init__(stdin=stdin, stdout=stdout)
        if stdin is not None:
            self.use_rawinput = False
        self.state = state

    def _say(self, text: str) -> None:
        self.stdout.write(text + "\n")

    def _count(self, arg: str) -> int:
        return int(arg) if arg.strip() else 1

    def _steps(self, arg: str, step) -> None:
        try:
            n = self._count(arg)
        except ValueError:
            self._say(f"bad count {arg!r}")
            return
        for _ in range(n):
            try:
                step(self.state, TABLE)
            except Fault as f:
                self._say(f"fault: {f}")
                break
        self.do_r("")

    def do_f(self, arg: str) -> None:
        """f [n]: step forward n times"""
        self._steps(arg, step_forward)

    def do_b(self, arg: str) -> None:
        """b [n]: step backward n times"""
        self._steps(arg, step_backward)

    def do_r(self, arg: str) -> None:
        """r: print registers"""
        self._say(f"{format_regs(self.state)} steps={self.state.steps_executed}")

    def do_m(self, arg: str) -> None:
        """m <addr> [len]: print memory"""
        parts = arg.split()
        try:
            addr = int(parts[0], 0)
            length = int(parts[1], 0) if len(parts) > 1 else 1
        except (IndexError, ValueError):
            self._say("usage: m <addr> [len]")
            return
        cells = self.state.mem.cells
        for a in range(addr, addr + length):
            if not 0 <= a < len(cells):
                self._say(f"{a}: out of range")
                break
            self._say(f"{a}: {cells[a]}")

    def do_h(self, arg: str) -> None:
        """h: history depth and top"""
        h = self.state.history
        self._say(f"depth={h.depth} top={h.top()}")

    def do_d(self, arg: str) -> None:
        """d: disassemble around IP"""
        cells = self.state.mem.cells
        ip = self.state.regs.ip
        lo, hi = max(0, ip - 4), min(len(cells), ip + 5)
        for a, line in enumerate(disassemble(cells[lo:hi]).splitlines(), start=lo):
            self._say(f"{'=>' if a == ip else '  '} {a}\t{line}")

    def do_q(self, arg: str) -> bool:
        """q: quit"""
        return True

    do_EOF = do_q

    def emptyline(self) -> None:
        pass

    def default(self, line: str) -> None:
        self._say(f"unknown command {line!r}; try help")


def cmd_step(image_path: Path, config: RunConfig, stdin=None, stdout=None) -> int:
    state = MachineState.boot(load_words(image_path), config.memory_size, config.history_cap)
    Stepper(state, stdin, stdout).cmdloop()
    return EXIT_OK


def _run_config(ns: argparse.Namespace) -> RunConfig:
    return RunConfig(
        memory_size=ns.mem_size,
        max_steps=ns.max_steps,
        trace=getattr(ns, "trace", False),
        trace_nano=getattr(ns, "trace_nano", False),
        history_cap=ns.history_cap,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rever", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("asm", help="assemble source to a raw image")
    p.add_argument("input", type=Path)
    p.add_argument("-o", "--output", type=Path)
    p.add_argument("--listing", action="store_true", help="print ADDR/VALUE/SOURCE listing")
    p.add_argument("--strict", action="store_true", help="reject hexadecimal literals")

    p = sub.add_parser("disasm", help="disassemble a raw image")
    p.add_argument("image", type=Path)

    for name in ("run", "step"):
        p = sub.add_parser(name, help=f"{name} an image (.rasm sources are assembled first)")
        p.add_argument("image", type=Path)
        p.add_argument("--mem-size", type=int, default=DEFAULT_MEMORY_SIZE)
        p.add_argument("--max-steps", type=int, default=10**6)
        p.add_argument("--history-cap", type=int, default=DEFAULT_HISTORY_CAP)
        if name == "run":
            p.add_argument("--trace", action="store_true")
            p.add_argument("--trace-nano", action="store_true")
            p.add_argument("--reverse", action="store_true", help="step backward")
            p.add_argument("--then-reverse", action="store_true")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        if ns.command == "asm":
            return cmd_asm(ns.input, ns.output, ns.listing, ns.strict)
        if ns.command == "disasm":
            return cmd_disasm(ns.image)
        config = _run_config(ns)
        if config.max_steps < 0 or config.memory_size < 1:
            sys.stderr.write("error: --max-steps must be >= 0 and --mem-size >= 1\n")
            return EXIT_USAGE
        if ns.command == "run":
            return cmd_run(ns.image, config, ns.reverse, ns.then_reverse)
        return cmd_step(ns.image, config)
    except (OSError, ValueError, AsmError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
