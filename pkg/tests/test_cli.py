from __future__ import annotations

import io

import pytest

from rever.assembler import assemble
from rever.cli import (
    EXIT_FAULT, EXIT_OK, EXIT_STEP_LIMIT, EXIT_USAGE, TRACE_HEADER,
    RunConfig, Stepper, cmd_asm, cmd_disasm, cmd_run, cmd_step, main,
)
from rever.machine import MachineState, words_from_bytes, words_to_bytes
from rever.programs import NAMES, source


@pytest.fixture
def corpus(tmp_path):
    paths = {}
    for name in NAMES:
        src = tmp_path / f"{name}.rasm"
        src.write_text(source(name))
        img = tmp_path / f"{name}.img"
        img.write_bytes(words_to_bytes(assemble(source(name)).words))
        paths[name] = (src, img)
    return paths


def trace_rows(text: str) -> list[list[str]]:
    return [ln.split("\t") for ln in text.splitlines() if ln and ln[0].isdigit()]


def test_asm_loop_image(corpus, tmp_path):
    out = tmp_path / "loop.bin"
    assert cmd_asm(corpus["loop"][0], out) == EXIT_OK
    # 35 words as published plus the halting Dec DIP
    assert len(words_from_bytes(out.read_bytes())) == 36


def test_asm_empty_file(tmp_path):
    src = tmp_path / "empty.rasm"
    src.write_text("")
    err = io.StringIO()
    assert cmd_asm(src, err=err) == EXIT_OK
    assert (tmp_path / "empty.img").read_bytes() == b""
    assert "no Inc DIP" in err.getvalue()


def test_asm_duplicate_label(tmp_path):
    src = tmp_path / "dup.rasm"
    src.write_text("Inc DIP\n:@1\nNop\n:@1\nNop\n")
    err = io.StringIO()
    assert cmd_asm(src, err=err) == EXIT_USAGE
    assert "DuplicateLabel" in err.getvalue() and ":4:" in err.getvalue()


def test_asm_listing(corpus, tmp_path):
    out = io.StringIO()
    assert cmd_asm(corpus["jump"][0], tmp_path / "j.img", listing=True, out=out) == EXIT_OK
    first = out.getvalue().splitlines()[0].split("\t")
    assert first[:2] == ["0", "1"] and first[2].startswith("Inc DIP")


def test_disasm(tmp_path, corpus):
    img = tmp_path / "one.img"
    img.write_bytes(words_to_bytes([1]))
    out = io.StringIO()
    cmd_disasm(img, out)
    assert out.getvalue() == "Inc DIP\n"

    empty = tmp_path / "empty.img"
    empty.write_bytes(b"")
    out = io.StringIO()
    cmd_disasm(empty, out)
    assert out.getvalue() == ""

    out = io.StringIO()
    cmd_disasm(corpus["procedure"][1], out)
    lines = out.getvalue().splitlines()
    calls = [i for i, ln in enumerate(lines) if ln == "Jmp dNx" and lines[i + 1].startswith("#")]
    assert len(calls) == 4  # two call jumps and two landing pads
    assert "Subr" in lines and "Ret" in lines


def test_run_jump_trace(corpus):
    out = io.StringIO()
    assert cmd_run(corpus["jump"][1], RunConfig(trace=True), out=out) == EXIT_OK
    text = out.getvalue()
    assert text.splitlines()[0] == TRACE_HEADER
    ips = [int(r[1]) for r in trace_rows(text)]
    assert ips == [0, 1, 5, 7, 8]
    assert "halted after 5 steps" in text


def test_run_loop_final_rb(corpus):
    out = io.StringIO()
    assert cmd_run(corpus["loop"][0], RunConfig(), out=out) == EXIT_OK
    assert "RB=10" in out.getvalue()


@pytest.mark.parametrize("name", NAMES)
def test_then_reverse(corpus, name):
    out = io.StringIO()
    assert cmd_run(corpus[name][1], RunConfig(trace=True), then_reverse=True, out=out) == EXIT_OK
    assert "state restored: yes" in out.getvalue()
    steps = [int(r[0]) for r in trace_rows(out.getvalue())]
    n = len(steps) // 2
    assert steps[:n] == list(range(1, n + 1))
    assert steps[n:] == list(range(n, 0, -1))


def test_trace_deterministic(corpus):
    outs = []
    for _ in range(2):
        out = io.StringIO()
        cmd_run(corpus["procedure"][1], RunConfig(trace=True, trace_nano=True), out=out)
        outs.append(out.getvalue())
    assert outs[0] == outs[1]
    assert "\tSWP MEM\t" in outs[0]


def test_run_fault_exit(tmp_path):
    img = tmp_path / "bad.img"
    img.write_bytes(words_to_bytes([1, 26]))
    out = io.StringIO()
    assert cmd_run(img, RunConfig(), out=out) == EXIT_FAULT
    assert "InvalidOpcode" in out.getvalue() and "at step 1" in out.getvalue()


def test_run_step_limit_exit(corpus):
    out = io.StringIO()
    assert cmd_run(corpus["loop"][1], RunConfig(max_steps=10), out=out) == EXIT_STEP_LIMIT


def _session(path, commands: str, memory_size=65536) -> str:
    out = io.StringIO()
    cmd_step(path, RunConfig(memory_size=memory_size), stdin=io.StringIO(commands), stdout=out)
    return out.getvalue()


def test_step_session_round_trip(corpus):
    text = _session(corpus["procedure"][1], "r\nf 3\nb 3\nq\n")
    reg_lines = [ln for ln in text.split("rever> ") if ln.startswith("CM=")]
    assert reg_lines[0] == reg_lines[2]
    assert reg_lines[0] != reg_lines[1]


def test_step_session_commands(corpus):
    text = _session(corpus["jump"][1], "m 65535 1\nf\nh\nd\nq\n")
    assert "65535: 0" in text
    assert "IP=1 DIP=1" in text
    assert "depth=0 top=None" in text
    assert "=> 1\tJmp dNx" in text


def test_step_session_fault_keeps_state(tmp_path):
    img = tmp_path / "bad.img"
    img.write_bytes(words_to_bytes([1, 26]))
    text = _session(img, "f 2\nb 1\nr\nq\n", memory_size=16)
    assert "fault: InvalidOpcode" in text
    assert "CM=0 IP=0 DIP=0" in text.split("rever> ")[-2]


def test_main_dispatch(corpus, tmp_path, capsys):
    out = tmp_path / "p.img"
    assert main(["asm", str(corpus["procedure"][0]), "-o", str(out)]) == EXIT_OK
    assert main(["run", str(out), "--then-reverse"]) == EXIT_OK
    assert "state restored: yes" in capsys.readouterr().out
    assert main(["run", str(out), "--max-steps", "-1"]) == EXIT_USAGE
    assert main(["run", str(tmp_path / "missing.img")]) == EXIT_USAGE
    assert main(["disasm", str(out)]) == EXIT_OK
