"""Adapter for decompilers that live outside this process.

An external tool is a command template run against a class file on
disk.  The contract is deliberately thin: exit status 0 with nonempty
stdout is source text, anything else (nonzero exit, empty stdout,
timeout) is an empty decompilation.  Crashing tools therefore degrade
to the weakest outcome instead of aborting a whole corpus run.
"""

from __future__ import annotations

import subprocess
import tempfile
import time
from pathlib import Path

from ..vm.model import BytecodeClass, serialize_mjc
from .backends import DecompOptions, DecompOutput, DecompilerSpec


def build_command(spec: DecompilerSpec, input_path: Path) -> list[str]:
    """Substitute the class-file path into the command template.

    A template without an ``{input}`` placeholder gets the path appended
    as a final argument.
    """
    if not spec.command:
        raise ValueError(f"external decompiler {spec.name!r} has no command")
    argv = [a.replace("{input}", str(input_path)) for a in spec.command]
    if all("{input}" not in a for a in spec.command):
        argv.append(str(input_path))
    return argv


def run_external(spec: DecompilerSpec, bc: BytecodeClass,
                 options: DecompOptions) -> DecompOutput:
    t0 = time.perf_counter()
    with tempfile.TemporaryDirectory(prefix="mdlab-ext-") as td:
        input_path = Path(td) / f"{bc.name}.mjc"
        input_path.write_text(serialize_mjc(bc), encoding="utf-8")
        argv = build_command(spec, input_path)
        try:
            proc = subprocess.run(
                argv,
                capture_output=True,
                text=True,
                timeout=options.ext_timeout_secs,
            )
            text = proc.stdout if proc.returncode == 0 else ""
        except (subprocess.TimeoutExpired, OSError):
            text = ""
    ms = (time.perf_counter() - t0) * 1000.0
    if not text.strip():
        return DecompOutput("empty", "", ms)
    return DecompOutput("source", text, ms)
