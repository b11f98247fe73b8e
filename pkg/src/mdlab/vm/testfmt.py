"""The `.tj` test format and the test runner.

One test per block:

    TEST t1
    ENTRY demo.Utils.main()
    ARGS 3 "abc" true null
    EXPECT "16\\n"
    OUTCOME normal

ARGS values and the EXPECT literal use JSON syntax. OUTCOME is `normal`
or `throws:<qualified type>`. A test passes iff the verdict outcome and
the captured stdout both match; a `timeout` verdict is its own status
so callers can count it separately (it still fails the test).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from mdlab.vm.interp import DEFAULT_FUEL, Verdict, execute
from mdlab.vm.model import BytecodeClass


class TjFormatError(ValueError):
    pass


@dataclass
class TestCase:
    __test__ = False  # matches pytest's collection prefix by accident

    id: str
    entry: str
    args: list = field(default_factory=list)
    expect_stdout: str = ""
    outcome: str = "normal"


@dataclass
class TestResult:
    __test__ = False  # matches pytest's collection prefix by accident

    test_id: str
    status: str   # pass | fail | timeout
    detail: str = ""


def _parse_args(text: str) -> list:
    dec = json.JSONDecoder()
    vals, i, n = [], 0, len(text)
    while i < n:
        if text[i].isspace():
            i += 1
            continue
        try:
            v, j = dec.raw_decode(text, i)
        except json.JSONDecodeError as exc:
            raise TjFormatError(f"bad ARGS literal at column {i}: {exc}") from exc
        if isinstance(v, float) or isinstance(v, (dict, list)):
            raise TjFormatError(f"unsupported ARGS literal {v!r}")
        vals.append(v)
        i = j
    return vals


def _render_arg(v) -> str:
    return json.dumps(v, ensure_ascii=False)


def parse_tj(text: str) -> list[TestCase]:
    tests: list[TestCase] = []
    cur: TestCase | None = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, rest = line.partition(" ")
        if key == "TEST":
            cur = TestCase(id=rest.strip(), entry="")
            tests.append(cur)
        elif cur is None:
            raise TjFormatError(f"line {lineno}: {key} before TEST")
        elif key == "ENTRY":
            cur.entry = rest.strip()
        elif key == "ARGS":
            cur.args = _parse_args(rest)
        elif key == "EXPECT":
            try:
                cur.expect_stdout = json.loads(rest)
            except json.JSONDecodeError as exc:
                raise TjFormatError(f"line {lineno}: bad EXPECT literal") from exc
        elif key == "OUTCOME":
            val = rest.strip()
            if val != "normal" and not val.startswith("throws:"):
                raise TjFormatError(f"line {lineno}: bad OUTCOME {val!r}")
            cur.outcome = val
        else:
            raise TjFormatError(f"line {lineno}: unknown key {key!r}")
    for t in tests:
        if not t.entry:
            raise TjFormatError(f"test {t.id} has no ENTRY")
    return tests


def render_tj(tests: list[TestCase]) -> str:
    blocks = []
    for t in tests:
        lines = [f"TEST {t.id}", f"ENTRY {t.entry}"]
        if t.args:
            lines.append("ARGS " + " ".join(_render_arg(a) for a in t.args))
        lines.append("EXPECT " + json.dumps(t.expect_stdout, ensure_ascii=False))
        lines.append(f"OUTCOME {t.outcome}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def run_test(
    classes: dict[str, BytecodeClass],
    tc: TestCase,
    fuel: int = DEFAULT_FUEL,
) -> TestResult:
    v: Verdict = execute(classes, tc.entry, tc.args, fuel=fuel)
    if v.outcome == "timeout":
        return TestResult(tc.id, "timeout", f"exhausted budget after {v.steps} steps")
    if v.outcome == "crash":
        return TestResult(tc.id, "fail", f"crash: {v.detail}")
    if v.outcome != tc.outcome:
        return TestResult(tc.id, "fail", f"outcome {v.outcome}, expected {tc.outcome}")
    if v.stdout != tc.expect_stdout:
        return TestResult(
            tc.id, "fail",
            f"stdout mismatch: expected {tc.expect_stdout!r}, got {v.stdout!r}",
        )
    return TestResult(tc.id, "pass")


def run_tests(
    classes: dict[str, BytecodeClass],
    tests: list[TestCase],
    fuel: int = DEFAULT_FUEL,
) -> list[TestResult]:
    return [run_test(classes, t, fuel=fuel) for t in tests]
