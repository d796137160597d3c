#!/usr/bin/env python3
"""
isogap: single source of truth for all pre-merge checks.

Used by predeploy.sh and by CI.

Usage:
    python scripts/checks.py                # run everything
    python scripts/checks.py --skip-tests   # skip pytest
    python scripts/checks.py --skip-install # don't install/upgrade tool versions
    python scripts/checks.py --only 1,4     # run only specific step numbers
    python scripts/checks.py --slow         # include the full-size acceptance runs

Exit code: 0 on success, 1 on first failure (informational steps never fail).
"""
from __future__ import annotations

import argparse
import os
import re
import subprocess
import sys
from collections.abc import Callable
from pathlib import Path

PINNED_TOOLS = [
    "ruff==0.15.2",
    "bandit[toml]==1.9.4",
    "pip-audit==2.10.0",
    "mypy==1.19.1",
    "pytest==9.0.3",
    "pytest-cov==7.1.0",
    "pytest-timeout==2.4.0",
]

REPO_ROOT = Path(__file__).resolve().parent.parent
PY = sys.executable
USE_COLOR = sys.stdout.isatty() and not os.environ.get("NO_COLOR")


def _c(code: str, text: str) -> str:
    return f"\033[{code}m{text}\033[0m" if USE_COLOR else text


def step(num: str, msg: str) -> None:
    print(_c("36", f"\n── {num}  {msg} ──"))


def passed(msg: str) -> None:
    print(_c("32", f"  PASS: {msg}"))


def info(msg: str) -> None:
    print(f"  {msg}")


def fail(msg: str) -> None:
    print(_c("31", f"  FAIL: {msg}"))
    sys.exit(1)


def run(cmd: list[str], *, check: bool = True) -> int:
    """Stream a subprocess and optionally fail on non-zero exit."""
    print(_c("90", f"  $ {' '.join(cmd)}"))
    rc = subprocess.call(cmd, cwd=str(REPO_ROOT))  # noqa: S603
    if check and rc != 0:
        fail(f"command exited {rc}: {cmd[2] if len(cmd) > 2 else cmd[0]}")
    return rc


# ── Steps ────────────────────────────────────────────────────────────────────


def step_install() -> None:
    step("--", "Ensuring dev tools are installed (pinned versions)")
    run([PY, "-m", "pip", "install", "--quiet", *PINNED_TOOLS])
    passed("tools ready")


def step_1_ruff() -> None:
    step("1/7", "Lint (ruff)")
    run([PY, "-m", "ruff", "check", "."])
    passed("ruff")


def step_2_mypy() -> None:
    step("2/7", "Type check: layered packages (mypy --strict)")
    run([
        PY, "-m", "mypy",
        "domain/", "spectral/", "application/", "infrastructure/",
        "--strict", "--ignore-missing-imports", "--explicit-package-bases",
    ])
    passed("mypy strict")


def step_3_bandit() -> None:
    step("3/7", "Security scan (bandit: fail on HIGH severity)")
    run([PY, "-m", "bandit", "-r", ".", "-c", "pyproject.toml", "--severity-level", "high"])
    passed("bandit")


def step_4_pip_audit() -> None:
    step("4/7", "SCA (pip-audit)")
    run([PY, "-m", "pip_audit", "--requirement", "requirements.txt", "--strict"])
    passed("pip-audit")


def _pytest(slow: bool) -> None:
    step("5/7", "Tests (pytest)")
    cmd = [PY, "-m", "pytest", "tests/", "--cov", "--cov-fail-under=70"]
    if not slow:
        cmd += ["-m", "not slow"]
    run(cmd)
    passed("pytest")


def step_6_version() -> None:
    step("6/7", "Version consistency")
    toml = (REPO_ROOT / "pyproject.toml").read_text(encoding="utf-8")
    cli = (REPO_ROOT / "isogap.py").read_text(encoding="utf-8")
    m_toml = re.search(r'(?m)^version\s*=\s*"([^"]+)"', toml)
    m_cli = re.search(r'(?m)^APP_VERSION\s*=\s*"([^"]+)"', cli)
    if not m_toml or not m_cli:
        fail("could not parse version from pyproject.toml or isogap.py")
    assert m_toml and m_cli
    if m_toml.group(1) != m_cli.group(1):
        fail(f"version mismatch: pyproject.toml={m_toml.group(1)} "
             f"vs isogap.py={m_cli.group(1)}")
    passed(f"all files at v{m_toml.group(1)}")


def step_7_shipped_jobs() -> None:
    step("7/7", "Shipped job files reference shipped measures")
    import json

    missing = []
    for job in sorted((REPO_ROOT / "jobs").glob("*.json")):
        measure = json.loads(job.read_text(encoding="utf-8")).get("job", {}).get("measure")
        if not measure or not (REPO_ROOT / measure).is_file():
            missing.append(f"{job.name} → {measure!r}")
    if missing:
        fail("jobs with unresolvable measures: " + ", ".join(missing))
    passed("every job resolves")


# ── Step registry ────────────────────────────────────────────────────────────
STEPS: dict[int, tuple[str, Callable[[argparse.Namespace], None]]] = {
    1: ("ruff",       lambda _: step_1_ruff()),
    2: ("mypy",       lambda _: step_2_mypy()),
    3: ("bandit",     lambda _: step_3_bandit()),
    4: ("pip-audit",  lambda _: step_4_pip_audit()),
    5: ("pytest",     lambda args: _pytest(args.slow)),
    6: ("version",    lambda _: step_6_version()),
    7: ("jobs",       lambda _: step_7_shipped_jobs()),
}


def main() -> int:
    p = argparse.ArgumentParser(
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("--skip-install", action="store_true",
                   help="don't install/upgrade pinned tool versions")
    p.add_argument("--skip-tests", action="store_true", help="skip the pytest step")
    p.add_argument("--slow", action="store_true", help="include tests marked slow")
    p.add_argument("--only", help="comma-separated step indices to run (1-7)")
    args = p.parse_args()

    os.chdir(REPO_ROOT)

    if not args.skip_install:
        step_install()

    if args.only:
        try:
            selected = [int(x.strip()) for x in args.only.split(",")]
        except ValueError:
            print("--only must be a comma-separated list of integers", file=sys.stderr)
            return 2
    else:
        selected = list(STEPS)

    for idx in selected:
        name, fn = STEPS[idx]
        if args.skip_tests and name == "pytest":
            step("5/7", "Tests (pytest): SKIPPED via --skip-tests")
            continue
        fn(args)

    print(_c("32", "\nAll checks passed."))
    return 0


if __name__ == "__main__":
    sys.exit(main())
