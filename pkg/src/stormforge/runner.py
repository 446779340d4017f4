"""Run solver binaries under resource limits and classify their answers."""

from __future__ import annotations

import logging
import os
import signal
import subprocess
import tempfile
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Sequence

from stormforge.errors import ConfigError, SpawnError

log = logging.getLogger(__name__)

SAT, UNSAT, UNKNOWN, CRASH, TIMEOUT = "sat", "unsat", "unknown", "crash", "timeout"
VERDICTS = (SAT, UNSAT, UNKNOWN, CRASH, TIMEOUT)
_SEVERITY = {SAT: 0, UNKNOWN: 1, UNSAT: 2}

DEFAULT_TIMEOUT = 60.0


@dataclass
class SolverProfile:
    """How to invoke one solver.

    ``args`` is the file-mode argument template and must mention
    ``{file}`` exactly once.  ``pipe_args`` (possibly empty) is used when
    the script is streamed over stdin.
    """

    id: str
    binary: str
    args: tuple[str, ...] = ("{file}",)
    pipe_args: tuple[str, ...] | None = None
    incremental: bool = True
    timeout: float = DEFAULT_TIMEOUT
    memory_mb: int = 0
    logics: tuple[str, ...] = ("*",)
    seed_option: str | None = None
    timeout_option: str | None = None

    def __post_init__(self):
        self.args = tuple(self.args)
        if self.pipe_args is not None:
            self.pipe_args = tuple(self.pipe_args)
        self.logics = tuple(self.logics)
        if self.timeout <= 0:
            raise ConfigError(f"solver {self.id}: timeout must be positive")
        if sum(a.count("{file}") for a in self.args) != 1:
            raise ConfigError(f"solver {self.id}: argument template must reference {{file}} exactly once")

    def supports(self, logic: str | None) -> bool | None:
        """True/False for a named logic; None when the logic is unspecified."""
        if logic is None:
            return None
        return "*" in self.logics or logic in self.logics

    def command(self, mode: str, path: str | None = None) -> list[str]:
        if mode == "pipe":
            return [self.binary, *(self.pipe_args or ())]
        return [self.binary, *(a.replace("{file}", path or "") for a in self.args)]

    @property
    def can_pipe(self) -> bool:
        return self.pipe_args is not None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SolverProfile":
        return cls(**d)


def z3_profile(binary: str = "z3", id: str = "z3", timeout: float = DEFAULT_TIMEOUT) -> SolverProfile:
    return SolverProfile(
        id=id,
        binary=binary,
        args=("-smt2", "{file}"),
        pipe_args=("-in", "-smt2"),
        timeout=timeout,
        seed_option="(set-option :smt.random_seed {seed})\n(set-option :sat.random_seed {seed})",
        timeout_option="(set-option :timeout {ms})",
    )


@dataclass
class SolverOutcome:
    verdict: str
    stdout: str = ""
    stderr: str = ""
    exit_code: int | None = 0
    wall_time: float = 0.0
    verdicts: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        d = asdict(self)
        d["verdicts"] = list(self.verdicts)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SolverOutcome":
        d = dict(d)
        d["verdicts"] = tuple(d.get("verdicts", ()))
        return cls(**d)


@dataclass
class ProcessResult:
    stdout: str
    stderr: str
    returncode: int | None
    wall_time: float
    timed_out: bool


def _limits(memory_mb: int):
    if not memory_mb:
        return None

    def apply():
        import resource

        limit = memory_mb * 1024 * 1024
        resource.setrlimit(resource.RLIMIT_AS, (limit, limit))

    return apply


def _kill_group(proc: subprocess.Popen) -> None:
    try:
        os.killpg(proc.pid, signal.SIGKILL)
    except (ProcessLookupError, PermissionError):
        pass


def run_process(argv: Sequence[str], stdin: str | None, timeout: float,
                memory_mb: int = 0) -> ProcessResult:
    """Run ``argv`` in its own process group; the whole group dies on return."""
    start = time.monotonic()
    try:
        proc = subprocess.Popen(
            list(argv),
            stdin=subprocess.PIPE if stdin is not None else subprocess.DEVNULL,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            start_new_session=True,
            preexec_fn=_limits(memory_mb),
        )
    except OSError as exc:
        raise SpawnError(f"cannot start {argv[0]}: {exc}") from exc
    timed_out = False
    try:
        out, err = proc.communicate(stdin.encode() if stdin is not None else None, timeout=timeout)
    except subprocess.TimeoutExpired:
        timed_out = True
        _kill_group(proc)
        out, err = proc.communicate()
    finally:
        # reap stray grandchildren that share the group
        _kill_group(proc)
    return ProcessResult(
        out.decode("utf-8", "replace"),
        err.decode("utf-8", "replace"),
        proc.returncode,
        time.monotonic() - start,
        timed_out,
    )


def parse_verdicts(stdout: str) -> list[str]:
    """All verdict tokens, one per line, in output order."""
    return [ln.strip() for ln in stdout.splitlines() if ln.strip() in _SEVERITY]


def worst(verdicts: Iterable[str]) -> str | None:
    vs = list(verdicts)
    if not vs:
        return None
    return max(vs, key=_SEVERITY.__getitem__)


def outcome_from_process(res: ProcessResult) -> SolverOutcome:
    tokens = parse_verdicts(res.stdout)
    if res.timed_out:
        verdict = TIMEOUT
    elif tokens:
        verdict = worst(tokens)
    elif res.returncode != 0:
        verdict = CRASH
    else:
        verdict = UNKNOWN
    return SolverOutcome(
        verdict=verdict,
        stdout=res.stdout[:2000],
        stderr=res.stderr[:2000],
        exit_code=res.returncode,
        wall_time=res.wall_time,
        verdicts=tuple(tokens),
    )


def render(instance) -> str:
    if isinstance(instance, str):
        return instance
    if hasattr(instance, "to_smtlib"):
        return instance.to_smtlib()
    return str(instance)


def run_solver(profile: SolverProfile, instance, mode: str = "file", path: str | None = None) -> SolverOutcome:
    """Execute the solver on ``instance`` (an Instance, Script or text)."""
    if not os.path.exists(profile.binary) and not _on_path(profile.binary):
        raise SpawnError(f"solver binary not found: {profile.binary}")
    text = render(instance)
    if mode == "pipe":
        if not profile.can_pipe:
            raise ConfigError(f"solver {profile.id} has no pipe mode")
        res = run_process(profile.command("pipe"), text, profile.timeout, profile.memory_mb)
        return outcome_from_process(res)
    if path is not None:
        res = run_process(profile.command("file", path), None, profile.timeout, profile.memory_mb)
        return outcome_from_process(res)
    with tempfile.NamedTemporaryFile("w", suffix=".smt2", delete=False) as fh:
        fh.write(text)
        tmp = fh.name
    try:
        res = run_process(profile.command("file", tmp), None, profile.timeout, profile.memory_mb)
    finally:
        os.unlink(tmp)
    return outcome_from_process(res)


def _on_path(binary: str) -> bool:
    import shutil

    return shutil.which(binary) is not None


def is_decidable_default(logic: str | None) -> bool:
    return logic is not None and logic.startswith("QF_")


def classify(outcome: SolverOutcome, logic: str | None,
             decidable: Callable[[str | None], bool] | Iterable[str] | None = None) -> str | None:
    """Bug class for a solver answer on an instance whose ground truth is sat."""
    v = outcome.verdict
    if v == UNSAT:
        return "A"
    if v == CRASH:
        return "D"
    if v == UNKNOWN:
        if decidable is None:
            ok = is_decidable_default(logic)
        elif callable(decidable):
            ok = decidable(logic)
        else:
            ok = logic in set(decidable)
        return "C" if ok else None
    return None


class SolverRunner:
    """Callable binding a profile to an instance-to-outcome function.

    Incremental instances go through stdin when the profile allows it.
    """

    def __init__(self, profile: SolverProfile):
        self.profile = profile
        self.calls = 0

    def __call__(self, instance, path: str | None = None) -> SolverOutcome:
        self.calls += 1
        incremental = getattr(instance, "incremental", False)
        if incremental and self.profile.incremental and self.profile.can_pipe:
            return run_solver(self.profile, instance, "pipe")
        return run_solver(self.profile, instance, "file", path)


@dataclass
class BugReport:
    bug_class: str
    solver_id: str
    outcome: SolverOutcome
    seed_id: str
    rng_seed: int
    iteration: int
    logic: str | None = None
    instance_path: str | None = None
    minimized_path: str | None = None
    instance: object = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        return {
            "bug_class": self.bug_class,
            "solver_id": self.solver_id,
            "outcome": self.outcome.to_dict(),
            "seed_id": self.seed_id,
            "rng_seed": self.rng_seed,
            "iteration": self.iteration,
            "logic": self.logic,
            "instance_path": self.instance_path,
            "minimized_path": self.minimized_path,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BugReport":
        d = dict(d)
        d["outcome"] = SolverOutcome.from_dict(d["outcome"])
        return cls(**{k: v for k, v in d.items() if k in cls.__dataclass_fields__})
