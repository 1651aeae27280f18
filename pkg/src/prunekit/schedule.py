"""Sparsity schedules: map normalized training progress t in [0, 1] to a
target sparsity percentage, plus the window logic (start/end epoch) that
embeds a schedule into a training run.
"""

from dataclasses import dataclass, field
import math

DEFAULT_ALPHA = 14.0
DEFAULT_BETA = 6.0
DEFAULT_N_STEPS = 5

BUILTIN_SCHEDULES = ("one_shot", "iterative", "gradual", "one_cycle", "dsd")

# name -> f(sparsity, t, spec) for user-registered schedules
_custom_registry: dict = {}


@dataclass(frozen=True)
class ScheduleSpec:
    kind: str
    final_sparsity: float = 50.0
    start_epoch: int = 0
    end_epoch: int | None = None  # resolved to total_epochs at plan build
    update_frequency: int = 1
    n_steps: int = DEFAULT_N_STEPS
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA

    def __post_init__(self):
        if self.kind not in BUILTIN_SCHEDULES and self.kind not in _custom_registry:
            raise ValueError(f"unknown schedule {self.kind!r}")
        if not 0 <= self.final_sparsity <= 100:
            raise ValueError(f"final_sparsity {self.final_sparsity} out of [0, 100]")
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if self.update_frequency < 1:
            raise ValueError("update_frequency must be >= 1")
        if self.start_epoch < 0:
            raise ValueError("start_epoch must be >= 0")
        if self.end_epoch is not None and self.end_epoch <= self.start_epoch:
            raise ValueError("pruning window is degenerate: end_epoch must exceed start_epoch")


@dataclass
class ProgressClock:
    current_step: int
    steps_per_epoch: int
    total_epochs: int

    @property
    def total_steps(self) -> int:
        return self.steps_per_epoch * self.total_epochs


def eval_schedule(spec: ScheduleSpec, t: float, sparsity: float | None = None) -> float:
    """Sparsity percentage at normalized progress t."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t={t} out of [0, 1]")
    s = spec.final_sparsity if sparsity is None else sparsity
    if spec.kind == "one_shot":
        return s
    if spec.kind == "iterative":
        return (s / spec.n_steps) * math.ceil(t * spec.n_steps)
    if spec.kind == "gradual":
        return s * (1.0 - (1.0 - t) ** 3)
    if spec.kind == "one_cycle":
        a, b = spec.alpha, spec.beta
        return s * (1.0 + math.exp(-a + b)) / (1.0 + math.exp(-a * t + b))
    if spec.kind == "dsd":
        return s * (1.0 - math.cos(2.0 * math.pi * t)) / 2.0
    return _custom_registry[spec.kind](s, t)


def window_steps(spec: ScheduleSpec, clock: ProgressClock) -> tuple[int, int]:
    end_epoch = clock.total_epochs if spec.end_epoch is None else spec.end_epoch
    return spec.start_epoch * clock.steps_per_epoch, end_epoch * clock.steps_per_epoch


def normalized_t(clock: ProgressClock, spec: ScheduleSpec) -> float:
    start, end = window_steps(spec, clock)
    if end <= start:
        raise ValueError("pruning window is degenerate")
    return min(1.0, max(0.0, (clock.current_step - start) / (end - start)))


def current_target(clock: ProgressClock, spec: ScheduleSpec, sparsity: float | None = None) -> float:
    """0 before the window, the schedule inside it, held at t=1 after it."""
    start, _ = window_steps(spec, clock)
    if clock.current_step < start:
        return 0.0
    return eval_schedule(spec, normalized_t(clock, spec), sparsity)


def register_custom_schedule(name: str, f) -> str:
    """Make f(sparsity, t) usable wherever a built-in schedule is.

    Rejected at registration if f leaves [0, 100] at the probe points.
    """
    if name in BUILTIN_SCHEDULES:
        raise ValueError(f"{name!r} is a built-in schedule")
    for t in (0.0, 0.25, 0.5, 0.75, 1.0):
        out = f(100.0, t)
        if not 0.0 <= out <= 100.0:
            raise ValueError(f"schedule {name!r} returns {out} at t={t}, outside [0, 100]")
    _custom_registry[name] = f
    return name


def _gradual_paper_literal(s, t):
    # decaying-cubic variant, kept available for comparison runs
    return s * (1.0 - t) ** 3


def _dsd_paper_literal(s, t):
    if t < 0.5:
        return (1.0 + math.cos(math.pi * (1.0 - t * 2.0))) * s / 2.0
    return (1.0 - math.cos(math.pi * (1.0 - t * 2.0))) * s / 2.0


register_custom_schedule("gradual_paper_literal", _gradual_paper_literal)
register_custom_schedule("dsd_paper_literal", _dsd_paper_literal)
