"""Classical collider constructions that mimic Bell correlations via selection.

Two variants share one sampler: all four bits (settings a, b and outcomes
A, B) are drawn uniformly and independently, and a third party accepts the
trial with probability w(a, b, A, B). In the collider variant the outcomes
are generated at the wings; in the source variant the same pair is generated
at the midpoint source and recorded as the hidden variable, so the induced
selection correlation shows up against the settings instead of across the
wings. A rock-paper-scissors generator provides the minimal selection-bias
example.

The setting-to-angle map is shared with the trial engine so toy and quantum
CHSH values are directly comparable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

from .engine import DEFAULT_ANGLES_A, DEFAULT_ANGLES_B, _TrialStream

_PM = (1, -1)
_SETTINGS = (0, 1)


@dataclass(frozen=True)
class AcceptanceRule:
    """Acceptance weight w(a, b, A, B) in [0, 1] over the 16 bit combinations."""

    name: str
    weight: Callable[[int, int, int, int], float]

    def __post_init__(self) -> None:
        for a in _SETTINGS:
            for b in _SETTINGS:
                for A in _PM:
                    for B in _PM:
                        w = self.weight(a, b, A, B)
                        if not 0.0 <= w <= 1.0:
                            raise ValueError(
                                f"rule {self.name!r}: w({a},{b},{A},{B}) = {w!r} "
                                "outside [0, 1]"
                            )

    def table(self) -> dict[tuple[int, int, int, int], float]:
        return {
            (a, b, A, B): self.weight(a, b, A, B)
            for a in _SETTINGS
            for b in _SETTINGS
            for A in _PM
            for B in _PM
        }


def singlet_weight_rule(
    angles_a: tuple[float, float] = DEFAULT_ANGLES_A,
    angles_b: tuple[float, float] = DEFAULT_ANGLES_B,
) -> AcceptanceRule:
    """Default rule w = (1 - A*B*cos(ta - tb))/2.

    Renormalizing the uniform outcome prior by this weight reproduces the
    singlet conditional distribution (1 - A*B*cos(ta - tb))/4 exactly, so
    the accepted subensemble approaches the Tsirelson CHSH value.
    """

    def weight(a: int, b: int, A: int, B: int) -> float:
        return 0.5 * (1.0 - A * B * math.cos(angles_a[a] - angles_b[b]))

    return AcceptanceRule("singlet-weight", weight)


def constant_rule(value: float) -> AcceptanceRule:
    return AcceptanceRule(f"constant-{value}", lambda a, b, A, B: value)


@dataclass(frozen=True)
class ToyTrial:
    trial_id: int
    a: int
    b: int
    A: int
    B: int
    lam: tuple[int, int] | None  # source-variant hidden pair, identical to (A, B)
    accepted: bool


def _run_toy(n: int, seed: int, rule: AcceptanceRule, record_lambda: bool) -> list[ToyTrial]:
    if n < 1:
        raise ValueError("n must be >= 1")
    weight = rule.weight
    stream = _TrialStream()
    trials = []
    for trial_id in range(n):
        rng = stream.reset(seed, trial_id)
        u = rng.random(5)
        # Declared outcome order per draw: 0 before 1 for settings, +1
        # before -1 for outcomes.
        a = 0 if u[0] < 0.5 else 1
        b = 0 if u[1] < 0.5 else 1
        A = 1 if u[2] < 0.5 else -1
        B = 1 if u[3] < 0.5 else -1
        accepted = u[4] < weight(a, b, A, B)
        lam = (A, B) if record_lambda else None
        trials.append(ToyTrial(trial_id, a, b, A, B, lam, bool(accepted)))
    return trials


def run_toy_collider(n: int, seed: int, rule: AcceptanceRule | None = None) -> list[ToyTrial]:
    """Wing-generated outcomes filtered by the acceptance rule."""
    return _run_toy(n, seed, rule or singlet_weight_rule(), record_lambda=False)


def run_toy_source_variant(
    n: int, seed: int, rule: AcceptanceRule | None = None
) -> list[ToyTrial]:
    """Same sampling, but the outcome pair originates at the source and is
    recorded as the hidden variable."""
    return _run_toy(n, seed, rule or singlet_weight_rule(), record_lambda=True)


def accepted(trials: Sequence[ToyTrial]) -> list[ToyTrial]:
    return [t for t in trials if t.accepted]


class RpsChoice(Enum):
    ROCK = "rock"
    PAPER = "paper"
    SCISSORS = "scissors"


class RpsVerdict(Enum):
    ALICE_WINS = "AliceWins"
    BOB_WINS = "BobWins"
    DRAW = "Draw"


_BEATS = {
    (RpsChoice.ROCK, RpsChoice.SCISSORS),
    (RpsChoice.SCISSORS, RpsChoice.PAPER),
    (RpsChoice.PAPER, RpsChoice.ROCK),
}

_CHOICES = tuple(RpsChoice)


@dataclass(frozen=True)
class RpsTrial:
    trial_id: int
    alice: RpsChoice
    bob: RpsChoice
    verdict: RpsVerdict


def rps_verdict(alice: RpsChoice, bob: RpsChoice) -> RpsVerdict:
    if alice is bob:
        return RpsVerdict.DRAW
    return RpsVerdict.ALICE_WINS if (alice, bob) in _BEATS else RpsVerdict.BOB_WINS


def run_rps(n: int, seed: int) -> list[RpsTrial]:
    """Independent uniform choices plus the game verdict; no physics, pure
    selection-bias fodder."""
    if n < 1:
        raise ValueError("n must be >= 1")
    stream = _TrialStream()
    trials = []
    for trial_id in range(n):
        rng = stream.reset(seed, trial_id)
        u = rng.random(2)
        alice = _CHOICES[int(u[0] * 3.0)]
        bob = _CHOICES[int(u[1] * 3.0)]
        trials.append(RpsTrial(trial_id, alice, bob, rps_verdict(alice, bob)))
    return trials
