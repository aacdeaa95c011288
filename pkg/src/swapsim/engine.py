"""Trial engine for the two-source, three-measurement experiment.

Each trial prepares two singlets, draws binary settings for the outer
measurements A and B, and executes A, B, and the central Bell-state
measurement C in the time order dictated by the chosen spacetime layout.
Heralded trials (C outcome matching the herald predicate) form the
event-ready subensemble.

Wing layout: A measures qubit 0, the Bell-state measurement acts on qubits
(1, 2), and B measures qubit 3.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .geometry import EventLabel, boosted_time_order, preset_by_name
from .qcore import (
    BellOutcome,
    BsmStep,
    SpinMeasurement,
    _bsm_step,
    _spin_step,
    exact_branch_enumeration,
    make_two_singlets,
)

A_QUBIT = 0
B_QUBIT = 3
BSM_PAIR = (1, 2)

# CHSH-optimal planar angles for the singlet: with these, the +,+,+,- CHSH
# combination evaluates to +2*sqrt(2) exactly.
DEFAULT_ANGLES_A = (0.0, math.pi / 2.0)
DEFAULT_ANGLES_B = (5.0 * math.pi / 4.0, 3.0 * math.pi / 4.0)

HERALD_PREDICATES: dict[str, frozenset[BellOutcome]] = {
    "psi-minus": frozenset({BellOutcome.PSI_MINUS}),
    "psi-plus": frozenset({BellOutcome.PSI_PLUS}),
    "any-psi": frozenset({BellOutcome.PSI_MINUS, BellOutcome.PSI_PLUS}),
    "phi-plus": frozenset({BellOutcome.PHI_PLUS}),
    "phi-minus": frozenset({BellOutcome.PHI_MINUS}),
    "all": frozenset(BellOutcome),
}

GEOMETRY_NAMES = ("early", "delayed", "spacelike")


@dataclass(frozen=True)
class ExperimentConfig:
    geometry: str = "spacelike"
    n_trials: int = 1
    seed: int = 0
    angles_a: tuple[float, float] = DEFAULT_ANGLES_A
    angles_b: tuple[float, float] = DEFAULT_ANGLES_B
    herald: str = "psi-minus"
    c_enabled: bool = True
    bsm_partial: bool = False

    def __post_init__(self) -> None:
        if self.geometry not in GEOMETRY_NAMES:
            raise ValueError(
                f"unknown geometry {self.geometry!r}; expected one of {GEOMETRY_NAMES}"
            )
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")
        for name in ("angles_a", "angles_b"):
            angles = getattr(self, name)
            if len(angles) != 2:
                raise ValueError(f"{name} must list exactly two angles (binary settings)")
            object.__setattr__(self, name, (float(angles[0]), float(angles[1])))
        if self.herald not in HERALD_PREDICATES:
            raise ValueError(
                f"unknown herald {self.herald!r}; expected one of {sorted(HERALD_PREDICATES)}"
            )

    def herald_set(self) -> frozenset[BellOutcome]:
        return HERALD_PREDICATES[self.herald]


@dataclass(frozen=True)
class TrialRecord:
    trial_id: int
    a: int
    b: int
    A: int
    B: int
    c_outcome: BellOutcome | None  # None when the C measurement was disabled
    heralded: bool


@dataclass(frozen=True)
class Ensemble:
    records: tuple[TrialRecord, ...]
    config_digest: str
    seed: int

    def __post_init__(self) -> None:
        ids = [r.trial_id for r in self.records]
        if any(j <= i for i, j in zip(ids, ids[1:])):
            raise ValueError("trial_ids must be strictly increasing")
        object.__setattr__(self, "records", tuple(self.records))

    def __len__(self) -> int:
        return len(self.records)


def config_meta(config: ExperimentConfig) -> dict:
    """Serializable echo of a fully resolved configuration."""
    return {
        "geometry": config.geometry,
        "n_trials": config.n_trials,
        "seed": config.seed,
        "angles_a": list(config.angles_a),
        "angles_b": list(config.angles_b),
        "herald": config.herald,
        "c_enabled": config.c_enabled,
        "bsm_partial": config.bsm_partial,
    }


def config_digest(config: ExperimentConfig) -> str:
    payload = json.dumps(config_meta(config), sort_keys=True).encode()
    return hashlib.sha256(payload).hexdigest()[:16]


def trial_rng(seed: int, trial_id: int) -> np.random.Generator:
    """Independent per-trial stream: Philox keyed by (seed, trial_id).

    The key construction makes trial streams addressable out of order, so
    trials may be generated in parallel with output identical to sequential
    execution.
    """
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, trial_id], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


class _TrialStream:
    """Reusable generator producing exactly the trial_rng streams.

    Rekeying one Philox in place avoids per-trial BitGenerator construction
    in hot loops; equivalence with trial_rng is covered by tests.
    """

    def __init__(self) -> None:
        self._bitgen = np.random.Philox(key=np.zeros(2, dtype=np.uint64))
        self.generator = np.random.Generator(self._bitgen)
        self._key = np.zeros(2, dtype=np.uint64)
        self._state = {
            "bit_generator": "Philox",
            "state": {"counter": np.zeros(4, dtype=np.uint64), "key": self._key},
            "buffer": np.zeros(4, dtype=np.uint64),
            "buffer_pos": 4,
            "has_uint32": 0,
            "uinteger": 0,
        }

    def reset(self, seed: int, trial_id: int) -> np.random.Generator:
        self._key[0] = seed & 0xFFFFFFFFFFFFFFFF
        self._key[1] = trial_id
        self._bitgen.state = self._state
        return self.generator


def measurement_order(geometry: str) -> tuple[EventLabel, ...]:
    """Execution order of A, B, C implied by the layout's time order at v=0.

    Label-order tie-breaking yields the canonical A, B, C order for the
    spacelike layout, where all three measurements are simultaneous.
    """
    order = boosted_time_order(preset_by_name(geometry), 0.0)
    wanted = (EventLabel.A, EventLabel.B, EventLabel.C)
    return tuple(label for label in order if label in wanted)


def _draw_bit(rng: np.random.Generator) -> int:
    return 0 if rng.random() < 0.5 else 1


def run_trials(config: ExperimentConfig) -> Ensemble:
    """Run the configured number of trials; deterministic given (seed, config).

    Per-trial draw order: setting a, setting b, then one uniform per executed
    measurement in geometry time order (the C draw is skipped when the C
    measurement is disabled).
    """
    order = measurement_order(config.geometry)
    herald_set = config.herald_set()
    initial = make_two_singlets().amplitudes
    stream = _TrialStream()
    records = []
    for trial_id in range(config.n_trials):
        rng = stream.reset(config.seed, trial_id)
        a = _draw_bit(rng)
        b = _draw_bit(rng)
        amps = initial
        out_a = out_b = 0
        c_outcome: BellOutcome | None = None
        for label in order:
            if label is EventLabel.A:
                out_a, amps = _spin_step(amps, 4, A_QUBIT, config.angles_a[a], rng.random())
            elif label is EventLabel.B:
                out_b, amps = _spin_step(amps, 4, B_QUBIT, config.angles_b[b], rng.random())
            elif config.c_enabled:
                c_outcome, amps = _bsm_step(
                    amps, 4, BSM_PAIR[0], BSM_PAIR[1], rng.random(),
                    config.bsm_partial, True,
                )
        heralded = c_outcome is not None and c_outcome in herald_set
        records.append(TrialRecord(trial_id, a, b, out_a, out_b, c_outcome, heralded))
    return Ensemble(tuple(records), config_digest(config), config.seed)


def post_select(
    ensemble: Ensemble, herald: str | Iterable[BellOutcome] | None = None
) -> Ensemble:
    """Event-ready subensemble; original trial_ids are preserved.

    With no predicate, keeps records flagged heralded at generation time.
    A predicate (name or outcome set) keeps records whose recorded C outcome
    matches it; records without a C outcome never match.
    """
    if herald is None:
        kept = [r for r in ensemble.records if r.heralded]
    else:
        accept = HERALD_PREDICATES[herald] if isinstance(herald, str) else frozenset(herald)
        kept = [
            r for r in ensemble.records if r.c_outcome is not None and r.c_outcome in accept
        ]
    return Ensemble(tuple(kept), ensemble.config_digest, ensemble.seed)


JointKey = tuple  # (a, b, A, B, c_outcome | None)


def exact_experiment_distribution(config: ExperimentConfig) -> dict[JointKey, float]:
    """Exact joint table P(a, b, A, B, c_outcome) with settings weighted 1/4.

    Computed by exhaustive branch enumeration in the geometry's execution
    order; entries (including zero-probability ones) sum to 1.
    """
    order = measurement_order(config.geometry)
    initial = make_two_singlets()
    table: dict[JointKey, float] = {}
    for a in (0, 1):
        for b in (0, 1):
            plan = []
            labels = []
            for label in order:
                if label is EventLabel.A:
                    plan.append(SpinMeasurement(A_QUBIT, config.angles_a[a]))
                    labels.append("A")
                elif label is EventLabel.B:
                    plan.append(SpinMeasurement(B_QUBIT, config.angles_b[b]))
                    labels.append("B")
                elif config.c_enabled:
                    plan.append(BsmStep(BSM_PAIR[0], BSM_PAIR[1], partial=config.bsm_partial))
                    labels.append("C")
            for outcomes, p in exact_branch_enumeration(initial, plan).items():
                named = dict(zip(labels, outcomes))
                key = (a, b, named["A"], named["B"], named.get("C"))
                table[key] = table.get(key, 0.0) + 0.25 * p
    return table


def marginal_over_c(table: dict[JointKey, float]) -> dict[tuple, float]:
    """P(a, b, A, B) from a joint table, summing over the C outcome."""
    out: dict[tuple, float] = {}
    for (a, b, A, B, _c), p in table.items():
        key = (a, b, A, B)
        out[key] = out.get(key, 0.0) + p
    return out


def conditional_given_c(
    table: dict[JointKey, float], accept: frozenset[BellOutcome]
) -> dict[tuple, float]:
    """P(a, b, A, B | c_outcome in accept) from a joint table."""
    kept = {k: p for k, p in table.items() if k[4] is not None and k[4] in accept}
    total = sum(kept.values())
    if total <= 0.0:
        raise ValueError("conditioning event has zero probability")
    out: dict[tuple, float] = {}
    for (a, b, A, B, _c), p in kept.items():
        key = (a, b, A, B)
        out[key] = out.get(key, 0.0) + p / total
    return out


def herald_probability(config: ExperimentConfig) -> float:
    """Exact probability that a trial is heralded under the config."""
    table = exact_experiment_distribution(config)
    accept = config.herald_set()
    return sum(p for k, p in table.items() if k[4] is not None and k[4] in accept)
