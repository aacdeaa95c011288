"""Exact statevector core for small spin systems.

Pure-state representation for up to five qubits, planar spin measurements,
full and partial Bell-state measurements, and exhaustive branch enumeration
of measurement plans (no sampling). All operations return new values; states
are immutable after construction.

Conventions: qubit 0 is the most significant bit of the basis-state index,
|0> is spin-up, and the singlet is (|01> - |10>)/sqrt(2) with the |01>
amplitude positive. Spin measurements live in the x-z plane: the observable
for angle t is cos(t)*Z + sin(t)*X.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence, Union

import numpy as np

MAX_QUBITS = 5
NORM_TOL = 1e-12

_SQRT_HALF = 1.0 / math.sqrt(2.0)


class BellOutcome(Enum):
    """Outcomes of a Bell-state measurement.

    Declaration order fixes the cumulative-threshold order used when
    collapsing with a uniform draw; values double as the ASCII tokens used
    in CSV/JSON artifacts. NO_HERALD only occurs in partial mode.
    """

    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"
    NO_HERALD = "none"


# Bell-basis tensors indexed [left_bit, right_bit].
_BELL_TENSORS: dict[BellOutcome, np.ndarray] = {
    BellOutcome.PHI_PLUS: np.array([[1, 0], [0, 1]], dtype=np.complex128) * _SQRT_HALF,
    BellOutcome.PHI_MINUS: np.array([[1, 0], [0, -1]], dtype=np.complex128) * _SQRT_HALF,
    BellOutcome.PSI_PLUS: np.array([[0, 1], [1, 0]], dtype=np.complex128) * _SQRT_HALF,
    BellOutcome.PSI_MINUS: np.array([[0, 1], [-1, 0]], dtype=np.complex128) * _SQRT_HALF,
}


@dataclass(frozen=True)
class StateVector:
    """Normalized complex amplitude vector over ``num_qubits`` qubits."""

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        if not 1 <= self.num_qubits <= MAX_QUBITS:
            raise ValueError(f"num_qubits must be in 1..{MAX_QUBITS}, got {self.num_qubits}")
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (2**self.num_qubits,):
            raise ValueError(
                f"expected {2**self.num_qubits} amplitudes, got shape {amps.shape}"
            )
        norm_sq = float(np.vdot(amps, amps).real)
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise ValueError(f"state not normalized: |psi|^2 = {norm_sq!r}")
        amps = amps.copy()
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    def amplitude(self, basis_index: int) -> complex:
        return complex(self.amplitudes[basis_index])


@dataclass(frozen=True)
class SpinMeasurement:
    """Projective spin measurement of cos(angle)*Z + sin(angle)*X on one qubit."""

    qubit: int
    angle: float


@dataclass(frozen=True)
class BsmStep:
    """Bell-state measurement step for use in measurement plans."""

    q_left: int
    q_right: int
    partial: bool = False
    resolve_psi_plus: bool = True


PlanStep = Union[SpinMeasurement, BsmStep]


def basis_state(num_qubits: int, index: int) -> StateVector:
    amps = np.zeros(2**num_qubits, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(num_qubits, amps)


def bell_state(outcome: BellOutcome) -> StateVector:
    """Two-qubit Bell state for one of the four resolvable outcomes."""
    if outcome not in _BELL_TENSORS:
        raise ValueError(f"{outcome} does not name a Bell state")
    return StateVector(2, _BELL_TENSORS[outcome].reshape(-1))


def singlet() -> StateVector:
    """The singlet (|01> - |10>)/sqrt(2), alias for bell_state(PSI_MINUS)."""
    return bell_state(BellOutcome.PSI_MINUS)


def make_two_singlets() -> StateVector:
    """Four-qubit state singlet(0,1) (x) singlet(2,3)."""
    s = _BELL_TENSORS[BellOutcome.PSI_MINUS].reshape(-1)
    return StateVector(4, np.kron(s, s))


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2; insensitive to global phase."""
    if a.num_qubits != b.num_qubits:
        raise ValueError("states have different qubit counts")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def product_of_pair_states(
    num_qubits: int, pairs: Mapping[tuple[int, int], StateVector]
) -> StateVector:
    """Build an n-qubit state as a product of two-qubit states on disjoint pairs.

    Every qubit index must be covered exactly once; pair order within a key
    matters (first index supplies the first bit of the pair state).
    """
    covered = [q for pair in pairs for q in pair]
    if sorted(covered) != list(range(num_qubits)):
        raise ValueError("pairs must cover all qubit indices exactly once")
    for st in pairs.values():
        if st.num_qubits != 2:
            raise ValueError("pair states must be two-qubit states")
    amps = np.zeros(2**num_qubits, dtype=np.complex128)
    for idx in range(2**num_qubits):
        val = 1.0 + 0.0j
        for (qi, qj), st in pairs.items():
            bi = (idx >> (num_qubits - 1 - qi)) & 1
            bj = (idx >> (num_qubits - 1 - qj)) & 1
            val *= st.amplitudes[(bi << 1) | bj]
        amps[idx] = val
    return StateVector(num_qubits, amps)


def _check_qubit(state: StateVector, q: int) -> None:
    if not 0 <= q < state.num_qubits:
        raise ValueError(f"qubit index {q} out of range for {state.num_qubits}-qubit state")


def _spin_components(angle: float) -> tuple[float, float]:
    """+1 eigenvector of cos(angle)*Z + sin(angle)*X (real, the measurement
    plane is x-z); the -1 eigenvector is the +1 eigenvector of angle + pi."""
    return math.cos(angle / 2.0), math.sin(angle / 2.0)


def _project_spin(
    amps: np.ndarray, q: int, vec: tuple[float, float]
) -> tuple[np.ndarray, float]:
    """Contract qubit q against bra <vec|; returns (coefficient array, weight)."""
    t = amps.reshape(2**q, 2, -1)
    coeff = vec[0] * t[:, 0, :] + vec[1] * t[:, 1, :]
    return coeff, float(np.vdot(coeff, coeff).real)


def _embed_spin(coeff: np.ndarray, q: int, vec: tuple[float, float]) -> np.ndarray:
    out = np.empty((coeff.shape[0], 2, coeff.shape[1]), dtype=np.complex128)
    out[:, 0, :] = vec[0] * coeff
    out[:, 1, :] = vec[1] * coeff
    return out.reshape(-1)


# The two nonzero (left_bit, right_bit, value) terms of each Bell tensor,
# with values as Python floats for cheap scalar arithmetic.
_BELL_TERMS: dict[BellOutcome, tuple[tuple[int, int, float], ...]] = {
    outcome: tuple(
        (i, j, float(m[i, j].real))
        for i in (0, 1)
        for j in (0, 1)
        if m[i, j] != 0
    )
    for outcome, m in _BELL_TENSORS.items()
}


def _bell_terms(outcome: BellOutcome, q_left: int, q_right: int):
    terms = _BELL_TERMS[outcome]
    if q_left < q_right:
        return terms
    return tuple((j, i, c) for (i, j, c) in terms)


def _split_pair(amps: np.ndarray, qa: int, qb: int) -> np.ndarray:
    # qa < qb required; axes: (pre, qa, mid, qb, post)
    return amps.reshape(2**qa, 2, 2 ** (qb - qa - 1), 2, -1)


def _project_bell(
    amps: np.ndarray, q_left: int, q_right: int, outcome: BellOutcome
) -> tuple[np.ndarray, float]:
    qa, qb = (q_left, q_right) if q_left < q_right else (q_right, q_left)
    t = _split_pair(amps, qa, qb)
    (i1, j1, c1), (i2, j2, c2) = _bell_terms(outcome, q_left, q_right)
    coeff = c1 * t[:, i1, :, j1, :] + c2 * t[:, i2, :, j2, :]
    return coeff, float(np.vdot(coeff, coeff).real)


def _embed_bell(
    coeff: np.ndarray, q_left: int, q_right: int, outcome: BellOutcome
) -> np.ndarray:
    out = np.zeros((coeff.shape[0], 2, coeff.shape[1], 2, coeff.shape[2]), dtype=np.complex128)
    for i, j, c in _bell_terms(outcome, q_left, q_right):
        out[:, i, :, j, :] = c * coeff
    return out.reshape(-1)


def prob_spin_up(state: StateVector, m: SpinMeasurement) -> float:
    """Born probability of the +1 outcome."""
    _check_qubit(state, m.qubit)
    _, p = _project_spin(state.amplitudes, m.qubit, _spin_components(m.angle))
    return min(max(p, 0.0), 1.0)


def _spin_step(
    amps: np.ndarray, n: int, qubit: int, angle: float, draw: float
) -> tuple[int, np.ndarray]:
    """Raw spin collapse on unwrapped amplitudes; inputs assumed valid."""
    vec = _spin_components(angle)
    coeff, weight = _project_spin(amps, qubit, vec)
    if draw < weight:
        outcome = 1
    else:
        outcome = -1
        vec = _spin_components(angle + math.pi)
        coeff, weight = _project_spin(amps, qubit, vec)
    if weight <= 0.0:
        raise RuntimeError("drew an outcome with zero-norm projection")
    return outcome, _embed_spin(coeff / math.sqrt(weight), qubit, vec)


def measure_spin(
    state: StateVector, m: SpinMeasurement, draw: float
) -> tuple[int, StateVector]:
    """Collapse one spin with a uniform draw in [0, 1).

    The +1 outcome occupies [0, P(+1)), the -1 outcome the rest.
    """
    _check_qubit(state, m.qubit)
    if not 0.0 <= draw < 1.0:
        raise ValueError(f"draw must be in [0, 1), got {draw!r}")
    outcome, post = _spin_step(state.amplitudes, state.num_qubits, m.qubit, m.angle, draw)
    return outcome, StateVector(state.num_qubits, post)


def _partial_outcomes(resolve_psi_plus: bool) -> tuple[list[BellOutcome], list[BellOutcome]]:
    """(resolved outcomes in enum order, outcomes folded into NO_HERALD)."""
    resolved = [BellOutcome.PSI_MINUS]
    folded = [BellOutcome.PHI_PLUS, BellOutcome.PHI_MINUS]
    if resolve_psi_plus:
        resolved.insert(0, BellOutcome.PSI_PLUS)
    else:
        folded.append(BellOutcome.PSI_PLUS)
    return resolved, folded


def bell_outcome_probabilities(
    state: StateVector,
    q_left: int,
    q_right: int,
    partial: bool = False,
    resolve_psi_plus: bool = True,
) -> dict[BellOutcome, float]:
    """Exact outcome distribution of a Bell-state measurement on (q_left, q_right)."""
    _check_qubit(state, q_left)
    _check_qubit(state, q_right)
    if q_left == q_right:
        raise ValueError("Bell-state measurement needs two distinct qubits")
    raw = {
        o: _project_bell(state.amplitudes, q_left, q_right, o)[1]
        for o in _BELL_TENSORS
    }
    if not partial:
        return raw
    resolved, folded = _partial_outcomes(resolve_psi_plus)
    probs = {o: raw[o] for o in resolved}
    probs[BellOutcome.NO_HERALD] = sum(raw[o] for o in folded)
    return probs


def _bsm_step(
    amps: np.ndarray,
    n: int,
    q_left: int,
    q_right: int,
    draw: float,
    partial: bool,
    resolve_psi_plus: bool,
) -> tuple[BellOutcome, np.ndarray]:
    """Raw Bell-basis collapse on unwrapped amplitudes; inputs assumed valid."""
    proj = [(o, _project_bell(amps, q_left, q_right, o)) for o in _BELL_TENSORS]
    if partial:
        resolved, folded = _partial_outcomes(resolve_psi_plus)
        probs = [(o, w) for o, (_c, w) in proj if o in resolved]
        probs.append(
            (BellOutcome.NO_HERALD, sum(w for o, (_c, w) in proj if o in folded))
        )
    else:
        probs = [(o, w) for o, (_c, w) in proj]
    chosen = None
    acc = 0.0
    for o, p in probs:
        acc += p
        if draw < acc:
            chosen = o
            break
    if chosen is None:  # cumulative rounding fell short; take last nonzero outcome
        positive = [o for o, p in probs if p > 0.0]
        if not positive:
            raise RuntimeError("no Bell outcome has positive probability")
        chosen = positive[-1]
    projections = dict(proj)
    if chosen is BellOutcome.NO_HERALD:
        post = np.zeros(2**n, dtype=np.complex128)
        weight = 0.0
        for o in folded:
            coeff, w = projections[o]
            post += _embed_bell(coeff, q_left, q_right, o)
            weight += w
    else:
        coeff, weight = projections[chosen]
        post = _embed_bell(coeff, q_left, q_right, chosen)
    if weight <= 0.0:
        raise RuntimeError("drew an outcome with zero-norm projection")
    return chosen, post / math.sqrt(weight)


def bell_state_measurement(
    state: StateVector,
    q_left: int,
    q_right: int,
    draw: float,
    partial: bool = False,
    resolve_psi_plus: bool = True,
) -> tuple[BellOutcome, StateVector]:
    """Collapse qubits (q_left, q_right) onto the Bell basis.

    Full mode resolves all four Bell states. Partial mode models a
    photonic-style analyzer: PSI_MINUS (and optionally PSI_PLUS) are
    resolved; the remaining outcomes merge into NO_HERALD, projecting the
    state onto their joint subspace.
    """
    _check_qubit(state, q_left)
    _check_qubit(state, q_right)
    if q_left == q_right:
        raise ValueError("Bell-state measurement needs two distinct qubits")
    if not 0.0 <= draw < 1.0:
        raise ValueError(f"draw must be in [0, 1), got {draw!r}")
    outcome, post = _bsm_step(
        state.amplitudes, state.num_qubits, q_left, q_right, draw, partial, resolve_psi_plus
    )
    return outcome, StateVector(state.num_qubits, post)


def _branch_outcomes(step: PlanStep) -> list:
    if isinstance(step, SpinMeasurement):
        return [1, -1]
    if not step.partial:
        return list(_BELL_TENSORS)
    resolved, _ = _partial_outcomes(step.resolve_psi_plus)
    return resolved + [BellOutcome.NO_HERALD]


def _branch_project(amps: np.ndarray, n: int, step: PlanStep, outcome) -> np.ndarray:
    """Unnormalized projection of ``amps`` onto one outcome branch of ``step``."""
    if isinstance(step, SpinMeasurement):
        angle = step.angle if outcome == 1 else step.angle + math.pi
        vec = _spin_components(angle)
        coeff, _ = _project_spin(amps, step.qubit, vec)
        return _embed_spin(coeff, step.qubit, vec)
    if outcome is BellOutcome.NO_HERALD:
        _, folded = _partial_outcomes(step.resolve_psi_plus)
        post = np.zeros_like(amps)
        for o in folded:
            coeff, _ = _project_bell(amps, step.q_left, step.q_right, o)
            post += _embed_bell(coeff, step.q_left, step.q_right, o)
        return post
    coeff, _ = _project_bell(amps, step.q_left, step.q_right, outcome)
    return _embed_bell(coeff, step.q_left, step.q_right, outcome)


def _validate_plan(n: int, plan: Sequence[PlanStep]) -> None:
    for step in plan:
        if isinstance(step, SpinMeasurement):
            if not 0 <= step.qubit < n:
                raise ValueError(f"plan step {step} exceeds the {n}-qubit budget")
        else:
            if step.q_left == step.q_right:
                raise ValueError("Bell-state measurement needs two distinct qubits")
            for q in (step.q_left, step.q_right):
                if not 0 <= q < n:
                    raise ValueError(f"plan step {step} exceeds the {n}-qubit budget")


def exact_branch_enumeration(
    initial: StateVector, plan: Sequence[PlanStep]
) -> dict[tuple, float]:
    """Full joint outcome distribution of a measurement plan, by depth-first
    expansion of every branch (no sampling).

    Keys are outcome tuples in plan order (ints for spins, BellOutcome for
    BSM steps), including zero-probability branches; values sum to 1.
    """
    n = initial.num_qubits
    _validate_plan(n, plan)
    table: dict[tuple, float] = {}

    def recurse(amps: np.ndarray, depth: int, outcomes: tuple) -> None:
        if depth == len(plan):
            table[outcomes] = float(np.vdot(amps, amps).real)
            return
        step = plan[depth]
        for outcome in _branch_outcomes(step):
            recurse(_branch_project(amps, n, step, outcome), depth + 1, outcomes + (outcome,))

    recurse(initial.amplitudes, 0, ())
    return table
