"""Statevector core tests.

Bell-measurement expectations are checked against an independent oracle
that builds full projector matrices with np.kron from explicitly written
Bell vectors, bypassing the library's sliced-tensor implementation.
"""

import itertools
import math

import numpy as np
import pytest

from swapsim.qcore import (
    BellOutcome,
    BsmStep,
    SpinMeasurement,
    StateVector,
    basis_state,
    bell_outcome_probabilities,
    bell_state,
    bell_state_measurement,
    exact_branch_enumeration,
    fidelity,
    make_two_singlets,
    measure_spin,
    prob_spin_up,
    product_of_pair_states,
    singlet,
)

SQ = 1.0 / math.sqrt(2.0)

# Oracle Bell vectors in the (left, right) computational basis, written out
# by hand: phi+- = (|00> +- |11>)/sqrt(2), psi+- = (|01> +- |10>)/sqrt(2).
ORACLE_BELL = {
    BellOutcome.PHI_PLUS: np.array([1, 0, 0, 1], dtype=complex) * SQ,
    BellOutcome.PHI_MINUS: np.array([1, 0, 0, -1], dtype=complex) * SQ,
    BellOutcome.PSI_PLUS: np.array([0, 1, 1, 0], dtype=complex) * SQ,
    BellOutcome.PSI_MINUS: np.array([0, 1, -1, 0], dtype=complex) * SQ,
}


def oracle_projector_12(outcome: BellOutcome) -> np.ndarray:
    """Projector onto a Bell state of qubits (1, 2) in a 4-qubit register,
    built as I (x) |b><b| (x) I (qubit 0 is the most significant bit)."""
    b = ORACLE_BELL[outcome]
    proj = np.outer(b, b.conj())
    return np.kron(np.eye(2), np.kron(proj, np.eye(2)))


def oracle_two_singlets() -> np.ndarray:
    """kron of two hand-written singlets."""
    s = ORACLE_BELL[BellOutcome.PSI_MINUS]
    return np.kron(s, s)


def oracle_swapped_state() -> np.ndarray:
    """psi- on (0, 3) and psi- on (1, 2), assembled index by index."""
    s = ORACLE_BELL[BellOutcome.PSI_MINUS].reshape(2, 2)
    amps = np.zeros(16, dtype=complex)
    for idx in range(16):
        b0, b1, b2, b3 = (idx >> 3) & 1, (idx >> 2) & 1, (idx >> 1) & 1, idx & 1
        amps[idx] = s[b0, b3] * s[b1, b2]
    return amps


class TestStateVector:
    def test_norm_enforced(self):
        with pytest.raises(ValueError):
            StateVector(1, np.array([1.0, 1.0]))

    def test_length_enforced(self):
        with pytest.raises(ValueError):
            StateVector(2, np.array([1.0, 0.0]))

    def test_qubit_budget(self):
        with pytest.raises(ValueError):
            StateVector(6, np.zeros(64))

    def test_immutable(self):
        s = singlet()
        with pytest.raises(ValueError):
            s.amplitudes[0] = 1.0


class TestTwoSinglets:
    def test_amplitude_0101(self):
        # Hand expansion of (|01>-|10>)/sqrt2 (x) (|01>-|10>)/sqrt2.
        s = make_two_singlets()
        assert abs(s.amplitude(0b0101) - 0.5) < 1e-12

    def test_matches_kron_oracle(self):
        s = make_two_singlets()
        assert np.allclose(s.amplitudes, oracle_two_singlets(), atol=1e-12)

    def test_odd_parity_on_first_pair_vanishes(self):
        s = make_two_singlets()
        for idx in range(16):
            b0, b1 = (idx >> 3) & 1, (idx >> 2) & 1
            if b0 == b1:  # singlet holds one excitation per pair
                assert s.amplitude(idx) == 0.0

    def test_norm(self):
        s = make_two_singlets()
        assert abs(np.vdot(s.amplitudes, s.amplitudes).real - 1.0) < 1e-12

    def test_singlet_sign_convention(self):
        s = singlet()
        assert abs(s.amplitude(0b01) - SQ) < 1e-12
        assert abs(s.amplitude(0b10) + SQ) < 1e-12


class TestProbSpinUp:
    def test_singlet_marginal(self):
        assert abs(prob_spin_up(singlet(), SpinMeasurement(0, 0.0)) - 0.5) < 1e-12

    def test_eigenstate(self):
        assert abs(prob_spin_up(basis_state(1, 0), SpinMeasurement(0, 0.0)) - 1.0) < 1e-12

    def test_x_basis_on_z_eigenstate(self):
        p = prob_spin_up(basis_state(1, 0), SpinMeasurement(0, math.pi / 2))
        assert abs(p - 0.5) < 1e-12

    def test_index_out_of_range(self):
        with pytest.raises(ValueError):
            prob_spin_up(singlet(), SpinMeasurement(2, 0.0))


class TestMeasureSpin:
    def test_eigenstate_any_draw(self):
        for draw in (0.0, 0.3, 0.999):
            out, post = measure_spin(basis_state(1, 0), SpinMeasurement(0, 0.0), draw)
            assert out == 1
            assert abs(post.amplitude(0) - 1.0) < 1e-12

    def test_threshold_convention(self):
        # P(+1) = 0.5 on a singlet wing; draw below the threshold selects +1.
        out, _ = measure_spin(singlet(), SpinMeasurement(0, 0.0), 0.3)
        assert out == 1
        out, _ = measure_spin(singlet(), SpinMeasurement(0, 0.0), 0.5)
        assert out == -1

    @pytest.mark.parametrize("theta", [0.0, 0.7, math.pi / 2, 2.1, 5.9])
    def test_singlet_anticorrelation_at_equal_angles(self, theta):
        rng = np.random.default_rng(42)
        for _ in range(20):
            out1, mid = measure_spin(singlet(), SpinMeasurement(0, theta), rng.random())
            out2, _ = measure_spin(mid, SpinMeasurement(1, theta), rng.random())
            assert out2 == -out1

    def test_repeated_measurement_is_stable(self):
        rng = np.random.default_rng(7)
        m = SpinMeasurement(0, 1.234)
        out1, post = measure_spin(singlet(), m, rng.random())
        for _ in range(5):
            out2, post = measure_spin(post, m, rng.random())
            assert out2 == out1

    def test_norm_preserved(self):
        rng = np.random.default_rng(3)
        state = make_two_singlets()
        for q, angle in ((0, 0.3), (3, 2.0), (1, 4.4)):
            _, state = measure_spin(state, SpinMeasurement(q, angle), rng.random())
            nrm = np.vdot(state.amplitudes, state.amplitudes).real
            assert abs(nrm - 1.0) < 1e-12

    def test_bad_draw(self):
        with pytest.raises(ValueError):
            measure_spin(singlet(), SpinMeasurement(0, 0.0), 1.0)

    def test_born_consistency_frequencies(self):
        # Empirical +1 frequency matches prob_spin_up within 5 standard errors.
        rng = np.random.default_rng(2026)
        n = 100_000
        for state, m in (
            (singlet(), SpinMeasurement(0, 0.9)),
            (basis_state(1, 0), SpinMeasurement(0, 1.1)),
        ):
            p = prob_spin_up(state, m)
            draws = rng.random(n)
            hits = sum(measure_spin(state, m, d)[0] == 1 for d in draws)
            se = math.sqrt(p * (1.0 - p) / n)
            assert abs(hits / n - p) < 5.0 * se


class TestBellStateMeasurement:
    def test_two_singlet_probabilities_quarter_each(self):
        # Oracle: p = psi^dag P psi with kron-built projectors.
        psi = oracle_two_singlets()
        for outcome in ORACLE_BELL:
            p_oracle = float(np.vdot(psi, oracle_projector_12(outcome) @ psi).real)
            assert abs(p_oracle - 0.25) < 1e-12
        probs = bell_outcome_probabilities(make_two_singlets(), 1, 2)
        for outcome in ORACLE_BELL:
            assert abs(probs[outcome] - 0.25) < 1e-12

    def test_swap_leaves_outer_pair_in_psi_minus(self):
        psi = oracle_two_singlets()
        proj = oracle_projector_12(BellOutcome.PSI_MINUS)
        collapsed = proj @ psi
        collapsed /= np.linalg.norm(collapsed)
        expected = oracle_swapped_state()
        assert abs(abs(np.vdot(expected, collapsed)) ** 2 - 1.0) < 1e-12

        # Library path: psi- is last in cumulative order, so a high draw hits it.
        outcome, post = bell_state_measurement(make_two_singlets(), 1, 2, 0.99)
        assert outcome is BellOutcome.PSI_MINUS
        lib_expected = product_of_pair_states(4, {(0, 3): singlet(), (1, 2): singlet()})
        assert abs(fidelity(post, lib_expected) - 1.0) < 1e-12
        assert np.allclose(lib_expected.amplitudes, expected, atol=1e-12)

    def test_collapse_matches_oracle_for_every_outcome(self):
        draws = {  # cumulative order phi+, phi-, psi+, psi- at 1/4 each
            BellOutcome.PHI_PLUS: 0.1,
            BellOutcome.PHI_MINUS: 0.3,
            BellOutcome.PSI_PLUS: 0.6,
            BellOutcome.PSI_MINUS: 0.9,
        }
        psi = oracle_two_singlets()
        for outcome, draw in draws.items():
            got, post = bell_state_measurement(make_two_singlets(), 1, 2, draw)
            assert got is outcome
            expected = oracle_projector_12(outcome) @ psi
            expected /= np.linalg.norm(expected)
            overlap = abs(np.vdot(expected, post.amplitudes)) ** 2
            assert abs(overlap - 1.0) < 1e-12

    def test_eigenstate_returns_certainty(self):
        state = product_of_pair_states(
            4, {(0, 1): bell_state(BellOutcome.PHI_PLUS), (2, 3): singlet()}
        )
        probs = bell_outcome_probabilities(state, 0, 1)
        assert abs(probs[BellOutcome.PHI_PLUS] - 1.0) < 1e-12
        outcome, _ = bell_state_measurement(state, 0, 1, 0.5)
        assert outcome is BellOutcome.PHI_PLUS

    def test_index_collision(self):
        with pytest.raises(ValueError):
            bell_state_measurement(make_two_singlets(), 2, 2, 0.5)

    def test_index_range(self):
        with pytest.raises(ValueError):
            bell_state_measurement(make_two_singlets(), 1, 4, 0.5)

    def test_partial_mode_conservation(self):
        for resolve in (True, False):
            probs = bell_outcome_probabilities(
                make_two_singlets(), 1, 2, partial=True, resolve_psi_plus=resolve
            )
            assert abs(sum(probs.values()) - 1.0) < 1e-12
            assert BellOutcome.NO_HERALD in probs
            assert BellOutcome.PHI_PLUS not in probs
            assert (BellOutcome.PSI_PLUS in probs) == resolve

    def test_partial_no_herald_projects_onto_folded_subspace(self):
        outcome, post = bell_state_measurement(
            make_two_singlets(), 1, 2, 0.95, partial=True, resolve_psi_plus=True
        )
        assert outcome is BellOutcome.NO_HERALD
        # Post state lives in the phi+ / phi- subspace of the pair.
        folded = bell_outcome_probabilities(post, 1, 2)
        assert abs(folded[BellOutcome.PSI_MINUS]) < 1e-12
        assert abs(folded[BellOutcome.PSI_PLUS]) < 1e-12
        assert abs(folded[BellOutcome.PHI_PLUS] + folded[BellOutcome.PHI_MINUS] - 1.0) < 1e-12

    def test_partial_sampling_matches_probabilities(self):
        rng = np.random.default_rng(5)
        n = 20_000
        counts = {o: 0 for o in (BellOutcome.PSI_PLUS, BellOutcome.PSI_MINUS, BellOutcome.NO_HERALD)}
        for _ in range(n):
            o, _ = bell_state_measurement(make_two_singlets(), 1, 2, rng.random(), partial=True)
            counts[o] += 1
        for o, expected in ((BellOutcome.PSI_MINUS, 0.25), (BellOutcome.NO_HERALD, 0.5)):
            se = math.sqrt(expected * (1 - expected) / n)
            assert abs(counts[o] / n - expected) < 5 * se


class TestExactBranchEnumeration:
    def test_single_qubit_table(self):
        table = exact_branch_enumeration(basis_state(1, 0), [SpinMeasurement(0, 0.0)])
        assert table[(1,)] == pytest.approx(1.0, abs=1e-12)
        assert table[(-1,)] == pytest.approx(0.0, abs=1e-12)

    def test_sums_to_one(self):
        plan = [
            SpinMeasurement(0, 0.3),
            SpinMeasurement(3, 1.1),
            BsmStep(1, 2),
        ]
        table = exact_branch_enumeration(make_two_singlets(), plan)
        assert len(table) == 16
        assert abs(sum(table.values()) - 1.0) < 1e-12

    def test_bsm_marginal_quarter_each(self):
        plan = [SpinMeasurement(0, 0.0), SpinMeasurement(3, 0.0), BsmStep(1, 2)]
        table = exact_branch_enumeration(make_two_singlets(), plan)
        for outcome in ORACLE_BELL:
            marginal = sum(p for key, p in table.items() if key[2] is outcome)
            assert abs(marginal - 0.25) < 1e-12

    def test_bsm_marginal_independent_of_angles(self):
        # No-signaling to the central measurement: any wing angles give 1/4.
        for ta, tb in ((0.0, 0.0), (0.9, 2.2), (4.0, 1.3)):
            plan = [SpinMeasurement(0, ta), SpinMeasurement(3, tb), BsmStep(1, 2)]
            table = exact_branch_enumeration(make_two_singlets(), plan)
            for outcome in ORACLE_BELL:
                marginal = sum(p for key, p in table.items() if key[2] is outcome)
                assert abs(marginal - 0.25) < 1e-12

    def test_order_invariance_over_commuting_steps(self):
        steps = {
            "A": SpinMeasurement(0, 0.7),
            "B": SpinMeasurement(3, 2.0),
            "C": BsmStep(1, 2),
        }
        names = list(steps)
        reference = None
        for perm in itertools.permutations(names):
            table = exact_branch_enumeration(make_two_singlets(), [steps[k] for k in perm])
            named = {
                tuple(sorted(zip(perm, key))): p for key, p in table.items()
            }
            if reference is None:
                reference = named
            else:
                assert set(named) == set(reference)
                for k in named:
                    assert abs(named[k] - reference[k]) < 1e-12

    def test_bsm_first_vs_last(self):
        early = [BsmStep(1, 2), SpinMeasurement(0, 0.0), SpinMeasurement(3, 0.0)]
        late = [SpinMeasurement(0, 0.0), SpinMeasurement(3, 0.0), BsmStep(1, 2)]
        t_early = exact_branch_enumeration(make_two_singlets(), early)
        t_late = exact_branch_enumeration(make_two_singlets(), late)
        for (c, a, b), p in t_early.items():
            assert abs(p - t_late[(a, b, c)]) < 1e-12

    def test_sampling_agrees_with_enumeration(self):
        # Cross-check the sampler against the enumerated joint distribution.
        plan = [SpinMeasurement(0, 0.6), BsmStep(1, 2)]
        table = exact_branch_enumeration(make_two_singlets(), plan)
        rng = np.random.default_rng(11)
        n = 20_000
        counts: dict = {}
        for _ in range(n):
            out_a, state = measure_spin(make_two_singlets(), SpinMeasurement(0, 0.6), rng.random())
            out_c, _ = bell_state_measurement(state, 1, 2, rng.random())
            counts[(out_a, out_c)] = counts.get((out_a, out_c), 0) + 1
        for key, p in table.items():
            freq = counts.get(key, 0) / n
            se = math.sqrt(max(p * (1 - p), 1e-12) / n)
            assert abs(freq - p) < 5 * se + 1e-9

    def test_plan_budget_enforced(self):
        with pytest.raises(ValueError):
            exact_branch_enumeration(make_two_singlets(), [SpinMeasurement(4, 0.0)])
        with pytest.raises(ValueError):
            exact_branch_enumeration(make_two_singlets(), [BsmStep(1, 1)])
