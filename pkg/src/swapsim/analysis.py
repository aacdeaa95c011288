"""Diagnostic battery: CHSH statistics, conditional-independence tests,
the no-difference check, herald-membership fragility, and the
controlled-collider teleportation channel demo.

The conditional-independence machinery is a categorical G-test (a
likelihood-ratio statistic, 2n times a KL divergence) against a chi-squared
threshold; all diagnostics operate on immutable trial records or exact
joint tables.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, replace
from enum import Enum
from typing import Sequence

import numpy as np
from scipy.stats import chi2

from .engine import (
    Ensemble,
    ExperimentConfig,
    _TrialStream,
    conditional_given_c,
    exact_experiment_distribution,
    marginal_over_c,
)
from .qcore import BellOutcome, _bsm_step, _spin_step, singlet

SETTING_PAIRS = ((0, 0), (0, 1), (1, 0), (1, 1))

# Fixed CHSH combination: S = E(0,0) + E(0,1) + E(1,0) - E(1,1).
CHSH_SIGNS = {(0, 0): 1.0, (0, 1): 1.0, (1, 0): 1.0, (1, 1): -1.0}
CHSH_COMBINATION = "+,+,+,-"

TSIRELSON = 2.0 * math.sqrt(2.0)

DEFAULT_ALPHA = 1e-3
DEFAULT_MIN_CELL = 50


class Verdict(Enum):
    HOLDS = "Holds"
    VIOLATED = "Violated"
    INCONCLUSIVE = "Inconclusive"


class NdaVerdict(Enum):
    NO_DIFFERENCE = "NoDifference"
    DIFFERENCE = "Difference"


def _records(data) -> Sequence:
    return data.records if isinstance(data, Ensemble) else data


_FIELD_ALIASES = {"lambda": "lam"}


def _value(record, name: str):
    return getattr(record, _FIELD_ALIASES.get(name, name))


def _values(record, names: tuple[str, ...]):
    if len(names) == 1:
        return _value(record, names[0])
    return tuple(_value(record, n) for n in names)


def _as_names(names) -> tuple[str, ...]:
    return (names,) if isinstance(names, str) else tuple(names)


@dataclass
class CorrelatorTable:
    """Per-setting-pair correlators E(a,b) = mean of A*B, with cell counts.

    Empty cells carry count 0 and E None. Exact-mode tables have defined E
    with count 0 (no sampling error).
    """

    values: dict[tuple[int, int], float | None]
    counts: dict[tuple[int, int], int]


def correlators(data: Ensemble | Sequence) -> CorrelatorTable:
    sums: dict[tuple[int, int], float] = {cell: 0.0 for cell in SETTING_PAIRS}
    counts: dict[tuple[int, int], int] = {cell: 0 for cell in SETTING_PAIRS}
    for r in _records(data):
        cell = (r.a, r.b)
        sums[cell] += r.A * r.B
        counts[cell] += 1
    values = {
        cell: (sums[cell] / counts[cell] if counts[cell] > 0 else None)
        for cell in SETTING_PAIRS
    }
    return CorrelatorTable(values, counts)


@dataclass(frozen=True)
class CHSHResult:
    S: float
    stderr: float
    combination: str = CHSH_COMBINATION

    def exceeds_quantum_bound(self, n_sigma: float = 5.0) -> bool:
        return abs(self.S) > TSIRELSON + n_sigma * self.stderr

    def as_json(self) -> dict:
        return {"S": self.S, "stderr": self.stderr, "combination": self.combination}


def chsh(table: CorrelatorTable) -> CHSHResult:
    """S = E(0,0) + E(0,1) + E(1,0) - E(1,1), with the standard error
    propagated from independent cell means (zero for exact tables)."""
    s = 0.0
    var = 0.0
    for cell in SETTING_PAIRS:
        e = table.values[cell]
        if e is None:
            raise ValueError(f"correlator cell {cell} is empty")
        s += CHSH_SIGNS[cell] * e
        n = table.counts.get(cell, 0)
        if n > 0:
            var += max(1.0 - e * e, 0.0) / n
    return CHSHResult(s, math.sqrt(var))


def exact_heralded_correlators(config: ExperimentConfig) -> CorrelatorTable:
    """Correlators of the event-ready subensemble from the exact joint table."""
    cond = conditional_given_c(exact_experiment_distribution(config), config.herald_set())
    sums: dict[tuple[int, int], float] = {cell: 0.0 for cell in SETTING_PAIRS}
    mass: dict[tuple[int, int], float] = {cell: 0.0 for cell in SETTING_PAIRS}
    for (a, b, A, B), p in cond.items():
        sums[(a, b)] += A * B * p
        mass[(a, b)] += p
    values = {
        cell: (sums[cell] / mass[cell] if mass[cell] > 0.0 else None)
        for cell in SETTING_PAIRS
    }
    return CorrelatorTable(values, {cell: 0 for cell in SETTING_PAIRS})


def exact_chsh(config: ExperimentConfig) -> CHSHResult:
    return chsh(exact_heralded_correlators(config))


@dataclass(frozen=True)
class CITestResult:
    hypothesis: str
    divergence: float
    threshold: float
    verdict: Verdict
    dof: int = 0
    n: int = 0

    def as_json(self) -> dict:
        return {
            "hypothesis": self.hypothesis,
            "divergence": self.divergence,
            "threshold": self.threshold,
            "verdict": self.verdict.value,
        }


def test_conditional_independence(
    data,
    target,
    given=(),
    versus=(),
    *,
    hypothesis: str | None = None,
    alpha: float = DEFAULT_ALPHA,
    min_cell: int = DEFAULT_MIN_CELL,
) -> CITestResult:
    """G-test of target independent of versus, given the conditioning set.

    Stratifies records by the given-variables, accumulates the
    likelihood-ratio statistic of the target-by-versus contingency table in
    each stratum, and compares against the chi-squared critical value at
    significance alpha with the summed degrees of freedom. Inconclusive when
    any populated conditioning cell (a given-versus combination) holds fewer
    than min_cell samples, or when there are no records.
    """
    target_names = _as_names(target)
    given_names = _as_names(given) if given else ()
    versus_names = _as_names(versus)
    if not target_names or not versus_names:
        raise ValueError("target and versus must name at least one variable each")
    if hypothesis is None:
        g_txt = ",".join(given_names) if given_names else "-"
        hypothesis = f"{','.join(target_names)} _||_ {','.join(versus_names)} | {g_txt}"

    strata: dict = defaultdict(Counter)
    n_total = 0
    for r in _records(data):
        g = _values(r, given_names) if given_names else ()
        t = _values(r, target_names)
        v = _values(r, versus_names)
        strata[g][(t, v)] += 1
        n_total += 1
    if n_total == 0:
        return CITestResult(hypothesis, 0.0, 0.0, Verdict.INCONCLUSIVE, 0, 0)

    g_stat = 0.0
    dof = 0
    sparse = False
    for cells in strata.values():
        row_tot: Counter = Counter()
        col_tot: Counter = Counter()
        n_g = 0
        for (t, v), c in cells.items():
            row_tot[t] += c
            col_tot[v] += c
            n_g += c
        if any(c < min_cell for c in col_tot.values()):
            sparse = True
        for (t, v), c in cells.items():
            expected = row_tot[t] * col_tot[v] / n_g
            g_stat += 2.0 * c * math.log(c / expected)
        dof += (len(row_tot) - 1) * (len(col_tot) - 1)

    threshold = float(chi2.isf(alpha, dof)) if dof > 0 else 0.0
    if sparse:
        verdict = Verdict.INCONCLUSIVE
    elif g_stat > threshold and dof > 0:
        verdict = Verdict.VIOLATED
    else:
        verdict = Verdict.HOLDS
    return CITestResult(hypothesis, g_stat, threshold, verdict, dof, n_total)


def no_signaling_tests(data, *, suffix: str = "") -> list[CITestResult]:
    """Marginal setting-independence of each wing's outcome: P(A|a,b)=P(A|a)
    and the mirror."""
    return [
        test_conditional_independence(
            data, "A", ("a",), ("b",), hypothesis=f"no-signaling-A{suffix}"
        ),
        test_conditional_independence(
            data, "B", ("b",), ("a",), hypothesis=f"no-signaling-B{suffix}"
        ),
    ]


def local_causality_tests(
    data, *, post_selected: bool, include_lambda: bool = False
) -> list[CITestResult]:
    """Wing outcome vs the remote setting-and-outcome pair, given the local
    setting (and the hidden pair, when the data records one)."""
    tag = "LC_ps" if post_selected else "LC"
    extra = ("lambda",) if include_lambda else ()
    return [
        test_conditional_independence(
            data, "A", ("a",) + extra, ("b", "B"), hypothesis=f"{tag}-A"
        ),
        test_conditional_independence(
            data, "B", ("b",) + extra, ("a", "A"), hypothesis=f"{tag}-B"
        ),
    ]


def statistical_independence_test(data, *, post_selected: bool) -> CITestResult:
    """Hidden-pair independence from the settings: P(lambda|a,b) = P(lambda)."""
    tag = "SI_ps" if post_selected else "SI"
    return test_conditional_independence(data, "lambda", (), ("a", "b"), hypothesis=tag)


@dataclass(frozen=True)
class NdaReport:
    max_abs_diff: float
    verdict: NdaVerdict

    def as_json(self) -> dict:
        return {"max_abs_diff": self.max_abs_diff, "verdict": self.verdict.value}


def no_difference_check(config: ExperimentConfig, tol: float = 1e-12) -> NdaReport:
    """Compare exact P(a,b,A,B) with the central measurement present
    (marginalized over its outcome) and absent."""
    with_c = marginal_over_c(exact_experiment_distribution(replace(config, c_enabled=True)))
    without_c = marginal_over_c(
        exact_experiment_distribution(replace(config, c_enabled=False))
    )
    keys = set(with_c) | set(without_c)
    diff = max(abs(with_c.get(k, 0.0) - without_c.get(k, 0.0)) for k in keys)
    verdict = NdaVerdict.NO_DIFFERENCE if diff < tol else NdaVerdict.DIFFERENCE
    return NdaReport(diff, verdict)


@dataclass(frozen=True)
class FragilityReport:
    """P(herald | a, b, A, B) over the 16 setting-outcome cells.

    max_spread is the largest change in herald probability under flipping
    one setting while holding everything else fixed; a positive spread means
    subensemble membership depends on the settings.
    """

    cells: dict[tuple[int, int, int, int], float | None]
    max_spread: float

    def as_json(self) -> dict:
        return {
            "cells": [
                {"a": a, "b": b, "A": A, "B": B, "p_herald": self.cells[(a, b, A, B)]}
                for (a, b, A, B) in sorted(self.cells)
            ],
            "max_spread": self.max_spread,
        }


def fragility(config: ExperimentConfig, tol: float = 1e-15) -> FragilityReport:
    if not config.c_enabled:
        raise ValueError("fragility requires the central measurement to be enabled")
    table = exact_experiment_distribution(config)
    accept = config.herald_set()
    mass: dict[tuple, float] = defaultdict(float)
    hit: dict[tuple, float] = defaultdict(float)
    for (a, b, A, B, c), p in table.items():
        mass[(a, b, A, B)] += p
        if c is not None and c in accept:
            hit[(a, b, A, B)] += p
    cells = {
        key: (hit[key] / mass[key] if mass[key] > tol else None) for key in mass
    }
    spread = 0.0
    for (a, b, A, B), p in cells.items():
        for flipped in ((1 - a, b, A, B), (a, 1 - b, A, B)):
            q = cells.get(flipped)
            if p is not None and q is not None:
                spread = max(spread, abs(p - q))
    return FragilityReport(dict(cells), spread)


@dataclass(frozen=True)
class TeleportReport:
    """Channel statistics of teleportation with no correction applied."""

    controlled: bool
    n_trials: int
    n_kept: int
    p_match: float | None
    mutual_information_bits: float
    channel: dict[tuple[int, int], float | None]  # (input, output) -> P(out|in)

    def as_json(self) -> dict:
        return {
            "p_match": self.p_match,
            "mutual_information_bits": self.mutual_information_bits,
        }


def mutual_information_bits(counts: np.ndarray) -> float:
    """Empirical mutual information of a 2x2 count table, add-half smoothed."""
    smoothed = np.asarray(counts, dtype=float) + 0.5
    joint = smoothed / smoothed.sum()
    px = joint.sum(axis=1, keepdims=True)
    py = joint.sum(axis=0, keepdims=True)
    return float(np.sum(joint * np.log2(joint / (px * py))))


def teleport_channel_demo(controlled: bool, n: int, seed: int) -> TeleportReport:
    """Teleport a classical bit through a Bell-state measurement with no
    outcome-dependent correction.

    The input bit rides qubit 0, the resource singlet sits on (1, 2), and
    the joint measurement hits (0, 1). Fixing the joint outcome (controlled
    mode post-selects the psi-minus result) opens the channel; averaging
    over uncorrected outcomes leaves the output maximally mixed.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    res = singlet().amplitudes
    inputs = [
        np.kron(np.array(basis, dtype=np.complex128), res)
        for basis in ((1.0, 0.0), (0.0, 1.0))
    ]
    counts = np.zeros((2, 2), dtype=np.int64)
    stream = _TrialStream()
    for trial_id in range(n):
        rng = stream.reset(seed, trial_id)
        x = 0 if rng.random() < 0.5 else 1
        outcome, amps = _bsm_step(inputs[x], 3, 0, 1, rng.random(), False, True)
        if controlled and outcome is not BellOutcome.PSI_MINUS:
            continue
        spin, _ = _spin_step(amps, 3, 2, 0.0, rng.random())
        counts[x, 0 if spin == 1 else 1] += 1
    kept = int(counts.sum())
    p_match = float((counts[0, 0] + counts[1, 1]) / kept) if kept else None
    mi = mutual_information_bits(counts) if kept else 0.0
    channel: dict[tuple[int, int], float | None] = {}
    for x in (0, 1):
        row = counts[x].sum()
        for y in (0, 1):
            channel[(x, y)] = float(counts[x, y] / row) if row else None
    return TeleportReport(controlled, n, kept, p_match, mi, channel)
