"""CSV/JSON persistence for ensembles, toy runs, and analysis reports.

All writers are byte-deterministic: fixed headers, ASCII outcome tokens,
sorted JSON keys, and no timestamps, so identical (seed, config) inputs
reproduce identical files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Sequence

from .engine import Ensemble, TrialRecord
from .qcore import BellOutcome
from .toys import RpsTrial, ToyTrial

ENSEMBLE_HEADER = ["trial_id", "a", "b", "A", "B", "c_outcome", "heralded"]
TOY_HEADER = ["trial_id", "a", "b", "A", "B", "lambda_A", "lambda_B", "accepted"]
RPS_HEADER = ["trial_id", "alice", "bob", "verdict"]

ABSENT_TOKEN = "absent"

_TOKEN_TO_OUTCOME = {o.value: o for o in BellOutcome}


def outcome_token(outcome: BellOutcome | None) -> str:
    return ABSENT_TOKEN if outcome is None else outcome.value


def outcome_from_token(token: str) -> BellOutcome | None:
    if token == ABSENT_TOKEN:
        return None
    try:
        return _TOKEN_TO_OUTCOME[token]
    except KeyError:
        raise ValueError(f"unknown outcome token {token!r}") from None


def _bool_token(flag: bool) -> str:
    return "true" if flag else "false"


def _bool_from_token(token: str) -> bool:
    if token not in ("true", "false"):
        raise ValueError(f"expected true/false, got {token!r}")
    return token == "true"


def write_ensemble_csv(path: str | Path, ensemble: Ensemble) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ENSEMBLE_HEADER)
        for r in ensemble.records:
            writer.writerow(
                [r.trial_id, r.a, r.b, r.A, r.B, outcome_token(r.c_outcome), _bool_token(r.heralded)]
            )


def read_ensemble_csv(path: str | Path) -> list[TrialRecord]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ENSEMBLE_HEADER:
            raise ValueError(f"unexpected ensemble CSV header: {header}")
        return [
            TrialRecord(
                trial_id=int(row[0]),
                a=int(row[1]),
                b=int(row[2]),
                A=int(row[3]),
                B=int(row[4]),
                c_outcome=outcome_from_token(row[5]),
                heralded=_bool_from_token(row[6]),
            )
            for row in reader
        ]


def ensemble_json_payload(ensemble: Ensemble, meta: dict) -> dict:
    return {
        "meta": dict(meta),
        "records": [
            {
                "trial_id": r.trial_id,
                "a": r.a,
                "b": r.b,
                "A": r.A,
                "B": r.B,
                "c_outcome": outcome_token(r.c_outcome),
                "heralded": r.heralded,
            }
            for r in ensemble.records
        ],
    }


def write_toy_csv(path: str | Path, trials: Sequence[ToyTrial]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TOY_HEADER)
        for t in trials:
            lam_a, lam_b = ("", "") if t.lam is None else (t.lam[0], t.lam[1])
            writer.writerow(
                [t.trial_id, t.a, t.b, t.A, t.B, lam_a, lam_b, _bool_token(t.accepted)]
            )


def write_rps_csv(path: str | Path, trials: Sequence[RpsTrial]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RPS_HEADER)
        for t in trials:
            writer.writerow([t.trial_id, t.alice.value, t.bob.value, t.verdict.value])


def dumps_canonical(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def write_json(path: str | Path, payload: dict) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_canonical(payload))
