"""The four-particle swapping experiment run as a two-station protocol.

Sources emit two singlets on pairs (1,2) and (3,4). Station D acts on
qubits (2,3) and may broadcast its outcome; station C picks a CHSH setting
pair and measures spins 1 and 4. Every trial draws from two Philox streams
derived from ``(master_seed, trial_id)``, so records do not depend on the
order in which trials are executed.
"""
from __future__ import annotations

import csv
import enum
import io
import json
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .analysis import ChshEstimate, ChshSettings, chsh_estimate
from .core import (
    BELL_ORDER,
    BellOutcome,
    DensityMatrix,
    StateVector,
    bell_basis,
    computational_basis,
    density_from_pure,
    joint_state,
    partial_trace,
)
from .measurement import (
    ZERO_PROB,
    bell_adjoint,
    born_probabilities,
    collapse,
    computational_adjoint,
    relative_state,
    spin_pair_adjoint,
)
from .rng import RngStream, rng_derive

D_PAIR = (2, 3)
C_PAIR = (1, 4)
Z_AXIS = (0.0, 0.0, 1.0)

# Stream layout per trial: D uses 2k, C uses 2k + 1. Chance selection gets its own key.
_CHANCE_STREAM = (1 << 64) - 1


class StationDAction(enum.Enum):
    BELL = "bell"
    ZZ = "zz"
    NONE = "none"

    def __str__(self) -> str:
        return self.value


class SelectionError(ValueError):
    """Post-selection requested on records that carry no usable classical message."""


@dataclass(frozen=True)
class ClassicalMessage:
    trial_id: int
    action: StationDAction
    outcome: str | None

    def __post_init__(self) -> None:
        if (self.outcome is None) != (self.action is StationDAction.NONE):
            raise ValueError("a message carries an outcome iff station D measured")


@dataclass(frozen=True)
class TrialRecord:
    trial_id: int
    master_seed: int
    d_action: StationDAction
    d_outcome: str | None
    message_delivered: bool
    setting_pair: int
    direction1: tuple[float, float, float]
    direction4: tuple[float, float, float]
    outcome1: int
    outcome4: int

    def row(self) -> dict:
        """Flat record for the JSON-lines / CSV export."""
        return {
            "trial_id": self.trial_id,
            "d_action": self.d_action.value,
            "d_outcome": self.d_outcome,
            "message_delivered": self.message_delivered,
            "setting_pair": self.setting_pair,
            "outcome1": self.outcome1,
            "outcome4": self.outcome4,
        }


RECORD_COLUMNS = ("trial_id", "d_action", "d_outcome", "message_delivered", "setting_pair", "outcome1", "outcome4")


@dataclass(frozen=True)
class ExperimentConfig:
    num_trials: int
    master_seed: int = 42
    d_action: StationDAction = StationDAction.BELL
    broadcast_enabled: bool = True
    chsh_settings: ChshSettings = field(default_factory=ChshSettings.default)
    selection_target: BellOutcome | None = None
    # In ZZ mode station C measures both spins along z unless this is cleared.
    zz_forces_z: bool = True

    def __post_init__(self) -> None:
        if self.num_trials < 0:
            raise ValueError("num_trials must be non-negative")
        if self.selection_target is not None and not (
            self.d_action is StationDAction.BELL and self.broadcast_enabled
        ):
            raise ValueError("a selection target requires Bell measurements at D with broadcast enabled")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["d_action"] = self.d_action.value
        d["selection_target"] = None if self.selection_target is None else self.selection_target.value
        d["chsh_settings"] = self.chsh_settings.to_dict()
        return d


def d_stream(master_seed: int, trial_id: int) -> RngStream:
    return rng_derive(master_seed, 2 * trial_id)


def c_stream(master_seed: int, trial_id: int) -> RngStream:
    return rng_derive(master_seed, 2 * trial_id + 1)


_ZZ_LABELS = ("00", "01", "10", "11")
_PAIR_OUTCOMES = ((1, 1), (1, -1), (-1, 1), (-1, -1))


def _station_d(amps: np.ndarray, action: StationDAction, rng: RngStream) -> tuple[str | None, np.ndarray]:
    if action is StationDAction.NONE:
        return None, amps
    u, _ = rng.uniform()
    if action is StationDAction.BELL:
        k, _, post = collapse(amps, 4, D_PAIR, bell_adjoint(), u)
        return BELL_ORDER[k].value, post
    k, _, post = collapse(amps, 4, D_PAIR, computational_adjoint(), u)
    return _ZZ_LABELS[k], post


def apply_station_d(state: StateVector, action: StationDAction, rng: RngStream) -> tuple[str | None, StateVector]:
    """Station D's action on qubits (2,3) of a four-qubit state: (outcome, post-state)."""
    outcome, post = _station_d(state.amplitudes, action, rng)
    return outcome, (state if post is state.amplitudes else StateVector(post))


def run_trial(config: ExperimentConfig, trial_id: int) -> TrialRecord:
    """One round: D acts on (2,3), then C measures spins 1 and 4 on what is left.

    C's two spin measurements are taken together as one projective measurement
    in the product eigenbasis, which has the same joint statistics as measuring
    qubit 1 and then qubit 4.
    """
    d_outcome, amps = _station_d(joint_state().amplitudes, config.d_action, d_stream(config.master_seed, trial_id))
    message = ClassicalMessage(trial_id, config.d_action, d_outcome) if config.broadcast_enabled else None

    (u_pair, u_spin), _ = c_stream(config.master_seed, trial_id).uniforms(2)
    pair = min(int(u_pair * 4), 3) + 1
    dir1, dir4 = config.chsh_settings.pairs()[pair]
    if config.d_action is StationDAction.ZZ and config.zz_forces_z:
        dir1 = dir4 = Z_AXIS
    k, _, _ = collapse(amps, 4, C_PAIR, spin_pair_adjoint(dir1, dir4), u_spin, project=False)
    o1, o4 = _PAIR_OUTCOMES[k]
    return TrialRecord(
        trial_id=trial_id,
        master_seed=config.master_seed,
        d_action=config.d_action,
        d_outcome=d_outcome,
        message_delivered=message is not None,
        setting_pair=pair,
        direction1=tuple(dir1),
        direction4=tuple(dir4),
        outcome1=o1,
        outcome4=o4,
    )


def run_ensemble(config: ExperimentConfig, trial_ids: Iterable[int] | None = None) -> list[TrialRecord]:
    """Run trials ``0..num_trials-1`` (or ``trial_ids``); records come back sorted by trial id."""
    ids = range(config.num_trials) if trial_ids is None else trial_ids
    records = [run_trial(config, k) for k in ids]
    records.sort(key=lambda r: r.trial_id)
    return records


def post_select(records: Sequence[TrialRecord], target: BellOutcome) -> list[TrialRecord]:
    """Records whose delivered Bell outcome equals ``target``, in input order."""
    for r in records:
        if not r.message_delivered:
            raise SelectionError(
                f"trial {r.trial_id}: selection without classical information (no message was delivered)"
            )
        if r.d_action is not StationDAction.BELL:
            raise SelectionError(f"trial {r.trial_id}: station D did not perform a Bell measurement")
    return [r for r in records if r.d_outcome == target.value]


def chance_select(records: Sequence[TrialRecord], size: int, seed: int) -> list[TrialRecord]:
    """Uniformly random subset of ``size`` records that ignores every D outcome."""
    if not 0 <= size <= len(records):
        raise ValueError(f"cannot choose {size} of {len(records)} records")
    gen = rng_derive(seed, _CHANCE_STREAM).generator()
    idx = np.sort(gen.choice(len(records), size=size, replace=False))
    return [records[i] for i in idx]


def chsh_from_records(records: Iterable[TrialRecord]) -> ChshEstimate:
    return chsh_estimate((r.setting_pair, r.outcome1, r.outcome4) for r in records)


def conditional_mixture(d_basis: Sequence[StateVector], state: StateVector | None = None) -> DensityMatrix:
    """Born-weighted mixture of the (1,4) relative states over a basis measured on (2,3).

    ``state`` defaults to the two-singlet joint state.
    """
    psi = joint_state() if state is None else state
    probs = born_probabilities(psi, D_PAIR, d_basis)
    acc = np.zeros((4, 4), dtype=complex)
    for p, element in zip(probs, d_basis):
        if p <= ZERO_PROB:
            continue
        rel = relative_state(psi, D_PAIR, element)
        acc += p * np.outer(rel.amplitudes, rel.amplitudes.conj())
    return DensityMatrix(acc)


def pair14_state(action: StationDAction) -> DensityMatrix:
    """Exact state of (1,4) after D's action, averaged over D's outcomes."""
    if action is StationDAction.BELL:
        return conditional_mixture(bell_basis())
    if action is StationDAction.ZZ:
        return conditional_mixture(computational_basis(2))
    return partial_trace(density_from_pure(joint_state()), C_PAIR, 4)


def outcome_distribution(records: Iterable[TrialRecord]) -> dict[int, tuple[int, dict[tuple[int, int], float]]]:
    """Per setting pair: (count, empirical distribution of (outcome1, outcome4))."""
    counts: dict[int, Counter] = {k: Counter() for k in (1, 2, 3, 4)}
    for r in records:
        counts[r.setting_pair][(r.outcome1, r.outcome4)] += 1
    out = {}
    for k, c in counts.items():
        n = sum(c.values())
        out[k] = (n, {o: (c[o] / n if n else 0.0) for o in _PAIR_OUTCOMES})
    return out


def total_variation(p: dict, q: dict) -> float:
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in set(p) | set(q))


@dataclass
class NonSignalingReport:
    n_trials: int
    seed: int
    # rows: (setting_pair, action_a, action_b, tv_distance, threshold, n_a, n_b)
    sampled: list[tuple[int, str, str, float, float, int, int]]
    # action -> max |rho_14 - I/4|
    exact: dict[str, float]

    @property
    def max_sampled(self) -> float:
        return max((row[3] for row in self.sampled), default=0.0)

    @property
    def max_exact(self) -> float:
        return max(self.exact.values(), default=0.0)

    def all_within_threshold(self) -> bool:
        return all(row[3] < row[4] for row in self.sampled)

    def to_dict(self) -> dict:
        return {
            "n_trials": self.n_trials,
            "seed": self.seed,
            "sampled": [
                dict(zip(("setting_pair", "action_a", "action_b", "tv_distance", "threshold", "n_a", "n_b"), row))
                for row in self.sampled
            ],
            "exact": dict(self.exact),
        }


def nonsignaling_check(
    n_trials: int,
    seed: int,
    settings: ChshSettings | None = None,
    actions: Sequence[StationDAction] = tuple(StationDAction),
) -> NonSignalingReport:
    """Compare C's unconditioned (1,4) statistics across D's possible actions.

    Broadcast is off and C keeps the same settings in every mode. Each action
    runs on its own block of trial ids so the ensembles are independent. The
    sampled threshold per bucket pair is ``4 / sqrt(min(n_a, n_b))``.
    """
    if n_trials < 10_000:
        raise ValueError("nonsignaling_check needs at least 10^4 trials")
    settings = settings or ChshSettings.default()
    dists = {}
    for i, action in enumerate(actions):
        cfg = ExperimentConfig(
            num_trials=n_trials,
            master_seed=seed,
            d_action=action,
            broadcast_enabled=False,
            chsh_settings=settings,
            zz_forces_z=False,
        )
        ids = range(i * n_trials, (i + 1) * n_trials)
        dists[action] = outcome_distribution(run_ensemble(cfg, trial_ids=ids))

    sampled = []
    pairs = list(combinations(actions, 2)) or [(a, a) for a in actions]
    for k in (1, 2, 3, 4):
        for a, b in pairs:
            na, pa = dists[a][k]
            nb, pb = dists[b][k]
            threshold = 4.0 / math.sqrt(max(min(na, nb), 1))
            sampled.append((k, a.value, b.value, total_variation(pa, pb), threshold, na, nb))

    mixed = DensityMatrix.maximally_mixed(2).matrix
    exact = {a.value: float(np.max(np.abs(pair14_state(a).matrix - mixed))) for a in actions}
    return NonSignalingReport(n_trials, seed, sampled, exact)


def write_records(records: Iterable[TrialRecord], stream: io.TextIOBase, fmt: str = "json") -> None:
    if fmt == "json":
        for r in records:
            stream.write(json.dumps(r.row(), separators=(",", ":")) + "\n")
    elif fmt == "csv":
        writer = csv.DictWriter(stream, fieldnames=RECORD_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for r in records:
            writer.writerow(r.row())
    else:
        raise ValueError(f"unknown record format {fmt!r}")


def read_records(stream: io.TextIOBase, fmt: str = "json") -> list[dict]:
    """Parse an exported record file back into row dicts with native types."""
    if fmt == "json":
        return [json.loads(line) for line in stream if line.strip()]
    if fmt == "csv":
        rows = []
        for row in csv.DictReader(stream):
            rows.append(
                {
                    "trial_id": int(row["trial_id"]),
                    "d_action": row["d_action"],
                    "d_outcome": row["d_outcome"] or None,
                    "message_delivered": row["message_delivered"] == "True",
                    "setting_pair": int(row["setting_pair"]),
                    "outcome1": int(row["outcome1"]),
                    "outcome4": int(row["outcome4"]),
                }
            )
        return rows
    raise ValueError(f"unknown record format {fmt!r}")
