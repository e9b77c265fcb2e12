"""Two-file-per-server retrieval over the adder channel, end to end.

Session flow: both servers transmit uniform blocks over the adder channel;
the client splits positions into decodable and hidden sets, checks that the
decodable fraction is close enough to one half, partitions both sets, and
publishes one set pair per server chosen so that the set covering the
requested file is decodable.  Each server one-time-pads its channel inputs
over both published sets with its two files; the client unmasks the
requested file on the decodable side.

``execute_session`` is the deterministic core (explicit channel inputs, used
directly by the exhaustive leakage oracle and by the deliberately broken
variants); ``run_session`` samples the inputs from party streams.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bits import BitString, sample_uniform
from .channel import ChannelRound, classify_indices, ternary_to_string, transmit
from .model import (
    CapacityShortfall,
    ConfigurationError,
    FileStore,
    PartyRandomness,
    ProtocolParams,
    Selection,
    party_stream,
)

__all__ = [
    "IndexPartition",
    "SelectionSets",
    "Transcript",
    "abort_check",
    "partition",
    "sample_partition",
    "partition_choices",
    "client_partitioner",
    "build_selection_sets",
    "server_mask",
    "client_recover",
    "execute_session",
    "run_session",
    "run_session_adaptive",
    "MUTATIONS",
]

IndexSet = tuple[int, ...]

# Deliberately broken protocol variants, used to demonstrate that the
# leakage oracle detects violations.  All tamper with server 1 / z1.
#   reuse-pad:          server 1 pads both messages with the same input bits
#   leak-selection:     the client publishes z1 alongside the sets
#   unmasked-messages:  server 1 sends its files without the input pad
MUTATIONS = ("reuse-pad", "leak-selection", "unmasked-messages")

# Nudge before floor() so that shares like alpha = 1/3 of M = 6 resolve to
# the intended integer despite binary representation of alpha.
_FLOOR_EPS = 1e-9


def _share_floor(x: float) -> int:
    return math.floor(x + _FLOOR_EPS)


@dataclass(frozen=True)
class IndexPartition:
    """The decodable/hidden split and its per-server shares."""

    good: IndexSet
    bad: IndexSet
    g1: IndexSet
    g2: IndexSet
    b1: IndexSet
    b2: IndexSet
    m: int


@dataclass(frozen=True)
class SelectionSets:
    """The two index sets published to each server, in published order."""

    s1_for_server1: IndexSet
    s2_for_server1: IndexSet
    s1_for_server2: IndexSet
    s2_for_server2: IndexSet

    def for_server(self, server_id: int) -> tuple[IndexSet, IndexSet]:
        if server_id == 1:
            return self.s1_for_server1, self.s2_for_server1
        return self.s1_for_server2, self.s2_for_server2


@dataclass(frozen=True)
class Transcript:
    """Complete public record of one session."""

    params: ProtocolParams
    aborted: bool
    abort_reason: Optional[str]
    y: np.ndarray
    selection_sets: Optional[SelectionSets] = None
    m11: Optional[BitString] = None
    m12: Optional[BitString] = None
    m21: Optional[BitString] = None
    m22: Optional[BitString] = None
    recovered: Optional[tuple[BitString, BitString]] = None
    recovery_ok: Optional[bool] = None
    leaked_selection: Optional[int] = None
    # Client-private: the share partition actually used.  Never serialized
    # into the public record; exposed for the leakage oracle's client view.
    part: Optional[IndexPartition] = None

    @property
    def messages(self) -> tuple[Optional[BitString], ...]:
        return (self.m11, self.m12, self.m21, self.m22)

    def public_bits_from_server(self, server_id: int) -> int:
        """Total public message bits sent by one server in this session."""
        if self.aborted:
            return 0
        a, b = (self.m11, self.m12) if server_id == 1 else (self.m21, self.m22)
        return len(a) + len(b)

    def to_record(self) -> dict:
        rec = {
            "record": "transcript",
            "n": self.params.n,
            "t": self.params.t_exponent,
            "alpha": self.params.alpha,
            "ell1": self.params.ell1,
            "ell2": self.params.ell2,
            "aborted": self.aborted,
            "abort_reason": self.abort_reason,
            "y": ternary_to_string(self.y),
        }
        if not self.aborted:
            sets = self.selection_sets
            rec["sets"] = {
                "server1": [list(sets.s1_for_server1), list(sets.s2_for_server1)],
                "server2": [list(sets.s1_for_server2), list(sets.s2_for_server2)],
            }
            rec["messages"] = {
                "m11": self.m11.to_hex(),
                "m12": self.m12.to_hex(),
                "m21": self.m21.to_hex(),
                "m22": self.m22.to_hex(),
            }
            rec["recovery_ok"] = self.recovery_ok
        if self.leaked_selection is not None:
            rec["leaked_selection"] = self.leaked_selection
        return rec


def abort_check(g_size: int, n: int, t: float) -> bool:
    """True iff the session may continue: |g_size/n - 1/2| <= n**(-t)."""
    if not 0 <= g_size <= n:
        raise ValueError("g_size must lie in [0, n]")
    if not 0 < t < 0.5:
        raise ValueError("t must lie in (0, 1/2)")
    return abs(g_size / n - 0.5) <= n ** (-t)


def partition(good: IndexSet, bad: IndexSet, alpha: float, ell1: int, ell2: int) -> IndexPartition:
    """Carve per-server shares out of the decodable and hidden sets.

    Shares are the lowest-index elements, first-server first, so the choice
    is deterministic.  Raises :class:`CapacityShortfall` when the realized
    block cannot carry the requested lengths (the session driver treats
    that as an abort).
    """
    m = _check_shares(good, bad, alpha, ell1, ell2)
    good = tuple(sorted(good))
    bad = tuple(sorted(bad))
    return IndexPartition(
        good=good,
        bad=bad,
        g1=good[:ell1],
        g2=good[ell1 : ell1 + ell2],
        b1=bad[:ell1],
        b2=bad[ell1 : ell1 + ell2],
        m=m,
    )


def _check_shares(good: IndexSet, bad: IndexSet, alpha: float, ell1: int, ell2: int) -> int:
    if set(good) & set(bad):
        raise ValueError("good and bad index sets must be disjoint")
    m = min(len(good), len(bad))
    if ell1 > _share_floor(alpha * m) or ell2 > _share_floor((1.0 - alpha) * m):
        raise CapacityShortfall(
            f"requested lengths ({ell1}, {ell2}) exceed shares of M={m} at alpha={alpha}"
        )
    return m


def sample_partition(
    good: IndexSet,
    bad: IndexSet,
    alpha: float,
    ell1: int,
    ell2: int,
    stream: np.random.Generator,
) -> IndexPartition:
    """Draw the shares uniformly at random with the client's local randomness.

    Honest sessions must use a random partition: a deterministic share rule
    lets an observer of all four published sets reconstruct which sets are
    decodable and break both selection privacy and server privacy.  The
    deterministic :func:`partition` remains available for worked examples
    and sizing checks only.
    """
    m = _check_shares(good, bad, alpha, ell1, ell2)
    good = tuple(sorted(good))
    bad = tuple(sorted(bad))
    pg = stream.permutation(len(good))
    pb = stream.permutation(len(bad))
    return IndexPartition(
        good=good,
        bad=bad,
        g1=tuple(sorted(good[i] for i in pg[:ell1])),
        g2=tuple(sorted(good[i] for i in pg[ell1 : ell1 + ell2])),
        b1=tuple(sorted(bad[i] for i in pb[:ell1])),
        b2=tuple(sorted(bad[i] for i in pb[ell1 : ell1 + ell2])),
        m=m,
    )


def partition_choices(
    good: IndexSet, bad: IndexSet, alpha: float, ell1: int, ell2: int
) -> list[IndexPartition]:
    """All equally likely partitions, for exhaustive averaging over the
    client's share randomness."""
    m = _check_shares(good, bad, alpha, ell1, ell2)
    good = tuple(sorted(good))
    bad = tuple(sorted(bad))
    out = []
    for g1 in itertools.combinations(good, ell1):
        rest_g = [i for i in good if i not in g1]
        for g2 in itertools.combinations(rest_g, ell2):
            for b1 in itertools.combinations(bad, ell1):
                rest_b = [i for i in bad if i not in b1]
                for b2 in itertools.combinations(rest_b, ell2):
                    out.append(IndexPartition(good, bad, g1, g2, b1, b2, m))
    return out


def build_selection_sets(z1: int, z2: int, part: IndexPartition) -> SelectionSets:
    """Publish the decodable share in slot z_i and the hidden share in the other."""
    per_server = []
    for server_id, z in ((1, z1), (2, z2)):
        g = part.g1 if server_id == 1 else part.g2
        b = part.b1 if server_id == 1 else part.b2
        per_server.append((g, b) if z == 1 else (b, g))
    (s11, s21), (s12, s22) = per_server
    return SelectionSets(s11, s21, s12, s22)


def server_mask(
    x: BitString, sets: tuple[IndexSet, IndexSet], f1: BitString, f2: BitString
) -> tuple[BitString, BitString]:
    """One-time-pad the server's channel inputs over both published sets."""
    s1, s2 = sets
    return x.subselect(s1) ^ f1, x.subselect(s2) ^ f2


def client_recover(z: int, y: np.ndarray, s_z: IndexSet, m_z: BitString) -> BitString:
    """Unmask the requested file from the message covering decodable positions.

    At a decodable position the sum determines both inputs, so each server's
    input there is simply half the sum.
    """
    idx = np.asarray(s_z, dtype=np.int64) - 1
    vals = np.asarray(y, dtype=np.uint8)[idx]
    if np.any(vals == 1):
        raise RuntimeError("hidden position inside a decodable selection set")
    return BitString.from_array(vals // 2) ^ m_z


def _aborted(params: ProtocolParams, y: np.ndarray, reason: str) -> Transcript:
    return Transcript(params=params, aborted=True, abort_reason=reason, y=y)


def execute_session(
    params: ProtocolParams,
    files1: FileStore,
    files2: FileStore,
    sel: Selection,
    x1: BitString,
    x2: BitString,
    *,
    abort_disabled: bool = False,
    mutation: Optional[str] = None,
    partitioner=partition,
) -> Transcript:
    """Run one session with explicit channel inputs.

    ``abort_disabled`` skips the decodable-fraction check only; a capacity
    shortfall still aborts because the shares physically do not exist.
    ``partitioner`` maps (good, bad, alpha, ell1, ell2) to the share
    partition; honest drivers supply a randomized one (see
    :func:`sample_partition`), the default deterministic rule is for
    deterministic replay and worked examples.
    """
    params.validate()
    sel.validate(2, 2)
    if mutation is not None and mutation not in MUTATIONS:
        raise ConfigurationError(f"unknown mutation {mutation!r}; choose from {MUTATIONS}")
    if files1.file_count != 2 or files2.file_count != 2:
        raise ConfigurationError("two-file sessions need exactly two files per server")
    if files1.file_length != params.ell1 or files2.file_length != params.ell2:
        raise ConfigurationError("file lengths must match (ell1, ell2)")
    if len(x1) != params.n or len(x2) != params.n:
        raise ConfigurationError("channel inputs must have length n")

    round_ = transmit(x1, x2)
    good, bad = classify_indices(round_.y)

    if not abort_disabled and not abort_check(len(good), params.n, params.t_exponent):
        return _aborted(params, round_.y, "size-deviation")
    try:
        part = partitioner(good, bad, params.alpha, params.ell1, params.ell2)
    except CapacityShortfall:
        return _aborted(params, round_.y, "capacity-shortfall")

    sets = build_selection_sets(sel.z1, sel.z2, part)

    m11, m12 = server_mask(x1, sets.for_server(1), files1.file(1), files1.file(2))
    m21, m22 = server_mask(x2, sets.for_server(2), files2.file(1), files2.file(2))
    if mutation == "reuse-pad":
        # Server 1 pads its second message with the inputs of the first set.
        m12 = x1.subselect(sets.s1_for_server1) ^ files1.file(2)
    elif mutation == "unmasked-messages":
        m11, m12 = files1.file(1), files1.file(2)

    s1_sets = sets.for_server(1)
    s2_sets = sets.for_server(2)
    rec1 = client_recover(sel.z1, round_.y, s1_sets[sel.z1 - 1], (m11, m12)[sel.z1 - 1])
    rec2 = client_recover(sel.z2, round_.y, s2_sets[sel.z2 - 1], (m21, m22)[sel.z2 - 1])

    return Transcript(
        params=params,
        aborted=False,
        abort_reason=None,
        y=round_.y,
        selection_sets=sets,
        m11=m11,
        m12=m12,
        m21=m21,
        m22=m22,
        recovered=(rec1, rec2),
        recovery_ok=(rec1 == files1.file(sel.z1) and rec2 == files2.file(sel.z2)),
        leaked_selection=sel.z1 if mutation == "leak-selection" else None,
        part=part,
    )


def run_session(
    params: ProtocolParams,
    files1: FileStore,
    files2: FileStore,
    sel: Selection,
    rnd: PartyRandomness,
    *,
    round_index: int = 1,
    abort_disabled: bool = False,
    forced_y: Optional[np.ndarray] = None,
) -> Transcript:
    """Run one session with channel inputs drawn from the server streams.

    ``forced_y`` is a test hook that injects a fixed channel realization
    (inputs are then derived as a consistent pair) to reach abort branches
    deterministically; it must not be used in measurement runs.
    """
    if forced_y is not None:
        y = np.asarray(forced_y, dtype=np.uint8)
        if y.size != params.n:
            raise ConfigurationError("forced realization must have length n")
        x1 = BitString.from_array((y >= 1).astype(np.uint8))
        x2 = BitString.from_array((y == 2).astype(np.uint8))
    else:
        x1 = sample_uniform(params.n, party_stream(rnd.server1_seed, (1, round_index)))
        x2 = sample_uniform(params.n, party_stream(rnd.server2_seed, (1, round_index)))
    return execute_session(
        params,
        files1,
        files2,
        sel,
        x1,
        x2,
        abort_disabled=abort_disabled,
        partitioner=client_partitioner(rnd.client_seed, round_index),
    )


def client_partitioner(client_seed: int, round_index: int = 1):
    """Share partitioner backed by the client's private stream, key (3, round)."""
    stream = party_stream(client_seed, (3, round_index))

    def partitioner(good, bad, alpha, ell1, ell2):
        return sample_partition(good, bad, alpha, ell1, ell2, stream)

    return partitioner


def run_session_adaptive(
    params: ProtocolParams, sel: Selection, rnd: PartyRandomness
) -> tuple[Transcript, ProtocolParams]:
    """Run one session with maximal file sizing.

    The file lengths are fixed only after the channel realization is known:
    the largest lengths the realized shares can carry.  Files are then
    sampled uniformly from the server streams.  Used for rate measurements;
    returns the transcript and the params actually executed.
    """
    params.validate()
    x1 = sample_uniform(params.n, party_stream(rnd.server1_seed, (1, 1)))
    x2 = sample_uniform(params.n, party_stream(rnd.server2_seed, (1, 1)))
    good, _bad = classify_indices(transmit(x1, x2).y)
    m = min(len(good), params.n - len(good))
    ell1 = _share_floor(params.alpha * m)
    ell2 = _share_floor((1.0 - params.alpha) * m)
    sized = ProtocolParams(
        n=params.n,
        t_exponent=params.t_exponent,
        alpha=params.alpha,
        ell1=ell1,
        ell2=ell2,
    )
    g1 = party_stream(rnd.server1_seed, (0,))
    g2 = party_stream(rnd.server2_seed, (0,))
    files1 = FileStore(1, (sample_uniform(ell1, g1), sample_uniform(ell1, g1)))
    files2 = FileStore(2, (sample_uniform(ell2, g2), sample_uniform(ell2, g2)))
    return (
        execute_session(
            sized,
            files1,
            files2,
            sel,
            x1,
            x2,
            partitioner=client_partitioner(rnd.client_seed),
        ),
        sized,
    )
