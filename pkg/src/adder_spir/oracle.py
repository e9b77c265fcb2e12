"""Exhaustive-enumeration leakage auditing on tiny protocol instances.

Every random input of a session (channel inputs, files, chaining masks, and
the client's selection pair) is enumerated with its exact probability and
the deterministic protocol logic is replayed on each assignment, yielding
the exact joint distribution of everything any party ever sees.  Leakage is
then a plain mutual-information computation on that table; no sampling and
no estimation are involved, so a secure instance must audit to exact zeros
(up to float accumulation, well below 1e-10).

Also houses the one-time-pad lemma checker: an exhaustive catalog of small
dependent/independent variable constructions verifying that XOR with a
fresh uniform pad adds no information.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .bits import BitString
from .channel import classify_indices, transmit
from .infotheory import JointDistribution
from .model import (
    CapacityShortfall,
    ConfigurationError,
    FileStore,
    ProtocolParams,
    Selection,
)
from .multifile import execute_multifile
from .protocol import Transcript, abort_check, execute_session, partition_choices

__all__ = [
    "StateBudgetExceeded",
    "LeakageReport",
    "OtpLemmaReport",
    "enumerate_protocol",
    "audit",
    "otp_lemma_check",
    "DEFAULT_STATE_BUDGET",
]

DEFAULT_STATE_BUDGET = 2**28

# The public record is split into components so that each party's view can
# be assembled per the non-colluding-servers model: the selection sets and
# abort notice are broadcast, but each server's masked messages travel on
# its private link with the client and are not seen by the other server.
# (If the other server's messages were public, it could combine them with
# its own channel inputs — which pin down the peer's inputs up to the
# good/bad assignment of the published sets — and recover a nontrivial
# function of the peer's files; the oracle measures exactly 1 bit on the
# smallest instance.)
VARIABLES = (
    "z1",
    "z2",
    "files1",
    "files2",
    "masks1",
    "masks2",
    "x1",
    "x2",
    "y",
    "sets",
    "msgs1",
    "msgs2",
    "leak",
    "abort",
    "ok",
    "unsel",
    "u0",
)


class StateBudgetExceeded(Exception):
    def __init__(self, required: int, budget: int):
        super().__init__(
            f"enumeration needs {required} weighted assignments, budget is {budget}"
        )
        self.required = required
        self.budget = budget


@dataclass(frozen=True)
class LeakageReport:
    """All six audited quantities for one instance, in bits."""

    params: ProtocolParams
    mode: str
    conditioning: str
    client_privacy_s1: float
    client_privacy_s2: float
    server2_vs_server1: float
    server1_vs_server2: float
    servers_vs_client: float
    reliability_error: float
    state_count: int
    wall_time_s: float
    mutation: Optional[str] = None

    @property
    def leakages(self) -> dict[str, float]:
        return {
            "client_privacy_s1": self.client_privacy_s1,
            "client_privacy_s2": self.client_privacy_s2,
            "server2_vs_server1": self.server2_vs_server1,
            "server1_vs_server2": self.server1_vs_server2,
            "servers_vs_client": self.servers_vs_client,
        }

    def all_zero(self, tol: float = 1e-9) -> bool:
        return all(v <= tol for v in self.leakages.values()) and self.reliability_error == 0.0

    def to_record(self) -> dict:
        return {
            "record": "leakage-report",
            "n": self.params.n,
            "L1": self.params.L1,
            "L2": self.params.L2,
            "ell1": self.params.ell1,
            "ell2": self.params.ell2,
            "alpha": self.params.alpha,
            "t": self.params.t_exponent,
            "mode": self.mode,
            "conditioning": self.conditioning,
            "mutation": self.mutation,
            **{k: repr(v) for k, v in self.leakages.items()},
            "reliability_error": self.reliability_error,
            "state_count": self.state_count,
            "wall_time_s": self.wall_time_s,
        }


def _bitstrings(length: int, cache: dict[int, list[BitString]]) -> list[BitString]:
    if length not in cache:
        cache[length] = [BitString.from_int(v, length) for v in range(2**length)]
    return cache[length]


def _public_of(t: Transcript) -> tuple:
    """(sets, msgs1, msgs2, leak) components of one session's public record."""
    if t.aborted:
        return (True, t.abort_reason, None), None, None, t.leaked_selection
    s = t.selection_sets
    sets = (
        False,
        None,
        (s.s1_for_server1, s.s2_for_server1, s.s1_for_server2, s.s2_for_server2),
    )
    return sets, (t.m11, t.m12), (t.m21, t.m22), t.leaked_selection


def _estimate_two_file(params: ProtocolParams) -> int:
    bits = 2 * params.n + params.L1 * params.ell1 + params.L2 * params.ell2
    return (2**bits) * params.L1 * params.L2


def _estimate_multifile(params: ProtocolParams) -> int:
    L1, L2 = params.L1, params.L2
    K = (L1 - 1) * (L2 - 1)
    len1 = params.ell1 * (L2 - 1)
    len2 = params.ell2 * (L1 - 1)
    bits = (
        2 * params.n * K
        + L1 * len1
        + L2 * len2
        + (L1 - 2) * (L2 - 1) * params.ell1
        + (L2 - 2) * (L1 - 1) * params.ell2
    )
    return (2**bits) * L1 * L2


def enumerate_protocol(
    params: ProtocolParams,
    mode: str = "two_file",
    *,
    abort_disabled: bool = False,
    mutation: Optional[str] = None,
    exact: bool = False,
    state_budget: int = DEFAULT_STATE_BUDGET,
) -> JointDistribution:
    """Exact joint distribution of one protocol instance.

    Variables: selection pair, file tuples, mask tuples, per-server channel
    inputs, observed sums, the entire public communication, the abort flag,
    the recovery flag, and the tuple of unselected files.
    """
    params.validate()
    if mode == "two_file":
        required = _estimate_two_file(params)
        if required > state_budget:
            raise StateBudgetExceeded(required, state_budget)
        return _enumerate_two_file(params, abort_disabled, mutation, exact)
    if mode == "multifile":
        required = _estimate_multifile(params)
        if required > state_budget:
            raise StateBudgetExceeded(required, state_budget)
        return _enumerate_multifile(params, abort_disabled, mutation, exact)
    raise ConfigurationError(f"unknown enumeration mode {mode!r}")


def _round_choices(
    x1: BitString, x2: BitString, params: ProtocolParams, abort_disabled: bool
):
    """Abort verdict and the client's equally likely partitions for one block.

    Returns (y_bytes, abort_reason_or_None, choices_or_None).
    """
    y = transmit(x1, x2).y
    good, bad = classify_indices(y)
    if not abort_disabled and not abort_check(len(good), params.n, params.t_exponent):
        return y.tobytes(), "size-deviation", None
    try:
        choices = partition_choices(good, bad, params.alpha, params.ell1, params.ell2)
    except CapacityShortfall:
        return y.tobytes(), "capacity-shortfall", None
    return y.tobytes(), None, choices


def _part_key(part) -> tuple:
    return (part.g1, part.g2, part.b1, part.b2)


def _preset_partitioner(part):
    """Partitioner that replays one enumerated choice (None means shortfall)."""

    def partitioner(*_args):
        if part is None:
            raise CapacityShortfall("infeasible block replayed by the oracle")
        return part

    return partitioner


def _enumerate_two_file(params, abort_disabled, mutation, exact) -> JointDistribution:
    n, ell1, ell2 = params.n, params.ell1, params.ell2
    cache: dict[int, list[BitString]] = {}
    xs = _bitstrings(n, cache)
    fs1 = _bitstrings(ell1, cache)
    fs2 = _bitstrings(ell2, cache)
    total = _estimate_two_file(params)
    base = Fraction(1, total) if exact else 1.0 / total

    table: dict[tuple, float | Fraction] = {}
    for x1 in xs:
        for x2 in xs:
            y_bytes, reason, choices = _round_choices(x1, x2, params, abort_disabled)
            if choices is None:
                parts = [None]
                weight = base
            else:
                parts = choices
                weight = base / len(choices)
            for part in parts:
                for f11, f12 in itertools.product(fs1, repeat=2):
                    files1 = FileStore(1, (f11, f12))
                    for f21, f22 in itertools.product(fs2, repeat=2):
                        files2 = FileStore(2, (f21, f22))
                        for z1, z2 in itertools.product((1, 2), repeat=2):
                            t = execute_session(
                                params,
                                files1,
                                files2,
                                Selection(z1, z2),
                                x1,
                                x2,
                                abort_disabled=abort_disabled,
                                mutation=mutation,
                                partitioner=_preset_partitioner(part),
                            )
                            sets_v, msgs1_v, msgs2_v, leak_v = _public_of(t)
                            key = (
                                z1,
                                z2,
                                (f11, f12),
                                (f21, f22),
                                (),
                                (),
                                x1,
                                x2,
                                y_bytes,
                                sets_v,
                                msgs1_v,
                                msgs2_v,
                                leak_v,
                                t.aborted,
                                t.recovery_ok,
                                ((f11, f12)[2 - z1], (f21, f22)[2 - z2]),
                                None if part is None else _part_key(part),
                            )
                            table[key] = table.get(key, 0) + weight
    return JointDistribution(VARIABLES, table)


def _enumerate_multifile(params, abort_disabled, mutation, exact) -> JointDistribution:
    L1, L2 = params.L1, params.L2
    K = (L1 - 1) * (L2 - 1)
    p1, p2 = params.ell1, params.ell2
    len1, len2 = p1 * (L2 - 1), p2 * (L1 - 1)
    n_masks1 = (L1 - 2) * (L2 - 1)
    n_masks2 = (L2 - 2) * (L1 - 1)
    cache: dict[int, list[BitString]] = {}
    xs = _bitstrings(params.n, cache)
    total = _estimate_multifile(params)
    weight_base = Fraction(1, total) if exact else 1.0 / total

    def mask_groups(flat: tuple[BitString, ...], per_part: int, parts: int):
        return tuple(flat[i * per_part : (i + 1) * per_part] for i in range(parts))

    base_params = ProtocolParams(
        n=params.n, t_exponent=params.t_exponent, alpha=params.alpha, ell1=p1, ell2=p2
    )

    table: dict[tuple, float | Fraction] = {}
    for x_flat in itertools.product(xs, repeat=2 * K):
        x_rounds = [(x_flat[2 * k], x_flat[2 * k + 1]) for k in range(K)]
        # Per-round verdicts; the first aborting round truncates the session,
        # so the client draws partitions only for the rounds before it.
        verdicts = [
            _round_choices(x1, x2, base_params, abort_disabled) for x1, x2 in x_rounds
        ]
        first_abort = next(
            (k for k, (_y, reason, _c) in enumerate(verdicts) if reason is not None), K
        )
        live = verdicts[:first_abort]
        combos = itertools.product(*(choices for (_y, _r, choices) in live))
        n_combos = 1
        for _y, _r, choices in live:
            n_combos *= len(choices)
        weight = weight_base / n_combos
        for parts_combo in combos:
            partitioners = [_preset_partitioner(p) for p in parts_combo] + [
                _preset_partitioner(None)
            ] * (K - first_abort)
            u0 = tuple(_part_key(p) for p in parts_combo)
            for files1_t in itertools.product(_bitstrings(len1, cache), repeat=L1):
                files1 = FileStore(1, files1_t)
                for files2_t in itertools.product(_bitstrings(len2, cache), repeat=L2):
                    files2 = FileStore(2, files2_t)
                    for masks1_t in itertools.product(
                        _bitstrings(p1, cache), repeat=n_masks1
                    ):
                        masks1 = mask_groups(masks1_t, L1 - 2, L2 - 1)
                        for masks2_t in itertools.product(
                            _bitstrings(p2, cache), repeat=n_masks2
                        ):
                            masks2 = mask_groups(masks2_t, L2 - 2, L1 - 1)
                            for z1 in range(1, L1 + 1):
                                for z2 in range(1, L2 + 1):
                                    mt = execute_multifile(
                                        params,
                                        files1,
                                        files2,
                                        Selection(z1, z2),
                                        x_rounds,
                                        masks1,
                                        masks2,
                                        abort_disabled=abort_disabled,
                                        mutation=mutation,
                                        partitioners=partitioners,
                                    )
                                    executed = mt.transcripts
                                    pub = [_public_of(t) for t in executed]
                                    key = (
                                        z1,
                                        z2,
                                        files1_t,
                                        files2_t,
                                        masks1_t,
                                        masks2_t,
                                        tuple(
                                            x_rounds[i][0] for i in range(len(executed))
                                        ),
                                        tuple(
                                            x_rounds[i][1] for i in range(len(executed))
                                        ),
                                        tuple(t.y.tobytes() for t in executed),
                                        tuple(p[0] for p in pub),
                                        tuple(p[1] for p in pub),
                                        tuple(p[2] for p in pub),
                                        tuple(p[3] for p in pub),
                                        mt.aborted,
                                        None
                                        if mt.aborted
                                        else (
                                            mt.recovered[0] == files1.file(z1)
                                            and mt.recovered[1] == files2.file(z2)
                                        ),
                                        (
                                            tuple(
                                                f
                                                for l, f in enumerate(files1_t, 1)
                                                if l != z1
                                            ),
                                            tuple(
                                                f
                                                for l, f in enumerate(files2_t, 1)
                                                if l != z2
                                            ),
                                        ),
                                        u0,
                                    )
                                    table[key] = table.get(key, 0) + weight
    return JointDistribution(VARIABLES, table)


SERVER1_VIEW = ("files1", "masks1", "x1", "sets", "msgs1", "leak")
SERVER2_VIEW = ("files2", "masks2", "x2", "sets", "msgs2", "leak")
CLIENT_VIEW = ("z1", "z2", "y", "u0", "sets", "msgs1", "msgs2", "leak")


def audit(
    params: ProtocolParams,
    mode: str = "two_file",
    *,
    abort_disabled: bool = False,
    condition_nonabort: bool = False,
    mutation: Optional[str] = None,
    exact: bool = False,
    state_budget: int = DEFAULT_STATE_BUDGET,
) -> LeakageReport:
    """Compute all six audited quantities on the exact distribution."""
    start = time.perf_counter()
    dist = enumerate_protocol(
        params,
        mode,
        abort_disabled=abort_disabled,
        mutation=mutation,
        exact=exact,
        state_budget=state_budget,
    )
    state_count = len(dist)
    work = dist.to_float()

    nonabort_mass = math.fsum(
        p for k, p in work.table.items() if not k[VARIABLES.index("abort")]
    )
    fail_mass = math.fsum(
        p for k, p in work.table.items() if k[VARIABLES.index("ok")] is False
    )
    reliability_error = fail_mass / nonabort_mass if nonabort_mass > 0 else 0.0

    if condition_nonabort:
        work = work.condition("abort", False)
        conditioning = "non-abort"
    else:
        conditioning = "unconditioned"

    report = LeakageReport(
        params=params,
        mode=mode,
        conditioning=conditioning,
        client_privacy_s1=work.mutual_information(SERVER1_VIEW, ("z1", "z2")),
        client_privacy_s2=work.mutual_information(SERVER2_VIEW, ("z1", "z2")),
        server2_vs_server1=work.mutual_information(SERVER1_VIEW, ("files2",)),
        server1_vs_server2=work.mutual_information(SERVER2_VIEW, ("files1",)),
        servers_vs_client=work.mutual_information(CLIENT_VIEW, ("unsel",)),
        reliability_error=reliability_error,
        state_count=state_count,
        wall_time_s=time.perf_counter() - start,
        mutation=mutation,
    )
    return report


# ---------------------------------------------------------------------------
# One-time-pad lemma checking


@dataclass(frozen=True)
class OtpLemmaReport:
    pad_width: int
    entries: int
    max_masking_slack: float
    max_hiding_slack: float

    def passed(self, tol: float = 1e-12) -> bool:
        return self.max_masking_slack <= tol and self.max_hiding_slack <= tol

    def to_record(self) -> dict:
        return {
            "record": "otp-lemma-report",
            "pad_width": self.pad_width,
            "entries": self.entries,
            "max_masking_slack": self.max_masking_slack,
            "max_hiding_slack": self.max_hiding_slack,
        }


def _mi_pairs(atoms: list[tuple]) -> float:
    """I(A; B) from equally weighted (a, b) atoms."""
    w = 1.0 / len(atoms)
    joint: dict[tuple, float] = {}
    pa: dict = {}
    pb: dict = {}
    for a, b in atoms:
        joint[(a, b)] = joint.get((a, b), 0.0) + w
        pa[a] = pa.get(a, 0.0) + w
        pb[b] = pb.get(b, 0.0) + w
    return math.fsum(
        p * math.log2(p / (pa[a] * pb[b])) for (a, b), p in joint.items()
    )


def otp_lemma_check(pad_width: int = 1) -> OtpLemmaReport:
    """Exhaustively verify that a fresh uniform XOR pad adds no information.

    Catalog: a uniform 2-bit seed R, with A and B ranging over all binary
    functions of R and C over all ``pad_width``-bit functions of R; D is a
    fresh uniform pad of the same width.  Checks, by exact computation:

    * masking:  I(A; B, C xor D) equals I(A; B), and
    * hiding:   I(A, C xor D; C) equals 0 whenever I(A; C) = 0.
    """
    if not 1 <= pad_width <= 3:
        raise ValueError("pad_width must be in [1, 3]")
    seeds = range(4)
    bin_funcs = list(itertools.product((0, 1), repeat=4))
    pad_vals = range(2**pad_width)
    pad_funcs = list(itertools.product(pad_vals, repeat=4))

    entries = 0
    max_masking = 0.0
    max_hiding = 0.0
    for f in bin_funcs:
        for h in pad_funcs:
            i_ac = _mi_pairs([(f[r], h[r]) for r in seeds])
            independent_ac = abs(i_ac) <= 1e-12
            if independent_ac:
                slack = abs(
                    _mi_pairs([((f[r], h[r] ^ d), h[r]) for r in seeds for d in pad_vals])
                )
                max_hiding = max(max_hiding, slack)
            for g in bin_funcs:
                entries += 1
                i_ab = _mi_pairs([(f[r], g[r]) for r in seeds])
                i_a_bcd = _mi_pairs(
                    [(f[r], (g[r], h[r] ^ d)) for r in seeds for d in pad_vals]
                )
                max_masking = max(max_masking, abs(i_a_bcd - i_ab))
    return OtpLemmaReport(pad_width, entries, max_masking, max_hiding)
