"""Reduction of many-file retrieval to repeated two-file sessions.

Each server links its files (or file parts) into a chain of value pairs
through fresh one-time-pad masks; each chain pair is served through one
two-file session, and the client's per-round branch choices telescope under
XOR to exactly the requested file.

With L1 files at server 1 and L2 at server 2, server 1 splits every file
into L2 - 1 equal parts and server 2 into L1 - 1 parts, giving
K = (L1 - 1) * (L2 - 1) rounds.  The canonical round ordering pairs server
1's (chain position t, part i) with server 2's (chain position t', part j)
as

    server 1: k = (i - 1) * (L1 - 1) + t      (part-major)
    server 2: k = (t' - 1) * (L1 - 1) + j     (chain-major)

so that each round consumes one pair from each server.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .bits import BitString, sample_uniform
from .model import (
    ConfigurationError,
    FileStore,
    PartyRandomness,
    ProtocolParams,
    Selection,
    party_stream,
)
from .protocol import Transcript, client_partitioner, execute_session

__all__ = [
    "ChainedPairs",
    "FileSplit",
    "MultifileTranscript",
    "build_chain",
    "round_selection",
    "flatten_rounds",
    "reconstruct",
    "run_multifile",
    "execute_multifile",
    "chain_symbols",
    "request_schedule",
]

Symbol = tuple[str, int, int]  # ("file" | "mask", chain index, part index)
SymbolSet = frozenset[Symbol]


@dataclass(frozen=True)
class ChainedPairs:
    """The per-round value pairs one server derives from one part index."""

    server_id: int
    pairs: tuple[tuple[BitString, BitString], ...]


@dataclass(frozen=True)
class FileSplit:
    """A file cut into equal-length parts whose concatenation restores it."""

    original_length: int
    parts: tuple[BitString, ...]

    @property
    def part_count(self) -> int:
        return len(self.parts)


@dataclass(frozen=True)
class MultifileTranscript:
    """Ordered base-session transcripts plus the reduction header."""

    L1: int
    L2: int
    part_length1: int
    part_length2: int
    pairing: tuple[tuple[tuple[int, int], tuple[int, int]], ...]
    round_selections: tuple[tuple[int, int], ...]
    transcripts: tuple[Transcript, ...]
    aborted: bool
    recovered: Optional[tuple[BitString, BitString]] = None

    @property
    def round_count(self) -> int:
        return len(self.pairing)

    def public_bits_from_server(self, server_id: int) -> int:
        return sum(t.public_bits_from_server(server_id) for t in self.transcripts)

    def to_record(self) -> dict:
        return {
            "record": "multifile-transcript",
            "L1": self.L1,
            "L2": self.L2,
            "part_length1": self.part_length1,
            "part_length2": self.part_length2,
            "pairing": [list(map(list, pair)) for pair in self.pairing],
            "round_selections": [list(p) for p in self.round_selections],
            "aborted": self.aborted,
            "rounds": [t.to_record() for t in self.transcripts],
            "recovered": None
            if self.recovered is None
            else [self.recovered[0].to_hex(), self.recovered[1].to_hex()],
        }


def build_chain(entries: Sequence[BitString], masks: Sequence[BitString]) -> tuple[tuple[BitString, BitString], ...]:
    """Link L values through L - 2 masks into L - 1 one-time-padded pairs.

    Pair 1 is (value 1, mask 1); middle pair t is (value t padded with mask
    t-1, mask t-1 padded with mask t); the last pair pads the final two
    values with the last mask.  For L = 2 the single pair is the raw values.
    """
    L = len(entries)
    if L < 2:
        raise ValueError("a chain needs at least two values")
    if len(masks) != L - 2:
        raise ValueError(f"expected {L - 2} masks for {L} values, got {len(masks)}")
    lengths = {len(v) for v in entries} | {len(s) for s in masks}
    if len(lengths) != 1:
        raise ValueError("all chain values and masks must have equal length")
    if L == 2:
        return ((entries[0], entries[1]),)
    pairs = [(entries[0], masks[0])]
    for t in range(2, L - 1):
        pairs.append((entries[t - 1] ^ masks[t - 2], masks[t - 2] ^ masks[t - 1]))
    pairs.append((entries[L - 2] ^ masks[L - 3], masks[L - 3] ^ entries[L - 1]))
    return tuple(pairs)


def round_selection(Z: int, L: int) -> tuple[int, ...]:
    """Per-round branch choices: branch 2 strictly before the target, else 1."""
    if not 1 <= Z <= L:
        raise ValueError(f"selection {Z} outside [1, {L}]")
    return tuple(2 if t < Z else 1 for t in range(1, L))


def flatten_rounds(L1: int, L2: int) -> tuple[tuple[tuple[int, int], tuple[int, int]], ...]:
    """Canonical pairing of server-1 (t, i) with server-2 (t', j) per round."""
    if L1 < 2 or L2 < 2:
        raise ValueError("need at least two files per server")
    pairing = []
    for k in range(1, (L1 - 1) * (L2 - 1) + 1):
        t1 = (k - 1) % (L1 - 1) + 1
        i = (k - 1) // (L1 - 1) + 1
        t2 = (k - 1) // (L1 - 1) + 1
        j = (k - 1) % (L1 - 1) + 1
        pairing.append(((t1, i), (t2, j)))
    return tuple(pairing)


def reconstruct(Z: int, L: int, chosen: Sequence[BitString]) -> BitString:
    """XOR the per-round recovered values down to the requested one.

    ``chosen[t-1]`` is the branch value recovered in chain round t: branch 2
    before the target position, branch 1 at and after it.  The pads
    telescope away, leaving value Z.
    """
    if len(chosen) != L - 1:
        raise ValueError(f"expected {L - 1} recovered values, got {len(chosen)}")
    if Z < L:
        acc = chosen[Z - 1]
        for t in range(Z - 1):
            acc = acc ^ chosen[t]
    else:
        acc = chosen[0]
        for t in range(1, L - 1):
            acc = acc ^ chosen[t]
    return acc


def _split_stores(files1: FileStore, files2: FileStore, L1: int, L2: int) -> tuple[list[FileSplit], list[FileSplit], int, int]:
    if files1.file_count != L1 or files2.file_count != L2:
        raise ConfigurationError("file store sizes must match (L1, L2)")
    if files1.file_length % (L2 - 1):
        raise ConfigurationError(
            f"server-1 file length {files1.file_length} not divisible by {L2 - 1}"
        )
    if files2.file_length % (L1 - 1):
        raise ConfigurationError(
            f"server-2 file length {files2.file_length} not divisible by {L1 - 1}"
        )
    splits1 = [FileSplit(files1.file_length, tuple(f.split(L2 - 1))) for f in files1.files]
    splits2 = [FileSplit(files2.file_length, tuple(f.split(L1 - 1))) for f in files2.files]
    return splits1, splits2, files1.file_length // (L2 - 1), files2.file_length // (L1 - 1)


def sample_masks(L_own: int, n_parts: int, length: int, seed: int) -> tuple[tuple[BitString, ...], ...]:
    """Fresh chaining masks, one tuple of L_own - 2 masks per part index.

    Sampling order is part-index outer, chain-index inner, from the
    server's mask stream; masks are never reused across parts.
    """
    stream = party_stream(seed, (2,))
    return tuple(
        tuple(sample_uniform(length, stream) for _t in range(L_own - 2))
        for _i in range(n_parts)
    )


def execute_multifile(
    params: ProtocolParams,
    files1: FileStore,
    files2: FileStore,
    sel: Selection,
    x_rounds: Sequence[tuple[BitString, BitString]],
    masks1: Sequence[Sequence[BitString]],
    masks2: Sequence[Sequence[BitString]],
    *,
    abort_disabled: bool = False,
    mutation: Optional[str] = None,
    partitioners: Optional[Sequence] = None,
) -> MultifileTranscript:
    """Run the reduction with explicit channel inputs and masks.

    Any single round abort aborts the whole session (no retry here; retries
    are a harness-level loop with fresh seeds).  ``partitioners`` supplies
    one share partitioner per round; honest drivers pass randomized ones.
    """
    params.validate()
    L1, L2 = params.L1, params.L2
    sel.validate(L1, L2)
    splits1, splits2, p1, p2 = _split_stores(files1, files2, L1, L2)
    if p1 != params.ell1 or p2 != params.ell2:
        raise ConfigurationError(
            f"per-round lengths ({p1}, {p2}) disagree with params ({params.ell1}, {params.ell2})"
        )

    chains1 = [
        build_chain([splits1[l].parts[i] for l in range(L1)], masks1[i])
        for i in range(L2 - 1)
    ]
    chains2 = [
        build_chain([splits2[l].parts[j] for l in range(L2)], masks2[j])
        for j in range(L1 - 1)
    ]
    z1_rounds = round_selection(sel.z1, L1)
    z2_rounds = round_selection(sel.z2, L2)
    pairing = flatten_rounds(L1, L2)
    if len(x_rounds) != len(pairing):
        raise ConfigurationError(f"expected channel inputs for {len(pairing)} rounds")

    base_params = ProtocolParams(
        n=params.n, t_exponent=params.t_exponent, alpha=params.alpha, ell1=p1, ell2=p2
    )
    transcripts: list[Transcript] = []
    selections: list[tuple[int, int]] = []
    chosen1: dict[tuple[int, int], BitString] = {}
    chosen2: dict[tuple[int, int], BitString] = {}
    for k, ((t1, i), (t2, j)) in enumerate(pairing, start=1):
        pair1 = chains1[i - 1][t1 - 1]
        pair2 = chains2[j - 1][t2 - 1]
        round_sel = Selection(z1_rounds[t1 - 1], z2_rounds[t2 - 1])
        selections.append((round_sel.z1, round_sel.z2))
        x1, x2 = x_rounds[k - 1]
        session_kwargs = {"abort_disabled": abort_disabled, "mutation": mutation}
        if partitioners is not None:
            session_kwargs["partitioner"] = partitioners[k - 1]
        transcript = execute_session(
            base_params,
            FileStore(1, pair1),
            FileStore(2, pair2),
            round_sel,
            x1,
            x2,
            **session_kwargs,
        )
        transcripts.append(transcript)
        if transcript.aborted:
            return MultifileTranscript(
                L1, L2, p1, p2, pairing, tuple(selections), tuple(transcripts), aborted=True
            )
        chosen1[(t1, i)] = transcript.recovered[0]
        chosen2[(t2, j)] = transcript.recovered[1]

    parts1 = [
        reconstruct(sel.z1, L1, [chosen1[(t, i)] for t in range(1, L1)])
        for i in range(1, L2)
    ]
    parts2 = [
        reconstruct(sel.z2, L2, [chosen2[(t, j)] for t in range(1, L2)])
        for j in range(1, L1)
    ]
    recovered = (BitString.join(parts1), BitString.join(parts2))
    return MultifileTranscript(
        L1,
        L2,
        p1,
        p2,
        pairing,
        tuple(selections),
        tuple(transcripts),
        aborted=False,
        recovered=recovered,
    )


def run_multifile(
    params: ProtocolParams,
    files1: FileStore,
    files2: FileStore,
    sel: Selection,
    rnd: PartyRandomness,
    *,
    abort_disabled: bool = False,
) -> MultifileTranscript:
    """Run the reduction with masks and per-round channel inputs from party streams.

    Each round uses a fresh channel block of n uses with fresh uniform
    inputs (sub-stream keyed by the round index).
    """
    params.validate()
    L1, L2 = params.L1, params.L2
    _s1, _s2, p1, p2 = _split_stores(files1, files2, L1, L2)
    K = (L1 - 1) * (L2 - 1)
    masks1 = sample_masks(L1, L2 - 1, p1, rnd.server1_seed)
    masks2 = sample_masks(L2, L1 - 1, p2, rnd.server2_seed)
    x_rounds = [
        (
            sample_uniform(params.n, party_stream(rnd.server1_seed, (1, k))),
            sample_uniform(params.n, party_stream(rnd.server2_seed, (1, k))),
        )
        for k in range(1, K + 1)
    ]
    return execute_multifile(
        params,
        files1,
        files2,
        sel,
        x_rounds,
        masks1,
        masks2,
        abort_disabled=abort_disabled,
        partitioners=[client_partitioner(rnd.client_seed, k) for k in range(1, K + 1)],
    )


def chain_symbols(L: int, part: int) -> tuple[tuple[SymbolSet, SymbolSet], ...]:
    """Symbolic chain contents for one part index, as XOR-sets of atoms.

    Atoms are ("file", l, part) and ("mask", t, part); each branch value is
    the XOR (symmetric difference) of its atoms.  Used to audit request
    schedules without inspecting bit contents.
    """
    def f(l: int) -> SymbolSet:
        return frozenset({("file", l, part)})

    def s(t: int) -> SymbolSet:
        return frozenset({("mask", t, part)})

    if L == 2:
        return ((f(1), f(2)),)
    pairs = [(f(1), s(1))]
    for t in range(2, L - 1):
        pairs.append((f(t) ^ s(t - 1), s(t - 1) ^ s(t)))
    pairs.append((f(L - 1) ^ s(L - 2), s(L - 2) ^ f(L)))
    return tuple(pairs)


def request_schedule(L1: int, L2: int, z1: int, z2: int) -> tuple[tuple[SymbolSet, SymbolSet], ...]:
    """Per round, the symbolic value the client requests from each server."""
    z1_rounds = round_selection(z1, L1)
    z2_rounds = round_selection(z2, L2)
    schedule = []
    for (t1, i), (t2, j) in flatten_rounds(L1, L2):
        pair1 = chain_symbols(L1, i)[t1 - 1]
        pair2 = chain_symbols(L2, j)[t2 - 1]
        schedule.append((pair1[z1_rounds[t1 - 1] - 1], pair2[z2_rounds[t2 - 1] - 1]))
    return tuple(schedule)
