"""Dual-source symmetric private retrieval over a noiseless binary adder channel.

Two servers with independent file libraries answer a client over a shared
adder channel; ambiguity in the channel sum replaces shared randomness and
data replication.  The package simulates the protocol end to end, audits
its information leakage exactly on tiny instances, and numerically verifies
the rate-region characterization.
"""

from .bits import BitString, sample_uniform
from .capacity import (
    MonotoneCertificate,
    RateReport,
    achieved_rates,
    brute_conditional_entropy,
    conditional_entropy_f,
    diagonal_slice,
    f_gradient,
    maximize_f,
    region_check,
    verify_g_monotone,
)
from .channel import ChannelRound, classify_indices, transmit
from .infotheory import JointDistribution
from .model import (
    CapacityShortfall,
    ConfigurationError,
    FileStore,
    PartyRandomness,
    ProtocolParams,
    Selection,
    party_stream,
    sample_filestore,
    trial_seeds,
)
from .multifile import (
    MultifileTranscript,
    build_chain,
    execute_multifile,
    flatten_rounds,
    reconstruct,
    request_schedule,
    round_selection,
    run_multifile,
)
from .oracle import (
    LeakageReport,
    OtpLemmaReport,
    StateBudgetExceeded,
    audit,
    enumerate_protocol,
    otp_lemma_check,
)
from .protocol import (
    MUTATIONS,
    IndexPartition,
    SelectionSets,
    Transcript,
    abort_check,
    build_selection_sets,
    client_recover,
    execute_session,
    partition,
    run_session,
    run_session_adaptive,
    server_mask,
)

__version__ = "0.1.0"

__all__ = [
    "BitString",
    "sample_uniform",
    "ChannelRound",
    "classify_indices",
    "transmit",
    "JointDistribution",
    "CapacityShortfall",
    "ConfigurationError",
    "FileStore",
    "PartyRandomness",
    "ProtocolParams",
    "Selection",
    "party_stream",
    "sample_filestore",
    "trial_seeds",
    "IndexPartition",
    "SelectionSets",
    "Transcript",
    "MUTATIONS",
    "abort_check",
    "partition",
    "build_selection_sets",
    "server_mask",
    "client_recover",
    "execute_session",
    "run_session",
    "run_session_adaptive",
    "MultifileTranscript",
    "build_chain",
    "round_selection",
    "flatten_rounds",
    "reconstruct",
    "request_schedule",
    "execute_multifile",
    "run_multifile",
    "LeakageReport",
    "OtpLemmaReport",
    "StateBudgetExceeded",
    "audit",
    "enumerate_protocol",
    "otp_lemma_check",
    "MonotoneCertificate",
    "RateReport",
    "achieved_rates",
    "brute_conditional_entropy",
    "conditional_entropy_f",
    "diagonal_slice",
    "f_gradient",
    "maximize_f",
    "region_check",
    "verify_g_monotone",
    "__version__",
]
