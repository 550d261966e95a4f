"""Constant-size light-client sync for committee blockchains.

Validators sign end-of-epoch edge messages with quotient-form signatures
that telescope under aggregation; a full node compresses any number of
epochs into one 96-byte signature per update, and a light client verifies
it with work proportional only to the number of quorum changes.
"""

from .chain import (
    BlockHeader,
    Chain,
    ChainConfig,
    EpochRecord,
    QuorumDescriptor,
    epoch_sign,
    generate_chain,
    longest_running_quorum,
    make_header,
    sign_header,
    validator_id,
)
from .fullnode import (
    BuildTrace,
    SignatureStore,
    UnknownEpochError,
    UpdateProof,
    build_proof,
    find_break_points,
    group_multiplication_count,
)
from .lightclient import (
    LightClientState,
    RejectReason,
    SvEpochData,
    SvRejected,
    UpdateRejected,
    initial_state,
    make_query,
    sv_sync,
    sv_verify,
    verify_update,
)
from .tms import (
    DeterministicRng,
    EdgeMessage,
    GroupSignature,
    ProofOfPossession,
    PublicKey,
    SecretKey,
    aggregate,
    aggregate_keys,
    keygen,
    prove_possession,
    sign_edge,
    sign_message,
    verify_message,
    verify_path,
    verify_possession,
)

__version__ = "0.1.0"
