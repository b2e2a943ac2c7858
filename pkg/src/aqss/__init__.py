"""Assisted quantum secret sharing and two-group key distribution."""

__version__ = "0.1.0"

from .access import (  # noqa: E402
    DEALER,
    AccessStructure,
    ASGraph,
    build_as_graph,
    check_no_cloning,
    is_maximal,
    maximalize,
    parse_access_structure,
)
from .cliques import CliquePartition, min_clique_partition  # noqa: E402
from .codes import LinearCode, hamming74  # noqa: E402
from .engine import (  # noqa: E402
    EncryptedAllocation,
    LeakageReport,
    ShareAllocation,
    certify_leakage,
    encrypted_reconstruct,
    encrypted_share,
    leakage_report,
    quantum_reconstruct,
    quantum_share,
)
from .errors import (  # noqa: E402
    AQSSError,
    AuthorizedError,
    CapacityError,
    ParseError,
    StructureError,
    UnauthorizedError,
)
from .plan import (  # noqa: E402
    HomeShareReport,
    Leaf,
    SharePlan,
    Threshold,
    build_aqss_plan,
    evaluate_coalition,
    home_share_analytics,
)
from .qkd import (  # noqa: E402
    ProtocolConfig,
    ProtocolTranscript,
    channel_capacity,
    effective_error_probability,
    run_protocol,
)
from .quantum import (  # noqa: E402
    DensityView,
    PauliKey,
    QuditRegister,
    distance,
    measure,
    prepare,
    qotp_decrypt,
    qotp_encrypt,
    reduced_density,
)
from .rng import stream  # noqa: E402
from .schemes import (  # noqa: E402
    QtsParams,
    classical_monotone_reconstruct,
    classical_monotone_share,
    gf_interpolate,
    qts_encode,
    qts_reconstruct,
    shamir_reconstruct,
    shamir_split,
)
