"""Message-level simulation of the cooperation and feedback protocol.

The protocol runs four rounds per realization:

1. users of each cell broadcast their cross-cell channel matrix to their
   in-cell peers over the cooperation link;
2. every user locally solves the alignment for the BS interfering with its
   cell and keeps its own combiner (the deterministic null-space convention
   guarantees every user of a cell lands on the same solution);
3. every user feeds its effective serving row back to its own BS, and the
   designated first user of each cell additionally feeds the aligned
   cross-cell direction back to the *interfering* BS;
4. each BS computes its precoders from what it received, and nothing else.

Every read of CSI at a node goes through that node's :class:`KnowledgeSet`,
which raises if the item was never observed or received. That makes the
locality audit structural: a computation cannot silently use global CSI.

Cooperation and feedback links are modeled as error-free, zero-latency
message delivery; only message contents and scalar counts matter here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .align import (
    BeamformerSet,
    align_cross_channels,
    check_feasibility,
    dominant_left_singular_vector,
    effective_row,
    precoders_from_rows,
    single_user_cross_direction,
)
from .errors import InfeasibleConfigError, InvalidInputError, LocalityViolationError
from .linalg import DEFAULT_TOL, ToleranceConfig
from .scenario import ChannelSet, ScenarioConfig, other_cell

__all__ = [
    "Message",
    "FeedbackReport",
    "KnowledgeSet",
    "simulate_exchange",
    "format_trace",
    "tally_feedback",
    "feedback_count",
    "user_node",
    "bs_node",
]

_PROVENANCES = ("observed", "cooperation", "feedback")

PAYLOAD_CHANNEL = "interfering_channel"
PAYLOAD_SERVING_ROW = "serving_effective_row"
PAYLOAD_ICI_DIRECTION = "ici_direction"

_FEEDBACK_SCHEMES = ("proposed", "czf", "subspace_proxy")


@dataclass(frozen=True)
class Message:
    """One delivered message: round, endpoints, payload kind, and its size in complex scalars."""

    round: int
    sender: str
    receiver: str
    payload_kind: str
    complex_scalar_count: int


@dataclass(frozen=True)
class FeedbackReport:
    """Complex scalars fed back over the cellular uplink, by destination cell role."""

    scheme: str
    serving_complex_count: int
    interfering_complex_count: int
    total_complex_count: int

    def __post_init__(self) -> None:
        if self.total_complex_count != self.serving_complex_count + self.interfering_complex_count:
            raise InvalidInputError("total feedback count must equal serving + interfering")


def user_node(k: int, i: int) -> str:
    """Node id of user k of cell i (1-based in the label for readability)."""
    return f"user_{k + 1}_{i + 1}"


def bs_node(i: int) -> str:
    """Node id of the BS of cell i."""
    return f"bs_{i + 1}"


class KnowledgeSet:
    """CSI items one node holds, each tagged with how it got there.

    Keys are tuples such as ``("H", bs, k, i)`` for a full channel matrix,
    ``("eff_row", bs, k, i)`` for an effective row after combining, or
    ``("ici_dir", bs)`` for an aligned cross-cell direction. Reading an
    absent key raises :class:`LocalityViolationError`.
    """

    def __init__(self, owner: str):
        self.owner = owner
        self._items: dict[tuple, tuple[np.ndarray, str]] = {}

    def learn(self, key: tuple, value: np.ndarray, provenance: str) -> None:
        if provenance not in _PROVENANCES:
            raise InvalidInputError(f"provenance must be one of {_PROVENANCES}, got {provenance!r}")
        self._items[key] = (value, provenance)

    def get(self, key: tuple) -> np.ndarray:
        try:
            return self._items[key][0]
        except KeyError:
            raise LocalityViolationError(f"node {self.owner} holds no CSI item {key!r}") from None

    def provenance(self, key: tuple) -> str:
        if key not in self._items:
            raise LocalityViolationError(f"node {self.owner} holds no CSI item {key!r}")
        return self._items[key][1]

    def __contains__(self, key: tuple) -> bool:
        return key in self._items

    def __len__(self) -> int:
        return len(self._items)

    def keys(self):
        return self._items.keys()


def simulate_exchange(
    channels: ChannelSet, cfg: ScenarioConfig, tol: ToleranceConfig = DEFAULT_TOL
) -> tuple[BeamformerSet, list[Message]]:
    """Run the four-round protocol and return the beamformers plus the message log.

    The resulting beamformers match :func:`~twocell_ia.align.run_proposed_scheme`
    (both paths call the same deterministic kernels on the same floats), so
    the distributed design loses nothing relative to the centralized one.
    """
    M, N, K = channels.M, channels.N, channels.K
    if (M, N, K) != (cfg.M, cfg.N, cfg.K):
        raise InvalidInputError(
            f"channel dimensions {(M, N, K)} do not match config {(cfg.M, cfg.N, cfg.K)}"
        )
    feasibility = check_feasibility(M, N, K)
    if not feasibility:
        raise InfeasibleConfigError(f"(M, N, K) = {(M, N, K)} infeasible: {feasibility.reason}")

    users = {(k, i): KnowledgeSet(user_node(k, i)) for i in (0, 1) for k in range(K)}
    stations = {i: KnowledgeSet(bs_node(i)) for i in (0, 1)}
    for i in (0, 1):
        for k in range(K):
            for bs in (0, 1):
                users[(k, i)].learn(("H", bs, k, i), channels.bs_to_user(bs, i, k), "observed")

    log: list[Message] = []

    # Round 1: in-cell cooperation. Each user broadcasts the channel from the
    # interfering BS to its K-1 peers (nothing to share when K = 1).
    for i in (0, 1):
        interferer = other_cell(i)
        for k in range(K):
            payload = users[(k, i)].get(("H", interferer, k, i))
            for peer in range(K):
                if peer == k:
                    continue
                users[(peer, i)].learn(("H", interferer, k, i), payload, "cooperation")
                log.append(Message(1, user_node(k, i), user_node(peer, i), PAYLOAD_CHANNEL, N * M))

    # Round 2: local combiner design at every user. All users of a cell solve
    # the same system and agree on the same solution; each keeps its own row.
    combiners = np.zeros((2, K, N), dtype=np.complex128)
    ici_at_user: dict[tuple[int, int], np.ndarray] = {}
    for i in (0, 1):
        interferer = other_cell(i)
        for k in range(K):
            node = users[(k, i)]
            if K == 1:
                comb = dominant_left_singular_vector(node.get(("H", i, k, i)))
                direction = single_user_cross_direction(node.get(("H", interferer, k, i)), comb)
            else:
                cross = np.stack([node.get(("H", interferer, peer, i)) for peer in range(K)])
                direction, cell_combiners = align_cross_channels(cross, tol)
                comb = cell_combiners[k]
            combiners[i, k] = comb
            ici_at_user[(k, i)] = direction

    # Round 3: uplink feedback. Serving rows go to the serving BS; the
    # designated user (k = 0) of each cell sends the aligned direction of the
    # interfering BS's signal straight to that BS.
    for i in (0, 1):
        for k in range(K):
            row = effective_row(combiners[i, k], users[(k, i)].get(("H", i, k, i)))
            stations[i].learn(("eff_row", i, k, i), row, "feedback")
            log.append(Message(3, user_node(k, i), bs_node(i), PAYLOAD_SERVING_ROW, M))
    for i in (0, 1):
        interferer = other_cell(i)
        stations[interferer].learn(("ici_dir", interferer), ici_at_user[(0, i)], "feedback")
        log.append(Message(3, user_node(0, i), bs_node(interferer), PAYLOAD_ICI_DIRECTION, M))

    # Round 4: each BS designs its precoders from its own knowledge only.
    precoders = np.zeros((2, K, M), dtype=np.complex128)
    for i in (0, 1):
        rows = np.vstack([stations[i].get(("eff_row", i, k, i)) for k in range(K)])
        blocked = stations[i].get(("ici_dir", i))
        precoders[i] = precoders_from_rows(rows, blocked, tol)

    stream_power = np.full((2, K), cfg.power_P / K)
    return BeamformerSet(v=precoders, w=combiners, stream_power=stream_power), log


def format_trace(messages: list[Message]) -> str:
    """Line-oriented text trace: ``round,sender,receiver,payload_kind,complex_scalar_count``."""
    lines = [
        f"{m.round},{m.sender},{m.receiver},{m.payload_kind},{m.complex_scalar_count}"
        for m in messages
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def tally_feedback(messages: list[Message]) -> FeedbackReport:
    """Count the uplink-feedback scalars actually present in a message log."""
    serving = sum(m.complex_scalar_count for m in messages if m.payload_kind == PAYLOAD_SERVING_ROW)
    interfering = sum(
        m.complex_scalar_count for m in messages if m.payload_kind == PAYLOAD_ICI_DIRECTION
    )
    return FeedbackReport(
        scheme="proposed",
        serving_complex_count=serving,
        interfering_complex_count=interfering,
        total_complex_count=serving + interfering,
    )


def feedback_count(scheme: str, M: int, N: int, K: int) -> FeedbackReport:
    """Closed-form uplink feedback accounting on the (K+1, K, K) configuration.

    Coordinated ZF needs the full serving and interfering channel matrices of
    every user (2(K+1)K^2 complex scalars each way). The subspace-IA scheme
    feeds back 2K^2 scalars for the serving cell only. The cooperative
    alignment scheme feeds back one effective M-row per user plus one aligned
    direction per cell: 2K(K+1) + 2(K+1) scalars.
    """
    for name, value in (("M", M), ("N", N), ("K", K)):
        if not isinstance(value, (int, np.integer)) or value < 1:
            raise InvalidInputError(f"{name} must be a positive integer, got {value!r}")
    if M != K + 1 or N != K:
        raise InvalidInputError(
            f"feedback accounting is defined for (K+1, K, K) configurations, got {(M, N, K)}"
        )
    if scheme == "czf":
        serving = 2 * (K + 1) * K * K
        interfering = 2 * (K + 1) * K * K
    elif scheme == "subspace_proxy":
        serving = 2 * K * K
        interfering = 0
    elif scheme == "proposed":
        serving = 2 * K * (K + 1)
        interfering = 2 * (K + 1)
    else:
        raise InvalidInputError(
            f"no feedback accounting for scheme {scheme!r}; expected one of {_FEEDBACK_SCHEMES}"
        )
    return FeedbackReport(
        scheme=scheme,
        serving_complex_count=serving,
        interfering_complex_count=interfering,
        total_complex_count=serving + interfering,
    )
