"""The one-bit, one-shot token scheme.

A key is a hidden half-dimension subspace A of F2^n.  The public side is a
sealed membership oracle answering "is v in A" / "is v in the dual"; the
token is the uniform superposition over A.  Signing bit 0 measures the token
directly, signing bit 1 measures it in the Hadamard basis, so one token
yields one verifiable (bit, vector) pair and the zero outcome is treated as
a signing failure.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from random import Random

from .f2lin import F2Vector, Subspace, dual, member, sample_subspace
from .qsim import (
    CosetState,
    hadamard_all,
    measure_standard,
    project_subspace,
)

__all__ = [
    "MembershipOracle",
    "Ot1SecretKey",
    "Ot1Token",
    "Ot1Signature",
    "TokenSpentError",
    "OracleWithheldError",
    "default_dimension",
    "ot1_keygen",
    "ot1_token_gen",
    "ot1_sign",
    "ot1_verify",
    "ot1_verify_token",
    "ot1_revoke",
    "withheld_twin",
]

KEY_ID_BYTES = 16


class TokenSpentError(RuntimeError):
    """Honest signing was attempted on an already-consumed token."""


class OracleWithheldError(RuntimeError):
    """The oracle is in withheld mode and refuses to answer."""


def default_dimension(kappa: int) -> int:
    """Token length for a security parameter: grows faster than log(kappa)."""
    if kappa < 1:
        raise ValueError("kappa must be positive")
    return 2 * math.ceil(math.log2(kappa + 2) ** 1.5)


class MembershipOracle:
    """Sealed membership interface to a hidden subspace.

    The public surface is exactly: ``query``, ``mode``, ``query_count`` and
    ``key_id``.  The subspace itself is module-private; nothing outside this
    module should ever read it.
    """

    def __init__(self, space: Subspace, key_id: bytes, mode: str = "public") -> None:
        if mode not in ("public", "withheld"):
            raise ValueError(f"bad oracle mode {mode!r}")
        self.__space = space
        self.__dual = dual(space)
        self.__mode = mode
        self.__count = 0
        self.__lock = threading.Lock()
        self.__key_id = bytes(key_id)

    @property
    def mode(self) -> str:
        return self.__mode

    @property
    def query_count(self) -> int:
        return self.__count

    @property
    def key_id(self) -> bytes:
        return self.__key_id

    def query(self, v: F2Vector, p: int) -> int:
        """Membership bit of v in the subspace (p=0) or its dual (p=1)."""
        if self.__mode != "public":
            raise OracleWithheldError("oracle queries are withheld")
        if p not in (0, 1):
            raise ValueError(f"selector must be 0 or 1, got {p!r}")
        with self.__lock:
            self.__count += 1
        target = self.__space if p == 0 else self.__dual
        return 1 if member(target, v) else 0

    def _charge(self, amount: int) -> None:
        with self.__lock:
            self.__count += amount

    def __repr__(self) -> str:
        return (
            f"MembershipOracle(mode={self.__mode!r}, "
            f"key_id={self.__key_id.hex()[:8]}..., queries={self.__count})"
        )


def _hidden_space(pk: MembershipOracle) -> Subspace:
    """Module-private accessor for the sealed subspace (simulation only)."""
    return pk._MembershipOracle__space  # type: ignore[attr-defined]


def withheld_twin(pk: MembershipOracle) -> MembershipOracle:
    """A view of the same key whose queries always refuse."""
    return MembershipOracle(_hidden_space(pk), pk.key_id, mode="withheld")


@dataclass(frozen=True)
class Ot1SecretKey:
    space: Subspace
    key_id: bytes

    def __repr__(self) -> str:
        return f"Ot1SecretKey(n={self.space.ambient_n}, key_id={self.key_id.hex()[:8]}...)"


@dataclass
class Ot1Token:
    """Mutable carrier for one token: the state plus lifecycle metadata."""

    state: CosetState
    key_id: bytes
    lifecycle: str = "fresh"  # "fresh" | "spent"


@dataclass(frozen=True)
class Ot1Signature:
    alpha: int
    sig: F2Vector
    key_id: bytes


def ot1_keygen(
    kappa: int, rng: Random, n_override: int | None = None
) -> tuple[MembershipOracle, Ot1SecretKey]:
    """Sample a hidden subspace key; returns (public oracle, secret key)."""
    n = default_dimension(kappa) if n_override is None else n_override
    if n < 2 or n % 2:
        raise ValueError(f"token length must be even and >= 2, got {n}")
    space = sample_subspace(n, rng)
    key_id = rng.randbytes(KEY_ID_BYTES)
    return MembershipOracle(space, key_id), Ot1SecretKey(space, key_id)


def ot1_token_gen(sk: Ot1SecretKey) -> Ot1Token:
    from .qsim import prepare_subspace_state

    return Ot1Token(prepare_subspace_state(sk.space), sk.key_id)


def _raw_sign(
    alpha: int, token: Ot1Token, rng: Random
) -> tuple[F2Vector | None, CosetState]:
    """Measurement step shared by signing and revocation; no lifecycle check."""
    state = token.state
    if state.is_unsupported():
        return None, state
    if alpha:
        state = hadamard_all(state)
    outcome, post = measure_standard(state, rng)
    if outcome.is_zero():
        return None, post
    return outcome, post


def ot1_sign(alpha: int, token: Ot1Token, rng: Random) -> Ot1Signature | None:
    """Consume the token to sign one bit; None means the signing failed.

    The token is marked spent either way and keeps its residual state.
    """
    if alpha not in (0, 1):
        raise ValueError(f"document bit must be 0 or 1, got {alpha!r}")
    if token.lifecycle != "fresh":
        raise TokenSpentError("token was already consumed")
    outcome, post = _raw_sign(alpha, token, rng)
    token.state = post
    token.lifecycle = "spent"
    if outcome is None:
        return None
    return Ot1Signature(alpha, outcome, token.key_id)


def ot1_verify(pk: MembershipOracle, alpha: int, sig: F2Vector) -> bool:
    """Accept iff the oracle confirms membership and the vector is nonzero.

    Always consumes exactly one oracle query.
    """
    bit = pk.query(sig, 1 if alpha else 0)
    return bool(bit) and not sig.is_zero()


def ot1_verify_token(
    pk: MembershipOracle, token: Ot1Token, rng: Random
) -> tuple[bool, Ot1Token]:
    """Non-destructive token test: project onto the hidden subspace.

    Costs two oracle queries (the projection is realized with one membership
    round in each basis).  An accepted honest token is returned unchanged and
    stays usable; a rejected token is left with an untracked residual state.
    """
    if pk.mode != "public":
        raise OracleWithheldError("oracle queries are withheld")
    pk._charge(2)
    accepted, post = project_subspace(token.state, _hidden_space(pk), rng)
    token.state = post
    return accepted, token


def ot1_revoke(pk: MembershipOracle, token: Ot1Token, rng: Random) -> bool:
    """Sign a random bit with the token and verify the result.

    Consumes the token; returns whether verification accepted.
    """
    alpha = rng.getrandbits(1)
    outcome, post = _raw_sign(alpha, token, rng)
    token.state = post
    token.lifecycle = "spent"
    if outcome is None:
        return False
    return ot1_verify(pk, alpha, outcome)
