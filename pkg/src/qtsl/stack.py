"""Reduction layers that grow the one-bit scheme into a full signature token.

Three layers, each a standard transformation:

* r-fold product — sign an r-bit string with r independent one-bit keys;
* hash-and-sign — sign arbitrary bytes by signing the digest under a
  sampled hash index s carried with the key;
* chain signing — certify each fresh hash-and-sign public key with a
  long-lived classical signature, so one classical public key backs an
  unbounded stream of single-use tokens.

Every layer is parameterized over the underlying one-bit operations so the
same code serves both the oracle-based scheme and the private-key variant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from random import Random
from typing import Any, Callable

from .f2lin import F2Vector
from . import ot1 as _ot1
from .encoding import canonical_json, encode_space, encode_vector
from .ot1 import MembershipOracle, Ot1SecretKey, Ot1Token, _hidden_space
from .primitives import (
    DsPublicKey,
    DsSecretKey,
    ds_keygen,
    ds_sign,
    ds_verify,
    hash_bits,
    hash_eval,
    hash_index,
    hash_kappa,
)

__all__ = [
    "OneBitOps",
    "PUBLIC_ONE_BIT",
    "OtrPublicKey",
    "OtrSecretKey",
    "OtrToken",
    "OtrSignature",
    "otr_keygen",
    "otr_token_gen",
    "otr_sign",
    "otr_verify",
    "otr_verify_token",
    "OtPublicKey",
    "OtSecretKey",
    "OtToken",
    "OtSignature",
    "ot_keygen",
    "ot_token_gen",
    "ot_sign",
    "ot_verify",
    "ot_verify_token",
    "TsPublicKey",
    "TsSecretKey",
    "TsToken",
    "TsSignature",
    "ts_keygen",
    "ts_token_gen",
    "ts_sign",
    "ts_verify",
    "ts_verify_token",
    "encode_ot_public",
    "ts_revoke",
    "verify_k",
    "verify_prime_k",
    "random_document",
    "MdsSigner",
    "MemoizedMdsSigner",
]


@dataclass(frozen=True)
class OneBitOps:
    """The five operations a one-bit scheme must provide to the stack."""

    name: str
    keygen: Callable[[int, Random, int | None], tuple[Any, Any]]
    token_gen: Callable[[Any], Any]
    sign: Callable[[int, Any, Random], F2Vector | None]
    verify: Callable[[Any, int, F2Vector], bool]
    verify_token: Callable[[Any, Any, Random], tuple[bool, Any]]


def _public_sign(alpha: int, token: Ot1Token, rng: Random) -> F2Vector | None:
    s = _ot1.ot1_sign(alpha, token, rng)
    return None if s is None else s.sig


PUBLIC_ONE_BIT = OneBitOps(
    name="oracle",
    keygen=lambda kappa, rng, n_override: _ot1.ot1_keygen(kappa, rng, n_override),
    token_gen=lambda sk: _ot1.ot1_token_gen(sk),
    sign=_public_sign,
    verify=lambda pk, alpha, vec: _ot1.ot1_verify(pk, alpha, vec),
    verify_token=lambda pk, token, rng: _ot1.ot1_verify_token(pk, token, rng),
)


# ---------------------------------------------------------------------------
# r-fold product layer
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OtrPublicKey:
    components: tuple[Any, ...]
    base: OneBitOps = field(repr=False, compare=False, default=PUBLIC_ONE_BIT)

    @property
    def r(self) -> int:
        return len(self.components)


@dataclass(frozen=True)
class OtrSecretKey:
    components: tuple[Any, ...]
    base: OneBitOps = field(repr=False, compare=False, default=PUBLIC_ONE_BIT)

    @property
    def r(self) -> int:
        return len(self.components)


@dataclass
class OtrToken:
    tokens: list
    base: OneBitOps = field(repr=False, default=PUBLIC_ONE_BIT)


@dataclass(frozen=True)
class OtrSignature:
    alpha: str
    sigs: tuple[F2Vector, ...]


def _check_alpha(alpha: str, r: int) -> None:
    if not isinstance(alpha, str) or len(alpha) != r or any(c not in "01" for c in alpha):
        raise ValueError(f"document must be an r={r} bit string, got {alpha!r}")


def otr_keygen(
    kappa: int,
    r: int,
    rng: Random,
    base: OneBitOps = PUBLIC_ONE_BIT,
    n_override: int | None = None,
) -> tuple[OtrPublicKey, OtrSecretKey]:
    """r independent one-bit keys, one per document bit."""
    if r < 1:
        raise ValueError("r must be at least 1")
    pub, sec = [], []
    for _ in range(r):
        pk, sk = base.keygen(kappa, rng, n_override)
        pub.append(pk)
        sec.append(sk)
    return OtrPublicKey(tuple(pub), base), OtrSecretKey(tuple(sec), base)


def otr_token_gen(sk: OtrSecretKey) -> OtrToken:
    return OtrToken([sk.base.token_gen(c) for c in sk.components], sk.base)


def otr_sign(alpha: str, token: OtrToken, rng: Random) -> OtrSignature | None:
    """Sign each bit with its component token.  All components are consumed;
    a single component failure fails the whole signature (no retry)."""
    _check_alpha(alpha, len(token.tokens))
    sigs = []
    failed = False
    for bit_char, tok in zip(alpha, token.tokens):
        vec = token.base.sign(int(bit_char), tok, rng)
        if vec is None:
            failed = True
        sigs.append(vec)
    if failed:
        return None
    return OtrSignature(alpha, tuple(sigs))


def otr_verify(pub: OtrPublicKey, alpha: str, sig: OtrSignature) -> bool:
    if not isinstance(sig, OtrSignature) or sig.alpha != alpha:
        return False
    try:
        _check_alpha(alpha, pub.r)
    except ValueError:
        return False
    if len(sig.sigs) != pub.r:
        return False
    return all(
        pub.base.verify(pk, int(bit_char), vec)
        for pk, bit_char, vec in zip(pub.components, alpha, sig.sigs)
    )


def otr_verify_token(pub: OtrPublicKey, token: OtrToken, rng: Random) -> tuple[bool, OtrToken]:
    if len(token.tokens) != pub.r:
        return False, token
    ok = True
    for pk, tok in zip(pub.components, token.tokens):
        accepted, _ = pub.base.verify_token(pk, tok, rng)
        ok = ok and accepted
    return ok, token


# ---------------------------------------------------------------------------
# hash-and-sign layer
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OtPublicKey:
    s: bytes
    otr: OtrPublicKey

    @property
    def r(self) -> int:
        return self.otr.r


@dataclass(frozen=True)
class OtSecretKey:
    s: bytes
    otr: OtrSecretKey


@dataclass
class OtToken:
    s: bytes
    otr: OtrToken


@dataclass(frozen=True)
class OtSignature:
    sigs: tuple[F2Vector, ...]


def ot_keygen(
    kappa: int,
    rng: Random,
    hash_variant: str = "sha256-256",
    base: OneBitOps = PUBLIC_ONE_BIT,
    n_override: int | None = None,
) -> tuple[OtPublicKey, OtSecretKey]:
    """Hash-and-sign keys: a sampled hash index plus one component key per
    digest bit."""
    s = hash_index(kappa, rng, hash_variant)
    r = hash_bits(s)
    pub, sec = otr_keygen(kappa, r, rng, base, n_override)
    return OtPublicKey(s, pub), OtSecretKey(s, sec)


def ot_token_gen(sk: OtSecretKey) -> OtToken:
    return OtToken(sk.s, otr_token_gen(sk.otr))


def ot_sign(doc: bytes, token: OtToken, rng: Random) -> OtSignature | None:
    alpha = hash_eval(token.s, doc)
    inner = otr_sign(alpha, token.otr, rng)
    return None if inner is None else OtSignature(inner.sigs)


def ot_verify(pub: OtPublicKey, doc: bytes, sig: OtSignature) -> bool:
    if not isinstance(sig, OtSignature):
        return False
    alpha = hash_eval(pub.s, doc)
    return otr_verify(pub.otr, alpha, OtrSignature(alpha, tuple(sig.sigs)))


def ot_verify_token(pub: OtPublicKey, token: OtToken, rng: Random) -> tuple[bool, OtToken]:
    """Token check: the token's hash index must equal the key's, then every
    component token must pass projection."""
    if token.s != pub.s:
        return False, token
    ok, _ = otr_verify_token(pub.otr, token.otr, rng)
    return ok, token


# ---------------------------------------------------------------------------
# chain-signed tokens under one long-lived classical key
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TsPublicKey:
    ds_pk: DsPublicKey
    kappa: int
    hash_variant: str
    n_override: int | None = None


@dataclass
class TsSecretKey:
    ds_sk: DsSecretKey
    kappa: int
    hash_variant: str
    n_override: int | None = None


@dataclass
class TsToken:
    ot_public: OtPublicKey
    chain_sig: bytes
    ot_token: OtToken


@dataclass(frozen=True)
class TsSignature:
    ot_public: OtPublicKey
    chain_sig: bytes
    ot_sig: OtSignature


def encode_ot_public(pub: OtPublicKey) -> bytes:
    """Canonical versioned bytes of a hash-and-sign public key.

    This is the exact message the chain signature covers and the preimage of
    a coin serial, so it must be stable: version tag, hash index, and each
    component's hidden subspace in canonical basis order (the simulation
    serializes the subspace itself where a deployment would ship a program).
    """
    spaces = [encode_space(_hidden_space(c)) for c in pub.otr.components]
    return canonical_json({"v": 1, "kind": "ot-pub", "s": pub.s.hex(), "spaces": spaces})


def ts_keygen(
    kappa: int,
    rng: Random,
    hash_variant: str = "sha256-256",
    ds_algo: str | None = None,
    n_override: int | None = None,
) -> tuple[TsPublicKey, TsSecretKey]:
    ds_pk, ds_sk = ds_keygen(kappa, rng, ds_algo)
    return (
        TsPublicKey(ds_pk, kappa, hash_variant, n_override),
        TsSecretKey(ds_sk, kappa, hash_variant, n_override),
    )


def ts_token_gen(sk: TsSecretKey, rng: Random) -> TsToken:
    """Mint one token: a fresh hash-and-sign keypair whose public part is
    certified by the long-lived classical key."""
    ot_pub, ot_sec = ot_keygen(sk.kappa, rng, sk.hash_variant, PUBLIC_ONE_BIT, sk.n_override)
    chain = ds_sign(sk.ds_sk, encode_ot_public(ot_pub))
    return TsToken(ot_pub, chain, ot_token_gen(ot_sec))


def ts_sign(doc: bytes, token: TsToken, rng: Random) -> TsSignature | None:
    inner = ot_sign(doc, token.ot_token, rng)
    if inner is None:
        return None
    return TsSignature(token.ot_public, token.chain_sig, inner)


def ts_verify(pk: TsPublicKey, doc: bytes, sig: TsSignature) -> bool:
    """Chain certificate first, then the single-use signature itself."""
    if not isinstance(sig, TsSignature):
        return False
    if not ds_verify(pk.ds_pk, encode_ot_public(sig.ot_public), sig.chain_sig):
        return False
    return ot_verify(sig.ot_public, doc, sig.ot_sig)


def ts_verify_token(pk: TsPublicKey, token: TsToken, rng: Random) -> tuple[bool, TsToken]:
    if not ds_verify(pk.ds_pk, encode_ot_public(token.ot_public), token.chain_sig):
        return False, token
    ok, _ = ot_verify_token(token.ot_public, token.ot_token, rng)
    return ok, token


# ---------------------------------------------------------------------------
# revocation and multi-pair verification
# ---------------------------------------------------------------------------


def random_document(kappa: int, rng: Random) -> bytes:
    """A uniformly random kappa-bit document, as bytes."""
    nbytes = (kappa + 7) // 8
    raw = bytearray(rng.randbytes(nbytes))
    if kappa % 8:
        raw[0] &= (1 << (kappa % 8)) - 1
    return bytes(raw)


def ts_revoke(pk: TsPublicKey, token: TsToken, rng: Random) -> bool:
    """Consume the token by signing a random document and verifying it."""
    doc = random_document(pk.kappa, rng)
    sig = ts_sign(doc, token, rng)
    if sig is None:
        return False
    return ts_verify(pk, doc, sig)


def verify_k(verify: Callable[[Any, Any, Any], bool], pk: Any, pairs: list) -> bool:
    """All pairs verify and the documents are pairwise distinct."""
    docs = [doc for doc, _ in pairs]
    if len(set(docs)) != len(docs):
        return False
    return all(verify(pk, doc, sig) for doc, sig in pairs)


def verify_prime_k(
    verify: Callable[[Any, Any, Any], bool],
    pk: Any,
    pairs: list,
    sig_encoding: Callable[[Any], bytes] | None = None,
) -> bool:
    """All pairs verify and the (document, signature) pairs are distinct."""
    enc = sig_encoding or (lambda sig: repr(sig).encode())
    seen = {(bytes(doc), enc(sig)) for doc, sig in pairs}
    if len(seen) != len(pairs):
        return False
    return all(verify(pk, doc, sig) for doc, sig in pairs)


# ---------------------------------------------------------------------------
# a many-time signer built from single-use tokens
# ---------------------------------------------------------------------------


class MdsSigner:
    """Classical-style signer: every sign call burns one fresh token."""

    def __init__(
        self,
        kappa: int,
        rng: Random,
        hash_variant: str = "sha256-256",
        ds_algo: str | None = None,
        n_override: int | None = None,
    ) -> None:
        self.public_key, self._secret = ts_keygen(kappa, rng, hash_variant, ds_algo, n_override)
        self._rng = rng

    def sign(self, doc: bytes) -> TsSignature:
        while True:
            token = ts_token_gen(self._secret, self._rng)
            sig = ts_sign(doc, token, self._rng)
            if sig is not None:
                return sig

    def verify(self, doc: bytes, sig: TsSignature) -> bool:
        return ts_verify(self.public_key, doc, sig)


class MemoizedMdsSigner(MdsSigner):
    """Same, but remembers past documents and answers repeats from cache."""

    def __init__(self, *args, **kwargs) -> None:
        super().__init__(*args, **kwargs)
        self._memory: dict[bytes, TsSignature] = {}

    def sign(self, doc: bytes) -> TsSignature:
        doc = bytes(doc)
        if doc not in self._memory:
            self._memory[doc] = super().sign(doc)
        return self._memory[doc]
