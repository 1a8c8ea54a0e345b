"""Classical building blocks: hashing, signatures, MAC, symmetric encryption.

The hash and signature layers each come in a vetted reference flavor and a
self-contained flavor, so the package runs with no external cryptographic
dependency at all.  The deliberately weak short hashes exist to demonstrate
how the stack loses security when its hash is breakable.
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass, field
from random import Random

__all__ = [
    "HASH_VARIANTS",
    "hash_index",
    "hash_bits",
    "hash_eval",
    "hash_kappa",
    "DsPublicKey",
    "DsSecretKey",
    "ds_keygen",
    "ds_sign",
    "ds_verify",
    "default_ds_algo",
    "mac_keygen",
    "mac_tag",
    "mac_verify",
    "enc_keygen",
    "encrypt",
    "decrypt",
    "DataError",
]


class DataError(ValueError):
    """Malformed serialized material (bad index, bad key encoding, ...)."""


def _sha(*parts: bytes) -> bytes:
    h = hashlib.sha256()
    for p in parts:
        h.update(len(p).to_bytes(4, "big"))
        h.update(p)
    return h.digest()


# ---------------------------------------------------------------------------
# hashing with an explicit sampled index
# ---------------------------------------------------------------------------

HASH_VARIANTS = {"sha256-256": 256, "toy-16": 16, "toy-8": 8}

_INDEX_MAGIC = b"QTSLH1"


def hash_index(kappa: int, rng: Random, variant: str = "sha256-256") -> bytes:
    """Sample a hash-function index; the index encodes kappa and the variant."""
    if variant not in HASH_VARIANTS:
        raise ValueError(f"unknown hash variant {variant!r}")
    if kappa < 1:
        raise ValueError("kappa must be positive")
    salt = rng.randbytes(16)
    name = variant.encode()
    return (
        _INDEX_MAGIC
        + len(name).to_bytes(1, "big")
        + name
        + kappa.to_bytes(4, "big")
        + salt
    )


def _parse_index(s: bytes) -> tuple[str, int]:
    if len(s) < len(_INDEX_MAGIC) + 1 or not s.startswith(_INDEX_MAGIC):
        raise DataError("bad hash index header")
    off = len(_INDEX_MAGIC)
    name_len = s[off]
    off += 1
    name = s[off : off + name_len].decode("ascii", errors="replace")
    off += name_len
    if name not in HASH_VARIANTS or len(s) < off + 4 + 16:
        raise DataError("bad hash index body")
    kappa = int.from_bytes(s[off : off + 4], "big")
    return name, kappa


def hash_bits(s: bytes) -> int:
    """Output length r of the indexed hash, in bits."""
    variant, _ = _parse_index(s)
    return HASH_VARIANTS[variant]


def hash_kappa(s: bytes) -> int:
    """The security parameter recoverable from an index."""
    return _parse_index(s)[1]


def hash_eval(s: bytes, message: bytes) -> str:
    """Digest of ``message`` under index ``s`` as a '0'/'1' string of length r."""
    r = hash_bits(s)
    digest = _sha(s, message)
    while len(digest) * 8 < r:
        digest += _sha(s, digest)
    bits = "".join(format(b, "08b") for b in digest)
    return bits[:r]


# ---------------------------------------------------------------------------
# classical digital signatures
# ---------------------------------------------------------------------------

try:  # pragma: no cover - presence depends on the environment
    from cryptography.hazmat.primitives.asymmetric.ed25519 import (
        Ed25519PrivateKey,
        Ed25519PublicKey,
    )

    _HAVE_ED25519 = True
except Exception:  # pragma: no cover
    _HAVE_ED25519 = False


if _HAVE_ED25519:
    from functools import lru_cache

    # parsing raw bytes into key objects dominates verify time in the
    # experiment loops, so memoize it
    @lru_cache(maxsize=4096)
    def _ed25519_public(material: bytes):
        return Ed25519PublicKey.from_public_bytes(material)

    @lru_cache(maxsize=64)
    def _ed25519_private(material: bytes):
        return Ed25519PrivateKey.from_private_bytes(material)


def default_ds_algo() -> str:
    return "ed25519" if _HAVE_ED25519 else "hash-chain"


@dataclass(frozen=True)
class DsPublicKey:
    algo: str
    material: bytes

    @property
    def deterministic_verify(self) -> bool:
        return True


@dataclass
class DsSecretKey:
    algo: str
    material: bytes
    # hash-chain signing is stateful: next unused leaf index
    next_leaf: int = 0
    capacity_log2: int = 0
    _tree: list | None = field(default=None, repr=False)


# -- self-contained hash-based scheme (one-time leaves under a Merkle root) --

_LEAF_BITS = 256


def _leaf_secret(seed: bytes, leaf: int, pos: int, val: int) -> bytes:
    return _sha(b"leaf", seed, leaf.to_bytes(4, "big"), pos.to_bytes(2, "big"), val.to_bytes(1, "big"))


def _leaf_public(seed: bytes, leaf: int) -> bytes:
    h = hashlib.sha256()
    for pos in range(_LEAF_BITS):
        for val in (0, 1):
            h.update(hashlib.sha256(_leaf_secret(seed, leaf, pos, val)).digest())
    return h.digest()


def _build_tree(seed: bytes, cap_log2: int) -> list[list[bytes]]:
    level = [_leaf_public(seed, i) for i in range(1 << cap_log2)]
    levels = [level]
    while len(level) > 1:
        level = [_sha(b"node", level[i], level[i + 1]) for i in range(0, len(level), 2)]
        levels.append(level)
    return levels


def _hash_chain_keygen(rng: Random, capacity_log2: int) -> tuple[DsPublicKey, DsSecretKey]:
    seed = rng.randbytes(32)
    tree = _build_tree(seed, capacity_log2)
    root = tree[-1][0]
    pk = DsPublicKey("hash-chain", capacity_log2.to_bytes(1, "big") + root)
    sk = DsSecretKey("hash-chain", seed, 0, capacity_log2, tree)
    return pk, sk


def _hash_chain_sign(sk: DsSecretKey, message: bytes) -> bytes:
    leaf = sk.next_leaf
    if leaf >= (1 << sk.capacity_log2):
        raise RuntimeError("hash-chain signing capacity exhausted")
    sk.next_leaf = leaf + 1
    if sk._tree is None:
        sk._tree = _build_tree(sk.material, sk.capacity_log2)
    digest = _sha(b"msg", message)
    bits = [(digest[i // 8] >> (7 - i % 8)) & 1 for i in range(_LEAF_BITS)]
    parts = [leaf.to_bytes(4, "big")]
    for pos, b in enumerate(bits):
        parts.append(_leaf_secret(sk.material, leaf, pos, b))
        parts.append(hashlib.sha256(_leaf_secret(sk.material, leaf, pos, 1 - b)).digest())
    idx = leaf
    for level in sk._tree[:-1]:
        parts.append(level[idx ^ 1])
        idx //= 2
    return b"".join(parts)


def _hash_chain_verify(pk: DsPublicKey, message: bytes, signature: bytes) -> bool:
    try:
        cap = pk.material[0]
        root = pk.material[1:]
        need = 4 + _LEAF_BITS * 64 + cap * 32
        if len(signature) != need:
            return False
        leaf = int.from_bytes(signature[:4], "big")
        if leaf >= (1 << cap):
            return False
        digest = _sha(b"msg", message)
        bits = [(digest[i // 8] >> (7 - i % 8)) & 1 for i in range(_LEAF_BITS)]
        off = 4
        h = hashlib.sha256()
        for b in bits:
            secret = signature[off : off + 32]
            other = signature[off + 32 : off + 64]
            off += 64
            pair = [hashlib.sha256(secret).digest(), other]
            if b:
                pair.reverse()  # revealed secret sits in the slot for value b
            h.update(pair[0])
            h.update(pair[1])
        acc = h.digest()
        idx = leaf
        for _ in range(cap):
            sib = signature[off : off + 32]
            off += 32
            if idx & 1:
                acc = _sha(b"node", sib, acc)
            else:
                acc = _sha(b"node", acc, sib)
            idx //= 2
        return hmac.compare_digest(acc, root)
    except Exception:
        return False


def ds_keygen(
    kappa: int,
    rng: Random,
    algo: str | None = None,
    capacity_log2: int = 10,
) -> tuple[DsPublicKey, DsSecretKey]:
    """Key pair for the classical signature layer.

    ``ed25519`` adapts a vetted library primitive; ``hash-chain`` is the
    self-contained fallback (stateful, bounded number of signatures).
    """
    algo = algo or default_ds_algo()
    if algo == "ed25519":
        if not _HAVE_ED25519:
            raise RuntimeError("ed25519 backend not importable here")
        raw = rng.randbytes(32)
        priv = Ed25519PrivateKey.from_private_bytes(raw)
        pub = priv.public_key().public_bytes_raw()
        return DsPublicKey("ed25519", pub), DsSecretKey("ed25519", raw)
    if algo == "hash-chain":
        return _hash_chain_keygen(rng, capacity_log2)
    raise ValueError(f"unknown signature algorithm {algo!r}")


def ds_sign(sk: DsSecretKey, message: bytes) -> bytes:
    if sk.algo == "ed25519":
        return _ed25519_private(sk.material).sign(message)
    if sk.algo == "hash-chain":
        return _hash_chain_sign(sk, message)
    raise ValueError(f"unknown signature algorithm {sk.algo!r}")


def _ds_verify_uncached(pk: DsPublicKey, message: bytes, signature: bytes) -> bool:
    if pk.algo == "ed25519":
        try:
            _ed25519_public(pk.material).verify(signature, message)
            return True
        except Exception:
            return False
    if pk.algo == "hash-chain":
        return _hash_chain_verify(pk, message, signature)
    return False


_VERIFY_CACHE: dict[tuple[str, bytes, bytes, bytes], bool] = {}
_VERIFY_CACHE_MAX = 8192


def ds_verify(pk: DsPublicKey, message: bytes, signature: bytes) -> bool:
    """Total and deterministic: malformed input verifies false, never raises.

    Both algorithms verify deterministically, so repeated checks of the same
    triple (common when a long-lived credential is re-validated on every use)
    are answered from a bounded memo.
    """
    if not isinstance(signature, (bytes, bytearray)):
        return False
    key = (pk.algo, pk.material, message, bytes(signature))
    hit = _VERIFY_CACHE.get(key)
    if hit is not None:
        return hit
    ok = _ds_verify_uncached(pk, key[2], key[3])
    if len(_VERIFY_CACHE) >= _VERIFY_CACHE_MAX:
        _VERIFY_CACHE.clear()
    _VERIFY_CACHE[key] = ok
    return ok


# ---------------------------------------------------------------------------
# MAC and symmetric encryption
# ---------------------------------------------------------------------------


def mac_keygen(kappa: int, rng: Random) -> bytes:
    return rng.randbytes(32)


def mac_tag(key: bytes, message: bytes) -> bytes:
    return hmac.new(key, message, hashlib.sha256).digest()


def mac_verify(key: bytes, message: bytes, tag: bytes) -> bool:
    if not isinstance(tag, (bytes, bytearray)):
        return False
    return hmac.compare_digest(mac_tag(key, message), bytes(tag))


def enc_keygen(kappa: int, rng: Random) -> bytes:
    return rng.randbytes(32)


def _keystream(key: bytes, nonce: bytes, length: int) -> bytes:
    out = bytearray()
    counter = 0
    while len(out) < length:
        out += _sha(b"ks", key, nonce, counter.to_bytes(8, "big"))
        counter += 1
    return bytes(out[:length])


def encrypt(key: bytes, plaintext: bytes, rng: Random) -> bytes:
    """Randomized stream cipher; equal-length plaintexts give equal-length
    ciphertexts."""
    nonce = rng.randbytes(16)
    return nonce + bytes(a ^ b for a, b in zip(plaintext, _keystream(key, nonce, len(plaintext))))


def decrypt(key: bytes, ciphertext: bytes) -> bytes:
    """Inverse of encrypt; a wrong key yields wrong bytes, never a crash."""
    if len(ciphertext) < 16:
        raise DataError("ciphertext shorter than its nonce")
    nonce, body = ciphertext[:16], ciphertext[16:]
    return bytes(a ^ b for a, b in zip(body, _keystream(key, nonce, len(body))))
