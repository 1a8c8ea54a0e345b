"""Security games, adversary strategies, and measurement experiments.

Every game is a Monte Carlo estimate with a Wilson 95% interval, driven by
per-trial rng streams derived deterministically from a master seed, so a
report is a pure function of (parameters, seed) and safe to compare
byte-for-byte across runs or across worker processes.

A trial may be declared *void* by a strategy (TrialVoid): the trial is
discarded and re-run under the next derived stream.  Strategies use this to
condition a measured rate on their visible honest steps succeeding (e.g. a
forger whose first, legitimate signing attempt failed openly), which is the
convention the analytic reference values in this module assume.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from random import Random
from typing import Any, Callable

from . import ot1 as _ot1
from . import privts as _privts
from . import stack as _stack
from .encoding import canonical_json
from .f2lin import (
    F2Vector,
    Subspace,
    dual,
    enumerate_subspaces,
    intersection_dim,
    member,
    sample_nonzero_element,
    sample_related,
    sample_subspace,
)
from .ot1 import MembershipOracle, Ot1Signature, OracleWithheldError, withheld_twin
from .primitives import hash_eval
from .qsim import hadamard_all, measure_standard

__all__ = [
    "Capability",
    "AdversaryStrategy",
    "TrialVoid",
    "CapabilityViolation",
    "GameReport",
    "SchemeHandle",
    "wilson_interval",
    "derive_rng",
    "ot1_handle",
    "priv_ot1_handle",
    "otr_handle",
    "ot_handle",
    "ts_handle",
    "tm_handle",
    "game_unforgeability",
    "game_revocability",
    "game_testability",
    "game_everlasting",
    "game_super_security",
    "game_unpredictability",
    "honest_strategy",
    "naive_double_sign_strategy",
    "collision_forgery_strategy",
    "spent_token_strategy",
    "double_revoke_strategy",
    "measure_and_guess_strategy",
    "enumerate_consistent_strategy",
    "same_pair_twice_strategy",
    "query_count_experiment",
    "relation_statistics",
    "two_faced_demo",
    "fit_halving_slope",
    "fit_scale_constant",
    "GAME_RUNNERS",
]

_Z95 = 1.959963984540054


class TrialVoid(Exception):
    """The strategy aborted before its scored step; re-run the trial."""


class CapabilityViolation(RuntimeError):
    """A strategy used a resource its declared capability forbids."""


def wilson_interval(successes: int, trials: int) -> tuple[float, float]:
    """Wilson score 95% interval for a binomial proportion."""
    if trials <= 0:
        return (0.0, 1.0)
    p = successes / trials
    z2 = _Z95 * _Z95
    denom = 1 + z2 / trials
    center = (p + z2 / (2 * trials)) / denom
    half = (_Z95 / denom) * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials))
    return (max(0.0, center - half), min(1.0, center + half))


def derive_rng(seed: int, label: str, index: int) -> Random:
    """Deterministic per-trial stream: hash the (seed, label, index) triple."""
    material = f"{seed}|{label}|{index}".encode()
    return Random(int.from_bytes(hashlib.sha256(material).digest(), "big"))


@dataclass(frozen=True)
class Capability:
    """What a strategy is allowed to touch."""

    tokens: int = 1
    oracle_access: bool = True
    query_budget: int | None = None
    unbounded_desk: bool = False


@dataclass(frozen=True)
class AdversaryStrategy:
    name: str
    capability: Capability
    program: Callable[["TrialContext"], Any]


@dataclass
class TrialContext:
    """Everything a strategy may see inside one trial."""

    handle: "SchemeHandle"
    pk_view: Any
    tokens: list
    rng: Random


@dataclass(frozen=True)
class GameReport:
    name: str
    params: dict
    successes: int
    trials: int
    voided: int
    rate: float
    wilson_95: tuple[float, float]
    analytic: float | None = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> bytes:
        obj = {
            "name": self.name,
            "params": self.params,
            "successes": self.successes,
            "trials": self.trials,
            "voided": self.voided,
            "rate": repr(self.rate),
            "rate_fraction": f"{self.successes}/{self.trials}",
            "wilson_95": [repr(self.wilson_95[0]), repr(self.wilson_95[1])],
            "analytic": None if self.analytic is None else repr(self.analytic),
            "extra": _jsonable(self.extra),
        }
        return canonical_json(obj)


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float):
        return repr(obj)
    if isinstance(obj, bytes):
        return obj.hex()
    return obj


def _run_trials(
    name: str,
    params: dict,
    trial: Callable[[Random], bool],
    trials: int,
    seed: int,
    analytic: float | None = None,
    extra: dict | None = None,
) -> GameReport:
    successes = 0
    done = 0
    attempt = 0
    voided = 0
    while done < trials:
        rng = derive_rng(seed, name, attempt)
        attempt += 1
        try:
            if trial(rng):
                successes += 1
        except TrialVoid:
            voided += 1
            if voided > 50 * trials + 1000:
                raise RuntimeError(f"{name}: voided trials dominate; check the strategy")
            continue
        done += 1
    return GameReport(
        name=name,
        params=dict(params, trials=trials, seed=seed),
        successes=successes,
        trials=trials,
        voided=voided,
        rate=successes / trials,
        wilson_95=wilson_interval(successes, trials),
        analytic=analytic,
        extra=extra or {},
    )


# ---------------------------------------------------------------------------
# scheme handles: one narrow interface over every layer
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SchemeHandle:
    """Uniform access to one scheme layer for the games.

    ``sign`` may return None (failed signing); ``verify_token`` is None for
    layers without a token test.  ``withhold`` maps a public key to a view
    whose oracle queries refuse (only meaningful for the oracle scheme).
    """

    name: str
    params: dict
    keygen: Callable[[Random], tuple[Any, Any]]
    token_gen: Callable[[Any, Random], Any]
    sign: Callable[[Any, Any, Random], Any]
    verify: Callable[[Any, Any, Any], bool]
    random_doc: Callable[[Random], Any]
    verify_token: Callable[[Any, Any, Random], tuple[bool, Any]] | None = None
    withhold: Callable[[Any], Any] | None = None
    sig_bytes: Callable[[Any], bytes] | None = None


def ot1_handle(kappa: int = 16, n: int | None = 8) -> SchemeHandle:
    return SchemeHandle(
        name="ot1",
        params={"kappa": kappa, "n": n},
        keygen=lambda rng: _ot1.ot1_keygen(kappa, rng, n),
        token_gen=lambda sk, rng: _ot1.ot1_token_gen(sk),
        sign=lambda doc, token, rng: _ot1.ot1_sign(doc, token, rng),
        verify=lambda pk, doc, sig: isinstance(sig, Ot1Signature)
        and sig.alpha == doc
        and _ot1.ot1_verify(pk, doc, sig.sig),
        random_doc=lambda rng: rng.getrandbits(1),
        verify_token=lambda pk, token, rng: _ot1.ot1_verify_token(pk, token, rng),
        withhold=withheld_twin,
        sig_bytes=lambda sig: f"{sig.alpha}:{sig.sig}".encode(),
    )


def priv_ot1_handle(kappa: int = 16, n: int | None = 8) -> SchemeHandle:
    return SchemeHandle(
        name="priv-ot1",
        params={"kappa": kappa, "n": n},
        keygen=lambda rng: _privts.priv_ot1_keygen(kappa, rng, n),
        token_gen=lambda sk, rng: _privts.priv_ot1_token_gen(sk),
        sign=lambda doc, token, rng: _wrap_priv_sig(doc, _privts.priv_ot1_sign(doc, token, rng)),
        verify=lambda key, doc, sig: isinstance(sig, Ot1Signature)
        and sig.alpha == doc
        and _privts.priv_ot1_verify(key, doc, sig.sig),
        random_doc=lambda rng: rng.getrandbits(1),
        verify_token=lambda key, token, rng: _privts.priv_ot1_verify_token(key, token, rng),
        sig_bytes=lambda sig: f"{sig.alpha}:{sig.sig}".encode(),
    )


def _wrap_priv_sig(doc: int, vec: F2Vector | None) -> Ot1Signature | None:
    return None if vec is None else Ot1Signature(doc, vec, b"")


def otr_handle(
    kappa: int = 16, r: int = 4, n: int | None = 8, private: bool = False
) -> SchemeHandle:
    base = _privts.PRIVATE_ONE_BIT if private else _stack.PUBLIC_ONE_BIT
    return SchemeHandle(
        name="otr-private" if private else "otr",
        params={"kappa": kappa, "r": r, "n": n},
        keygen=lambda rng: _stack.otr_keygen(kappa, r, rng, base, n),
        token_gen=lambda sk, rng: _stack.otr_token_gen(sk),
        sign=lambda doc, token, rng: _stack.otr_sign(doc, token, rng),
        verify=lambda pk, doc, sig: _stack.otr_verify(pk, doc, sig),
        random_doc=lambda rng: format(rng.getrandbits(r), f"0{r}b"),
        verify_token=lambda pk, token, rng: _stack.otr_verify_token(pk, token, rng),
        sig_bytes=lambda sig: repr((sig.alpha, sig.sigs)).encode(),
    )


def ot_handle(
    kappa: int = 16,
    hash_variant: str = "toy-8",
    n: int | None = 8,
    private: bool = False,
) -> SchemeHandle:
    base = _privts.PRIVATE_ONE_BIT if private else _stack.PUBLIC_ONE_BIT
    return SchemeHandle(
        name="ot-private" if private else "ot",
        params={"kappa": kappa, "hash": hash_variant, "n": n},
        keygen=lambda rng: _stack.ot_keygen(kappa, rng, hash_variant, base, n),
        token_gen=lambda sk, rng: _stack.ot_token_gen(sk),
        sign=lambda doc, token, rng: _stack.ot_sign(doc, token, rng),
        verify=lambda pk, doc, sig: _stack.ot_verify(pk, doc, sig),
        random_doc=lambda rng: _stack.random_document(kappa, rng),
        verify_token=lambda pk, token, rng: _stack.ot_verify_token(pk, token, rng),
        sig_bytes=lambda sig: repr(sig.sigs).encode(),
    )


def ts_handle(
    kappa: int = 16,
    hash_variant: str = "toy-8",
    n: int | None = 8,
    ds_algo: str | None = None,
) -> SchemeHandle:
    return SchemeHandle(
        name="ts",
        params={"kappa": kappa, "hash": hash_variant, "n": n},
        keygen=lambda rng: _stack.ts_keygen(kappa, rng, hash_variant, ds_algo, n),
        token_gen=lambda sk, rng: _stack.ts_token_gen(sk, rng),
        sign=lambda doc, token, rng: _stack.ts_sign(doc, token, rng),
        verify=lambda pk, doc, sig: _stack.ts_verify(pk, doc, sig),
        random_doc=lambda rng: _stack.random_document(kappa, rng),
        verify_token=lambda pk, token, rng: _stack.ts_verify_token(pk, token, rng),
        sig_bytes=lambda sig: _stack.encode_ot_public(sig.ot_public)
        + sig.chain_sig
        + repr(sig.ot_sig.sigs).encode(),
    )


def tm_handle(
    kappa: int = 16, hash_variant: str = "toy-8", n: int | None = 8
) -> SchemeHandle:
    return SchemeHandle(
        name="tm",
        params={"kappa": kappa, "hash": hash_variant, "n": n},
        keygen=lambda rng: ((key := _privts.tm_keygen(kappa, rng, hash_variant, n)), key),
        token_gen=lambda key, rng: _privts.tm_token_gen(key, rng),
        sign=lambda doc, token, rng: _privts.tm_sign(doc, token, rng),
        verify=lambda key, doc, sig: _privts.tm_verify(key, doc, sig),
        random_doc=lambda rng: _stack.random_document(kappa, rng),
        verify_token=lambda key, token, rng: _privts.tm_verify_token(key, token, rng),
        sig_bytes=lambda sig: sig.key_blob + sig.tag + repr(sig.ot_sig.sigs).encode(),
    )


def _revoke_document(handle: SchemeHandle, rng: Random) -> Any:
    return handle.random_doc(rng)


def _revoke_states(
    handle: SchemeHandle,
    pk: Any,
    states: list,
    rng: Random,
    distinct_docs: bool,
) -> bool:
    """Revoke each returned register: sign a fresh random document, verify.

    With ``distinct_docs`` the trial is voided when two revocation draws
    collide — the analytic references assume full-length documents, where
    collisions never happen; the one-bit desk scheme would otherwise replay.
    """
    docs = [_revoke_document(handle, rng) for _ in states]
    if distinct_docs and len(set(docs)) != len(docs):
        raise TrialVoid
    for doc, state in zip(docs, states):
        if state is None:
            return False
        sig = _raw_handle_sign(handle, doc, state, rng)
        if sig is None or not handle.verify(pk, doc, sig):
            return False
    return True


def _raw_handle_sign(handle: SchemeHandle, doc: Any, token: Any, rng: Random) -> Any:
    """Sign ignoring lifecycle where the layer tracks one (revocation and
    adversarial replays operate on whatever state is physically left)."""
    if handle.name in ("ot1", "priv-ot1"):
        outcome, post = _ot1._raw_sign(doc, token, rng)
        token.state = post
        token.lifecycle = "spent"
        if outcome is None:
            return None
        return Ot1Signature(doc, outcome, token.key_id)
    if handle.name.startswith("otr"):
        sigs = []
        for bit_char, tok in zip(doc, token.tokens):
            outcome, post = _ot1._raw_sign(int(bit_char), tok, rng)
            tok.state = post
            tok.lifecycle = "spent"
            if outcome is None:
                return None
            sigs.append(outcome)
        return _stack.OtrSignature(doc, tuple(sigs))
    if handle.name.startswith("ot"):
        alpha = hash_eval(token.s, doc)
        inner = _raw_handle_sign_otr(alpha, token.otr, rng)
        return None if inner is None else _stack.OtSignature(inner)
    if handle.name == "ts":
        alpha = hash_eval(token.ot_token.s, doc)
        inner = _raw_handle_sign_otr(alpha, token.ot_token.otr, rng)
        if inner is None:
            return None
        return _stack.TsSignature(token.ot_public, token.chain_sig, _stack.OtSignature(inner))
    if handle.name == "tm":
        alpha = hash_eval(token.ot_token.s, doc)
        inner = _raw_handle_sign_otr(alpha, token.ot_token.otr, rng)
        if inner is None:
            return None
        return _privts.TmSignature(token.key_blob, token.tag, _stack.OtSignature(inner))
    raise ValueError(f"no raw signing path for {handle.name}")


def _raw_handle_sign_otr(alpha: str, otr_token, rng: Random) -> tuple | None:
    sigs = []
    for bit_char, tok in zip(alpha, otr_token.tokens):
        outcome, post = _ot1._raw_sign(int(bit_char), tok, rng)
        tok.state = post
        tok.lifecycle = "spent"
        if outcome is None:
            return None
        sigs.append(outcome)
    return tuple(sigs)


def _make_context(
    handle: SchemeHandle, strategy: AdversaryStrategy, ell: int, rng: Random
) -> tuple[TrialContext, Any, Any]:
    if strategy.capability.tokens < ell:
        raise CapabilityViolation(
            f"{strategy.name} declares {strategy.capability.tokens} tokens, game hands {ell}"
        )
    pk, sk = handle.keygen(rng)
    tokens = [handle.token_gen(sk, rng) for _ in range(ell)]
    view = pk
    if not strategy.capability.oracle_access and handle.withhold is not None:
        view = handle.withhold(pk)
    ctx = TrialContext(handle, view, tokens, rng)
    return ctx, pk, sk


def _run_program(strategy: AdversaryStrategy, ctx: TrialContext) -> Any:
    try:
        return strategy.program(ctx)
    except OracleWithheldError as exc:
        raise CapabilityViolation(str(exc)) from exc


# ---------------------------------------------------------------------------
# the games
# ---------------------------------------------------------------------------


def game_unforgeability(
    handle: SchemeHandle,
    strategy: AdversaryStrategy,
    ell: int,
    trials: int,
    seed: int,
    analytic: float | None = None,
) -> GameReport:
    """Mint ell tokens, run the strategy, score verify_{ell+1}: ell+1 pairs
    with pairwise-distinct documents that all verify."""

    def trial(rng: Random) -> bool:
        ctx, pk, _ = _make_context(handle, strategy, ell, rng)
        pairs = _run_program(strategy, ctx)
        if pairs is None or len(pairs) != ell + 1:
            return False
        return _stack.verify_k(handle.verify, pk, list(pairs))

    return _run_trials(
        f"unforgeability[{handle.name}/{strategy.name}]",
        dict(handle.params, l=ell, strategy=strategy.name),
        trial,
        trials,
        seed,
        analytic,
    )


def game_revocability(
    handle: SchemeHandle,
    strategy: AdversaryStrategy,
    ell: int,
    t: int,
    trials: int,
    seed: int,
    analytic: float | None = None,
    distinct_docs: bool = True,
) -> GameReport:
    """Strategy returns (pairs, states); score verify_t on the pairs and a
    successful revocation of all ell − t + 1 returned registers."""

    def trial(rng: Random) -> bool:
        ctx, pk, _ = _make_context(handle, strategy, ell, rng)
        out = _run_program(strategy, ctx)
        if out is None:
            return False
        pairs, states = out
        if len(pairs) != t or len(states) != ell - t + 1:
            return False
        if not _stack.verify_k(handle.verify, pk, list(pairs)):
            return False
        return _revoke_states(handle, pk, list(states), rng, distinct_docs)

    return _run_trials(
        f"revocability[{handle.name}/{strategy.name}]",
        dict(handle.params, l=ell, t=t, strategy=strategy.name),
        trial,
        trials,
        seed,
        analytic,
    )


def game_testability(
    handle: SchemeHandle,
    k: int,
    trials: int,
    seed: int,
    analytic: float | None = None,
) -> GameReport:
    """k consecutive non-destructive token checks, then sign-and-verify.

    Success means: every check accepted, and the signature verified."""
    if handle.verify_token is None:
        raise ValueError(f"{handle.name} has no token test")

    def trial(rng: Random) -> bool:
        pk, sk = handle.keygen(rng)
        token = handle.token_gen(sk, rng)
        for _ in range(k):
            ok, token = handle.verify_token(pk, token, rng)
            if not ok:
                return False
        doc = handle.random_doc(rng)
        sig = handle.sign(doc, token, rng)
        return sig is not None and handle.verify(pk, doc, sig)

    return _run_trials(
        f"testability[{handle.name}]",
        dict(handle.params, k=k),
        trial,
        trials,
        seed,
        analytic,
    )


def game_everlasting(
    handle: SchemeHandle,
    strategy: AdversaryStrategy,
    ell: int,
    trials: int,
    seed: int,
    analytic: float | None = None,
) -> GameReport:
    """The strategy gets tokens but no oracle; it must both return states
    that pass revocation and forge one verifying pair."""
    if strategy.capability.oracle_access:
        raise CapabilityViolation("everlasting game requires oracle_access=False")

    def trial(rng: Random) -> bool:
        ctx, pk, _ = _make_context(handle, strategy, ell, rng)
        out = _run_program(strategy, ctx)
        if out is None:
            return False
        states, (doc, sig) = out
        if len(states) != ell:
            return False
        if not _revoke_states(handle, pk, list(states), rng, distinct_docs=False):
            return False
        return handle.verify(pk, doc, sig)

    return _run_trials(
        f"everlasting[{handle.name}/{strategy.name}]",
        dict(handle.params, l=ell, strategy=strategy.name),
        trial,
        trials,
        seed,
        analytic,
    )


def game_super_security(
    handle: SchemeHandle,
    strategy: AdversaryStrategy,
    ell: int,
    trials: int,
    seed: int,
    analytic: float | None = None,
) -> GameReport:
    """Like unforgeability but scored with pairwise-distinct (doc, sig)
    pairs instead of distinct documents."""

    def trial(rng: Random) -> bool:
        ctx, pk, _ = _make_context(handle, strategy, ell, rng)
        pairs = _run_program(strategy, ctx)
        if pairs is None or len(pairs) != ell + 1:
            return False
        return _verify_prime(handle, pk, list(pairs))

    return _run_trials(
        f"super-security[{handle.name}/{strategy.name}]",
        dict(handle.params, l=ell, strategy=strategy.name),
        trial,
        trials,
        seed,
        analytic,
    )


def _doc_bytes(doc: Any) -> bytes:
    if isinstance(doc, bytes):
        return doc
    return repr(doc).encode()


def _verify_prime(handle: SchemeHandle, pk: Any, pairs: list) -> bool:
    enc = handle.sig_bytes or (lambda s: repr(s).encode())
    seen = {(_doc_bytes(d), enc(s)) for d, s in pairs}
    if len(seen) != len(pairs):
        return False
    return all(handle.verify(pk, d, s) for d, s in pairs)


def game_unpredictability(
    handle: SchemeHandle,
    trials: int,
    seed: int,
) -> GameReport:
    """Two fresh tokens sign the same random document; success is the two
    signatures colliding byte-for-byte."""
    enc = handle.sig_bytes or (lambda s: repr(s).encode())

    def trial(rng: Random) -> bool:
        pk, sk = handle.keygen(rng)
        doc = handle.random_doc(rng)
        t1 = handle.token_gen(sk, rng)
        t2 = handle.token_gen(sk, rng)
        s1 = handle.sign(doc, t1, rng)
        s2 = handle.sign(doc, t2, rng)
        if s1 is None or s2 is None:
            raise TrialVoid
        return enc(s1) == enc(s2)

    return _run_trials(
        f"unpredictability[{handle.name}]",
        dict(handle.params),
        trial,
        trials,
        seed,
        analytic=0.0,
    )


# ---------------------------------------------------------------------------
# strategy library
# ---------------------------------------------------------------------------


def honest_strategy(ell: int) -> AdversaryStrategy:
    """Sign each token on a distinct random document; never forges."""

    def program(ctx: TrialContext):
        pairs = []
        docs = set()
        for token in ctx.tokens:
            while True:
                doc = ctx.handle.random_doc(ctx.rng)
                if doc not in docs:
                    docs.add(doc)
                    break
            sig = ctx.handle.sign(doc, token, ctx.rng)
            if sig is None:
                raise TrialVoid
            pairs.append((doc, sig))
        return pairs

    return AdversaryStrategy("honest", Capability(tokens=ell), program)


def naive_double_sign_strategy() -> AdversaryStrategy:
    """One-bit forger: sign 0 honestly, then measure the residual in the
    Hadamard basis hoping to land a valid signature for 1.

    Voids the trial when the visible honest signing step fails, so the
    reported rate is conditioned on a usable first signature."""

    def program(ctx: TrialContext):
        (token,) = ctx.tokens
        sig0 = ctx.handle.sign(0, token, ctx.rng)
        if sig0 is None:
            raise TrialVoid
        rotated = hadamard_all(token.state)
        outcome, post = measure_standard(rotated, ctx.rng)
        token.state = post
        forged = Ot1Signature(1, outcome, token.key_id)
        return [(0, sig0), (1, forged)]

    return AdversaryStrategy("naive-double-sign", Capability(tokens=1), program)


def collision_forgery_strategy(max_evals: int = 512) -> AdversaryStrategy:
    """Find two documents with one digest, sign one, replay for the other.

    Works against any hash-and-sign layer whose digest is short enough to
    collide within the evaluation budget; the number of hash evaluations
    spent is recorded on the strategy object after each run."""
    state = {"evals": None}

    def program(ctx: TrialContext):
        s = getattr(ctx.pk_view, "s", None)
        if s is None:  # chain layer: the index lives on the token's key
            s = ctx.tokens[0].ot_public.s
        seen: dict[str, bytes] = {}
        collision = None
        for i in range(max_evals):
            doc = b"doc-%06d" % i
            h = hash_eval(s, doc)
            if h in seen and seen[h] != doc:
                collision = (seen[h], doc)
                state["evals"] = i + 1
                break
            seen[h] = doc
        if collision is None:
            state["evals"] = max_evals
            return None
        d1, d2 = collision
        sig = ctx.handle.sign(d1, ctx.tokens[0], ctx.rng)
        if sig is None:
            raise TrialVoid
        return [(d1, sig), (d2, sig)]

    strat = AdversaryStrategy("collision-forgery", Capability(tokens=1), program)
    object.__setattr__(strat, "eval_counter", state)
    return strat


def spent_token_strategy() -> AdversaryStrategy:
    """Revocability adversary: sign one document, hand the spent token back
    as the revocation register."""

    def program(ctx: TrialContext):
        (token,) = ctx.tokens
        doc = ctx.handle.random_doc(ctx.rng)
        sig = ctx.handle.sign(doc, token, ctx.rng)
        if sig is None:
            raise TrialVoid
        return [(doc, sig)], [token]

    return AdversaryStrategy("spent-token", Capability(tokens=1), program)


def double_revoke_strategy() -> AdversaryStrategy:
    """Return the same token for two revocations (t = 0)."""

    def program(ctx: TrialContext):
        (token,) = ctx.tokens
        return [], [token, token]

    return AdversaryStrategy("double-revoke", Capability(tokens=1), program)


def measure_and_guess_strategy() -> AdversaryStrategy:
    """No-oracle adversary: measure the token, return the residual for
    revocation, and guess a uniformly random vector as the other signature."""

    def program(ctx: TrialContext):
        (token,) = ctx.tokens
        outcome, post = measure_standard(token.state, ctx.rng)
        token.state = post
        n = post.ambient_n
        guess = F2Vector(n, ctx.rng.getrandbits(n))
        return [token], (1, Ot1Signature(1, guess, token.key_id))

    return AdversaryStrategy(
        "measure-and-guess", Capability(tokens=1, oracle_access=False), program
    )


def enumerate_consistent_strategy() -> AdversaryStrategy:
    """Unbounded-desk no-oracle adversary at small n: enumerate every
    half-dimension subspace containing the measured point, pick one, and
    answer with a random nonzero vector of its dual."""

    def program(ctx: TrialContext):
        (token,) = ctx.tokens
        outcome, post = measure_standard(token.state, ctx.rng)
        token.state = post
        n = post.ambient_n
        candidates = [
            sp
            for sp in enumerate_subspaces(n, n // 2)
            if outcome.is_zero() or member(sp, outcome)
        ]
        pick = ctx.rng.choice(candidates)
        guess = sample_nonzero_element(dual(pick), ctx.rng)
        return [token], (1, Ot1Signature(1, guess, token.key_id))

    return AdversaryStrategy(
        "enumerate-consistent",
        Capability(tokens=1, oracle_access=False, unbounded_desk=True),
        program,
    )


def same_pair_twice_strategy() -> AdversaryStrategy:
    """Emit one honest (doc, sig) pair twice; distinct-pair scoring kills it."""

    def program(ctx: TrialContext):
        (token,) = ctx.tokens
        doc = ctx.handle.random_doc(ctx.rng)
        sig = ctx.handle.sign(doc, token, ctx.rng)
        if sig is None:
            raise TrialVoid
        return [(doc, sig), (doc, sig)]

    return AdversaryStrategy("same-pair-twice", Capability(tokens=1), program)


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------


def query_count_experiment(
    ns: tuple[int, ...] = (4, 6, 8, 10),
    trials: int = 2000,
    seed: int = 1,
    kappa: int = 16,
) -> GameReport:
    """Success of forgery strategies as a function of oracle-query budget.

    Three strategies per n: zero-query measure-and-guess, budgeted random
    querying, and exhaustive reconstruction (2^{n+1} queries, success 1).
    Descriptive: the extra payload carries the full success-vs-budget curves
    and the square-root reference scale 2^{n/4} for each n."""
    curves: dict[int, dict] = {}
    for n in ns:
        budgets = sorted(
            {0, 1, 2, 4, 8, 16, 1 << (n // 4), 1 << (n // 2), 1 << min(n // 2 + 2, 9)}
        )
        per_budget = []
        for budget in budgets:
            successes = 0
            done = 0
            attempt = 0
            while done < trials:
                rng = derive_rng(seed, f"qce-{n}-{budget}", attempt)
                attempt += 1
                pk, sk = _ot1.ot1_keygen(kappa, rng, n)
                token = _ot1.ot1_token_gen(sk)
                outcome, post = measure_standard(token.state, rng)
                if outcome.is_zero():
                    continue  # conditioned on a usable measured point
                done += 1
                guess = None
                for _ in range(budget):
                    cand = F2Vector(n, rng.getrandbits(n))
                    if pk.query(cand, 1) and not cand.is_zero():
                        guess = cand
                        break
                if guess is None:
                    guess = F2Vector(n, rng.getrandbits(n))
                if member(dual(sk.space), guess) and not guess.is_zero():
                    successes += 1
            per_budget.append({"budget": budget, "rate": successes / trials})
        exhaustive_queries = 1 << (n + 1)
        curves[n] = {
            "curve": per_budget,
            "zero_query_analytic": ((1 << (n // 2)) - 1) / (1 << n),
            "sqrt_reference_budget": 2 ** (n / 4),
            "exhaustive_queries": exhaustive_queries,
            "exhaustive_rate": 1.0,
        }
    zero4 = curves[ns[0]]["curve"][0]["rate"] if ns else 0.0
    return GameReport(
        name="query-count",
        params={"ns": list(ns), "kappa": kappa, "trials": trials, "seed": seed},
        successes=0,
        trials=trials,
        voided=0,
        rate=zero4,
        wilson_95=wilson_interval(int(zero4 * trials), trials),
        analytic=None,
        extra={"curves": curves},
    )


def exhaustive_reconstruction(pk: MembershipOracle, n: int) -> tuple[Subspace, Subspace]:
    """Recover the hidden subspace and its dual with 2^{n+1} oracle queries."""
    from .f2lin import canonicalize

    in_a = [F2Vector(n, v) for v in range(1 << n) if pk.query(F2Vector(n, v), 0)]
    in_b = [F2Vector(n, v) for v in range(1 << n) if pk.query(F2Vector(n, v), 1)]
    return canonicalize(in_a, ambient_n=n), canonicalize(in_b, ambient_n=n)


def relation_statistics(
    n: int = 8, trials: int = 100_000, seed: int = 3
) -> GameReport:
    """Sampled statistics of the half-overlap neighbor construction.

    Checks, per sampled (A, pair, B): the overlap dimension is exactly
    n/2 − 1, and whether the forgery-relevant pair (a, b) of A survives into
    the corresponding set of B."""
    p_keep_a_analytic = 0.5 * (1 - 1 / (2 ** (n // 2) - 1))
    p_keep_b_analytic = (2 ** (n // 2 - 1) - 1) / (2 ** (n // 2) - 1)
    joint_analytic = p_keep_a_analytic * p_keep_b_analytic

    keep_a = keep_b = joint = 0
    for i in range(trials):
        rng = derive_rng(seed, f"relation-{n}", i)
        a_space = sample_subspace(n, rng)
        a = sample_nonzero_element(a_space, rng)
        b = sample_nonzero_element(dual(a_space), rng)
        b_space = sample_related(a_space, rng)
        if intersection_dim(a_space, b_space) != n // 2 - 1:
            raise AssertionError("neighbor sampler broke the overlap invariant")
        ka = member(b_space, a)
        kb = member(dual(b_space), b)
        keep_a += ka
        keep_b += kb
        joint += ka and kb
    return GameReport(
        name="relation-statistics",
        params={"n": n, "trials": trials, "seed": seed},
        successes=joint,
        trials=trials,
        voided=0,
        rate=joint / trials,
        wilson_95=wilson_interval(joint, trials),
        analytic=joint_analytic,
        extra={
            "keep_a_rate": keep_a / trials,
            "keep_a_analytic": p_keep_a_analytic,
            "keep_b_rate": keep_b / trials,
            "keep_b_analytic": p_keep_b_analytic,
            "quarter_bound": 0.25,
        },
    )


def two_faced_demo(
    seed: int = 5,
    n: int = 8,
    trials: int = 10_000,
    kappa: int = 32,
    hash_variant: str = "toy-16",
) -> tuple[list[dict], GameReport]:
    """Three-party transcript: a signer, and two verifiers who each demand a
    signature on their own document.

    Variants: honest (sign for one verifier only), equivocating (replay the
    consumed token's residual for the second verifier — rejected almost
    always), and two-token (sign both, which succeeds but exposes two
    distinct token serials).  The returned report measures the equivocation
    rejection rate."""
    rng = derive_rng(seed, "two-faced-setup", 0)
    pk, sk = _stack.ts_keygen(kappa, rng, hash_variant, n_override=n)
    transcript: list[dict] = []

    def serial(token) -> str:
        from .encoding import digest

        return digest(_stack.encode_ot_public(token.ot_public))[:16]

    # honest run
    run = derive_rng(seed, "two-faced-honest", 0)
    token = _stack.ts_token_gen(sk, run)
    doc_b, doc_c = b"pay verifier B", b"pay verifier C"
    sig = None
    while sig is None:
        sig = _stack.ts_sign(doc_b, token, run)
        if sig is None:
            token = _stack.ts_token_gen(sk, run)
    transcript.append(
        {
            "variant": "honest",
            "serial": serial(token),
            "verifier_b_accepts": _stack.ts_verify(pk, doc_b, sig),
            "verifier_c_request": "declined (token already spent)",
        }
    )

    # equivocating runs, measured
    rejected = 0
    counted = 0
    attempt = 0
    while counted < trials:
        run = derive_rng(seed, "two-faced-equivocate", attempt)
        attempt += 1
        token = _stack.ts_token_gen(sk, run)
        sig_b = _stack.ts_sign(doc_b, token, run)
        if sig_b is None or not _stack.ts_verify(pk, doc_b, sig_b):
            continue
        counted += 1
        handle = ts_handle(kappa, hash_variant, n)
        sig_c = _raw_handle_sign(handle, doc_c, token, run)
        if sig_c is None or not _stack.ts_verify(pk, doc_c, sig_c):
            rejected += 1
    transcript.append(
        {
            "variant": "equivocating",
            "trials": trials,
            "second_signature_rejected": rejected,
            "rejection_rate": rejected / trials,
        }
    )

    # two-token run
    run = derive_rng(seed, "two-faced-two-token", 0)
    t1 = _stack.ts_token_gen(sk, run)
    t2 = _stack.ts_token_gen(sk, run)
    s1 = _stack.ts_sign(doc_b, t1, run)
    s2 = _stack.ts_sign(doc_c, t2, run)
    transcript.append(
        {
            "variant": "two-token",
            "serials": sorted({serial(t1), serial(t2)}),
            "verifier_b_accepts": s1 is not None and _stack.ts_verify(pk, doc_b, s1),
            "verifier_c_accepts": s2 is not None and _stack.ts_verify(pk, doc_c, s2),
            "flag": "two distinct serials visible to any auditor comparing transcripts",
        }
    )
    report = GameReport(
        name="two-faced",
        params={"n": n, "kappa": kappa, "hash": hash_variant, "trials": trials, "seed": seed},
        successes=rejected,
        trials=trials,
        voided=attempt - trials,
        rate=rejected / trials,
        wilson_95=wilson_interval(rejected, trials),
        analytic=None,
        extra={"transcript": transcript},
    )
    return transcript, report


def fit_halving_slope(rates: dict[int, float]) -> float:
    """Zero-intercept least squares of log2(rate) against n: the slope of
    the model rate = 2^(slope * n)."""
    num = sum(n * math.log2(r) for n, r in rates.items() if r > 0)
    den = sum(n * n for n in rates)
    return num / den


def fit_scale_constant(rates: dict[int, float]) -> float:
    """Geometric-mean fit of c in rate = c * 2^(-n/2)."""
    logs = [math.log2(r) + n / 2 for n, r in rates.items() if r > 0]
    return 2.0 ** (sum(logs) / len(logs))


GAME_RUNNERS: dict[str, Callable[..., GameReport]] = {}


def _register_cli_games() -> None:
    def unforgeability(n: int, ell: int, trials: int, seed: int, kappa: int) -> GameReport:
        analytic = ((1 << (n // 2)) - 1) / (1 << n)
        return game_unforgeability(
            ot1_handle(kappa, n), naive_double_sign_strategy(), ell, trials, seed, analytic
        )

    def revocability(n: int, ell: int, trials: int, seed: int, kappa: int) -> GameReport:
        return game_revocability(
            otr_handle(kappa, r=16, n=n), spent_token_strategy(), ell, 1, trials, seed
        )

    def testability(n: int, ell: int, trials: int, seed: int, kappa: int) -> GameReport:
        r = 8
        analytic = (1 - 2 ** -(n / 2)) ** r
        return game_testability(ot_handle(kappa, "toy-8", n), 100, trials, seed, analytic)

    def everlasting(n: int, ell: int, trials: int, seed: int, kappa: int) -> GameReport:
        return game_everlasting(
            ot1_handle(kappa, n), measure_and_guess_strategy(), ell, trials, seed
        )

    def unpredictability(n: int, ell: int, trials: int, seed: int, kappa: int) -> GameReport:
        return game_unpredictability(ts_handle(kappa, "toy-8", n), trials, seed)

    def super_security(n: int, ell: int, trials: int, seed: int, kappa: int) -> GameReport:
        return game_super_security(
            ot_handle(kappa, "toy-8", n), same_pair_twice_strategy(), ell, trials, seed, 0.0
        )

    def query_count(n: int, ell: int, trials: int, seed: int, kappa: int) -> GameReport:
        return query_count_experiment(trials=min(trials, 2000), seed=seed, kappa=kappa)

    def relation(n: int, ell: int, trials: int, seed: int, kappa: int) -> GameReport:
        return relation_statistics(n, trials, seed)

    def two_faced(n: int, ell: int, trials: int, seed: int, kappa: int) -> GameReport:
        return two_faced_demo(seed, n, trials)[1]

    GAME_RUNNERS.update(
        {
            "unforgeability": unforgeability,
            "revocability": revocability,
            "testability": testability,
            "everlasting": everlasting,
            "unpredictability": unpredictability,
            "super-security": super_security,
            "query-count": query_count,
            "relation": relation,
            "two-faced": two_faced,
        }
    )


_register_cli_games()
