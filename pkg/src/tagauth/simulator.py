"""Deterministic session orchestration with fault injection and forcing hooks.

The channel is an in-process message pass.  What an eavesdropper would see
goes into Transcript; every secret (states, nonces, session keys) goes
into GroundTruth; the two never share a field, which is what lets the
attack modules stay provably passive.

Determinism contract: (initial states, config, seed) fully determine every
transcript, ground-truth record and summary.  Nonces come from a seeded
Mersenne Twister (stdlib ``random.Random``) behind NonceStream; per
session the draw order is fixed (drop decision, forced keys, nonces).

Per-tag session order is total: a campaign drives one tag sequentially,
which is what consecutive-transcript attacks rely on.  Campaigns against
distinct tags are independent and may run in separate processes.
"""

import json
import os
import random
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Iterator

from . import attacks, sasi
from . import gossamer
from .gossamer import Variant
from .store import MATCH_NEXT, Store, TagRecordRow
from .word96 import WIDTH, Word96, from_hex, to_hex

HELLO_BITS = 40  # 5-byte hello
CHALLENGE_BITS = 3 * WIDTH  # A||B||C


class Protocol(str, Enum):
    SASI = "sasi"
    GOSSAMER = "gossamer"
    GOSSAMER_MOD = "gossamer-mod"


class Outcome(str, Enum):
    MUTUAL_SUCCESS = "mutual_success"
    # the tag refused A||B||C, i.e. the reader failed to authenticate
    READER_REJECTED = "reader_rejected"
    # the reader refused D, i.e. the tag failed to authenticate
    TAG_REJECTED = "tag_rejected"
    D_DROPPED = "d_dropped"
    LOOKUP_FAILED = "lookup_failed"


class NonceMode(str, Enum):
    RANDOM = "random"
    EXACT_ZERO = "zero"
    ZERO_MOD_96 = "zero-mod96"


class KeyMode(str, Enum):
    AS_STORED = "as-stored"
    EXACT_ZERO = "zero"
    ZERO_MOD_96 = "zero-mod96"


@dataclass
class Transcript:
    """One session as seen from the air: pseudonym, messages, outcome, bits.

    ``d`` is None when the final message never crossed the channel; a and
    b and c are None when identification failed before the challenge.
    Contains no secret state by construction.
    """

    variant: str
    session_index: int
    announced_ids: Word96
    a: Word96 | None
    b: Word96 | None
    c: Word96 | None
    d: Word96 | None
    outcome: Outcome
    bit_cost: int


@dataclass
class StateSnapshot:
    """Both (ids, k1, k2) tuples of one side at one instant."""

    ids: Word96
    k1: Word96
    k2: Word96
    ids_old: Word96
    k1_old: Word96
    k2_old: Word96


@dataclass
class GroundTruth:
    """Secrets of one session, recorded for scoring and invariant checks only.

    For SASI sessions k1_star/k2_star hold the session keys K1'/K2' and the
    derived-nonce fields stay None.  Internals are None when the session
    never reached the challenge (or was a replay with no fresh derivation).
    """

    session_index: int
    id: Word96
    tag_pre: StateSnapshot
    tag_post: StateSnapshot
    reader_pre: StateSnapshot | None
    reader_post: StateSnapshot | None
    n1: Word96 | None = None
    n2: Word96 | None = None
    n3: Word96 | None = None
    n1p: Word96 | None = None
    n2p: Word96 | None = None
    k1_star: Word96 | None = None
    k2_star: Word96 | None = None


@dataclass
class Forcing:
    """Per-session experiment hooks.

    Key forcing overwrites K1/K2 in both tuples on both sides before the
    session and is recorded in the manifest, so forced campaigns replay
    exactly.  replay_abc re-sends a captured challenge to the genuine tag
    (no reader involved; outcome is reader_rejected if the tag balks, else
    d_dropped since the emitted D goes nowhere).  replay_d answers a real
    reader with a captured D in place of the genuine tag.
    """

    nonce_mode: NonceMode = NonceMode.RANDOM
    key_mode: KeyMode = KeyMode.AS_STORED
    drop_d: bool = False
    replay_abc: Transcript | None = None
    replay_d: Transcript | None = None


class NonceStream:
    """Seeded 96-bit word stream (Mersenne Twister underneath).

    Cryptographic quality is irrelevant here; what matters is documented
    reproducibility and even coverage of residues mod 96, both of which
    the stdlib generator provides.
    """

    _MULTIPLES_OF_96 = (1 << WIDTH) // 96 + 1

    def __init__(self, seed: int) -> None:
        self._rng = random.Random(seed)

    def word(self) -> Word96:
        return self._rng.getrandbits(WIDTH)

    def multiple_of_96(self) -> Word96:
        """Uniform over the multiples of 96 in [0, 2**96)."""
        return self._rng.randrange(self._MULTIPLES_OF_96) * 96

    def chance(self, probability: float) -> bool:
        return self._rng.random() < probability


@dataclass
class SimTag:
    """A simulated tag: label, protocol, and its secret state machine."""

    label: str
    protocol: Protocol
    state: object  # sasi.SasiTagState | gossamer.GossamerTagState


def variant_of(protocol: Protocol) -> Variant:
    if protocol is Protocol.GOSSAMER:
        return Variant.ORIGINAL
    if protocol is Protocol.GOSSAMER_MOD:
        return Variant.MODIFIED
    raise ValueError(f"{protocol} has no gossamer variant")


def make_tag(label: str, protocol: Protocol, id_: Word96, ids: Word96,
             k1: Word96, k2: Word96) -> tuple[SimTag, TagRecordRow]:
    """A freshly provisioned tag and its backend row, both tuples equal."""
    if protocol is Protocol.SASI:
        state = sasi.SasiTagState(id_, ids, k1, k2, ids, k1, k2)
    else:
        state = gossamer.GossamerTagState(id_, ids, k1, k2, ids, k1, k2)
    row = TagRecordRow(label, protocol.value, id_, ids, k1, k2, ids, k1, k2)
    return SimTag(label, protocol, state), row


def provision(count: int, protocol: Protocol, seed: int) -> tuple[dict[str, SimTag], Store]:
    """Create ``count`` tags with random ID/IDS/K1/K2, plus their store."""
    rng = NonceStream(seed)
    tags: dict[str, SimTag] = {}
    store = Store()
    for index in range(count):
        label = f"tag-{index:03d}"
        tag, row = make_tag(label, protocol,
                            rng.word(), rng.word(), rng.word(), rng.word())
        tags[label] = tag
        store.add(row)
    return tags, store


# -- protocol dispatch -------------------------------------------------------

def _announce(tag: SimTag, retry: bool) -> Word96:
    if tag.protocol is Protocol.SASI:
        return sasi.tag_announce(tag.state, retry)
    return gossamer.tag_announce(tag.state, retry)


def _begin(protocol: Protocol, ids: Word96, k1: Word96, k2: Word96,
           id_: Word96, n1: Word96, n2: Word96):
    if protocol is Protocol.SASI:
        return sasi.reader_begin(ids, k1, k2, id_, n1, n2)
    return gossamer.reader_begin(ids, k1, k2, id_, n1, n2, variant_of(protocol))


def _respond(tag: SimTag, a: Word96, b: Word96, c: Word96) -> Word96 | None:
    if tag.protocol is Protocol.SASI:
        return sasi.tag_respond(tag.state, a, b, c)
    return gossamer.tag_respond(tag.state, a, b, c, variant_of(tag.protocol))


def _finish(protocol: Protocol, pending, d: Word96) -> bool:
    if protocol is Protocol.SASI:
        return sasi.reader_finish(pending, d)
    return gossamer.reader_finish(pending, d)


def _staged(pending) -> tuple[Word96, Word96, Word96]:
    return pending.ids_next, pending.k1_next, pending.k2_next


def _snapshot_state(state) -> StateSnapshot:
    return StateSnapshot(state.ids, state.k1, state.k2,
                         state.ids_old, state.k1_old, state.k2_old)


def _snapshot_row(row: TagRecordRow | None) -> StateSnapshot | None:
    if row is None:
        return None
    return StateSnapshot(row.ids, row.k1, row.k2,
                         row.ids_old, row.k1_old, row.k2_old)


def _internals(protocol: Protocol, pending) -> dict:
    if pending is None:
        return {}
    if protocol is Protocol.SASI:
        return dict(n1=pending.n1, n2=pending.n2,
                    k1_star=pending.k1_next, k2_star=pending.k2_next)
    return dict(n1=pending.n1, n2=pending.n2, n3=pending.n3,
                n1p=pending.n1p, n2p=pending.n2p,
                k1_star=pending.k1s, k2_star=pending.k2s)


def _bit_cost(challenge_sent: bool, d_sent: bool) -> int:
    bits = HELLO_BITS + WIDTH
    if challenge_sent:
        bits += CHALLENGE_BITS
    if d_sent:
        bits += WIDTH
    return bits


# -- session and campaign ----------------------------------------------------

def _draw_nonces(forcing: Forcing, rng: NonceStream) -> tuple[Word96, Word96]:
    if forcing.nonce_mode is NonceMode.EXACT_ZERO:
        return 0, 0
    if forcing.nonce_mode is NonceMode.ZERO_MOD_96:
        return rng.multiple_of_96(), rng.multiple_of_96()
    return rng.word(), rng.word()


def _force_keys(forcing: Forcing, rng: NonceStream, state, row) -> None:
    if forcing.key_mode is KeyMode.AS_STORED:
        return
    if forcing.key_mode is KeyMode.EXACT_ZERO:
        k1f = k2f = 0
    else:
        k1f, k2f = rng.multiple_of_96(), rng.multiple_of_96()
    state.k1 = state.k1_old = k1f
    state.k2 = state.k2_old = k2f
    if row is not None:
        row.k1 = row.k1_old = k1f
        row.k2 = row.k2_old = k2f


def run_session(tag: SimTag, store: Store, forcing: Forcing, rng: NonceStream,
                session_index: int = 0) -> tuple[Transcript, GroundTruth]:
    """One identification -> challenge -> response -> update exchange.

    Honors every forcing hook; commits per protocol rules (tag on emitting
    D, reader on verifying it).  A pseudonym that matches neither tuple in
    the store ends the session with the lookup_failed outcome.
    """
    protocol = tag.protocol
    mirror = store.rows.get(tag.label)
    _force_keys(forcing, rng, tag.state, mirror)
    tag_pre = _snapshot_state(tag.state)
    reader_pre = _snapshot_row(mirror)

    def done(transcript: Transcript, pending=None) -> tuple[Transcript, GroundTruth]:
        truth = GroundTruth(session_index, tag.state.id,
                            tag_pre, _snapshot_state(tag.state),
                            reader_pre, _snapshot_row(mirror),
                            **_internals(protocol, pending))
        return transcript, truth

    if forcing.replay_abc is not None:
        captured = forcing.replay_abc
        announced = _announce(tag, retry=False)
        if announced != captured.announced_ids:
            announced = _announce(tag, retry=True)
        d = _respond(tag, captured.a, captured.b, captured.c)
        outcome = Outcome.READER_REJECTED if d is None else Outcome.D_DROPPED
        return done(Transcript(protocol.value, session_index, announced,
                               captured.a, captured.b, captured.c, d, outcome,
                               _bit_cost(True, d is not None)))

    n1, n2 = _draw_nonces(forcing, rng)

    if forcing.replay_d is not None:
        captured = forcing.replay_d
        announced = captured.announced_ids
        hit = store.lookup(announced, protocol.value)
        if hit is None:
            return done(Transcript(protocol.value, session_index, announced,
                                   None, None, None, None, Outcome.LOOKUP_FAILED,
                                   _bit_cost(False, False)))
        row, side = hit
        ids, k1, k2 = ((row.ids, row.k1, row.k2) if side == MATCH_NEXT
                       else (row.ids_old, row.k1_old, row.k2_old))
        a, b, c, pending = _begin(protocol, ids, k1, k2, row.id, n1, n2)
        if _finish(protocol, pending, captured.d):
            store.commit(row.tag_label, _staged(pending), side)
            outcome = Outcome.MUTUAL_SUCCESS
        else:
            outcome = Outcome.TAG_REJECTED
        return done(Transcript(protocol.value, session_index, announced,
                               a, b, c, captured.d, outcome, _bit_cost(True, True)),
                    pending)

    announced = _announce(tag, retry=False)
    hit = store.lookup(announced, protocol.value)
    if hit is None:
        announced = _announce(tag, retry=True)
        hit = store.lookup(announced, protocol.value)
    if hit is None:
        return done(Transcript(protocol.value, session_index, announced,
                               None, None, None, None, Outcome.LOOKUP_FAILED,
                               _bit_cost(False, False)))

    row, side = hit
    ids, k1, k2 = ((row.ids, row.k1, row.k2) if side == MATCH_NEXT
                   else (row.ids_old, row.k1_old, row.k2_old))
    a, b, c, pending = _begin(protocol, ids, k1, k2, row.id, n1, n2)
    emitted = _respond(tag, a, b, c)
    if emitted is None:
        d, outcome = None, Outcome.READER_REJECTED
    elif forcing.drop_d:
        d, outcome = None, Outcome.D_DROPPED
    elif _finish(protocol, pending, emitted):
        store.commit(row.tag_label, _staged(pending), side)
        d, outcome = emitted, Outcome.MUTUAL_SUCCESS
    else:
        d, outcome = emitted, Outcome.TAG_REJECTED
    return done(Transcript(protocol.value, session_index, announced,
                           a, b, c, d, outcome, _bit_cost(True, d is not None)),
                pending)


@dataclass
class CampaignConfig:
    protocol: Protocol
    sessions: int
    seed: int
    nonce_mode: NonceMode = NonceMode.RANDOM
    key_mode: KeyMode = KeyMode.AS_STORED
    drop_d_rate: float = 0.0


@dataclass
class CampaignResult:
    transcripts: list[Transcript]
    ground_truths: list[GroundTruth]
    summary: dict


def iter_campaign(tag: SimTag, store: Store,
                  config: CampaignConfig) -> Iterator[tuple[Transcript, GroundTruth]]:
    """Lazily run the campaign's sessions in order against one tag."""
    rng = NonceStream(config.seed)
    forcing = Forcing(nonce_mode=config.nonce_mode, key_mode=config.key_mode)
    for index in range(config.sessions):
        forcing.drop_d = config.drop_d_rate > 0 and rng.chance(config.drop_d_rate)
        yield run_session(tag, store, forcing, rng, session_index=index)


def run_campaign(tag: SimTag, store: Store, config: CampaignConfig) -> CampaignResult:
    transcripts: list[Transcript] = []
    truths: list[GroundTruth] = []
    for transcript, truth in iter_campaign(tag, store, config):
        transcripts.append(transcript)
        truths.append(truth)
    outcomes = Counter(t.outcome.value for t in transcripts)
    summary = {
        "protocol": config.protocol.value,
        "sessions": config.sessions,
        "seed": config.seed,
        "forcing": {"nonces": config.nonce_mode.value, "keys": config.key_mode.value},
        "drop_d_rate": config.drop_d_rate,
        "outcomes": dict(sorted(outcomes.items())),
        "bits_total": sum(t.bit_cost for t in transcripts),
    }
    return CampaignResult(transcripts, truths, summary)


# -- attack evaluation and scoring -------------------------------------------

def consecutive_success_pairs(transcripts) -> list[tuple]:
    """Adjacent mutually-successful transcripts with contiguous indices.

    This is the detection window the two-transcript attacks assume; an
    intervening failed session changes nothing since nothing updated.
    """
    pairs = []
    for first, second in zip(transcripts, transcripts[1:]):
        if (first.outcome is Outcome.MUTUAL_SUCCESS
                and second.outcome is Outcome.MUTUAL_SUCCESS
                and second.session_index == first.session_index + 1):
            pairs.append((first, second))
    return pairs


def score_verdict(kind: str, verdict: attacks.AttackVerdict, truth: GroundTruth) -> None:
    """Fill in ground_truth_match for a fired verdict (simulator-side only)."""
    if not verdict.fired:
        return
    if kind == "sasi":
        verdict.ground_truth_match = verdict.recovered_id == truth.id % 96
    elif kind == "gossamer-1":
        verdict.ground_truth_match = verdict.recovered_id == truth.id
    elif kind == "gossamer-2":
        rs = verdict.recovered_state
        verdict.ground_truth_match = (
            verdict.recovered_id == truth.id
            and rs.n1 == truth.n1 and rs.n2 == truth.n2 and rs.n3 == truth.n3
            and rs.n1p == truth.n1p and rs.n2p == truth.n2p
            and rs.k1_star == truth.k1_star and rs.k2_star == truth.k2_star
            and rs.next_ids == truth.tag_post.ids
        )
    else:
        raise ValueError(f"unknown attack kind: {kind}")


def evaluate_attack(kind: str, transcripts, ground_truths=None) -> tuple[list[dict], dict]:
    """Run one attack over a transcript stream and summarize the rates.

    Each trial is one consecutive mutually-successful pair.  Returns
    (records, summary); records carry the verdict per trial, and for the
    one-session disclosure also whether its next-pseudonym prediction
    matched the following announcement (a public check).
    """
    pairs = consecutive_success_pairs(transcripts)
    truth_by_session = {t.session_index: t for t in ground_truths or []}
    records: list[dict] = []
    gap_histogram: Counter = Counter()
    confirmed = 0
    scored = 0
    for first, second in pairs:
        prediction_confirmed = None
        if kind == "sasi":
            gap_histogram[attacks.sasi_residue_gap(first)] += 1
            verdict = attacks.sasi_attack(first, second)
        elif kind == "gossamer-1":
            verdict = attacks.gossamer_attack1(first, second)
        elif kind == "gossamer-2":
            verdict = attacks.gossamer_attack2(first)
            prediction_confirmed = bool(
                verdict.fired
                and verdict.recovered_state.next_ids == second.announced_ids)
            confirmed += prediction_confirmed
        else:
            raise ValueError(f"unknown attack kind: {kind}")
        truth = truth_by_session.get(first.session_index)
        if truth is not None:
            scored += 1
            score_verdict(kind, verdict, truth)
        records.append({"session": first.session_index, "verdict": verdict,
                        "prediction_confirmed": prediction_confirmed})
    trials = len(records)
    fired = sum(1 for r in records if r["verdict"].fired)
    matched = sum(1 for r in records if r["verdict"].ground_truth_match)
    summary = {
        "attack": kind,
        "trials": trials,
        "fired": fired,
        "fired_rate": fired / trials if trials else 0.0,
        "scored": scored,
        "matched": matched,
        "match_rate": matched / scored if scored else None,
        "conditional_match_rate": matched / fired if fired and scored else None,
    }
    if kind == "sasi":
        summary["near_miss_histogram"] = {
            str(gap): count for gap, count in sorted(gap_histogram.items())}
    if kind == "gossamer-2":
        summary["prediction_confirmed"] = confirmed
    return records, summary


# -- cost accounting ----------------------------------------------------------

def cost_accounting(variant: str = "gossamer") -> dict:
    """The message and storage bit accounting all three protocols share.

    The identification-plus-challenge figure counts hello + IDS + A||B||C
    only; whether D belongs in the per-session total is a convention, so
    both numbers are reported.
    """
    return {
        "variant": variant,
        "hello_bits": HELLO_BITS,
        "ids_bits": WIDTH,
        "challenge_bits": CHALLENGE_BITS,
        "identification_and_challenge_bits": HELLO_BITS + WIDTH + CHALLENGE_BITS,
        "d_bits": WIDTH,
        "full_session_bits": HELLO_BITS + WIDTH + CHALLENGE_BITS + WIDTH,
        "rewritable_state_bits": 6 * WIDTH,
        "static_id_bits": WIDTH,
        "note": "the 424-bit figure counts hello + IDS + A||B||C only; D adds 96 more",
    }


# -- serialization -------------------------------------------------------------

TAGS_FORMAT = "rfid-tagfleet/1"

_SNAPSHOT_FIELDS = ("ids", "k1", "k2", "ids_old", "k1_old", "k2_old")


def _hex_or_none(value: Word96 | None) -> str | None:
    return None if value is None else to_hex(value)


def _unhex_or_none(value: str | None) -> Word96 | None:
    return None if value is None else from_hex(value)


def transcript_to_dict(t: Transcript) -> dict:
    return {
        "variant": t.variant,
        "session": t.session_index,
        "ids": to_hex(t.announced_ids),
        "a": _hex_or_none(t.a),
        "b": _hex_or_none(t.b),
        "c": _hex_or_none(t.c),
        "d": _hex_or_none(t.d),
        "outcome": t.outcome.value,
        "bits": t.bit_cost,
    }


def transcript_from_dict(data: dict) -> Transcript:
    return Transcript(
        variant=data["variant"],
        session_index=data["session"],
        announced_ids=from_hex(data["ids"]),
        a=_unhex_or_none(data["a"]),
        b=_unhex_or_none(data["b"]),
        c=_unhex_or_none(data["c"]),
        d=_unhex_or_none(data["d"]),
        outcome=Outcome(data["outcome"]),
        bit_cost=data["bits"],
    )


def _snapshot_to_dict(snapshot: StateSnapshot | None) -> dict | None:
    if snapshot is None:
        return None
    return {field: to_hex(getattr(snapshot, field)) for field in _SNAPSHOT_FIELDS}


def _snapshot_from_dict(data: dict | None) -> StateSnapshot | None:
    if data is None:
        return None
    return StateSnapshot(**{field: from_hex(data[field]) for field in _SNAPSHOT_FIELDS})


def ground_truth_to_dict(truth: GroundTruth) -> dict:
    return {
        "session": truth.session_index,
        "id": to_hex(truth.id),
        "n1": _hex_or_none(truth.n1),
        "n2": _hex_or_none(truth.n2),
        "n3": _hex_or_none(truth.n3),
        "n1p": _hex_or_none(truth.n1p),
        "n2p": _hex_or_none(truth.n2p),
        "k1_star": _hex_or_none(truth.k1_star),
        "k2_star": _hex_or_none(truth.k2_star),
        "tag_pre": _snapshot_to_dict(truth.tag_pre),
        "tag_post": _snapshot_to_dict(truth.tag_post),
        "reader_pre": _snapshot_to_dict(truth.reader_pre),
        "reader_post": _snapshot_to_dict(truth.reader_post),
    }


def ground_truth_from_dict(data: dict) -> GroundTruth:
    return GroundTruth(
        session_index=data["session"],
        id=from_hex(data["id"]),
        tag_pre=_snapshot_from_dict(data["tag_pre"]),
        tag_post=_snapshot_from_dict(data["tag_post"]),
        reader_pre=_snapshot_from_dict(data["reader_pre"]),
        reader_post=_snapshot_from_dict(data["reader_post"]),
        n1=_unhex_or_none(data["n1"]),
        n2=_unhex_or_none(data["n2"]),
        n3=_unhex_or_none(data["n3"]),
        n1p=_unhex_or_none(data["n1p"]),
        n2p=_unhex_or_none(data["n2p"]),
        k1_star=_unhex_or_none(data["k1_star"]),
        k2_star=_unhex_or_none(data["k2_star"]),
    )


def save_tags(tags: dict[str, SimTag], path: str) -> None:
    """Persist simulated tag states next to the reader store (atomic)."""
    entries = []
    for label in sorted(tags):
        tag = tags[label]
        state = tag.state
        entries.append({
            "tag_label": label,
            "variant": tag.protocol.value,
            "id": to_hex(state.id),
            "ids": to_hex(state.ids),
            "k1": to_hex(state.k1),
            "k2": to_hex(state.k2),
            "ids_old": to_hex(state.ids_old),
            "k1_old": to_hex(state.k1_old),
            "k2_old": to_hex(state.k2_old),
            "last_announced": state.last_announced,
        })
    payload = {"format": TAGS_FORMAT, "tags": entries}
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    os.replace(tmp, path)


def load_tags(path: str) -> dict[str, SimTag]:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != TAGS_FORMAT:
        raise ValueError(f"{path}: not a {TAGS_FORMAT} file")
    tags: dict[str, SimTag] = {}
    for entry in payload["tags"]:
        protocol = Protocol(entry["variant"])
        words = [from_hex(entry[f]) for f in ("id", "ids", "k1", "k2",
                                              "ids_old", "k1_old", "k2_old")]
        if protocol is Protocol.SASI:
            state = sasi.SasiTagState(*words, last_announced=entry["last_announced"])
        else:
            state = gossamer.GossamerTagState(*words, last_announced=entry["last_announced"])
        tags[entry["tag_label"]] = SimTag(entry["tag_label"], protocol, state)
    return tags
