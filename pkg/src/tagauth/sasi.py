"""SASI mutual authentication (Chien 2007) as tag and reader state machines.

Message and update forms, all over 96-bit words with Rot(x, y) a left
rotation by y mod 96:

    A        = IDS xor K1 xor n1
    B        = (IDS or K2) + n2
    K1'      = Rot(K1 xor n2, K1)
    K2'      = Rot(K2 xor n1, K2)
    C        = (K1 xor K2') + (K2 xor K1')
    D        = (K2' + ID) xor ((K1 xor K2) or K1')
    IDS_next = (IDS + ID) xor (n2 xor K1')

``session_values`` below is the single definition site for all of these.

The tag keeps two (IDS, K1, K2) tuples, the potential-next one and the one
used last, so a lost D never strands it: when the backend does not
recognize the next pseudonym, the tag re-announces the old one.  The tag
commits its update the moment it emits D; the reader commits only after
verifying D.

State objects are plain mutable values; a session touches only its own
tag, so concurrent sessions against distinct tags need no coordination.
"""

from dataclasses import dataclass

from .word96 import Word96, add, or_, rotl, sub, xor

NEXT = "next"
OLD = "old"


@dataclass
class SasiTagState:
    """Tag-side secrets: immutable id plus next and old (ids, k1, k2) tuples."""

    id: Word96
    ids: Word96
    k1: Word96
    k2: Word96
    ids_old: Word96
    k1_old: Word96
    k2_old: Word96
    last_announced: str = NEXT


@dataclass
class SessionValues:
    """Everything one session derives; doubles as the reader's pending context.

    ``d`` is the value the reader must receive; (ids_next, k1_next, k2_next)
    is the staged update, committed by each side at its own point in time.
    """

    n1: Word96
    n2: Word96
    k1_next: Word96
    k2_next: Word96
    a: Word96
    b: Word96
    c: Word96
    d: Word96
    ids_next: Word96


def session_values(ids: Word96, k1: Word96, k2: Word96, id_: Word96,
                   n1: Word96, n2: Word96) -> SessionValues:
    """Evaluate the SASI session equations for one (tuple, nonce-pair)."""
    k1n = rotl(xor(k1, n2), k1)
    k2n = rotl(xor(k2, n1), k2)
    a = xor(xor(ids, k1), n1)
    b = add(or_(ids, k2), n2)
    c = add(xor(k1, k2n), xor(k2, k1n))
    d = xor(add(k2n, id_), or_(xor(k1, k2), k1n))
    ids_next = xor(add(ids, id_), xor(n2, k1n))
    return SessionValues(n1, n2, k1n, k2n, a, b, c, d, ids_next)


def tag_announce(tag: SasiTagState, retry: bool = False) -> Word96:
    """Answer an interrogation: next-tuple IDS first, old-tuple IDS on retry."""
    tag.last_announced = OLD if retry else NEXT
    return tag.ids_old if retry else tag.ids


def active_tuple(tag: SasiTagState) -> tuple[Word96, Word96, Word96]:
    """The (ids, k1, k2) the tag announced for the current session."""
    if tag.last_announced == OLD:
        return tag.ids_old, tag.k1_old, tag.k2_old
    return tag.ids, tag.k1, tag.k2


def reader_begin(ids: Word96, k1: Word96, k2: Word96, id_: Word96,
                 n1: Word96, n2: Word96) -> tuple[Word96, Word96, Word96, SessionValues]:
    """Build A||B||C for the matched record and stage the update.

    Returns (a, b, c, pending); pending carries the expected D and the
    staged next tuple for reader_finish.
    """
    vals = session_values(ids, k1, k2, id_, n1, n2)
    return vals.a, vals.b, vals.c, vals


def tag_respond(tag: SasiTagState, a: Word96, b: Word96, c: Word96) -> Word96 | None:
    """Authenticate the reader from A||B||C; emit D and commit, or reject.

    Nonces are recovered exactly by inverting A and B.  Returns None with
    the state untouched when the locally rebuilt C disagrees (wrong keys
    or a corrupted message).
    """
    ids, k1, k2 = active_tuple(tag)
    n1 = xor(xor(a, ids), k1)
    n2 = sub(b, or_(ids, k2))
    vals = session_values(ids, k1, k2, tag.id, n1, n2)
    if vals.c != c:
        return None
    tag.ids_old, tag.k1_old, tag.k2_old = ids, k1, k2
    tag.ids, tag.k1, tag.k2 = vals.ids_next, vals.k1_next, vals.k2_next
    return vals.d


def reader_finish(pending: SessionValues, d: Word96) -> bool:
    """True iff D proves the tag ran this session; the caller then commits."""
    return d == pending.d
