"""96-bit modular arithmetic for ultralightweight RFID authentication.

Every protocol quantity (pseudonyms, keys, nonces, messages, the additive
constant) is an unsigned 96-bit word, matching the EPC convention of 96-bit
identifiers.  Words are plain Python ints in [0, 2**96); all arithmetic
wraps modulo 2**96 and never overflows or saturates.  The canonical text
form is exactly 24 lowercase hex digits, most significant nibble first.

All functions are pure; they can be called from any number of threads with
no coordination.
"""

WIDTH = 96
MASK = (1 << WIDTH) - 1

# First 24 hex digits of pi, kept as a literal per the protocol definition
# (never recomputed from the real number).
PI = 0x3243F6A8885A308D313198A2

MIXBITS_ROUNDS = 32

# Alias used in signatures package-wide; a word is just an int in range.
Word96 = int


def add(a: Word96, b: Word96) -> Word96:
    """(a + b) mod 2**96."""
    return (a + b) & MASK


def sub(a: Word96, b: Word96) -> Word96:
    """(a - b) mod 2**96; inverse of add."""
    return (a - b) & MASK


def xor(a: Word96, b: Word96) -> Word96:
    return a ^ b


def or_(a: Word96, b: Word96) -> Word96:
    return a | b


def and_(a: Word96, b: Word96) -> Word96:
    return a & b


def rotl(x: Word96, y: Word96) -> Word96:
    """Circular left shift of x by (y mod 96) bit positions.

    The amount is reduced modulo 96 on the full value of y, so
    rotl(x, y) == rotl(x, y + 96k) for any k.  Bijective in x for fixed y.
    """
    n = y % WIDTH
    return ((x << n) | (x >> (WIDTH - n))) & MASK


def rotr(x: Word96, y: Word96) -> Word96:
    """Circular right shift; rotr(rotl(x, y), y) == x."""
    n = y % WIDTH
    return ((x >> n) | (x << (WIDTH - n))) & MASK


def mixbits_original(x: Word96, y: Word96) -> Word96:
    """Shift-based MixBits: 32 rounds of Z <- (Z >> 1) + Z + Z + Y.

    Addition wraps mod 2**96 every round; >> is a logical one-bit shift.
    Note mixbits_original(0, 0) == 0, the fixed point the zero-nonce
    attack rides on.
    """
    z = x
    for _ in range(MIXBITS_ROUNDS):
        z = ((z >> 1) + z + z + y) & MASK
    return z


def mixbits_modified(x: Word96, y: Word96) -> Word96:
    """Counter-based MixBits: 32 rounds of Z <- (Z + i) + Z + Z + Y, i = 0..31.

    The round counter enters as a plain small integer, added mod 2**96.
    Unlike the shift-based variant, the all-zero input does not map to
    zero (nor to zero mod 96).
    """
    z = x
    for i in range(MIXBITS_ROUNDS):
        z = (z + i + z + z + y) & MASK
    return z


_HEX_DIGITS = frozenset("0123456789abcdef")


def to_hex(x: Word96) -> str:
    """Render in the canonical form: 24 lowercase hex digits."""
    return format(x, "024x")


def from_hex(text: str) -> Word96:
    """Parse the canonical 24-digit form; reject everything else."""
    if len(text) != 24 or not _HEX_DIGITS.issuperset(text):
        raise ValueError(f"not a canonical 96-bit hex word: {text!r}")
    return int(text, 16)
