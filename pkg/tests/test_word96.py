"""Arithmetic core: identities, frozen oracle values, algebraic properties."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import words
from tagauth import word96 as w

# frozen from tests/oracles.py
DOUBLE_PI = 0x6487ED5110B4611A62633144
MIX_SHIFT_1_0 = 0x00000000000003C514F79948
MIX_SHIFT_0_1 = 0x00000000000002B1583F0641
MIX_COUNTER_0_0 = 0x000000000001A553F8878F90
MIX_COUNTER_1_1 = 0x00000000000B854BCBB4ED51


class TestAddSub:
    def test_add_identity(self):
        assert w.add(0, w.PI) == w.PI

    def test_add_wraps(self):
        assert w.add(w.MASK, 1) == 0

    def test_add_pi_pi_matches_oracle(self):
        assert w.add(w.PI, w.PI) == DOUBLE_PI

    def test_sub_identity_and_wrap(self):
        assert w.sub(w.PI, 0) == w.PI
        assert w.sub(0, 1) == w.MASK

    def test_sub_inverts_add(self):
        assert w.sub(w.add(w.PI, 5), 5) == w.PI

    @given(a=words, b=words)
    def test_group_laws(self, a, b):
        assert w.sub(w.add(a, b), b) == a
        assert w.add(a, w.sub(0, a)) == 0


class TestBitwise:
    def test_xor_self_is_zero(self):
        assert w.xor(w.PI, w.PI) == 0

    def test_or_zero_identity(self):
        assert w.or_(w.PI, 0) == w.PI

    def test_and_full_mask_identity(self):
        assert w.and_(w.PI, w.MASK) == w.PI


class TestRotation:
    def test_small_shifts(self):
        assert w.rotl(1, 1) == 2
        assert w.rotr(2, 1) == 1

    def test_full_rotation_is_identity(self):
        assert w.rotl(w.PI, 96) == w.PI
        assert w.rotr(w.PI, 0) == w.PI

    def test_msb_wraps_to_lsb(self):
        assert w.rotl(1 << 95, 1) == 1

    def test_inverse_on_pi(self):
        assert w.rotr(w.rotl(w.PI, 37), 37) == w.PI

    @given(x=words, y=words)
    def test_rotl_bijective(self, x, y):
        assert w.rotr(w.rotl(x, y), y) == x

    @given(x=words, y=words, k=st.integers(min_value=0, max_value=50))
    def test_rotation_amount_reduces_mod_96(self, x, y, k):
        assert w.rotl(x, y) == w.rotl(x, y + 96 * k)

    @given(x=words, y=words)
    def test_rotl_matches_bitstring_oracle(self, x, y):
        assert w.rotl(x, y) == oracles.rot_left(x, y)


class TestMixBits:
    def test_original_zero_fixed_point(self):
        # the collapse the zero-nonce attack relies on
        assert w.mixbits_original(0, 0) == 0

    def test_original_frozen_values(self):
        assert w.mixbits_original(1, 0) == MIX_SHIFT_1_0
        assert w.mixbits_original(0, 1) == MIX_SHIFT_0_1

    def test_original_first_steps(self):
        # the recurrence from 1 walks 2, 5, 12, 30
        z = 1
        seen = []
        for _ in range(4):
            z = ((z >> 1) + z + z) & w.MASK
            seen.append(z)
        assert seen == [2, 5, 12, 30]

    def test_modified_zero_input_is_nonzero(self):
        out = w.mixbits_modified(0, 0)
        assert out == MIX_COUNTER_0_0
        assert out != 0
        assert out % 96 != 0
        assert out % 96 == 16

    def test_modified_zero_matches_closed_form(self):
        assert w.mixbits_modified(0, 0) == sum(i * 3 ** (31 - i) for i in range(32)) & w.MASK

    def test_modified_frozen_value(self):
        assert w.mixbits_modified(1, 1) == MIX_COUNTER_1_1

    @given(x=words, y=words)
    @settings(max_examples=200)
    def test_both_variants_match_oracle(self, x, y):
        assert w.mixbits_original(x, y) == oracles.mixbits_shift(x, y)
        assert w.mixbits_modified(x, y) == oracles.mixbits_counter(x, y)


class TestHexForm:
    def test_render_is_24_lowercase_digits(self):
        text = w.to_hex(w.PI)
        assert text == "3243f6a8885a308d313198a2"
        assert w.to_hex(0) == "0" * 24

    @given(x=words)
    def test_round_trip(self, x):
        assert w.from_hex(w.to_hex(x)) == x

    @pytest.mark.parametrize("bad", [
        "", "00", "3243F6A8885A308D313198A2",  # uppercase
        "3243f6a8885a308d313198a",             # 23 digits
        "3243f6a8885a308d313198a2f",           # 25 digits
        " 243f6a8885a308d313198a2",            # whitespace
        "3243f6a8885a308d313198g2",            # non-hex
        "+243f6a8885a308d313198a2",            # sign
    ])
    def test_rejects_non_canonical(self, bad):
        with pytest.raises(ValueError):
            w.from_hex(bad)
