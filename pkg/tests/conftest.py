"""Shared test strategies."""

from hypothesis import strategies as st

from tagauth.word96 import MASK

words = st.integers(min_value=0, max_value=MASK)
