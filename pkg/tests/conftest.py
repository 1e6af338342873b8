"""Shared strategies and fixtures."""

from __future__ import annotations

import os
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from nilergodic.group import GroupElement
from nilergodic.scalars import Radical

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("thorough", deadline=None, max_examples=500)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

RADICANDS = (1, 2, 3, 5, 6, 7)

fractions = st.builds(Fraction, st.integers(-20, 20), st.integers(1, 8))


@st.composite
def radicals(draw, max_terms: int = 3):
    d = draw(st.lists(st.sampled_from(RADICANDS), max_size=max_terms, unique=True))
    return Radical({r: draw(fractions) for r in d})


@st.composite
def elements(draw, n: int, level: int = 1, integer: bool = False):
    vals = st.integers(-6, 6) if integer else fractions
    entries = {(i, j): draw(vals) for i in range(n) for j in range(i + level, n)}
    return GroupElement.from_upper(n, entries)


@pytest.fixture
def h3():
    from nilergodic.group import heisenberg
    return heisenberg
