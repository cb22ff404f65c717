from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mortar_bddc.coefficients import (ONE_CHANNEL, THREE_CHANNELS, channel_field, constant_field,
                                      field_from_descriptor, random_field)
from mortar_bddc.geometry import Rect, triangulate


def mesh(m=6, sid=0, rect=Rect(0, 0, 1, 1)):
    return triangulate(rect, m, sid)


def test_constant_values():
    assert np.all(constant_field(1.0)(mesh()) == 1.0)
    assert np.all(constant_field(2.5)(mesh()) == 2.5)


@pytest.mark.parametrize("bad", [0.0, -1.0])
def test_constant_rejects_nonpositive(bad):
    with pytest.raises(ValueError):
        constant_field(bad)


def test_channel_eta_one_is_constant():
    assert np.array_equal(channel_field("one", 1.0)(mesh(10)), np.ones(200))


@pytest.mark.parametrize("layout, bands", [("one", ONE_CHANNEL), ("three", THREE_CHANNELS)])
def test_channel_classification(layout, bands):
    rect = Rect(1 / 3, 2 / 3, 1 / 3, 1 / 3)
    t = mesh(14, rect=rect)
    vals = channel_field(layout, 1e3)(t)
    rel = (t.centroids()[:, 1] - rect.y0) / rect.h
    inside = np.zeros(len(rel), bool)
    for lo, hi in bands:
        inside |= (rel > lo) & (rel < hi)
    assert inside.any() and (~inside).any()
    assert np.all(vals[inside] == 1e3) and np.all(vals[~inside] == 1.0)


def test_one_channel_is_centred_band():
    t = mesh(10)
    vals = channel_field("one", 1e3)(t)
    y = t.centroids()[vals == 1e3][:, 1]
    assert y.min() > 0.4 and y.max() < 0.6


@pytest.mark.parametrize("m", [6, 12, 24, 42, 48, 56, 70])
def test_centroids_never_on_band_boundaries(m):
    # centroid heights are (3r+1)/(3m) or (3r+2)/(3m); a boundary a/b would need b*(3r+c) = 3m*a
    for lo, hi in ONE_CHANNEL + THREE_CHANNELS:
        for edge in (lo, hi):
            f = Fraction(edge).limit_denominator(10)
            for r in range(m):
                for c in (1, 2):
                    assert Fraction(3 * r + c, 3 * m) != f


def test_random_range_and_determinism():
    t = mesh(12, sid=3)
    a = random_field(0, -3, 3)(t)
    b = random_field(0, -3, 3)(t)
    assert np.array_equal(a, b)
    assert np.all((a > 1e-3) & (a < 1e3))
    assert a.max() / a.min() <= 1e6


def test_random_depends_on_subdomain_and_seed():
    assert not np.array_equal(random_field(0)(mesh(4, 0)), random_field(0)(mesh(4, 1)))
    assert not np.array_equal(random_field(0)(mesh(4, 0)), random_field(1)(mesh(4, 0)))


def test_random_prefix_stable_across_mesh_size():
    # element e draws the e-th value of its subdomain stream
    a = random_field(5)(mesh(4, 2))
    b = random_field(5)(mesh(6, 2))
    assert np.array_equal(a, b[:len(a)])


def test_random_collapsed_range():
    v = random_field(0, 0.0, 1e-12)(mesh())
    assert np.allclose(v, 1.0)


def test_random_bad_range():
    with pytest.raises(ValueError):
        random_field(0, 1.0, 1.0)


@given(st.integers(0, 2**31 - 1), st.integers(0, 40))
def test_random_positive(seed, sid):
    v = random_field(seed)(mesh(3, sid))
    assert np.all(v > 0) and np.all(np.isfinite(v))


def test_descriptor_roundtrip():
    for f in (constant_field(2.0), channel_field("three", 10.0), random_field(7, -1, 2)):
        g = field_from_descriptor(f.describe())
        assert np.array_equal(f(mesh(7, 1)), g(mesh(7, 1)))
    with pytest.raises(ValueError):
        field_from_descriptor({"type": "weird"})
