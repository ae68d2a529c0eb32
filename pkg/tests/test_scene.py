import math
import warnings

import pytest
from hypothesis import given, strategies as st

from thermal_superres.scene import (
    ParaxialWarning,
    SceneParams,
    centroid_separation_from_positions,
    phases_from_positions,
    positions_from_centroid_separation,
)


def test_on_axis_coincident_sources_have_zero_phase():
    ph = phases_from_positions(SceneParams(k=1.0, B=1.0, s0=1.0))
    assert (ph.phi1, ph.phi2) == (0.0, 0.0)


def test_symmetric_offsets():
    scene = SceneParams(k=1.0, B=100.0, s0=100.0, x1=0.5, x2=-0.5)
    ph = phases_from_positions(scene)
    assert ph.phi1 == pytest.approx(0.5, abs=1e-15)
    assert ph.phi2 == pytest.approx(-0.5, abs=1e-15)


def test_tilted_baseline():
    # kB = 2, s0 = 1, tilt = pi/6; x1 = 0.1 is outside the paraxial regime for s0 = 1
    scene = SceneParams(k=2.0, B=1.0, s0=1.0, tilt=math.pi / 6, x1=0.1)
    with pytest.warns(ParaxialWarning):
        ph = phases_from_positions(scene)
    assert ph.phi1 == pytest.approx(1 + 0.1 * math.sqrt(3), rel=1e-14)
    assert not ph.paraxial


@pytest.mark.parametrize("t1, t2, expected", [
    (0.0, 0.0, (0.0, 0.0)),
    (0.0, 1.0, (0.5, -0.5)),
    (2.0, 0.4, (2.2, 1.8)),
])
def test_positions_from_centroid_separation(t1, t2, expected):
    assert positions_from_centroid_separation(t1, t2) == pytest.approx(expected, abs=1e-15)


@given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3))
def test_centroid_separation_round_trip(t1, t2):
    back = centroid_separation_from_positions(*positions_from_centroid_separation(t1, t2))
    assert back == pytest.approx((t1, t2), rel=1e-12, abs=1e-9)


@given(st.floats(0.1, 10), st.floats(-0.5, 0.5), st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1))
def test_dphi_is_u0_times_separation(k, tilt, x1, x2, y):
    scene = SceneParams(k=k, B=50.0, s0=1e3, tilt=tilt, x1=x1, x2=x2)
    ph = phases_from_positions(scene)
    assert ph.dphi == pytest.approx(scene.u0 * scene.separation, rel=1e-9, abs=1e-12)
    # linearity in the positions
    moved = phases_from_positions(scene.with_positions(x1 + y, x2 + y))
    assert moved.phi1 - ph.phi1 == pytest.approx(scene.u0 * y, rel=1e-9, abs=1e-12)


def test_equal_positions_give_zero_dphi():
    scene = SceneParams(k=3.0, B=7.0, s0=1e4, tilt=0.2, x1=1.25, x2=1.25)
    assert phases_from_positions(scene).dphi == 0.0


@pytest.mark.parametrize("kwargs", [
    {"eta": 0.6}, {"eta": -0.1}, {"nbar": -1.0}, {"k": 0.0}, {"B": -1.0}, {"s0": 0.0},
])
def test_invalid_scenes_rejected(kwargs):
    base = dict(k=1.0, B=1.0, s0=1.0)
    base.update(kwargs)
    with pytest.raises(ValueError):
        SceneParams(**base)


def test_reduced_units():
    scene = SceneParams.reduced(0.3, 0.2, 1.5, u0=2.0)
    assert scene.u0 == pytest.approx(2.0, rel=1e-15)
    assert scene.strength == pytest.approx(0.3, rel=1e-15)
    assert (scene.centroid, scene.separation) == pytest.approx((0.2, 1.5), rel=1e-15)
    assert scene.paraxial
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        phases_from_positions(scene)


def test_with_strength_keeps_eta():
    scene = SceneParams.reduced(0.1, eta=0.25).with_strength(0.4)
    assert scene.eta == 0.25 and scene.strength == pytest.approx(0.4)
    with pytest.raises(ValueError):
        SceneParams(k=1, B=1, s0=1, eta=0.0).with_strength(0.1)
