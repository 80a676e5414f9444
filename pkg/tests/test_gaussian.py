import numpy as np
import pytest

from gicreg.gaussian import JointGaussian, conditional_variance, gaussian_mi, hk_joint
from gicreg.model import ChannelParams, eta


def test_awgn():
    j = JointGaussian.from_linear({"X": 5.0, "Z": 1.0}, {"Y": {"X": 1.0, "Z": 1.0}})
    assert gaussian_mi("X", [], j, "Y") == pytest.approx(eta(5.0), abs=1e-14)


def test_conditioning_on_target_gives_zero():
    j = JointGaussian.from_linear({"X": 5.0, "Z": 1.0}, {"Y": {"X": 1.0, "Z": 1.0}})
    assert gaussian_mi("X", ["X"], j, "Y") == pytest.approx(0.0, abs=1e-14)


def test_private_message_formula(rng):
    for _ in range(100):
        ch = ChannelParams(*rng.uniform(0.1, 10, 2), *rng.uniform(0, 3, 2))
        x1, x2 = rng.uniform(0, 1, 2)
        j = hk_joint(ch, x1, x2)
        got = gaussian_mi("U1", ["V1", "V2"], j, "Y1")
        assert got == pytest.approx(eta(x1 * ch.p1 / (1 + ch.a12 * x2 * ch.p2)), abs=1e-9)


def test_stacked():
    ch = ChannelParams(2, 3, 0.5, 0.7)
    xi = np.array([0.0, 0.5, 1.0])
    j = hk_joint(ch, xi, xi)
    got = gaussian_mi(["U1"], ["V1", "V2"], j, "Y1")
    np.testing.assert_allclose(got, eta(xi * 2 / (1 + 0.5 * xi * 3)), atol=1e-12)


def test_rejects_non_psd():
    with pytest.raises(ValueError, match="semidefinite"):
        JointGaussian(("a", "b"), np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_rejects_asymmetric():
    with pytest.raises(ValueError):
        JointGaussian(("a", "b"), np.array([[1.0, 0.5], [0.0, 1.0]]))


def test_unknown_name():
    j = JointGaussian.from_linear({"X": 1.0}, {"Y": {"X": 1.0}})
    with pytest.raises(ValueError):
        conditional_variance(j, "Y", ["Q"])


def test_degenerate_common_part_zero_variance():
    # all private: V variances are zero, so V-only terms vanish
    j = hk_joint(ChannelParams(3, 2, 0.4, 0.8), 1.0, 1.0)
    assert gaussian_mi("V1", [], j, "Y1") == pytest.approx(0.0, abs=1e-14)
