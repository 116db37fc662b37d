import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slungload.quat import (
    basic_rotation,
    quat_conj,
    quat_error,
    quat_error_batch,
    quat_mul,
    quat_normalize,
    quat_rate_batch,
    quat_to_rot,
    quat_to_rot_batch,
)

SQ2 = np.sqrt(2.0) / 2.0
IDENT = np.array([1.0, 0, 0, 0])


@st.composite
def unit_quaternions(draw):
    comps = draw(
        st.lists(st.floats(-1, 1, allow_nan=False), min_size=4, max_size=4).filter(
            lambda v: np.linalg.norm(v) > 1e-3
        )
    )
    arr = np.asarray(comps, dtype=float)
    return arr / np.linalg.norm(arr)


class TestQuatMul:
    def test_identity(self):
        p = quat_normalize([0.3, -0.2, 0.8, 0.1])
        assert np.allclose(quat_mul(p, IDENT), p, atol=1e-12)

    def test_inverse_property(self):
        p = quat_normalize([0.3, -0.2, 0.8, 0.1])
        assert np.allclose(quat_mul(p, quat_conj(p)), IDENT, atol=1e-12)

    def test_two_quarter_turns_compose_to_half_turn(self):
        h = np.array([SQ2, 0, 0, SQ2])
        assert np.allclose(quat_mul(h, h), [0, 0, 0, 1], atol=1e-12)

    def test_rejects_non_unit(self):
        with pytest.raises(ValueError):
            quat_mul(np.array([2.0, 0, 0, 0]), IDENT)


class TestQuatToRot:
    def test_identity(self):
        assert np.allclose(quat_to_rot(IDENT), np.eye(3), atol=1e-12)

    def test_z_half_turn(self):
        assert np.allclose(quat_to_rot([0.0, 0, 0, 1]), np.diag([-1.0, -1.0, 1.0]), atol=1e-12)

    def test_z_quarter_turn(self):
        expected = basic_rotation("z", np.pi / 2)
        assert np.allclose(quat_to_rot([SQ2, 0, 0, SQ2]), expected, atol=1e-12)

    def test_orthonormality(self):
        q = quat_normalize([0.4, 0.3, -0.5, 0.7])
        r = quat_to_rot(q)
        assert np.allclose(r.T @ r, np.eye(3), atol=1e-12)
        assert np.isclose(np.linalg.det(r), 1.0, atol=1e-12)


class TestQuatError:
    def test_same_attitude_gives_identity(self):
        q = quat_normalize([0.4, 0.3, -0.5, 0.7])
        assert np.allclose(quat_error(q, q), IDENT, atol=1e-12)

    def test_zero_scalar_tiebreak_leaves_vector(self):
        e = quat_error(IDENT, np.array([0.0, 0, 0, 1]))
        assert np.allclose(e, [0, 0, 0, 1], atol=1e-12)

    def test_quarter_turn_error(self):
        e = quat_error(np.array([SQ2, 0, 0, SQ2]), IDENT)
        assert np.allclose(e, [SQ2, 0, 0, -SQ2], atol=1e-12)

    def test_canonical_scalar_sign(self):
        q_d = quat_normalize([0.1, 0.99, 0, 0])
        e = quat_error(q_d, IDENT)
        assert e[0] >= 0


class TestBasicRotation:
    def test_zero_angle(self):
        assert np.allclose(basic_rotation("z", 0.0), np.eye(3), atol=1e-15)

    def test_y_quarter_turn_swaps_axes(self):
        assert np.allclose(basic_rotation("y", np.pi / 2) @ [0, 0, 1], [1, 0, 0], atol=1e-12)

    def test_y_minus_30deg_on_e3(self):
        out = basic_rotation("y", -np.pi / 6) @ [0, 0, 1]
        assert np.allclose(out, [-0.5, 0.0, np.sqrt(3) / 2], atol=1e-12)

    def test_bad_axis(self):
        with pytest.raises(ValueError):
            basic_rotation("w", 0.1)


class TestProperties:
    @given(unit_quaternions(), unit_quaternions())
    @settings(max_examples=200, deadline=None)
    def test_rotation_homomorphism(self, p, q):
        left = quat_to_rot(quat_mul(p, q))
        right = quat_to_rot(p) @ quat_to_rot(q)
        assert np.max(np.abs(left - right)) < 1e-9

    @given(unit_quaternions())
    @settings(max_examples=200, deadline=None)
    def test_double_cover(self, q):
        assert np.max(np.abs(quat_to_rot(q) - quat_to_rot(-q))) < 1e-12

    @given(unit_quaternions())
    @settings(max_examples=100, deadline=None)
    def test_error_of_self_is_identity(self, q):
        assert np.max(np.abs(quat_error(q, q) - IDENT)) < 1e-9

    @given(unit_quaternions(), unit_quaternions())
    @settings(max_examples=200, deadline=None)
    def test_product_stays_unit(self, p, q):
        assert abs(np.linalg.norm(quat_mul(p, q)) - 1.0) < 1e-12


class TestBatchForms:
    def test_batch_matches_scalar(self):
        rng = np.random.default_rng(7)
        q = rng.normal(size=(6, 4))
        q /= np.linalg.norm(q, axis=1, keepdims=True)
        qd = rng.normal(size=(6, 4))
        qd /= np.linalg.norm(qd, axis=1, keepdims=True)
        batch = quat_error_batch(qd, q)
        for i in range(6):
            assert np.allclose(batch[i], quat_error(qd[i], q[i]), atol=1e-12)
        rots = quat_to_rot_batch(q)
        for i in range(6):
            assert np.allclose(rots[i], quat_to_rot(q[i]), atol=1e-12)

    def test_rate_matches_product_form(self):
        rng = np.random.default_rng(8)
        q = rng.normal(size=(4, 4))
        q /= np.linalg.norm(q, axis=1, keepdims=True)
        om = rng.normal(size=(4, 3))
        dq = quat_rate_batch(q, om)
        for i in range(4):
            # dq = 1/2 q ⊗ [0, omega]: expand the product by hand
            q0, qv = q[i, 0], q[i, 1:]
            expected = 0.5 * np.concatenate([[-qv @ om[i]], q0 * om[i] + np.cross(qv, om[i])])
            assert np.allclose(dq[i], expected, atol=1e-12)
