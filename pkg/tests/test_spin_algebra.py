import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_array_equal

from spinordeform import spin_algebra as sa

# hand-copied from the printed tables; shared with the CLI golden test
GOLDEN = json.loads((Path(__file__).parent / "golden" / "constants.json").read_text())


def _from_golden(name):
    arr = np.array(GOLDEN[name])
    if name in ("G", "gamma"):
        return arr[..., 0] + 1j * arr[..., 1]
    return arr


def test_float_tables_match_printed_values():
    (mk, weyl, ivw, dirac) = sa.constants()
    assert_array_equal(mk.g, _from_golden("g"))
    assert_array_equal(mk.g_dual, _from_golden("g_dual"))
    assert_array_equal(weyl.d2, _from_golden("d2"))
    assert_array_equal(weyl.d2_dual, _from_golden("d2_dual"))
    assert_array_equal(ivw.G, _from_golden("G"))
    assert_array_equal(dirac.d4, _from_golden("d4"))
    assert_array_equal(dirac.d4_dual, _from_golden("d4_dual"))
    assert_array_equal(dirac.H, _from_golden("H"))
    assert_array_equal(dirac.D, _from_golden("D"))
    assert_array_equal(dirac.gamma, _from_golden("gamma"))


def test_pauli_and_gamma_spot_entries():
    # G_2 = [[0, -i], [i, 0]] and gamma_2 row 1 = (0, 0, i, 0)
    assert sa.SIGMA[2][0, 1] == -1j and sa.SIGMA[2][1, 0] == 1j
    assert sa.GAMMA[2][1, 2] == 1j
    assert sa.GAMMA[1][3, 0] == -1


def test_tables_read_only():
    with pytest.raises(ValueError):
        sa.GAMMA[0, 0, 0] = 1.0
    with pytest.raises(ValueError):
        sa.constants()[0].g[0, 0] = 2.0


def test_exact_identities_vanish():
    assert sa.check_reality_identity() == 0.0
    assert sa.check_clifford() == 0.0
    assert sa.check_chirality() == 0.0
    assert sa.check_weyl_inverse() == 0.0


def test_float_identities_vanish():
    assert sa.check_reality_identity(sa.DIRAC_FORM, sa.GAMMA) <= 1e-15
    assert sa.check_clifford(sa.GAMMA, sa.ETA) <= 1e-15
    assert sa.check_chirality(sa.H, sa.GAMMA) <= 1e-15


def test_identity_checks_detect_corruption():
    bad = np.array(sa.GAMMA)
    bad[2, 0, 3] = 1j
    assert sa.check_clifford(bad) > 0.5
    assert sa.check_reality_identity(gamma=bad) > 0.5
    assert sa.check_chirality(gamma=bad + np.eye(4)) > 0.5


def test_duals_are_inverses():
    assert_array_equal(sa.D4_DUAL @ sa.D4, np.eye(4))
    assert_array_equal(sa.ETA @ sa.ETA, np.eye(4))


def test_gaussian_matmul_matches_complex_product():
    a = (np.array([[1, 2], [0, -1]]), np.array([[0, 1], [3, 0]]))
    b = (np.array([[2, 0], [1, 1]]), np.array([[1, -1], [0, 2]]))
    re, im = sa.gaussian_matmul(a, b)
    prod = (a[0] + 1j * a[1]) @ (b[0] + 1j * b[1])
    assert_array_equal(re + 1j * im, prod)


def test_constants_json_is_exact_integers():
    out = sa.constants_json()
    assert out == GOLDEN
    assert all(isinstance(v, int) for v in np.array(out["gamma"]).reshape(-1).tolist())


def test_spin_tensor_types():
    assert str(sa.SPIN_TENSOR_TYPES["gamma"]) == "(1,1|0,0|0,1)"
    assert str(sa.SPIN_TENSOR_TYPES["D"]) == "(0,1|0,1|0,0)"


def _boost(rapidity, axis):
    L = np.eye(4)
    L[0, 0] = L[axis, axis] = np.cosh(rapidity)
    L[0, axis] = L[axis, 0] = np.sinh(rapidity)
    return L


def _rotation(angle, i, j):
    R = np.eye(4)
    R[i, i] = R[j, j] = np.cos(angle)
    R[i, j], R[j, i] = -np.sin(angle), np.sin(angle)
    return R


@settings(max_examples=40, deadline=None)
@given(
    st.floats(-1.5, 1.5),
    st.integers(1, 3),
    st.floats(-np.pi, np.pi),
    st.sampled_from([(1, 2), (1, 3), (2, 3)]),
)
def test_lorentz_rotated_gammas_keep_clifford_and_reality(rap, axis, angle, plane):
    # frame vectors Upsilon'_k = L[k, q] Upsilon_q with L in SO+(1,3)
    L = _boost(rap, axis) @ _rotation(angle, *plane)
    gam = np.einsum("kq,qab->kab", L, sa.GAMMA)
    assert sa.check_clifford(gam, sa.ETA) <= 1e-12 * np.max(np.abs(L)) ** 2
    assert sa.check_reality_identity(sa.DIRAC_FORM, gam) <= 1e-12 * np.max(np.abs(L))
    assert sa.check_chirality(sa.H, gam) <= 1e-12 * np.max(np.abs(L))
