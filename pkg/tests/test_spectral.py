import math

import numpy as np
import pytest

from afmetric.cfrac import BaireSequence, QuadraticSurd
from afmetric.errors import ShapeMismatch
from afmetric.fdca import (
    AlgebraElement,
    gns_inner,
    gns_norm,
    op_norm,
    random_element,
    sharp_constant,
    trace_state,
)
from afmetric.gns import from_coords, gns_dim, to_coords
from afmetric.spectral import (
    commutator_apply,
    dirac_apply,
    dirac_coeffs,
    dirac_data,
    lip_seminorm,
    lip_seminorm_detailed,
)
from afmetric.tower import embed_through, es_tower, uhf_tower

GOLDEN = QuadraticSurd(-1, 1, 5, 2)
GOLDEN_RATIO = (math.sqrt(5) - 1) / 2


@pytest.fixture(scope="module")
def golden4():
    return es_tower(GOLDEN, 4)


@pytest.fixture(scope="module")
def uhf3():
    return uhf_tower(BaireSequence((1, 1, 1)), 3)


def oracle_lip(t, n, a):
    """Independent dense oracle: assemble the commutator map column by
    column through the projection-based applies, then take the SVD."""
    d = dirac_data(t, n)
    dim = gns_dim(t, n)
    cols = []
    for x in range(dim):
        v = np.zeros(dim, dtype=complex)
        v[x] = 1.0
        b = from_coords(t, n, v)
        cols.append(to_coords(t, n, commutator_apply(d, a, b)))
    return float(np.linalg.svd(np.array(cols).T, compute_uv=False)[0])


# --- coefficients ------------------------------------------------------------

def test_uhf_first_coefficient(uhf3):
    coeffs = dirac_coeffs(uhf3, 3)
    assert coeffs[0] == pytest.approx(4 * math.sqrt(2), rel=1e-12)


def test_golden_first_coefficient(golden4):
    coeffs = dirac_coeffs(golden4, 4)
    assert coeffs[0] == pytest.approx(2 / math.sqrt(1 - GOLDEN_RATIO), rel=1e-12)
    assert coeffs[0] == pytest.approx(3.23606797749979, abs=1e-10)


def test_coefficients_positive(golden4, uhf3):
    for t, n in ((golden4, 4), (uhf3, 3)):
        assert all(c > 0 for c in dirac_coeffs(t, n))


def test_coefficient_matches_embedded_image(golden4):
    # the sharp constant is intrinsic: the extremal ratio survives embedding
    for k in range(1, 4):
        c_k = sharp_constant(golden4.shape(k), golden4.weights(k))
        e = AlgebraElement.zero(golden4.shape(k))
        ratios = []
        for blk in range(len(golden4.shape(k).dims)):
            e = AlgebraElement.zero(golden4.shape(k))
            e.blocks[blk][0, 0] = 1.0
            img = embed_through(golden4, k, 4, e)
            ratios.append(op_norm(img) / gns_norm(golden4.weights(4), img))
        assert max(ratios) == pytest.approx(c_k, rel=1e-10)


# --- Dirac operator -----------------------------------------------------------

def test_dirac_kills_unit(golden4, uhf3):
    for t, n in ((golden4, 4), (uhf3, 3)):
        one = AlgebraElement.unit(t.shape(n))
        assert op_norm(dirac_apply(dirac_data(t, n), one)) < 1e-12


def test_q_range_element_is_eigenvector(golden4):
    d = dirac_data(golden4, 4)
    for k in (1, 2):
        row = d.q_bases[k - 1][0]
        a = from_coords(golden4, 4, row)
        assert op_norm(dirac_apply(d, a) - d.coeffs[k - 1] * a) < 1e-9


def test_dirac_gns_self_adjoint(golden4, uhf3):
    rng = np.random.default_rng(0)
    for t, n in ((golden4, 4), (uhf3, 3)):
        d = dirac_data(t, n)
        w = t.weights(n)
        for _ in range(5):
            a, b = random_element(t.shape(n), rng), random_element(t.shape(n), rng)
            lhs = gns_inner(w, dirac_apply(d, a), b)
            rhs = gns_inner(w, a, dirac_apply(d, b))
            assert lhs == pytest.approx(rhs, abs=1e-9 * max(1.0, abs(lhs)))


# --- commutator ----------------------------------------------------------------

def test_commutator_with_unit_vanishes(golden4):
    d = dirac_data(golden4, 4)
    rng = np.random.default_rng(1)
    one = AlgebraElement.unit(golden4.shape(4))
    for _ in range(3):
        b = random_element(golden4.shape(4), rng)
        assert op_norm(commutator_apply(d, one, b)) < 1e-10


def test_commutator_adjoint_identity(golden4, uhf3):
    # <C_a b, c> = -<b, C_{a*} c>
    rng = np.random.default_rng(2)
    for t, n in ((golden4, 4), (uhf3, 3)):
        d = dirac_data(t, n)
        w = t.weights(n)
        for _ in range(5):
            a = random_element(t.shape(n), rng)
            b = random_element(t.shape(n), rng)
            c = random_element(t.shape(n), rng)
            lhs = gns_inner(w, commutator_apply(d, a, b), c)
            rhs = -gns_inner(w, b, commutator_apply(d, a.adjoint(), c))
            assert lhs == pytest.approx(rhs, abs=1e-9 * max(1.0, abs(lhs)))


def test_commutator_linear_in_argument(golden4):
    d = dirac_data(golden4, 4)
    rng = np.random.default_rng(3)
    a = random_element(golden4.shape(4), rng)
    b1, b2 = random_element(golden4.shape(4), rng), random_element(golden4.shape(4), rng)
    lam = 0.3 - 1.1j
    lhs = commutator_apply(d, a, b1 + lam * b2)
    rhs = commutator_apply(d, a, b1) + lam * commutator_apply(d, a, b2)
    assert op_norm(lhs - rhs) < 1e-9


# --- Lip-seminorm -----------------------------------------------------------------

def test_lip_of_unit_is_zero(golden4, uhf3):
    for t, n in ((golden4, 4), (uhf3, 3)):
        one = AlgebraElement.unit(t.shape(n))
        assert lip_seminorm(t, n, one) < 1e-9


def test_lip_uhf_level1_diagonal():
    t = uhf_tower(BaireSequence((1,)), 1)
    a = AlgebraElement(t.shape(1), [np.diag([1.0, -1.0])])
    # analytic value: the commutator of 4*sqrt(2) (id - tau(.)1) with this
    # diagonal swaps the two diagonal matrix units, giving exactly 4*sqrt(2)
    assert lip_seminorm(t, 1, a) == pytest.approx(4 * math.sqrt(2), rel=1e-12)
    assert oracle_lip(t, 1, a) == pytest.approx(4 * math.sqrt(2), rel=1e-10)


def test_lip_matches_column_oracle(golden4):
    rng = np.random.default_rng(4)
    for n in (2, 3):
        a = random_element(golden4.shape(n), rng)
        assert lip_seminorm(golden4, n, a) == pytest.approx(
            oracle_lip(golden4, n, a), rel=1e-10
        )


def test_lip_symmetry_and_homogeneity(golden4):
    rng = np.random.default_rng(5)
    for _ in range(5):
        a = random_element(golden4.shape(4), rng)
        la = lip_seminorm(golden4, 4, a)
        assert abs(la - lip_seminorm(golden4, 4, a.adjoint())) < 1e-9 * max(1.0, la)
        assert lip_seminorm(golden4, 4, (0.5 - 2j) * a) == pytest.approx(
            abs(0.5 - 2j) * la, rel=1e-9
        )


def test_lip_triangle_and_leibniz(golden4):
    rng = np.random.default_rng(6)
    for _ in range(5):
        a = random_element(golden4.shape(4), rng)
        b = random_element(golden4.shape(4), rng)
        la, lb = lip_seminorm(golden4, 4, a), lip_seminorm(golden4, 4, b)
        assert lip_seminorm(golden4, 4, a + b) <= la + lb + 1e-8
        assert lip_seminorm(golden4, 4, a * b) <= op_norm(a) * lb + op_norm(b) * la + 1e-8


def test_lip_kernel_bound(golden4):
    # L(a) >= a_min ||a - tau(a)1||_tau, so a tiny seminorm pins a near the scalars
    rng = np.random.default_rng(7)
    d = dirac_data(golden4, 4)
    a_min = min(d.coeffs)
    one = AlgebraElement.unit(golden4.shape(4))
    for _ in range(5):
        a = random_element(golden4.shape(4), rng)
        centered = a - trace_state(golden4.weights(4), a) * one
        la = lip_seminorm(golden4, 4, a)
        assert la >= a_min * gns_norm(golden4.weights(4), centered) - 1e-9


def test_level_coherence(golden4):
    rng = np.random.default_rng(8)
    a = random_element(golden4.shape(1), rng)
    base = lip_seminorm(golden4, 1, a)
    for n in (2, 3, 4):
        lifted = lip_seminorm(golden4, n, embed_through(golden4, 1, n, a))
        assert lifted == pytest.approx(base, rel=1e-8)


def test_dense_and_power_agree(golden4, uhf3):
    rng = np.random.default_rng(9)
    for t, n in ((golden4, 3), (golden4, 4), (uhf3, 2), (uhf3, 3)):
        a = random_element(t.shape(n), rng)
        dense = lip_seminorm_detailed(t, n, a, method="dense")
        power = lip_seminorm_detailed(t, n, a, method="power")
        assert power.value == pytest.approx(dense.value, rel=1e-6)
        assert dense.method == "dense" and power.method == "power"


def test_lip_shape_guard(golden4):
    rng = np.random.default_rng(10)
    with pytest.raises(ShapeMismatch):
        lip_seminorm(golden4, 4, random_element(golden4.shape(3), rng))
    with pytest.raises(ValueError):
        lip_seminorm(golden4, 3, random_element(golden4.shape(3), rng), method="magic")
