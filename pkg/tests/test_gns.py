import numpy as np
import pytest

from afmetric.cfrac import BaireSequence, QuadraticSurd
from afmetric.errors import DegenerateBasis, LevelOutOfRange
from afmetric.fdca import (
    AlgebraElement,
    BlockShape,
    TraceWeights,
    gns_inner,
    op_norm,
    random_element,
    trace_state,
)
from afmetric.gns import cond_expectation, q_projection, subalgebra_basis
from afmetric.tower import Embedding, Tower, UhfProvenance, embed_through, es_tower, uhf_tower

GOLDEN = QuadraticSurd(-1, 1, 5, 2)


@pytest.fixture(scope="module")
def golden5():
    return es_tower(GOLDEN, 5)


@pytest.fixture(scope="module")
def uhf2():
    return uhf_tower(BaireSequence((1, 1)), 2)


def test_sublevel_zero_basis_is_unit(golden5):
    basis = subalgebra_basis(golden5, 3, 0)
    assert basis.count == 1
    (vec,) = basis.vectors(golden5)
    assert op_norm(vec - AlgebraElement.unit(golden5.shape(3))) < 1e-12


def test_uhf_level2_sublevel1_has_four_vectors(uhf2):
    basis = subalgebra_basis(uhf2, 2, 1)
    assert basis.count == 4
    u = basis.matrix
    gram = u.conj() @ u.T
    assert np.max(np.abs(gram - np.eye(4))) < 1e-12


def test_gram_residuals_golden_all_sublevels(golden5):
    for n in range(1, 6):
        for k in range(n + 1):
            assert subalgebra_basis(golden5, n, k).gram_residual < 1e-10


def test_expectation_onto_scalars_is_trace(golden5):
    rng = np.random.default_rng(0)
    a = random_element(golden5.shape(4), rng)
    e0 = cond_expectation(golden5, 4, 0, a)
    target = trace_state(golden5.weights(4), a) * AlgebraElement.unit(golden5.shape(4))
    assert op_norm(e0 - target) < 1e-10


def test_expectation_fixes_embedded_elements(golden5):
    rng = np.random.default_rng(1)
    for k in range(1, 4):
        a = embed_through(golden5, k, 4, random_element(golden5.shape(k), rng))
        assert op_norm(cond_expectation(golden5, 4, k, a) - a) < 1e-10


def test_expectation_idempotent(golden5):
    rng = np.random.default_rng(2)
    a = random_element(golden5.shape(5), rng)
    for k in range(5):
        ea = cond_expectation(golden5, 5, k, a)
        assert op_norm(cond_expectation(golden5, 5, k, ea) - ea) < 1e-10


def test_uhf_partial_trace_oracle(uhf2):
    # E_{2,1} must agree with the normalized partial trace over the copy
    # index: the level-1 image is block-diag(b, b), so E(x) = diag(m, m)
    # with m[k,l] = (x[k,l] + x[2+k][2+l]) / 2
    rng = np.random.default_rng(3)
    x = random_element(uhf2.shape(2), rng)
    m = np.zeros((2, 2), dtype=complex)
    for k in range(2):
        for l in range(2):
            m[k, l] = (x.blocks[0][k, l] + x.blocks[0][2 + k, 2 + l]) / 2
    oracle = AlgebraElement(uhf2.shape(2), [np.kron(np.eye(2), m)])
    assert op_norm(cond_expectation(uhf2, 2, 1, x) - oracle) < 1e-12


def test_expectation_gns_self_adjoint(golden5):
    rng = np.random.default_rng(4)
    w = golden5.weights(4)
    for k in range(4):
        a, b = random_element(golden5.shape(4), rng), random_element(golden5.shape(4), rng)
        lhs = gns_inner(w, cond_expectation(golden5, 4, k, a), b)
        rhs = gns_inner(w, a, cond_expectation(golden5, 4, k, b))
        assert lhs == pytest.approx(rhs, abs=1e-10)


def test_expectation_preserves_trace(golden5):
    rng = np.random.default_rng(5)
    w = golden5.weights(5)
    a = random_element(golden5.shape(5), rng)
    for k in range(6):
        assert trace_state(w, cond_expectation(golden5, 5, k, a)) == pytest.approx(
            trace_state(w, a), abs=1e-10
        )


def test_bimodule_property(golden5):
    rng = np.random.default_rng(6)
    n, k = 4, 2
    a = random_element(golden5.shape(n), rng)
    x = embed_through(golden5, k, n, random_element(golden5.shape(k), rng))
    y = embed_through(golden5, k, n, random_element(golden5.shape(k), rng))
    lhs = cond_expectation(golden5, n, k, x * a * y)
    rhs = x * cond_expectation(golden5, n, k, a) * y
    assert op_norm(lhs - rhs) < 1e-9


def test_q_kills_unit_and_telescopes(golden5):
    rng = np.random.default_rng(7)
    n = 4
    one = AlgebraElement.unit(golden5.shape(n))
    for k in range(1, n + 1):
        assert op_norm(q_projection(golden5, n, k, one)) < 1e-12
    a = random_element(golden5.shape(n), rng)
    total = cond_expectation(golden5, n, 0, a)
    for k in range(1, n + 1):
        total = total + q_projection(golden5, n, k, a)
    assert op_norm(total - a) < 1e-10


def test_q_ranges_orthogonal(golden5):
    rng = np.random.default_rng(8)
    n = 4
    w = golden5.weights(n)
    a, b = random_element(golden5.shape(n), rng), random_element(golden5.shape(n), rng)
    qs_a = [q_projection(golden5, n, k, a) for k in range(1, n + 1)]
    qs_b = [q_projection(golden5, n, k, b) for k in range(1, n + 1)]
    for j in range(n):
        for k in range(n):
            if j != k:
                assert abs(gns_inner(w, qs_a[j], qs_b[k])) < 1e-10


def test_degenerate_embedding_detected():
    # an embedding that drops the second source block is not injective;
    # the orthonormalization must flag it
    levels = (
        (BlockShape((1,)), TraceWeights((1.0,))),
        (BlockShape((1, 1)), TraceWeights((0.5, 0.5))),
        (BlockShape((2,)), TraceWeights((1.0,))),
    )
    embeddings = (
        Embedding(levels[0][0], levels[1][0], (((0, 1),), ((0, 1),))),
        Embedding(levels[1][0], levels[2][0], (((0, 2),),)),
    )
    bad = Tower(levels, embeddings, UhfProvenance((1, 1)), ())
    with pytest.raises(DegenerateBasis):
        subalgebra_basis(bad, 2, 1)


def test_sublevel_guard(golden5):
    rng = np.random.default_rng(9)
    a = random_element(golden5.shape(2), rng)
    with pytest.raises(LevelOutOfRange):
        cond_expectation(golden5, 2, 3, a)
    with pytest.raises(LevelOutOfRange):
        q_projection(golden5, 2, 0, a)


def test_basis_cache_single_initialization():
    # concurrent first touches must all observe one basis object
    from concurrent.futures import ThreadPoolExecutor

    t = es_tower(GOLDEN, 4)
    with ThreadPoolExecutor(max_workers=8) as pool:
        results = list(pool.map(lambda _: subalgebra_basis(t, 4, 2), range(16)))
    assert all(r is results[0] for r in results)
