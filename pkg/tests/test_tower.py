import dataclasses
import math

import numpy as np
import pytest

from afmetric.cfrac import BaireSequence, QuadraticSurd
from afmetric.errors import LevelOutOfRange, ShapeMismatch
from afmetric.fdca import (
    AlgebraElement,
    BlockShape,
    TraceWeights,
    gns_norm,
    op_norm,
    random_element,
    trace_state,
)
from afmetric.tower import (
    Embedding,
    embed,
    embed_through,
    es_tower,
    save_tower_descriptor,
    tower_descriptor,
    uhf_tower,
    verify_tower,
)

GOLDEN = QuadraticSurd(-1, 1, 5, 2)
GOLDEN_RATIO = (math.sqrt(5) - 1) / 2


@pytest.fixture(scope="module")
def golden5():
    return es_tower(GOLDEN, 5)


@pytest.fixture(scope="module")
def uhf_ones6():
    return uhf_tower(BaireSequence((1,) * 6), 6)


# --- construction ------------------------------------------------------------

def test_golden_shapes(golden5):
    assert golden5.shape(0).dims == (1,)
    assert [golden5.shape(n).dims for n in (1, 2, 3)] == [(1, 1), (2, 1), (3, 2)]


def test_golden_level1_weights(golden5):
    w = golden5.weights(1).weights
    assert w[0] == pytest.approx(GOLDEN_RATIO, abs=1e-12)
    assert w[1] == pytest.approx(1 - GOLDEN_RATIO, abs=1e-12)


def test_uhf_sizes():
    t = uhf_tower(BaireSequence((1, 1, 1)), 3)
    assert [t.shape(n).dims[0] for n in range(4)] == [1, 2, 4, 8]
    s = uhf_tower(BaireSequence((2, 3)), 2)
    assert [s.shape(n).dims[0] for n in range(3)] == [1, 3, 12]
    for n in range(3):
        assert s.weights(n).weights == (1.0,)


def test_uhf_depth_guard():
    with pytest.raises(LevelOutOfRange):
        uhf_tower(BaireSequence((1, 1)), 3)


# --- embeddings ---------------------------------------------------------------

def test_unit_maps_to_unit(golden5, uhf_ones6):
    for t in (golden5, uhf_ones6):
        for n in range(t.depth):
            img = embed(t.embeddings[n], AlgebraElement.unit(t.shape(n)))
            assert op_norm(img - AlgebraElement.unit(t.shape(n + 1))) == 0.0


def test_embedding_is_op_norm_isometric(golden5):
    rng = np.random.default_rng(1)
    for n in range(golden5.depth):
        a = random_element(golden5.shape(n), rng)
        assert op_norm(embed(golden5.embeddings[n], a)) == pytest.approx(
            op_norm(a), rel=1e-10
        )


def test_embedding_is_gns_isometric(golden5):
    rng = np.random.default_rng(2)
    for n in range(golden5.depth):
        a = random_element(golden5.shape(n), rng)
        img = embed(golden5.embeddings[n], a)
        assert gns_norm(golden5.weights(n + 1), img) == pytest.approx(
            gns_norm(golden5.weights(n), a), rel=1e-10
        )


def test_embed_through_identity_and_composition(golden5):
    rng = np.random.default_rng(3)
    a = random_element(golden5.shape(1), rng)
    same = embed_through(golden5, 1, 1, a)
    assert op_norm(same - a) == 0.0
    stepwise = a
    for n in range(1, 4):
        stepwise = embed(golden5.embeddings[n], stepwise)
    assert op_norm(embed_through(golden5, 1, 4, a) - stepwise) == 0.0


def test_trace_preserved_across_spans(golden5, uhf_ones6):
    rng = np.random.default_rng(4)
    for t in (golden5, uhf_ones6):
        a = random_element(t.shape(1), rng)
        base = trace_state(t.weights(1), a)
        for to in range(2, t.depth + 1):
            img = embed_through(t, 1, to, a)
            assert trace_state(t.weights(to), img) == pytest.approx(base, abs=1e-10)


def test_embed_through_guards(golden5):
    rng = np.random.default_rng(5)
    a = random_element(golden5.shape(2), rng)
    with pytest.raises(LevelOutOfRange):
        embed_through(golden5, 2, 1, a)
    with pytest.raises(LevelOutOfRange):
        embed_through(golden5, 2, 9, a)
    with pytest.raises(ShapeMismatch):
        embed_through(golden5, 3, 4, a)


def test_layout_bookkeeping_guard():
    with pytest.raises(ShapeMismatch):
        Embedding(BlockShape((2, 1)), BlockShape((4, 2)), (((0, 1), (1, 1)), ((0, 1),)))


# --- verification ---------------------------------------------------------------

def test_verify_golden_depth5(golden5):
    report = verify_tower(golden5)
    assert report.ok
    assert max(e.residual for e in report.entries) < 1e-10


def test_verify_uhf_depth6(uhf_ones6):
    assert verify_tower(uhf_ones6).ok


def test_tampered_weights_flagged(golden5):
    bad_levels = list(golden5.levels)
    bad_levels[2] = (bad_levels[2][0], TraceWeights((0.9, 0.1)))
    tampered = dataclasses.replace(golden5, levels=tuple(bad_levels))
    report = verify_tower(tampered)
    assert not report.ok
    assert any(e.name == "trace-compatibility" for e in report.failures())


# --- descriptor ------------------------------------------------------------------

def test_descriptor_is_deterministic(tmp_path, golden5):
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    save_tower_descriptor(golden5, p1)
    save_tower_descriptor(es_tower(GOLDEN, 5), p2)
    assert p1.read_bytes() == p2.read_bytes()
    doc = tower_descriptor(golden5)
    assert doc["depth"] == 5
    assert doc["provenance"]["kind"] == "effros-shen"
    assert doc["betas"][0] == "1/2"
