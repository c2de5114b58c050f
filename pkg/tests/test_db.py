import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from deeploop.db import DescriptorDB
from deeploop.errors import DatabaseError, InvalidDescriptorError, ShapeError


def oracle_topk(db, q, k, exclude_above=None):
    """Full sort of every stored entry: score descending, then id ascending.

    Scores use the stored unit vectors and the unit query so the oracle sees
    the same float32 values; unit length itself is checked separately.
    """
    q = np.asarray(q, dtype=np.float32)
    s = db.vectors @ (q / np.float32(np.sqrt(q @ q)))
    ids = db.ids.tolist()
    rows = [(ids[i], s[i]) for i in range(len(ids)) if exclude_above is None or ids[i] < exclude_above]
    rows.sort(key=lambda r: (-r[1], r[0]))
    return [r[0] for r in rows[:k]]


def filled(rng, n, dim, step=1):
    db = DescriptorDB(dim, capacity=4)
    vecs = rng.standard_normal((n, dim))
    ids = np.arange(n) * step
    for i, v in zip(ids, vecs):
        db.insert(i, v)
    return db, vecs, ids


def test_self_match(rng):
    db, vecs, _ = filled(rng, 20, 8)
    for i, v in enumerate(vecs):
        (best, score), = db.query(v)
        assert best == i and abs(score - 1) < 1e-6


def test_topk_against_oracle(rng):
    for trial in range(40):
        n = int(rng.integers(1, 1001))
        dim = int(rng.integers(1, 40))
        k = int(rng.integers(1, 11))
        db, vecs, ids = filled(rng, n, dim, step=int(rng.integers(1, 4)))
        q = rng.standard_normal(dim)
        got = [i for i, _ in db.query(q, k=k)]
        assert got == oracle_topk(db, q, k)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 60), st.integers(1, 10), st.integers(0, 2 ** 31), st.booleans())
def test_topk_property(n, k, seed, quantize):
    rng = np.random.default_rng(seed)
    vecs = rng.standard_normal((n, 6))
    if quantize:  # force many exact ties
        vecs = np.sign(vecs)
    db = DescriptorDB(6)
    for i, v in enumerate(vecs):
        db.insert(i, v)
    q = np.sign(rng.standard_normal(6)) if quantize else rng.standard_normal(6)
    if not q.any():
        return
    res = db.query(q, k=k)
    assert len(res) == min(k, n)
    assert [i for i, _ in res] == oracle_topk(db, q, k)


def test_ties_break_to_lower_id():
    db = DescriptorDB(2)
    for i in (3, 5, 9):
        db.insert(i, [1.0, 0.0])
    assert db.query([1.0, 0.0], k=1)[0][0] == 3
    assert [i for i, _ in db.query([1.0, 0.0], k=3)] == [3, 5, 9]


def test_exclude_above(rng):
    db, vecs, ids = filled(rng, 50, 5, step=2)
    q = vecs[40]
    for cut in (1, 10, 51, 80, 200):
        n = db.candidate_count(exclude_above=cut)
        assert n == int(np.sum(ids < cut))
        if n == 0:
            with pytest.raises(DatabaseError):
                db.query(q, exclude_above=cut)
        else:
            got = [i for i, _ in db.query(q, k=3, exclude_above=cut)]
            assert got == oracle_topk(db, q, 3, cut)


def test_insert_errors():
    db = DescriptorDB(3)
    db.insert(4, [1, 0, 0])
    with pytest.raises(DatabaseError):
        db.insert(4, [0, 1, 0])
    with pytest.raises(DatabaseError):
        db.insert(2, [0, 1, 0])
    with pytest.raises(DatabaseError):
        DescriptorDB(3).insert(-1, [1, 0, 0])
    with pytest.raises(ShapeError):
        db.insert(5, [1, 0])
    with pytest.raises(InvalidDescriptorError):
        db.insert(5, [0, 0, 0])
    with pytest.raises(ShapeError):
        db.query([1, 0])
    with pytest.raises(DatabaseError):
        DescriptorDB(3).query([1, 0, 0])
    with pytest.raises(ValueError):
        db.query([1, 0, 0], k=0)


def test_vectors_are_unit_and_contiguous(rng):
    db, _, _ = filled(rng, 100, 16)
    v = db.vectors
    assert len(db) == 100 and v.dtype == np.float32 and v.flags.c_contiguous
    np.testing.assert_allclose(np.linalg.norm(v, axis=1), 1, atol=1e-6)


def test_scores_are_cosines(rng):
    db, vecs, _ = filled(rng, 30, 9)
    q = rng.standard_normal(9)
    a = db.query(q, k=5)
    b = db.query(1000.0 * q, k=5)
    assert [i for i, _ in a] == [i for i, _ in b]
    np.testing.assert_allclose([s for _, s in a], [s for _, s in b], rtol=1e-6)
    best = a[0][0]
    expected = vecs[best] @ q / np.linalg.norm(vecs[best]) / np.linalg.norm(q)
    assert a[0][1] == pytest.approx(expected, abs=1e-6)
