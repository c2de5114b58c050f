import numpy as np
import pytest

from deeploop.datagen import (
    HEADER_SIZE,
    BatchSampler,
    DatasetHeader,
    build_dataset,
    build_dataset_from_images,
    build_training_pair,
    generate_pair,
    read_dataset,
    record_rng,
    sample_batch,
)
from deeploop.errors import DataError
from deeploop.geometry import Homography, warp_image
from deeploop.hog import HogParams, block_norms, hog_descriptor
from deeploop.image import save_pgm
from deeploop.synthetic import corpus

from conftest import random_image


@pytest.fixture(scope="module")
def sources():
    return corpus(4, seed=3)


def test_deterministic_pair(sources):
    a = build_training_pair(sources[0], np.random.default_rng(7))
    b = build_training_pair(sources[0], np.random.default_rng(7))
    assert a[0] == b[0]
    np.testing.assert_array_equal(a[1], b[1])


def test_identity_hook(sources):
    raw, target = build_training_pair(sources[1], np.random.default_rng(0), swap=False,
                                      homography=Homography.identity())
    assert raw == sources[1]
    np.testing.assert_array_equal(target, hog_descriptor(sources[1]))


def test_pair_validity(sources):
    pair = generate_pair(sources[2], np.random.default_rng(11), swap=False)
    assert pair.raw == sources[2]
    np.testing.assert_array_equal(pair.target, hog_descriptor(warp_image(sources[2], pair.homography)))
    swapped = generate_pair(sources[2], np.random.default_rng(11), swap=True)
    assert swapped.raw == swapped.warped
    np.testing.assert_array_equal(swapped.target, hog_descriptor(sources[2]))


def test_swap_coin_is_fair(sources):
    rng = np.random.default_rng(2024)
    n = 1000
    kept = sum(generate_pair(sources[0], rng).raw == sources[0] for _ in range(n))
    # binomial(1000, 1/2): 3 sigma is about 47
    assert abs(kept - n / 2) <= 3 * np.sqrt(n / 4)


def test_requires_canonical_size(rng):
    with pytest.raises(DataError):
        build_training_pair(random_image(rng, 80, 60), rng)


def test_file_size_and_round_trip(tmp_path, sources):
    out = tmp_path / "d.clcd"
    h = build_dataset_from_images(sources[:1], 3, 99, out)
    d = HogParams().length()
    assert out.stat().st_size == 4 + 4 + 4 * 4 + 8 + 3 * (19200 + 4 * d) == h.file_size()
    assert HEADER_SIZE == 32
    ds = read_dataset(out)
    assert ds.header == DatasetHeader(3, 120, 160, d, 99)
    assert ds.images.shape == (3, 120, 160) and ds.targets.shape == (3, d)
    assert ds.targets.min() >= 0 and ds.targets.max() <= 1
    assert np.all(block_norms(ds.targets, HogParams()) <= 1 + 1e-6)


def test_records_regenerate(tmp_path, sources):
    out = tmp_path / "d.clcd"
    build_dataset_from_images(sources, 5, 42, out)
    ds = read_dataset(out)
    for i in range(5):
        rng = record_rng(42, i)
        src = sources[int(rng.integers(len(sources)))]
        raw, target = build_training_pair(src, rng)
        np.testing.assert_array_equal(ds.images[i], raw.data)
        np.testing.assert_array_equal(ds.targets[i], target.astype(np.float32))


def test_deterministic_and_parallel(tmp_path, sources):
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    build_dataset_from_images(sources, 6, 5, a)
    build_dataset_from_images(sources, 6, 5, b)
    build_dataset_from_images(sources, 6, 5, c, workers=3)
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()


def test_build_dataset_from_directory(tmp_path, sources):
    for i, im in enumerate(sources):
        save_pgm(im, tmp_path / f"{i:03d}.pgm")
    h = build_dataset(tmp_path, None, 1, HogParams(), tmp_path / "out.clcd")
    assert h.count == len(sources)
    empty = tmp_path / "empty"
    empty.mkdir()
    with pytest.raises(DataError):
        build_dataset(empty, 2, 1, HogParams(), tmp_path / "x.clcd")


def test_batches(tmp_path, sources):
    out = tmp_path / "d.clcd"
    build_dataset_from_images(sources[:1], 1, 0, out)
    ds = read_dataset(out)
    x1, x2 = sample_batch(ds, 1, np.random.default_rng(0))
    np.testing.assert_array_equal(x1[0], ds.images[0] / np.float32(255))
    np.testing.assert_array_equal(x2[0], ds.targets[0])


def test_epoch_visits_every_record(tmp_path, sources):
    out = tmp_path / "d.clcd"
    build_dataset_from_images(sources, 11, 0, out)
    ds = read_dataset(out)
    sampler = BatchSampler(ds, 4, np.random.default_rng(3))
    seen = [idx for idx, _, _ in sampler.epoch()]
    assert [len(s) for s in seen] == [4, 4, 3]
    assert sorted(np.concatenate(seen).tolist()) == list(range(11))
    assert sampler.next_batch()[0].shape == (4, 120, 160)
