import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_image, random_key
from hcie.cipher import encrypt, extract_permutation
from hcie.errors import InconsistentPairsError, ParamError
from hcie.model import (
    HierarchicalPermutation,
    Image,
    PermutationMatrix,
    PublicParams,
    apply_permutation,
    flatten,
    invert,
    invert_hierarchical,
)
from hcie.plaintext import (
    KnownPairSet,
    avg_cardinality,
    block_invariant_image,
    block_mean_image,
    dermutation,
    error_ratio,
    get_permutation_matrix,
    kpa_low_level,
    known_plaintext_attack,
)


def _naive_candidates(plain, cipher):
    """Candidate sets by explicit tuple comparison."""
    P = np.stack([f.pixels.ravel() for f in plain], axis=1)
    C = np.stack([f.pixels.ravel() for f in cipher], axis=1)
    return [set(np.flatnonzero((C == P[s]).all(axis=1)).tolist()) for s in range(P.shape[0])]


def test_unique_tuples_recover_exactly(rng):
    W = PermutationMatrix(rng.permutation(64), (8, 8))
    plain = [Image(np.arange(64).reshape(8, 8), 64)]
    cm, est = get_permutation_matrix(KnownPairSet(plain, [apply_permutation(plain[0], W)]))
    assert est == W
    assert avg_cardinality(cm) == 1


def test_constant_image_gives_everything():
    f = Image(np.full((4, 5), 3), 8)
    cm, _ = get_permutation_matrix(KnownPairSet([f], [f]))
    assert (cm.cardinality() == 20).all()
    assert avg_cardinality(cm) == 20


def test_random_permutation_two_images(rng):
    W = PermutationMatrix(rng.permutation(64), (8, 8))
    plain = [random_image(rng, 8, 8) for _ in range(2)]
    cipher = [apply_permutation(f, W) for f in plain]
    cm, est = get_permutation_matrix(KnownPairSet(plain, cipher))
    naive = _naive_candidates(plain, cipher)
    assert all(W.dest[s] in naive[s] for s in range(64))
    assert cm.contains(W).all()
    card = cm.cardinality().ravel()
    assert [len(c) for c in naive] == card.tolist()
    singletons = card == 1
    assert np.array_equal(est.dest[singletons], W.dest[singletons])


@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(2, 6), st.integers(1, 6),
       st.sampled_from([2, 3, 256]))
@settings(max_examples=60, deadline=None)
def test_candidates_match_naive_and_shrink(seed, n, H, W, T):
    rng = np.random.default_rng(seed)
    perm = PermutationMatrix(rng.permutation(H * W), (H, W))
    plain = [random_image(rng, H, W, T) for _ in range(n)]
    cipher = [apply_permutation(f, perm) for f in plain]
    pairs = KnownPairSet(plain, cipher)
    previous = None
    for m in range(1, n + 1):
        cm, est = get_permutation_matrix(pairs.head(m))
        naive = _naive_candidates(plain[:m], cipher[:m])
        for s in range(H * W):
            assert set(c[0] * W + c[1] for c in cm.candidates(*divmod(s, W))) == naive[s]
        assert cm.contains(perm).all()
        assert cm.contains(est).all()
        card = cm.cardinality()
        if previous is not None:
            assert (card <= previous).all()
        previous = card


def test_unrelated_pairs_raise():
    p = Image([[0, 1]], 4)
    c = Image([[2, 3]], 4)
    with pytest.raises(InconsistentPairsError):
        get_permutation_matrix(KnownPairSet([p], [c]))


def test_mismatched_bucket_sizes_warn():
    p = Image([[0, 0, 1]], 4)
    c = Image([[0, 1, 1]], 4)
    with pytest.warns(RuntimeWarning):
        get_permutation_matrix(KnownPairSet([p], [c]))


def test_empty_pair_set():
    with pytest.raises(ParamError):
        KnownPairSet([], [])


def test_error_ratio():
    a = Image([[1, 2], [3, 4]], 8)
    assert error_ratio(a, a) == 0
    assert error_ratio(a, Image([[1, 2], [3, 5]], 8)) == 0.25


# -- block features -------------------------------------------------------------

def test_block_mean_hand_examples():
    p = PublicParams(2, 2, 0, 0, 0, 1)
    assert (block_mean_image(Image(np.full((4, 4), 9), 16), p).pixels == 9).all()
    img = np.zeros((4, 4), dtype=int)
    img[:2, 2:] = 255
    assert block_mean_image(Image(img), p).pixels.tolist() == [[0, 255], [0, 0]]
    assert block_mean_image(Image([[1, 2], [3, 4]], 8), p).pixels.tolist() == [[2]]


@pytest.mark.parametrize("kind", ["mean", "histogram"])
def test_features_ignore_in_block_layout(kind, rng):
    p = PublicParams(4, 4, 1, 1, 1, 1)
    img = random_image(rng, 8, 8, 16)
    hp = HierarchicalPermutation(PermutationMatrix.identity((2, 2)),
                                 tuple(PermutationMatrix(rng.permutation(16), (4, 4)) for _ in range(4)))
    shuffled = apply_permutation(img, flatten(hp, p))
    assert np.array_equal(block_invariant_image(img, p, kind), block_invariant_image(shuffled, p, kind))


def test_features_collide_on_equal_multisets():
    p = PublicParams(2, 2, 0, 0, 0, 1)
    img = Image([[0, 1, 1, 0], [1, 0, 0, 1]], 2)
    for kind in ("mean", "histogram"):
        f = block_invariant_image(img, p, kind)
        assert np.array_equal(f[0, 0], f[0, 1])


def test_histogram_feature_separates_equal_means():
    p = PublicParams(2, 2, 0, 0, 0, 1)
    img = Image([[1, 1, 0, 2], [1, 1, 1, 1]], 4)
    assert block_invariant_image(img, p, "mean")[0, 0] == block_invariant_image(img, p, "mean")[0, 1]
    h = block_invariant_image(img, p, "histogram")
    assert not np.array_equal(h[0, 0], h[0, 1])


# -- hierarchical attack --------------------------------------------------------

def test_distinct_block_means_give_exact_high_level(rng):
    p = PublicParams(4, 4, 1, 1, 1, 2)
    base = rng.permutation(16) * 16
    img = Image(np.kron(base.reshape(4, 4), np.ones((4, 4), dtype=int)) + rng.integers(0, 2, (16, 16)), 256)
    key = random_key(rng)
    res = known_plaintext_attack(KnownPairSet([img], [encrypt(img, key, p)]), p, "mean")
    assert res.W0 == extract_permutation(key, p, 16, 16).high


def test_single_block_high_level_is_identity(rng):
    p = PublicParams(8, 8, 1, 1, 1, 1)
    img, key = random_image(rng, 8, 8), random_key(rng)
    res = known_plaintext_attack(KnownPairSet([img], [encrypt(img, key, p)]), p)
    assert res.W0.is_identity()


def test_low_level_with_true_high_recovers_blocks(rng):
    p = PublicParams(4, 4, 1, 1, 1, 1)
    key = random_key(rng)
    truth = extract_permutation(key, p, 16, 16)
    # ceil(log_256(2 * (16 - 1))) = 1, take 2 for margin
    plain = [random_image(rng, 16, 16) for _ in range(2)]
    pairs = KnownPairSet(plain, [encrypt(f, key, p) for f in plain])
    low = kpa_low_level(pairs, truth.high, p)
    exact = sum(m == truth.low[int(truth.high.dest[b])] for b, (_, m) in enumerate(low))
    assert exact >= 15


def test_constant_images_low_level_is_unknown(rng):
    p = PublicParams(4, 4, 1, 1, 1, 1)
    f = Image(np.full((8, 8), 7), 256)
    low = kpa_low_level(KnownPairSet([f], [f]), PermutationMatrix.identity((2, 2)), p)
    assert all((cm.cardinality() == 16).all() for cm, _ in low)


def test_dermutation_true_and_identity(rng):
    p = PublicParams(4, 4, 1, 1, 1, 2)
    img, key = random_image(rng, 16, 16), random_key(rng)
    hp = extract_permutation(key, p, 16, 16)
    inv = invert_hierarchical(hp)
    c = encrypt(img, key, p)
    assert dermutation(inv.high, inv.low, c, p) == img
    ident = [PermutationMatrix.identity((4, 4))] * 16
    assert dermutation(PermutationMatrix.identity((4, 4)), ident, c, p) == c


def test_dermutation_matches_flat_inverse(rng):
    p = PublicParams(4, 4, 1, 1, 1, 2)
    hp = HierarchicalPermutation(PermutationMatrix(rng.permutation(4), (2, 2)),
                                 tuple(PermutationMatrix(rng.permutation(16), (4, 4)) for _ in range(4)))
    img = random_image(rng, 8, 8)
    c = apply_permutation(img, flatten(hp, p))
    inv = invert_hierarchical(hp)
    assert dermutation(inv.high, inv.low, c, p) == img


def test_kpa_sound_and_monotone(rng):
    p = PublicParams(8, 8, 2, 1, 1, 2)
    key = random_key(rng)
    truth = flatten(extract_permutation(key, p, 32, 32), p)
    plain = [random_image(rng, 32, 32, 16) for _ in range(4)]
    pairs = KnownPairSet(plain, [encrypt(f, key, p) for f in plain])
    prev = None
    for n in range(1, 5):
        res = known_plaintext_attack(pairs.head(n), p)
        assert res.candidates.contains(truth).all()
        if prev is not None:
            assert res.avg_cardinality <= prev
        prev = res.avg_cardinality
    assert isinstance(prev, Fraction)
