import numpy as np
import pytest

from hcie import _backend, _fallback
from hcie.keystream import Key

BACKENDS = _backend.available()
IDS = [b.NAME for b in BACKENDS]


@pytest.fixture(params=BACKENDS, ids=IDS)
def kernels(request):
    return request.param


@pytest.mark.parametrize("L", [4, 8, 16, 31, 32])
def test_logistic_agrees(kernels, L):
    k = Key.from_real("0.61", "3.77", L)
    a = kernels.logistic_bytes(k.x0, k.mu, L, 500)
    assert np.array_equal(a, _fallback.logistic_bytes(k.x0, k.mu, L, 500))


@pytest.mark.parametrize("shape,params", [((4, 4), (1, 1, 1, 1)), ((5, 7), (2, 1, 1, 3)),
                                          ((32, 32), (4, 2, 1, 2))])
def test_sub_hcie_agrees(kernels, shape, params, rng):
    seg = (3 * shape[0] + 3 * shape[1] - 2) * params[3]
    bits = rng.integers(0, 2, seg).astype(np.uint8)
    got = kernels.sub_hcie_gather(*shape, bits, *params)
    assert np.array_equal(got, _fallback.sub_hcie_gather(*shape, bits, *params))
    assert sorted(got.tolist()) == list(range(shape[0] * shape[1]))


def test_densify_first_occurrence(kernels):
    ids, n = kernels.densify(np.array([50, 7, 50, 9, 7, 1 << 40]))
    assert np.asarray(ids).tolist() == [0, 1, 0, 2, 1, 3] and n == 4


def test_bucket_order_is_stable(kernels, rng):
    ids = rng.integers(0, 5, 200)
    assert np.array_equal(kernels.bucket_order(ids, 5), np.argsort(ids, kind="stable"))


def test_brute_scan_agrees(kernels, rng):
    from hcie.cipher import encrypt
    from hcie.model import Image, PublicParams
    p = PublicParams(4, 4, 1, 1, 1, 1)
    plain = Image(rng.integers(0, 256, (16, 16)))
    key = Key(9, 13, 4)
    cipher = encrypt(plain, key, p)
    x0s = np.arange(1, 16, dtype=np.uint64)
    mus = np.arange(1, 17, dtype=np.uint64)
    args = (plain.pixels, cipher.pixels, 16, 16, 4, 4, 1, 1, 1, 1, 4, x0s, mus)
    got = sorted(kernels.brute_force_scan(*args))
    assert (9, 13) in got
    assert got == sorted(_fallback.brute_force_scan(*args))


def test_active_backend_is_reported():
    import hcie
    assert hcie.BACKEND in IDS
