import numpy as np
import pytest

from conftest import PRESETS, random_key
from hcie.cipher import encrypt, extract_permutation
from hcie.errors import InconsistentPairsError, ParamError
from hcie.experiment import run_cpa_demo
from hcie.model import PublicParams, flatten
from hcie.plaintext import KnownPairSet, ceil_log, cpa_construct, cpa_count, cpa_recover


@pytest.mark.parametrize("base,x,n", [(256, 65536, 2), (256, 65537, 3), (256, 256, 1), (2, 1, 0), (3, 10, 3)])
def test_ceil_log(base, x, n):
    assert ceil_log(base, x) == n


def test_counts():
    p16 = PRESETS["s16"]
    assert cpa_count("flat", 256, 256, 256, p16) == 2
    assert cpa_count("combined", 256, 256, 256, p16) == 1
    assert cpa_count("two_phase", 256, 256, 256, p16) == 2
    with pytest.raises(ParamError):
        cpa_count("other", 256, 256, 256, p16)


def test_flat_images_are_orthogonal():
    images = cpa_construct("flat", 16, 16, 4, PublicParams(4, 4, 1, 1, 1, 1))
    tuples = np.stack([f.pixels.ravel() for f in images], axis=1)
    assert len({tuple(t) for t in tuples}) == 256


@pytest.mark.parametrize("M,T,params", [(16, 4, (4, 4, 1, 1, 1, 1)), (32, 16, (8, 8, 2, 1, 1, 2))])
def test_small_modes(M, T, params, rng):
    p = PublicParams(*params)
    key = random_key(rng)
    truth = extract_permutation(key, p, M, M)
    for mode in ("flat", "two_phase", "combined"):
        chosen = cpa_construct(mode, M, M, T, p)
        res = cpa_recover(KnownPairSet(chosen, [encrypt(f, key, p) for f in chosen]), mode, p)
        if mode == "flat":
            assert res.permutation == flatten(truth, p)
        elif mode == "two_phase":
            assert res.permutation == truth
        else:
            assert res.permutation.high == truth.high
            assert all(len(v) <= 2 for v in res.ambiguous.values())
            assert all(set(v) <= {0, b} for b, v in res.ambiguous.items())


def test_flat_rejects_non_orthogonal(rng):
    p = PublicParams(4, 4, 1, 1, 1, 1)
    # block-constant images: every pixel of a block shares its tuple
    chosen = cpa_construct("two_phase", 16, 16, 256, p)[:1]
    with pytest.raises(InconsistentPairsError):
        cpa_recover(KnownPairSet(chosen, chosen), "flat", p)


@pytest.mark.parametrize("name", ["s16", "s32"])
def test_demo_s_configs(name):
    key = random_key(np.random.default_rng(3))
    p = PRESETS[name]
    assert run_cpa_demo(p, key, "flat").exact
    assert run_cpa_demo(p, key, "two_phase").exact
    r = run_cpa_demo(p, key, "combined")
    assert r.max_ambiguous_per_block <= 2
    assert r.ambiguous_positions <= 2 * p.block_count(256, 256)
