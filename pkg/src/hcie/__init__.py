"""Hierarchical cyclic image encryption (HCIE) and attacks on its permutation-only structure."""
from . import _backend
from .cipher import RotationSpec, decrypt, encrypt, extract_permutation, rotate, sub_hcie
from .errors import (
    DimensionError,
    HCIEError,
    InconsistentPairsError,
    NotBijectiveError,
    ParamError,
    PGMFormatError,
    SearchSpaceTooLargeError,
    StreamExhaustedError,
)
from .keystream import DEFAULT_KEY, BitStream, Key, generate_bitstream
from .model import (
    HierarchicalPermutation,
    Image,
    PermutationMatrix,
    PublicParams,
    apply_permutation,
    flatten,
    invert,
)
from .plaintext import KnownPairSet, cpa_construct, cpa_recover, error_ratio, known_plaintext_attack

__version__ = "0.1.0"
BACKEND = _backend.NAME
