"""Command-line front end.

Exit codes: 0 success, 1 unexpected failure, 2 usage error, 3 file/format
error, 4 invalid parameters, 5 inconsistent attack input or keystream misuse.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import _backend
from .cipher import decrypt, encrypt, extract_permutation
from .ciphertext import (
    adjacency_contrast,
    block_similarity,
    brute_force,
    greedy_reassembly,
    neighbour_accuracy,
    placement_accuracy,
)
from .errors import HCIEError, ParamError
from .experiment import CONFIGS, ExperimentConfig, output_root, run_cpa_demo, run_kpa_experiment
from .io import pgm_read, pgm_write, save_candidates, save_hierarchical, save_permutation_csv
from .keystream import DEFAULT_KEY, Key, bits_to_text, generate_bitstream
from .model import BlockImage, PublicParams, assemble, flatten, invert, partition
from .plaintext import KnownPairSet, error_ratio, known_plaintext_attack

log = logging.getLogger("hcie")

DEFAULTS = {
    "sm": 32, "sn": 32, "alpha": 4, "beta": 2, "gamma": 1, "no": 2,
    "key_x0": str(DEFAULT_KEY.x0_real), "key_mu": str(DEFAULT_KEY.mu_real),
    "precision": DEFAULT_KEY.precision, "mode": None, "out": None,
}
INT_KEYS = {"sm", "sn", "alpha", "beta", "gamma", "no", "precision"}


class UsageError(HCIEError):
    exit_code = 2


def read_config_file(path: str) -> dict:
    """``key=value`` lines; ``#`` starts a comment; dashes in keys become underscores."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            k, v = (s.strip() for s in line.split("=", 1))
            k = k.replace("-", "_")
            if k not in DEFAULTS:
                raise UsageError(f"{path}:{lineno}: unknown key {k!r}")
            values[k] = v
    return values


def resolve(args) -> dict:
    """Defaults, then the config file, then explicit flags."""
    conf = dict(DEFAULTS)
    explicit = set()
    if args.preset:
        p = CONFIGS[args.preset]
        conf.update(sm=p.sm, sn=p.sn, alpha=p.alpha, beta=p.beta, gamma=p.gamma, no=p.no)
        explicit.update(("sm", "sn", "alpha", "beta", "gamma", "no"))
    if args.config:
        from_file = read_config_file(args.config)
        conf.update(from_file)
        explicit.update(from_file)
    for k in DEFAULTS:
        v = getattr(args, k, None)
        if v is not None:
            conf[k] = v
            explicit.add(k)
    args.explicit = explicit
    try:
        for k in INT_KEYS:
            conf[k] = int(conf[k])
    except ValueError as exc:
        raise ParamError(f"integer expected: {exc}") from exc
    return conf


def params_of(conf) -> PublicParams:
    return PublicParams(conf["sm"], conf["sn"], conf["alpha"], conf["beta"], conf["gamma"], conf["no"])


def key_of(conf) -> Key:
    return Key.from_real(conf["key_x0"], conf["key_mu"], conf["precision"])


def _out(conf, default=None):
    out = conf["out"] or default
    if out is None:
        raise UsageError("--out is required")
    return out


def _ensure_parent(path):
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


# -- subcommands --------------------------------------------------------------

def cmd_encrypt(args, conf):
    img = pgm_read(args.input)
    out = _out(conf)
    _ensure_parent(out)
    pgm_write(out, encrypt(img, key_of(conf), params_of(conf)))


def cmd_decrypt(args, conf):
    img = pgm_read(args.input)
    out = _out(conf)
    _ensure_parent(out)
    pgm_write(out, decrypt(img, key_of(conf), params_of(conf)))


def cmd_extract_perm(args, conf):
    if args.image:
        M, N = pgm_read(args.image).shape
    elif args.height and args.width:
        M, N = args.height, args.width
    else:
        raise UsageError("give --image or both --height and --width")
    params = params_of(conf)
    hp = extract_permutation(key_of(conf), params, M, N)
    out = _out(conf)
    _ensure_parent(out)
    save_hierarchical(out, hp)
    if args.flat_csv:
        save_permutation_csv(args.flat_csv, flatten(hp, params))
    print(f"matrices={len(hp)} grid={hp.high.shape[0]}x{hp.high.shape[1]} "
          f"block={hp.block_shape[0]}x{hp.block_shape[1]}")


def cmd_kpa(args, conf):
    if not args.plain:
        raise UsageError("kpa needs at least one known plain/cipher pair (--plain/--cipher)")
    if len(args.plain) != len(args.cipher or []):
        raise UsageError("--plain and --cipher need the same number of files")
    params = params_of(conf)
    pairs = KnownPairSet([pgm_read(p) for p in args.plain], [pgm_read(c) for c in args.cipher])
    result = known_plaintext_attack(pairs, params, args.kind)
    print(f"n={len(pairs)} avg_cardinality={float(result.avg_cardinality):.6f} "
          f"inconsistent_blocks={len(result.inconsistent_blocks)}")
    if args.save_perm:
        save_hierarchical(args.save_perm, result.permutation)
    if args.save_candidates:
        save_candidates(args.save_candidates, result.candidates)
    if args.target:
        decrypted = result.decrypt(pgm_read(args.target))
        out = _out(conf)
        _ensure_parent(out)
        pgm_write(out, decrypted)
        if args.truth:
            print(f"error_ratio={error_ratio(pgm_read(args.truth), decrypted):.6f}")


def cmd_cpa(args, conf):
    mode = conf["mode"] or "flat"
    report = run_cpa_demo(params_of(conf), key_of(conf), mode, args.height, args.width,
                          args.levels, out_dir=conf["out"])
    print("\n".join(report.lines()))


def cmd_brute(args, conf):
    # the planted-key demo defaults to a toy setup that finishes in well under a second
    demo = not args.plain
    precision = conf["precision"] if "precision" in args.explicit or not demo else 8
    if not demo:
        if not args.cipher:
            raise UsageError("--plain needs --cipher")
        plain, cipher = pgm_read(args.plain), pgm_read(args.cipher)
        params = params_of(conf)
        planted = None
    else:
        params = params_of(conf) if "sm" in args.explicit else PublicParams(4, 4, 1, 1, 1, 1)
        side = 4 * params.sm
        plain = _random_image(side, side, args.seed)
        planted = Key.from_real(conf["key_x0"], conf["key_mu"], precision)
        cipher = encrypt(plain, planted, params)
    log.info("brute: params=%s precision=%d demo=%s", params, precision, demo)
    report = brute_force(plain, cipher, params, precision, args.mu_near_four, args.max_precision)
    text = report.to_csv()
    if planted is not None:
        text += f"planted_recovered,{int(planted in report.matches)}\n"
    if conf["out"]:
        _ensure_parent(conf["out"])
        with open(conf["out"], "w") as fh:
            fh.write(text)
    sys.stdout.write(text)


def _random_image(M, N, seed):
    from .model import Image
    return Image(np.random.default_rng(seed).integers(0, 256, (M, N)), 256)


def cmd_coa_sim(args, conf):
    params, key = params_of(conf), key_of(conf)
    plain = pgm_read(args.input)
    cipher = encrypt(plain, key, params)
    sim = block_similarity(cipher, params, args.kind)
    placement = greedy_reassembly(sim)
    W0 = extract_permutation(key, params, *plain.shape).high
    adjacent, overall = adjacency_contrast(sim, W0)
    print(f"blocks={W0.dest.size} kind={sim.kind}")
    print(f"mean_score_adjacent={adjacent:.6f} mean_score_all={overall:.6f}")
    print(f"placement_accuracy={placement_accuracy(placement, W0):.4f} "
          f"neighbour_accuracy={neighbour_accuracy(placement, W0):.4f} "
          f"objective={placement.objective:.4f} ties={placement.ties}")
    if conf["out"]:
        os.makedirs(conf["out"], exist_ok=True)
        with open(os.path.join(conf["out"], "similarity.csv"), "w") as fh:
            fh.write(sim.to_csv())
        blocks = partition(cipher, params).blocks
        rows, cols = blocks.shape[:2]
        flat = blocks.reshape(rows * cols, params.sm, params.sn)
        layout = np.empty_like(flat)
        layout[placement.permutation.dest] = flat
        pgm_write(os.path.join(conf["out"], "cipher.pgm"), cipher)
        pgm_write(os.path.join(conf["out"], "reassembled.pgm"),
                  assemble(BlockImage(layout.reshape(blocks.shape), cipher.levels)))


def cmd_keystream_dump(args, conf):
    stream = generate_bitstream(key_of(conf), args.bits)
    print(bits_to_text(stream.take(args.bits)))


def cmd_experiment(args, conf):
    out = conf["out"] or output_root()
    names = [n.strip() for n in args.configs.split(",") if n.strip()]
    unknown = [n for n in names if n not in CONFIGS]
    if unknown:
        raise UsageError(f"unknown configurations {unknown}; choose from {sorted(CONFIGS)}")
    key = key_of(conf)
    for name in names:
        cfg = ExperimentConfig(name, CONFIGS[name], key, args.corpus or [],
                               tuple(range(1, args.max_known + 1)), out)
        rows = run_kpa_experiment(cfg)
        for r in rows:
            print(",".join(r.as_csv()))
    print(f"wrote {', '.join(os.path.join(out, n + '.csv') for n in names)}")


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("cipher configuration")
    for flag in ("sm", "sn", "alpha", "beta", "gamma", "no"):
        g.add_argument(f"--{flag}", type=int)
    g.add_argument("--key-x0", dest="key_x0", help="initial condition in (0, 1)")
    g.add_argument("--key-mu", dest="key_mu", help="control parameter in (0, 4]")
    g.add_argument("--precision", type=int, help="fixed-point bits L")
    g.add_argument("--preset", choices=sorted(CONFIGS), help="one of the three experiment setups")
    g.add_argument("--config", help="key=value file; flags override it")
    g.add_argument("--mode")
    g.add_argument("--out", "-o")
    g.add_argument("-q", "--quiet", action="store_true", default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="hcie", description=__doc__.splitlines()[0])
    parser.add_argument("-q", "--quiet", action="store_true", default=argparse.SUPPRESS,
                        help="only log warnings")
    parser.add_argument("--version", action="version", version=f"%(prog)s 0.1.0 ({_backend.NAME} kernels)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encrypt", parents=[common], help="encrypt a PGM image")
    p.add_argument("input")
    p.set_defaults(func=cmd_encrypt)

    p = sub.add_parser("decrypt", parents=[common], help="decrypt a PGM image")
    p.add_argument("input")
    p.set_defaults(func=cmd_decrypt)

    p = sub.add_parser("extract-perm", parents=[common], help="save the equivalent permutation matrices")
    p.add_argument("--image")
    p.add_argument("--height", type=int)
    p.add_argument("--width", type=int)
    p.add_argument("--flat-csv", help="also write the flat M x N matrix as CSV")
    p.set_defaults(func=cmd_extract_perm)

    p = sub.add_parser("kpa", parents=[common], help="hierarchical known-plaintext attack")
    p.add_argument("--plain", nargs="*", default=[])
    p.add_argument("--cipher", nargs="*", default=[])
    p.add_argument("--target", help="cipher-image to decrypt with the estimate")
    p.add_argument("--truth", help="true plain-image of --target, for the error ratio")
    p.add_argument("--kind", default="auto", choices=["auto", "mean", "histogram"])
    p.add_argument("--save-perm")
    p.add_argument("--save-candidates")
    p.set_defaults(func=cmd_kpa)

    p = sub.add_parser("cpa", parents=[common], help="chosen-plaintext attack demo (--mode flat|two_phase|combined)")
    p.add_argument("--height", type=int, default=256)
    p.add_argument("--width", type=int, default=256)
    p.add_argument("--levels", type=int, default=256)
    p.set_defaults(func=cmd_cpa)

    p = sub.add_parser("brute", parents=[common], help="exhaustive key search at toy precision")
    p.add_argument("--plain")
    p.add_argument("--cipher")
    p.add_argument("--mu-near-four", action="store_true", help="only mu in [3.57, 4]")
    p.add_argument("--max-precision", type=int, default=12)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_brute)

    p = sub.add_parser("coa-sim", parents=[common], help="block-histogram similarity of a cipher-image")
    p.add_argument("input", help="plain-image to encrypt and analyse")
    p.add_argument("--kind", default="intersection", choices=["intersection", "chi-square"])
    p.set_defaults(func=cmd_coa_sim)

    p = sub.add_parser("keystream-dump", parents=[common], help="print keystream bits as 0/1")
    p.add_argument("--bits", type=int, default=64)
    p.set_defaults(func=cmd_keystream_dump)

    p = sub.add_parser("experiment", parents=[common], help="known-plaintext curves over the corpus")
    p.add_argument("--corpus", nargs="*", help="corpus directory or PGM files (default: bundled)")
    p.add_argument("--configs", default="s256,s32,s16")
    p.add_argument("--max-known", type=int, default=5)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if getattr(args, "quiet", False) else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        conf = resolve(args)
        log.info("command=%s backend=%s config=%s", args.command, _backend.NAME,
                 " ".join(f"{k}={v}" for k, v in sorted(conf.items())))
        args.func(args, conf)
    except HCIEError as exc:
        print(f"hcie: error[{type(exc).__name__}]: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"hcie: error[io]: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
