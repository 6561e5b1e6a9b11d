"""Command-line pipeline: prepare, train, caption, eval, make-fixture.

Every option can also come from a `key = value` config file passed with
--config; precedence is CLI flag > config file > built-in default.
Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.
"""

import argparse
from concurrent.futures import ThreadPoolExecutor
import os
import sys

import numpy as np

from . import __version__
from . import corpus as corpus_mod
from . import evaluation, fixture
from . import model as mdl
from . import training
from .features import FeatureStore, load_manifest, read_feature_file
from .tokenizer import Tokenizer
from .util import InputError, fmt6

_UNSET = object()

TOKENIZER_FILE = "tokenizer.txt"
METRICS_FILE = "metrics.csv"


def _add_options(sub, table):
    """Register options whose defaults resolve after config merging.

    table rows: (flags, dest, kind, default, required, help).  kind bool
    makes a value-less flag; its config form takes true/false.
    """
    types, defaults, required = {}, {}, []
    for flags, dest, kind, default, req, hlp in table:
        if kind is bool:
            sub.add_argument(*flags, dest=dest, action="store_const", const=True,
                             default=_UNSET, help=hlp)
        else:
            sub.add_argument(*flags, dest=dest, type=kind, default=_UNSET,
                             metavar=dest.upper(), help=hlp)
        types[dest] = kind
        defaults[dest] = default
        if req:
            required.append(dest)
    sub.add_argument("--config", dest="config", type=str, default=_UNSET,
                     metavar="FILE", help="key = value file with option defaults")
    types["config"] = str
    defaults["config"] = None
    sub.set_defaults(_types=types, _defaults=defaults, _required=required)


def read_config_file(path):
    """Parse `key = value` lines; `#` comments and blank lines ignored."""
    values = {}
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read config file: {e}") from e
    with fh:
        for ln, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise InputError(f"{path}:{ln}: expected 'key = value'")
            key, _, value = line.partition("=")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _coerce(raw, kind, key):
    if kind is bool:
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise InputError(f"config value for '{key}' is not a boolean: '{raw}'")
    try:
        return kind(raw)
    except ValueError:
        raise InputError(f"config value for '{key}' is not a valid "
                         f"{kind.__name__}: '{raw}'") from None


def _resolve_options(ns):
    """Apply CLI > config > default precedence onto the namespace."""
    config_path = ns.config if ns.config is not _UNSET else None
    values = read_config_file(config_path) if config_path else {}
    for key in values:
        if key not in ns._types or key == "config":
            raise InputError(f"unknown config key '{key}' for command '{ns.command}'")
    for dest, default in ns._defaults.items():
        if getattr(ns, dest) is _UNSET:
            if dest in values:
                setattr(ns, dest, _coerce(values[dest], ns._types[dest], dest))
            else:
                setattr(ns, dest, default)
    for dest in ns._required:
        if getattr(ns, dest) is None:
            raise InputError(f"missing required option --{dest.replace('_', '-')} "
                             f"(or config key '{dest}')")


_MODEL_OPTS = [
    (["--frames"], "frames", int, 80, False, "encoder timesteps per video"),
    (["--feature-dim"], "feature_dim", int, 4096, False, "per-frame feature width"),
    (["--latent"], "latent", int, 512, False, "LSTM hidden size"),
    (["--max-words"], "max_words", int, 10, False, "decoder timesteps"),
    (["--vocab"], "vocab", int, 1500, False, "vocabulary cap"),
]


def _model_config(ns):
    return mdl.ModelConfig(ns.frames, ns.feature_dim, ns.latent,
                           ns.max_words, ns.vocab).validate()


def _load_tokenizer_for(ns, cfg):
    tok = Tokenizer.load(os.path.join(ns.out, TOKENIZER_FILE))
    if tok.cap != cfg.vocab:
        raise RuntimeError(f"tokenizer cap {tok.cap} does not match "
                           f"vocabulary size {cfg.vocab}")
    return tok


def cmd_prepare(ns):
    """Build split key files, the tokenizer file, and a summary."""
    raw = corpus_mod.parse_descriptions(ns.descriptions)
    corp = corpus_mod.build_corpus(raw)
    if not corp.entries:
        raise InputError("no captions survived filtering")
    split = corpus_mod.split_keys(corp, ns.seed)
    tok = Tokenizer(ns.vocab)
    tok.fit(caption for key in split.train_keys for caption in corp.entries[key])
    manifest = load_manifest(ns.manifest)
    missing = sum(1 for key in corp.entries if key not in manifest)
    os.makedirs(ns.out, exist_ok=True)
    corpus_mod.save_split(split, ns.out)
    tok.save(os.path.join(ns.out, TOKENIZER_FILE))
    lines = [
        f"videos: {len(corp.entries)}",
        f"captions kept: {corp.kept}",
        f"captions dropped: {corp.dropped}",
        f"malformed lines skipped: {raw.skipped}",
        f"vocabulary size: {tok.size} (cap {tok.cap})",
        f"split sizes: train={len(split.train_keys)} val={len(split.val_keys)} "
        f"test={len(split.test_keys)}",
        f"videos missing features: {missing}",
    ]
    with open(os.path.join(ns.out, "summary.txt"), "w", encoding="utf-8") as fh:
        fh.write("".join(line + "\n" for line in lines))
    for line in lines:
        print(line)
    return 0


def cmd_train(ns):
    """Train from prepare artifacts; write checkpoints and metrics.csv."""
    cfg = _model_config(ns)
    tok = _load_tokenizer_for(ns, cfg)
    train_keys = corpus_mod.load_split_keys(ns.out, "train")
    val_keys = corpus_mod.load_split_keys(ns.out, "val")
    corp = corpus_mod.build_corpus(corpus_mod.parse_descriptions(ns.descriptions))
    store = FeatureStore(ns.manifest, cache=not ns.no_cache,
                         expected_shape=(cfg.frames, cfg.feature_dim))
    params = mdl.ModelParams.init(cfg, ns.seed)
    tcfg = training.TrainConfig(
        batch_size=ns.batch_size, epochs=ns.epochs, lr=ns.lr, seed=ns.seed,
        mask_padding=not ns.no_mask_padding, prefix_expansion=ns.prefix_expansion,
        checkpoint_every=ns.checkpoint_every, threads=ns.threads)
    params, history = training.train(params, tcfg, cfg, train_keys, val_keys,
                                     corp, tok, store, out_dir=ns.out, log=print)
    history.to_csv(os.path.join(ns.out, METRICS_FILE))
    print(f"final checkpoint: {os.path.join(ns.out, f'ckpt-{tcfg.epochs}.sq2s')}")
    return 0


def cmd_caption(ns):
    """Print the greedy caption for one video or feature file."""
    cfg, params, _ = mdl.load_checkpoint(ns.checkpoint)
    tok = Tokenizer.load(ns.tokenizer)
    if tok.cap != cfg.vocab:
        raise RuntimeError(f"tokenizer cap {tok.cap} does not match "
                           f"checkpoint vocabulary {cfg.vocab}")
    if ns.features:
        feat = read_feature_file(ns.features)
    elif ns.video_id and ns.manifest:
        feat = FeatureStore(ns.manifest).get(ns.video_id)
    else:
        raise InputError("need --features, or both --manifest and --video-id")
    if feat.shape != (cfg.frames, cfg.feature_dim):
        raise RuntimeError(f"features have shape {feat.shape}, checkpoint "
                           f"expects {(cfg.frames, cfg.feature_dim)}")
    print(" ".join(mdl.greedy_decode(params, tok, feat, cfg.max_words)))
    return 0


def cmd_eval(ns):
    """Caption a whole split and write report/summary/histogram CSVs."""
    cfg, params, _ = mdl.load_checkpoint(ns.checkpoint)
    tok = _load_tokenizer_for(ns, cfg)
    keys = corpus_mod.load_split_keys(ns.out, ns.split)
    corp = corpus_mod.build_corpus(corpus_mod.parse_descriptions(ns.descriptions))
    store = FeatureStore(ns.manifest, cache=not ns.no_cache,
                         expected_shape=(cfg.frames, cfg.feature_dim))
    decode = lambda key: mdl.greedy_decode(params, tok, store.get(key), cfg.max_words)
    if ns.threads > 1:
        with ThreadPoolExecutor(max_workers=ns.threads) as pool:
            predictions = dict(zip(keys, pool.map(decode, keys)))
    else:
        predictions = {key: decode(key) for key in keys}
    report = evaluation.evaluate_split(predictions, corp, keys, ns.split)
    evaluation.write_report_csv(os.path.join(ns.out, "report.csv"), report)
    evaluation.write_summary_csv(os.path.join(ns.out, "summary.csv"), report)
    evaluation.write_histogram_csv(os.path.join(ns.out, "histogram.csv"), report)
    print(f"{ns.split}: {len(report.rows)} videos, mean BLEU-2 {fmt6(report.mean)}")
    return 0


def cmd_make_fixture(ns):
    """Generate a synthetic corpus for tests and demos."""
    paths = fixture.make_fixture(ns.out, n_videos=ns.n_videos, seed=ns.seed,
                                 captions_per_video=ns.captions_per_video,
                                 frames=ns.frames, feature_dim=ns.feature_dim)
    print(f"wrote {ns.n_videos} videos under {ns.out}")
    print(f"descriptions: {paths['descriptions']}")
    print(f"manifest: {paths['manifest']}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="vidcap",
        description="Encoder-decoder LSTM video captioning on precomputed "
                    "per-frame features.")
    parser.add_argument(
        "--version", action="version",
        version=f"vidcap {__version__} (checkpoint format {mdl.CHECKPOINT_VERSION})")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("prepare", help="parse captions, split keys, fit tokenizer")
    _add_options(p, [
        (["--descriptions"], "descriptions", str, None, True, "caption text file"),
        (["--manifest"], "manifest", str, None, True, "feature manifest file"),
        (["--out"], "out", str, None, True, "output directory"),
        (["--vocab"], "vocab", int, 1500, False, "vocabulary cap"),
        (["--seed"], "seed", int, 42, False, "split shuffle seed"),
    ])
    p.set_defaults(func=cmd_prepare)

    p = subs.add_parser("train", help="train the model on the prepared splits")
    _add_options(p, _MODEL_OPTS + [
        (["--descriptions"], "descriptions", str, None, True, "caption text file"),
        (["--manifest"], "manifest", str, None, True, "feature manifest file"),
        (["--out"], "out", str, None, True, "directory with prepare artifacts"),
        (["--batch-size"], "batch_size", int, 50, False, "samples per Adam step"),
        (["--epochs"], "epochs", int, 80, False, "training epochs"),
        (["--lr"], "lr", float, 1e-4, False, "Adam learning rate"),
        (["--seed"], "seed", int, 42, False, "init and shuffle seed"),
        (["--threads"], "threads", int, 1, False, "worker threads per batch"),
        (["--checkpoint-every"], "checkpoint_every", int, 0, False,
         "extra checkpoint every N epochs (0 = final only)"),
        (["--prefix-expansion"], "prefix_expansion", bool, False, False,
         "one training sample per caption prefix instead of shift-by-one"),
        (["--no-mask-padding"], "no_mask_padding", bool, False, False,
         "score padding rows in the loss"),
        (["--no-cache"], "no_cache", bool, False, False,
         "re-read feature files instead of caching"),
    ])
    p.set_defaults(func=cmd_train)

    p = subs.add_parser("caption", help="greedy-caption one video")
    _add_options(p, [
        (["--checkpoint"], "checkpoint", str, None, True, "model checkpoint"),
        (["--tokenizer"], "tokenizer", str, None, True, "tokenizer file"),
        (["--manifest"], "manifest", str, None, False, "feature manifest file"),
        (["--video-id"], "video_id", str, None, False, "video id in the manifest"),
        (["--features"], "features", str, None, False, "a .vfm feature file"),
    ])
    p.set_defaults(func=cmd_caption)

    p = subs.add_parser("eval", help="score a whole split with BLEU-2")
    _add_options(p, [
        (["--checkpoint"], "checkpoint", str, None, True, "model checkpoint"),
        (["--descriptions"], "descriptions", str, None, True, "caption text file"),
        (["--manifest"], "manifest", str, None, True, "feature manifest file"),
        (["--out"], "out", str, None, True, "directory with prepare artifacts"),
        (["--split"], "split", str, "test", False, "train, val or test"),
        (["--threads"], "threads", int, 1, False, "decoding worker threads"),
        (["--no-cache"], "no_cache", bool, False, False,
         "re-read feature files instead of caching"),
    ])
    p.set_defaults(func=cmd_eval)

    p = subs.add_parser("make-fixture", help="write a synthetic toy corpus")
    _add_options(p, [
        (["--out"], "out", str, None, True, "output directory"),
        (["--n-videos"], "n_videos", int, 6, False, "number of videos"),
        (["--seed"], "seed", int, 1, False, "generator seed"),
        (["--captions-per-video"], "captions_per_video", int, 3, False,
         "caption repeats per video"),
        (["--frames"], "frames", int, 8, False, "feature rows per video"),
        (["--feature-dim"], "feature_dim", int, 16, False, "feature columns"),
    ])
    p.set_defaults(func=cmd_make_fixture)
    return parser


def main(argv=None):
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        _resolve_options(ns)
        return ns.func(ns)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (RuntimeError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def entry_point():
    sys.exit(main())
