"""Encoder-decoder captioning model: assembly, training pass, inference.

The encoder LSTM consumes a frames x feature_dim matrix; its final
hidden and cell state initialize the decoder LSTM, which consumes
one-hot token rows.  A shared dense softmax head maps every decoder
hidden state to a distribution over the vocabulary.
"""

from dataclasses import dataclass, field
import struct

import numpy as np

from . import nn
from .util import InputError

CHECKPOINT_MAGIC = b"SQ2S"
CHECKPOINT_VERSION = 1

# fixed serialization order; Adam mirrors are written as m.<name>, v.<name>
TENSOR_ORDER = ("encoder.W", "encoder.U", "encoder.b",
                "decoder.W", "decoder.U", "decoder.b",
                "head.W", "head.b")


@dataclass
class ModelConfig:
    frames: int = 80
    feature_dim: int = 4096
    latent: int = 512
    max_words: int = 10
    vocab: int = 1500

    def validate(self):
        for name in ("frames", "feature_dim", "latent", "max_words", "vocab"):
            value = getattr(self, name)
            if value < 1:
                raise InputError(f"{name} must be positive, got {value}")
        return self


def param_count(cfg):
    """Closed-form parameter counts: (encoder, decoder, head, total)."""
    enc = 4 * (cfg.feature_dim + cfg.latent + 1) * cfg.latent
    dec = 4 * (cfg.vocab + cfg.latent + 1) * cfg.latent
    head = (cfg.latent + 1) * cfg.vocab
    return enc, dec, head, enc + dec + head


@dataclass
class ModelParams:
    encoder: nn.LstmParams
    decoder: nn.LstmParams
    head: nn.DenseParams

    @classmethod
    def init(cls, cfg, seed, dtype=np.float32):
        """Seeded initialization; identical seeds give identical tensors."""
        rng = np.random.default_rng(seed)
        return cls(nn.init_lstm_params(rng, cfg.feature_dim, cfg.latent, dtype),
                   nn.init_lstm_params(rng, cfg.vocab, cfg.latent, dtype),
                   nn.init_dense_params(rng, cfg.latent, cfg.vocab, dtype))

    def tensors(self):
        """Named parameter tensors in the fixed checkpoint order."""
        return {"encoder.W": self.encoder.W, "encoder.U": self.encoder.U,
                "encoder.b": self.encoder.b,
                "decoder.W": self.decoder.W, "decoder.U": self.decoder.U,
                "decoder.b": self.decoder.b,
                "head.W": self.head.W, "head.b": self.head.b}

    def astype(self, dtype):
        """Copy of the parameters in another dtype (gradient-check mode)."""
        t = {k: v.astype(dtype) for k, v in self.tensors().items()}
        return _params_from_tensors(t)


def _params_from_tensors(t):
    return ModelParams(
        nn.LstmParams(t["encoder.W"], t["encoder.U"], t["encoder.b"]),
        nn.LstmParams(t["decoder.W"], t["decoder.U"], t["decoder.b"]),
        nn.DenseParams(t["head.W"], t["head.b"]))


def _rows(x):
    return x.matrix if hasattr(x, "matrix") else np.asarray(x)


def training_forward(params, feat, dec_in):
    """Teacher-forced pass: encode all frames, decode all target steps.

    The encoder's final (h, c) seed the decoder; every decoder hidden
    state goes through the softmax head.  Returns (P, caches) with one
    probability row per decoder step.
    """
    _, h, c, enc_caches = nn.lstm_forward(params.encoder, np.asarray(feat))
    H, _, _, dec_caches = nn.lstm_forward(params.decoder, _rows(dec_in), h, c)
    P = nn.dense_softmax_forward(params.head, H)
    return P, (enc_caches, dec_caches, H, P)


def training_backward(params, caches, target, mask_padding=True):
    """Loss and parameter gradients for a cached training_forward pass.

    Gradients flow from the head through the decoder and on into the
    encoder via the initial-state connection.
    """
    enc_caches, dec_caches, H, P = caches
    loss, d_logits = nn.cross_entropy(P, _rows(target), mask_padding)
    dW_h, db_h, dH = nn.dense_softmax_backward(params.head, H, d_logits)
    dW_d, dU_d, db_d, _, dh0, dc0 = nn.lstm_backward(params.decoder, dec_caches, dH)
    dW_e, dU_e, db_e, _, _, _ = nn.lstm_backward(params.encoder, enc_caches,
                                                 None, dh0, dc0)
    grads = {"encoder.W": dW_e, "encoder.U": dU_e, "encoder.b": db_e,
             "decoder.W": dW_d, "decoder.U": dU_d, "decoder.b": db_d,
             "head.W": dW_h, "head.b": db_h}
    return loss, grads


def encode_video(params, feat):
    """Final encoder state only; per-frame outputs are discarded."""
    _, h, c, _ = nn.lstm_forward(params.encoder, np.asarray(feat))
    return h, c


@dataclass
class DecodeState:
    h: np.ndarray
    c: np.ndarray
    emitted: list = field(default_factory=list)


def decode_step(params, state, token_index):
    """One decoder step on a single token index from the given state."""
    V = params.decoder.input_dim
    if not 1 <= token_index <= V:
        raise InputError(f"token index {token_index} outside [1, {V}]")
    x = np.zeros(V, dtype=params.decoder.W.dtype)
    x[token_index - 1] = 1.0
    h, c, _ = nn.lstm_cell_forward(params.decoder, x, state.h, state.c)
    logits = h @ params.head.W + params.head.b
    probs = nn.softmax_rows(logits[None, :])[0]
    return probs, DecodeState(h, c, list(state.emitted))


def greedy_decode(params, tok, feat, max_words=10):
    """Greedy captioning: feed bos, take the argmax, re-feed, stop on eos.

    At most max_words decode steps run, so the caption never exceeds
    max_words words; the returned list contains neither sentinel.  The
    argmax runs over the fitted vocabulary (ties to the lowest index); a
    degenerate bos prediction is re-fed but not emitted.
    """
    bos = tok.word_to_index.get("bos")
    eos = tok.word_to_index.get("eos")
    if bos is None or eos is None:
        raise InputError("tokenizer must contain 'bos' and 'eos'")
    h, c = encode_video(params, feat)
    state = DecodeState(h, c)
    prev = bos
    words = []
    for _ in range(max_words):
        probs, state = decode_step(params, state, prev)
        nxt = int(np.argmax(probs[:tok.size])) + 1
        if nxt == eos:
            break
        if nxt != bos:
            words.append(tok.index_to_word[nxt])
            state.emitted.append(nxt)
        prev = nxt
    return words


def _write_tensor(fh, name, arr):
    data = np.ascontiguousarray(arr, dtype="<f4")
    encoded = name.encode("utf-8")
    fh.write(struct.pack("<H", len(encoded)))
    fh.write(encoded)
    fh.write(struct.pack("<B", data.ndim))
    for dim in data.shape:
        fh.write(struct.pack("<I", dim))
    fh.write(data.tobytes())


def save_checkpoint(path, cfg, params, adam=None):
    """Serialize config and parameters, optionally with Adam moments.

    Tensors are written as float32 in a fixed order, so identical
    training runs produce byte-identical files.
    """
    tensors = dict(params.tensors())
    if adam is not None:
        for prefix, table in (("m", adam.m), ("v", adam.v)):
            for name in TENSOR_ORDER:
                if name not in table:
                    raise InputError(f"optimizer state is missing tensor '{name}'")
                tensors[f"{prefix}.{name}"] = table[name]
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<I", CHECKPOINT_VERSION))
        fh.write(struct.pack("<5I", cfg.frames, cfg.feature_dim, cfg.latent,
                             cfg.max_words, cfg.vocab))
        for name, arr in tensors.items():
            _write_tensor(fh, name, arr)


_EXPECTED_SHAPES = {
    "encoder.W": lambda c: (c.feature_dim, 4 * c.latent),
    "encoder.U": lambda c: (c.latent, 4 * c.latent),
    "encoder.b": lambda c: (4 * c.latent,),
    "decoder.W": lambda c: (c.vocab, 4 * c.latent),
    "decoder.U": lambda c: (c.latent, 4 * c.latent),
    "decoder.b": lambda c: (4 * c.latent,),
    "head.W": lambda c: (c.latent, c.vocab),
    "head.b": lambda c: (c.vocab,),
}


def load_checkpoint(path):
    """Read a checkpoint; returns (config, params, (m, v) or None)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 28:
        raise InputError(f"{path}: truncated header ({len(blob)} bytes)")
    if blob[:4] != CHECKPOINT_MAGIC:
        raise InputError(f"{path}: bad magic {blob[:4]!r}")
    (version,) = struct.unpack_from("<I", blob, 4)
    if version != CHECKPOINT_VERSION:
        raise InputError(f"{path}: unsupported format version {version}")
    cfg = ModelConfig(*struct.unpack_from("<5I", blob, 8))
    offset = 28
    tensors = {}
    try:
        while offset < len(blob):
            (name_len,) = struct.unpack_from("<H", blob, offset)
            offset += 2
            name = blob[offset:offset + name_len].decode("utf-8")
            offset += name_len
            (rank,) = struct.unpack_from("<B", blob, offset)
            offset += 1
            dims = struct.unpack_from(f"<{rank}I", blob, offset)
            offset += 4 * rank
            count = 1
            for dim in dims:
                count *= dim
            end = offset + 4 * count
            if end > len(blob):
                raise InputError(f"{path}: truncated payload for tensor '{name}'")
            tensors[name] = np.frombuffer(blob, dtype="<f4", count=count,
                                          offset=offset).reshape(dims).copy()
            offset = end
    except struct.error:
        raise InputError(f"{path}: truncated tensor record") from None
    missing = [n for n in TENSOR_ORDER if n not in tensors]
    if missing:
        raise InputError(f"{path}: missing tensors {missing}")
    for name, make_shape in _EXPECTED_SHAPES.items():
        want = make_shape(cfg)
        if tensors[name].shape != want:
            raise InputError(f"{path}: tensor '{name}' has shape "
                             f"{tensors[name].shape}, config implies {want}")
    params = _params_from_tensors(tensors)
    adam = None
    if any(k.startswith(("m.", "v.")) for k in tensors):
        for n in TENSOR_ORDER:
            if f"m.{n}" not in tensors or f"v.{n}" not in tensors:
                raise InputError(f"{path}: incomplete optimizer state for '{n}'")
        adam = ({n: tensors[f"m.{n}"] for n in TENSOR_ORDER},
                {n: tensors[f"v.{n}"] for n in TENSOR_ORDER})
    return cfg, params, adam
