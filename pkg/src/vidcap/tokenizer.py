"""Frequency-ranked vocabulary with index and one-hot conversions."""

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .util import InputError


@dataclass
class PaddedOneHot:
    """One-hot rows padded with all-zero rows up to a fixed row count."""

    matrix: np.ndarray
    length: int


class Tokenizer:
    """Word <-> index maps over a capped, frequency-ranked vocabulary.

    Indices are 1-based and dense; rank 1 is the most frequent word and
    frequency ties break by first occurrence in the fitted stream.
    Index 0 is reserved for padding and maps to no word.
    """

    def __init__(self, cap=1500):
        if cap < 1:
            raise InputError(f"vocabulary cap must be >= 1, got {cap}")
        self.cap = cap
        self.word_to_index = {}
        self.index_to_word = {}

    @property
    def size(self):
        return len(self.word_to_index)

    def fit(self, captions):
        """Build the vocabulary; captions must come from the training split."""
        counts = Counter()
        first_seen = {}
        for caption in captions:
            for word in caption:
                counts[word] += 1
                if word not in first_seen:
                    first_seen[word] = len(first_seen)
        if not counts:
            raise InputError("cannot fit tokenizer: no tokens in the caption stream")
        ranked = sorted(counts, key=lambda w: (-counts[w], first_seen[w]))
        self.word_to_index = {w: i + 1 for i, w in enumerate(ranked[:self.cap])}
        self.index_to_word = {i: w for w, i in self.word_to_index.items()}
        return self

    def encode(self, caption):
        """Map words to indices, dropping out-of-vocabulary words."""
        w2i = self.word_to_index
        return [w2i[w] for w in caption if w in w2i]

    def decode(self, indices):
        """Inverse of encode; every index must name a vocabulary word."""
        i2w = self.index_to_word
        words = []
        for idx in indices:
            if idx not in i2w:
                raise InputError(f"index {idx} is not in the vocabulary (1..{self.size})")
            words.append(i2w[idx])
        return words

    def pad_one_hot(self, indices, max_len):
        """One-hot rows for `indices`, zero-padded to max_len rows.

        Row width is the vocabulary cap, so the decoder input shape is
        fixed regardless of how many words the fit actually produced.
        """
        if len(indices) > max_len:
            raise InputError(f"{len(indices)} indices exceed the {max_len}-row limit")
        m = np.zeros((max_len, self.cap), dtype=np.float32)
        for r, idx in enumerate(indices):
            if not 1 <= idx <= self.cap:
                raise InputError(f"index {idx} outside [1, {self.cap}]")
            m[r, idx - 1] = 1.0
        return PaddedOneHot(m, len(indices))

    def save(self, path):
        """Write `V=<cap>` then one `<index>\\t<word>` line per entry."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"V={self.cap}\n")
            for idx in range(1, self.size + 1):
                fh.write(f"{idx}\t{self.index_to_word[idx]}\n")

    @classmethod
    def load(cls, path):
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip()
            if not header.startswith("V="):
                raise InputError(f"{path}: expected 'V=<cap>' header, got '{header}'")
            try:
                tok = cls(int(header[2:]))
            except ValueError:
                raise InputError(f"{path}: bad cap in header '{header}'") from None
            for ln, line in enumerate(fh, 2):
                line = line.rstrip("\n")
                if not line:
                    continue
                if "\t" not in line:
                    raise InputError(f"{path}:{ln}: expected '<index>\\t<word>'")
                idx_str, word = line.split("\t", 1)
                try:
                    idx = int(idx_str)
                except ValueError:
                    raise InputError(f"{path}:{ln}: bad index '{idx_str}'") from None
                if word in tok.word_to_index or idx in tok.index_to_word:
                    raise InputError(f"{path}:{ln}: duplicate entry")
                tok.word_to_index[word] = idx
                tok.index_to_word[idx] = word
        if sorted(tok.index_to_word) != list(range(1, tok.size + 1)):
            raise InputError(f"{path}: indices are not dense and 1-based")
        if tok.size > tok.cap:
            raise InputError(f"{path}: {tok.size} entries exceed the cap {tok.cap}")
        return tok
