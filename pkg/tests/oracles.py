"""Independent reference implementations used to cross-check the package.

Everything here is deliberately written in a different style from the
library (scalar loops, Fraction arithmetic) so a shared bug is unlikely.
"""

from fractions import Fraction
import math


def sigmoid_scalar(x):
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def lstm_cell_scalar(W, U, b, x, h_prev, c_prev):
    """Unvectorized LSTM step; gate blocks ordered [i, f, g, o]."""
    in_dim = len(x)
    hid = len(h_prev)
    z = [0.0] * (4 * hid)
    for j in range(4 * hid):
        s = float(b[j])
        for i in range(in_dim):
            s += float(x[i]) * float(W[i][j])
        for i in range(hid):
            s += float(h_prev[i]) * float(U[i][j])
        z[j] = s
    h = [0.0] * hid
    c = [0.0] * hid
    for k in range(hid):
        gate_i = sigmoid_scalar(z[k])
        gate_f = sigmoid_scalar(z[hid + k])
        gate_g = math.tanh(z[2 * hid + k])
        gate_o = sigmoid_scalar(z[3 * hid + k])
        c[k] = gate_f * float(c_prev[k]) + gate_i * gate_g
        h[k] = gate_o * math.tanh(c[k])
    return h, c


def _gram_list(tokens, n):
    return [tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1)]


def bleu2_oracle(candidate, references):
    """Brute-force BLEU-2: exact Fraction precisions, list-scan clipping."""
    c = len(candidate)
    if c == 0:
        return 0.0
    precisions = []
    for n in (1, 2):
        grams = _gram_list(candidate, n)
        if not grams:
            precisions.append(Fraction(0))
            continue
        clipped = 0
        for gram in set(grams):
            best = 0
            for ref in references:
                count = _gram_list(ref, n).count(gram)
                if count > best:
                    best = count
            clipped += min(grams.count(gram), best)
        precisions.append(Fraction(clipped, len(grams)))
    p1, p2 = precisions
    if p1 == 0 or p2 == 0:
        return 0.0
    r = sorted((abs(len(ref) - c), len(ref)) for ref in references)[0][1]
    bp = 1.0 if c >= r else math.exp(1.0 - r / c)
    return bp * math.sqrt(float(p1 * p2))


def accuracy_scalar(P, Y, mask_padding=True):
    """Per-timestep argmax comparison with explicit loops."""
    hits = total = 0
    for t in range(len(Y)):
        row = list(Y[t])
        is_pad = all(v == 0 for v in row)
        if is_pad and mask_padding:
            continue
        total += 1
        probs = list(P[t])
        best = max(range(len(probs)), key=lambda j: probs[j])
        if not is_pad and row[best] == 1:
            hits += 1
    return hits / total if total else 0.0
