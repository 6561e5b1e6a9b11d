"""Train the full encoder-decoder on a 6-video synthetic corpus until it
memorizes its captions, then caption each video greedily and score it.

Takes about ten seconds on a laptop CPU.

Usage: python3 demos/04_overfit_captioning.py
"""

import tempfile

from vidcap.corpus import build_corpus, parse_descriptions
from vidcap.evaluation import evaluate_split
from vidcap.features import FeatureStore
from vidcap.fixture import make_fixture
from vidcap.model import ModelConfig, ModelParams, greedy_decode
from vidcap.tokenizer import Tokenizer
from vidcap.training import TrainConfig, train

work = tempfile.mkdtemp(prefix="vidcap-demo-")
paths = make_fixture(work, n_videos=6, seed=1, captions_per_video=3)
corp = build_corpus(parse_descriptions(paths["descriptions"]))
keys = sorted(corp.entries)
tok = Tokenizer(cap=40).fit(c for k in keys for c in corp.entries[k])
store = FeatureStore(paths["manifest"])
print(f"fixture: {len(keys)} videos, vocabulary {tok.size} words, dir {work}")

mcfg = ModelConfig(frames=8, feature_dim=16, latent=32, max_words=10, vocab=40)
params = ModelParams.init(mcfg, seed=7)
tcfg = TrainConfig(batch_size=6, epochs=400, lr=1e-3, seed=7)

log_every = 50
params, history = train(
    params, tcfg, mcfg, keys, [], corp, tok, store,
    log=lambda line: print("  " + line)
    if int(line.split(":")[0].split()[1]) % log_every == 0 else None)

final = history.rows[-1]
print(f"\nafter {tcfg.epochs} epochs: train_loss={final.train_loss:.4f} "
      f"train_acc={final.train_acc:.4f}")

print("\ngreedy captions vs references:")
predictions = {}
for key in keys:
    words = greedy_decode(params, tok, store.get(key), mcfg.max_words)
    predictions[key] = words
    reference = " ".join(corp.entries[key][0][1:-1])  # strip bos/eos
    marker = "=" if " ".join(words) == reference else "x"
    print(f"  {key} [{marker}] {' '.join(words)}")

report = evaluate_split(predictions, corp, keys, "train")
print(f"\nmean BLEU-2 over the training split: {report.mean:.4f}")
