"""Work through the BLEU-2 scorer piece by piece: modified precisions,
clipping, the brevity penalty, and the score histogram.

Usage: python3 demos/05_bleu_walkthrough.py
"""

from vidcap.evaluation import bleu2, histogram_counts


def show(candidate, references, note):
    s = bleu2(candidate, references)
    print(f"  {note}")
    print(f"    candidate : {' '.join(candidate) or '(empty)'}")
    for ref in references:
        print(f"    reference : {' '.join(ref)}")
    print(f"    p1={s.p1:.4f} p2={s.p2:.4f} BP={s.brevity_penalty:.4f} "
          f"-> BLEU-2 {s.value:.4f}\n")


print("== worked examples ==\n")
show(["a", "man", "plays", "guitar"], [["a", "man", "plays", "guitar"]],
     "exact match: both precisions 1, no length penalty")
show(["the", "cat", "sat"], [["the", "cat", "naps"]],
     "2 of 3 unigrams and 1 of 2 bigrams match: sqrt(2/3 * 1/2) = 0.5774")
show(["the", "the", "the"], [["the", "cat"]],
     "clipping: 'the' appears once in the reference, so p1 = 1/3; "
     "no bigram matches, and one zero precision zeroes the score")
show(["a", "dog"], [["a", "dog", "runs", "fast"]],
     "short candidate: precisions are perfect but BP = exp(1 - 4/2)")
show(["a", "man", "rides"], [["a", "man"], ["a", "man", "rides", "far"]],
     "closest reference length wins the BP comparison; ties go shorter")

# Multi-reference clipping: each n-gram may be licensed by a different
# reference, which is why captioning corpora keep several per video.
show(["a", "man", "plays"], [["a", "man", "naps"], ["the", "man", "plays"]],
     "bigrams (a man) and (man plays) come from different references")

print("== histogram of a score list ==\n")
scores = [0.0, 0.05, 0.1, 0.33, 0.5774, 0.95, 1.0, 1.0]
for low, high, count in histogram_counts(scores):
    bar = "#" * count
    print(f"  [{low:.1f}, {high:.1f}{']' if high == 1.0 else ')'} {bar}")
print(f"\n  {len(scores)} scores; the last bin is closed so 1.0 lands in it")
