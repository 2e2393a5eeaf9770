"""Independent oracle for the frozen metric values in the Rust test suites.

Run: python3 metric_oracle.py

SARI follows the reference SARIngram/SARIsent code (Counter multiset
arithmetic, references pooled, source/system counts scaled by the number of
references; keep recall uses pooled counts, which avoids the 0/0 of the
per-gram form), plus one convention: when an operation's system set and gold
set are both empty for an order, that operation scores 1 for the order.

Update-ROUGE uses a brute-force LCS (all subsequences) on small inputs.
BLEU is computed by hand-style counting with +1 smoothing for orders >= 2.
"""
from collections import Counter
from fractions import Fraction
from itertools import combinations
import math


def toks(s):
    return s.lower().split()


def grams(tokens, n):
    return [" ".join(tokens[i:i + n]) for i in range(len(tokens) - n + 1)]


def sari_ngram(sgrams, cgrams, rgramslist, numref):
    rgramcounter = Counter(g for rg in rgramslist for g in rg)
    sgramcounter = Counter(sgrams)
    sgramcounter_rep = Counter({g: c * numref for g, c in sgramcounter.items()})
    cgramcounter = Counter(cgrams)
    cgramcounter_rep = Counter({g: c * numref for g, c in cgramcounter.items()})

    # keep
    keep_sys = sgramcounter_rep & cgramcounter_rep
    keep_good = keep_sys & rgramcounter
    keep_all = sgramcounter_rep & rgramcounter
    if not keep_sys and not keep_all:
        keepscore = Fraction(1)
    else:
        t1 = sum((Fraction(keep_good[g], keep_sys[g]) for g in keep_sys), Fraction(0))
        p = t1 / len(keep_sys) if keep_sys else Fraction(0)
        # recall as pooled counts: sum of good keeps over sum of gold keeps
        r = Fraction(sum(keep_good.values()), sum(keep_all.values())) if keep_all else Fraction(0)
        keepscore = 2 * p * r / (p + r) if (p > 0 or r > 0) else Fraction(0)

    # delete
    del_sys = sgramcounter_rep - cgramcounter_rep
    del_good = del_sys - rgramcounter
    del_all = sgramcounter_rep - rgramcounter
    if not del_sys and not del_all:
        delscore = Fraction(1)
    else:
        t1 = sum((Fraction(del_good[g], del_sys[g]) for g in del_sys), Fraction(0))
        delscore = t1 / len(del_sys) if del_sys else Fraction(0)

    # add
    add_sys = set(cgramcounter) - set(sgramcounter)
    add_good = add_sys & set(rgramcounter)
    add_all = set(rgramcounter) - set(sgramcounter)
    if not add_sys and not add_all:
        addscore = Fraction(1)
    else:
        p = Fraction(len(add_good), len(add_sys)) if add_sys else Fraction(0)
        r = Fraction(len(add_good), len(add_all)) if add_all else Fraction(0)
        addscore = 2 * p * r / (p + r) if (p > 0 or r > 0) else Fraction(0)
    return keepscore, delscore, addscore


def sari(source, pred, refs):
    s, c = toks(source), toks(pred)
    rs = [toks(r) for r in refs]
    keep = dele = add = Fraction(0)
    for n in range(1, 5):
        k, d, a = sari_ngram(grams(s, n), grams(c, n), [grams(r, n) for r in rs], len(refs))
        keep += k
        dele += d
        add += a
    return float((keep / 4 + dele / 4 + add / 4) / 3)


SARI_TRIPLES = [
    ("the cat sat", "the cat", ["the cat"]),
    ("the cat sat on the mat", "the cat sat on the mat", ["the cat sat on the mat"]),
    ("the cat sat on the mat", "a cat was on the mat", ["the cat was on the mat"]),
    ("the cat sat on the mat", "the cat sat", ["the cat sat on a mat", "a cat sat"]),
    ("he likes the dogs a lot", "he is fond of the dogs", ["he really likes the dogs", "he is fond of dogs"]),
    ("please send me the report by friday", "send the report by friday", ["send me the report by friday"]),
    ("i am running late to dinner", "i will be late for dinner", ["sorry i am running late to dinner"]),
    ("about the meeting tomorrow", "regarding tomorrow's meeting", ["regarding the meeting tomorrow", "about tomorrow's meeting", "on the meeting tomorrow"]),
    ("a b c d e", "a b c d e", ["a x c d e"]),
    ("a b c d e", "f g h", ["a b c d e"]),
    ("one two three", "one two three four", ["one two three four", "one two four"]),
    ("the the the", "the the", ["the"]),
    ("a b c d e", "f g h i", ["a b c d e"]),
]


def lcs_brute(a, b):
    best = 0
    for k in range(len(a), 0, -1):
        subs = set(combinations(a, k))
        for sub in combinations(b, k):
            if sub in subs:
                return k
    return best


def rouge_l_f1(a, b):
    if not a and not b:
        return 1.0
    if not a or not b:
        return 0.0
    l = lcs_brute(a, b)
    if l == 0:
        return 0.0
    p, r = l / len(a), l / len(b)
    return 2 * p * r / (p + r)


def bleu_toy():
    # pred "a b c", ref "a b d"
    p1 = Fraction(2, 3)
    p2 = Fraction(1, 2)
    p3 = Fraction(0 + 1, 1 + 1)
    p4 = Fraction(0 + 1, 0 + 1)
    return math.exp(sum(math.log(p) for p in (p1, p2, p3, p4)) / 4)


if __name__ == "__main__":
    print("SARI")
    for src, pred, refs in SARI_TRIPLES:
        print(f"{sari(src, pred, refs):.12f}  {src!r} {pred!r} {refs!r}")
    print("ROUGE-L")
    pairs = [
        ("we moved the meeting", "the meeting was moved"),
        ("a b c d", "a c b d"),
        ("x y z", "x y z"),
        ("please call me back today", "call me back tomorrow please"),
    ]
    for a, b in pairs:
        print(f"{rouge_l_f1(a.split(), b.split()):.12f}  {a!r} {b!r}")
    print("BLEU toy", f"{bleu_toy():.15f}")
