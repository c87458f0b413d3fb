"""Slow, explicit reference computations used as test oracles.

Nothing here imports from ``isomt``; each oracle builds its n-gram tables
as plain dicts of lists and counts matches by hand.
"""

from __future__ import annotations

import math
import unicodedata


def bleu_tokens(text):
    out, cur = [], ""
    for ch in text:
        if ch.isspace():
            if cur:
                out.append(cur)
            cur = ""
        elif unicodedata.category(ch)[0] == "P":
            if cur:
                out.append(cur)
            out.append(ch)
            cur = ""
        else:
            cur += ch
    if cur:
        out.append(cur)
    return out


def ngram_table(seq, n):
    """All n-grams of ``seq`` as a dict mapping n-gram -> list of positions."""
    table = {}
    for i in range(len(seq) - n + 1):
        key = tuple(seq[i:i + n])
        table.setdefault(key, []).append(i)
    return table


def clipped_matches(hyp_table, ref_table):
    total = 0
    for gram, positions in hyp_table.items():
        if gram in ref_table:
            total += min(len(positions), len(ref_table[gram]))
    return total


def bleu_oracle(hyps, refs, max_n=4):
    matches = [0] * max_n
    hyp_counts = [0] * max_n
    ref_counts = [0] * max_n
    c = r = 0
    for h, rf in zip(hyps, refs):
        ht, rt = bleu_tokens(h), bleu_tokens(rf)
        c += len(ht)
        r += len(rt)
        for n in range(1, max_n + 1):
            htab, rtab = ngram_table(ht, n), ngram_table(rt, n)
            matches[n - 1] += clipped_matches(htab, rtab)
            hyp_counts[n - 1] += sum(len(v) for v in htab.values())
            ref_counts[n - 1] += sum(len(v) for v in rtab.values())
    used = [(m, h) for m, h, rr in zip(matches, hyp_counts, ref_counts) if h or rr]
    if not used:
        return 100.0
    if any(m == 0 for m, _ in used):
        return 0.0
    geo = math.exp(sum(math.log(m / h) for m, h in used) / len(used))
    bp = 1.0 if c >= r else math.exp(1 - r / c)
    return 100 * bp * geo


def char_ngram_stats(hyp, ref, max_n=6):
    """Per order (matches, hyp n-grams, ref n-grams) over whitespace-free text."""
    h = "".join(ch for ch in hyp if not ch.isspace())
    r = "".join(ch for ch in ref if not ch.isspace())
    rows = []
    for n in range(1, max_n + 1):
        ht, rt = ngram_table(h, n), ngram_table(r, n)
        rows.append((clipped_matches(ht, rt), max(len(h) - n + 1, 0), max(len(r) - n + 1, 0)))
    return rows


def chrf_from_rows(rows, beta=2.0):
    ps, rs = [], []
    for m, h, r in rows:
        if h > 0 and r > 0:
            ps.append(m / h)
            rs.append(m / r)
    if not ps:
        return 100.0 if rows[0][1] == 0 and rows[0][2] == 0 else 0.0
    p, r = sum(ps) / len(ps), sum(rs) / len(rs)
    if beta**2 * p + r == 0:
        return 0.0
    return 100 * (1 + beta**2) * p * r / (beta**2 * p + r)


def chrf_oracle(hyp, ref, max_n=6, beta=2.0):
    return chrf_from_rows(char_ngram_stats(hyp, ref, max_n), beta)


def chrf_phrase_oracle(phrase_pairs, max_n=6, beta=2.0):
    """Micro ChrF over (hyp, ref) phrase pairs: sum the tables, then score once."""
    acc = [[0, 0, 0] for _ in range(max_n)]
    for h, r in phrase_pairs:
        for k, row in enumerate(char_ngram_stats(h, r, max_n)):
            for j in range(3):
                acc[k][j] += row[j]
    return chrf_from_rows([tuple(x) for x in acc], beta)


def grid_relax_two(chars1, chars2, start1, end1, start2, end2, min_pause, step=0.001):
    """Best end of phrase 1 when extending it into the pause, on a 1 ms grid.

    Minimises |r2/r1 - 1|; returns (best_end1, best_deviation).
    """
    slack = start2 - end1 - min_pause
    best = None
    k = 0
    while k * step <= slack + 1e-12:
        e = end1 + k * step
        r1 = chars1 / (e - start1)
        r2 = chars2 / (end2 - start2)
        dev = abs(r2 / r1 - 1)
        if best is None or dev < best[1]:
            best = (e, dev)
        k += 1
    return best
