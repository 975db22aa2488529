"""Reduced words in a free group.

A word is a tuple of nonzero ints: ``+i`` stands for generator ``i`` and
``-i`` for its inverse (generators are numbered from 1).
"""

from __future__ import annotations

import itertools

from .errors import DomainError


def reduce_word(word):
    out = []
    for x in word:
        if x == 0:
            raise DomainError("0 is not a generator index")
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def is_reduced(word):
    return all(a != -b for a, b in zip(word, word[1:])) and 0 not in word


def inverse_word(word):
    return tuple(-x for x in reversed(word))


def letters(rank):
    """All letters of a free group of the given rank, in a fixed order."""
    return tuple(x for i in range(1, rank + 1) for x in (i, -i))


def word_sort_key(word):
    """Length-lexicographic order used for deterministic tie breaking."""
    return (len(word), tuple((abs(x), x < 0) for x in word))


def reduced_words(rank, max_length):
    """Every reduced word of length at most ``max_length``, shortest first."""
    alphabet = letters(rank)
    yield ()
    layer = [()]
    for _ in range(max_length):
        nxt = []
        for w in layer:
            for x in alphabet:
                if w and w[-1] == -x:
                    continue
                nxt.append(w + (x,))
        yield from nxt
        layer = nxt


def count_reduced(rank, length):
    if length == 0:
        return 1
    return 2 * rank * (2 * rank - 1) ** (length - 1)


def cyclically_reduced(word):
    word = reduce_word(word)
    while len(word) > 1 and word[0] == -word[-1]:
        word = word[1:-1]
    return word


def common_prefix_length(a, b):
    n = 0
    for x, y in zip(a, b):
        if x != y:
            break
        n += 1
    return n


def format_word(word, names=None):
    if not word:
        return "e"
    parts = []
    for x in word:
        name = names[abs(x) - 1] if names else f"g{abs(x)}"
        parts.append(name if x > 0 else name + "^-1")
    return " ".join(parts)


def parse_word(text, names):
    """Inverse of :func:`format_word` for named generators."""
    text = text.strip()
    if text in ("", "e"):
        return ()
    index = {n: i + 1 for i, n in enumerate(names)}
    out = []
    for tok in text.split():
        inv = tok.endswith("^-1")
        base = tok[:-3] if inv else tok
        if base not in index:
            raise DomainError(f"unknown generator {base!r}")
        out.append(-index[base] if inv else index[base])
    return tuple(out)


def has_all_subwords(word, rank, length=2):
    """True if every reduced word of the given length occurs as a subword."""
    seen = {tuple(word[i : i + length]) for i in range(len(word) - length + 1)}
    needed = [w for w in itertools.product(letters(rank), repeat=length) if is_reduced(w)]
    return all(w in seen for w in needed)
