"""Finite binary words indexing cylinder sets.

Words are plain strings over {"0", "1"}; the empty string denotes the
whole space. Within a fixed length, lexicographic order coincides with
the numeric order of the word read as a binary integer.
"""

from itertools import product


def check_word(word):
    """Validate that `word` is a binary string and return it."""
    if not isinstance(word, str) or any(c not in "01" for c in word):
        raise ValueError(f"not a binary word: {word!r}")
    return word


def all_words(length):
    """Yield all binary words of the given length in lexicographic order."""
    if length < 0:
        raise ValueError("word length must be >= 0")
    for symbols in product("01", repeat=length):
        yield "".join(symbols)


def canonical_index(word):
    """Length-lexicographic rank of a word, used for summable weights.

    "0" -> 1, "1" -> 2, "00" -> 3, "01" -> 4, ...; the empty word gets 0.
    """
    check_word(word)
    if not word:
        return 0
    return (1 << len(word)) - 1 + int(word, 2)
