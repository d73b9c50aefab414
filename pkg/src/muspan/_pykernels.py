"""Pure-Python reference kernels.

These are the fallback used when the compiled ``_ckernels`` extension is not
available, and they define the behaviour the extension must reproduce.
Token sequences are passed as integer ids (see ``kernels.encode``).
"""

import numpy as np


def failure_table(pattern):
    """KMP failure function: longest proper border of each pattern prefix."""
    fail = [0] * len(pattern)
    k = 0
    for i in range(1, len(pattern)):
        c = pattern[i]
        while k and pattern[k] != c:
            k = fail[k - 1]
        if pattern[k] == c:
            k += 1
        fail[i] = k
    return fail


def kmp_find(pattern, text, boundary):
    """Index of the first occurrence of ``pattern`` in ``text`` that does not
    straddle ``boundary``; -1 when there is none.

    The automaton state is reset when the scan reaches ``boundary`` so a match
    can never start before it and end at or after it.
    """
    m = len(pattern)
    if m == 0:
        raise ValueError("empty pattern")
    fail = failure_table(pattern)
    j = 0
    for i in range(len(text)):
        if i == boundary:
            j = 0
        c = text[i]
        while j and pattern[j] != c:
            j = fail[j - 1]
        if pattern[j] == c:
            j += 1
            if j == m:
                return i - m + 1
    return -1


def levenshtein(a, b):
    """Unit-cost Levenshtein distance between two strings."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def lcs_length(a, b):
    """Length of the longest common subsequence of two id sequences."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, 1):
            if x == y:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def best_pair(start, end, n, blocked, allow_equal):
    """Best real span (k, l) by ``start[k] * end[l]``.

    Candidates satisfy ``k < l`` (``k <= l`` with ``allow_equal``) and contain
    no blocked index. Ties go to the smallest k, then the smallest l, which is
    the row-major order ``np.argmax`` already uses. Returns ``(-1, -1, -1.0)``
    when no candidate exists.
    """
    if n == 0:
        return -1, -1, -1.0
    start = np.asarray(start, dtype=np.float64)[:n]
    end = np.asarray(end, dtype=np.float64)[:n]
    blocked = np.asarray(blocked, dtype=bool)[:n]
    # next_blocked[k]: first blocked index >= k (n when none)
    idx = np.where(blocked, np.arange(n), n)
    next_blocked = np.minimum.accumulate(idx[::-1])[::-1]
    ks = np.arange(n)[:, None]
    ls = np.arange(n)[None, :]
    valid = (ls >= ks + (0 if allow_equal else 1)) & (ls < next_blocked[:, None])
    scores = np.where(valid, np.outer(start, end), -1.0)
    flat = int(np.argmax(scores))
    k, l = divmod(flat, n)
    if not valid[k, l]:
        return -1, -1, -1.0
    return k, l, float(scores[k, l])
