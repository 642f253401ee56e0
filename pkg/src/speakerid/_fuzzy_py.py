"""Pure-Python edit-distance kernels (fallback for ``_fuzzy_ext``)."""


def levenshtein(a: str, b: str) -> int:
    if not a:
        return len(b)
    if not b:
        return len(a)
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j - 1] + (ca != cb), prev[j] + 1, cur[j - 1] + 1))
        prev = cur
    return prev[-1]


def similarity(a: str, b: str) -> float:
    l_sum = len(a) + len(b)
    if l_sum == 0:
        return 1.0
    return (l_sum - levenshtein(a, b)) / l_sum
