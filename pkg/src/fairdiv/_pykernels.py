"""Pure-Python versions of the hot loops.

Same signatures and results as the compiled ``_ckernels`` module, on plain
nested lists of Python ints, so they also serve values too large for int64.

Assignments of ``k`` goods to ``n`` agents are numbered by their base-``n``
code with good 0 as the most significant digit, so code order is the
lexicographic order of owner vectors.
"""

EF, EF1, EFX, EFX0 = 0, 1, 2, 3


def decode(code, n, k):
    owner = [0] * k
    for g in range(k - 1, -1, -1):
        code, owner[g] = divmod(code, n)
    return owner


def _key(sums):
    count = 0
    prod = 1
    for s in sums:
        if s > 0:
            count += 1
            prod *= s
    return count, prod


def _walk(vals, lo, hi):
    """Yield ``(code, sums)`` for every code in ``[lo, hi)``; ``sums`` is reused."""
    n = len(vals)
    k = len(vals[0])
    owner = decode(lo, n, k)
    sums = [0] * n
    for g, i in enumerate(owner):
        sums[i] += vals[i][g]
    for code in range(lo, hi):
        yield code, sums
        g = k - 1
        while g >= 0:
            i = owner[g]
            sums[i] -= vals[i][g]
            if i + 1 < n:
                owner[g] = i + 1
                sums[i + 1] += vals[i + 1][g]
                break
            owner[g] = 0
            sums[0] += vals[0][g]
            g -= 1


def mnw_best(vals, lo, hi):
    """Best ``(positive count, product of positive sums)`` over codes in ``[lo, hi)``."""
    best = (-1, 0)
    for _, sums in _walk(vals, lo, hi):
        key = _key(sums)
        if key > best:
            best = key
    return best


def mnw_collect(vals, lo, hi, count, product):
    """Codes in ``[lo, hi)`` whose key equals ``(count, product)``."""
    target = (count, product)
    return [code for code, sums in _walk(vals, lo, hi) if _key(sums) == target]


def first_violation(vals, owner, notion):
    """First ``(i, j, g)`` violating ``notion``, scanning ``i``, ``j``, ``g`` ascending.

    ``g`` is ``-1`` for plain envy.  Returns ``None`` when the notion holds.
    Runs in ``O(n*m + n*n)``.
    """
    n = len(vals)
    m = len(owner)
    worth = [[0] * n for _ in range(n)]
    # per (i, j): smallest value (EFX0), smallest positive value (EFX), largest value (EF1)
    low = [[None] * n for _ in range(n)]
    lowpos = [[None] * n for _ in range(n)]
    high = [[0] * n for _ in range(n)]
    size = [0] * n
    for g in range(m):
        j = owner[g]
        size[j] += 1
        for i in range(n):
            v = vals[i][g]
            worth[i][j] += v
            if low[i][j] is None or v < low[i][j]:
                low[i][j] = v
            if v > 0 and (lowpos[i][j] is None or v < lowpos[i][j]):
                lowpos[i][j] = v
            if v > high[i][j]:
                high[i][j] = v
    for i in range(n):
        mine = worth[i][i]
        for j in range(n):
            if i == j or size[j] == 0:
                continue
            excess = worth[i][j] - mine
            if excess <= 0:
                continue
            if notion == EF:
                return (i, j, -1)
            if notion == EF1:
                if high[i][j] < excess:
                    return (i, j, _first_good(vals[i], owner, j, lambda v: v == high[i][j]))
                continue
            if notion == EFX0:
                if low[i][j] < excess:
                    return (i, j, _first_good(vals[i], owner, j, lambda v: v < excess))
                continue
            if lowpos[i][j] is not None and lowpos[i][j] < excess:
                return (i, j, _first_good(vals[i], owner, j, lambda v: 0 < v < excess))
    return None


def _first_good(row, owner, j, pred):
    for g, o in enumerate(owner):
        if o == j and pred(row[g]):
            return g
    raise AssertionError("violating good not found")


def perturbation_counterexample(pert, orig):
    """Scan every assignment; return ``(code, efx_count)``.

    ``code`` is the first assignment that is EFX for ``pert`` but not EFX0 for
    ``orig`` (``-1`` if none); ``efx_count`` counts the EFX assignments seen.
    """
    n = len(orig)
    m = len(orig[0])
    total = n ** m
    efx_count = 0
    for code in range(total):
        owner = decode(code, n, m)
        if first_violation(pert, owner, EFX) is None:
            efx_count += 1
            if first_violation(orig, owner, EFX0) is not None:
                return code, efx_count
    return -1, efx_count
