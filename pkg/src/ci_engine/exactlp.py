"""Exact rational linear programming and small linear algebra.

The feasibility solver is a dense Phase-I simplex over Fraction with
Bland's anti-cycling rule, so every verdict is exact: a feasible point
comes back as rationals, and an infeasible system comes back with a
Farkas certificate that callers can re-verify by direct arithmetic.
"""

from fractions import Fraction

from .errors import Degenerate, DimensionMismatch

_ZERO = Fraction(0)
_ONE = Fraction(1)


def _as_matrix(rows):
    out = [[Fraction(v) for v in row] for row in rows]
    if out and any(len(r) != len(out[0]) for r in out):
        raise DimensionMismatch("ragged matrix")
    return out


def feasible_nonneg(a_rows, b):
    """Solve ``A x = b, x >= 0`` exactly.

    Returns ``("feasible", x)`` with a rational solution vector, or
    ``("infeasible", y)`` with a Farkas certificate: ``y . A <= 0``
    entrywise while ``y . b > 0``.
    """
    a = _as_matrix(a_rows)
    b = [Fraction(v) for v in b]
    m = len(a)
    n = len(a[0]) if m else 0
    if len(b) != m:
        raise DimensionMismatch("rhs length must match the row count")

    flip = []
    for i in range(m):
        if b[i] < 0:
            a[i] = [-v for v in a[i]]
            b[i] = -b[i]
            flip.append(-_ONE)
        else:
            flip.append(_ONE)

    # Tableau columns: n originals, m artificials, then the rhs.
    width = n + m + 1
    tab = []
    for i in range(m):
        row = a[i] + [_ZERO] * m + [b[i]]
        row[n + i] = _ONE
        tab.append(row)
    basis = [n + i for i in range(m)]

    # Phase-I objective row: reduced costs for minimizing the artificials.
    obj = [_ZERO] * width
    for i in range(m):
        for j in range(width):
            obj[j] += tab[i][j]
    for i in range(m):
        obj[n + i] -= _ONE

    def pivot(row, col):
        inv = _ONE / tab[row][col]
        tab[row] = [v * inv for v in tab[row]]
        for r in range(m):
            if r != row and tab[r][col]:
                factor = tab[r][col]
                tab[r] = [v - factor * p for v, p in zip(tab[r], tab[row])]
        if obj[col]:
            factor = obj[col]
            for j in range(width):
                obj[j] -= factor * tab[row][j]
        basis[row] = col

    while True:
        entering = None
        for j in range(n + m):
            if obj[j] > 0:
                entering = j
                break
        if entering is None:
            break
        leaving = None
        best = None
        for i in range(m):
            coef = tab[i][entering]
            if coef > 0:
                ratio = tab[i][-1] / coef
                if (
                    best is None
                    or ratio < best
                    or (ratio == best and basis[i] < basis[leaving])
                ):
                    best = ratio
                    leaving = i
        if leaving is None:
            raise Degenerate("phase-I objective unbounded; invariant broken")
        pivot(leaving, entering)

    if obj[-1] > 0:
        # y = c_B B^{-1}; the artificial block of the objective row is y - 1.
        y = [(obj[n + i] + _ONE) * flip[i] for i in range(m)]
        return "infeasible", y

    # Drive leftover artificials out of the basis where possible.
    for i in range(m):
        if basis[i] >= n:
            for j in range(n):
                if tab[i][j] != 0:
                    pivot(i, j)
                    break

    x = [_ZERO] * n
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = tab[i][-1]
    return "feasible", x


def verify_certificate(a_rows, b, y):
    """Check a Farkas certificate by direct arithmetic."""
    a = _as_matrix(a_rows)
    b = [Fraction(v) for v in b]
    y = [Fraction(v) for v in y]
    n = len(a[0]) if a else 0
    for j in range(n):
        if sum((y[i] * a[i][j] for i in range(len(a))), _ZERO) > 0:
            return False
    return sum((yi * bi for yi, bi in zip(y, b)), _ZERO) > 0


# ---------------------------------------------------------------------------
# Rational Gaussian elimination helpers


def solve_linear(a_rows, b):
    """One solution of ``A x = b`` or None when inconsistent.

    Free variables are set to zero.
    """
    a = _as_matrix(a_rows)
    b = [Fraction(v) for v in b]
    m = len(a)
    n = len(a[0]) if m else 0
    aug = [a[i] + [b[i]] for i in range(m)]
    pivots = []
    row = 0
    for col in range(n):
        sel = None
        for r in range(row, m):
            if aug[r][col] != 0:
                sel = r
                break
        if sel is None:
            continue
        aug[row], aug[sel] = aug[sel], aug[row]
        inv = _ONE / aug[row][col]
        aug[row] = [v * inv for v in aug[row]]
        for r in range(m):
            if r != row and aug[r][col]:
                factor = aug[r][col]
                aug[r] = [v - factor * p for v, p in zip(aug[r], aug[row])]
        pivots.append(col)
        row += 1
        if row == m:
            break
    for r in range(row, m):
        if aug[r][n] != 0:
            return None
    x = [_ZERO] * n
    for r, col in enumerate(pivots):
        x[col] = aug[r][n]
    return x


def matrix_rank(a_rows):
    a = _as_matrix(a_rows)
    m = len(a)
    n = len(a[0]) if m else 0
    rank = 0
    for col in range(n):
        sel = None
        for r in range(rank, m):
            if a[r][col] != 0:
                sel = r
                break
        if sel is None:
            continue
        a[rank], a[sel] = a[sel], a[rank]
        inv = _ONE / a[rank][col]
        a[rank] = [v * inv for v in a[rank]]
        for r in range(m):
            if r != rank and a[r][col]:
                factor = a[r][col]
                a[r] = [v - factor * p for v, p in zip(a[r], a[rank])]
        rank += 1
    return rank


def nullspace(a_rows):
    """A basis of the right nullspace, as rational row vectors."""
    a = _as_matrix(a_rows)
    m = len(a)
    if m == 0:
        return []
    n = len(a[0])
    aug = [row[:] for row in a]
    pivots = {}
    row = 0
    for col in range(n):
        sel = None
        for r in range(row, m):
            if aug[r][col] != 0:
                sel = r
                break
        if sel is None:
            continue
        aug[row], aug[sel] = aug[sel], aug[row]
        inv = _ONE / aug[row][col]
        aug[row] = [v * inv for v in aug[row]]
        for r in range(m):
            if r != row and aug[r][col]:
                factor = aug[r][col]
                aug[r] = [v - factor * p for v, p in zip(aug[r], aug[row])]
        pivots[col] = row
        row += 1
        if row == m:
            break
    basis = []
    free = [c for c in range(n) if c not in pivots]
    for fc in free:
        vec = [_ZERO] * n
        vec[fc] = _ONE
        for col, r in pivots.items():
            vec[col] = -aug[r][fc]
        basis.append(vec)
    return basis


def polytope_vertices(eq_rows, eq_rhs, ineq_rows, ineq_rhs):
    """Vertices of ``{x : Eq x = b, Ineq x <= c}`` by basis enumeration.

    Exhaustive over tight-constraint subsets, so intended for the small
    polytopes that arise from fragments (dimension at most ~6).
    """
    from itertools import combinations

    eq_rows = _as_matrix(eq_rows)
    ineq_rows = _as_matrix(ineq_rows)
    eq_rhs = [Fraction(v) for v in eq_rhs]
    ineq_rhs = [Fraction(v) for v in ineq_rhs]
    if ineq_rows:
        n = len(ineq_rows[0])
    elif eq_rows:
        n = len(eq_rows[0])
    else:
        return []
    base_rank = matrix_rank(eq_rows) if eq_rows else 0
    need = n - base_rank
    seen = set()
    vertices = []
    for subset in combinations(range(len(ineq_rows)), need):
        rows = eq_rows + [ineq_rows[i] for i in subset]
        rhs = eq_rhs + [ineq_rhs[i] for i in subset]
        if matrix_rank(rows) != n:
            continue
        x = solve_linear(rows, rhs)
        if x is None:
            continue
        ok = True
        for row, c in zip(ineq_rows, ineq_rhs):
            if sum((r * v for r, v in zip(row, x)), _ZERO) > c:
                ok = False
                break
        if ok:
            key = tuple(x)
            if key not in seen:
                seen.add(key)
                vertices.append(x)
    return vertices


def cone_extreme_rays(ineq_rows):
    """Extreme rays of ``{x : A x >= 0}`` for a pointed cone.

    Enumerates maximal tight subsets leaving a one-dimensional kernel;
    each surviving direction is scaled so its first nonzero entry is
    positive with denominator-free integer entries.
    """
    from itertools import combinations
    from math import gcd

    a = _as_matrix(ineq_rows)
    if not a:
        return []
    n = len(a[0])
    m = len(a)
    rays = []
    seen = set()
    for subset in combinations(range(m), n - 1):
        rows = [a[i] for i in subset]
        if matrix_rank(rows) != n - 1:
            continue
        # with no rows picked (n == 1) the kernel is the whole line
        kernel = nullspace(rows) if rows else [[_ONE]]
        if len(kernel) != 1:
            continue
        direction = kernel[0]
        for candidate in (direction, [-v for v in direction]):
            vals = [
                sum((r * v for r, v in zip(row, candidate)), _ZERO) for row in a
            ]
            if all(v >= 0 for v in vals):
                tight = [row for row, v in zip(a, vals) if v == 0]
                if matrix_rank(tight) != n - 1:
                    continue
                denom = 1
                for v in candidate:
                    denom = denom * v.denominator // gcd(denom, v.denominator)
                ints = [int(v * denom) for v in candidate]
                g = 0
                for v in ints:
                    g = gcd(g, abs(v))
                ints = [v // g for v in ints]
                key = tuple(ints)
                if key not in seen:
                    seen.add(key)
                    rays.append([Fraction(v) for v in ints])
                break
    return rays
