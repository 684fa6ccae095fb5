"""Dense two-phase simplex over exact rationals.

Solves   maximize c.x   subject to   A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0
with Fraction arithmetic throughout, so optima on rational inputs are exact.
Dantzig pricing switches to Bland's rule after a fixed iteration budget,
which guarantees termination on degenerate problems.

Meant for small instances (a few hundred cells). Large problems should go
through the floating-point route instead.
"""

from __future__ import annotations

from fractions import Fraction

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
UNBOUNDED = "Unbounded"
FAILURE = "NumericalFailure"

_ZERO = Fraction(0)
_ONE = Fraction(1)

# Dantzig pricing can cycle on degenerate bases; Bland's rule cannot, so we
# fall back to it after this many pivots per phase.
BLAND_SWITCH_FACTOR = 5

# Hard cap per phase. Bland's rule terminates finitely, so hitting this means
# something is broken; we surface FAILURE instead of spinning.
ITERATION_CAP_FACTOR = 400


def _as_fraction(value) -> Fraction:
    if isinstance(value, float):
        raise TypeError("exact simplex rejects floats; use the float route")
    return Fraction(value)


def _pivot(tab: list[list[Fraction]], obj: list[Fraction], basis: list[int], row: int, col: int) -> None:
    pivot = tab[row][col]
    inv = _ONE / pivot
    prow = [v * inv for v in tab[row]]
    tab[row] = prow
    for i, trow in enumerate(tab):
        if i == row:
            continue
        factor = trow[col]
        if factor:
            tab[i] = [a - factor * b for a, b in zip(trow, prow)]
    factor = obj[col]
    if factor:
        obj[:] = [a - factor * b for a, b in zip(obj, prow)]
    basis[row] = col


def _optimize(tab, obj, basis, banned, rhs_col, ncols) -> str:
    size = len(tab) + ncols
    bland_after = BLAND_SWITCH_FACTOR * size
    cap = ITERATION_CAP_FACTOR * size + 1000
    iters = 0
    while True:
        entering = None
        if iters < bland_after:
            best = _ZERO
            for j in range(ncols - 1):
                if j in banned:
                    continue
                v = obj[j]
                if v < best:
                    best = v
                    entering = j
        else:
            for j in range(ncols - 1):
                if j not in banned and obj[j] < 0:
                    entering = j
                    break
        if entering is None:
            return OPTIMAL
        leave = None
        best_ratio = None
        for i, trow in enumerate(tab):
            a = trow[entering]
            if a > 0:
                ratio = trow[rhs_col] / a
                if (
                    best_ratio is None
                    or ratio < best_ratio
                    or (ratio == best_ratio and basis[i] < basis[leave])
                ):
                    best_ratio = ratio
                    leave = i
        if leave is None:
            return UNBOUNDED
        _pivot(tab, obj, basis, leave, entering)
        iters += 1
        if iters > cap:
            return FAILURE


def solve_dense(c, a_ub=(), b_ub=(), a_eq=(), b_eq=()):
    """Maximize c.x over the given constraints; return (status, x, value).

    x is a tuple of Fractions (empty when not OPTIMAL), value a Fraction.
    All inputs must be exact (int, Fraction, or string); floats are rejected.
    """
    c = [_as_fraction(v) for v in c]
    nvars = len(c)
    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    kinds: list[str] = []
    for row, bound in zip(a_ub, b_ub, strict=True):
        coeffs = [_as_fraction(v) for v in row]
        if len(coeffs) != nvars:
            raise ValueError("inequality row width does not match objective")
        rows.append(coeffs)
        rhs.append(_as_fraction(bound))
        kinds.append("le")
    for row, bound in zip(a_eq, b_eq, strict=True):
        coeffs = [_as_fraction(v) for v in row]
        if len(coeffs) != nvars:
            raise ValueError("equality row width does not match objective")
        rows.append(coeffs)
        rhs.append(_as_fraction(bound))
        kinds.append("eq")
    m = len(rows)

    if nvars == 0:
        if any(kinds[i] == "eq" and rhs[i] != 0 for i in range(m)):
            return INFEASIBLE, (), _ZERO
        if any(kinds[i] == "le" and rhs[i] < 0 for i in range(m)):
            return INFEASIBLE, (), _ZERO
        return OPTIMAL, (), _ZERO
    if m == 0:
        if any(v > 0 for v in c):
            return UNBOUNDED, (), _ZERO
        return OPTIMAL, tuple([_ZERO] * nvars), _ZERO

    for i in range(m):
        if rhs[i] < 0:
            rows[i] = [-v for v in rows[i]]
            rhs[i] = -rhs[i]
            if kinds[i] == "le":
                kinds[i] = "ge"

    slack_of: dict[int, int] = {}
    col = nvars
    for i in range(m):
        if kinds[i] != "eq":
            slack_of[i] = col
            col += 1
    art_of: dict[int, int] = {}
    for i in range(m):
        if kinds[i] != "le":
            art_of[i] = col
            col += 1
    rhs_col = col
    ncols = col + 1

    tab: list[list[Fraction]] = []
    basis: list[int] = []
    for i in range(m):
        trow = [_ZERO] * ncols
        trow[:nvars] = rows[i]
        if i in slack_of:
            trow[slack_of[i]] = _ONE if kinds[i] == "le" else -_ONE
        if i in art_of:
            trow[art_of[i]] = _ONE
        trow[rhs_col] = rhs[i]
        tab.append(trow)
        basis.append(slack_of[i] if kinds[i] == "le" else art_of[i])

    banned: set[int] = set(art_of.values())

    if art_of:
        # Phase 1: maximize minus the artificial sum, priced out for the
        # rows where an artificial starts basic.
        obj = [_ZERO] * ncols
        for j in art_of.values():
            obj[j] = _ONE
        for i, bcol in enumerate(basis):
            if bcol in banned:
                obj = [a - b for a, b in zip(obj, tab[i])]
        status = _optimize(tab, obj, basis, set(), rhs_col, ncols)
        if status != OPTIMAL:
            return FAILURE, (), _ZERO
        if obj[rhs_col] != 0:
            return INFEASIBLE, (), _ZERO
        # Degenerate artificials may linger in the basis at level zero; pivot
        # them out, or drop the row when it has become redundant.
        for i in range(len(tab) - 1, -1, -1):
            if basis[i] not in banned:
                continue
            pivot_col = next(
                (j for j in range(rhs_col) if j not in banned and tab[i][j] != 0),
                None,
            )
            if pivot_col is None:
                del tab[i]
                del basis[i]
            else:
                dummy = [_ZERO] * ncols
                _pivot(tab, dummy, basis, i, pivot_col)

    obj = [_ZERO] * ncols
    for j in range(nvars):
        obj[j] = -c[j]
    for i, bcol in enumerate(basis):
        factor = obj[bcol]
        if factor:
            obj = [a - factor * b for a, b in zip(obj, tab[i])]

    status = _optimize(tab, obj, basis, banned, rhs_col, ncols)
    if status != OPTIMAL:
        return status, (), _ZERO

    x = [_ZERO] * nvars
    for i, bcol in enumerate(basis):
        if bcol < nvars:
            x[bcol] = tab[i][rhs_col]
    return OPTIMAL, tuple(x), obj[rhs_col]
