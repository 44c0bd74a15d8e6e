"""Shared test utilities: random feasible specs and independent oracles."""

from fractions import Fraction

import numpy as np

from shiftmaxent import CylinderTable, FrequencySpec, all_words


def random_feasible_spec(rng, max_terms=5, denom_pow=6):
    """Random exact feasible spec built from nonnegative second differences.

    Draw d_j >= 0 and scale so that sum_j (j+1) d_j = c <= 1; then
    a_{j+1} = a_j - s_j with s_j = sum_{i >= j} d_i is non-increasing,
    convex, and stays >= 1 - c >= 0. The d-support is finite, so the
    constant tail is exact.
    """
    k = int(rng.integers(1, max_terms + 1))
    denom = 1 << denom_pow
    raw = [Fraction(int(rng.integers(0, denom + 1)), denom) for _ in range(k)]
    weight = sum((i + 1) * r for i, r in enumerate(raw))
    if weight == 0:
        raw[0] = Fraction(1, denom)
        weight = Fraction(1, denom)
    c = Fraction(int(rng.integers(1, denom + 1)), denom)
    d = [r * c / weight for r in raw]
    suffix = list(d)
    for i in range(k - 2, -1, -1):
        suffix[i] = suffix[i] + suffix[i + 1]
    a = [Fraction(1)]
    for j in range(k + 1):
        s_j = suffix[j] if j < k else Fraction(0)
        a.append(a[-1] - s_j)
    return FrequencySpec(prefix=tuple(a[1:]), tail="constant")


def solve_invariance_system(depth, pinned, tol=1e-9):
    """Exhaustively solve the consistency/invariance system with 0 <= p <= 1.

    Unknowns are all cylinder masses at levels 1..depth; equations are
    normalization, consistency, invariance, plus the pinned values. Each
    coordinate is bracketed by a pair of LPs over the polytope, so the
    solution set is certified to be a single point when every bracket
    collapses. Returns (table dict word->float, unique flag, max width).
    """
    from scipy.optimize import linprog

    unknowns = [w for n in range(1, depth + 1) for w in all_words(n)]
    index = {w: i for i, w in enumerate(unknowns)}
    rows, rhs = [], []

    def row_for(words_plus, words_minus, b):
        row = np.zeros(len(unknowns))
        for w in words_plus:
            row[index[w]] += 1.0
        for w in words_minus:
            row[index[w]] -= 1.0
        rows.append(row)
        rhs.append(b)

    row_for(["0", "1"], [], 1.0)  # consistency = invariance of the empty word
    for n in range(1, depth):
        for w in all_words(n):
            row_for([w + "0", w + "1"], [w], 0.0)
            row_for(["0" + w, "1" + w], [w], 0.0)
    for w, value in pinned.items():
        row_for([w], [], float(value))

    A = np.array(rows)
    b = np.array(rhs)
    lows, highs = [], []
    for i in range(len(unknowns)):
        cost = np.zeros(len(unknowns))
        cost[i] = 1.0
        low = linprog(cost, A_eq=A, b_eq=b, bounds=(0, 1), method="highs")
        high = linprog(-cost, A_eq=A, b_eq=b, bounds=(0, 1), method="highs")
        if low.status != 0 or high.status != 0:
            raise AssertionError("oracle polytope is empty or unbounded")
        lows.append(low.fun)
        highs.append(-high.fun)
    width = max(h - l for l, h in zip(lows, highs))
    unique = width <= tol
    solution = {w: 0.5 * (lows[index[w]] + highs[index[w]]) for w in unknowns}
    return solution, unique, width


def two_point_table(a, depth):
    """The measure a*delta(all zeros) + (1-a)*delta(all ones), direct build."""
    a = Fraction(a)
    levels = [{"": Fraction(1)}]
    for n in range(1, depth + 1):
        level = {}
        for w in all_words(n):
            if w == "0" * n:
                level[w] = a
            elif w == "1" * n:
                level[w] = 1 - a
            else:
                level[w] = Fraction(0)
        levels.append(level)
    return CylinderTable(levels)


def period_two_table(depth):
    """Orbit measure of the period-two point: mass 1/2 on each alternating word."""
    half = Fraction(1, 2)
    levels = [{"": Fraction(1)}]
    for n in range(1, depth + 1):
        level = {}
        for w in all_words(n):
            alternating = all(w[i] != w[i + 1] for i in range(n - 1))
            level[w] = half if alternating else Fraction(0)
        levels.append(level)
    return CylinderTable(levels)


def product_mass(p, word):
    """Independent-digit mass of a word with per-digit P(0) = p."""
    mass = Fraction(1) if isinstance(p, Fraction) else 1.0
    for ch in word:
        mass *= p if ch == "0" else 1 - p
    return mass
