"""Truncated invariant measures on the binary full shift.

A measure truncated at depth N is stored as a :class:`CylinderTable`:
for every n <= N and every binary word w of length n, the mass p_w of
the cylinder [w]. A table extends to an invariant Borel probability
measure iff it is normalized (p_empty = 1), consistent
(p_{w0} + p_{w1} = p_w) and shift-invariant (p_{0w} + p_{1w} = p_w).

Tables come in two arithmetic modes. "exact" tables hold
:class:`fractions.Fraction` entries and are checked with tolerance 0;
"float" tables hold doubles and are checked with a small tolerance.
Tables are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import StructuralError
from .words import all_words, check_word

EXACT = "exact"
FLOAT = "float"

#: Default residual tolerance for float-mode tables.
FLOAT_TOLERANCE = 1e-12


def _is_exact(value):
    return isinstance(value, (int, Fraction)) and not isinstance(value, bool)


class CylinderTable:
    """Cylinder masses p_w for all binary words up to a fixed depth.

    Parameters
    ----------
    levels : sequence of mappings
        levels[n] maps words of length n to masses; there must be at
        least levels 0 and 1 (depth >= 1).
    mode : "exact", "float" or None
        Arithmetic tag. When None, the table is "exact" iff every entry
        is an int or Fraction; entries are coerced to the tagged type.
    """

    __slots__ = ("_levels", "_mode")

    def __init__(self, levels, mode=None):
        levels = [dict(level) for level in levels]
        if len(levels) < 2:
            raise StructuralError("a table needs levels 0..N with N >= 1")
        for n, level in enumerate(levels):
            for word in level:
                check_word(word)
                if len(word) != n:
                    raise StructuralError(
                        f"word {word!r} stored at level {n}")
        if mode is None:
            mode = EXACT if all(
                _is_exact(p) for level in levels for p in level.values()
            ) else FLOAT
        if mode == EXACT:
            levels = [{w: Fraction(p) for w, p in lv.items()} for lv in levels]
        elif mode == FLOAT:
            levels = [{w: float(p) for w, p in lv.items()} for lv in levels]
        else:
            raise ValueError(f"unknown arithmetic mode {mode!r}")
        self._levels = levels
        self._mode = mode

    @property
    def depth(self):
        return len(self._levels) - 1

    @property
    def mode(self):
        return self._mode

    def prob(self, word):
        """Mass of the cylinder [word]."""
        check_word(word)
        if len(word) > self.depth:
            raise StructuralError(
                f"word {word!r} is deeper than the table (depth {self.depth})")
        try:
            return self._levels[len(word)][word]
        except KeyError:
            raise StructuralError(f"missing cylinder {word!r}") from None

    def level(self, n):
        """Copy of the level-n mapping (word -> mass)."""
        if not 0 <= n <= self.depth:
            raise ValueError(f"level {n} out of range 0..{self.depth}")
        return dict(self._levels[n])

    def as_float(self):
        """Float-mode copy of this table."""
        if self._mode == FLOAT:
            return self
        return CylinderTable(self._levels, mode=FLOAT)

    def __eq__(self, other):
        if not isinstance(other, CylinderTable):
            return NotImplemented
        return self._mode == other._mode and self._levels == other._levels

    def __repr__(self):
        return f"CylinderTable(depth={self.depth}, mode={self._mode!r})"


def bernoulli_table(p, depth):
    """Product (Bernoulli) measure with mass p on digit 0, to `depth`."""
    if _is_exact(p) or isinstance(p, str):
        p = Fraction(p)
        one = Fraction(1)
    else:
        p = float(p)
        one = 1.0
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    levels = [{"": one}]
    for n in range(1, depth + 1):
        prev = levels[-1]
        levels.append({w + eps: pw * (p if eps == "0" else one - p)
                       for w, pw in prev.items() for eps in "01"})
    return CylinderTable(levels)


def point_mass_table(digit, depth):
    """Point mass on the constant sequence digit^infinity, to `depth`."""
    digit = str(digit)
    if digit not in ("0", "1"):
        raise ValueError("digit must be 0 or 1")
    levels = [{"": Fraction(1)}]
    for n in range(1, depth + 1):
        levels.append({w: Fraction(1) if w == digit * n else Fraction(0)
                       for w in all_words(n)})
    return CylinderTable(levels)


def table_from_top_level(top, mode=None):
    """Build a table from its deepest level by summing children.

    The resulting table is consistent by construction; invariance holds
    iff the top level satisfies sum_e p_{ew} = sum_e p_{we}.
    """
    words = sorted(top)
    depth = len(words[0]) if words else 0
    if depth < 1 or len(words) != 1 << depth or any(len(w) != depth for w in words):
        raise StructuralError("top level must contain all words of one length n >= 1")
    current = {w: top[w] for w in words}
    stack = [current]
    for n in range(depth, 0, -1):
        parent = {}
        for w in all_words(n - 1):
            parent[w] = current[w + "0"] + current[w + "1"]
        stack.append(parent)
        current = parent
    stack.reverse()
    return CylinderTable(stack, mode=mode)


def truncate_table(table, depth):
    """Restriction of `table` to the given smaller (or equal) depth."""
    if not 1 <= depth <= table.depth:
        raise ValueError(f"depth {depth} out of range 1..{table.depth}")
    return CylinderTable(table._levels[:depth + 1], mode=table.mode)


def max_abs_deviation(table_a, table_b):
    """Largest |p_w(a) - p_w(b)| over all levels both tables share."""
    depth = min(table_a.depth, table_b.depth)
    dev = 0.0
    for n in range(depth + 1):
        la, lb = table_a._levels[n], table_b._levels[n]
        for w in all_words(n):
            try:
                dev = max(dev, abs(float(la[w]) - float(lb[w])))
            except KeyError:
                raise StructuralError(f"missing cylinder {w!r}") from None
    return dev


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    kind: str        # "normalization" | "consistency" | "invariance" | "range"
    word: str
    residual: float


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    tolerance: float
    violations: tuple

    def max_residual(self):
        return max((v.residual for v in self.violations), default=0.0)

    def describe(self):
        if self.ok:
            return "valid"
        worst = max(self.violations, key=lambda v: v.residual)
        return (f"{len(self.violations)} violation(s); worst: {worst.kind} "
                f"at {worst.word!r} residual {worst.residual:.3g}")


def validate(table, tolerance=None):
    """Check normalization, consistency, invariance and 0 <= p_w <= 1.

    Missing words raise :class:`StructuralError`; numeric violations are
    collected in the report. `tolerance` defaults to 0 for exact tables
    and to ``FLOAT_TOLERANCE`` for float tables.
    """
    if tolerance is None:
        tolerance = 0 if table.mode == EXACT else FLOAT_TOLERANCE
    if tolerance < 0:
        raise ValueError("tolerance must be nonnegative")
    levels = table._levels
    depth = table.depth
    for n in range(depth + 1):
        level = levels[n]
        if len(level) != 1 << n:
            for w in all_words(n):
                if w not in level:
                    raise StructuralError(f"missing cylinder {w!r} at level {n}")
    violations = []

    def check(kind, word, residual):
        if residual > tolerance:
            violations.append(Violation(kind, word, float(residual)))

    check("normalization", "", abs(levels[0][""] - 1))
    for n in range(depth + 1):
        for w, pw in levels[n].items():
            if pw < 0:
                check("range", w, -pw)
            elif pw > 1:
                check("range", w, pw - 1)
    for n in range(depth):
        level, child = levels[n], levels[n + 1]
        for w, pw in level.items():
            check("consistency", w, abs(child[w + "0"] + child[w + "1"] - pw))
            check("invariance", w, abs(child["0" + w] + child["1" + w] - pw))
    return ValidationReport(ok=not violations, tolerance=float(tolerance),
                            violations=tuple(violations))


# ---------------------------------------------------------------------------
# Markov measures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MarkovMeasure:
    """Order-k Markov measure, determined by its (k+1)-cylinder masses."""

    order: int
    table: CylinderTable

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("order must be >= 0")
        if self.table.depth != self.order + 1:
            raise StructuralError(
                f"order-{self.order} Markov measure needs a table of depth "
                f"{self.order + 1}, got {self.table.depth}")


def markov_from_table(table, order=None):
    """The order-k Markov measure sharing `table`'s (k+1)-cylinder masses.

    Defaults to the deepest available order, k = depth - 1.
    """
    if order is None:
        order = table.depth - 1
    return MarkovMeasure(order, truncate_table(table, order + 1))


def markov_extend(measure, target_depth):
    """Extend a Markov measure to a table of the requested depth.

    For n > k+1 the conditional of the next symbol depends only on the
    last k symbols:  p_{x_1..x_n} = p_{x_1..x_{n-1}} *
    p_{x_{n-k}..x_n} / p_{x_{n-k}..x_{n-1}}, with zero children under a
    zero denominator.
    """
    k = measure.order
    base = measure.table
    if target_depth < k + 1:
        raise ValueError(f"target depth {target_depth} < order+1 = {k + 1}")
    levels = [base._levels[n] for n in range(k + 2)]
    zero = Fraction(0) if base.mode == EXACT else 0.0
    for n in range(k + 2, target_depth + 1):
        prev = levels[n - 1]
        level = {}
        for w, pw in prev.items():
            suffix = w[len(w) - k:] if k else ""
            den = base._levels[k][suffix]
            for eps in "01":
                if pw == 0 or den == 0:
                    level[w + eps] = zero
                else:
                    level[w + eps] = pw * base._levels[k + 1][suffix + eps] / den
        levels.append(level)
    return CylinderTable(levels, mode=base.mode)


# ---------------------------------------------------------------------------
# Conditional entropy
# ---------------------------------------------------------------------------

def conditional_entropy(table, n):
    """h^(n) = sum over |w| = n-1 of -p_{we} log(p_{we} / p_w), in nats.

    Terms with p_{we} = 0 or p_w = 0 contribute 0. Requires
    2 <= n <= depth.
    """
    if not 2 <= n <= table.depth:
        raise ValueError(f"n={n} out of range 2..{table.depth}")
    parents = table._levels[n - 1]
    children = table._levels[n]
    total = 0.0
    for w, pw in parents.items():
        pwf = float(pw)
        if pwf <= 0.0:
            continue
        log_pw = math.log(pwf)
        for eps in "01":
            try:
                pc = float(children[w + eps])
            except KeyError:
                raise StructuralError(f"missing cylinder {w + eps!r}") from None
            if pc > 0.0:
                total += pc * (log_pw - math.log(pc))
    return total


def entropy_ladder(table):
    """[(n, h^(n)) for n = 2..depth]; non-increasing for valid tables."""
    if table.depth < 2:
        raise ValueError("entropy ladder needs depth >= 2")
    return [(n, conditional_entropy(table, n)) for n in range(2, table.depth + 1)]


# ---------------------------------------------------------------------------
# Orbit sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrbitSample:
    """A finite binary sequence with its provenance."""

    bits: np.ndarray
    seed: int
    source: str

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=np.uint8)
        if bits.ndim != 1 or bits.size < 1:
            raise ValueError("bits must be a nonempty 1-d sequence")
        if bits.max(initial=0) > 1:
            raise ValueError("bits must be 0/1")
        object.__setattr__(self, "bits", bits)

    def __len__(self):
        return int(self.bits.size)

    def to_line(self):
        return "".join("01"[b] for b in self.bits)

    @classmethod
    def from_line(cls, line, source="file"):
        bits = np.frombuffer(line.strip().encode("ascii"), dtype=np.uint8) - ord("0")
        return cls(bits=bits, seed=0, source=source)


def _steady_conditionals(table):
    """P(next symbol = 1 | last depth-1 symbols), indexed by the state int."""
    k = table.depth - 1
    lv_k, lv_k1 = table._levels[k], table._levels[k + 1]
    cond = np.zeros(1 << k)
    for word in all_words(k):
        ps = float(lv_k[word])
        if ps > 0.0:
            cond[int(word, 2)] = min(1.0, max(0.0, float(lv_k1[word + "1"]) / ps))
    return cond


def _draw_bits(table, length, seed, steady=None):
    levels = table._levels
    k = table.depth - 1
    rng = np.random.default_rng(seed)
    u = rng.random(length)
    bits = np.empty(length, dtype=np.uint8)
    word = ""
    state = 0
    for j in range(min(length, k)):
        pw = float(levels[j][word])
        q = float(levels[j + 1][word + "1"]) / pw if pw > 0.0 else 0.0
        b = 1 if u[j] < min(1.0, max(0.0, q)) else 0
        bits[j] = b
        word += "01"[b]
        state = (state << 1) | b
    if length <= k:
        return bits
    if k == 0:
        bits[:] = u < min(1.0, max(0.0, float(levels[1]["1"])))
        return bits
    cond = (_steady_conditionals(table) if steady is None else steady).tolist()
    mask = (1 << k) - 1
    out = bits
    for j, uj in enumerate(u[k:].tolist(), start=k):
        b = 1 if uj < cond[state] else 0
        out[j] = b
        state = ((state << 1) | b) & mask
    return bits


def _require_valid(table):
    report = validate(table)
    if not report.ok:
        raise ValueError(f"invalid table: {report.describe()}")


def sample_orbit(table, length, seed):
    """Draw one orbit prefix of the measure in `table`.

    The first depth symbols use the successive table conditionals
    p_{we}/p_w; later symbols follow the order-(depth-1) Markov
    extension. Deterministic given (table, length, seed).
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    _require_valid(table)
    bits = _draw_bits(table, length, seed)
    source = f"table(depth={table.depth}, mode={table.mode})"
    return OrbitSample(bits=bits, seed=int(seed), source=source)


def sample_orbits(table, length, count, seed):
    """Draw `count` independent orbits; sample i uses seed XOR i.

    Results are independent of evaluation order, so batches may be
    parallelized.
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    if count < 1:
        raise ValueError("count must be >= 1")
    _require_valid(table)
    steady = _steady_conditionals(table) if table.depth > 1 else None
    source = f"table(depth={table.depth}, mode={table.mode})"
    out = []
    for i in range(count):
        s = int(seed) ^ i
        out.append(OrbitSample(bits=_draw_bits(table, length, s, steady=steady),
                               seed=s, source=source))
    return out


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def table_to_json(table):
    """JSON object for a table; exact masses become "num/den" strings."""
    levels = []
    for n in range(table.depth + 1):
        level = table._levels[n]
        probs = []
        for w in all_words(n):
            try:
                p = level[w]
            except KeyError:
                raise StructuralError(f"missing cylinder {w!r} at level {n}") from None
            probs.append(str(p) if table.mode == EXACT else float(p))
        levels.append({"n": n, "probs": probs})
    return {"depth": table.depth, "mode": table.mode, "levels": levels}


def table_from_json(obj):
    """Inverse of :func:`table_to_json` (probs in lexicographic order)."""
    try:
        depth = int(obj["depth"])
        mode = obj["mode"]
        raw_levels = obj["levels"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed table JSON: {exc}") from exc
    if mode not in (EXACT, FLOAT):
        raise ValueError(f"unknown arithmetic mode {mode!r}")
    if len(raw_levels) != depth + 1:
        raise ValueError(f"expected {depth + 1} levels, got {len(raw_levels)}")
    levels = []
    for n, entry in enumerate(raw_levels):
        if int(entry["n"]) != n:
            raise ValueError(f"levels out of order at index {n}")
        probs = entry["probs"]
        if len(probs) != 1 << n:
            raise ValueError(f"level {n} needs {1 << n} probabilities")
        if mode == EXACT:
            level = {w: Fraction(str(p)) for w, p in zip(all_words(n), probs)}
        else:
            level = {w: float(p) for w, p in zip(all_words(n), probs)}
        levels.append(level)
    return CylinderTable(levels, mode=mode)


def dump_table(table, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(table_to_json(table), fh, indent=2)
        fh.write("\n")


def load_table(path):
    with open(path, "r", encoding="utf-8") as fh:
        return table_from_json(json.load(fh))
