"""Sequential complexity functionals on decorated binary trees.

Signed-path suprema of a finite function class over a tree: exact
enumeration up to depth 12, Monte Carlo beyond; offset variants that
subtract data-dependent penalties; internal sequential covering numbers by
exact set-cover search (greedy upper bound for large classes); and the
entropy integral used by the chained penalties.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import RngSpec, path_node_indices, path_signs

EXACT_DEPTH_CAP = 12
EXACT_COVER_CLASS_CAP = 12
DUDLEY_GRID_POINTS = 64


@dataclass(frozen=True)
class FunctionTable:
    """Values g(z) of a finite function class on every node of one tree.

    ``values[g, node]`` follows the heap node order of ``core.BinaryTree``.
    All entries are bounded by ``bound`` in absolute value.
    """

    values: np.ndarray              # (n_functions, 2**depth - 1)
    bound: float = 1.0

    def __post_init__(self):
        vals = np.atleast_2d(np.asarray(self.values, dtype=float))
        n_nodes = vals.shape[1]
        depth = int(round(math.log2(n_nodes + 1)))
        if 2 ** depth - 1 != n_nodes:
            raise ValueError(f"{n_nodes} nodes is not a complete tree")
        if np.any(np.abs(vals) > self.bound + 1e-12):
            raise ValueError(f"table values exceed declared bound {self.bound}")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "_depth", depth)

    @property
    def depth(self) -> int:
        return self._depth

    @property
    def n_functions(self) -> int:
        return int(self.values.shape[0])


@lru_cache(maxsize=16)
def _paths(depth: int):
    signs = path_signs(depth)
    idx = path_node_indices(depth, signs)
    return signs, idx


def _path_values(table: FunctionTable, signs, idx):
    """(G, P, n) values of each function along each path."""
    return table.values[:, idx]


def _signed_and_square_sums(table: FunctionTable, signs, idx):
    vals = _path_values(table, signs, idx)
    signed = np.einsum("gpt,pt->gp", vals, signs)
    squares = np.einsum("gpt,gpt->gp", vals, vals)
    return signed, squares


def seq_rademacher_exact(table: FunctionTable, depth_cap: int = EXACT_DEPTH_CAP) -> float:
    """Average over all sign paths of the per-path supremum of signed sums."""
    n = table.depth
    if n > depth_cap:
        raise ValueError(
            f"depth {n} exceeds exact enumeration cap {depth_cap}; use seq_rademacher_mc"
        )
    signs, idx = _paths(n)
    signed, _ = _signed_and_square_sums(table, signs, idx)
    return float(signed.max(axis=0).mean())


def seq_rademacher_mc(table: FunctionTable, replicates: int, rng: RngSpec):
    """Unbiased Monte Carlo estimate of the signed-path supremum average.

    Returns (estimate, stderr). Deterministic for a fixed RngSpec.
    """
    if replicates < 100:
        raise ValueError("need at least 100 replicates")
    gen = rng.generator()
    n = table.depth
    signs = gen.integers(0, 2, size=(replicates, n)).astype(float) * 2.0 - 1.0
    idx = path_node_indices(n, signs)
    signed, _ = _signed_and_square_sums(table, signs, idx)
    sups = signed.max(axis=0)
    est = float(sups.mean())
    stderr = float(sups.std(ddof=1) / math.sqrt(replicates)) if replicates > 1 else 0.0
    return est, stderr


# ---------------------------------------------------------------------------
# Sequential covering numbers (internal covers drawn from the class itself).
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoverReport:
    size: int
    exact: bool
    scale: float
    metric: str


def _pairwise_path_stats(table: FunctionTable):
    """Cache per-pair, per-path l2 and linf discrepancies on the table."""
    cached = getattr(table, "_pair_stats", None)
    if cached is not None:
        return cached
    signs, idx = _paths(table.depth)
    vals = _path_values(table, signs, idx)          # (G, P, n)
    g = table.n_functions
    d2 = np.empty((g, g, vals.shape[1]))
    dinf = np.empty_like(d2)
    for v in range(g):
        diff = vals - vals[v]
        d2[v] = np.einsum("gpt,gpt->gp", diff, diff)
        dinf[v] = np.abs(diff).max(axis=2)
    object.__setattr__(table, "_pair_stats", (d2, dinf))
    return d2, dinf


def _cover_masks(table: FunctionTable, alpha: float, metric: str):
    """Bitmask per candidate v over the (function, path) universe it covers."""
    d2, dinf = _pairwise_path_stats(table)
    n = table.depth
    if metric == "l2":
        close = d2 <= n * alpha * alpha + 1e-12
    elif metric == "linf":
        close = dinf <= alpha + 1e-12
    else:
        raise ValueError(f"unknown metric {metric!r}")
    masks = []
    for v in range(table.n_functions):
        bits = np.packbits(close[v].reshape(-1))
        masks.append(int.from_bytes(bits.tobytes(), "big"))
    universe_bits = close[0].size
    pad = (-universe_bits) % 8
    full = ((1 << universe_bits) - 1) << pad
    return masks, full


def _greedy_cover(masks, full):
    chosen = []
    covered = 0
    while covered != full:
        best_v, best_gain = -1, -1
        for v, m in enumerate(masks):
            gain = bin(m & ~covered).count("1")
            if gain > best_gain:
                best_v, best_gain = v, gain
        if best_gain <= 0:
            raise AssertionError("universe not coverable (every g covers itself)")
        chosen.append(best_v)
        covered |= masks[best_v]
    return chosen


def _exact_cover_size(masks, full):
    """Minimum set-cover size by depth-first branch and bound."""
    best = len(_greedy_cover(masks, full))

    def dfs(uncovered, depth):
        nonlocal best
        if uncovered == 0:
            best = min(best, depth)
            return
        if depth + 1 >= best:
            return
        # branch on the lowest uncovered bit: some chosen set must cover it
        bit = uncovered & -uncovered
        candidates = [v for v, m in enumerate(masks) if m & bit]
        candidates.sort(key=lambda v: -bin(masks[v] & uncovered).count("1"))
        for v in candidates:
            dfs(uncovered & ~masks[v], depth + 1)

    dfs(full, 0)
    return best


COVER_DEPTH_CAP = 16


def covering_number_report(table: FunctionTable, alpha: float, metric: str = "l2",
                           exact_cap: int = EXACT_COVER_CLASS_CAP) -> CoverReport:
    """Smallest internal cover of the class on its tree at scale alpha.

    Exact for classes of at most ``exact_cap`` functions, greedy upper bound
    beyond (flagged via ``exact``). A candidate covers a function on a path
    when the chosen per-path discrepancy condition holds, so the candidate
    may differ across paths.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if table.depth > COVER_DEPTH_CAP:
        raise ValueError(
            f"covering needs per-path enumeration; depth cap is {COVER_DEPTH_CAP}"
        )
    masks, full = _cover_masks(table, alpha, metric)
    if table.n_functions <= exact_cap:
        return CoverReport(_exact_cover_size(masks, full), True, alpha, metric)
    return CoverReport(len(_greedy_cover(masks, full)), False, alpha, metric)


def covering_number(table: FunctionTable, alpha: float, metric: str = "l2") -> int:
    return covering_number_report(table, alpha, metric).size


def _log_cover_fn(source):
    """delta -> log N_2(delta) for a FunctionTable or analytic profile."""
    if isinstance(source, FunctionTable):
        cache = {}

        def log_cov(delta):
            if delta not in cache:
                cache[delta] = math.log(covering_number(source, delta, "l2"))
            return cache[delta]

        return log_cov
    if hasattr(source, "log_covering"):
        return source.log_covering
    raise TypeError("expected a FunctionTable or an object with log_covering")


def dudley_integral(source, gamma: float, n: int) -> float:
    """Entropy integral of sqrt(n log N_2(delta)) over delta in [1/n, gamma].

    Finite tables give an integer step integrand, which is integrated
    exactly (piecewise, with bisected breakpoints) so the result is
    monotone in gamma; analytic profiles use trapezoidal quadrature on a
    64-point geometric grid. The multiplying constants are left to the
    callers; an empty range integrates to 0.
    """
    lo = 1.0 / n
    if gamma <= lo:
        return 0.0
    table = source if isinstance(source, FunctionTable) else None
    if table is None and getattr(source, "mode", None) == "finite_class_exact":
        table = source.table
    if table is not None:
        return _step_integral(table, lo, gamma, n)
    log_cov = _log_cover_fn(source)
    deltas = np.geomspace(lo, gamma, DUDLEY_GRID_POINTS)
    heights = np.array([math.sqrt(n * max(log_cov(float(d)), 0.0)) for d in deltas])
    return float(np.trapezoid(heights, deltas))


def _step_integral(table: FunctionTable, lo: float, hi: float, n: int) -> float:
    """Exact integral of sqrt(n log N_2(delta)) for the integer-valued,
    nonincreasing cover-size function of one table.

    Greedy covers are not monotone in the scale, so only exact minima take
    this route; everything else falls back to quadrature.
    """
    cache = {}

    def cover(delta):
        if delta not in cache:
            cache[delta] = covering_number(table, delta, "l2")
        return cache[delta]

    def height(size):
        return math.sqrt(n * math.log(size))

    total = 0.0
    tol = max(1e-13 * hi, 1e-15)
    left = lo
    size_left = cover(lo)
    while hi - left > tol:
        if cover(hi) == size_left:
            total += (hi - left) * height(size_left)
            break
        a, b = left, hi
        while b - a > tol:
            mid = 0.5 * (a + b)
            if cover(mid) == size_left:
                a = mid
            else:
                b = mid
        total += (a - left) * height(size_left)
        left = b
        size_left = cover(b)
    return total


# ---------------------------------------------------------------------------
# Offset suprema: signed sums minus a data-dependent penalty.
# ---------------------------------------------------------------------------

OFFSET_KINDS = ("none", "quadratic", "finite_class_penalty", "chained_penalty", "custom_penalty")


@dataclass(frozen=True)
class OffsetForm:
    """Penalty subtracted inside the per-path supremum.

    kind:
      none                  plain signed sums
      quadratic             2 * alpha * sum of squares
      finite_class_penalty  second-moment penalty with a log(class size)
                            multiplier; the expected supremum stays <= 1
      chained_penalty       covering-based penalty with an entropy integral,
                            maximised over a dyadic scale grid; the expected
                            supremum stays <= 7 + 2 log n
      custom_penalty        caller-supplied penalty(square_sums) -> array
    """

    kind: str
    alpha: float | None = None
    class_size: int | None = None
    profile: object | None = None
    penalty: object | None = None

    def __post_init__(self):
        if self.kind not in OFFSET_KINDS:
            raise ValueError(f"unknown offset kind {self.kind!r}")
        if self.kind == "quadratic" and not (self.alpha is not None and self.alpha > 0):
            raise ValueError("quadratic offset needs alpha > 0")
        if self.kind == "custom_penalty" and not callable(self.penalty):
            raise ValueError("custom offset needs a callable penalty")
        if self.class_size is not None and self.class_size < 1:
            raise ValueError("class_size must be >= 1")


def _chained_scale_grid(n: int):
    """Dyadic scales 2**j / n capped at 1."""
    top = int(math.floor(math.log2(n))) if n > 1 else 0
    return [2.0 ** j / n for j in range(top + 1)]


def _offset_objective(table: FunctionTable, form: OffsetForm, signed, squares, n: int):
    """(G, P) objective values before the per-path supremum."""
    if form.kind == "none":
        return signed
    if form.kind == "quadratic":
        return signed - 2.0 * form.alpha * squares
    if form.kind == "finite_class_penalty":
        size = form.class_size if form.class_size is not None else table.n_functions
        scaled = math.log(size) * squares + math.e
        return signed - 2.0 * np.log(scaled) * np.sqrt(32.0 * scaled)
    if form.kind == "chained_penalty":
        source = form.profile if form.profile is not None else table
        log_cov = _log_cover_fn(source)
        logn = math.log(n)
        best = None
        for gamma in _chained_scale_grid(n):
            ent = log_cov(gamma / 2.0)
            integ = dudley_integral(source, gamma, n)
            pen = 4.0 * np.sqrt(2.0 * logn * ent * (squares + 1.0)) \
                + 24.0 * math.sqrt(2.0) * logn * integ
            obj = signed - pen
            best = obj if best is None else np.maximum(best, obj)
        return best
    if form.kind == "custom_penalty":
        return signed - form.penalty(squares)
    raise AssertionError(form.kind)


def offset_expectation(
    table: FunctionTable,
    form: OffsetForm,
    mode: str = "exact",
    rng: RngSpec | None = None,
    replicates: int | None = None,
    depth_cap: int = EXACT_DEPTH_CAP,
):
    """Expected per-path supremum of the offset objective.

    Exact mode enumerates every sign path (depth <= 12) and returns a float;
    mc mode samples paths and returns (estimate, stderr).
    """
    n = table.depth
    if mode == "exact":
        if n > depth_cap:
            raise ValueError(f"depth {n} exceeds exact cap {depth_cap}; use mode='mc'")
        signs, idx = _paths(n)
        signed, squares = _signed_and_square_sums(table, signs, idx)
        obj = _offset_objective(table, form, signed, squares, n)
        return float(obj.max(axis=0).mean())
    if mode == "mc":
        if rng is None or replicates is None:
            raise ValueError("mc mode needs rng and replicates")
        if replicates < 100:
            raise ValueError("need at least 100 replicates")
        gen = rng.generator()
        signs = gen.integers(0, 2, size=(replicates, n)).astype(float) * 2.0 - 1.0
        idx = path_node_indices(n, signs)
        signed, squares = _signed_and_square_sums(table, signs, idx)
        obj = _offset_objective(table, form, signed, squares, n)
        sups = obj.max(axis=0)
        est = float(sups.mean())
        stderr = float(sups.std(ddof=1) / math.sqrt(replicates)) if replicates > 1 else 0.0
        return est, stderr
    raise ValueError(f"unknown mode {mode!r}")
