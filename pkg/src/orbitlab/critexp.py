"""Poincare series, counting functions and critical-exponent estimates.

Everything here works on a ValueSample: the sorted multiset of functional
values phi(kappa(rho(gamma))) over enumerated group elements, together
with a completeness certificate complete_to. Below that threshold the
sample provably contains every group element's value, so counting and
estimation restricted to [0, complete_to] see the true orbit, not an
enumeration artifact.

Two certificate routes exist. A ball extracted from a word-length
enumeration uses the minimum value on the length frontier minus an
empirically measured per-letter dip (for ping-pong groups the dip is
zero and the frontier bound is sharp). For the modular group the scan
over integer matrices with bounded entries gives a slack-free threshold:
the top singular value dominates every entry, so a value below
2 log(bound) forces the matrix inside the scanned box.

The slope estimator regresses log N(T) on T over a uniform grid; the
bisection estimator finds where the truncated window series crosses a
threshold and is kept only as an upper-biased cross-check.
"""

import json
import math

import numpy as np
from scipy import stats

from .cartan import cartan_projection, functional_value, word_cartan
from .errors import InsufficientData, InvalidInput
from .reps import sym_power_matrix
from .words import enumerate_elements, modular_norm_ball

CLAMP = 1e-12
MIN_WINDOW_VALUES = 20
GRID_POINTS = 40


class ValueSample:
    """Sorted nonnegative functional values with a completeness threshold."""

    __slots__ = ("values", "complete_to", "label")

    def __init__(self, values, complete_to, label=""):
        vals = np.sort(np.asarray(list(values), dtype=float))
        if vals.size and vals[0] < -1e-9:
            raise InvalidInput("functional values must be nonnegative")
        vals = np.where(vals < CLAMP, 0.0, vals)
        top = float(vals[-1]) if vals.size else 0.0
        if complete_to > top + 1e-12:
            raise InvalidInput(
                "complete_to %.6g exceeds the largest sampled value %.6g"
                % (complete_to, top)
            )
        self.values = vals
        self.complete_to = float(complete_to)
        self.label = label

    def __len__(self):
        return int(self.values.size)

    def is_certified(self, t):
        return t <= self.complete_to

    def __repr__(self):
        return "ValueSample(n=%d, complete_to=%.6g)" % (len(self), self.complete_to)


def poincare_series(vs, s):
    """Truncated sum of e^(-s v) over the sample, compensated, in
    ascending value order."""
    if len(vs) == 0:
        return 0.0
    return math.fsum(math.exp(-s * v) for v in vs.values)


def counting_function(vs, t):
    """Number of sampled values at most t; certified only when
    t <= complete_to (check is_certified)."""
    return int(np.searchsorted(vs.values, t, side="right"))


class ExponentEstimate:
    __slots__ = ("value", "stderr", "method", "window", "n_values", "complete_to")

    def __init__(self, value, stderr, method, window, n_values, complete_to):
        if stderr < 0:
            raise InvalidInput("stderr must be nonnegative")
        self.value = float(value)
        self.stderr = float(stderr)
        self.method = method
        self.window = (float(window[0]), float(window[1]))
        self.n_values = int(n_values)
        self.complete_to = float(complete_to)

    def report(self, functional_name):
        return {
            "functional": functional_name,
            "method": self.method,
            "window": list(self.window),
            "value": self.value,
            "stderr": self.stderr,
            "complete_to": self.complete_to,
            "n_values": self.n_values,
        }

    def __repr__(self):
        return "ExponentEstimate(%.4f +- %.4f, %s, window=(%.3g, %.3g))" % (
            self.value,
            self.stderr,
            self.method,
            self.window[0],
            self.window[1],
        )


def default_window(vs):
    return (0.5 * vs.complete_to, vs.complete_to)


def estimate_exponent(vs, window=None, method="slope", threshold=1.0):
    """Critical-exponent estimate over a certified window.

    slope: least-squares slope of log N(T) against T on a uniform grid.
    bisection: smallest s where the window-truncated series drops below
    the threshold; truncation biases this upward, use as a cross-check.
    """
    if window is None:
        window = default_window(vs)
    t0, t1 = float(window[0]), float(window[1])
    if not (0.0 <= t0 < t1):
        raise InvalidInput("window must satisfy 0 <= T0 < T1")
    if t1 > vs.complete_to + 1e-12:
        raise InvalidInput(
            "window end %.6g is past the certificate %.6g" % (t1, vs.complete_to)
        )
    inside = vs.values[(vs.values >= t0) & (vs.values <= t1)]
    distinct = np.unique(inside)
    if distinct.size < MIN_WINDOW_VALUES:
        raise InsufficientData(
            "window holds %d distinct values, need %d"
            % (distinct.size, MIN_WINDOW_VALUES)
        )
    if method == "slope":
        grid = np.linspace(t0, t1, GRID_POINTS)
        counts = np.searchsorted(vs.values, grid, side="right")
        keep = counts > 0
        if keep.sum() < 3:
            raise InsufficientData("too few grid points with nonzero counts")
        fit = stats.linregress(grid[keep], np.log(counts[keep].astype(float)))
        return ExponentEstimate(
            fit.slope, fit.stderr, "slope", (t0, t1), inside.size, vs.complete_to
        )
    if method == "bisection":
        lo, hi = 0.0, 1.0
        while _window_series(inside, hi) >= threshold:
            hi *= 2.0
            if hi > 1e6:
                raise InsufficientData("window series never drops below threshold")
        if _window_series(inside, lo) < threshold:
            return ExponentEstimate(
                0.0, 0.0, "bisection", (t0, t1), inside.size, vs.complete_to
            )
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if _window_series(inside, mid) >= threshold:
                lo = mid
            else:
                hi = mid
        return ExponentEstimate(
            0.5 * (lo + hi),
            0.5 * (hi - lo),
            "bisection",
            (t0, t1),
            inside.size,
            vs.complete_to,
        )
    raise InvalidInput("method must be slope or bisection")


def _window_series(values, s):
    return math.fsum(math.exp(-s * v) for v in values)


def sample_from_records(records, phi, complete_to, label=""):
    """ValueSample of a functional over an orbit table."""
    name = phi.name()
    vals = []
    for rec in records:
        if name in rec.phi_values:
            vals.append(rec.phi_values[name])
        else:
            vals.append(functional_value(phi, rec.kappa))
    return ValueSample(vals, complete_to, label=label)


def sample_from_enumeration(group, rep, phi, max_len):
    """Enumerate to max_len and certify by the length frontier.

    complete_to is the smallest value on the frontier minus the largest
    observed one-letter dip; any longer word extends a frontier word by
    letters that each cost at least the negative dip, so a value below
    the threshold would already have been enumerated.
    """
    if max_len < 1:
        raise InvalidInput("need max_len >= 1 for a frontier certificate")
    value_of = {}
    dips = [0.0]
    frontier_min = math.inf
    for word, _ in enumerate_elements(group, max_len):
        kv = word_cartan(rep, word)
        v = functional_value(phi, kv)
        value_of[str(word)] = v
        if len(word) > 0:
            parent = "".join(word.letters[:-1]) or "e"
            if parent in value_of:
                dips.append(max(0.0, value_of[parent] - v))
        if len(word) == max_len:
            frontier_min = min(frontier_min, v)
    if not math.isfinite(frontier_min):
        raise InsufficientData("no words on the length frontier")
    slack = max(dips)
    complete_to = max(0.0, frontier_min - slack)
    return ValueSample(
        value_of.values(),
        complete_to,
        label="%s ball, max_len %d" % (group.kind, max_len),
    )


def sample_from_norm_ball(bound, sym_dim, phi):
    """Modular-group sample from the exact entry-bound scan.

    Certificate: an element with top singular value at most `bound` has
    every entry inside the scanned box, and for a symmetric power all
    root data reduce to 2 log(top singular value) of the underlying 2x2
    matrix, scaled by the functional's value on the unit-gap direction.
    No slack term is needed.
    """
    ball = modular_norm_ball(bound)
    mats = np.array([[list(m[0]), list(m[1])] for _, m in ball], dtype=float)
    svals = np.linalg.svd(mats, compute_uv=False)
    # functional on the sym-power Cartan vector of a unit-gap 2x2 matrix
    unit = sym_power_matrix(np.diag([math.exp(0.5), math.exp(-0.5)]), sym_dim)
    mult = functional_value(phi, cartan_projection(unit))
    logs = np.log(svals[:, 0])
    vals = 2.0 * mult * logs
    return ValueSample(
        np.maximum(vals, 0.0),
        2.0 * mult * math.log(bound),
        label="modular norm ball %d, sym%d" % (bound, sym_dim),
    )


def synthetic_log_sample(n, c=2.0):
    """The family {c log k : k = 1..n}; its counting function is
    floor(e^(T/c)) and its exponent is exactly 1/c."""
    if n < 1:
        raise InvalidInput("need n >= 1")
    vals = c * np.log(np.arange(1, n + 1, dtype=float))
    return ValueSample(vals, float(vals[-1]), label="synthetic c=%g n=%d" % (c, n))


def write_report_jsonl(path, rows):
    """One JSON object per line; rows come from ExponentEstimate.report."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
