"""Shadow diagnostics along the limit set and box-counting dimension.

distortion_scan measures how a sub-limit map stretches shadows: for each
orbit point past the radius, the boundary arc it shadows is intersected
with the sampled limit set, the flag images of the extreme sample points
give an endpoint distance, and the product with e^(alpha(kappa)) is the
distortion ratio. Bounded ratios across the orbit are the numerical
shape of the two-sided distortion property; the constants are outputs,
never inputs.

shadow_separation_check buckets orbit points into annuli by functional
value and looks for same-annulus pairs whose shadows overlap even though
the points are far apart; the largest such pair distance is the
empirical separation constant.

box_dimension covers a metric sample with greedy epsilon-nets over a
geometric grid of scales and regresses log N against log(1/eps).
Grassmannian points embed isometrically through their projectors, so
the same covering code serves real samples and flag curves.
"""

import math

import numpy as np
from scipy import stats

from .cartan import functional_value, word_cartan
from .errors import InsufficientScales, InvalidInput
from .flags import GrassPoint, flag_distance, limit_curve
from .hypdisc import TWO_PI, displacement, shadow_of_isometry
from .words import enumerate_elements, limit_sample

DEFAULT_MIN_SEP = 1e-6
MIN_POINTS = 1000
MIN_SCALES = 5
MIN_SCALE_SPAN = 100.0


class DistortionRow:
    __slots__ = ("word", "alpha_kappa", "endpoint_distance", "ratio")

    def __init__(self, word, alpha_kappa, endpoint_distance, ratio):
        if ratio <= 0.0:
            raise InvalidInput("distortion ratios must be positive")
        self.word = word
        self.alpha_kappa = float(alpha_kappa)
        self.endpoint_distance = float(endpoint_distance)
        self.ratio = float(ratio)

    def as_dict(self):
        return {
            "word": self.word,
            "alpha_kappa": self.alpha_kappa,
            "endpoint_distance": self.endpoint_distance,
            "ratio": self.ratio,
        }


class DistortionReport:
    """Scanned rows plus the count of shadows too small to measure."""

    __slots__ = ("rows", "skipped", "radius", "functional")

    def __init__(self, rows, skipped, radius, functional):
        self.rows = list(rows)
        self.skipped = int(skipped)
        self.radius = float(radius)
        self.functional = functional

    def __len__(self):
        return len(self.rows)

    @property
    def min_ratio(self):
        return min(r.ratio for r in self.rows)

    @property
    def max_ratio(self):
        return max(r.ratio for r in self.rows)

    @property
    def spread(self):
        return self.max_ratio / self.min_ratio

    def __repr__(self):
        if not self.rows:
            return "DistortionReport(empty, skipped=%d)" % self.skipped
        return "DistortionReport(%d rows, spread=%.3g, skipped=%d)" % (
            len(self.rows),
            self.spread,
            self.skipped,
        )


def _single_root_index(phi):
    if phi.kind != "roots" or len(phi.coeffs) != 1:
        raise InvalidInput(
            "shadow diagnostics need a single simple-root functional"
        )
    return next(iter(phi.coeffs))


def write_distortion_csv(report, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("word,alpha_kappa,endpoint_distance,ratio\n")
        for row in report.rows:
            fh.write(
                "%s,%.17g,%.17g,%.17g\n"
                % (row.word, row.alpha_kappa, row.endpoint_distance, row.ratio)
            )


def _arc_extremes(thetas, sh):
    """Indices of the first and last sorted angle inside the arc, in arc
    order; None when fewer than two sample points fall inside. Matches
    coarse_endpoints on the same data, by bisection instead of a scan."""
    n = thetas.size
    if n == 0:
        return None
    if sh.full:
        return (0, n - 1) if n >= 2 else None
    start = sh.start()
    width = 2.0 * sh.half_angle
    lo = int(np.searchsorted(thetas, start, side="left"))
    end = start + width
    if end < TWO_PI:
        hi = int(np.searchsorted(thetas, end, side="right"))
        if hi - lo < 2:
            return None
        return lo, hi - 1
    hi = int(np.searchsorted(thetas, end - TWO_PI, side="right"))
    count = (n - lo) + hi
    if count < 2:
        return None
    first = lo if lo < n else 0
    last = hi - 1 if hi > 0 else n - 1
    return first, last


def distortion_scan(group, rep, phi, r, max_len, sample_depth=None, sample=None):
    """Distortion ratios of the sub-limit map over an orbit ball.

    Rows cover the orbit points with displacement beyond r whose shadows
    capture at least two sampled limit points with distinct flag images;
    the rest are counted as skipped. The limit sample defaults to the
    same depth as the scan. Rows are independent of one another and keep
    enumeration order.
    """
    k = _single_root_index(phi)
    if sample is None:
        sample = limit_curve(rep, group, sample_depth or max_len, k)
    sample = sorted(sample, key=lambda pair: pair[0].theta)
    thetas = np.array([bp.theta for bp, _ in sample])
    planes = [plane for _, plane in sample]
    rows = []
    skipped = 0
    for word, mob in enumerate_elements(group, max_len):
        if displacement(mob) <= r:
            continue
        pick = _arc_extremes(thetas, shadow_of_isometry(mob, r))
        if pick is None:
            skipped += 1
            continue
        dist = flag_distance(planes[pick[0]], planes[pick[1]])
        if dist <= 0.0:
            skipped += 1
            continue
        kv = word_cartan(rep, word)
        a = functional_value(phi, kv)
        rows.append(DistortionRow(str(word), a, dist, dist * math.exp(a)))
    return DistortionReport(rows, skipped, r, phi.name())


def sufficient_radius(
    group,
    max_len,
    depth=None,
    grid=None,
    min_sep=DEFAULT_MIN_SEP,
):
    """Smallest grid radius whose shadows all hold two separated limit
    points; realizes the existence claim by direct search."""
    sample = limit_sample(group, depth or max_len)
    thetas = [p.theta for p in sample]
    if grid is None:
        grid = [0.5 * k for k in range(1, 41)]
    orbit = [
        mob
        for word, mob in enumerate_elements(group, max_len)
        if len(word) > 0
    ]
    for r in grid:
        ok = True
        for mob in orbit:
            if displacement(mob) <= r:
                continue
            sh = shadow_of_isometry(mob, r)
            inside = [t for t in thetas if sh.contains(t)]
            if len(inside) < 2 or max(inside) - min(inside) < min_sep:
                ok = False
                break
        if ok:
            return float(r)
    raise InvalidInput("no radius on the grid captures two limit points per shadow")


class SeparationReport:
    """Empirical same-annulus shadow separation constant."""

    __slots__ = ("c0_empirical", "violations", "pairs_overlapping", "annuli")

    def __init__(self, c0_empirical, violations, pairs_overlapping, annuli):
        self.c0_empirical = float(c0_empirical)
        self.violations = int(violations)
        self.pairs_overlapping = int(pairs_overlapping)
        self.annuli = dict(annuli)

    def __repr__(self):
        return "SeparationReport(c0=%.6g, violations=%d)" % (
            self.c0_empirical,
            self.violations,
        )


def shadow_separation_check(records, phi, r, c0=None):
    """Scan same-annulus orbit pairs for overlapping shadows.

    Points land in annulus n when their functional value lies in
    [n, n+1). c0_empirical is the largest distance between same-annulus
    points whose shadows still overlap, hence the smallest constant with
    zero violations; when c0 is given, pairs beyond it count as
    violations.
    """
    buckets = {}
    for rec in records:
        if rec.mob is None:
            raise InvalidInput("records carry no isometries; rebuild the table")
        value = functional_value(phi, rec.kappa)
        n = math.floor(value)
        buckets.setdefault(n, []).append(rec)
    c0_emp = 0.0
    overlapping = 0
    violations = 0
    annuli = {n: len(v) for n, v in buckets.items()}
    for n, bucket in sorted(buckets.items()):
        m = len(bucket)
        if m < 2:
            continue
        shads = [shadow_of_isometry(rec.mob, r) for rec in bucket]
        centers = np.array([s.center.theta for s in shads])
        halves = np.array(
            [math.pi if s.full else s.half_angle for s in shads]
        )
        for i in range(m - 1):
            gap = np.abs(
                np.mod(centers[i + 1 :] - centers[i] + math.pi, 2 * math.pi)
                - math.pi
            )
            hit = np.nonzero(gap <= halves[i + 1 :] + halves[i])[0]
            for off in hit:
                j = i + 1 + off
                dist = displacement(bucket[i].mob.inverse() @ bucket[j].mob)
                overlapping += 1
                c0_emp = max(c0_emp, dist)
                if c0 is not None and dist > c0:
                    violations += 1
    return SeparationReport(c0_emp, violations, overlapping, annuli)


class DimensionEstimate:
    __slots__ = ("value", "scales", "stderr", "counts")

    def __init__(self, value, scales, stderr, counts):
        if value < 0.0:
            raise InvalidInput("dimension cannot be negative")
        self.value = float(value)
        self.scales = tuple(float(s) for s in scales)
        self.stderr = float(stderr)
        self.counts = tuple(int(c) for c in counts)

    def __repr__(self):
        return "DimensionEstimate(%.4f +- %.4f over %d scales)" % (
            self.value,
            self.stderr,
            len(self.scales),
        )


def _embed(points):
    first = points[0]
    if isinstance(first, GrassPoint):
        rows = [p.projector().reshape(-1) / math.sqrt(2.0) for p in points]
        return np.array(rows)
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    return arr


def _net_size(cloud, eps):
    centers = np.empty_like(cloud)
    count = 0
    for row in cloud:
        if count and np.min(
            np.linalg.norm(centers[:count] - row, axis=1)
        ) <= eps:
            continue
        centers[count] = row
        count += 1
    return count


def box_dimension(points, scales):
    """Slope of greedy covering counts on a geometric scale grid."""
    if len(points) < MIN_POINTS:
        raise InsufficientScales(
            "need at least %d points, got %d" % (MIN_POINTS, len(points))
        )
    scales = sorted(float(s) for s in scales)
    if len(scales) < MIN_SCALES or scales[0] <= 0.0:
        raise InsufficientScales("need %d positive scales" % MIN_SCALES)
    if scales[-1] / scales[0] < MIN_SCALE_SPAN:
        raise InsufficientScales("scales must span two decades")
    cloud = _embed(points)
    counts = [_net_size(cloud, eps) for eps in scales]
    xs = np.log(1.0 / np.array(scales))
    ys = np.log(np.array(counts, dtype=float))
    fit = stats.linregress(xs, ys)
    return DimensionEstimate(
        max(0.0, fit.slope), scales, max(0.0, fit.stderr), counts
    )


def cantor_sample(depth):
    """Midpoints of the middle-thirds construction at the given depth."""
    if depth < 1:
        raise InvalidInput("depth must be positive")
    pts = np.zeros(1)
    for k in range(1, depth + 1):
        pts = np.concatenate([pts, pts + 2.0 / 3.0**k])
    return np.sort(pts + 0.5 / 3.0**depth)


def circle_sample(n):
    """n lines through the origin of the plane at uniform angles."""
    if n < 1:
        raise InvalidInput("need at least one point")
    return [
        GrassPoint([[math.cos(t)], [math.sin(t)]])
        for t in np.linspace(0.0, math.pi, n, endpoint=False)
    ]
