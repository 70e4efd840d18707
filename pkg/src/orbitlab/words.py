"""Group presentations, word enumeration and limit-set sampling.

A GroupSpec is one of three kinds. free_schottky takes hyperbolic Mobius
generators and certifies at construction that they play ping-pong: for a
generator with singular values s > 1 > 1/s the set of directions it
contracts below norm 1 is an arc on the boundary circle around its minor
right-singular direction, of half angle 2*asin(1/sqrt(s^2+1)); a generator
maps the complement of its own arc onto the arc of its inverse, so 2k
pairwise disjoint arcs force the group to be free and discrete, and word
enumeration needs only free reduction. modular is the integer group
generated by s = [[0,-1],[1,0]] and t = [[1,1],[0,1]]; its elements are
deduplicated exactly as integer matrices up to overall sign. custom takes
arbitrary generators and deduplicates by rounding, which can merge distinct
elements of a non-discrete group, so enumeration is flagged non-exhaustive
and a crude discreteness probe only warns.

Letters are single characters: generators a, b, c, ... with inverses
A, B, C, ...; the modular alphabet is S (self-inverse), T and its inverse
written t. Enumeration streams words by length, then lexicographically in
the order the alphabet is listed.
"""

import math
import warnings

import numpy as np

from .cartan import functional_value, word_cartan
from .errors import InvalidInput, NonElementary
from .hypdisc import (
    ORIGIN,
    Mobius,
    angular_distance,
    classify,
    displacement,
    fixed_points,
    wrap_angle,
)

MODULAR_S = ((0, -1), (1, 0))
MODULAR_T = ((1, 1), (0, 1))

LIMIT_DEDUP_TOL = 1e-12


class Word:
    """An immutable letter sequence; reduction is the group's business."""

    __slots__ = ("letters",)

    def __init__(self, letters=()):
        self.letters = tuple(letters)

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __str__(self):
        return "".join(self.letters) if self.letters else "e"

    def __repr__(self):
        return "Word(%s)" % str(self)

    def __eq__(self, other):
        return isinstance(other, Word) and self.letters == other.letters

    def __hash__(self):
        return hash(self.letters)


class GroupSpec:
    """A group presentation with letter tables.

    Fields: kind; alphabet (ordered letters, generators first with each
    inverse right after its generator); images, letter to Mobius;
    inverse_letter map; exact_dedup, whether enumeration is guaranteed
    duplicate-free and exhaustive.
    """

    __slots__ = ("kind", "alphabet", "images", "inverse_letter", "exact_dedup",
                 "dedup_tol", "int_images")

    def __init__(self, kind, alphabet, images, inverse_letter, exact_dedup,
                 dedup_tol=None, int_images=None):
        self.kind = kind
        self.alphabet = list(alphabet)
        self.images = dict(images)
        self.inverse_letter = dict(inverse_letter)
        self.exact_dedup = exact_dedup
        self.dedup_tol = dedup_tol
        self.int_images = int_images

    @property
    def n_generators(self):
        return sum(1 for a in self.alphabet if self.inverse_letter[a] != a) // 2 + sum(
            1 for a in self.alphabet if self.inverse_letter[a] == a
        )

    def image(self, letter):
        try:
            return self.images[letter]
        except KeyError:
            raise InvalidInput("unknown letter %r" % letter)

    def generator_matrices(self):
        """Letter-to-2x2-array table covering the whole alphabet, the shape
        representation builders consume."""
        return {a: self.images[a].mat.copy() for a in self.alphabet}

    def reduces(self, last, nxt):
        """True when appending nxt to a word ending in last cancels."""
        return last is not None and self.inverse_letter[last] == nxt

    def __repr__(self):
        return "GroupSpec(%s, alphabet=%s)" % (self.kind, "".join(self.alphabet))


def _contraction_arc(mob):
    """Boundary arc of directions a hyperbolic value contracts below norm 1:
    (center angle, half angle) around the minor right-singular direction."""
    _, svals, vt = np.linalg.svd(mob.mat)
    s1 = svals[0]
    if s1 <= 1.0 + 1e-12:
        raise InvalidInput("generator does not contract (singular value %.6g)" % s1)
    v2 = vt[1]
    center = wrap_angle(2.0 * math.atan2(v2[1], v2[0]))
    half = 2.0 * math.asin(1.0 / math.sqrt(s1 * s1 + 1.0))
    return center, half


def free_schottky(generators):
    """Schottky group on hyperbolic generators, ping-pong checked."""
    gens = [g if isinstance(g, Mobius) else Mobius(g) for g in generators]
    if not gens:
        raise InvalidInput("need at least one generator")
    alphabet = []
    images = {}
    inverse_letter = {}
    arcs = []
    for i, g in enumerate(gens):
        if i >= 26:
            raise InvalidInput("at most 26 generators")
        if g.orientation != 1:
            raise InvalidInput("generator %d is orientation reversing" % (i + 1))
        if classify(g) != "hyperbolic":
            raise InvalidInput(
                "generator %d is %s, Schottky generators must be hyperbolic"
                % (i + 1, classify(g))
            )
        lo, up = chr(ord("a") + i), chr(ord("A") + i)
        alphabet += [lo, up]
        images[lo] = g
        images[up] = g.inverse()
        inverse_letter[lo] = up
        inverse_letter[up] = lo
        arcs.append((lo, _contraction_arc(g)))
        arcs.append((up, _contraction_arc(g.inverse())))
    for i in range(len(arcs)):
        for j in range(i + 1, len(arcs)):
            (la, (ca, ha)), (lb, (cb, hb)) = arcs[i], arcs[j]
            if angular_distance(ca, cb) <= ha + hb:
                raise InvalidInput(
                    "ping-pong arcs of %s and %s overlap; not a Schottky system"
                    % (la, lb)
                )
    return GroupSpec("free_schottky", alphabet, images, inverse_letter, True)


def standard_schottky(translation_length=4.0, axis_angle=0.5 * math.pi):
    """Two boosts of equal translation length, the second along an axis
    rotated by axis_angle; separation is certified by the ping-pong check."""
    s = 0.5 * translation_length
    a = Mobius(np.diag([math.exp(s), math.exp(-s)]))
    rot = Mobius.rotation(axis_angle)
    b = rot @ a @ rot.inverse()
    return free_schottky([a, b])


def modular_group():
    """The integer group on s = [[0,-1],[1,0]] and t = [[1,1],[0,1]]."""
    s = Mobius(np.array(MODULAR_S, dtype=float))
    t = Mobius(np.array(MODULAR_T, dtype=float))
    images = {"S": s, "T": t, "t": t.inverse()}
    inverse_letter = {"S": "S", "T": "t", "t": "T"}
    int_images = {
        "S": MODULAR_S,
        "T": MODULAR_T,
        "t": ((1, -1), (0, 1)),
    }
    return GroupSpec(
        "modular", ["S", "T", "t"], images, inverse_letter, True,
        int_images=int_images,
    )


def custom_group(generators, dedup_tol=1e-8):
    """Arbitrary generators; duplicates are merged by rounding at dedup_tol
    and enumeration is therefore flagged non-exhaustive."""
    gens = [g if isinstance(g, Mobius) else Mobius(g) for g in generators]
    if not gens:
        raise InvalidInput("need at least one generator")
    alphabet = []
    images = {}
    inverse_letter = {}
    for i, g in enumerate(gens):
        if i >= 26:
            raise InvalidInput("at most 26 generators")
        lo, up = chr(ord("a") + i), chr(ord("A") + i)
        alphabet += [lo, up]
        images[lo] = g
        images[up] = g.inverse()
        inverse_letter[lo] = up
        inverse_letter[up] = lo
    group = GroupSpec(
        "custom", alphabet, images, inverse_letter, False, dedup_tol=dedup_tol
    )
    _discreteness_probe(group)
    return group


def _discreteness_probe(group, depth=6, margin=1e-3):
    """Crude probe: a short nonempty reduced word landing very close to the
    identity suggests a non-discrete or badly conditioned group."""
    for word, mob in enumerate_elements(group, depth):
        if len(word) == 0:
            continue
        m = mob.mat if mob.mat[0, 0] >= 0 else -mob.mat
        if np.abs(m - np.eye(2)).max() < margin:
            warnings.warn(
                "word %s is within %.1e of the identity; the group may be "
                "non-discrete and enumeration incomplete" % (word, margin),
                stacklevel=3,
            )
            return


def _int_mul(m, g):
    (a, b), (c, d) = m
    (p, q), (r, s) = g
    return ((a * p + b * r, a * q + b * s), (c * p + d * r, c * q + d * s))


def _int_canonical(m):
    flat = (m[0][0], m[0][1], m[1][0], m[1][1])
    for x in flat:
        if x != 0:
            return flat if x > 0 else tuple(-y for y in flat)
    raise InvalidInput("zero matrix")


def _round_canonical(mat, tol):
    flat = mat.ravel()
    for x in flat:
        if abs(x) > 10.0 * tol:
            if x < 0:
                flat = -flat
            break
    return tuple(int(round(v / tol)) for v in flat)


def enumerate_elements(group, max_len):
    """Stream (Word, Mobius) for each distinct element of word length up to
    max_len, ordered by length then lexicographically by alphabet position.

    free_schottky relies on free reduction alone. modular and custom
    deduplicate by matrix (exact integers up to sign, respectively
    rounding); for those kinds every letter is tried at every step, since
    skipping the letter that cancels the stored word's last letter would
    also skip elements whose only short route runs through a relation. A
    non-reduced candidate multiplies out to an already-seen shorter
    element, so the words that do get yielded stay reduced.
    """
    if max_len < 0:
        raise InvalidInput("max_len must be nonnegative")
    use_int = group.kind == "modular"
    free = group.kind == "free_schottky"
    seen = set()
    identity = Mobius.identity()
    if use_int:
        seen.add(_int_canonical(((1, 0), (0, 1))))
        frontier = [(Word(), identity, ((1, 0), (0, 1)))]
    elif group.kind == "custom":
        seen.add(_round_canonical(np.eye(2), group.dedup_tol))
        frontier = [(Word(), identity, None)]
    else:
        frontier = [(Word(), identity, None)]
    yield Word(), identity
    length = 0
    while length < max_len and frontier:
        nxt = []
        for word, mob, intm in frontier:
            last = word.letters[-1] if word.letters else None
            for letter in group.alphabet:
                if free and group.reduces(last, letter):
                    continue
                new_word = Word(word.letters + (letter,))
                new_mob = mob @ group.image(letter)
                if use_int:
                    new_int = _int_mul(intm, group.int_images[letter])
                    key = _int_canonical(new_int)
                    if key in seen:
                        continue
                    seen.add(key)
                    nxt.append((new_word, new_mob, new_int))
                elif group.kind == "custom":
                    key = _round_canonical(new_mob.mat, group.dedup_tol)
                    if key in seen:
                        continue
                    seen.add(key)
                    nxt.append((new_word, new_mob, None))
                else:
                    nxt.append((new_word, new_mob, None))
                yield new_word, new_mob
        frontier = nxt
        length += 1


def modular_norm_ball(bound):
    """Every modular element, up to sign, with all entries bounded by the
    given integer in absolute value; exact scan, no enumeration involved.

    Returns a list of (Word, integer matrix) with words rebuilt by the
    Euclidean algorithm. Any element outside the list has top singular
    value exceeding bound, since the top singular value dominates every
    entry; that gives a slack-free completeness threshold 2*log(bound)
    for the first simple root.
    """
    bound = int(bound)
    if bound < 1:
        raise InvalidInput("bound must be a positive integer")
    out = []
    seen = set()
    for a in range(-bound, bound + 1):
        for c in range(-bound, bound + 1):
            if math.gcd(a, c) != 1:
                continue
            # all (b, d) with a d - b c = 1: one solution plus k*(a, c)
            g, x, y = _extended_gcd(a, c)
            if g < 0:
                x, y = -x, -y
            b0, d0 = -y, x
            r1 = _lattice_range(a, b0, bound)
            r2 = _lattice_range(c, d0, bound)
            if r1 is None or r2 is None:
                continue
            lo, hi = max(r1[0], r2[0]), min(r1[1], r2[1])
            if lo > hi:
                continue
            for k in range(lo, hi + 1):
                m = ((a, b0 + k * a), (c, d0 + k * c))
                key = _int_canonical(m)
                if key in seen:
                    continue
                seen.add(key)
                mm = ((key[0], key[1]), (key[2], key[3]))
                out.append((_modular_word(mm), mm))
    out.sort(key=lambda rec: (len(rec[0]), rec[1]))
    return out


def _extended_gcd(a, b):
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r != 0:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    return old_r, old_s, old_t


def _lattice_range(step, base, bound):
    """Integers k with |base + k*step| <= bound, as an inclusive pair."""
    if step == 0:
        return (-(10**9), 10**9) if abs(base) <= bound else None
    q1 = (-bound - base) / step
    q2 = (bound - base) / step
    lo = math.ceil(min(q1, q2))
    hi = math.floor(max(q1, q2))
    if lo > hi:
        return None
    return (lo, hi)


def _modular_word(m):
    """A word in S, T, t multiplying out to the given integer matrix up to
    sign, found by Euclidean reduction of the first column."""
    (a, b), (c, d) = m
    letters = []
    # peel T^q S from the left until the lower-left entry dies
    while c != 0:
        # nearest quotient keeps |a - q c| <= |c|/2, so the column shrinks
        q = round(a / c)
        letters.extend(["T"] * q if q >= 0 else ["t"] * (-q))
        letters.append("S")
        # left-multiply current target by S^{-1} T^{-q}: track remaining matrix
        a, b, c, d = c, d, -(a - q * c), -(b - q * d)
    # now a d = 1 up to sign
    if a < 0:
        a, b, d = -a, -b, -d
    letters.extend(["T"] * b if b >= 0 else ["t"] * (-b))
    word = Word(tuple(letters))
    check = ((1, 0), (0, 1))
    ints = {"S": MODULAR_S, "T": MODULAR_T, "t": ((1, -1), (0, 1))}
    for letter in word:
        check = _int_mul(check, ints[letter])
    if _int_canonical(check) != _int_canonical(m):
        raise InvalidInput("word reconstruction failed for %r" % (m,))
    return word


class OrbitRecord:
    """One group element with its displacement and Cartan data."""

    __slots__ = ("word", "displacement", "kappa", "phi_values", "mob")

    def __init__(self, word, displacement, kappa, phi_values, mob=None):
        self.word = word
        self.displacement = float(displacement)
        self.kappa = kappa
        self.phi_values = dict(phi_values)
        self.mob = mob

    @property
    def length(self):
        return len(self.word)

    def __repr__(self):
        return "OrbitRecord(%s, disp=%.6g)" % (self.word, self.displacement)


def orbit_table(group, rep, max_len, b0=ORIGIN, functionals=()):
    """One OrbitRecord per distinct element up to max_len, in stream order."""
    records = []
    for word, mob in enumerate_elements(group, max_len):
        disp = displacement(mob, b0)
        kv = word_cartan(rep, word)
        values = {
            phi.name(): functional_value(phi, kv) for phi in functionals
        }
        records.append(OrbitRecord(word, disp, kv, values, mob=mob))
    return records


def write_orbit_csv(records, path):
    """Header word,len,disp,k1..kd; 17 significant digits, LF endings."""
    if not records:
        raise InvalidInput("no records to write")
    d = records[0].kappa.d
    cols = ",".join("k%d" % (i + 1) for i in range(d))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("word,len,disp,%s\n" % cols)
        for rec in records:
            lams = ",".join("%.17g" % v for v in rec.kappa.lambdas)
            fh.write("%s,%d,%.17g,%s\n" % (rec.word, rec.length, rec.displacement, lams))


def limit_sample_words(group, depth):
    """(attracting point, defining word) pairs for the cyclically reduced
    hyperbolic words up to the given length, deduplicated and sorted by
    angle; ties keep the shortest defining word.

    Fewer than three distinct points means no free two-generator dynamics
    was seen; the group is reported elementary (raise the depth first if
    the group is merely thin at this depth).
    """
    pairs = []
    for word, mob in enumerate_elements(group, depth):
        if len(word) == 0:
            continue
        first, last = word.letters[0], word.letters[-1]
        if len(word) > 1 and group.inverse_letter[last] == first:
            continue
        if classify(mob) != "hyperbolic":
            continue
        pairs.append((fixed_points(mob)[0], word))
    pairs.sort(key=lambda pw: pw[0].theta)
    distinct = []
    for p, w in pairs:
        if (
            not distinct
            or angular_distance(distinct[-1][0].theta, p.theta) > LIMIT_DEDUP_TOL
        ):
            distinct.append((p, w))
    if len(distinct) >= 2 and angular_distance(
        distinct[0][0].theta, distinct[-1][0].theta
    ) <= LIMIT_DEDUP_TOL:
        distinct.pop()
    if len(distinct) <= 2:
        raise NonElementary(
            "only %d accumulation points at depth %d; a non-elementary group "
            "shows at least 3 (raise depth if the group should qualify)"
            % (len(distinct), depth)
        )
    return distinct


def limit_sample(group, depth):
    """Attracting fixed points only; see limit_sample_words."""
    return [p for p, _ in limit_sample_words(group, depth)]


def load_group_file(path):
    """Plain text group file: kind=... once, generator=a b c d per line
    (row-major), dedup_tol=... optional for custom."""
    kind = None
    gens = []
    dedup_tol = 1e-8
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise InvalidInput("bad group file line: %r" % line)
            key, value = line.split("=", 1)
            key = key.strip()
            value = value.strip()
            if key == "kind":
                kind = value
            elif key == "generator":
                nums = [float(v) for v in value.replace(",", " ").split()]
                if len(nums) != 4:
                    raise InvalidInput("generator needs 4 numbers, got %r" % value)
                gens.append(np.array(nums).reshape(2, 2))
            elif key == "dedup_tol":
                dedup_tol = float(value)
            else:
                raise InvalidInput("unknown group file key %r" % key)
    if kind == "modular":
        return modular_group()
    if kind == "free_schottky":
        return free_schottky(gens)
    if kind == "custom":
        return custom_group(gens, dedup_tol=dedup_tol)
    raise InvalidInput("group file must set kind to free_schottky, modular or custom")
