"""Totally positive unitriangular matrices in cone coordinates.

A reduced word for the longest permutation turns the positive semigroup
of upper unitriangular matrices into a positive orthant: every interior
element is an ordered product of elementary matrices with positive
parameters, one per letter. f_gamma evaluates that product; factorize
inverts it for the standard word (1, 2,1, 3,2,1, ...), whose letters
group into blocks of descending indices. Each block multiplies out to a
unit upper bidiagonal matrix, and a product of bidiagonal blocks can be
peeled from the right by reading one corrected superdiagonal entry per
column. A parameter at or below zero means the input sits outside the
open semigroup; factorize reports which letter failed and whether the
value was merely marginal.

pi_beta sums the parameters attached to one letter. It equals the
corresponding superdiagonal entry of the product, which makes it
additive under multiplication: the grade-one part of the semigroup is a
vector group sitting inside the nilpotent coordinates.
"""

import math

import numpy as np

from .errors import InvalidInput, NotPositive

POSITIVITY_TOL = 1e-10


class ReducedWord:
    """Word in the letters 1..d-1 multiplying out to the order-reversing
    permutation, with the minimal letter count d(d-1)/2."""

    __slots__ = ("letters", "d")

    def __init__(self, letters, d):
        letters = tuple(int(i) for i in letters)
        if d < 2:
            raise InvalidInput("need dimension at least 2")
        if any(not 1 <= i <= d - 1 for i in letters):
            raise InvalidInput("letters must lie in 1..d-1")
        need = d * (d - 1) // 2
        if len(letters) != need:
            raise InvalidInput(
                "longest-element words in rank %d have %d letters, got %d"
                % (d - 1, need, len(letters))
            )
        perm = list(range(d))
        for i in letters:
            perm[i - 1], perm[i] = perm[i], perm[i - 1]
        if perm != list(range(d))[::-1]:
            raise InvalidInput("word does not multiply out to the reversal")
        self.letters = letters
        self.d = d

    def __len__(self):
        return len(self.letters)

    def __eq__(self, other):
        return (
            isinstance(other, ReducedWord)
            and self.letters == other.letters
            and self.d == other.d
        )

    def __hash__(self):
        return hash((self.letters, self.d))

    def __repr__(self):
        return "ReducedWord(%r, d=%d)" % (self.letters, self.d)


def standard_word(d):
    """Blocks of descending letters: (1), (2,1), ..., (d-1,...,1)."""
    letters = []
    for k in range(1, d):
        letters.extend(range(k, 0, -1))
    return ReducedWord(letters, d)


class ConeCoords:
    """Strictly positive parameters along a reduced word."""

    __slots__ = ("word", "params")

    def __init__(self, word, params):
        params = tuple(float(t) for t in params)
        if len(params) != len(word):
            raise InvalidInput(
                "word has %d letters, got %d parameters" % (len(word), len(params))
            )
        if any(not (t > 0.0 and math.isfinite(t)) for t in params):
            raise InvalidInput("cone coordinates must be finite and positive")
        self.word = word
        self.params = params

    def __len__(self):
        return len(self.params)

    def __repr__(self):
        return "ConeCoords(%r, %r)" % (self.word, self.params)


class Unitriangular:
    """Upper triangular with exact unit diagonal and exact zeros below."""

    __slots__ = ("mat",)

    def __init__(self, mat):
        mat = np.array(mat, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise InvalidInput("need a square matrix")
        d = mat.shape[0]
        if not all(mat[i, i] == 1.0 for i in range(d)):
            raise InvalidInput("diagonal entries must equal 1 exactly")
        for i in range(d):
            for j in range(i):
                if mat[i, j] != 0.0:
                    raise InvalidInput("entries below the diagonal must vanish")
        self.mat = mat

    @property
    def dim(self):
        return self.mat.shape[0]

    def __matmul__(self, other):
        return Unitriangular(self.mat @ other.mat)

    def superdiagonal(self):
        return np.array([self.mat[i, i + 1] for i in range(self.dim - 1)])

    def __repr__(self):
        return "Unitriangular(%r)" % (self.mat,)


def elementary(d, i, t):
    """I + t E_{i,i+1}."""
    if not 1 <= i <= d - 1:
        raise InvalidInput("index must lie in 1..d-1")
    mat = np.eye(d)
    mat[i - 1, i] = float(t)
    return Unitriangular(mat)


def f_gamma(word, params):
    """Ordered product of elementaries along the word."""
    if isinstance(params, ConeCoords):
        if params.word != word:
            raise InvalidInput("coordinates were built along a different word")
        params = params.params
    params = tuple(float(t) for t in params)
    if len(params) != len(word):
        raise InvalidInput(
            "word has %d letters, got %d parameters" % (len(word), len(params))
        )
    out = np.eye(word.d)
    for i, t in zip(word.letters, params):
        # right-multiplying by I + t E adds t * column(i-1) to column(i)
        out[:, i] += t * out[:, i - 1]
    return Unitriangular(out)


def factorize(u, word=None):
    """Cone coordinates of an interior semigroup element.

    Only the standard word is supported. The last descending block is a
    unit bidiagonal factor; sweeping columns right to left recovers one
    parameter per column and divides the block out, then the leading
    principal submatrix carries the same structure one dimension down.
    A parameter at or below POSITIVITY_TOL stops the sweep with
    NotPositive; stage is the failing letter's 1-based position in the
    word, and values within the tolerance of zero are flagged marginal.
    Failures are detected in elimination order (last block first).
    """
    d = u.dim
    if word is None:
        word = standard_word(d)
    if word != standard_word(d):
        raise InvalidInput("factorization is implemented for the standard word")
    by_block = {}
    work = u.mat
    for size in range(d, 1, -1):
        cs, work = _peel_block(work, size)
        by_block[size - 1] = cs
    params = []
    for k in range(1, d):
        # block k lists letters k, k-1, ..., 1 and cs[i-1] is letter i
        params.extend(reversed(by_block[k]))
    return ConeCoords(word, params)


def _peel_block(mat, size):
    """Split mat = g . b with b unit bidiagonal carrying the block's
    parameters; return those and g's leading principal block."""
    k = size - 1
    g = np.zeros((size, size))
    g[size - 1, size - 1] = 1.0
    col = g[:, size - 1]
    cs = np.zeros(k)
    for j in range(size - 2, -1, -1):
        c = mat[j, j + 1] - col[j]
        if not (c > POSITIVITY_TOL and math.isfinite(c)):
            letter = j + 1
            position = k * (k - 1) // 2 + (k - letter) + 1
            raise NotPositive(
                "block %d parameter for letter %d is %.3g, not positive"
                % (k, letter, c),
                stage=position,
                marginal=c > -POSITIVITY_TOL,
            )
        cs[j] = c
        col = (mat[:, j + 1] - col) / c
        g[:, j] = col
    return list(cs), g[: size - 1, : size - 1]


def pi_beta(word, params, i):
    """Sum of the parameters carried by letter i; equals the (i, i+1)
    entry of the product, so it adds under semigroup multiplication."""
    if isinstance(params, ConeCoords):
        if params.word != word:
            raise InvalidInput("coordinates were built along a different word")
        params = params.params
    if not 1 <= i <= word.d - 1:
        raise InvalidInput("index must lie in 1..d-1")
    return math.fsum(t for ltr, t in zip(word.letters, params) if ltr == i)


def grade_one_part(word, params):
    """Matrix with pi_beta values on the superdiagonal, zero elsewhere."""
    d = word.d
    out = np.zeros((d, d))
    for i in range(1, d):
        out[i - 1, i] = pi_beta(word, params, i)
    return out


def log_unitriangular(u):
    """Nilpotent logarithm; the alternating series is exact after d-1
    terms."""
    d = u.dim
    n = u.mat - np.eye(d)
    out = np.zeros((d, d))
    term = n.copy()
    for k in range(1, d):
        out += ((-1.0) ** (k + 1)) * term / k
        term = term @ n
    return out
