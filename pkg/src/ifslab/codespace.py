"""Code space: the Baire metric on words, cylinders and porosity witnesses.

Indexing is 1-based.  Finite words stand for the infinite words that extend
them, so several answers are tri-state rather than boolean: a prefix can
certify a disagreement or an occurrence, but never the absence of one in
the unseen tail.

``Psi(tau, p)`` is the set of infinite words with no occurrence of ``tau``
starting at a position ``>= p``.  (The set-builder formula that usually
accompanies this definition drops the negation; the porosity argument only
works for the "no occurrence" reading used here.)
"""

import enum
from dataclasses import dataclass
from fractions import Fraction

from .errors import InvalidInput
from .symbols import occurrences


def _word(w, n=None):
    w = tuple(int(s) for s in w)
    if n is not None:
        for i, s in enumerate(w, 1):
            if not 1 <= s <= n:
                raise InvalidInput(f"symbol {s} at position {i} outside 1..{n}")
    return w


@dataclass(frozen=True)
class BaireDistance:
    """Baire distance between two prefixes, kept as a power of two.

    ``determined``: the prefixes first differ at index ``exponent`` and the
    distance is exactly ``2**-exponent``.  Otherwise they agree on their
    common length ``L`` and the distance is at most ``2**-exponent`` with
    ``exponent = L + 1``.
    """

    exponent: int
    determined: bool

    @property
    def value(self):
        """Exact distance when determined, else the upper bound."""
        return 2.0**-self.exponent

    @property
    def exact(self):
        return Fraction(1, 2**self.exponent)


def baire_distance(a, b):
    a, b = _word(a), _word(b)
    common = min(len(a), len(b))
    for i in range(common):
        if a[i] != b[i]:
            return BaireDistance(i + 1, True)
    return BaireDistance(common + 1, False)


def ball_radius_index(r):
    """The ``n`` with ``2**-(n+1) < r <= 2**-n``, computed exactly."""
    if not 0 < r <= 0.5:
        raise InvalidInput(f"radius must lie in (0, 1/2], got {r}")
    n = 1
    while r <= 2.0 ** -(n + 1):
        n += 1
    return n


@dataclass(frozen=True)
class CylinderSpec:
    """All infinite words starting with ``fixed_prefix``."""

    fixed_prefix: tuple
    alphabet_size: int

    def __post_init__(self):
        object.__setattr__(self, "fixed_prefix", _word(self.fixed_prefix, self.alphabet_size))

    def contains(self, word):
        """Whether a word (at least as long as the fixed prefix) lies in the cylinder."""
        word = _word(word)
        n = len(self.fixed_prefix)
        if len(word) < n:
            raise InvalidInput(f"word of length {len(word)} is too short to test against a cylinder fixing {n} symbols")
        return word[:n] == self.fixed_prefix


def ball_as_cylinder(psi_prefix, r, n_symbols=None):
    """The open Baire ball of radius ``r`` around ``psi`` as a cylinder."""
    psi = _word(psi_prefix, n_symbols)
    n = ball_radius_index(r)
    if len(psi) < n:
        raise InvalidInput(f"radius {r} needs a prefix of length {n}, got {len(psi)}")
    return CylinderSpec(psi[:n], n_symbols if n_symbols is not None else max(psi, default=1))


class Membership(enum.Enum):
    CERTAINLY_NOT_IN = "certainly-not-in"
    CONSISTENT_SO_FAR = "consistent-so-far"


def psi_membership(prefix, tau, p):
    """Whether a prefix already rules out membership in ``Psi(tau, p)``."""
    if p < 1:
        raise InvalidInput("p must be >= 1")
    if occurrences(_word(prefix), _word(tau), p):
        return Membership.CERTAINLY_NOT_IN
    return Membership.CONSISTENT_SO_FAR


@dataclass(frozen=True)
class PorosityWitness:
    """A hole inside the Baire ball of radius ``2**-n`` around ``psi``.

    ``upsilon_prefix`` is the fixed part of the centre; the hole is the ball
    of radius ``lambda * 2**-n`` around it, i.e. the cylinder fixing the
    first ``n + lambda_exponent`` symbols.  ``lambda = 2**-lambda_exponent``
    is stored as its exponent so verification never touches floats.
    """

    upsilon_prefix: tuple
    lambda_exponent: int
    n: int
    tau: tuple
    p: int

    @property
    def lam(self):
        return Fraction(1, 2**self.lambda_exponent)

    @property
    def fixed_length(self):
        return self.n + self.lambda_exponent

    @property
    def canonical(self):
        """Whether lambda has the value ``2**-(2m+p)`` the construction prescribes."""
        return self.lambda_exponent == 2 * len(self.tau) + self.p


def porosity_witness(psi_prefix, tau, p, n):
    """Build the witness for ``psi`` in ``Psi(tau, p)`` at scale ``2**-n``.

    The centre copies ``psi`` below index ``n + p`` and continues with ``tau``
    repeated periodically, so it contains ``tau`` at ``n + p >= p``.
    """
    psi, tau = _word(psi_prefix), _word(tau)
    m = len(tau)
    if m == 0:
        raise InvalidInput("tau must be nonempty")
    if p < 1 or n < 1:
        raise InvalidInput("p and n must be >= 1")
    n_tilde = n + p
    if len(psi) < n_tilde - 1:
        raise InvalidInput(f"psi prefix must have length >= {n_tilde - 1}, got {len(psi)}")
    length = 2 * m + p + n
    upsilon = tuple(psi[i - 1] if i < n_tilde else tau[(i - n_tilde) % m] for i in range(1, length + 1))
    return PorosityWitness(upsilon, 2 * m + p, n, tau, p)


def _avoiding_letter(tau, n_symbols):
    last = tau[-1]
    for s in range(1, n_symbols + 1):
        if s != last:
            return s
    return last


def verify_porosity_witness(w, psi_prefix, n_symbols=2):
    """Check that every word in the witness cylinder lies in the ``2**-n`` ball and outside ``Psi``.

    Every word in the cylinder shares ``upsilon_prefix[:fixed_length]``.

    (b) ball: the fixed part must cover the first ``n`` symbols and agree
        with ``psi`` there.
    (a) outside Psi: every continuation must contain ``tau`` starting at
        some ``k >= p`` and ending by index ``2m + p + n``.  The worst
        continuation repeats a letter different from ``tau``'s last symbol;
        it completes no occurrence outside the fixed part, so (a) holds for
        all continuations iff it holds for that one.

    Exact for any alphabet size; no enumeration needed.
    """
    psi = _word(psi_prefix)
    tau = w.tau
    m = len(tau)
    L = w.fixed_length
    window = 2 * m + w.p + w.n
    if L < w.n or len(w.upsilon_prefix) < min(L, window):
        return False
    if len(psi) < w.n or w.upsilon_prefix[: w.n] != psi[: w.n]:
        return False
    fixed = list(w.upsilon_prefix[: min(L, window)])
    filler = _avoiding_letter(tau, n_symbols)
    worst = fixed + [filler] * (window - len(fixed))
    return any(k + m - 1 <= window for k in occurrences(worst, tau, w.p))


def required_fixed_length(w):
    """Shortest fixed part of the witness centre that still forces ``tau`` at a position >= p."""
    m = len(w.tau)
    hits = occurrences(w.upsilon_prefix, w.tau, w.p)
    if not hits:
        raise InvalidInput("witness centre does not contain tau at a position >= p")
    return max(w.n, hits[0] + m - 1)
