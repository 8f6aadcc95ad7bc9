"""Symbol streams, stochastic kernels and prefix-level disjunctiveness checks.

Symbols are integers ``1..N``.  Every stochastic stream draws exactly one
uniform variate per emitted symbol from a PCG64 generator
(``numpy.random.PCG64``) seeded with the stream's 64-bit seed; uniforms are
buffered in blocks, so the emitted sequence does not depend on how the
consumer slices its calls to :meth:`SymbolStream.take`.

Disjunctiveness of an infinite word cannot be decided from a prefix.  The
checkers here (:func:`missing_words`, :func:`occurrences`) only report what a
finite prefix shows.
"""

import bisect
import itertools
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import BudgetExceeded, InvalidInput

PROB_TOL = 1e-12
WORD_BUDGET = 1_000_000
_BLOCK = 4096


def _prob_vector(p, n=None, what="probability vector"):
    p = np.asarray(p, dtype=float).reshape(-1)
    if n is not None and p.size != n:
        raise InvalidInput(f"{what} has {p.size} entries, expected {n}")
    if (p < 0).any() or not np.isfinite(p).all():
        raise InvalidInput(f"{what} has negative or non-finite entries")
    if abs(p.sum() - 1.0) > PROB_TOL:
        raise InvalidInput(f"{what} sums to {p.sum()!r}, not 1")
    return p


def _cumulative(p):
    return [float(v) for v in np.cumsum(p)]


def _pick(cum, u):
    # clamp guards against the last cumulative entry rounding below 1
    return min(bisect.bisect_right(cum, u), len(cum) - 1) + 1


# Kernels


@dataclass(frozen=True, eq=False)
class Bernoulli:
    """Independent draws from a fixed probability vector."""

    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "probs", _prob_vector(self.probs))
        object.__setattr__(self, "_cum", _cumulative(self.probs))

    kind = "bernoulli"

    @property
    def n(self):
        return len(self.probs)

    def conditional(self, history):
        return self.probs


@dataclass(frozen=True, eq=False)
class Markov:
    """Homogeneous chain: first symbol from ``initial``, then row ``transition[s - 1]``."""

    initial: np.ndarray
    transition: np.ndarray

    kind = "markov"

    def __post_init__(self):
        init = _prob_vector(self.initial, what="initial vector")
        n = init.size
        T = np.asarray(self.transition, dtype=float)
        if T.shape != (n, n):
            raise InvalidInput(f"transition matrix must be {n}x{n}, got {T.shape}")
        for i in range(n):
            _prob_vector(T[i], n, what=f"transition row {i + 1}")
        object.__setattr__(self, "initial", init)
        object.__setattr__(self, "transition", T)
        object.__setattr__(self, "_cum0", _cumulative(init))
        object.__setattr__(self, "_cum", [_cumulative(row) for row in T])

    @property
    def n(self):
        return len(self.initial)

    def conditional(self, history):
        if len(history) == 0:
            return self.initial
        return self.transition[history[-1] - 1]


@dataclass(frozen=True, eq=False)
class CompleteConnections:
    """Chain with complete connections built as a mixture.

    With probability ``alpha`` the next symbol is uniform on ``1..N``;
    otherwise it is drawn from ``base(history)``, where ``base`` maps the full
    history (a sequence of symbols) to a probability vector.  Every
    conditional probability is therefore at least ``alpha / N``.

    The one-scale doubling ratio of the induced measure is bounded by
    ``N / alpha`` under this parameterisation (a chain minorised by ``a``
    directly has the bound ``1/a``).
    """

    base: Callable
    alpha: float
    n: int

    kind = "ccc"

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise InvalidInput(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.n < 1:
            raise InvalidInput("alphabet size must be positive")
        object.__setattr__(self, "_ucum", _cumulative(np.full(self.n, 1.0 / self.n)))

    def base_probs(self, history):
        p = _prob_vector(self.base(history), self.n, what="base kernel output")
        return p

    def conditional(self, history):
        p = self.alpha / self.n + (1.0 - self.alpha) * self.base_probs(history)
        # minorisation is what makes the process disjunctive
        assert p.min() >= self.alpha / self.n * (1 - 1e-12)
        return p


def markov_base(chain):
    """History -> next-symbol law of a Markov chain, usable as a ccc base kernel."""

    def base(history):
        return chain.conditional(history)

    return base


def forbidden_22_chain(n=2):
    """Markov chain on ``1..n`` in which symbol 2 is never followed by 2.

    For ``n == 2`` this is the classical ergodic-but-not-disjunctive chain:
    uniform start, ``1 -> (1/2, 1/2)``, ``2 -> (1, 0)``.  For larger ``n`` every
    row is uniform except row 2, which is uniform over the symbols other than 2.
    """
    if n < 2:
        raise InvalidInput("need at least two symbols")
    T = np.full((n, n), 1.0 / n)
    T[1] = 1.0 / (n - 1)
    T[1, 1] = 0.0
    return Markov(np.full(n, 1.0 / n), T)


def builtin_ccc(alpha=0.1, n=2):
    """The forbidden-22 chain mixed with uniform noise at weight ``alpha``."""
    return CompleteConnections(markov_base(forbidden_22_chain(n)), alpha, n)


def markov_is_disjunctive(kernel):
    """A finite chain with positive initial law is disjunctive iff every transition is positive."""
    if not isinstance(kernel, Markov):
        raise InvalidInput("markov_is_disjunctive needs a Markov kernel")
    if (kernel.initial <= 0).any():
        raise InvalidInput("initial vector must be strictly positive")
    return bool((kernel.transition > 0).all())


# Streams


class _Uniforms:
    def __init__(self, seed):
        self.rng = np.random.Generator(np.random.PCG64(seed))
        self.buf = np.empty(0)
        self.pos = 0

    def take(self, k):
        out = np.empty(k)
        filled = 0
        while filled < k:
            if self.pos == len(self.buf):
                self.buf = self.rng.random(_BLOCK)
                self.pos = 0
            m = min(k - filled, len(self.buf) - self.pos)
            out[filled:filled + m] = self.buf[self.pos:self.pos + m]
            self.pos += m
            filled += m
        return out


class SymbolStream:
    """Stateful single-consumer generator of symbols in ``1..N``.

    ``next(stream)`` yields one symbol; :meth:`take` returns the next ``k`` as
    an ``int64`` array.  Not safe for concurrent consumers.
    """

    kind = "abstract"

    def __init__(self, n):
        if n < 1:
            raise InvalidInput("alphabet size must be positive")
        self.alphabet_size = n

    def __iter__(self):
        return self

    def __next__(self):
        return int(self.take(1)[0])

    def take(self, k):
        raise NotImplementedError


class ChampernowneStream(SymbolStream):
    """All words of length 1, then 2, ..., each length in lexicographic order."""

    kind = "champernowne"

    def __init__(self, n):
        super().__init__(n)
        self._gen = self._symbols()

    def _symbols(self):
        letters = range(1, self.alphabet_size + 1)
        for length in itertools.count(1):
            for word in itertools.product(letters, repeat=length):
                yield from word

    def take(self, k):
        return np.fromiter(self._gen, dtype=np.int64, count=k)


class CyclicStream(SymbolStream):
    """Repeats a fixed word forever.

    ``kind`` is ``"periodic"`` for a period word, ``"explicit"`` for a data
    string; an explicit list wraps around once exhausted.
    """

    def __init__(self, word, n=None, kind="periodic"):
        word = tuple(int(s) for s in word)
        if not word:
            raise InvalidInput("word must be nonempty")
        n = max(word) if n is None else n
        super().__init__(n)
        check = [s for s in word if not 1 <= s <= n]
        if check:
            raise InvalidInput(f"symbol {check[0]} outside 1..{n}")
        self.word = np.array(word, dtype=np.int64)
        self.kind = kind
        self._pos = 0

    def take(self, k):
        idx = (self._pos + np.arange(k)) % len(self.word)
        self._pos = (self._pos + k) % len(self.word)
        return self.word[idx]


class KernelStream(SymbolStream):
    """Draws from a :class:`Bernoulli`, :class:`Markov` or :class:`CompleteConnections` kernel."""

    def __init__(self, kernel, seed=0):
        super().__init__(kernel.n)
        self.kernel = kernel
        self.kind = kernel.kind
        self.seed = seed
        self._u = _Uniforms(seed)
        self._history = []

    def take(self, k):
        u = self._u.take(k)
        kern = self.kernel
        if isinstance(kern, Bernoulli):
            cum = np.asarray(kern._cum)
            out = np.minimum(np.searchsorted(cum, u, side="right"), kern.n - 1) + 1
            return out.astype(np.int64)
        hist = self._history
        out = np.empty(k, dtype=np.int64)
        if isinstance(kern, Markov):
            for i, ui in enumerate(u.tolist()):
                cum = kern._cum[hist[-1] - 1] if hist else kern._cum0
                s = _pick(cum, ui)
                hist.append(s)
                out[i] = s
            # a Markov kernel only ever looks at the last symbol
            del hist[:-1]
            return out
        alpha = kern.alpha
        for i, ui in enumerate(u.tolist()):
            if ui < alpha:
                s = _pick(kern._ucum, ui / alpha)
            else:
                base = kern.base_probs(hist)
                s = _pick(_cumulative(base), (ui - alpha) / (1.0 - alpha))
                # mixture law: alpha/N + (1-alpha)*base >= alpha/N
                assert alpha / kern.n + (1.0 - alpha) * base.min() >= alpha / kern.n
            hist.append(s)
            out[i] = s
        return out


def champernowne_stream(n):
    return ChampernowneStream(n)


def stochastic_stream(kernel, seed=0):
    return KernelStream(kernel, seed)


def periodic_stream(word, n=None):
    return CyclicStream(word, n, kind="periodic")


def explicit_stream(symbols, n=None):
    return CyclicStream(symbols, n, kind="explicit")


def champernowne_prefix_length(n, m):
    """Length of the Champernowne prefix made of all words of length <= m."""
    return sum(j * n**j for j in range(1, m + 1))


# Factor diagnostics


def _as_array(word):
    return np.asarray(word, dtype=np.int64).reshape(-1)


def _factor_codes(prefix, m, n):
    w = _as_array(prefix) - 1
    if len(w) < m:
        return np.empty(0, dtype=np.int64)
    codes = np.zeros(len(w) - m + 1, dtype=np.int64)
    for j in range(m):
        codes = codes * n + w[j:len(w) - m + 1 + j]
    return codes


def missing_words(prefix, m, n):
    """Every length-``m`` word over ``1..n`` that is not a factor of ``prefix``, lexicographic.

    An empty result is necessary (on this prefix) for disjunctiveness, never sufficient.
    """
    if m < 1:
        raise InvalidInput("m must be at least 1")
    total = n**m
    if total > WORD_BUDGET:
        raise BudgetExceeded(f"{n}^{m} = {total} words exceeds the word budget {WORD_BUDGET}", WORD_BUDGET)
    seen = np.zeros(total, dtype=bool)
    seen[_factor_codes(prefix, m, n)] = True
    missing = np.flatnonzero(~seen)
    out = []
    for code in missing.tolist():
        word = []
        for _ in range(m):
            code, r = divmod(code, n)
            word.append(r + 1)
        out.append(tuple(reversed(word)))
    return out


def occurrences(word, tau, start=1):
    """1-based start positions ``k >= start`` where ``tau`` occurs in ``word``; overlaps count."""
    if start < 1:
        raise InvalidInput("start position must be >= 1")
    w, t = _as_array(word), _as_array(tau)
    m = len(t)
    if m == 0:
        raise InvalidInput("tau must be nonempty")
    if len(w) < m:
        return []
    win = np.lib.stride_tricks.sliding_window_view(w, m)
    hits = np.flatnonzero((win == t).all(axis=1)) + 1
    return hits[hits >= start].tolist()


# Cylinder measures


def cylinder_measure(kernel, prefix):
    """Probability that the process starts with ``prefix``: a product of conditionals."""
    prefix = [int(s) for s in prefix]
    mu = 1.0
    for i, s in enumerate(prefix):
        if not 1 <= s <= kernel.n:
            raise InvalidInput(f"symbol {s} at position {i + 1} outside 1..{kernel.n}")
        mu *= float(kernel.conditional(prefix[:i])[s - 1])
    return mu


class DoublingRatio(NamedTuple):
    value: float
    zero_measure: bool


def doubling_ratio(kernel, prefix):
    """``mu[prefix minus its last symbol] / mu[prefix]``.

    This is the ratio between a Baire ball and the ball of half its radius
    around any word starting with ``prefix``.  A zero-measure denominator is
    reported as ``inf`` with ``zero_measure`` set.
    """
    prefix = [int(s) for s in prefix]
    if len(prefix) < 2:
        raise InvalidInput("prefix must have length >= 2")
    num = cylinder_measure(kernel, prefix[:-1])
    den = num * float(kernel.conditional(prefix[:-1])[prefix[-1] - 1])
    if den == 0:
        return DoublingRatio(math.inf, True)
    return DoublingRatio(num / den, False)
