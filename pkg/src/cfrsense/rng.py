"""Counter-based random numbers (Philox4x32-10).

Every random quantity in the pipeline is a pure function of
``(key, stream, block)``: the 64-bit key is split into two 32-bit key words,
the 64-bit stream id fills counter words 0-1 and the 64-bit block index fills
counter words 2-3.  Each block yields four 32-bit words.  Nothing here keeps
state, so frames can be generated in any order (or in parallel) and still
reproduce bit for bit.

Derived quantities:

* bits: the four words of block ``b`` give bits ``128*b .. 128*b+127``, words in
  order, each word least-significant bit first.
* uniforms: words ``(w0, w1)`` and ``(w2, w3)`` each give one double
  ``((w0 >> 5) * 2**26 + (w1 >> 6)) / 2**53`` in ``[0, 1)``.
* complex normals: one per block, Box-Muller on the two uniforms,
  ``sqrt(-2 ln(1 - u0)) * exp(2j*pi*u1) / sqrt(2)`` (unit variance).
"""

import numpy as np

MASK32 = np.uint64(0xFFFFFFFF)
_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_ROUNDS = 10

# stream domains, kept distinct so bits, noise and taps never share a stream
DOMAIN_BITS = 1
DOMAIN_NOISE = 2
DOMAIN_TAPS = 3
DOMAIN_MODEL = 4
DOMAIN_SPLIT = 5


def _u64(x):
    return np.asarray(x, dtype=np.uint64)


def philox4x32(counter, key):
    """Philox4x32-10 bijection.

    Args:
        counter: uint array of shape (..., 4), each entry < 2**32.
        key: uint array of shape (..., 2) broadcastable against ``counter``.

    Returns:
        uint64 array of shape (..., 4) holding the 32-bit output words.
    """
    counter = _u64(counter)
    key = _u64(key)
    c0, c1, c2, c3 = (counter[..., i] & MASK32 for i in range(4))
    k0 = key[..., 0] & MASK32
    k1 = key[..., 1] & MASK32
    for r in range(_ROUNDS):
        if r:
            k0 = (k0 + _W0) & MASK32
            k1 = (k1 + _W1) & MASK32
        p0 = _M0 * c0
        p1 = _M1 * c2
        c0, c1, c2, c3 = (
            (p1 >> np.uint64(32)) ^ c1 ^ k0,
            p1 & MASK32,
            (p0 >> np.uint64(32)) ^ c3 ^ k1,
            p0 & MASK32,
        )
    return np.stack([c0, c1, c2, c3], axis=-1)


def _split64(x):
    x = _u64(x)
    return x & MASK32, x >> np.uint64(32)


def blocks(key, stream, block):
    """Raw words for every (key, stream, block) triple after broadcasting.

    Returns uint64 array of shape ``broadcast(key, stream, block).shape + (4,)``.
    """
    key, stream, block = np.broadcast_arrays(_u64(key), _u64(stream), _u64(block))
    s_lo, s_hi = _split64(stream)
    b_lo, b_hi = _split64(block)
    k_lo, k_hi = _split64(key)
    counter = np.stack([s_lo, s_hi, b_lo, b_hi], axis=-1)
    return philox4x32(counter, np.stack([k_lo, k_hi], axis=-1))


def splitmix64(x):
    """SplitMix64 finalizer, used to fold structured ids into one stream id."""
    x = _u64(x)
    with np.errstate(over="ignore"):
        x = x + np.uint64(0x9E3779B97F4A7C15)
        x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


def derive_stream(domain, *fields):
    """Fold a domain tag and integer fields (scalars or arrays) into stream ids."""
    h = splitmix64(np.uint64(domain))
    for f in fields:
        h = splitmix64(h ^ _u64(f))
    return h


def bits(key, stream, n):
    """``n`` pseudo-random bits (uint8) from one stream; see module docstring."""
    n_blocks = -(-n // 128)
    words = blocks(key, stream, np.arange(n_blocks, dtype=np.uint64))
    shifts = np.arange(32, dtype=np.uint64)
    out = (words[..., None] >> shifts) & np.uint64(1)
    return out.reshape(-1)[:n].astype(np.uint8)


def bits_many(key, streams, n):
    """Bits for many streams at once, shape (len(streams), n).

    Row ``i`` equals ``bits(key, streams[i], n)``.
    """
    streams = _u64(streams).reshape(-1, 1)
    n_blocks = -(-n // 128)
    words = blocks(key, streams, np.arange(n_blocks, dtype=np.uint64)[None, :])
    shifts = np.arange(32, dtype=np.uint64)
    out = (words[..., None] >> shifts) & np.uint64(1)
    return out.reshape(streams.shape[0], -1)[:, :n].astype(np.uint8)


def uniforms_from_words(words):
    """Two doubles in [0, 1) per block, shape (..., 2)."""
    a = (words[..., 0::2] >> np.uint64(5)).astype(np.float64)
    b = (words[..., 1::2] >> np.uint64(6)).astype(np.float64)
    return (a * 67108864.0 + b) / 9007199254740992.0


def complex_normals(key, stream, block):
    """Unit-variance circular complex Gaussians, one per (stream, block)."""
    u = uniforms_from_words(blocks(key, stream, block))
    radius = np.sqrt(-2.0 * np.log1p(-u[..., 0]))
    return radius * np.exp(2j * np.pi * u[..., 1]) / np.sqrt(2.0)


def uniforms(key, stream, n):
    """``n`` doubles in [0, 1) from one stream, two per block."""
    words = blocks(key, stream, np.arange(-(-n // 2), dtype=np.uint64))
    return uniforms_from_words(words).reshape(-1)[:n]


class Stream:
    """Sequential convenience view over one (key, stream) pair.

    Draws consume consecutive blocks, so the same sequence of calls always
    returns the same values.
    """

    def __init__(self, key, *fields, domain=DOMAIN_MODEL):
        self.key = int(key) & 0xFFFFFFFFFFFFFFFF
        self.stream = derive_stream(domain, *fields)
        self._next_block = 0

    def random(self, n):
        n_blocks = -(-n // 2)
        idx = np.arange(self._next_block, self._next_block + n_blocks, dtype=np.uint64)
        self._next_block += n_blocks
        return uniforms_from_words(blocks(self.key, self.stream, idx)).reshape(-1)[:n]

    def integers(self, high, n):
        """``n`` integers uniform on [0, high)."""
        return np.minimum((self.random(n) * high).astype(np.int64), high - 1)

    def permutation(self, n):
        return np.argsort(self.random(n), kind="stable")

    def choice_weighted(self, weights, n):
        """``n`` indices drawn with replacement with probability ``weights``."""
        cdf = np.cumsum(weights)
        cdf /= cdf[-1]
        return np.minimum(np.searchsorted(cdf, self.random(n), side="right"), len(cdf) - 1)
