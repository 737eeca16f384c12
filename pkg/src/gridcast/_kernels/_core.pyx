# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of the pure-Python grid accumulator.

Same state, same operations, same floating-point operation order as
``pure.GridAccumulator`` (see that module's docstring for the pinned
conventions); the cell table is dense here instead of sparse.  Forecasts
produced through either backend agree bit for bit -- the cross-backend test
enforces it.
"""

import numpy as np

from ..errors import ConfigError, DomainError


cdef inline void _parts(double value, int size, int* lo, int* hi, double* frac) noexcept:
    cdef double t = value * size
    cdef int i = <int> t
    cdef double f
    if i >= size:
        lo[0] = size
        hi[0] = size
        frac[0] = 0.0
        return
    f = t - i
    if f == 0.0:
        lo[0] = i
        hi[0] = i
        frac[0] = 0.0
        return
    lo[0] = i
    hi[0] = i + 1
    frac[0] = f


cdef class GridAccumulator:
    cdef public int size
    cdef public int dim
    cdef double[::1] mu
    cdef long pstride
    cdef long[::1] xstrides
    # scratch buffers reused across calls
    cdef long[::1] offs
    cdef double[::1] wts
    cdef double[::1] gbuf
    cdef int[::1] clo
    cdef int[::1] chi
    cdef double[::1] cfr

    def __cinit__(self, int size, int dim):
        if size < 1:
            raise ConfigError(f"grid size must be >= 1, got {size}")
        if dim < 0:
            raise ConfigError(f"signal dimension must be >= 0, got {dim}")
        self.size = size
        self.dim = dim
        nodes = size + 1
        total = nodes ** (dim + 1)
        self.mu = np.zeros(total, dtype=np.float64)
        self.pstride = nodes ** dim
        self.xstrides = np.array(
            [nodes ** (dim - 1 - j) for j in range(dim)], dtype=np.int64
        ).reshape(dim)
        combos = 1 << dim
        self.offs = np.zeros(combos, dtype=np.int64)
        self.wts = np.zeros(combos, dtype=np.float64)
        self.gbuf = np.zeros(size + 1, dtype=np.float64)
        self.clo = np.zeros(max(dim, 1), dtype=np.int32)
        self.chi = np.zeros(max(dim, 1), dtype=np.int32)
        self.cfr = np.zeros(max(dim, 1), dtype=np.float64)

    @property
    def kind(self):
        return "grid"

    cdef int _signal_cells(self, x) except -1:
        cdef int j, b, dim = self.dim
        cdef long off
        cdef double w
        if len(x) != dim:
            raise DomainError(f"expected {dim} signal coordinates, got {len(x)}")
        for j in range(dim):
            _parts(<double> x[j], self.size, &self.clo[j], &self.chi[j], &self.cfr[j])
        for b in range(1 << dim):
            off = 0
            w = 1.0
            for j in range(dim):
                if (b >> (dim - 1 - j)) & 1:
                    off += self.chi[j] * self.xstrides[j]
                    w *= self.cfr[j]
                else:
                    off += self.clo[j] * self.xstrides[j]
                    w *= 1.0 - self.cfr[j]
            self.offs[b] = off
            self.wts[b] = w
        return 0

    cdef void _node_scores(self) noexcept:
        cdef int i, b, combos = 1 << self.dim
        cdef long base
        cdef double acc
        for i in range(self.size + 1):
            base = i * self.pstride
            acc = 0.0
            for b in range(combos):
                acc += self.wts[b] * self.mu[base + self.offs[b]]
            self.gbuf[i] = acc

    def node_scores(self, x):
        """Score of each grid endpoint as a candidate forecast."""
        self._signal_cells(x)
        self._node_scores()
        return [self.gbuf[i] for i in range(self.size + 1)]

    def score(self, double p, x):
        """Expected accumulated residual seen by a rounded candidate ``p``."""
        cdef int lo, hi, b, combos = 1 << self.dim
        cdef double frac, glo, ghi
        cdef long base_lo, base_hi
        _parts(p, self.size, &lo, &hi, &frac)
        self._signal_cells(x)
        glo = 0.0
        ghi = 0.0
        base_lo = lo * self.pstride
        base_hi = hi * self.pstride
        for b in range(combos):
            glo += self.wts[b] * self.mu[base_lo + self.offs[b]]
        for b in range(combos):
            ghi += self.wts[b] * self.mu[base_hi + self.offs[b]]
        return (1.0 - frac) * glo + frac * ghi

    def solve(self, x):
        """Leftmost root of the piecewise-linear score, or the boundary rule."""
        cdef int i, size = self.size
        cdef double gi, t
        self._signal_cells(x)
        self._node_scores()
        for i in range(size + 1):
            gi = self.gbuf[i]
            if gi == 0.0:
                return (<double> i) / size
            if i < size and gi * self.gbuf[i + 1] < 0.0:
                t = gi / (gi - self.gbuf[i + 1])
                return (i + t) / size
        return 1.0 if self.gbuf[0] > 0.0 else 0.0

    def update(self, double p, x, double outcome):
        """Spread ``outcome - p`` over the joint rounding cells of ``(p, x)``."""
        cdef int plo, phi, b, combos = 1 << self.dim
        cdef double pfrac, w_p
        cdef double r = outcome - p
        cdef long base
        _parts(p, self.size, &plo, &phi, &pfrac)
        self._signal_cells(x)
        base = plo * self.pstride
        w_p = 1.0 - pfrac
        for b in range(combos):
            self.mu[base + self.offs[b]] += (w_p * self.wts[b]) * r
        if pfrac != 0.0:
            base = phi * self.pstride
            for b in range(combos):
                self.mu[base + self.offs[b]] += (pfrac * self.wts[b]) * r
        return None

    def energy(self):
        """Sum of squared cell sums (bounded by the number of updates)."""
        cdef double acc = 0.0
        cdef long i
        for i in range(self.mu.shape[0]):
            acc += self.mu[i] * self.mu[i]
        return acc

    def cell_items(self):
        """Nonzero cells as ``(cell_index_tuple, value)`` pairs."""
        out = []
        pstride = self.pstride
        xstr = [self.xstrides[j] for j in range(self.dim)]
        for flat in range(self.mu.shape[0]):
            v = self.mu[flat]
            if v == 0.0:
                continue
            idx = [0] * (self.dim + 1)
            idx[0], rem = divmod(flat, pstride)
            for j in range(self.dim):
                idx[j + 1], rem = divmod(rem, xstr[j])
            out.append((tuple(idx), v))
        return out
