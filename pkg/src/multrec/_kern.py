"""Vectorized mod-p kernels backing the hot paths.

Two numpy backends: the default 64-bit prime 2^64 - 2^32 + 1 (products are
reduced with the split-word identity 2^64 = 2^32 - 1 mod p, so everything
stays in uint64), and primes below 2^31 (products fit in uint64 directly).
Other primes get no kernel and callers fall back to plain-int code paths.
"""

from __future__ import annotations

import numpy as np

P_GOLD = (1 << 64) - (1 << 32) + 1
M32 = (1 << 32) - 1
_U = np.uint64


def _u64(x):
    return np.asarray(x, dtype=np.uint64)


class GoldilocksKernel:
    """Arithmetic mod 2^64 - 2^32 + 1 on uint64 arrays."""

    p = P_GOLD
    ntt_available = True

    def __init__(self):
        # 7 generates the full multiplicative group; 2-adicity of p-1 is 32.
        self._gen = 7
        self._twiddle_cache = {}

    def array(self, coeffs):
        return np.array(coeffs, dtype=np.uint64)

    def tolist(self, a):
        return [int(x) for x in a]

    def add(self, a, b):
        s = a + b
        over = s < a
        if over.any():
            s = s + np.where(over, _U(M32), _U(0))
        return np.where(s >= _U(P_GOLD), s - _U(P_GOLD), s)

    def sub(self, a, b):
        d = a - b
        under = a < b
        if under.any():
            d = d - np.where(under, _U(M32), _U(0))
        return np.where(d >= _U(P_GOLD), d - _U(P_GOLD), d)

    def neg(self, a):
        return np.where(a == 0, a, _U(P_GOLD) - a)

    def mul(self, a, b):
        a0 = a & _U(M32)
        a1 = a >> _U(32)
        b0 = b & _U(M32)
        b1 = b >> _U(32)
        lo = a0 * b0
        m1 = a1 * b0
        m2 = a0 * b1
        hi = a1 * b1
        t = (lo >> _U(32)) + (m1 & _U(M32)) + (m2 & _U(M32))
        x_lo = (lo & _U(M32)) | ((t & _U(M32)) << _U(32))
        x_hi = hi + (m1 >> _U(32)) + (m2 >> _U(32)) + (t >> _U(32))
        # x = x_hi*2^64 + x_lo == x_lo + h0*(2^32-1) - h1  (mod p)
        h0 = x_hi & _U(M32)
        h1 = x_hi >> _U(32)
        r = x_lo - h1
        borrow = x_lo < h1
        if borrow.any():
            r = r - np.where(borrow, _U(M32), _U(0))
        t2 = h0 * _U(M32)
        s = r + t2
        over = s < r
        if over.any():
            s = s + np.where(over, _U(M32), _U(0))
        return np.where(s >= _U(P_GOLD), s - _U(P_GOLD), s)

    def scale(self, a, c):
        if c == 0:
            return np.zeros_like(a)
        if c == 1:
            return a.copy()
        return self.mul(a, np.full_like(a, _U(c)))

    def dot(self, a, b):
        """Exact dot product, returned as a Python int in [0, p)."""
        prod = self.mul(a, b)
        lo = int(np.sum(prod & _U(M32), dtype=np.uint64))
        hi = int(np.sum(prod >> _U(32), dtype=np.uint64))
        return ((hi << 32) + lo) % P_GOLD

    def sum(self, a, axis=None):
        lo = np.sum(a & _U(M32), axis=axis, dtype=np.uint64)
        hi = np.sum(a >> _U(32), axis=axis, dtype=np.uint64)
        if axis is None:
            return ((int(hi) << 32) + int(lo)) % P_GOLD
        out = np.empty_like(lo)
        flat_lo = lo.reshape(-1)
        flat_hi = hi.reshape(-1)
        flat_out = out.reshape(-1)
        for i in range(flat_lo.size):
            flat_out[i] = ((int(flat_hi[i]) << 32) + int(flat_lo[i])) % P_GOLD
        return out

    # -- NTT ---------------------------------------------------------------

    def _tables(self, n):
        tabs = self._twiddle_cache.get(n)
        if tabs is not None:
            return tabs
        assert n & (n - 1) == 0 and (P_GOLD - 1) % n == 0
        idx = np.arange(n)
        rev = np.zeros(n, dtype=np.int64)
        bits = n.bit_length() - 1
        for b in range(bits):
            rev |= ((idx >> b) & 1) << (bits - 1 - b)
        fwd, inv = [], []
        length = 2
        while length <= n:
            w = pow(self._gen, (P_GOLD - 1) // length, P_GOLD)
            half = length // 2
            ws = [1] * half
            for j in range(1, half):
                ws[j] = ws[j - 1] * w % P_GOLD
            fwd.append(self.array(ws))
            inv.append(self.array([pow(x, P_GOLD - 2, P_GOLD) for x in ws]))
            length *= 2
        n_inv = pow(n, P_GOLD - 2, P_GOLD)
        tabs = (rev, fwd, inv, n_inv)
        self._twiddle_cache[n] = tabs
        return tabs

    def ntt(self, a, inverse=False):
        """In-place-style NTT over the last axis; a is (..., n) uint64."""
        n = a.shape[-1]
        rev, fwd, inv, n_inv = self._tables(n)
        tw = inv if inverse else fwd
        x = a[..., rev].copy()
        length, stage = 2, 0
        while length <= n:
            half = length // 2
            shape = x.shape[:-1] + (n // length, length)
            b = x.reshape(shape)
            u = b[..., :half]
            t = self.mul(b[..., half:], tw[stage])
            lo = self.add(u, t)
            hi = self.sub(u, t)
            b[..., :half] = lo
            b[..., half:] = hi
            length *= 2
            stage += 1
        if inverse:
            x = self.scale(x, n_inv)
        return x

    def polymul(self, a, b):
        """Product of dense coefficient arrays (last axis), via NTT."""
        la, lb = a.shape[-1], b.shape[-1]
        if la == 0 or lb == 0:
            return np.zeros(a.shape[:-1] + (0,), dtype=np.uint64)
        size = 1
        while size < la + lb - 1:
            size *= 2
        fa = np.zeros(a.shape[:-1] + (size,), dtype=np.uint64)
        fa[..., :la] = a
        fb = np.zeros(b.shape[:-1] + (size,), dtype=np.uint64)
        fb[..., :lb] = b
        fa = self.ntt(fa)
        fb = self.ntt(fb)
        out = self.ntt(self.mul(fa, fb), inverse=True)
        return out[..., : la + lb - 1]


class SmallPrimeKernel:
    """Arithmetic mod p < 2^31; uint64 products never overflow."""

    ntt_available = False

    def __init__(self, p):
        self.p = p

    def array(self, coeffs):
        return np.array(coeffs, dtype=np.uint64)

    def tolist(self, a):
        return [int(x) for x in a]

    def add(self, a, b):
        return (a + b) % _U(self.p)

    def sub(self, a, b):
        return (a + _U(self.p) - b) % _U(self.p)

    def neg(self, a):
        return (_U(self.p) - a) % _U(self.p)

    def mul(self, a, b):
        return (a * b) % _U(self.p)

    def scale(self, a, c):
        if c == 0:
            return np.zeros_like(a)
        return (a * _U(c)) % _U(self.p)

    def dot(self, a, b):
        prod = (a * b) % _U(self.p)
        # p < 2^31 so partial sums of < 2^33 terms stay below 2^64
        return int(np.sum(prod, dtype=np.uint64)) % self.p

    def sum(self, a, axis=None):
        s = np.sum(a, axis=axis, dtype=np.uint64)
        if axis is None:
            return int(s) % self.p
        return s % _U(self.p)

    def ntt(self, a, inverse=False):
        raise NotImplementedError("no NTT for this modulus")

    def polymul(self, a, b):
        raise NotImplementedError("no NTT for this modulus")


_KERNELS = {}


def get_kernel(p):
    """Kernel for prime p, or None when no vectorized backend applies."""
    k = _KERNELS.get(p)
    if k is not None:
        return k
    if p == P_GOLD:
        k = GoldilocksKernel()
    elif p < (1 << 31):
        k = SmallPrimeKernel(p)
    else:
        return None
    _KERNELS[p] = k
    return k


def solve_affine_mod(kern, A, b):
    """Solve A x = b over F_p for a numpy kernel.

    Returns (particular, nullspace_basis) with particular an array of
    length ncols, nullspace_basis of shape (dim, ncols); or None when
    inconsistent. A is (rows, cols) uint64, b is (rows,) uint64.
    """
    p = kern.p
    rows, cols = A.shape
    M = np.concatenate([A.astype(np.uint64), b.reshape(-1, 1).astype(np.uint64)], axis=1)
    pivot_of_col = {}
    r = 0
    for c in range(cols):
        sub = M[r:, c]
        nz = np.nonzero(sub)[0]
        if nz.size == 0:
            continue
        pr = r + int(nz[0])
        if pr != r:
            M[[r, pr]] = M[[pr, r]]
        inv = pow(int(M[r, c]), p - 2, p)
        M[r] = kern.scale(M[r], inv)
        col = M[:, c].copy()
        col[r] = 0
        hit = np.nonzero(col)[0]
        if hit.size:
            M[hit] = kern.sub(M[hit], kern.mul(col[hit, None], M[r][None, :]))
        pivot_of_col[c] = r
        r += 1
        if r == rows:
            break
    # consistency: any zero row with nonzero rhs?
    if r < rows:
        tail = M[r:]
        bad = np.logical_and(np.all(tail[:, :cols] == 0, axis=1), tail[:, cols] != 0)
        if bad.any():
            return None
    # rows 0..r-1 each have a pivot column
    particular = np.zeros(cols, dtype=np.uint64)
    for c, pr in pivot_of_col.items():
        particular[c] = M[pr, cols]
    free_cols = [c for c in range(cols) if c not in pivot_of_col]
    basis = np.zeros((len(free_cols), cols), dtype=np.uint64)
    for i, fc in enumerate(free_cols):
        basis[i, fc] = 1
        for c, pr in pivot_of_col.items():
            v = int(M[pr, fc])
            if v:
                basis[i, c] = p - v if v else 0
    return particular, basis
