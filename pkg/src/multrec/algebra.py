"""Prime-field scalars and dense univariate polynomial arithmetic.

Polynomials are plain lists of canonical residues, lowest degree first,
with no trailing zeros; the zero polynomial is the empty list and its
degree is -inf. Everything routes through a PrimeField, which picks a
multiplication backend: schoolbook for short inputs, NTT when the modulus
supports it (the default 64-bit prime), Kronecker substitution over big
integers otherwise.
"""

from __future__ import annotations

from . import _kern

try:
    import gmpy2

    _MPZ = gmpy2.mpz
except ImportError:  # pragma: no cover
    _MPZ = int

NEG_INF = float("-inf")

DEFAULT_PRIME = _kern.P_GOLD

_SCHOOLBOOK_CUTOFF = 32


def deg(a):
    return len(a) - 1 if a else NEG_INF


def trim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def is_prime(n):
    """Deterministic Miller-Rabin for n < 3.3e24, probabilistic beyond."""
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % q == 0:
            return n == q
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class PrimeField:
    """Arithmetic mod a prime p; holds per-modulus caches and kernels."""

    def __init__(self, p=DEFAULT_PRIME, check=True):
        if check and not is_prime(p):
            raise ValueError(f"modulus {p} is not prime")
        self.p = p
        self.kernel = _kern.get_kernel(p)
        self._fact = [1]

    def __repr__(self):
        return f"PrimeField({self.p})"

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("PrimeField", self.p))

    # -- scalars -------------------------------------------------------------

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def mul(self, a, b):
        return a * b % self.p

    def neg(self, a):
        return -a % self.p

    def inv(self, a):
        if a % self.p == 0:
            raise ZeroDivisionError("division by zero in field")
        return pow(a, self.p - 2, self.p)

    def factorial(self, n):
        if n >= self.p:
            raise ValueError("factorial not invertible")
        f = self._fact
        while len(f) <= n:
            f.append(f[-1] * len(f) % self.p)
        return f[n]

    def falling(self, n, k):
        """Falling factorial n*(n-1)*...*(n-k+1) mod p."""
        out = 1
        for i in range(k):
            out = out * (n - i) % self.p
        return out

    # -- polynomial basics -----------------------------------------------------

    def poly(self, coeffs):
        return trim([c % self.p for c in coeffs])

    def poly_add(self, a, b):
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = (out[i] + c) % self.p
        return trim(out)

    def poly_sub(self, a, b):
        out = list(a) + [0] * (len(b) - len(a))
        for i, c in enumerate(b):
            out[i] = (out[i] - c) % self.p
        return trim(out)

    def poly_neg(self, a):
        return [-c % self.p for c in a]

    def poly_scale(self, a, c):
        c %= self.p
        if c == 0:
            return []
        return [x * c % self.p for x in a]

    def poly_shift(self, a, k):
        """Multiply by X^k."""
        if not a:
            return []
        return [0] * k + list(a)

    # -- multiplication ---------------------------------------------------------

    def poly_mul(self, a, b):
        if not a or not b:
            return []
        la, lb = len(a), len(b)
        if min(la, lb) <= _SCHOOLBOOK_CUTOFF:
            return self._mul_schoolbook(a, b)
        if self.kernel is not None and self.kernel.ntt_available:
            k = self.kernel
            out = k.polymul(k.array(a), k.array(b))
            return trim(k.tolist(out))
        return self._mul_kronecker(a, b)

    def _mul_schoolbook(self, a, b):
        if len(a) > len(b):
            a, b = b, a
        p = self.p
        out = [0] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    out[i + j] += ai * bj
        return trim([c % p for c in out])

    def _mul_kronecker(self, a, b):
        p = self.p
        slot_bits = 2 * p.bit_length() + min(len(a), len(b)).bit_length() + 1
        nbytes = (slot_bits + 7) // 8
        xa = int.from_bytes(b"".join(c.to_bytes(nbytes, "little") for c in a), "little")
        xb = int.from_bytes(b"".join(c.to_bytes(nbytes, "little") for c in b), "little")
        prod = int(_MPZ(xa) * _MPZ(xb))
        nout = len(a) + len(b) - 1
        raw = prod.to_bytes(nout * nbytes + nbytes, "little")
        out = [
            int.from_bytes(raw[i * nbytes : (i + 1) * nbytes], "little") % p
            for i in range(nout)
        ]
        return trim(out)

    # -- division ----------------------------------------------------------------

    def poly_divrem(self, a, b):
        if not b:
            raise ZeroDivisionError("division by zero polynomial")
        if len(a) < len(b):
            return [], list(a)
        if len(b) == 1:
            c = self.inv(b[0])
            return self.poly_scale(a, c), []
        if len(a) - len(b) > 64 and len(b) > 64:
            return self._divrem_newton(a, b)
        p = self.p
        rem = list(a)
        q = [0] * (len(a) - len(b) + 1)
        ilead = self.inv(b[-1])
        for i in range(len(a) - len(b), -1, -1):
            c = rem[i + len(b) - 1] * ilead % p
            if c:
                q[i] = c
                for j, bj in enumerate(b):
                    rem[i + j] = (rem[i + j] - c * bj) % p
        del rem[len(b) - 1 :]
        return q, trim(rem)

    def poly_mod(self, a, b):
        return self.poly_divrem(a, b)[1]

    def poly_divexact(self, a, b):
        q, r = self.poly_divrem(a, b)
        if r:
            raise ValueError("division not exact")
        return q

    def reciprocal(self, b, prec):
        """Inverse of b mod X^prec (requires b[0] != 0), by Newton iteration."""
        g = [self.inv(b[0])]
        cur = 1
        while cur < prec:
            cur = min(2 * cur, prec)
            fg = self.poly_mul(b[:cur], g)[:cur]
            t = self.poly_neg(fg)
            if t:
                t[0] = (t[0] + 2) % self.p
            else:
                t = [2 % self.p]
            g = self.poly_mul(g, t)[:cur]
        return trim(g)

    def _divrem_newton(self, a, b):
        n = len(a) - len(b) + 1
        ar = a[::-1]
        br = b[::-1]
        qr = self.poly_mul(ar[:n], self.reciprocal(br, n))[:n]
        qr += [0] * (n - len(qr))
        q = trim(qr[::-1])
        prod = self.poly_mul(q, b)
        rem = self.poly_sub(a, prod)
        return q, rem

    def poly_mod_with_recip(self, a, b, recip_rev):
        """a mod b using a precomputed reciprocal of reversed b (length >= deg a - deg b + 1)."""
        if len(a) < len(b):
            return list(a)
        n = len(a) - len(b) + 1
        ar = a[::-1]
        qr = self.poly_mul(ar[:n], recip_rev[:n])[:n]
        qr += [0] * (n - len(qr))
        q = trim(qr[::-1])
        return self.poly_sub(a, self.poly_mul(q, b))

    # -- derivatives and evaluation ------------------------------------------------

    def poly_derivative(self, a, order=1):
        p = self.p
        out = list(a)
        for _ in range(order):
            out = [(i + 1) * c % p for i, c in enumerate(out[1:])]
            if not out:
                break
        return trim(out)

    def poly_eval(self, a, x):
        p = self.p
        acc = 0
        for c in reversed(a):
            acc = (acc * x + c) % p
        return acc

    def poly_eval_derivs(self, a, alpha, count):
        """(a(alpha), a'(alpha), ..., a^{(count-1)}(alpha))."""
        if count < 1:
            return []
        taylor = self.taylor_coeffs_at(a, alpha, count)
        return [taylor[j] * self.factorial(j) % self.p for j in range(count)]

    def taylor_coeffs_at(self, a, alpha, count):
        """First `count` coefficients of a(X + alpha), by synthetic division."""
        p = self.p
        cur = list(a)
        out = []
        for _ in range(count):
            if not cur:
                out.append(0)
                continue
            # synthetic division by (X - alpha); remainder is cur(alpha)
            quot = [0] * (len(cur) - 1)
            acc = cur[-1]
            for i in range(len(cur) - 2, -1, -1):
                quot[i] = acc
                acc = (acc * alpha + cur[i]) % p
            out.append(acc)
            cur = trim(quot)
        return out

    def taylor_at(self, alpha, values):
        """Unique poly of degree < len(values) with j-th derivative values[j] at alpha."""
        d = len(values)
        if d >= self.p:
            raise ValueError("factorial not invertible")
        p = self.p
        coeffs = [values[j] * self.inv(self.factorial(j)) % p for j in range(d)]
        out = []
        neg_alpha = -alpha % p
        for c in reversed(coeffs):
            # out = out*(X - alpha) + c
            out = self.poly_add(self.poly_shift(out, 1), self.poly_scale(out, neg_alpha))
            out = self.poly_add(out, [c])
        return out

    # -- gcd, inverses, CRT -----------------------------------------------------------

    def poly_xgcd(self, a, b):
        """(g, s, t) with s*a + t*b = g, g monic (or empty when both zero)."""
        r0, r1 = list(a), list(b)
        s0, s1 = [1], []
        t0, t1 = [], [1]
        while r1:
            q, r = self.poly_divrem(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, self.poly_sub(s0, self.poly_mul(q, s1))
            t0, t1 = t1, self.poly_sub(t0, self.poly_mul(q, t1))
        if r0:
            c = self.inv(r0[-1])
            r0 = self.poly_scale(r0, c)
            s0 = self.poly_scale(s0, c)
            t0 = self.poly_scale(t0, c)
        return r0, s0, t0

    def poly_gcd(self, a, b):
        return self.poly_xgcd(a, b)[0]

    def poly_invmod(self, a, m):
        if not m:
            raise ZeroDivisionError("division by zero polynomial")
        g, s, _ = self.poly_xgcd(self.poly_mod(a, m), m)
        if g != [1]:
            raise ValueError("not invertible modulo m")
        return self.poly_mod(s, m)

    def crt_pair(self, v1, m1, v2, m2, inv1=None):
        """Unique f mod m1*m2 with f = v1 mod m1, f = v2 mod m2.

        inv1, when given, must equal (m1)^{-1} mod m2.
        """
        if len(m2) == 1:
            return self.poly_mod(v1, m1)
        if len(m1) == 1:
            return self.poly_mod(v2, m2)
        v1 = self.poly_mod(v1, m1)
        v2 = self.poly_mod(v2, m2)
        if inv1 is None:
            g, s, _ = self.poly_xgcd(m1, m2)
            if g != [1]:
                raise ValueError("moduli not coprime")
            inv1 = self.poly_mod(s, m2)
        delta = self.poly_mod(self.poly_mul(self.poly_sub(v2, v1), inv1), m2)
        return self.poly_add(v1, self.poly_mul(m1, delta))

    # -- misc helpers -------------------------------------------------------------------

    def product_tree(self, leaves):
        """Levels of a balanced product tree; levels[0] = leaves, top = [product]."""
        levels = [list(leaves)]
        while len(levels[-1]) > 1:
            prev = levels[-1]
            nxt = [
                self.poly_mul(prev[i], prev[i + 1]) if i + 1 < len(prev) else prev[i]
                for i in range(0, len(prev), 2)
            ]
            levels.append(nxt)
        return levels

    def remainder_tree(self, f, levels):
        """f mod each leaf modulus, descending a product tree."""
        cur = [self.poly_mod(f, levels[-1][0])]
        for lvl in range(len(levels) - 2, -1, -1):
            nodes = levels[lvl]
            nxt = []
            for i, m in enumerate(nodes):
                parent = cur[i // 2]
                if i % 2 == 0 and i + 1 >= len(nodes):
                    nxt.append(parent)
                else:
                    nxt.append(self.poly_mod(parent, m))
            cur = nxt
        return cur


class ModTree:
    """Product tree over a list of coprime moduli with cached reciprocals.

    Supports repeated remainder-tree pushes (each an O(M(d) log) pass) and
    exposes the per-node subproducts for CRT climbs.
    """

    def __init__(self, field, leaves):
        self.field = field
        self.levels = field.product_tree(leaves)
        self._recips = {}

    @property
    def product(self):
        return self.levels[-1][0]

    def node(self, lvl, i):
        return self.levels[lvl][i]

    def _mod(self, a, lvl, i):
        f = self.field
        m = self.levels[lvl][i]
        if len(a) < len(m):
            return list(a)
        if len(m) <= 64 or len(a) - len(m) <= 32:
            return f.poly_mod(a, m)
        need = len(a) - len(m) + 1
        key = (lvl, i)
        entry = self._recips.get(key)
        if entry is None or entry[0] < need:
            prec = max(need, 2 * len(m))
            entry = (prec, f.reciprocal(m[::-1], prec))
            self._recips[key] = entry
        return f.poly_mod_with_recip(a, m, entry[1])

    def push(self, a):
        """a mod each leaf modulus."""
        cur = [self._mod(a, len(self.levels) - 1, 0)]
        for lvl in range(len(self.levels) - 2, -1, -1):
            nodes = self.levels[lvl]
            nxt = []
            for i in range(len(nodes)):
                parent = cur[i // 2]
                if i % 2 == 0 and i + 1 >= len(nodes):
                    nxt.append(parent)
                else:
                    nxt.append(self._mod(parent, lvl, i))
            cur = nxt
        return cur
