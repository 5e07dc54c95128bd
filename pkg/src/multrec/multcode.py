"""Multiplicity-code parameters, encoder, received words, channel simulator.

A codeword coordinate at alpha is the tuple of the first s derivative
values of the message polynomial. A received word carries, per coordinate,
a list of up to ell candidate tuples; agreement means the full tuple
appears in the list.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field as dc_field

from .algebra import ModTree, PrimeField, deg, is_prime


@dataclass
class CodeParams:
    p: int
    n: int
    s: int
    k: int
    points: list = dc_field(default=None)

    def __post_init__(self):
        if self.points is None:
            self.points = list(range(self.n))

    def field(self):
        return PrimeField(self.p, check=False)


@dataclass
class Codeword:
    p: int
    n: int
    s: int
    values: list  # n tuples of length s


@dataclass
class ReceivedWord:
    p: int
    n: int
    s: int
    k: int
    ell: int
    entries: list  # list of (alpha, [tuple, ...]) in coordinate order

    def points(self):
        return [a for a, _ in self.entries]

    def padded_options(self):
        """Per coordinate, the option list padded to exactly ell entries."""
        out = []
        for _, opts in self.entries:
            padded = list(opts) + [opts[0]] * (self.ell - len(opts))
            out.append(padded)
        return out

    def option_sets(self):
        return [set(opts) for _, opts in self.entries]

    def to_json_dict(self):
        return {
            "p": self.p,
            "n": self.n,
            "s": self.s,
            "k": self.k,
            "ell": self.ell,
            "points": [
                {"alpha": a, "options": [list(t) for t in opts]}
                for a, opts in self.entries
            ],
        }

    @classmethod
    def from_json_dict(cls, d):
        entries = []
        for pt in d["points"]:
            opts = [tuple(int(x) for x in t) for t in pt["options"]]
            if not opts:
                raise ValueError("empty option list")
            if any(len(t) != d["s"] for t in opts):
                raise ValueError("option tuple length differs from s")
            if len(opts) > d["ell"]:
                raise ValueError("option list longer than ell")
            entries.append((int(pt["alpha"]), opts))
        w = cls(int(d["p"]), int(d["n"]), int(d["s"]), int(d["k"]), int(d["ell"]), entries)
        if len(entries) != w.n:
            raise ValueError("point count differs from n")
        return w


def validate_params(params):
    """Check the code-level constraints; raises naming every violation."""
    problems = []
    if not is_prime(params.p):
        problems.append("p must be prime")
    if params.n < 1 or params.s < 1 or params.k < 1:
        problems.append("n, s, k must be positive")
    if params.p <= max(params.k, params.s, params.n):
        problems.append(f"p must exceed max(k, s, n) = {max(params.k, params.s, params.n)}")
    if len(params.points) != params.n:
        problems.append("points count differs from n")
    if len(set(params.points)) != len(params.points):
        problems.append("evaluation points not distinct")
    if any(not (0 <= a < params.p) for a in params.points):
        problems.append("evaluation points outside field")
    if params.k >= params.n * params.s:
        problems.append("rate must be < 1 (k < n*s)")
    if problems:
        raise ValueError("; ".join(problems))
    return True


_TREE_CACHE = {}


def _power_linear(field, alpha, e):
    """(X - alpha)^e via the binomial expansion."""
    p = field.p
    na = field.neg(alpha)
    out = [0] * (e + 1)
    c = 1
    pw = 1
    for j in range(e, -1, -1):
        # coefficient of X^j is C(e, j) * (-alpha)^(e-j)
        out[j] = c * pw % p
        c = c * j % p * field.inv(e - j + 1) % p if j else c
        pw = pw * na % p
    return out


def _mod_tree(field, points, s):
    key = (field.p, tuple(points), s)
    tree = _TREE_CACHE.get(key)
    if tree is None:
        leaves = [_power_linear(field, a, s) for a in points]
        tree = ModTree(field, leaves)
        if len(_TREE_CACHE) > 16:
            _TREE_CACHE.clear()
        _TREE_CACHE[key] = tree
    return tree


def derivative_table(field, polys, points, s):
    """Derivative tuples of each poly at each point: out[i][j] is an s-tuple.

    Uses a shared remainder tree plus one convolution per (poly, point) when
    a vectorized kernel is available and the sizes justify it.
    """
    n = len(points)
    work = sum(len(f) for f in polys) * n
    if field.kernel is None or not field.kernel.ntt_available or work < 250_000 or s < 2:
        return [
            [tuple(field.poly_eval_derivs(f, a, s)) for a in points] for f in polys
        ]
    tree = _mod_tree(field, points, s)
    kern = field.kernel
    p = field.p
    fact = [field.factorial(j) for j in range(s)]
    inv_fact = [field.inv(x) for x in fact]
    # stack residues: rows indexed by (poly, point)
    rows = []
    for f in polys:
        for r in tree.push(f):
            rows.append(r + [0] * (s - len(r)))
    A = kern.array([[r[i] * fact[i] % p for i in range(s)][::-1] for r in rows])
    B = kern.array(
        [
            [pow(a, t, p) * inv_fact[t] % p for t in range(s)]
            for a in points
        ]
        * len(polys)
    )
    conv = kern.polymul(A, B)
    out = []
    idx = 0
    for _ in polys:
        per_point = []
        for _j in range(n):
            row = conv[idx]
            per_point.append(tuple(int(row[s - 1 - t]) for t in range(s)))
            idx += 1
        out.append(per_point)
    return out


def encode(params, f):
    """Codeword of message f: per point, its first s derivative values."""
    if deg(f) >= params.k:
        raise ValueError("message degree too large")
    fld = params.field()
    table = derivative_table(fld, [list(f)], params.points, params.s)
    return Codeword(params.p, params.n, params.s, table[0])


def agreement_count(params, f, word):
    cw = encode(params, f)
    count = 0
    for value, (_, opts) in zip(cw.values, word.entries):
        if value in opts:
            count += 1
    return count


def simulate_channel(params, f, agreements, ell, seed):
    """Received word with the encoding of f planted at exactly `agreements`
    coordinates; every other tuple is a uniform decoy distinct from the
    encoding at its coordinate. Deterministic in the seed."""
    if not 0 <= agreements <= params.n:
        raise ValueError("agreement count out of range")
    if deg(f) >= params.k:
        raise ValueError("message degree too large")
    rng = random.Random(seed)
    cw = encode(params, f)
    planted = set(rng.sample(range(params.n), agreements))
    entries = []
    for i, alpha in enumerate(params.points):
        truth = tuple(cw.values[i])
        opts = [truth] if i in planted else []
        while len(opts) < ell:
            decoy = tuple(rng.randrange(params.p) for _ in range(params.s))
            if decoy != truth:
                opts.append(decoy)
        rng.shuffle(opts)
        entries.append((alpha, opts))
    return ReceivedWord(params.p, params.n, params.s, params.k, ell, entries)
