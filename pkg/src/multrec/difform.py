"""Y-linear differential forms Q = Qt(X) + sum_i Q_i(X) * Y_i.

A form is stored as its m+2 component polynomials (Y-free part first).
The tau operator lifts differentiation through the Y variables so that
applying tau commutes with substituting f, f', ..., f^(m) for the Y's.
"""

from __future__ import annotations

from dataclasses import dataclass

from .algebra import NEG_INF, PrimeField, deg


@dataclass
class DiffForm:
    field: PrimeField
    m: int
    comps: list  # length m+2: [Y-free, Y_0, ..., Y_m]

    def __post_init__(self):
        if len(self.comps) != self.m + 2:
            raise ValueError("component count must be m+2")

    @property
    def ytilde(self):
        return self.comps[0]

    def ycoeff(self, i):
        return self.comps[1 + i]

    def x_degree(self):
        return max((deg(c) for c in self.comps), default=NEG_INF)

    def is_zero(self):
        return all(not c for c in self.comps)

    def __eq__(self, other):
        return (
            isinstance(other, DiffForm)
            and other.field == self.field
            and other.m == self.m
            and other.comps == self.comps
        )


def form(field, m, ytilde=(), ycoeffs=()):
    comps = [field.poly(ytilde)]
    ycoeffs = list(ycoeffs)
    comps += [field.poly(c) for c in ycoeffs] + [[] for _ in range(m + 1 - len(ycoeffs))]
    return DiffForm(field, m, comps)


def form_add(a, b):
    assert a.m == b.m
    f = a.field
    return DiffForm(f, a.m, [f.poly_add(x, y) for x, y in zip(a.comps, b.comps)])


def form_sub(a, b):
    assert a.m == b.m
    f = a.field
    return DiffForm(f, a.m, [f.poly_sub(x, y) for x, y in zip(a.comps, b.comps)])


def form_scale(a, c):
    f = a.field
    return DiffForm(f, a.m, [f.poly_scale(x, c) for x in a.comps])


def form_mul_poly(a, g):
    f = a.field
    return DiffForm(f, a.m, [f.poly_mul(x, g) for x in a.comps])


def form_eval(q, alpha, beta):
    """Evaluate q at X=alpha, Y_i=beta[i]."""
    f = q.field
    acc = f.poly_eval(q.ytilde, alpha)
    for i in range(q.m + 1):
        c = q.ycoeff(i)
        if c:
            acc = (acc + f.poly_eval(c, alpha) * beta[i]) % f.p
    return acc


def tau(q):
    """Lift of d/dX to Y-linear forms; output has highest index m+1."""
    f = q.field
    comps = [f.poly_derivative(q.ytilde)]
    for j in range(q.m + 2):
        part = f.poly_derivative(q.ycoeff(j)) if j <= q.m else []
        if j >= 1:
            part = f.poly_add(part, q.ycoeff(j - 1))
        comps.append(part)
    return DiffForm(f, q.m + 1, comps)


def tau_vector(q, alpha, beta, length):
    """Evaluations of the iterated-tau forms: entry t is tau^(t)(q)(alpha, beta).

    Needs q's highest index plus length-1 to stay within the beta tuple.
    """
    if q.m + length - 1 > len(beta) - 1:
        raise ValueError("tuple too short")
    out = []
    cur = q
    for t in range(length):
        out.append(form_eval(cur, alpha, beta))
        if t + 1 < length:
            cur = tau(cur)
    return out


def apply_to_poly(q, f):
    """Q(X, f, f^(1), ..., f^(m)) as a polynomial in X."""
    fld = q.field
    out = list(q.ytilde)
    df = list(f)
    for i in range(q.m + 1):
        c = q.ycoeff(i)
        if c:
            out = fld.poly_add(out, fld.poly_mul(c, df))
        df = fld.poly_derivative(df)
        if not df and all(not q.ycoeff(j) for j in range(i + 1, q.m + 1)):
            break
    return out
