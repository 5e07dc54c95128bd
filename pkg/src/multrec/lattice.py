"""Module bases capturing the per-coordinate derivative-vanishing conditions,
their CRT merging across coordinates, and shortest-vector extraction.

A basis holds m+2 lower-triangular rows: a Y-free row equal to the product
of (X - alpha)^(s-m) over the covered points, then one row per Y index with
a prescribed diagonal (the same product for the first ell-1 indices, the
(ell-1)-th power product for the rest). Every row evaluates to zero under
all s-m iterated-tau conditions at every covered (point, candidate tuple)
pair, so any F[X]-combination of rows annihilates close-enough codewords.
"""

from __future__ import annotations

from dataclasses import dataclass

from .algebra import NEG_INF, PrimeField, deg, trim
from .difform import DiffForm, apply_to_poly, form_mul_poly, form_sub, tau, tau_vector
from .multcode import _power_linear


@dataclass
class GoodBasis:
    field: PrimeField
    s: int
    m: int
    ell: int
    points: tuple
    rows: list  # m+2 DiffForms: [Y-free row, B_0, ..., B_m]
    prod_big: list  # prod (X-a)^(s-m)
    prod_small: list  # prod (X-a)^(ell-1)

    def diag(self, i):
        return self.prod_big if i <= self.ell - 2 else self.prod_small

    def det_degree(self):
        d = deg(self.rows[0].ytilde)
        for i in range(self.m + 1):
            d += deg(self.rows[1 + i].ycoeff(i))
        return d


def _check_shape_params(s, m, ell):
    if not 0 <= m <= s - 1:
        raise ValueError("parameter error: need 0 <= m <= s-1")
    if m < ell - 1:
        raise ValueError("parameter error: need m >= ell-1")
    if ell < 1:
        raise ValueError("parameter error: need ell >= 1")


def _tau_vec_lift(field, row, alpha, beta, length):
    """tau_vector via the substitution identity: lift beta to a polynomial u
    with matching derivatives at alpha, substitute, and read off the first
    `length` derivative values of the result."""
    u = field.taylor_at(alpha, list(beta))
    applied = apply_to_poly(row, u)
    return field.poly_eval_derivs(applied, alpha, length)


def single_point_basis(field, alpha, tuples, s, m, ell):
    """Basis of the condition module at one point, by induction on the list.

    The list is padded to exactly ell tuples (duplicates impose nothing new).
    """
    _check_shape_params(s, m, ell)
    if s - m >= field.p:
        raise ValueError("parameter error: need s-m < p")
    if not tuples or len(tuples) > ell:
        raise ValueError("parameter error: need 1 <= |tuples| <= ell")
    if any(len(t) != s for t in tuples):
        raise ValueError("tuple length differs from s")
    tuples = list(tuples) + [tuples[0]] * (ell - len(tuples))
    w = s - m
    p_alpha = _power_linear(field, alpha, w)
    lin = [field.neg(alpha), 1]

    # base level: one tuple, rows Y_i + C_i with prescribed opposite jets
    beta0 = tuples[0]
    structured = {}
    for i in range(m + 1):
        c = field.taylor_at(alpha, [field.neg(beta0[i + j]) for j in range(w)])
        comps = [c] + [[] for _ in range(m + 1)]
        comps[1 + i] = [1]
        structured[i] = DiffForm(field, m, comps)

    for lev in range(2, ell + 1):
        beta = tuples[lev - 1]
        nxt = {}
        for i in range(lev - 1, m + 1):
            prev = structured[i - 1]
            # B'' = tau((X - alpha) * B'), re-indexed into the same ambient m
            shifted = form_mul_poly(prev, lin)
            b2_raw = tau(shifted)
            assert not b2_raw.comps[-1], "tau escaped the ambient Y range"
            b2 = DiffForm(field, m, b2_raw.comps[:-1])
            tv_prev = _tau_vec_lift(field, prev, alpha, beta, w)
            tv_b2 = [(j + 1) * tv_prev[j] % field.p for j in range(w)]
            if any(tv_b2):
                r_star = next(j for j in range(w) if tv_b2[j])
                assert tv_prev[r_star], "leading tau value vanished unexpectedly"
                # scalars c_t from the exponential-series division
                # tv_b2[r*+u] = sum_t c_t * falling(r*+u, t) * tv_prev[r*+u-t]
                ifact = [field.inv(field.factorial(j)) for j in range(w)]
                num = [tv_b2[r_star + u] * ifact[r_star + u] % field.p for u in range(w - r_star)]
                den = [tv_prev[r_star + u] * ifact[r_star + u] % field.p for u in range(w - r_star)]
                inv_den = field.reciprocal(den, w - r_star)
                cs = field.poly_mul(num, inv_den)[: w - r_star]
                cs += [0] * (w - r_star - len(cs))
                # g = sum_t c_t (X - alpha)^t
                g = []
                for c in reversed(cs):
                    g = field.poly_add(field.poly_mul(g, lin), [c])
                b_new = form_sub(b2, form_mul_poly(prev, g))
            else:
                b_new = b2
            nxt[i] = b_new
        structured = nxt

    rows = [DiffForm(field, m, [p_alpha] + [[] for _ in range(m + 1)])]
    for i in range(m + 1):
        if i <= ell - 2:
            comps = [[] for _ in range(m + 2)]
            comps[1 + i] = list(p_alpha)
            rows.append(DiffForm(field, m, comps))
        else:
            rows.append(structured[i])
    small = _power_linear(field, alpha, ell - 1)
    return GoodBasis(field, s, m, ell, (alpha,), rows, p_alpha, small)


def combine_bases(U, V, inv1=None, modU=None, modV=None):
    """Merged basis over the union of two disjoint point sets.

    Diagonals multiply; every off-diagonal entry is the CRT blend of
    (U entry * V diagonal mod P_U) and (V entry * U diagonal mod P_V).
    inv1/modU/modV are optional precomputed accelerators.
    """
    if U.points and V.points and set(U.points) & set(V.points):
        raise ValueError("point sets overlap")
    if (U.s, U.m, U.ell) != (V.s, V.m, V.ell) or U.field != V.field:
        raise ValueError("parameter mismatch between bases")
    if not U.points:
        return V
    if not V.points:
        return U
    f = U.field
    pu, pv = U.prod_big, V.prod_big
    if modU is None:
        modU = lambda a: f.poly_mod(a, pu)
    if modV is None:
        modV = lambda a: f.poly_mod(a, pv)
    if inv1 is None:
        g, s_coef, _ = f.poly_xgcd(pu, pv)
        if g != [1]:
            raise ValueError("moduli not coprime")
        inv1 = f.poly_mod(s_coef, pv)

    def blend(ue, ve, dU, dV):
        v1 = modU(f.poly_mul(ue, dV)) if ue else []
        v2 = modV(f.poly_mul(ve, dU)) if ve else []
        if not v1 and not v2:
            return []
        delta = modV(f.poly_mul(f.poly_sub(v2, v1), inv1))
        return f.poly_add(v1, f.poly_mul(pu, delta))

    prod_big = f.poly_mul(pu, pv)
    prod_small = f.poly_mul(U.prod_small, V.prod_small)
    rows = [DiffForm(f, U.m, [prod_big] + [[] for _ in range(U.m + 1)])]
    for i in range(U.m + 1):
        dU = U.diag(i)
        dV = V.diag(i)
        urow, vrow = U.rows[1 + i], V.rows[1 + i]
        comps = [blend(urow.ytilde, vrow.ytilde, dU, dV)]
        for r in range(U.m + 1):
            if r < i:
                comps.append(blend(urow.ycoeff(r), vrow.ycoeff(r), dU, dV))
            elif r == i:
                comps.append(prod_big if i <= U.ell - 2 else prod_small)
            else:
                comps.append([])
        rows.append(DiffForm(f, U.m, comps))
    return GoodBasis(
        f, U.s, U.m, U.ell, tuple(U.points) + tuple(V.points), rows, prod_big, prod_small
    )


# -- balanced merge tree with cached inverses -----------------------------------


class _Node:
    __slots__ = ("basis", "left", "right", "inv_l", "inv_r", "_recip")

    def __init__(self, basis, left=None, right=None):
        self.basis = basis
        self.left = left
        self.right = right
        self.inv_l = None  # inv(left.prod) mod right.prod
        self.inv_r = None
        self._recip = None

    @property
    def prod(self):
        return self.basis.prod_big

    def mod(self, a):
        f = self.basis.field
        m = self.prod
        if len(a) < len(m):
            return list(a)
        if len(m) <= 64 or len(a) - len(m) <= 32:
            return f.poly_mod(a, m)
        need = len(a) - len(m) + 1
        if self._recip is None or self._recip[0] < need:
            prec = max(need, 2 * len(m))
            self._recip = (prec, f.reciprocal(m[::-1], prec))
        return f.poly_mod_with_recip(a, m, self._recip[1])


def _inv_mod_linear_power(field, r, alpha, e):
    """Inverse of r modulo (X - alpha)^e."""
    t = field.taylor_coeffs_at(r, alpha, e)
    if t[0] == 0:
        raise ValueError("moduli not coprime")
    tinv = field.reciprocal(trim(t), e)
    tinv += [0] * (e - len(tinv))
    # map back from the shifted variable: sum tinv_j (X - alpha)^j
    lin = [field.neg(alpha), 1]
    g = []
    for c in reversed(tinv):
        g = field.poly_add(field.poly_mul(g, lin), [c])
    return g


def _push_leaf_residues(node, a, out):
    a = node.mod(a)
    if node.left is None:
        out.append(a)
    else:
        _push_leaf_residues(node.left, a, out)
        _push_leaf_residues(node.right, a, out)


def _climb(node, vals, pos):
    if node.left is None:
        v = vals[pos[0]]
        pos[0] += 1
        return v
    lv = _climb(node.left, vals, pos)
    rv = _climb(node.right, vals, pos)
    f = node.basis.field
    return f.crt_pair(lv, node.left.prod, rv, node.right.prod, inv1=node.inv_l)


def _inverse_across(src, dst):
    """inv(src.prod) mod dst.prod, via dst's subtree."""
    f = dst.basis.field
    residues = []
    _push_leaf_residues(dst, src.prod, residues)
    w = dst.basis.s - dst.basis.m
    invs = [
        _inv_mod_linear_power(f, r, alpha, w)
        for r, alpha in zip(residues, dst.basis.points)
    ]
    return _climb(dst, invs, [0])


def _pad_stack(kern, lists, width):
    import numpy as np

    arr = np.zeros((len(lists), width), dtype=np.uint64)
    for i, e in enumerate(lists):
        if e:
            arr[i, : len(e)] = kern.array(e)
    return arr


def _batch_mulmod(field, entries, lam, pw, rec_w):
    """(entry * lam) mod pw for every entry, in stacked NTT calls.

    rec_w must be the reciprocal of reversed pw to precision at least
    max_entry_deg + deg lam - deg pw + 1.
    """
    kern = field.kernel
    width = max((len(e) for e in entries), default=0)
    if width == 0 or not lam:
        return [[] for _ in entries]
    A = _pad_stack(kern, entries, width)
    L = _pad_stack(kern, [lam], len(lam))
    prod = kern.polymul(A, L)
    wdeg = len(pw) - 1
    total = prod.shape[1]
    n = total - wdeg
    if n > 0:
        assert n <= len(rec_w), "reciprocal precision too small"
        ar = prod[:, ::-1][:, :n]
        R = _pad_stack(kern, [rec_w[:n]], n)
        qr = kern.polymul(ar, R)[:, :n]
        q = qr[:, ::-1]
        P = _pad_stack(kern, [pw], len(pw))
        qp = kern.polymul(q, P)
        prod = kern.sub(prod[:, :wdeg], qp[:, :wdeg])
    out = []
    for row in prod:
        out.append(trim([int(x) for x in row]))
    return out


def _combine_batched(a, b, inv_l):
    """Same construction as combine_bases, with entry blends stacked."""
    U, V = a.basis, b.basis
    f = U.field
    m, ell = U.m, U.ell
    pu, pv = U.prod_big, V.prod_big
    prod_big = f.poly_mul(pu, pv)
    prod_small = f.poly_mul(U.prod_small, V.prod_small)
    wdeg = len(prod_big) - 1
    rec_w = f.reciprocal(prod_big[::-1], wdeg + 2)
    rec_w = rec_w + [0] * (wdeg + 2 - len(rec_w))
    # CRT idempotent: e_v = inv(P_U mod P_V) * P_U is 0 mod P_U, 1 mod P_V
    e_v = f.poly_mul(inv_l, pu)
    one_minus = f.poly_sub([1], e_v)
    lam_u = _batch_mulmod(f, [one_minus], V.prod_small, prod_big, rec_w)[0]
    lam_v = _batch_mulmod(f, [e_v], U.prod_small, prod_big, rec_w)[0]
    slots = []
    u_entries, v_entries = [], []
    for i in range(ell - 1, m + 1):
        urow, vrow = U.rows[1 + i], V.rows[1 + i]
        for pos in [0] + [1 + r for r in range(i)]:
            ue, ve = urow.comps[pos], vrow.comps[pos]
            if ue or ve:
                slots.append((i, pos))
                u_entries.append(ue)
                v_entries.append(ve)
    part_u = _batch_mulmod(f, u_entries, lam_u, prod_big, rec_w)
    part_v = _batch_mulmod(f, v_entries, lam_v, prod_big, rec_w)
    blended = {
        slot: f.poly_add(x, y) for slot, x, y in zip(slots, part_u, part_v)
    }
    rows = [DiffForm(f, m, [prod_big] + [[] for _ in range(m + 1)])]
    for i in range(m + 1):
        comps = [blended.get((i, 0), [])]
        for r in range(m + 1):
            if r < i:
                comps.append(blended.get((i, 1 + r), []))
            elif r == i:
                comps.append(prod_big if i <= ell - 2 else prod_small)
            else:
                comps.append([])
        rows.append(DiffForm(f, m, comps))
    return GoodBasis(
        f, U.s, m, ell, tuple(U.points) + tuple(V.points), rows, prod_big, prod_small
    )


def _merge_nodes(a, b):
    f = a.basis.field
    node = _Node(None, a, b)
    if len(a.prod) + len(b.prod) > 128:
        inv_l = _inverse_across(a, b)
    else:
        inv_l = f.poly_invmod(a.prod, b.prod)
    node.inv_l = inv_l
    if f.kernel is not None and f.kernel.ntt_available and len(a.prod) + len(b.prod) > 96:
        node.basis = _combine_batched(a, b, inv_l)
    else:
        node.basis = combine_bases(a.basis, b.basis, inv1=inv_l, modU=a.mod, modV=b.mod)
    return node


def build_basis(word, s, m, ell):
    """Basis for the whole received word by balanced recursive merging."""
    _check_shape_params(s, m, ell)
    field = PrimeField(word.p, check=False)
    padded = word.padded_options()
    nodes = [
        _Node(single_point_basis(field, alpha, opts, s, m, ell))
        for (alpha, _), opts in zip(word.entries, padded)
    ]
    if not nodes:
        raise ValueError("received word has no coordinates")
    while len(nodes) > 1:
        nxt = []
        for i in range(0, len(nodes) - 1, 2):
            nxt.append(_merge_nodes(nodes[i], nodes[i + 1]))
        if len(nodes) % 2:
            nxt.append(nodes[-1])
        nodes = nxt
    return nodes[0].basis


def check_tau_conditions(basis, word):
    """Independent verifier: every row, point, and candidate tuple must give
    an all-zero iterated-tau vector. Returns a list of violation descriptions."""
    w = basis.s - basis.m
    bad = []
    for alpha, opts in word.entries:
        if alpha not in basis.points:
            continue
        for beta in opts:
            for ridx, row in enumerate(basis.rows):
                vec = tau_vector(row, alpha, list(beta), w)
                if any(vec):
                    bad.append((alpha, beta, ridx))
    return bad


def lattice_membership(basis, r_form):
    """Whether r_form is an F[X]-combination of the rows (back-substitution)."""
    f = basis.field
    if r_form.m != basis.m:
        raise ValueError("Y index range differs from basis")
    residual = [list(c) for c in r_form.comps]
    for i in range(basis.m, -1, -1):
        entry = trim(residual[1 + i])
        if not entry:
            continue
        diag = basis.rows[1 + i].ycoeff(i)
        q, rem = f.poly_divrem(entry, diag)
        if rem:
            return False
        row = basis.rows[1 + i]
        for pos in range(basis.m + 2):
            if row.comps[pos]:
                residual[pos] = f.poly_sub(residual[pos], f.poly_mul(q, row.comps[pos]))
    tail = trim(residual[0])
    if not tail:
        return all(not trim(c) for c in residual[1:])
    _, rem = f.poly_divrem(tail, basis.rows[0].ytilde)
    return not rem and all(not trim(c) for c in residual[1:])


# -- shortest vector (weak Popov reduction) ------------------------------------


def _row_profile(field, row):
    degs = [deg(e) for e in row]
    d = max(degs)
    if d == NEG_INF:
        return NEG_INF, -1
    piv = max(i for i, x in enumerate(degs) if x == d)
    return d, piv


def _weak_popov_lists(field, rows):
    rows = [[list(e) for e in r] for r in rows]
    prof = [_row_profile(field, r) for r in rows]
    while True:
        by_piv = {}
        clash = None
        for idx, (d, piv) in enumerate(prof):
            if d == NEG_INF:
                raise ValueError("rows not linearly independent")
            if piv in by_piv:
                clash = (by_piv[piv], idx)
                break
            by_piv[piv] = idx
        if clash is None:
            break
        i, j = clash
        if prof[i][0] < prof[j][0]:
            i, j = j, i
        piv = prof[i][1]
        q, _ = field.poly_divrem(rows[i][piv], rows[j][piv])
        for c in range(len(rows[i])):
            if rows[j][c]:
                rows[i][c] = field.poly_sub(rows[i][c], field.poly_mul(q, rows[j][c]))
        prof[i] = _row_profile(field, rows[i])
    return rows


def _weak_popov_kern(field, rows):
    """Same reduction on numpy-backed rows; monomial cancellation steps."""
    import numpy as np

    kern = field.kernel
    n_cols = len(rows[0])
    arrs = []
    degs = []
    for r in rows:
        arrs.append([kern.array(e) if e else kern.array([]) for e in r])
        degs.append([len(e) - 1 for e in r])
    p = field.p

    def profile(i):
        d = max(degs[i])
        piv = max(c for c in range(n_cols) if degs[i][c] == d) if d >= 0 else -1
        return d, piv

    prof = [profile(i) for i in range(len(rows))]
    while True:
        by_piv = {}
        clash = None
        for idx, (d, piv) in enumerate(prof):
            if d < 0:
                raise ValueError("rows not linearly independent")
            if piv in by_piv:
                clash = (by_piv[piv], idx)
                break
            by_piv[piv] = idx
        if clash is None:
            break
        i, j = clash
        if prof[i][0] < prof[j][0]:
            i, j = j, i
        piv = prof[i][1]
        delta = prof[i][0] - prof[j][0]
        lead_i = int(arrs[i][piv][degs[i][piv]])
        lead_j = int(arrs[j][piv][degs[j][piv]])
        c = lead_i * pow(lead_j, p - 2, p) % p
        for col in range(n_cols):
            src = arrs[j][col]
            dj = degs[j][col]
            if dj < 0:
                continue
            need = delta + dj + 1
            dst = arrs[i][col]
            if len(dst) < need:
                grown = np.zeros(need, dtype=np.uint64)
                grown[: len(dst)] = dst
                dst = grown
                arrs[i][col] = dst
            seg = dst[delta : delta + dj + 1]
            dst[delta : delta + dj + 1] = kern.sub(seg, kern.scale(src[: dj + 1], c))
            top = max(degs[i][col], delta + dj)
            while top >= 0 and not dst[top]:
                top -= 1
            degs[i][col] = top
        prof[i] = profile(i)
    out = []
    for i, r in enumerate(arrs):
        out.append([kern.tolist(e[: degs[i][c] + 1]) for c, e in enumerate(r)])
    return out


def weak_popov(field, rows):
    """Reduce a list of rows (lists of polys) to weak Popov form."""
    total = sum(len(e) for r in rows for e in r)
    if field.kernel is not None and total > 20000:
        return _weak_popov_kern(field, rows)
    return _weak_popov_lists(field, rows)


def shortest_vector(field, rows):
    """Nonzero lattice vector of minimum max-degree from an independent basis."""
    if not rows or all(not e for r in rows for e in r):
        raise ValueError("empty lattice")
    reduced = weak_popov(field, rows)
    best = min(reduced, key=lambda r: max(deg(e) for e in r))
    return best


def minkowski_bound(n, s, m, ell):
    """Guaranteed max-degree of the extracted vector: det degree over m+2."""
    det = n * ell * (s - m) + (m + 2 - ell) * n * (ell - 1)
    return det // (m + 2)


def interpolate_difform(word, s, m, ell, k):
    """Nonzero Y-linear form of bounded degree satisfying every condition in
    the word's module; any message agreeing often enough is annihilated."""
    basis = build_basis(word, s, m, ell)
    rows = [list(r.comps) for r in basis.rows]
    vec = shortest_vector(basis.field, rows)
    q = DiffForm(basis.field, m, vec)
    assert not q.is_zero()
    bound = basis.det_degree() // (m + 2)
    assert q.x_degree() <= bound, "shortest vector exceeds the degree bound"
    return q
