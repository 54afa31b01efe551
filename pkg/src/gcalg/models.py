"""Finite invariant models of manifolds and their twisted cohomology.

A Model is a finite differential graded algebra presented by the
differentials of its degree-1 generators plus a closed twisting 3-form.
All cohomology is exact linear algebra over Gaussian rationals; the twisted
complexes are Z2-graded because the twisted differential mixes form degrees.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from . import linalg
from .forms import Form, clifford, contract_vector, reversal, wedge
from .gcmaps import GCMap, UGrading, uk_grading
from .scalars import ONE, Q, QZERO, Scalar, ZERO


class Model:
    """Invariant model: generator differentials, twisting 3-form, volume."""

    __slots__ = ("n", "d_table", "H", "volume", "orientation", "names")

    def __init__(
        self,
        n: int,
        d_table: Optional[Sequence[Form]] = None,
        H: Optional[Form] = None,
        volume: Scalar = ONE,
        orientation: int = 1,
        names: Optional[Sequence[str]] = None,
    ):
        if n < 0:
            raise ValueError("negative generator count")
        table = list(d_table) if d_table is not None else [Form.zero(n)] * n
        if len(table) != n:
            raise ValueError("differential table needs %d entries" % n)
        for i, f in enumerate(table, start=1):
            if f.n != n:
                raise ValueError("d(e%d) lives on the wrong frame" % i)
            if not (f.is_zero() or f.is_homogeneous(2)):
                raise ValueError("d(e%d) must be homogeneous of degree 2" % i)
        h = H if H is not None else Form.zero(n)
        if h.n != n:
            raise ValueError("twisting form lives on the wrong frame")
        if not (h.is_zero() or h.is_homogeneous(3)):
            raise ValueError("twisting form must be homogeneous of degree 3")
        if orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        if names is None:
            names = ["e%d" % i for i in range(1, n + 1)]
        if len(names) != n:
            raise ValueError("need %d generator names" % n)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "d_table", tuple(table))
        object.__setattr__(self, "H", h)
        object.__setattr__(self, "volume", volume)
        object.__setattr__(self, "orientation", orientation)
        object.__setattr__(self, "names", tuple(names))
        for i in range(1, n + 1):
            dd = d(self, d_table_entry(self, i))
            if not dd.is_zero():
                raise ValueError(
                    "d is not a differential: d(d(%s)) = %s"
                    % (self.names[i - 1], dd.to_text(self.names))
                )
        dh = d(self, h)
        if not dh.is_zero():
            raise ValueError(
                "twisting form is not closed: dH = %s" % dh.to_text(self.names)
            )

    def __setattr__(self, name, value):
        raise AttributeError("Model is immutable")

    def generator(self, i: int) -> Form:
        return Form.generator(self.n, i)

    def form(self, terms) -> Form:
        return Form(self.n, terms)

    def with_twist(self, H: Form) -> "Model":
        return Model(self.n, self.d_table, H, self.volume, self.orientation, self.names)

    def __repr__(self):
        return "Model(n=%d, H=%s)" % (self.n, self.H.to_text(self.names))


def d_table_entry(m: Model, i: int) -> Form:
    return m.d_table[i - 1]


def d(m: Model, a: Form) -> Form:
    """Graded Leibniz extension of the generator differentials."""
    if a.n != m.n:
        raise ValueError("form lives on %d generators, model has %d" % (a.n, m.n))
    out = Form.zero(m.n)
    for mask, coeff in a.terms.items():
        sign = 1
        rest = mask
        pos = 0
        while rest:
            low = rest & -rest
            gen = low.bit_length()
            di = m.d_table[gen - 1]
            if not di.is_zero():
                left = Form(m.n, {mask & (low - 1): ONE})
                right = Form(m.n, {mask & ~((low << 1) - 1): ONE})
                piece = wedge(left, wedge(di, right)).scale(coeff)
                out = out + (piece if (pos % 2 == 0) else -piece)
            rest ^= low
            pos += 1
    return out


def d_twisted(m: Model, a: Form) -> Form:
    """Twisted differential: d minus wedging by the twisting 3-form."""
    return d(m, a) - wedge(m.H, a)


def d_untwisted_plus(m: Model, a: Form) -> Form:
    """The opposite-twist differential, d plus wedging by the 3-form."""
    return d(m, a) + wedge(m.H, a)


def lie_derivative(m: Model, xi: Sequence, a: Form) -> Form:
    """Cartan formula along a constant vector field."""
    return d(m, contract_vector(list(xi), a)) + contract_vector(list(xi), d(m, a))


@dataclass(frozen=True)
class BettiPair:
    even: int
    odd: int
    over: str = "Q(i)"

    def __iter__(self):
        return iter((self.even, self.odd))


def parity_masks(n: int) -> Tuple[List[int], List[int]]:
    masks = sorted(range(1 << n), key=lambda m: (m.bit_count(), m))
    return (
        [m for m in masks if m.bit_count() % 2 == 0],
        [m for m in masks if m.bit_count() % 2 == 1],
    )


def _operator_parity_matrices(m: Model, op) -> Tuple[linalg.Mat, linalg.Mat]:
    """Matrices of a parity-reversing operator (even->odd, odd->even)."""
    even, odd = parity_masks(m.n)

    def columns(basis, target):
        tgt_index = {mask: i for i, mask in enumerate(target)}
        cols = []
        for mask in basis:
            img = op(Form(m.n, {mask: ONE}))
            vec = [QZERO] * len(target)
            for mk, c in img.terms.items():
                vec[tgt_index[mk]] = c.as_q()
            cols.append(vec)
        return [[cols[j][i] for j in range(len(cols))] for i in range(len(target))]

    return columns(even, odd), columns(odd, even)


def twisted_cohomology(m: Model) -> BettiPair:
    """Exact Z2-graded Betti ranks of the twisted complex."""
    if m.n == 0:
        return BettiPair(1, 0)
    d_eo, d_oe = _operator_parity_matrices(m, lambda a: d_twisted(m, a))
    even, odd = parity_masks(m.n)
    rank_eo = linalg.rank(d_eo)
    rank_oe = linalg.rank(d_oe)
    return BettiPair(len(even) - rank_eo - rank_oe, len(odd) - rank_oe - rank_eo)


def betti_numbers(m: Model) -> List[int]:
    """Integer-graded Betti numbers; only meaningful when the twist is zero."""
    if not m.H.is_zero():
        raise ValueError("integer grading needs a zero twisting form")
    masks = sorted(range(1 << m.n), key=lambda mk: (mk.bit_count(), mk))
    by_degree: Dict[int, List[int]] = {}
    for mask in masks:
        by_degree.setdefault(mask.bit_count(), []).append(mask)
    out = []
    for q in range(m.n + 1):
        basis = by_degree.get(q, [])
        nxt = by_degree.get(q + 1, [])
        prv = by_degree.get(q - 1, [])
        out.append(
            len(basis)
            - _rank_of_restriction(m, basis, nxt)
            - _rank_of_restriction(m, prv, basis)
        )
    return out


def _rank_of_restriction(m: Model, basis, target) -> int:
    if not basis or not target:
        return 0
    tgt = {mask: i for i, mask in enumerate(target)}
    rows = []
    for mask in basis:
        img = d(m, Form(m.n, {mask: ONE}))
        vec = [QZERO] * len(target)
        for mk, c in img.terms.items():
            vec[tgt[mk]] = c.as_q()
        rows.append(vec)
    return linalg.rank(rows)


def exp_lambda_transport(m: Model, lam: Form, a: Form) -> Form:
    """Wedge with exp(lambda); carries the twist H to H + d(lambda)."""
    if not (lam.is_zero() or lam.is_homogeneous(2)):
        raise ValueError("transport form must be homogeneous of degree 2")
    from .forms import exp_two_form

    return wedge(exp_two_form(lam), a)


def module_wedge(m: Model, a: Form, b: Form) -> Form:
    """Product of a d-closed form with a twisted-closed form, verified closed."""
    ra = d(m, a)
    if not ra.is_zero():
        raise ValueError("left factor is not closed: d(a) = %s" % ra.to_text(m.names))
    rb = d_twisted(m, b)
    if not rb.is_zero():
        raise ValueError(
            "right factor is not twisted-closed: residual %s" % rb.to_text(m.names)
        )
    out = wedge(a, b)
    res = d_twisted(m, out)
    if not res.is_zero():
        raise AssertionError("product failed to be twisted-closed: %s" % res)
    return out


def sigma_twist(m: Model, a: Form) -> Form:
    """Reversal of a twisted-closed form; the result is closed for the opposite twist."""
    res = d_twisted(m, a)
    if not res.is_zero():
        raise ValueError("form is not twisted-closed: residual %s" % res.to_text(m.names))
    out = reversal(a)
    back = d_untwisted_plus(m, out)
    if not back.is_zero():
        raise AssertionError("reversal failed opposite-twist closedness: %s" % back)
    return out


def reversal_clifford_pair(v: Sequence, a: Form) -> Tuple[Form, Form]:
    """Residuals of the paired annihilation: v = X + g kills a, X - g kills reversal(a)."""
    n = a.n
    coords = [Scalar.from_q(x) if isinstance(x, Q) else x for x in v]
    flipped = list(coords[:n]) + [-c for c in coords[n:]]
    return clifford(coords, a), clifford(flipped, reversal(a))


# -- generalized-complex splitting on a model -------------------------------------


class IntegrabilityError(ValueError):
    """The twisted differential does not split into adjacent levels."""

    def __init__(self, message: str, residual: Form):
        super().__init__(message)
        self.residual = residual


def del_delbar_split(
    m: Model, j: GCMap, a: Form, grading: Optional[UGrading] = None
) -> Tuple[Form, Form]:
    """Split the twisted differential of a form into level -1 and +1 parts.

    Any component of d_H(a) two or more levels away means the structure is
    not integrable on this model and raises IntegrabilityError.
    """
    if j.dim != m.n:
        raise ValueError("structure frame does not match the model")
    g = grading if grading is not None else uk_grading(j)
    parts = g.decompose(a)
    lower = Form.zero(m.n)
    upper = Form.zero(m.n)
    residual = Form.zero(m.n)
    for k, comp in parts.items():
        img = g.decompose(d_twisted(m, comp))
        for kk, piece in img.items():
            if kk == k - 1:
                lower = lower + piece
            elif kk == k + 1:
                upper = upper + piece
            else:
                residual = residual + piece
    if not residual.is_zero():
        raise IntegrabilityError(
            "structure is not integrable on this model; stray component %s"
            % residual.to_text(m.names),
            residual,
        )
    return lower, upper


@dataclass(frozen=True)
class SplitOperators:
    """Matrices of the two halves of the twisted differential, level-split."""

    model: Model
    grading: UGrading
    masks: Tuple[int, ...]
    lower: tuple  # rows of the level -1 half
    upper: tuple  # rows of the level +1 half

    def lower_mat(self) -> linalg.Mat:
        return [list(r) for r in self.lower]

    def upper_mat(self) -> linalg.Mat:
        return [list(r) for r in self.upper]


def split_operators(m: Model, j: GCMap) -> SplitOperators:
    g = uk_grading(j)
    masks = list(g._masks)
    dim = len(masks)
    low_cols = []
    up_cols = []
    for mask in masks:
        f = Form(m.n, {mask: ONE})
        lo, up = del_delbar_split(m, j, f, grading=g)
        low_cols.append([lo.terms.get(mk, ZERO).as_q() for mk in masks])
        up_cols.append([up.terms.get(mk, ZERO).as_q() for mk in masks])
    lower = [[low_cols[c][r] for c in range(dim)] for r in range(dim)]
    upper = [[up_cols[c][r] for c in range(dim)] for r in range(dim)]
    return SplitOperators(
        model=m,
        grading=g,
        masks=tuple(masks),
        lower=tuple(tuple(r) for r in lower),
        upper=tuple(tuple(r) for r in upper),
    )


@dataclass(frozen=True)
class DdbarReport:
    ok: bool
    witness: Optional[Form] = None
    detail: str = ""


def ddbar_lemma_check(m: Model, j: GCMap, ops: Optional[SplitOperators] = None) -> DdbarReport:
    """Exact subspace test of the interchange law between the two halves.

    Verifies ker(lower) & im(upper) = im(lower) & ker(upper) = im(lower&upper)
    by rank comparisons; on failure returns the first offending basis vector.
    """
    sp = ops if ops is not None else split_operators(m, j)
    lo = sp.lower_mat()
    up = sp.upper_mat()
    dim = len(sp.masks)

    ker_lo = linalg.row_space(linalg.kernel_basis(lo))
    ker_up = linalg.row_space(linalg.kernel_basis(up))
    im_lo = linalg.row_space(linalg.transpose(lo))
    im_up = linalg.row_space(linalg.transpose(up))
    im_uplo = linalg.row_space(linalg.transpose(linalg.mat_mul(up, lo)))

    a = linalg.intersect_spans(ker_lo, im_up, dim)
    b = linalg.intersect_spans(im_lo, ker_up, dim)

    for name, space in (("ker(del) & im(delbar)", a), ("im(del) & ker(delbar)", b)):
        for row in space:
            if not linalg.in_span(row, im_uplo):
                witness = _vec_form(row, sp.masks, m.n)
                return DdbarReport(
                    ok=False,
                    witness=witness,
                    detail="%s is larger than im(delbar del); witness %s"
                    % (name, witness.to_text(m.names)),
                )
    # im(delbar del) always sits inside both intersections; dims settle equality.
    if len(a) != len(im_uplo) or len(b) != len(im_uplo):
        return DdbarReport(ok=False, detail="rank bookkeeping mismatch")
    return DdbarReport(ok=True)


def _vec_form(vec, masks, n) -> Form:
    return Form(n, {mk: Scalar.from_q(c) for mk, c in zip(masks, vec)})


def delbar_closed_subcomplex_betti(m: Model, j: GCMap) -> BettiPair:
    """Twisted Betti ranks of the subcomplex of upper-half-closed forms."""
    sp = split_operators(m, j)
    up = sp.upper_mat()
    kernel = linalg.kernel_basis(up)
    if not kernel:
        return BettiPair(0, 0)
    masks = sp.masks
    basis_forms = [_vec_form(v, masks, m.n) for v in kernel]
    even_idx = [i for i, f in enumerate(basis_forms) if _pure_parity(f) == 0]
    odd_idx = [i for i, f in enumerate(basis_forms) if _pure_parity(f) == 1]
    span = linalg.row_space([list(v) for v in kernel])

    def coords(f: Form):
        vec = [f.terms.get(mk, ZERO).as_q() for mk in masks]
        sol = linalg.solve(linalg.transpose([list(r) for r in span]), vec)
        if sol is None:
            raise AssertionError("twisted differential left the subcomplex")
        return sol

    d_e = [coords(d_twisted(m, basis_forms[i])) for i in even_idx]
    d_o = [coords(d_twisted(m, basis_forms[i])) for i in odd_idx]
    rank_e = linalg.rank(d_e)
    rank_o = linalg.rank(d_o)
    return BettiPair(len(even_idx) - rank_e - rank_o, len(odd_idx) - rank_o - rank_e)


def _pure_parity(f: Form) -> int:
    degs = {mk.bit_count() % 2 for mk in f.terms}
    if len(degs) != 1:
        raise AssertionError("basis vector of mixed parity")
    return degs.pop()


# -- shipped models ---------------------------------------------------------------


def torus(n: int, H: Optional[Form] = None, volume: Scalar = ONE, orientation: int = 1) -> Model:
    """Flat torus model: all generator differentials vanish."""
    return Model(n, None, H, volume, orientation)


def heisenberg3(H: Optional[Form] = None) -> Model:
    """3-dimensional nilmanifold model: d(e3) = e1^e2."""
    table = [Form.zero(3), Form.zero(3), Form.monomial(3, (1, 2))]
    return Model(3, table, H)


def kodaira_thurston(H: Optional[Form] = None) -> Model:
    """4-dimensional nilmanifold model: d(e3) = e1^e2, all else flat."""
    table = [Form.zero(4), Form.zero(4), Form.monomial(4, (1, 2)), Form.zero(4)]
    return Model(4, table, H)


def heisenberg5(H: Optional[Form] = None) -> Model:
    """5-dimensional nilmanifold model: d(e5) = e1^e2 + e3^e4."""
    table = [Form.zero(5)] * 4 + [
        Form.monomial(5, (1, 2)) + Form.monomial(5, (3, 4))
    ]
    return Model(5, table, H)
