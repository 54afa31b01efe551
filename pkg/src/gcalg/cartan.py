"""Truncated equivariant complexes for torus actions on invariant models.

Equivariant forms are finite polynomial maps from the torus Lie algebra into
model forms, truncated at a chosen total polynomial degree.  The equivariant
differential follows the convention d_G = d - x^j i_j (the opposite sign is
equivalent under x -> -x and changes no ranks).  Formal-power-series
coefficients are realized by the truncation degree; stability of the
reported ranks across consecutive truncations is the completion criterion.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Dict, List, Optional, Sequence, Tuple

from . import linalg
from .forms import Form, contract_vector, wedge
from .gcmaps import GCMap
from .models import (
    BettiPair,
    Model,
    d,
    d_twisted,
    ddbar_lemma_check,
    lie_derivative,
    split_operators,
    twisted_cohomology,
)
from .scalars import ONE, QONE, QZERO, Scalar, ZERO, scalar

Expo = Tuple[int, ...]


def _expo_add(a: Expo, j: int) -> Expo:
    out = list(a)
    out[j] += 1
    return tuple(out)


def _expo_sum(a: Expo, b: Expo) -> Expo:
    return tuple(x + y for x, y in zip(a, b))


def monomials_of_degree(k: int, degree: int) -> List[Expo]:
    """Exponent vectors of the given total degree in k variables, sorted."""
    if degree == 0:
        return [tuple([0] * k)]
    out = []
    for combo in combinations_with_replacement(range(k), degree):
        e = [0] * k
        for j in combo:
            e[j] += 1
        out.append(tuple(e))
    return sorted(set(out))


class EqForm:
    """Equivariant form: finite map from x-monomials to model forms."""

    __slots__ = ("k", "n", "trunc", "terms", "dropped")

    def __init__(self, k: int, n: int, trunc: int, terms=(), dropped: bool = False):
        if k < 0 or trunc < 0:
            raise ValueError("rank and truncation degree must be nonnegative")
        clean = {}
        dropped = bool(dropped)
        for expo, form in dict(terms).items():
            expo = tuple(expo)
            if len(expo) != k:
                raise ValueError("exponent vector %r has wrong length" % (expo,))
            if form.n != n:
                raise ValueError("component form lives on the wrong frame")
            if form.is_zero():
                continue
            if sum(expo) > trunc:
                dropped = True
                continue
            clean[expo] = form
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "trunc", trunc)
        object.__setattr__(self, "terms", clean)
        object.__setattr__(self, "dropped", dropped)

    def __setattr__(self, name, value):
        raise AttributeError("EqForm is immutable")

    @staticmethod
    def of_form(form: Form, k: int, trunc: int) -> "EqForm":
        return EqForm(k, form.n, trunc, {tuple([0] * k): form})

    def is_zero(self) -> bool:
        return not self.terms

    def component(self, expo: Expo) -> Form:
        return self.terms.get(tuple(expo), Form.zero(self.n))

    def poly_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def __add__(self, other: "EqForm") -> "EqForm":
        self._check(other)
        terms = dict(self.terms)
        for e, f in other.terms.items():
            terms[e] = terms.get(e, Form.zero(self.n)) + f
        return EqForm(
            self.k, self.n, min(self.trunc, other.trunc), terms,
            self.dropped or other.dropped,
        )

    def __sub__(self, other: "EqForm") -> "EqForm":
        return self + (-other)

    def __neg__(self) -> "EqForm":
        return EqForm(
            self.k, self.n, self.trunc,
            {e: -f for e, f in self.terms.items()}, self.dropped,
        )

    def scale(self, c) -> "EqForm":
        c = scalar(c)
        return EqForm(
            self.k, self.n, self.trunc,
            {e: f.scale(c) for e, f in self.terms.items()}, self.dropped,
        )

    def x_shift(self, j: int) -> "EqForm":
        """Multiply by the j-th polynomial variable (drops past truncation)."""
        return EqForm(
            self.k, self.n, self.trunc,
            {_expo_add(e, j): f for e, f in self.terms.items()}, self.dropped,
        )

    def map_forms(self, fn) -> "EqForm":
        return EqForm(
            self.k, self.n, self.trunc,
            {e: fn(f) for e, f in self.terms.items()}, self.dropped,
        )

    def _check(self, other: "EqForm"):
        if self.k != other.k or self.n != other.n:
            raise ValueError("equivariant forms are not compatible")

    def __eq__(self, other):
        if not isinstance(other, EqForm):
            return NotImplemented
        return (
            self.k == other.k and self.n == other.n and self.terms == other.terms
        )

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return "EqForm(%s)" % self.to_text()

    def to_text(self, names: Sequence[str] = None) -> str:
        if self.is_zero():
            return "0"
        parts = []
        for e in sorted(self.terms, key=lambda ex: (sum(ex), ex)):
            mono = "*".join(
                "x%d" % (j + 1) if p == 1 else "x%d^%d" % (j + 1, p)
                for j, p in enumerate(e)
                if p
            )
            body = self.terms[e].to_text(names)
            if mono:
                parts.append("%s*(%s)" % (mono, body))
            else:
                parts.append("(%s)" % body)
        return " + ".join(parts)


def wedge_eq(a: EqForm, b: EqForm) -> EqForm:
    a._check(b)
    trunc = min(a.trunc, b.trunc)
    terms: Dict[Expo, Form] = {}
    dropped = a.dropped or b.dropped
    for ea, fa in a.terms.items():
        for eb, fb in b.terms.items():
            e = _expo_sum(ea, eb)
            if sum(e) > trunc:
                dropped = True
                continue
            piece = wedge(fa, fb)
            terms[e] = terms.get(e, Form.zero(a.n)) + piece
    return EqForm(a.k, a.n, trunc, terms, dropped)


class TorusAction:
    """Constant torus action: fundamental fields plus optional moment data.

    mu_diff supplies the closed 1-forms standing in for the differentials of
    the formal moment map components; alpha is the moment one-form.
    """

    __slots__ = ("model", "xi", "mu_diff", "alpha")

    def __init__(
        self,
        model: Model,
        xi: Sequence[Sequence],
        mu_diff: Optional[Sequence[Form]] = None,
        alpha: Optional[Sequence[Form]] = None,
    ):
        vecs = [tuple(scalar(c) for c in v) for v in xi]
        for v in vecs:
            if len(v) != model.n:
                raise ValueError("fundamental field needs %d coordinates" % model.n)
        k = len(vecs)
        mu = list(mu_diff) if mu_diff is not None else None
        al = list(alpha) if alpha is not None else None
        for name, forms, deg in (("mu_diff", mu, 1), ("alpha", al, 1)):
            if forms is None:
                continue
            if len(forms) != k:
                raise ValueError("%s needs one form per torus factor" % name)
            for f in forms:
                if f.n != model.n:
                    raise ValueError("%s lives on the wrong frame" % name)
                if not (f.is_zero() or f.is_homogeneous(deg)):
                    raise ValueError("%s entries must be 1-forms" % name)
        object.__setattr__(self, "model", model)
        object.__setattr__(self, "xi", tuple(vecs))
        object.__setattr__(self, "mu_diff", tuple(mu) if mu is not None else None)
        object.__setattr__(self, "alpha", tuple(al) if al is not None else None)
        for j, v in enumerate(self.xi, start=1):
            for i, entry in enumerate(model.d_table, start=1):
                res = lie_derivative(model, v, entry)
                if not res.is_zero():
                    raise ValueError(
                        "field %d does not preserve d(%s): %s"
                        % (j, model.names[i - 1], res.to_text(model.names))
                    )
                # frame invariance: without it the equivariant differential
                # fails to square to zero on the full complex
                frame_res = contract_vector(v, entry)
                if not frame_res.is_zero():
                    raise ValueError(
                        "field %d does not preserve the frame: L(%s) = %s"
                        % (j, model.names[i - 1], frame_res.to_text(model.names))
                    )
            res = lie_derivative(model, v, model.H)
            if not res.is_zero():
                raise ValueError("field %d does not preserve the twisting form" % j)
        if mu is not None:
            for j, f in enumerate(mu, start=1):
                df = d(model, f)
                if not df.is_zero():
                    raise ValueError("moment differential %d is not closed" % j)

    def __setattr__(self, name, value):
        raise AttributeError("TorusAction is immutable")

    @property
    def k(self) -> int:
        return len(self.xi)

    def contract_j(self, j: int, f: Form) -> Form:
        return contract_vector(self.xi[j], f)

    def eqform(self, form: Form, trunc: int) -> EqForm:
        return EqForm.of_form(form, self.k, trunc)

    def h_equivariant(self, trunc: int) -> EqForm:
        """The equivariant 3-form: model twist plus x^j alpha^j."""
        terms: Dict[Expo, Form] = {}
        if not self.model.H.is_zero():
            terms[tuple([0] * self.k)] = self.model.H
        if self.alpha is not None:
            for j, a in enumerate(self.alpha):
                if not a.is_zero():
                    e = tuple(1 if i == j else 0 for i in range(self.k))
                    terms[e] = terms.get(e, Form.zero(self.model.n)) + a
        return EqForm(self.k, self.model.n, trunc, terms)


def d_equivariant(act: TorusAction, eta: EqForm) -> EqForm:
    """Equivariant differential: vertical d minus x^j-weighted contractions."""
    _check_action_form(act, eta)
    out = eta.map_forms(lambda f: d(act.model, f))
    for e, f in eta.terms.items():
        for j in range(act.k):
            piece = act.contract_j(j, f)
            if piece.is_zero():
                continue
            out = out + EqForm(
                eta.k, eta.n, eta.trunc, {_expo_add(e, j): -piece}
            )
    return out


def d_equivariant_twisted(act: TorusAction, h_g: EqForm, eta: EqForm) -> EqForm:
    """Equivariant differential twisted by an equivariantly closed 3-form."""
    res = d_equivariant(act, h_g)
    if not res.is_zero():
        raise ValueError(
            "twisting form is not equivariantly closed: residual %s" % res
        )
    return _d_eq_twisted_unchecked(act, h_g, eta)


def _d_eq_twisted_unchecked(act: TorusAction, h_g: EqForm, eta: EqForm) -> EqForm:
    return d_equivariant(act, eta) - wedge_eq(h_g, eta)


def moment_operator(act: TorusAction, eta: EqForm) -> EqForm:
    """Moment contribution: per factor, -i_j + i(m^j + i a^j) wedge, x-weighted."""
    _check_action_form(act, eta)
    if act.mu_diff is None or act.alpha is None:
        raise ValueError("action carries no moment data")
    out = EqForm(eta.k, eta.n, eta.trunc)
    i_unit = Scalar.imaginary(1)
    for e, f in eta.terms.items():
        for j in range(act.k):
            piece = -act.contract_j(j, f)
            cov = act.mu_diff[j].scale(i_unit) - act.alpha[j]
            piece = piece + wedge(cov, f)
            if not piece.is_zero():
                out = out + EqForm(eta.k, eta.n, eta.trunc, {_expo_add(e, j): piece})
    return out


def generalized_d(act: TorusAction, eta: EqForm) -> EqForm:
    """Twisted differential plus the moment operator."""
    return eta.map_forms(lambda f: d_twisted(act.model, f)) + moment_operator(act, eta)


def _check_action_form(act: TorusAction, eta: EqForm):
    if eta.k != act.k or eta.n != act.model.n:
        raise ValueError("equivariant form does not match the action")


@dataclass(frozen=True)
class HamiltonianReport:
    ok: bool
    spinor_residuals: Tuple[Form, ...]
    closure_residual: Optional[EqForm]

    @property
    def spinor_ok(self) -> bool:
        return all(r.is_zero() for r in self.spinor_residuals)

    @property
    def closure_ok(self) -> bool:
        return self.closure_residual is None or self.closure_residual.is_zero()


def hamiltonian_check(act: TorusAction, rho: Form) -> HamiltonianReport:
    """Certify moment data against a candidate pure spinor.

    Per torus factor the section -xi_j + i(m^j + i a^j) must annihilate the
    spinor under the Clifford action, and the equivariant 3-form must be
    equivariantly closed.  For a twisted-closed spinor these certify that
    exp(i mu) rho is equivariantly closed for the twisted differential,
    with the moment map formal.
    """
    if act.mu_diff is None or act.alpha is None:
        raise ValueError("action carries no moment data")
    model = act.model
    residuals = []
    for j in range(act.k):
        cov = act.mu_diff[j].scale(Scalar.imaginary(1)) - act.alpha[j]
        res = contract_vector([-c for c in act.xi[j]], rho) + wedge(cov, rho)
        residuals.append(res)
    h_g = act.h_equivariant(trunc=3)
    closure = d_equivariant(act, h_g)
    ok = all(r.is_zero() for r in residuals) and closure.is_zero()
    return HamiltonianReport(
        ok=ok,
        spinor_residuals=tuple(residuals),
        closure_residual=None if closure.is_zero() else closure,
    )


# -- ranks of the truncated complex ------------------------------------------------


@dataclass(frozen=True)
class EquivariantRanks:
    """Per-(parity, polynomial degree) ranks of the truncated complex.

    by_degree[d] = (even, odd) graded ranks of the cohomology filtration at
    polynomial degree d.  The top degree is truncation-sensitive: compare
    two consecutive truncations and trust the agreeing prefix.  The
    freeness verdict checks degrees below the truncation against
    (number of degree-d monomials) x (twisted Betti ranks).
    """

    trunc: int
    k: int
    by_degree: Tuple[Tuple[int, int], ...]
    betti: BettiPair
    free_pattern: bool

    def totals_stable(self) -> Tuple[int, int]:
        even = sum(e for e, _ in self.by_degree[: self.trunc])
        odd = sum(o for _, o in self.by_degree[: self.trunc])
        return even, odd


def equivariant_cohomology(act: TorusAction, h_g: EqForm, trunc: int) -> EquivariantRanks:
    """Exact graded ranks of the truncated twisted equivariant complex."""
    model = act.model
    res = d_equivariant(act, h_g)
    if not res.is_zero():
        raise ValueError("twisting form is not equivariantly closed: %s" % res)

    basis: List[Tuple[Expo, int]] = []
    for deg in range(trunc + 1):
        for e in monomials_of_degree(act.k, deg):
            for mask in sorted(range(1 << model.n), key=lambda m: (m.bit_count(), m)):
                basis.append((e, mask))
    even_basis = [b for b in basis if b[1].bit_count() % 2 == 0]
    odd_basis = [b for b in basis if b[1].bit_count() % 2 == 1]
    index_even = {b: i for i, b in enumerate(even_basis)}
    index_odd = {b: i for i, b in enumerate(odd_basis)}

    def image_vec(e: Expo, mask: int, target_index) -> linalg.Vec:
        src = EqForm(act.k, model.n, trunc, {e: Form(model.n, {mask: ONE})})
        img = _d_eq_twisted_unchecked(act, h_g, src)
        vec = [QZERO] * len(target_index)
        for ee, f in img.terms.items():
            for mk, c in f.terms.items():
                vec[target_index[(ee, mk)]] = c.as_q()
        return vec

    cols_eo = [image_vec(e, mk, index_odd) for e, mk in even_basis]
    cols_oe = [image_vec(e, mk, index_even) for e, mk in odd_basis]
    mat_eo = [[cols_eo[c][r] for c in range(len(cols_eo))] for r in range(len(odd_basis))]
    mat_oe = [[cols_oe[c][r] for c in range(len(cols_oe))] for r in range(len(even_basis))]

    # Graded pieces of the x-degree filtration on kernel/image: the piece at
    # degree p is dim((ker & F_p) + im) - dim((ker & F_p+1) + im), where F_p
    # is the coordinate subspace of basis elements of x-degree >= p.
    def graded(mat_out, mat_in, basis_list):
        image = linalg.row_space(linalg.transpose(mat_in))
        degs = [sum(e) for e, _ in basis_list]
        dims = []
        for p in range(trunc + 2):
            keep = [i for i, dg in enumerate(degs) if dg >= p]
            sub = [[row[i] for i in keep] for row in mat_out]
            kern = linalg.kernel_basis(sub, ncols=len(keep))
            rows = []
            for v in kern:
                full = [QZERO] * len(basis_list)
                for pos, i in enumerate(keep):
                    full[i] = v[pos]
                rows.append(full)
            stacked = rows + [list(r) for r in image]
            dims.append(linalg.rank(stacked) if stacked else 0)
        return [dims[p] - dims[p + 1] for p in range(trunc + 1)]

    even_ranks = graded(mat_eo, mat_oe, even_basis)
    odd_ranks = graded(mat_oe, mat_eo, odd_basis)

    h0 = h_g.component(tuple([0] * act.k))
    betti = twisted_cohomology(model.with_twist(h0))
    free = True
    for deg in range(trunc):
        count = len(monomials_of_degree(act.k, deg))
        if even_ranks[deg] != count * betti.even or odd_ranks[deg] != count * betti.odd:
            free = False
            break
    return EquivariantRanks(
        trunc=trunc,
        k=act.k,
        by_degree=tuple(zip(even_ranks, odd_ranks)),
        betti=betti,
        free_pattern=free,
    )


@dataclass(frozen=True)
class StableRanks:
    """Per-degree ranks agreeing between two consecutive truncations.

    The top degrees of a single truncated run carry completion artifacts;
    the degrees on which runs at trunc and trunc+1 agree are authoritative.
    """

    trunc: int
    by_degree: Tuple[Tuple[int, int], ...]
    low: EquivariantRanks
    high: EquivariantRanks

    def totals(self) -> Tuple[int, int]:
        even = sum(e for e, _ in self.by_degree)
        odd = sum(o for _, o in self.by_degree)
        return even, odd


def stable_equivariant_ranks(
    act: TorusAction, trunc: int, h_g_of=None
) -> StableRanks:
    """Run two consecutive truncations and keep the agreeing degree prefix."""
    if h_g_of is None:
        h_g_of = act.h_equivariant
    low = equivariant_cohomology(act, h_g_of(trunc), trunc)
    high = equivariant_cohomology(act, h_g_of(trunc + 1), trunc + 1)
    agreed = []
    for deg in range(trunc + 1):
        if low.by_degree[deg] != high.by_degree[deg]:
            break
        agreed.append(low.by_degree[deg])
    return StableRanks(
        trunc=trunc, by_degree=tuple(agreed), low=low, high=high
    )




# -- connections, the Cartan map, and descent --------------------------------------


class Connection:
    """Connection elements for a free model action, with curvature.

    theta^j are 1-forms dual to the fundamental fields; the curvature is
    d(theta^j) plus the structure-constant term, kept general although torus
    structure constants vanish.
    """

    __slots__ = ("action", "theta", "curvature")

    def __init__(
        self,
        action: TorusAction,
        theta: Sequence[Form],
        structure_constants=None,
    ):
        model = action.model
        th = list(theta)
        if len(th) != action.k:
            raise ValueError("need one connection element per torus factor")
        for f in th:
            if f.n != model.n or not (f.is_zero() or f.is_homogeneous(1)):
                raise ValueError("connection elements must be 1-forms on the model")
        for i in range(action.k):
            for j in range(action.k):
                val = contract_vector(action.xi[i], th[j]).terms.get(0, Scalar())
                want = ONE if i == j else Scalar()
                if val != want:
                    raise ValueError(
                        "duality fails: i_%d theta^%d = %s" % (i + 1, j + 1, val)
                    )
        curv = []
        for j in range(action.k):
            c = d(model, th[j])
            if structure_constants is not None:
                half = Scalar.rational(1, 2)
                for a in range(action.k):
                    for b in range(action.k):
                        coeff = scalar(structure_constants[j][a][b])
                        if not coeff.is_zero():
                            c = c + wedge(th[a], th[b]).scale(coeff * half)
            curv.append(c)
        for j, c in enumerate(curv, start=1):
            for i in range(action.k):
                if not contract_vector(action.xi[i], c).is_zero():
                    raise ValueError("curvature element %d is not horizontal" % j)
                if not lie_derivative(model, action.xi[i], c).is_zero():
                    raise ValueError("curvature element %d is not invariant" % j)
        object.__setattr__(self, "action", action)
        object.__setattr__(self, "theta", tuple(th))
        object.__setattr__(self, "curvature", tuple(curv))

    def __setattr__(self, name, value):
        raise AttributeError("Connection is immutable")

    @staticmethod
    def solve(action: TorusAction) -> "Connection":
        """Find connection elements by solving the duality equations."""
        model = action.model
        rows = [[c.as_q() for c in v] for v in action.xi]
        thetas = []
        for j in range(action.k):
            rhs = [QONE if i == j else QZERO for i in range(action.k)]
            sol = linalg.solve(rows, rhs)
            if sol is None:
                raise ValueError("action is not free on the model frame")
            thetas.append(
                Form(model.n, {1 << i: Scalar.from_q(c) for i, c in enumerate(sol)})
            )
        return Connection(action, thetas)


def horizontal_projection(conn: Connection, f: Form) -> Form:
    """Strip connection components: apply prod_j (1 - theta^j i_j)."""
    out = f
    for j in range(conn.action.k):
        out = out - wedge(conn.theta[j], conn.action.contract_j(j, out))
    return out


def cartan_map(conn: Connection, eta: EqForm) -> Form:
    """Map x^I (x) gamma to curvature^I wedge horizontal part of gamma."""
    act = conn.action
    _check_action_form(act, eta)
    model = act.model
    out = Form.zero(model.n)
    for e, f in eta.terms.items():
        piece = horizontal_projection(conn, f)
        for j, power in enumerate(e):
            for _ in range(power):
                piece = wedge(conn.curvature[j], piece)
                if piece.is_zero():
                    break
        out = out + piece
    for j in range(act.k):
        if not act.contract_j(j, out).is_zero():
            raise AssertionError("mapped form is not horizontal")
        if not lie_derivative(model, act.xi[j], out).is_zero():
            raise AssertionError("mapped form is not invariant")
    return out


def gamma_from_connection(conn: Connection) -> Form:
    """The 2-form sum theta^j ^ alpha^j contracting back to the moment one-forms."""
    act = conn.action
    if act.alpha is None:
        raise ValueError("action carries no moment one-form")
    model = act.model
    for j, a in enumerate(act.alpha, start=1):
        for i in range(act.k):
            if not contract_vector(act.xi[i], a).is_zero():
                raise ValueError(
                    "moment one-form %d is not horizontal; project it first" % j
                )
            if not lie_derivative(model, act.xi[i], a).is_zero():
                raise ValueError("moment one-form %d is not invariant" % j)
    gamma = Form.zero(model.n)
    for j in range(act.k):
        gamma = gamma + wedge(conn.theta[j], act.alpha[j])
    for i in range(act.k):
        back = contract_vector(act.xi[i], gamma)
        if back != act.alpha[i]:
            raise AssertionError("contraction of the twist potential is off")
    return gamma


def basic_twist(conn: Connection) -> Form:
    """The basic 3-form H + x^j alpha^j + d_G(Gamma), which is H + d(Gamma)."""
    act = conn.action
    model = act.model
    gamma = gamma_from_connection(conn)
    trunc = 3
    h_g = act.h_equivariant(trunc)
    total = h_g + d_equivariant(act, EqForm.of_form(gamma, act.k, trunc))
    zero_expo = tuple([0] * act.k)
    for e, f in total.terms.items():
        if e != zero_expo:
            raise AssertionError("twist failed to become basic: %s" % total)
    out = total.component(zero_expo)
    for i in range(act.k):
        if not contract_vector(act.xi[i], out).is_zero():
            raise AssertionError("twist failed to become horizontal")
    return out


def quotient_frame(conn: Connection) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """Indices kept and dropped by descent; needs frame-aligned connections."""
    model = conn.action.model
    dropped = []
    for j, th in enumerate(conn.theta, start=1):
        if len(th.terms) != 1:
            raise ValueError("connection element %d is not a frame generator" % j)
        mask, coeff = next(iter(th.terms.items()))
        if mask.bit_count() != 1 or coeff != ONE:
            raise ValueError("connection element %d is not a frame generator" % j)
        dropped.append(mask.bit_length())
    if len(set(dropped)) != len(dropped):
        raise ValueError("connection elements repeat a frame generator")
    kept = tuple(i for i in range(1, model.n + 1) if i not in dropped)
    return kept, tuple(dropped)


def descend_form(conn: Connection, a: Form) -> Form:
    """The unique quotient form pulling back to a basic form."""
    act = conn.action
    model = act.model
    for j in range(act.k):
        res = act.contract_j(j, a)
        if not res.is_zero():
            raise ValueError(
                "form is not basic: contraction %d gives %s"
                % (j + 1, res.to_text(model.names))
            )
        if not lie_derivative(model, act.xi[j], a).is_zero():
            raise ValueError("form is not basic: not invariant along field %d" % (j + 1))
    kept, dropped = quotient_frame(conn)
    drop_mask = 0
    for i in dropped:
        drop_mask |= 1 << (i - 1)
    relabel = {i: pos + 1 for pos, i in enumerate(kept)}
    terms = {}
    for mask, coeff in a.terms.items():
        if mask & drop_mask:
            raise ValueError("form touches the connection frame; cannot descend")
        new = 0
        for i in relabel:
            if mask & (1 << (i - 1)):
                new |= 1 << (relabel[i] - 1)
        terms[new] = coeff
    return Form(len(kept), terms)


def quotient_model(conn: Connection, twist: Optional[Form] = None) -> Model:
    """Quotient model on the complementary frame with the induced differential."""
    model = conn.action.model
    kept, _ = quotient_frame(conn)
    table = []
    for i in kept:
        table.append(descend_form(conn, model.d_table[i - 1]))
    names = [model.names[i - 1] for i in kept]
    h = twist
    if h is not None and h.n != len(kept):
        raise ValueError("quotient twist lives on the wrong frame")
    return Model(
        len(kept), table, h, model.volume, model.orientation,
        ["q_" + nm for nm in names],
    )


class ModelMorphism:
    """DGA morphism by pullback: codomain generators map to domain 1-forms."""

    __slots__ = ("domain", "codomain", "gen_images")

    def __init__(self, domain: Model, codomain: Model, gen_images: Sequence[Form]):
        images = list(gen_images)
        if len(images) != codomain.n:
            raise ValueError("need an image for each codomain generator")
        for f in images:
            if f.n != domain.n or not (f.is_zero() or f.is_homogeneous(1)):
                raise ValueError("generator images must be 1-forms on the domain")
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "codomain", codomain)
        object.__setattr__(self, "gen_images", tuple(images))
        for i in range(1, codomain.n + 1):
            left = self.pullback(codomain.d_table[i - 1])
            right = d(domain, images[i - 1])
            if left != right:
                raise ValueError(
                    "pullback does not intertwine differentials at generator %d" % i
                )
        if self.pullback(codomain.H) != domain.H:
            raise ValueError("pullback does not match the twisting forms")

    def __setattr__(self, name, value):
        raise AttributeError("ModelMorphism is immutable")

    @staticmethod
    def identity(model: Model) -> "ModelMorphism":
        return ModelMorphism(
            model, model, [model.generator(i) for i in range(1, model.n + 1)]
        )

    def pullback(self, a: Form) -> Form:
        if a.n != self.codomain.n:
            raise ValueError("form does not live on the codomain")
        out = Form.zero(self.domain.n)
        for mask, coeff in a.terms.items():
            piece = Form.unit(self.domain.n, coeff)
            bits = mask
            while bits:
                low = bits & -bits
                piece = wedge(piece, self.gen_images[low.bit_length() - 1])
                if piece.is_zero():
                    break
                bits ^= low
            out = out + piece
        return out


def kirwan_map(
    act: TorusAction, conn: Connection, sub: ModelMorphism, eta: EqForm
) -> Form:
    """Restrict, apply the Cartan map, and descend to the quotient frame."""
    if sub.domain is not act.model:
        raise ValueError("action must live on the restriction's domain")
    restricted = EqForm(
        act.k, act.model.n, eta.trunc,
        {e: sub.pullback(f) for e, f in eta.terms.items()},
        eta.dropped,
    )
    mapped = cartan_map(conn, restricted)
    return descend_form(conn, mapped)


# -- canonical equivariant extensions -----------------------------------------------


class ExtensionError(ValueError):
    """The extension recursion met an unsolvable step."""

    def __init__(self, message: str, witness: Form):
        super().__init__(message)
        self.witness = witness


def _moment_sections(act: TorusAction) -> List[List[Scalar]]:
    """Coefficient vectors of -xi_j + i(m^j + i a^j) in V + V* coordinates."""
    if act.mu_diff is None or act.alpha is None:
        raise ValueError("action carries no moment data")
    n = act.model.n
    out = []
    for j in range(act.k):
        vec = [-c for c in act.xi[j]] + [Scalar()] * n
        cov = act.mu_diff[j].scale(Scalar.imaginary(1)) - act.alpha[j]
        for mask, coeff in cov.terms.items():
            vec[n + mask.bit_length() - 1] = coeff
        out.append(vec)
    return out


def canonical_extension(
    act: TorusAction, j: GCMap, phi: Form, trunc: Optional[int] = None
) -> EqForm:
    """Equivariantly extend a form closed for both halves of the differential.

    Solves the recursion: at each polynomial degree the moment operator's
    contribution must be cancelled by the lower half of a two-sided
    potential, which the interchange law guarantees; termination is bounded
    by the level filtration.  The result is closed for the generalized
    differential, verified exactly.
    """
    from .forms import clifford as _clifford

    model = act.model
    half = model.n // 2
    if trunc is None:
        trunc = half + 1
    ops = split_operators(model, j)
    check = ddbar_lemma_check(model, j, ops=ops)
    if not check.ok:
        raise ExtensionError(
            "interchange law fails on this model: %s" % check.detail,
            check.witness if check.witness is not None else Form.zero(model.n),
        )
    for jj in range(act.k):
        if not lie_derivative(model, act.xi[jj], phi).is_zero():
            raise ValueError("form is not invariant under the action")
    grading = ops.grading
    comps = grading.decompose(phi)
    lo = ops.lower_mat()
    up = ops.upper_mat()
    masks = list(ops.masks)
    lo_up = linalg.mat_mul(lo, up)
    sections = _moment_sections(act)

    def to_vec(f: Form) -> linalg.Vec:
        return [f.terms.get(mk, ZERO).as_q() for mk in masks]

    def to_form(v: linalg.Vec) -> Form:
        return Form(model.n, {mk: Scalar.from_q(c) for mk, c in zip(masks, v)})

    for comp in comps.values():
        vec = to_vec(comp)
        if any(not x.is_zero() for x in linalg.mat_vec(lo, vec)):
            raise ValueError("component is not closed for the lower half")
        if any(not x.is_zero() for x in linalg.mat_vec(up, vec)):
            raise ValueError("component is not closed for the upper half")

    terms: Dict[Expo, Form] = {tuple([0] * act.k): phi}
    for degree in range(1, trunc + 1):
        residuals: Dict[Expo, Form] = {}
        for e, f in terms.items():
            if sum(e) != degree - 1:
                continue
            for jj in range(act.k):
                piece = _clifford(sections[jj], f)
                if piece.is_zero():
                    continue
                key = _expo_add(e, jj)
                residuals[key] = residuals.get(key, Form.zero(model.n)) + piece
        residuals = {e: f for e, f in residuals.items() if not f.is_zero()}
        if not residuals:
            break
        for e, r in residuals.items():
            rhs = [-x for x in to_vec(r)]
            sol = linalg.solve(lo_up, rhs)
            if sol is None:
                raise ExtensionError(
                    "moment contribution is not cancellable; interchange "
                    "law violation witness %s" % r.to_text(model.names),
                    r,
                )
            corr = to_form(linalg.mat_vec(up, sol))
            if not corr.is_zero():
                terms[e] = terms.get(e, Form.zero(model.n)) + corr
    out = EqForm(act.k, model.n, trunc, terms)
    residual = generalized_d(act, out)
    if not residual.is_zero():
        raise AssertionError(
            "extension failed to close the generalized differential: %s" % residual
        )
    return out


# -- the formal conjugation identity -------------------------------------------------


def moment_conjugation_residual(act: TorusAction, gamma: Form, trunc: int):
    """Residual of the conjugation identity with a formal moment map.

    Checks (d_H + A)(exp(-i mu) gamma) = exp(-i mu) d_{G,H_G}(gamma) as a
    truncated series, where mu^j are formal symbols with d(mu^j) = m^j and
    exp(-i mu) carries matching x- and mu-exponents.  Returns the dict of
    nonzero residual components (empty when the identity holds).
    """
    if act.mu_diff is None or act.alpha is None:
        raise ValueError("action carries no moment data")
    model = act.model
    k = act.k
    i_unit = Scalar.imaginary(1)

    series: Dict[Tuple[Expo, Expo], Form] = {}
    for degree in range(trunc + 1):
        for e in monomials_of_degree(k, degree):
            coeff = ONE
            for p in e:
                for s in range(1, p + 1):
                    coeff = coeff * Scalar.imaginary(-1) / Scalar.rational(s)
            series[(e, e)] = gamma.scale(coeff)

    def dh_moment(src: Dict[Tuple[Expo, Expo], Form]):
        out: Dict[Tuple[Expo, Expo], Form] = {}

        def add(key, f):
            if f.is_zero():
                return
            if sum(key[0]) > trunc:
                return
            out[key] = out.get(key, Form.zero(model.n)) + f

        for (ex, em), f in src.items():
            add((ex, em), d_twisted(model, f))
            for jj in range(k):
                if em[jj]:
                    lowered = tuple(
                        p - 1 if idx == jj else p for idx, p in enumerate(em)
                    )
                    add(
                        (ex, lowered),
                        wedge(act.mu_diff[jj], f).scale(
                            Scalar.rational(em[jj])
                        ),
                    )
                cov = act.mu_diff[jj].scale(i_unit) - act.alpha[jj]
                piece = -act.contract_j(jj, f) + wedge(cov, f)
                add((_expo_add(ex, jj), em), piece)
        return {key: f for key, f in out.items() if not f.is_zero()}

    lhs = dh_moment(series)

    h_g = act.h_equivariant(trunc + 1)
    w = _d_eq_twisted_unchecked(
        act, h_g, EqForm.of_form(gamma, k, trunc + 1)
    )
    rhs: Dict[Tuple[Expo, Expo], Form] = {}
    for degree in range(trunc + 1):
        for e in monomials_of_degree(k, degree):
            coeff = ONE
            for p in e:
                for s in range(1, p + 1):
                    coeff = coeff * Scalar.imaginary(-1) / Scalar.rational(s)
            for ew, f in w.terms.items():
                key = (_expo_sum(e, ew), e)
                if sum(key[0]) > trunc:
                    continue
                piece = f.scale(coeff)
                rhs[key] = rhs.get(key, Form.zero(model.n)) + piece
    rhs = {key: f for key, f in rhs.items() if not f.is_zero()}

    residual: Dict[Tuple[Expo, Expo], Form] = {}
    for key in set(lhs) | set(rhs):
        diff = lhs.get(key, Form.zero(model.n)) - rhs.get(key, Form.zero(model.n))
        if not diff.is_zero():
            residual[key] = diff
    return residual
