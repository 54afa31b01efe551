"""Linear generalized complex structures on V + V*.

A structure is a rational matrix J on V + V* (coordinates: V-frame first,
then the dual frame) with J^2 = -1 that preserves the split-signature
pairing.  Everything downstream -- eigenspaces, pure spinors, the spectral
decomposition of the induced action on forms -- is exact linear algebra over
Gaussian rationals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

from . import linalg
from .forms import Form, clifford, contract, mukai
from .scalars import ONE, Q, QI, QONE, QZERO, Scalar, ZERO


def _pairing_matrix(dim: int) -> linalg.Mat:
    half = Q(1, 0) / Q(2)
    p = linalg.zeros(2 * dim, 2 * dim)
    for i in range(dim):
        p[i][dim + i] = half
        p[dim + i][i] = half
    return p


class GCMap:
    """Candidate generalized complex structure: 2dim x 2dim rational matrix."""

    __slots__ = ("dim", "matrix")

    def __init__(self, dim: int, matrix: Sequence[Sequence[Q]]):
        if dim <= 0 or dim % 2 != 0:
            raise ValueError("V must have positive even dimension, got %d" % dim)
        m = [list(row) for row in matrix]
        if len(m) != 2 * dim or any(len(r) != 2 * dim for r in m):
            raise ValueError("matrix must be %d x %d" % (2 * dim, 2 * dim))
        for row in m:
            for x in row:
                if not isinstance(x, Q):
                    raise TypeError("matrix entries must be Q")
                if not x.is_real():
                    raise ValueError("matrix entries must be real rationals")
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "matrix", m)

    def __setattr__(self, name, value):
        raise AttributeError("GCMap is immutable")

    @property
    def half_dim(self) -> int:
        return self.dim // 2

    def column(self, j: int) -> linalg.Vec:
        return [self.matrix[i][j] for i in range(2 * self.dim)]

    def __eq__(self, other):
        if not isinstance(other, GCMap):
            return NotImplemented
        return self.dim == other.dim and self.matrix == other.matrix


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    failures: Tuple[str, ...] = ()


@dataclass(frozen=True)
class IsotropicSubspace:
    """Basis of an isotropic subspace of complexified V + V*."""

    dim_v: int
    basis: Tuple[Tuple[Q, ...], ...]

    def __post_init__(self):
        rows = [list(v) for v in self.basis]
        if rows and linalg.rank(rows) != len(rows):
            raise ValueError("basis vectors are linearly dependent")
        p = _pairing_matrix(self.dim_v)
        for a in rows:
            for b in rows:
                val = linalg.sum_q(
                    a[i] * p[i][j] * b[j]
                    for i in range(2 * self.dim_v)
                    for j in range(2 * self.dim_v)
                    if not p[i][j].is_zero()
                )
                if not val.is_zero():
                    raise ValueError("subspace is not isotropic")

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def conjugate_basis(self) -> Tuple[Tuple[Q, ...], ...]:
        return tuple(tuple(x.conjugate() for x in v) for v in self.basis)


def validate(j: GCMap) -> ValidationReport:
    """Check J^2 = -1 and orthogonality for the canonical pairing."""
    failures = []
    n2 = 2 * j.dim
    sq = linalg.mat_mul(j.matrix, j.matrix)
    if sq != linalg.mat_scale(linalg.identity(n2), Q(-1)):
        failures.append("J^2 != -1")
    p = _pairing_matrix(j.dim)
    jt = linalg.transpose(j.matrix)
    if linalg.mat_mul(jt, linalg.mat_mul(p, j.matrix)) != p:
        failures.append("J does not preserve the canonical pairing")
    return ValidationReport(ok=not failures, failures=tuple(failures))


def i_eigenspace(j: GCMap) -> IsotropicSubspace:
    """Kernel of J - i over the Gaussian rationals; must have dimension dim V."""
    report = validate(j)
    if not report.ok:
        raise ValueError("invalid structure: %s" % "; ".join(report.failures))
    n2 = 2 * j.dim
    m = [
        [Q(j.matrix[r][c].re) - (QI if r == c else QZERO) for c in range(n2)]
        for r in range(n2)
    ]
    basis = linalg.kernel_basis(m)
    if len(basis) != j.dim:
        raise ValueError(
            "i-eigenspace has dimension %d, expected %d" % (len(basis), j.dim)
        )
    space = IsotropicSubspace(j.dim, tuple(tuple(v) for v in basis))
    stacked = [list(v) for v in space.basis] + [list(v) for v in space.conjugate_basis()]
    if linalg.rank(stacked) != n2:
        raise ValueError("eigenspace meets its conjugate; structure is not valid")
    return space


def type_of(j: GCMap) -> int:
    """Corank of the projection of the i-eigenspace to the complexified V."""
    space = i_eigenspace(j)
    proj = [list(v[: j.dim]) for v in space.basis]
    return j.dim - linalg.rank(proj)


def _vec_of_form(f: Form, masks: Sequence[int]) -> linalg.Vec:
    return [f.terms.get(m, ZERO).as_q() for m in masks]


def _form_of_vec(v: linalg.Vec, masks: Sequence[int], n: int) -> Form:
    return Form(n, {m: Scalar.from_q(c) for m, c in zip(masks, v)})


def _all_masks(n: int) -> List[int]:
    return sorted(range(1 << n), key=lambda m: (m.bit_count(), m))


def _clifford_matrix(v: Sequence[Q], n: int, masks: Sequence[int]) -> linalg.Mat:
    def act(f: Form) -> Form:
        return clifford([Scalar.from_q(x) for x in v], f)

    basis = [_form_of_vec([QONE if i == k else QZERO for i in range(len(masks))], masks, n)
             for k in range(len(masks))]
    return linalg.operator_matrix(act, basis, lambda f: _vec_of_form(f, masks))


def pure_spinor(space: IsotropicSubspace) -> Form:
    """Generator of the annihilator line of a maximal isotropic subspace.

    Normalized so the first coefficient (term order: degree, then index
    order) of the lowest nonzero degree is 1.
    """
    n = space.dim_v
    if space.dimension != n:
        raise ValueError(
            "subspace has dimension %d, maximal isotropic needs %d"
            % (space.dimension, n)
        )
    masks = _all_masks(n)
    rows: linalg.Mat = []
    for v in space.basis:
        rows.extend(_clifford_matrix(v, n, masks))
    kernel = linalg.kernel_basis(rows, ncols=len(masks))
    if len(kernel) != 1:
        raise ValueError(
            "annihilator line has dimension %d, expected 1" % len(kernel)
        )
    return _normalize_spinor(_form_of_vec(kernel[0], masks, n))


def _normalize_spinor(f: Form) -> Form:
    lead = min(f.terms, key=lambda m: (m.bit_count(), m))
    return f.scale(ONE / f.terms[lead])


@dataclass(frozen=True)
class AnnihilatorReport:
    space: IsotropicSubspace
    maximal_isotropic: bool
    nondegenerate: bool
    transverse: bool


def annihilator(phi: Form) -> AnnihilatorReport:
    """Clifford annihilator of a nonzero form, with the purity flags."""
    if phi.is_zero():
        raise ValueError("annihilator of the zero form")
    n = phi.n
    masks = _all_masks(n)
    target = _vec_of_form(phi, masks)
    cols = []
    for k in range(2 * n):
        v = [QONE if i == k else QZERO for i in range(2 * n)]
        mat = _clifford_matrix(v, n, masks)
        cols.append(linalg.mat_vec(mat, target))
    system = [[cols[k][r] for k in range(2 * n)] for r in range(len(masks))]
    basis = linalg.kernel_basis(system, ncols=2 * n)
    space = IsotropicSubspace(n, tuple(tuple(v) for v in basis))
    pairing = mukai(phi, phi.conjugate())
    transverse = False
    if basis:
        stacked = [list(v) for v in space.basis] + [
            list(v) for v in space.conjugate_basis()
        ]
        transverse = linalg.rank(stacked) == 2 * len(basis)
    return AnnihilatorReport(
        space=space,
        maximal_isotropic=space.dimension == n,
        nondegenerate=not pairing.is_zero(),
        transverse=transverse,
    )


def b_transform(j: GCMap, b: Form) -> GCMap:
    """Shear the structure by a real 2-form: J -> e^B J e^-B."""
    if not (b.is_zero() or b.is_homogeneous(2)):
        raise ValueError("B-field must be homogeneous of degree 2")
    if b.n != j.dim:
        raise ValueError("B-field lives on %d generators, structure on %d" % (b.n, j.dim))
    bm = _b_matrix(b)
    n = j.dim
    eb = linalg.identity(2 * n)
    ebm = linalg.identity(2 * n)
    for r in range(n):
        for c in range(n):
            eb[n + r][c] = bm[r][c]
            ebm[n + r][c] = -bm[r][c]
    out = linalg.mat_mul(eb, linalg.mat_mul(j.matrix, ebm))
    result = GCMap(n, out)
    report = validate(result)
    if not report.ok:
        raise ValueError("B-transform produced an invalid structure: %s" % (report.failures,))
    return result


def _b_matrix(b: Form) -> linalg.Mat:
    """Matrix of X -> i_X B as a map V -> V* (rows: covector components)."""
    n = b.n
    out = linalg.zeros(n, n)
    for col in range(n):
        cov = contract(col + 1, b)
        for mask, coeff in cov.terms.items():
            row = mask.bit_length() - 1
            q = coeff.as_q()
            if not q.is_real():
                raise ValueError("B-field must be real")
            out[row][col] = q
    return out


def transform_vector(b: Form, v: Sequence[Q]) -> List[Q]:
    """Apply the shear e^B to a V+V* coefficient vector."""
    n = b.n
    bm = _b_matrix(b)
    out = list(v)
    for r in range(n):
        acc = out[n + r]
        for c in range(n):
            if not bm[r][c].is_zero():
                acc = acc + bm[r][c] * v[c]
        out[n + r] = acc
    return out


# -- the induced grading on forms -------------------------------------------------


@dataclass(frozen=True)
class UGrading:
    """Eigenspace decomposition of forms under the lifted structure action.

    Level k runs over -n..n (n the half-dimension); level k is the
    eigenspace with eigenvalue -k*i, and level n is the canonical
    (pure-spinor) line.
    """

    dim_v: int
    levels: Tuple[int, ...]
    bases: dict = field(hash=False)
    _masks: Tuple[int, ...] = field(hash=False, repr=False)
    _inverse: tuple = field(hash=False, repr=False)

    @property
    def half_dim(self) -> int:
        return self.dim_v // 2

    def dimension(self, k: int) -> int:
        return len(self.bases.get(k, ()))

    def decompose(self, f: Form) -> dict:
        """Split a form into its level components (zero parts omitted)."""
        if f.n != self.dim_v:
            raise ValueError("form does not live on this frame")
        if f.parameters():
            raise ValueError("decomposition needs parameter-free coefficients")
        vec = _vec_of_form(f, self._masks)
        coeffs = linalg.mat_vec([list(r) for r in self._inverse], vec)
        out = {}
        pos = 0
        for k in self.levels:
            part = Form.zero(self.dim_v)
            for b in self.bases[k]:
                c = coeffs[pos]
                pos += 1
                if not c.is_zero():
                    part = part + b.scale(Scalar.from_q(c))
            if not part.is_zero():
                out[k] = part
        return out

    def project(self, f: Form, k: int) -> Form:
        return self.decompose(f).get(k, Form.zero(self.dim_v))


def lifted_action_matrix(j: GCMap) -> linalg.Mat:
    """Matrix on forms of the quadratic Clifford lift of the structure.

    The lift uses the 2-form with coefficient matrix -J P (P the pairing),
    acting through commutators; with the Clifford relation u.v. + v.u. =
    2<u,v> and P^2 = 1/4 this is exactly the normalization that satisfies
    [L, v.] = -(Jv). for every v, including structures that do not commute
    with P (for example B-field shears).  An additive scalar then anchors
    the canonical line at eigenvalue -n*i.
    """
    n = j.dim
    masks = _all_masks(n)
    dim = len(masks)
    p = _pairing_matrix(n)
    coeff = linalg.mat_scale(linalg.mat_mul(j.matrix, p), Q(-1))
    total = linalg.zeros(dim, dim)
    cliff = []
    for a in range(2 * n):
        v = [QONE if i == a else QZERO for i in range(2 * n)]
        cliff.append(_clifford_matrix(v, n, masks))
    for a in range(2 * n):
        for b in range(a + 1, 2 * n):
            w = coeff[a][b]
            if w.is_zero():
                continue
            comm = linalg.mat_sub(
                linalg.mat_mul(cliff[a], cliff[b]),
                linalg.mat_mul(cliff[b], cliff[a]),
            )
            total = linalg.mat_add(total, linalg.mat_scale(comm, w))
    return total


def uk_grading(j: GCMap) -> UGrading:
    """Decompose forms into integer levels -n..n; level n is the spinor line."""
    n = j.dim
    half = n // 2
    masks = _all_masks(n)
    dim = len(masks)
    op = lifted_action_matrix(j)

    spinor = pure_spinor(i_eigenspace(j))
    svec = _vec_of_form(spinor, masks)
    image = linalg.mat_vec(op, svec)
    lead = next(i for i, x in enumerate(svec) if not x.is_zero())
    eigen = image[lead] / svec[lead]
    if [x * eigen for x in svec] != image:
        raise ValueError("canonical line is not an eigenvector of the lift")
    shift = Q(0, -half) - eigen
    if not shift.is_zero():
        op = linalg.mat_add(op, linalg.mat_scale(linalg.identity(dim), shift))

    bases = {}
    columns = []
    levels = list(range(half, -half - 1, -1))
    count = 0
    for k in levels:
        target = linalg.mat_add(op, linalg.mat_scale(linalg.identity(dim), Q(0, k)))
        kernel = linalg.kernel_basis(target)
        forms = []
        for v in kernel:
            form = _normalize_spinor(_form_of_vec(v, masks, n))
            columns.append(_vec_of_form(form, masks))
            forms.append(form)
        bases[k] = tuple(forms)
        count += len(kernel)
    if count != dim:
        raise ValueError(
            "eigenvalue spectrum escapes the expected levels "
            "(%d of %d dimensions found): lift convention bug" % (count, dim)
        )
    change = [[columns[c][r] for c in range(dim)] for r in range(dim)]
    inverse = linalg.invert(change)
    return UGrading(
        dim_v=n,
        levels=tuple(levels),
        bases=bases,
        _masks=tuple(masks),
        _inverse=tuple(tuple(r) for r in inverse),
    )


@dataclass(frozen=True)
class KahlerReport:
    ok: bool
    commute: bool
    positive: bool
    detail: str = ""


def kahler_check(j1: GCMap, j2: GCMap) -> KahlerReport:
    """Commutation plus exact positivity of the induced symmetric pairing."""
    for j in (j1, j2):
        rep = validate(j)
        if not rep.ok:
            raise ValueError("invalid structure: %s" % "; ".join(rep.failures))
    if j1.dim != j2.dim:
        raise ValueError("structures live on different spaces")
    a = linalg.mat_mul(j1.matrix, j2.matrix)
    b = linalg.mat_mul(j2.matrix, j1.matrix)
    if a != b:
        return KahlerReport(False, False, False, "structures do not commute")
    n2 = 2 * j1.dim
    p = _pairing_matrix(j1.dim)
    g = linalg.mat_mul(p, linalg.mat_scale(a, Q(-1)))
    gram = [[g[r][c] for c in range(n2)] for r in range(n2)]
    for size in range(1, n2 + 1):
        minor = [row[:size] for row in gram[:size]]
        d = linalg.det(minor)
        if not (d.is_real() and d.re > 0):
            return KahlerReport(
                False, True, False,
                "leading principal minor %d is %s, not positive" % (size, d),
            )
    return KahlerReport(True, True, True)


# -- standard structures --------------------------------------------------------


def symplectic_map(omega: Form) -> GCMap:
    """Structure with block form ((0, -omega^-1), (omega, 0))."""
    if not omega.is_homogeneous(2) or omega.is_zero():
        raise ValueError("need a nonzero homogeneous 2-form")
    n = omega.n
    om = _b_matrix(omega)
    if linalg.rank(om) != n:
        raise ValueError("2-form is degenerate")
    inv = linalg.invert(om)
    m = linalg.zeros(2 * n, 2 * n)
    for r in range(n):
        for c in range(n):
            m[r][n + c] = -inv[r][c]
            m[n + r][c] = om[r][c]
    return GCMap(n, m)


def complex_structure(n_pairs: int, sign: int = 1) -> GCMap:
    """Standard constant complex structure pairing generators (2j-1, 2j).

    With sign=+1 the canonical line is spanned by the product of
    e_{2j-1} + i e_{2j}; sign=-1 gives the conjugate orientation, which is
    the one compatible with symplectic_map(sum of e_{2j-1}^e_{2j}).
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    n = 2 * n_pairs
    m = linalg.zeros(2 * n, 2 * n)
    s = Q(sign)
    for jj in range(n_pairs):
        a, b = 2 * jj, 2 * jj + 1
        m[b][a] = -s
        m[a][b] = s
        m[n + b][n + a] = -s
        m[n + a][n + b] = s
    return GCMap(n, m)
