"""Lefschetz-type operator algebra on a graded module.

Builds multiplication operators, the counting operator h with h = (d - 2n)
on degree d, dual Lefschetz operators as sl2 completions, their linear
extension to the whole degree-2 space, the model monodromy commutator
M = [L_beta, Lambda_sbar] attached to a hyperbolic frame, and the joint
eigenspace bigrading (p, q, i) refining every graded piece.

Scalar conventions.  The sl2 completion Lambda_x of (L_x, h) scales like
1/x, so the assignment x -> Lambda_x is not linear; what is linear is
x -> (q(x)/2) * Lambda_x, which agrees with Lambda_x exactly on the quadric
q(x) = 2.  lambda_linear implements that linear extension, verifying
basis-independence on two independently chosen anisotropic bases.
"""

from __future__ import annotations

import random
import weakref
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from hklab.linalg import (
    QQ,
    EigenDefectError,
    LinalgError,
    Mat,
    Subspace,
    qq,
    rank,
    simultaneous_eigenspaces,
    solve,
    vec,
)
from hklab.quadforms import QuadraticSpace, hyperbolic_pair, reflection
from hklab.verbitsky import AlgebraElement, GradedAlgebra

_ZERO = QQ(0)
_ONE = QQ(1)


class OperatorError(ValueError):
    """Violated precondition in operator construction."""


class NotLefschetzError(OperatorError):
    """The chosen degree-2 class does not generate a full sl2 ladder."""


# -- graded operators ---------------------------------------------------------

class GradedOperator:
    """Degree-homogeneous endomorphism stored blockwise.

    degrees maps cohomological degree to dimension; blocks[d] is the matrix
    of the map from degree d to degree d + offset.  Missing blocks (or
    blocks whose target degree is absent) are zero maps.
    """

    __slots__ = ("degrees", "offset", "blocks")

    def __init__(self, degrees: dict, offset: int, blocks: dict):
        self.degrees = dict(degrees)
        self.offset = offset
        self.blocks = {}
        for d, m in blocks.items():
            exp = (self.dim(d + offset), self.dim(d))
            if m.shape != exp:
                raise OperatorError(
                    f"block at degree {d} has shape {m.shape}, expected {exp}")
            self.blocks[d] = m

    def dim(self, d: int) -> int:
        return self.degrees.get(d, 0)

    def block(self, d: int) -> Mat:
        m = self.blocks.get(d)
        if m is None:
            m = Mat.zeros(self.dim(d + self.offset), self.dim(d))
        return m

    def apply(self, degree: int, v: Sequence) -> list:
        return self.block(degree).times_vec(vec(v))

    def apply_element(self, a: AlgebraElement) -> AlgebraElement:
        out = self.apply(a.degree, a.coords)
        return AlgebraElement(a.degree + self.offset, tuple(out))

    # -- algebra of operators ------------------------------------------------

    def _same_grading(self, other: "GradedOperator") -> None:
        if self.degrees != other.degrees:
            raise OperatorError("operators live on different graded spaces")

    def __add__(self, other: "GradedOperator") -> "GradedOperator":
        self._same_grading(other)
        if self.offset != other.offset:
            raise OperatorError("cannot add operators of different offsets")
        return GradedOperator(
            self.degrees, self.offset,
            {d: self.block(d) + other.block(d) for d in self.degrees
             if self.dim(d) and self.dim(d + self.offset)})

    def __sub__(self, other: "GradedOperator") -> "GradedOperator":
        return self + other.scale(-1)

    def scale(self, c) -> "GradedOperator":
        return GradedOperator(self.degrees, self.offset,
                              {d: m.scale(c) for d, m in self.blocks.items()})

    def compose(self, other: "GradedOperator") -> "GradedOperator":
        """self after other."""
        self._same_grading(other)
        off = self.offset + other.offset
        blocks = {}
        for d in self.degrees:
            if self.dim(d) and self.dim(d + off):
                blocks[d] = self.block(d + other.offset) * other.block(d)
        return GradedOperator(self.degrees, off, blocks)

    def is_zero(self) -> bool:
        return all(m.is_zero() for m in self.blocks.values())

    def __eq__(self, other) -> bool:
        if not isinstance(other, GradedOperator):
            return NotImplemented
        if self.degrees != other.degrees or self.offset != other.offset:
            return False
        return all(self.block(d) == other.block(d) for d in self.degrees)

    def __hash__(self):
        return hash((self.offset, tuple(sorted(self.degrees.items()))))

    def power(self, k: int) -> "GradedOperator":
        acc = identity_operator(self.degrees)
        for _ in range(k):
            acc = acc.compose(self)
        return acc

    def proportionality(self, other: "GradedOperator"):
        """Scalar c with self == c * other, or None."""
        self._same_grading(other)
        if self.offset != other.offset:
            return None
        c = None
        for d in sorted(self.degrees):
            a, b = self.block(d), other.block(d)
            for i in range(a.rows):
                for j in range(a.cols):
                    x, y = a.data[i][j], b.data[i][j]
                    if y == 0:
                        if x != 0:
                            return None
                        continue
                    r = x / y
                    if c is None:
                        c = r
                    elif c != r:
                        return None
        return c

    def to_json(self) -> dict:
        return {
            "offset": self.offset,
            "degrees": {str(d): n for d, n in sorted(self.degrees.items())},
            "blocks": {str(d): [[str(e) for e in row] for row in m.data]
                       for d, m in sorted(self.blocks.items())},
        }

    @staticmethod
    def from_json(obj: dict) -> "GradedOperator":
        degrees = {int(d): int(n) for d, n in obj["degrees"].items()}
        blocks = {int(d): Mat.from_rows([[qq(e) for e in row] for row in m])
                  for d, m in obj["blocks"].items()}
        return GradedOperator(degrees, int(obj["offset"]), blocks)


def identity_operator(degrees: dict) -> GradedOperator:
    return GradedOperator(degrees, 0,
                          {d: Mat.identity(n) for d, n in degrees.items() if n})


def commutator_op(a: GradedOperator, b: GradedOperator) -> GradedOperator:
    return a.compose(b) - b.compose(a)


def total_matrix(op: GradedOperator) -> tuple:
    """Flatten a graded operator to one matrix on the direct sum.

    Returns (matrix, offsets) with offsets mapping degree -> starting index
    in the concatenated coordinate order (degrees ascending).
    """
    degs = sorted(d for d, n in op.degrees.items() if n)
    offsets = {}
    pos = 0
    for d in degs:
        offsets[d] = pos
        pos += op.degrees[d]
    total = pos
    m = Mat.zeros(total, total)
    for d in degs:
        tgt = d + op.offset
        if op.degrees.get(tgt, 0) == 0:
            continue
        blk = op.block(d)
        r0, c0 = offsets[tgt], offsets[d]
        for i in range(blk.rows):
            for j in range(blk.cols):
                m.data[r0 + i][c0 + j] = blk.data[i][j]
    return m, offsets


# -- basic operators ----------------------------------------------------------

def lefschetz(alg: GradedAlgebra, x: Sequence) -> GradedOperator:
    """Multiplication by the degree-2 class with coordinate vector x."""
    x = vec(x)
    degrees = alg.dims()
    blocks = {}
    for k in range(0, 2 * alg.n):
        tensor = alg.tensors[(1, k)] if k >= 1 else None
        src, tgt = alg.level_dim(k), alg.level_dim(k + 1)
        m = Mat.zeros(tgt, src)
        for j in range(src):
            if k == 0:
                col = x
                for t, val in enumerate(col):
                    m.data[t][j] = val
                continue
            for s, xs in enumerate(x):
                if not xs:
                    continue
                entry = tensor.get((s, j))
                if not entry:
                    continue
                for t, val in entry.items():
                    m.data[t][j] += xs * val
        blocks[2 * k] = m
    return GradedOperator(degrees, 2, blocks)


def grading(alg_or_degrees, n: Optional[int] = None) -> GradedOperator:
    """Counting operator: (d - 2n) times the identity on degree d."""
    if isinstance(alg_or_degrees, GradedAlgebra):
        degrees = alg_or_degrees.dims()
        n = alg_or_degrees.n
    else:
        degrees = dict(alg_or_degrees)
        if n is None:
            raise OperatorError("grading needs n for a bare degree map")
    blocks = {d: Mat.identity(m).scale(d - 2 * n)
              for d, m in degrees.items() if m}
    return GradedOperator(degrees, 0, blocks)


# -- sl2 completion -----------------------------------------------------------

def sl2_complete(lop: GradedOperator, n: int) -> GradedOperator:
    """The unique degree -2 operator F with (lop, F, h) an sl2 triple.

    Decomposes the module into ladders generated by primitive vectors
    (kernels of the appropriate power of lop at or below the middle weight)
    and applies the standard lowering formula F(L^j p) = j(lam - j + 1)
    L^{j-1} p on a ladder of lowest weight -lam.  Raises NotLefschetzError
    when the ladders fail to span, i.e. when lop is not a Lefschetz-type
    raising operator.
    """
    degrees = lop.degrees
    max_lam = max((2 * n - d for d, m in degrees.items() if m), default=0)
    powers = {0: identity_operator(degrees)}
    for i in range(1, max_lam + 2):
        powers[i] = lop.compose(powers[i - 1])
    chains = []  # (start_degree, lam, [vectors per step])
    for d in sorted(degrees):
        if degrees[d] == 0:
            continue
        w = d - 2 * n
        if w > 0:
            continue
        lam = -w
        ker = _kernel_of_block(powers[lam + 1], d)
        for pvec in ker.vectors():
            steps = [pvec]
            cur = pvec
            for _ in range(lam):
                cur = lop.apply(d + 2 * (len(steps) - 1), cur)
                steps.append(cur)
            chains.append((d, lam, steps))

    adapted = {d: [] for d in degrees if degrees[d]}
    images = {d: [] for d in degrees if degrees[d]}
    for d, lam, steps in chains:
        for j, v in enumerate(steps):
            e = d + 2 * j
            adapted[e].append(v)
            coeff = QQ(j * (lam - j + 1))
            if j == 0:
                images[e].append([_ZERO] * degrees.get(e - 2, 0))
            else:
                images[e].append([coeff * c for c in steps[j - 1]])

    blocks = {}
    from hklab.linalg import invert
    for e, cols in adapted.items():
        dim_e = degrees[e]
        if len(cols) != dim_e:
            raise NotLefschetzError(
                f"ladders span {len(cols)} of {dim_e} dimensions in degree {e}")
        basis = Mat.from_cols(cols)
        try:
            binv = invert(basis)
        except LinalgError:
            raise NotLefschetzError(
                f"ladder vectors are dependent in degree {e}") from None
        img = Mat.from_cols(images[e]) if degrees.get(e - 2, 0) else \
            Mat.zeros(0, dim_e)
        blocks[e] = img * binv
    return GradedOperator(degrees, -2, blocks)


def _kernel_of_block(op: GradedOperator, d: int) -> Subspace:
    from hklab.linalg import kernel_basis
    return kernel_basis(op.block(d))


def dual_lefschetz(alg: GradedAlgebra, x: Sequence) -> GradedOperator:
    """sl2 dual of multiplication by x; requires q(x) != 0 and hard Lefschetz."""
    x = vec(x)
    if alg.space.quad(x) == 0:
        raise NotLefschetzError("dual Lefschetz needs an anisotropic class")
    lop = lefschetz(alg, x)
    lam = sl2_complete(lop, alg.n)
    h = grading(alg)
    if commutator_op(lop, lam) != h:
        raise NotLefschetzError("sl2 completion failed the bracket identity")
    return lam


# -- linear extension of the dual Lefschetz -----------------------------------

_LAMBDA_CACHE: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def anisotropic_basis(space: QuadraticSpace, variant: int = 0) -> list:
    """Deterministic basis of anisotropic vectors.

    The two variants prefer different coefficient patterns (plain and
    positive combinations versus negative combinations first), so on any
    space of dimension at least two they produce genuinely different bases;
    the linear-extension check compares the results.
    """
    n = space.dim
    chosen: list = []

    def unit(i):
        return [_ONE if j == i else _ZERO for j in range(n)]

    def combo(i, j, c):
        e_i, e_j = unit(i), unit(j)
        return [a + c * b for a, b in zip(e_i, e_j)]

    def candidates(i):
        coeff_order = (1, 2, -1, -2, 3) if variant == 0 else (-1, -2, 1, 2, 3)
        outs = [] if variant else [unit(i)]
        for c in coeff_order:
            for shift in range(1, n):
                outs.append(combo(i, (i + shift) % n, c))
        outs.append(unit(i))
        return outs

    for i in range(n):
        picked = None
        for cand in candidates(i):
            if space.quad(cand) == 0:
                continue
            if rank(Mat.from_cols(chosen + [cand])) == len(chosen) + 1:
                picked = cand
                break
        if picked is None:
            raise OperatorError("could not assemble an anisotropic basis")
        chosen.append(picked)
    return chosen


def linear_dual_table(space: QuadraticSpace, n: int, l_of: Callable,
                      sl2_check: bool = True) -> list:
    """Linear dual-Lefschetz operators for the unit vectors of the space.

    l_of(x) must return the raising operator of a degree-2 vector x.  Each
    anisotropic basis vector x contributes (q(x)/2) times its sl2
    completion; the table is rebuilt from a second, differently chosen
    anisotropic basis and must agree exactly (well-definedness of the
    linear extension).
    """
    def build(variant: int) -> list:
        basis = anisotropic_basis(space, variant=variant)
        duals = []
        for x in basis:
            lop = l_of(x)
            lam = sl2_complete(lop, n)
            if sl2_check and commutator_op(lop, lam) != grading(lop.degrees, n):
                raise NotLefschetzError(
                    "sl2 completion failed the bracket identity")
            duals.append(lam.scale(space.quad(x) / 2))
        bmat = Mat.from_cols(basis)
        out = []
        for s in range(space.dim):
            unit = [_ONE if j == s else _ZERO for j in range(space.dim)]
            coeffs = solve(bmat, unit)
            op = None
            for c, dual in zip(coeffs, duals):
                if c == 0:
                    continue
                term = dual.scale(c)
                op = term if op is None else op + term
            out.append(op)
        return out

    table = build(0)
    check = build(1)
    for a, b in zip(table, check):
        if a != b:
            raise OperatorError(
                "linear extension of the dual Lefschetz is basis-dependent")
    return table


def _lambda_table(alg: GradedAlgebra) -> list:
    table = _LAMBDA_CACHE.get(alg)
    if table is None:
        table = linear_dual_table(alg.space, alg.n,
                                  lambda x: lefschetz(alg, x))
        _LAMBDA_CACHE[alg] = table
    return table


def lambda_linear(alg: GradedAlgebra, y: Sequence) -> GradedOperator:
    """Linear-in-y dual Lefschetz: agrees with dual_lefschetz on q(y) = 2.

    For general anisotropic y the result is (q(y)/2) * dual_lefschetz(y);
    on isotropic y it is defined by linearity alone.  Basis independence is
    verified once per algebra against a second anisotropic basis.
    """
    y = vec(y)
    table = _lambda_table(alg)
    op = None
    for c, lam_s in zip(y, table):
        if c == 0:
            continue
        term = lam_s.scale(c)
        op = term if op is None else op + term
    if op is None:
        raise OperatorError("lambda_linear of the zero vector")
    return op


# -- frames -------------------------------------------------------------------

@dataclass(frozen=True)
class HodgeFrame:
    """Two marked hyperbolic pairs (s, sbar) and (beta, eta) plus complement.

    Invariants: all four vectors isotropic, q(s, sbar) = q(beta, eta) = 1,
    the two planes mutually orthogonal, u_complement the orthogonal
    complement of all four.
    """

    space: QuadraticSpace
    s: list
    sbar: list
    beta: list
    eta: list
    u_complement: Subspace

    def __post_init__(self):
        sp = self.space
        for name in ("s", "sbar", "beta", "eta"):
            object.__setattr__(self, name, vec(getattr(self, name)))
        vs = [self.s, self.sbar, self.beta, self.eta]
        if any(sp.quad(v) != 0 for v in vs):
            raise OperatorError("frame vectors must be isotropic")
        if sp.bilinear(self.s, self.sbar) != 1 or sp.bilinear(self.beta, self.eta) != 1:
            raise OperatorError("frame pairs must have unit pairing")
        for a in (self.s, self.sbar):
            for b in (self.beta, self.eta):
                if sp.bilinear(a, b) != 0:
                    raise OperatorError("frame planes must be orthogonal")
        expected = _frame_complement(sp, vs)
        if self.u_complement != expected:
            raise OperatorError("u_complement is not the orthogonal complement")

    def vectors(self) -> list:
        return [self.s, self.sbar, self.beta, self.eta]

    def to_json(self) -> dict:
        return {name: [str(c) for c in getattr(self, name)]
                for name in ("s", "sbar", "beta", "eta")}


def _frame_complement(space: QuadraticSpace, vectors: list) -> Subspace:
    from hklab.linalg import kernel_basis
    rows = [space.gram.times_vec(v) for v in vectors]
    return kernel_basis(Mat.from_rows(rows))


def build_frame(space: QuadraticSpace, seed: int = 0) -> HodgeFrame:
    """Deterministic frame; seed 0 is the canonical one, other seeds shuffle
    it by a product of two reflections (a special isometry), so every seed
    yields a valid frame and different seeds yield genuinely different ones.
    """
    s, sbar = hyperbolic_pair(space)
    comp = _frame_complement(space, [s, sbar]).vectors()
    sub = _restricted_space(space, comp)
    e2, f2 = hyperbolic_pair(sub)
    beta = _unrestrict(comp, e2)
    eta = _unrestrict(comp, f2)
    if seed:
        rng = random.Random(seed)
        g = None
        while g is None:
            u1 = [QQ(rng.randint(-2, 2)) for _ in range(space.dim)]
            u2 = [QQ(rng.randint(-2, 2)) for _ in range(space.dim)]
            if space.quad(u1) != 0 and space.quad(u2) != 0:
                g = reflection(space, u1) * reflection(space, u2)
        s, sbar = g.times_vec(s), g.times_vec(sbar)
        beta, eta = g.times_vec(beta), g.times_vec(eta)
    return HodgeFrame(space, s, sbar, beta, eta,
                      _frame_complement(space, [s, sbar, beta, eta]))


def _restricted_space(space: QuadraticSpace, basis: list) -> QuadraticSpace:
    g = Mat.from_rows([[space.bilinear(a, b) for b in basis] for a in basis])
    return QuadraticSpace(g)


def _unrestrict(basis: list, coords: list) -> list:
    out = [_ZERO] * len(basis[0])
    for c, b in zip(coords, basis):
        if c:
            out = [o + c * x for o, x in zip(out, b)]
    return out


def transport_frame(frame: HodgeFrame, isometry) -> HodgeFrame:
    """Apply an isometry to every frame vector."""
    sp = frame.space
    vs = [isometry.apply(v) for v in frame.vectors()]
    return HodgeFrame(sp, vs[0], vs[1], vs[2], vs[3],
                      _frame_complement(sp, vs))


# -- the model monodromy operator and its sl2 ---------------------------------

def build_M(alg: GradedAlgebra, frame: HodgeFrame) -> GradedOperator:
    """M = [L_beta, Lambda_sbar]: the degree-0 model monodromy operator."""
    return commutator_op(lefschetz(alg, frame.beta),
                         lambda_linear(alg, frame.sbar))


@dataclass(frozen=True)
class SL2Triple:
    e: GradedOperator
    f: GradedOperator
    h: GradedOperator


def verify_sl2(t: SL2Triple) -> bool:
    """Exact check of [e,f] = h, [h,e] = 2e, [h,f] = -2f."""
    return (commutator_op(t.e, t.f) == t.h
            and commutator_op(t.h, t.e) == t.e.scale(2)
            and commutator_op(t.h, t.f) == t.f.scale(-2))


@dataclass(frozen=True)
class FrameCalculus:
    """All frame operators of one graded module, computed exactly.

    alg is the source algebra when the operators come from a built
    instance, None when they come from an ingested operator module.
    """

    alg: Optional[GradedAlgebra]
    frame: HodgeFrame
    L_s: GradedOperator
    L_sbar: GradedOperator
    L_beta: GradedOperator
    L_eta: GradedOperator
    Lam_s: GradedOperator
    Lam_sbar: GradedOperator
    Lam_beta: GradedOperator
    Lam_eta: GradedOperator
    h: GradedOperator
    H_s: GradedOperator
    H_sbar: GradedOperator
    H_beta: GradedOperator
    M: GradedOperator
    E_M: GradedOperator
    F_M: GradedOperator
    H_M: GradedOperator
    m_bracket_scalar: QQ


def frame_calculus_generic(frame: HodgeFrame, n: int, l_of: Callable,
                           lam_of: Callable, h: GradedOperator,
                           alg: Optional[GradedAlgebra] = None) -> FrameCalculus:
    """Assemble L, Lambda, the Cartan operators and the M triple.

    E_M = 2M and F_M = 2[Lam_s, L_eta] follow the conventional doubling;
    with the linear Lambda normalisation their bracket is a *multiple* of
    H_M = H_beta - H_s, and the realised scalar (4 with these conventions)
    is recorded in m_bracket_scalar rather than silently rescaled.
    """
    L = {v: l_of(getattr(frame, v)) for v in ("s", "sbar", "beta", "eta")}
    Lam = {v: lam_of(getattr(frame, v)) for v in ("s", "sbar", "beta", "eta")}
    H_s = commutator_op(L["s"], Lam["sbar"])
    H_sbar = commutator_op(L["sbar"], Lam["s"])
    H_beta = commutator_op(L["beta"], Lam["eta"])
    M = commutator_op(L["beta"], Lam["sbar"])
    E_M = M.scale(2)
    F_M = commutator_op(Lam["s"], L["eta"]).scale(2)
    H_M = H_beta - H_s
    kappa = commutator_op(E_M, F_M).proportionality(H_M)
    if kappa is None:
        raise OperatorError("[E_M, F_M] is not proportional to H_beta - H_s")
    return FrameCalculus(alg, frame, L["s"], L["sbar"], L["beta"], L["eta"],
                         Lam["s"], Lam["sbar"], Lam["beta"], Lam["eta"],
                         h, H_s, H_sbar, H_beta, M, E_M, F_M, H_M, kappa)


def frame_calculus(alg: GradedAlgebra, frame: HodgeFrame) -> FrameCalculus:
    return frame_calculus_generic(
        frame, alg.n,
        lambda x: lefschetz(alg, x),
        lambda x: lambda_linear(alg, x),
        grading(alg), alg=alg)


def frame_triples(fc: FrameCalculus) -> dict:
    """The named sl2 triples attached to a frame.

    The M triple uses the bracket-normalised lowering operator
    F_M / m_bracket_scalar so that it is an honest sl2 triple; the raw
    doubled pair is kept in the calculus for reporting.
    """
    return {
        "sigma": SL2Triple(fc.L_s, fc.Lam_sbar, fc.H_s),
        "sigma_bar": SL2Triple(fc.L_sbar, fc.Lam_s, fc.H_sbar),
        "beta": SL2Triple(fc.L_beta, fc.Lam_eta, fc.H_beta),
        "eta": SL2Triple(fc.L_eta, fc.Lam_beta,
                         commutator_op(fc.L_eta, fc.Lam_beta)),
        "m": SL2Triple(fc.E_M, fc.F_M.scale(1 / fc.m_bracket_scalar), fc.H_M),
    }


# -- derivation checks ---------------------------------------------------------

@dataclass
class DerivationReport:
    trials: int
    passed: bool
    failures: list


def verify_derivation(alg: GradedAlgebra, op: GradedOperator,
                      trials: int = 100, seed: int = 0) -> DerivationReport:
    """Exact test of op(ab) = op(a) b + a op(b) on random homogeneous pairs."""
    rng = random.Random(seed)
    failures = []
    n = alg.n
    dims = alg.dims()
    count = 0
    while count < trials:
        ka = rng.randint(0, 2 * n)
        kb = rng.randint(0, 2 * n - ka)
        da, db = 2 * ka, 2 * kb
        if (da + db + op.offset) not in dims:
            continue
        a = alg.element(da, [rng.randint(-3, 3)
                             for _ in range(alg.level_dim(ka))])
        b = alg.element(db, [rng.randint(-3, 3)
                             for _ in range(alg.level_dim(kb))])
        count += 1
        lhs = op.apply_element(alg.multiply(a, b))
        rhs = alg.zero(lhs.degree)
        oa = op.apply_element(a)
        ob = op.apply_element(b)
        if oa.degree in dims:
            rhs = rhs + alg.multiply(oa, b)
        if ob.degree in dims:
            rhs = rhs + alg.multiply(a, ob)
        if lhs != rhs:
            failures.append({"a": a, "b": b, "lhs": lhs, "rhs": rhs})
            if len(failures) >= 3:
                break
    return DerivationReport(trials=count, passed=not failures,
                            failures=failures)


# -- the bigrading ------------------------------------------------------------

@dataclass(frozen=True)
class Bigrading:
    """Joint eigenspace decomposition indexed by (p, q, i) per degree."""

    n: int
    degrees: dict
    components: dict  # (p, q, i) -> Subspace of the degree p+q piece

    def dim(self, p: int, q: int, i: int) -> int:
        sub = self.components.get((p, q, i))
        return sub.dim if sub else 0

    def dims_table(self) -> dict:
        return {k: s.dim for k, s in sorted(self.components.items())}

    def degree_components(self, d: int) -> dict:
        return {k: s for k, s in self.components.items() if k[0] + k[1] == d}

    def hodge_dim(self, p: int, q: int) -> int:
        return sum(s.dim for (pp, qq_, _), s in self.components.items()
                   if pp == p and qq_ == q)

    def hodge_piece(self, p: int, q: int) -> Subspace:
        subs = [s for (pp, qq_, _), s in self.components.items()
                if pp == p and qq_ == q]
        if not subs:
            return Subspace.zero(self.degrees.get(p + q, 0))
        from hklab.linalg import subspace_sum
        acc = subs[0]
        for s in subs[1:]:
            acc = subspace_sum(acc, s)
        return acc

    def level(self, d: int) -> int:
        """Largest |p - q| over nonzero components in degree d (-1 if empty)."""
        lv = -1
        for (p, q, _i), s in self.components.items():
            if p + q == d and s.dim:
                lv = max(lv, abs(p - q))
        return lv


def bigrading_from_operators(degrees: dict, n: int, H_s: GradedOperator,
                             H_sbar: GradedOperator,
                             H_beta: GradedOperator) -> Bigrading:
    """Simultaneous eigenspaces of the three Cartan operators.

    p = eig(H_s) + n, q = eig(H_sbar) + n, i = p + q - n - eig(H_beta).
    Integer, semisimple spectra are verified degree by degree; a defect is
    a hard error since it would falsify the sl2 structure.
    """
    components = {}
    for d in sorted(degrees):
        if degrees[d] == 0:
            continue
        cands = []
        for p in range(0, d + 1):
            q = d - p
            for i in range(0, d + 1):
                cands.append((p - n, q - n, d - i - n))
        ops = [H_s.block(d), H_sbar.block(d), H_beta.block(d)]
        try:
            subs = simultaneous_eigenspaces(ops, cands)
        except EigenDefectError as exc:
            raise EigenDefectError(
                f"degree {d}: {exc} (spectrum not integral/semisimple)") from exc
        for (ps, qs, bs), sub in zip(cands, subs):
            if sub.dim == 0:
                continue
            p, q = ps + n, qs + n
            i = p + q - n - bs
            components[(p, q, i)] = sub
    return Bigrading(n, dict(degrees), components)


def bigrading(alg: GradedAlgebra, frame: HodgeFrame,
              fc: Optional[FrameCalculus] = None) -> Bigrading:
    if fc is None:
        fc = frame_calculus(alg, frame)
    return bigrading_from_operators(alg.dims(), alg.n,
                                    fc.H_s, fc.H_sbar, fc.H_beta)
