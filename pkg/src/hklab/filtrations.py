"""Weight filtrations of nilpotent operators and the perverse filtration.

The weight filtration centred at k of a nilpotent operator N is the unique
increasing chain W_0 <= ... <= W_{2k} with N W_i <= W_{i-2} and with N^i
inducing bijections Gr_{k+i} -> Gr_{k-i}.  It is constructed here from
Jordan chains (every chain of length l contributes the standard ladder of
weights k+l-1, k+l-3, ..., k-l+1) and then re-verified against both
defining properties, so the construction is self-certifying.

The perverse chain of an isotropic degree-2 class beta on degree d is
computed by the kernel-sum formula

    P_i H^d = sum_j beta^j . Ker(beta^{n-(d-2j)+i+1} : H^{d-2j} -> ...)

with Ker(beta^e) read as 0 for e <= 0, and is cross-checked against the
weight filtration of multiplication by beta on the total space under the
reindexing W_i  with H^d  =  P_{d+i-2n} H^d.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from hklab.linalg import (
    IncrementalRref,
    Mat,
    Subspace,
    kernel_basis,
    subspace_sum,
    nilpotence_index,
)
from hklab.llv import Bigrading, GradedOperator, lefschetz
from hklab.verbitsky import GradedAlgebra


class FiltrationError(ValueError):
    """Violated precondition in a filtration computation."""


# -- Jordan chains ------------------------------------------------------------

def jordan_chains(n_mat: Mat) -> list:
    """Jordan chains of a nilpotent matrix as lists [v, Nv, N^2 v, ...].

    Chains are extracted longest first.  At each length l the new chain
    heads complete ker N^{l-1} plus the descended tails of longer chains
    inside ker N^l, which makes the union of all chain vectors a basis.
    """
    dim = n_mat.rows
    if dim == 0:
        return []
    s = nilpotence_index(n_mat)
    kernels = {0: Subspace.zero(dim)}
    power = Mat.identity(dim)
    for i in range(1, s + 2):
        power = power * n_mat
        kernels[i] = kernel_basis(power)

    chains = []
    carried: list = []  # descended elements of longer chains, at this level
    for length in range(s + 1, 0, -1):
        avoid = subspace_sum(kernels[length - 1],
                             Subspace.from_vectors(dim, carried))
        heads = _complement_in(avoid, kernels[length])
        for h in heads:
            chain = [h]
            cur = h
            for _ in range(length - 1):
                cur = n_mat.times_vec(cur)
                chain.append(cur)
            chains.append(chain)
        carried = [n_mat.times_vec(v) for v in carried + heads]
        carried = [v for v in carried if any(v)]
    total = sum(len(c) for c in chains)
    if total != dim:
        raise FiltrationError("Jordan chain extraction failed to span")
    return chains


def _complement_in(sub: Subspace, within: Subspace) -> list:
    """Vectors of `within` completing a basis of `sub` inside `within`."""
    state = IncrementalRref(sub.ambient_dim)
    for v in sub.vectors():
        state.insert(v)
    out = []
    for v in within.vectors():
        if state.insert(v):
            out.append(v)
    return out


# -- weight filtrations ---------------------------------------------------------

@dataclass(frozen=True)
class WeightFiltration:
    """Increasing chain W_0 <= ... <= W_{2k} of subspaces, centred at k."""

    centre: int
    steps: tuple  # length 2k+1, Subspace entries

    @property
    def ambient_dim(self) -> int:
        return self.steps[0].ambient_dim

    def step(self, i: int) -> Subspace:
        if i < 0:
            return Subspace.zero(self.ambient_dim)
        if i >= len(self.steps):
            return self.steps[-1]
        return self.steps[i]

    def graded_dim(self, i: int) -> int:
        return self.step(i).dim - self.step(i - 1).dim

    def graded_dims(self) -> dict:
        return {i: self.graded_dim(i) for i in range(2 * self.centre + 1)
                if self.graded_dim(i)}


def weight_filtration(n_mat: Mat, centre: int) -> WeightFiltration:
    """The unique weight filtration of a nilpotent matrix centred at `centre`.

    Requires nilpotence index <= centre (otherwise the chain would need
    negative indices).  Each Jordan chain of length l contributes its
    vectors at weights centre+l-1-2j for j = 0..l-1.
    """
    dim = n_mat.rows
    idx = nilpotence_index(n_mat)
    if idx > centre:
        raise FiltrationError(
            f"nilpotence index {idx} exceeds the centre {centre}")
    by_weight = {}
    for chain in jordan_chains(n_mat):
        l = len(chain)
        for j, v in enumerate(chain):
            w = centre + (l - 1) - 2 * j
            by_weight.setdefault(w, []).append(v)
    steps = []
    acc: list = []
    for i in range(0, 2 * centre + 1):
        acc = acc + by_weight.get(i, [])
        steps.append(Subspace.from_vectors(dim, acc))
    wf = WeightFiltration(centre, tuple(steps))
    if not verify_weight_filtration(n_mat, wf):
        raise FiltrationError("constructed filtration failed its own axioms")
    return wf


def verify_weight_filtration(n_mat: Mat, wf: WeightFiltration) -> bool:
    """Exact check of both defining properties."""
    k = wf.centre
    dim = n_mat.rows
    if wf.step(2 * k).dim != dim:
        return False
    for i in range(0, 2 * k + 1):
        lo, hi = wf.step(i - 1), wf.step(i)
        if not hi.contains_subspace(lo):
            return False
        img = [n_mat.times_vec(v) for v in hi.vectors()]
        tgt = wf.step(i - 2)
        if any(not tgt.contains(v) for v in img):
            return False
    # N^i : Gr_{k+i} -> Gr_{k-i} bijective, checked by rank accounting.
    power = Mat.identity(dim)
    for i in range(1, k + 1):
        power = power * n_mat
        hi, hi_prev = wf.step(k + i), wf.step(k + i - 1)
        lo, lo_prev = wf.step(k - i), wf.step(k - i - 1)
        if hi.dim - hi_prev.dim != lo.dim - lo_prev.dim:
            return False
        reps = _complement_in(hi_prev, hi)
        imgs = [power.times_vec(v) for v in reps]
        span = subspace_sum(lo_prev, Subspace.from_vectors(dim, imgs))
        if span.dim - lo_prev.dim != hi.dim - hi_prev.dim:
            return False
        if any(not lo.contains(v) for v in imgs):
            return False
    return True


@dataclass(frozen=True)
class GradedWeightFiltration:
    """Weight filtration of a raising graded operator, stored per degree.

    A raising operator maps degrees up by 2, so its kernels are graded and
    the whole filtration can be computed and stored degreewise; step(d, i)
    is the degree-d slice of W_i.
    """

    centre: int
    degrees: dict
    slices: dict  # degree -> tuple of Subspaces, indices 0..2*centre

    def step(self, d: int, i: int) -> Subspace:
        dim_d = self.degrees.get(d, 0)
        if d not in self.slices:
            return Subspace.zero(dim_d)
        chain = self.slices[d]
        if i < 0:
            return Subspace.zero(dim_d)
        if i >= len(chain):
            return chain[-1]
        return chain[i]

    def graded_dims(self, d: int) -> dict:
        out = {}
        for i in range(0, 2 * self.centre + 1):
            v = self.step(d, i).dim - self.step(d, i - 1).dim
            if v:
                out[i] = v
        return out


def graded_nilpotence_index(op: GradedOperator) -> int:
    """Largest i with op^i nonzero, for a raising graded operator."""
    best = 0
    for d in sorted(op.degrees):
        if op.degrees[d] == 0:
            continue
        i = 0
        m = Mat.identity(op.degrees[d])
        while True:
            m = op.block(d + 2 * i) * m
            if m.rows == 0 or m.is_zero():
                break
            i += 1
        best = max(best, i)
    return best


def graded_jordan_chains(op: GradedOperator) -> list:
    """Homogeneous Jordan chains of a raising graded operator.

    Returns triples (start_degree, length, vectors); vector j lives in
    degree start_degree + 2j.  Kernels of powers are graded, so heads can
    be chosen inside single degrees and every chain is homogeneous.
    """
    degrees = {d: m for d, m in op.degrees.items() if m}
    s = graded_nilpotence_index(op)
    kernels = {}
    for d in degrees:
        power = Mat.identity(degrees[d])
        kernels[(0, d)] = Subspace.zero(degrees[d])
        for i in range(1, s + 2):
            power = op.block(d + 2 * (i - 1)) * power
            kernels[(i, d)] = kernel_basis(power)

    chains = []
    carried = {d: [] for d in degrees}
    for length in range(s + 1, 0, -1):
        new_heads = {}
        for d in sorted(degrees):
            avoid = subspace_sum(kernels[(length - 1, d)],
                                 Subspace.from_vectors(degrees[d], carried[d]))
            heads = _complement_in(avoid, kernels[(length, d)])
            new_heads[d] = heads
            for h in heads:
                chain = [h]
                cur = h
                for j in range(length - 1):
                    cur = op.block(d + 2 * j).times_vec(cur)
                    chain.append(cur)
                chains.append((d, length, chain))
        nxt = {d: [] for d in degrees}
        for d in sorted(degrees):
            for v in carried[d] + new_heads[d]:
                img = op.block(d).times_vec(v)
                tgt = d + 2
                if tgt in degrees and any(img):
                    nxt[tgt].append(img)
        carried = nxt
    per_degree = {d: 0 for d in degrees}
    for d0, length, chain in chains:
        for j in range(length):
            per_degree[d0 + 2 * j] += 1
    if per_degree != degrees:
        raise FiltrationError("graded Jordan chains failed to span")
    return chains


def graded_weight_filtration(op: GradedOperator,
                             centre: int) -> GradedWeightFiltration:
    """Weight filtration of a raising graded operator, centred as given."""
    s = graded_nilpotence_index(op)
    if s > centre:
        raise FiltrationError(
            f"nilpotence index {s} exceeds the centre {centre}")
    degrees = {d: m for d, m in op.degrees.items() if m}
    by_weight = {d: {} for d in degrees}
    for d0, length, chain in graded_jordan_chains(op):
        for j, v in enumerate(chain):
            w = centre + (length - 1) - 2 * j
            by_weight[d0 + 2 * j].setdefault(w, []).append(v)
    slices = {}
    for d in degrees:
        acc: list = []
        chain = []
        for i in range(0, 2 * centre + 1):
            acc = acc + by_weight[d].get(i, [])
            chain.append(Subspace.from_vectors(degrees[d], acc))
        slices[d] = tuple(chain)
    wf = GradedWeightFiltration(centre, dict(degrees), slices)
    if not verify_graded_weight_filtration(op, wf):
        raise FiltrationError("graded filtration failed its own axioms")
    return wf


def verify_graded_weight_filtration(op: GradedOperator,
                                    wf: GradedWeightFiltration) -> bool:
    """Both defining properties, checked degreewise."""
    k = wf.centre
    degrees = wf.degrees
    for d in degrees:
        if wf.step(d, 2 * k).dim != degrees[d]:
            return False
        for i in range(0, 2 * k + 1):
            if not wf.step(d, i).contains_subspace(wf.step(d, i - 1)):
                return False
            tgt = wf.step(d + 2, i - 2)
            for v in wf.step(d, i).vectors():
                img = op.block(d).times_vec(v)
                if any(img) and not tgt.contains(img):
                    return False
    for i in range(1, k + 1):
        for d in degrees:
            hi, hi_prev = wf.step(d, k + i), wf.step(d, k + i - 1)
            d2 = d + 2 * i
            lo, lo_prev = wf.step(d2, k - i), wf.step(d2, k - i - 1)
            if hi.dim - hi_prev.dim != lo.dim - lo_prev.dim:
                return False
            reps = _complement_in(hi_prev, hi)
            imgs = []
            for v in reps:
                cur = v
                for step in range(i):
                    cur = op.block(d + 2 * step).times_vec(cur)
                imgs.append(cur)
            dim_d2 = degrees.get(d2, 0)
            span = subspace_sum(lo_prev,
                                Subspace.from_vectors(dim_d2, imgs))
            if span.dim - lo_prev.dim != hi.dim - hi_prev.dim:
                return False
            if any(not lo.contains(v) for v in imgs):
                return False
    return True


# -- the perverse filtration -----------------------------------------------------

def perverse_filtration(alg: GradedAlgebra, beta: Sequence, d: int) -> dict:
    """Perverse chain P_i H^d for an isotropic degree-2 class, as {i: Subspace}.

    Implements the kernel-sum formula with Ker(beta^e) = 0 for e <= 0; the
    weight-filtration cross-check pins down these edge conventions.
    """
    if alg.space.quad(list(beta)) != 0:
        raise FiltrationError("perverse filtration needs an isotropic class")
    n = alg.n
    dims = alg.dims()
    if d not in dims:
        raise FiltrationError(f"no graded piece in degree {d}")
    lop = lefschetz(alg, beta)
    dim_d = dims[d]
    out = {}
    for i in range(-1, 2 * n + 2):
        acc = Subspace.zero(dim_d)
        for j in range(0, d // 2 + 1):
            src = d - 2 * j
            if src not in dims:
                continue
            e = n - (d - 2 * j) + i + 1
            if e <= 0:
                continue
            ker = kernel_basis(_power_block(lop, src, e))
            if ker.dim == 0:
                continue
            shift = _power_block(lop, src, j)
            vecs = [shift.times_vec(v) for v in ker.vectors()]
            acc = subspace_sum(acc, Subspace.from_vectors(dim_d, vecs))
        out[i] = acc
    return out


def _power_block(lop: GradedOperator, src_degree: int, e: int) -> Mat:
    """Matrix of lop^e starting at src_degree (zero map if targets vanish)."""
    dims = lop.degrees
    m = Mat.identity(dims.get(src_degree, 0))
    d = src_degree
    for _ in range(e):
        m = lop.block(d) * m
        d += 2
    return m


def crosscheck_perverse_weight(alg: GradedAlgebra, beta: Sequence) -> bool:
    """W^{L_beta}_i restricted to degree d equals P_{d+i-2n} H^d, exactly."""
    n = alg.n
    dims = alg.dims()
    lop = lefschetz(alg, beta)
    wf = graded_weight_filtration(lop, n)
    for d in sorted(dims):
        chain = perverse_filtration(alg, beta, d)
        pmax = max(chain)
        for i in range(0, 2 * n + 1):
            left = wf.step(d, i)
            pidx = d + i - 2 * n
            if pidx < -1:
                right = Subspace.zero(dims[d])
            elif pidx > pmax:
                right = chain[pmax]
            else:
                right = chain[pidx]
            if left != right:
                return False
    return True


def conjugate_hodge_check(alg: GradedAlgebra, big: Bigrading,
                          sbar: Sequence) -> bool:
    """Weight filtration of L_sbar centred at n against the bigrading:
    W_i restricted to degree d must equal the span of the (p, q) components
    with q >= 2n - i."""
    n = alg.n
    dims = alg.dims()
    lop = lefschetz(alg, sbar)
    wf = graded_weight_filtration(lop, n)
    for d in sorted(dims):
        comps = big.degree_components(d)
        for i in range(0, 2 * n + 1):
            left = wf.step(d, i)
            vecs = []
            for (p, q, _i), sub in comps.items():
                if q >= 2 * n - i:
                    vecs.extend(sub.vectors())
            right = Subspace.from_vectors(dims[d], vecs)
            if left != right:
                return False
    return True


# -- graded dimension tables -----------------------------------------------------

@dataclass(frozen=True)
class GradedDimTable:
    """(degree, index) -> dimension, with text and JSON renderings."""

    name: str
    entries: dict

    def row(self, degree: int) -> dict:
        return {j: v for (d, j), v in self.entries.items() if d == degree}

    def to_json(self) -> dict:
        return {"name": self.name,
                "entries": [[d, j, v] for (d, j), v
                            in sorted(self.entries.items())]}

    def render_text(self) -> str:
        degrees = sorted({d for d, _ in self.entries})
        indices = sorted({j for _, j in self.entries})
        width = max([len(str(v)) for v in self.entries.values()]
                    + [len(str(j)) for j in indices] + [4])
        lines = [self.name]
        header = "deg |" + "".join(str(j).rjust(width + 1) for j in indices)
        lines.append(header)
        lines.append("-" * len(header))
        for d in degrees:
            row = self.row(d)
            cells = "".join(str(row.get(j, "")).rjust(width + 1)
                            for j in indices)
            lines.append(f"{str(d).rjust(3)} |{cells}")
        return "\n".join(lines)


def monodromy_weight_table(alg: GradedAlgebra, m_op: GradedOperator) -> GradedDimTable:
    """dim Gr^M_{n+j} per degree, from per-degree weight filtrations."""
    n = alg.n
    entries = {}
    for d, dim_d in sorted(alg.dims().items()):
        if dim_d == 0:
            continue
        wf = weight_filtration(m_op.block(d), n)
        for i, v in wf.graded_dims().items():
            entries[(d, i - n)] = v
    return GradedDimTable("monodromy weight graded dims (degree, j)", entries)


def perverse_hodge_table(big: Bigrading) -> GradedDimTable:
    """Sum over p+q = d of dim V^{p,q,j+q}, the bigraded side of the
    comparison identity."""
    entries = {}
    for (p, q, i), sub in big.components.items():
        d = p + q
        j = i - q
        key = (d, j)
        entries[key] = entries.get(key, 0) + sub.dim
    return GradedDimTable("perverse/Hodge bigraded dims (degree, j)", entries)


def compare_gr_dims(alg: GradedAlgebra, m_op: GradedOperator,
                    big: Bigrading) -> tuple:
    """Tables for both sides of dim Gr^M_{n+j} H^l = sum dim V^{p,q,j+q},
    and the verdict of their exact equality (zero entries normalised away).
    """
    left = monodromy_weight_table(alg, m_op)
    right = perverse_hodge_table(big)
    lnz = {k: v for k, v in left.entries.items() if v}
    rnz = {k: v for k, v in right.entries.items() if v}
    return left, right, lnz == rnz
