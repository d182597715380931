"""The degree-2-generated graded algebra of a rational quadratic space.

For a space (V, q) of dimension b2 and a half-dimension parameter n, the
algebra built here is Sym(V) modulo the ideal generated by the (n+1)-st
powers of isotropic vectors.  Its graded dimensions reproduce
dim Sym^min(k, 2n-k)(V) in cohomological degree 2k, it satisfies hard
Lefschetz for anisotropic classes, and the top degree is one-dimensional
with a Fujiki-type evaluation top(x^{2n}) = c * q(x)^n.

The ideal in each degree is generated by sampled isotropic powers; sampling
continues until the rank profile stabilises at the closed-form target
dimension (a mismatch is a hard error, never silently accepted).  Row
reduction runs modulo a word-size prime for speed, the reduced rows are
lifted back to exact rationals by rational reconstruction, and the lift is
certified against the original integer rows, so the result is exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import comb, factorial
from typing import Optional, Sequence

import numpy as np

from hklab import _modp
from hklab.linalg import QQ, LinalgError, qq
from hklab.quadforms import QuadraticSpace, hyperbolic_pair, sample_isotropic

_ZERO = QQ(0)
_ONE = QQ(1)

ALGEBRA_FORMAT = "hklab-graded-algebra"
ALGEBRA_VERSION = 1


class BuildError(RuntimeError):
    """Construction of the graded algebra failed."""


class BudgetExhausted(BuildError):
    """Isotropic sampling stalled before the quotient reached its target."""

    def __init__(self, level: int, achieved: int, target: int, budget: int):
        self.level = level
        self.achieved = achieved
        self.target = target
        self.budget = budget
        super().__init__(
            f"degree {2 * level}: quotient dimension {achieved} has not reached "
            f"the target {target} within the sampling budget {budget}")


# -- monomial bookkeeping -----------------------------------------------------

def monomials(nvars: int, degree: int) -> list:
    """Exponent tuples of the given total degree, descending grevlex order."""
    if degree < 0:
        return []
    out = []

    def rec(prefix, remaining, slots):
        if slots == 1:
            out.append(prefix + (remaining,))
            return
        for a in range(remaining, -1, -1):
            rec(prefix + (a,), remaining - a, slots - 1)

    if nvars == 0:
        return [()] if degree == 0 else []
    rec((), degree, nvars)
    out.sort(key=lambda mono: tuple(reversed(mono)))
    return out


def monomial_count(nvars: int, degree: int) -> int:
    if degree < 0:
        return 0
    return comb(degree + nvars - 1, nvars - 1)


def multinomial(total: int, parts: Sequence[int]) -> int:
    num = factorial(total)
    for p in parts:
        num //= factorial(p)
    return num


def _power_coeffs(v: Sequence[int], m: int) -> dict:
    """Integer coefficients of (sum v_s z_s)^m in the monomial basis."""
    nvars = len(v)
    out = {}
    for mono in monomials(nvars, m):
        c = 1
        ok = True
        for vs, a in zip(v, mono):
            if a == 0:
                continue
            if vs == 0:
                ok = False
                break
            c *= vs ** a
        if not ok:
            continue
        out[mono] = multinomial(m, mono) * c
    return out


# -- the graded algebra -------------------------------------------------------

@dataclass(frozen=True)
class AlgebraElement:
    """Homogeneous element: cohomological degree plus coordinates."""

    degree: int
    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(qq(c) for c in self.coords))

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    def scale(self, c) -> "AlgebraElement":
        c = qq(c)
        return AlgebraElement(self.degree, tuple(c * x for x in self.coords))

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        if self.degree != other.degree or len(self.coords) != len(other.coords):
            raise LinalgError("cannot add elements of different degrees")
        return AlgebraElement(
            self.degree, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        return self + other.scale(-1)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return self.degree == other.degree and self.coords == other.coords


class GradedAlgebra:
    """Graded commutative algebra with monomial-coset bases.

    levels maps k (cohomological degree 2k) to the list of exponent tuples
    labelling the basis; tensors maps an ordered level pair (k, l), k <= l,
    to {(i, j): {t: value}} structure constants; proj (present on freshly
    built instances, absent after a JSON round trip) maps each full
    symmetric-power monomial to its coset coordinates.
    """

    def __init__(self, space: QuadraticSpace, n: int, levels: dict,
                 tensors: dict, proj: Optional[dict] = None,
                 build_meta: Optional[dict] = None):
        self.space = space
        self.n = n
        self.levels = levels
        self.tensors = tensors
        self.proj = proj
        self.build_meta = dict(build_meta or {})

    # -- shape ---------------------------------------------------------------

    @property
    def b2(self) -> int:
        return self.space.dim

    @property
    def top_degree(self) -> int:
        return 4 * self.n

    def level_dim(self, k: int) -> int:
        return len(self.levels[k])

    def dims(self) -> dict:
        """Cohomological degree -> dimension."""
        return {2 * k: len(ms) for k, ms in sorted(self.levels.items())}

    def degrees(self) -> dict:
        return self.dims()

    # -- elements --------------------------------------------------------------

    def zero(self, degree: int) -> AlgebraElement:
        return AlgebraElement(degree, (_ZERO,) * len(self.levels[degree // 2]))

    def unit(self) -> AlgebraElement:
        return AlgebraElement(0, (_ONE,))

    def element(self, degree: int, coords: Sequence) -> AlgebraElement:
        if degree % 2 or degree // 2 not in self.levels:
            raise LinalgError(f"no homogeneous piece in degree {degree}")
        if len(coords) != self.level_dim(degree // 2):
            raise LinalgError("coordinate length does not match degree dimension")
        return AlgebraElement(degree, tuple(coords))

    def degree2(self, v: Sequence) -> AlgebraElement:
        """Degree-2 element from a vector of the quadratic space."""
        return self.element(2, list(v))

    # -- multiplication ---------------------------------------------------------

    def _tensor(self, k: int, l: int) -> dict:
        return self.tensors[(k, l) if k <= l else (l, k)]

    def multiply(self, a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
        ka, kb = a.degree // 2, b.degree // 2
        if a.degree + b.degree > self.top_degree:
            raise LinalgError(
                f"degree overflow: {a.degree} + {b.degree} exceeds {self.top_degree}")
        if ka > kb:
            a, b, ka, kb = b, a, kb, ka
        tensor = self._tensor(ka, kb)
        out = [_ZERO] * self.level_dim(ka + kb)
        for i, ca in enumerate(a.coords):
            if not ca:
                continue
            for j, cb in enumerate(b.coords):
                if not cb:
                    continue
                entry = tensor.get((i, j))
                if not entry:
                    continue
                c = ca * cb
                for t, val in entry.items():
                    out[t] += c * val
        return AlgebraElement(2 * (ka + kb), tuple(out))

    def power(self, x: AlgebraElement, k: int) -> AlgebraElement:
        if x.degree != 2:
            raise LinalgError("power is defined for degree-2 elements")
        if k > 2 * self.n or k < 0:
            raise LinalgError("degree overflow in power")
        acc = self.unit()
        for _ in range(k):
            acc = self.multiply(acc, x)
        return acc

    def top_functional(self, a: AlgebraElement) -> QQ:
        if a.degree != self.top_degree:
            raise LinalgError("top functional needs a top-degree element")
        return a.coords[0]

    def project_symmetric(self, k: int, dense: Sequence) -> AlgebraElement:
        """Coset of a full Sym^k coordinate vector (needs proj tables)."""
        if self.proj is None:
            raise LinalgError("projection tables unavailable on a loaded algebra")
        table = self.proj[k]
        if len(dense) != len(table):
            raise LinalgError("Sym^k coordinate length mismatch")
        out = [_ZERO] * self.level_dim(k)
        for c, entry in zip(dense, table):
            if not c:
                continue
            c = qq(c)
            for t, val in entry.items():
                out[t] += c * val
        return AlgebraElement(2 * k, tuple(out))

    # -- serialisation -----------------------------------------------------------

    def to_json(self) -> dict:
        tensors = {}
        for (k, l), entries in sorted(self.tensors.items()):
            quads = []
            for (i, j), entry in sorted(entries.items()):
                for t, val in sorted(entry.items()):
                    quads.append([i, j, t, str(val)])
            tensors[f"{k},{l}"] = quads
        return {
            "format": ALGEBRA_FORMAT,
            "version": ALGEBRA_VERSION,
            "n": self.n,
            "space": self.space.to_json(),
            "levels": {str(k): {"dim": len(ms),
                                "monomials": [list(m) for m in ms]}
                       for k, ms in sorted(self.levels.items())},
            "tensors": tensors,
            "build": self.build_meta,
        }

    @staticmethod
    def from_json(obj: dict) -> "GradedAlgebra":
        if obj.get("format") != ALGEBRA_FORMAT:
            raise BuildError("not a graded-algebra JSON document")
        space = QuadraticSpace.from_json(obj["space"])
        n = int(obj["n"])
        levels = {int(k): [tuple(m) for m in v["monomials"]]
                  for k, v in obj["levels"].items()}
        for k, ms in levels.items():
            if len(ms) != obj["levels"][str(k)]["dim"]:
                raise BuildError("level dimension does not match basis list")
        tensors = {}
        for key, quads in obj["tensors"].items():
            k, l = (int(x) for x in key.split(","))
            entries = {}
            for i, j, t, val in quads:
                entries.setdefault((i, j), {})[t] = qq(val)
            tensors[(k, l)] = entries
        return GradedAlgebra(space, n, levels, tensors,
                             proj=None, build_meta=obj.get("build", {}))

    def dump_canonical(self) -> str:
        return canonical_json(self.to_json())


def canonical_json(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


# -- construction -------------------------------------------------------------

def build_verbitsky(space: QuadraticSpace, n: int,
                    sample_budget: Optional[int] = None,
                    seed: int = 0) -> GradedAlgebra:
    """Build the quotient algebra for (space, n).

    sample_budget bounds the number of isotropic generator vectors tried per
    quotient degree (None scales it with the number of rows the degree
    needs); exhausting it before the rank profile reaches the closed-form
    target raises BudgetExhausted with both dimensions.
    """
    if n < 1:
        raise BuildError("n must be at least 1")
    if sample_budget is not None and sample_budget < 1:
        raise BuildError("sample_budget must be at least 1")
    b2 = space.dim
    pair = hyperbolic_pair(space)
    levels = {}
    proj = {}
    for k in range(0, 2 * n + 1):
        monos = monomials(b2, k)
        if k <= n:
            levels[k] = monos
            proj[k] = [{i: _ONE} for i in range(len(monos))]
        else:
            basis, table = _ideal_projection(space, n, k, sample_budget,
                                             seed, pair)
            levels[k] = basis
            proj[k] = table
    tensors = _build_tensors(levels, proj, b2, n)
    meta = {"seed": seed, "sample_budget": sample_budget}
    return GradedAlgebra(space, n, levels, tensors, proj=proj, build_meta=meta)


def _build_tensors(levels: dict, proj: dict, b2: int, n: int) -> dict:
    index_maps = {k: {m: i for i, m in enumerate(monomials(b2, k))}
                  for k in range(0, 2 * n + 1)}
    tensors = {}
    for k in range(0, 2 * n + 1):
        for l in range(k, 2 * n + 1 - k):
            idx = index_maps[k + l]
            table = proj[k + l]
            entries = {}
            for i, mi in enumerate(levels[k]):
                for j, mj in enumerate(levels[l]):
                    prod = tuple(a + b for a, b in zip(mi, mj))
                    entry = table[idx[prod]]
                    if entry:
                        entries[(i, j)] = dict(entry)
            tensors[(k, l)] = entries
    return tensors


def _isotropic_stream(space: QuadraticSpace, pair, seed: int, level: int):
    """Deterministic stream of primitive integer isotropic vectors."""
    batch = 0
    seen = set()
    while True:
        vs = sample_isotropic(space, 8, seed=seed * 100003 + level * 1009 + batch,
                              pair=pair)
        for v in vs:
            key = tuple(int(x) for x in v)
            if key in seen:
                continue
            seen.add(key)
            yield [int(x) for x in v]
        batch += 1


def _rows_for_generator(base: dict, k: int, n: int, b2: int, idx: dict) -> list:
    """Integer rows spanning v^(n+1) * Sym^(k-n-1) inside Sym^k.

    base holds the monomial coefficients of v^(n+1).
    """
    ncols = len(idx)
    rows = []
    for gamma in monomials(b2, k - n - 1):
        row = np.zeros(ncols, dtype=np.int64)
        for mono, c in base.items():
            shifted = tuple(a + g for a, g in zip(mono, gamma))
            row[idx[shifted]] = c
        rows.append(row)
    return rows


def _ideal_projection(space: QuadraticSpace, n: int, k: int,
                      budget: Optional[int], seed: int, pair) -> tuple:
    """Quotient basis monomials and projection table for Sym^k -> SH^{2k}.

    Returns (basis_monomials, table) where table[c] maps quotient basis
    indices to the coefficients of monomial c's coset.
    """
    b2 = space.dim
    monos = monomials(b2, k)
    idx = {m: i for i, m in enumerate(monos)}
    ncols = len(monos)
    target = monomial_count(b2, 2 * n - k)
    cap = ncols - target
    if budget is None:
        rows_per_gen = monomial_count(b2, k - n - 1)
        budget = 2 * ((cap + rows_per_gen - 1) // rows_per_gen) + 16

    prime = _modp.PRIMES[0]
    reducer = _modp.ModpReducer(ncols, prime)
    accepted: list = []          # exact integer rows, in acceptance order
    stalls = 0
    used = 0
    stream = _isotropic_stream(space, pair, seed, k)
    while reducer.rank < cap:
        if used >= budget:
            raise BudgetExhausted(k, ncols - reducer.rank, target, budget)
        v = next(stream)
        base = _power_coeffs(v, n + 1)
        if max(abs(c) for c in base.values()) >= _modp.MAX_ENTRY:
            continue
        used += 1
        gained = 0
        for row in _rows_for_generator(base, k, n, b2, idx):
            if reducer.insert(row):
                accepted.append([int(x) for x in row])
                gained += 1
            if reducer.rank == cap:
                break
        if gained == 0:
            stalls += 1
            if stalls >= 4:
                raise BudgetExhausted(k, ncols - reducer.rank, target, budget)
        else:
            stalls = 0

    pivot_cols, reduced = reducer.sorted_state()
    free_cols = [c for c in range(ncols) if c not in set(pivot_cols)]
    assert len(free_cols) == target

    # The lift certifies itself against every accepted row.
    x_exact = _lift_reduced_block(accepted, pivot_cols, free_cols,
                                  reduced, prime, ncols)

    # Holdout: rows from a fresh generator must lie in the certified row space.
    holdout = next(stream)
    hold_rows = _rows_for_generator(_power_coeffs(holdout, n + 1),
                                    k, n, b2, idx)[:2]
    _verify_lift([[int(x) for x in r] for r in hold_rows],
                 pivot_cols, free_cols, x_exact)

    basis = [monos[c] for c in free_cols]
    table = []
    pivot_pos = {c: r for r, c in enumerate(pivot_cols)}
    free_pos = {c: j for j, c in enumerate(free_cols)}
    for c in range(ncols):
        if c in free_pos:
            table.append({free_pos[c]: _ONE})
        else:
            r = pivot_pos[c]
            table.append({j: -x_exact[r][j]
                          for j in range(target) if x_exact[r][j]})
    return basis, table


def _lift_reduced_block(accepted: list, pivot_cols: list, free_cols: list,
                        reduced: np.ndarray, prime: int, ncols: int) -> list:
    """Exact rational lift of the reduced rows restricted to free columns.

    Starts from the single-prime residues already in the reducer and adds
    primes (CRT) until a reconstruction passes the integer certification
    against every accepted row; reconstruction alone is never trusted,
    since a too-small modulus can yield a plausible wrong fraction.
    """
    residues = reduced[:, free_cols].astype(object)
    modulus = prime
    lifted = _modp.reconstruct_matrix(residues, modulus)
    if lifted is not None and _lift_certified(accepted, pivot_cols,
                                              free_cols, lifted):
        return lifted
    for p2 in _modp.PRIMES[1:]:
        red2 = _modp.ModpReducer(ncols, p2)
        for row in accepted:
            red2.insert(np.array([x % p2 for x in row], dtype=np.int64))
        piv2, rows2 = red2.sorted_state()
        if piv2 != pivot_cols or red2.rank != len(pivot_cols):
            continue  # unlucky prime for this row set
        res2 = rows2[:, free_cols].astype(object)
        residues = np.array(
            [[_modp.crt_combine(int(a), modulus, int(b), p2)
              for a, b in zip(ra, rb)]
             for ra, rb in zip(residues, res2)], dtype=object)
        modulus *= p2
        lifted = _modp.reconstruct_matrix(residues, modulus)
        if lifted is not None and _lift_certified(accepted, pivot_cols,
                                                  free_cols, lifted):
            return lifted
    raise BuildError("rational reconstruction failed for all primes")


def _lift_certified(rows: list, pivot_cols: list, free_cols: list,
                    x_exact: list) -> bool:
    try:
        _verify_lift(rows, pivot_cols, free_cols, x_exact)
    except BuildError:
        return False
    return True


def _verify_lift(rows: list, pivot_cols: list, free_cols: list,
                 x_exact: list) -> None:
    """Certify row_F == row_P @ X over the integers for every given row."""
    from math import lcm
    nfree = len(free_cols)
    npiv = len(pivot_cols)
    col_den = []
    col_num = []
    for j in range(nfree):
        den = 1
        for r in range(npiv):
            den = lcm(den, int(x_exact[r][j].denominator))
        col_den.append(den)
        col_num.append([int(x_exact[r][j] * den) for r in range(npiv)])
    for row in rows:
        rp = [(r, row[c]) for r, c in enumerate(pivot_cols) if row[c]]
        for j in range(nfree):
            nums = col_num[j]
            lhs = sum(coef * nums[r] for r, coef in rp)
            if lhs != row[free_cols[j]] * col_den[j]:
                raise BuildError("modular lift failed integer certification")
