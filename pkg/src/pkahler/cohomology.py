"""de Rham, Bott-Chern and Aeppli cohomology of invariant forms.

All groups are computed on the finite-dimensional complex of invariant forms,
over the real structure ``conj(a) = a``.  Linear maps are assembled as exact
rational matrices on the rational real bases of :mod:`pkahler.exterior`.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Literal, Sequence

from . import linalg
from .exterior import ComplexParam, Form, conjugate, real_basis, real_basis_degree
from .lie import LieModel, del_, delbar, differential
from .scalar import I as IMAG, GaussianRational

__all__ = [
    "CohomologyGroup",
    "ExactnessSubspace",
    "ExactnessResult",
    "compute_group",
    "exactness_certificate",
    "operator_rows",
    "i_ddbar",
    "aeppli_boundary",
    "real_part",
    "imag_part",
]

Flavor = Literal["deRham", "BottChern", "Aeppli"]
ExactFlavor = Literal["d", "ddbar", "aeppli"]

_FLAVOR_ALIASES = {
    "derham": "deRham", "dr": "deRham",
    "bottchern": "BottChern", "bc": "BottChern",
    "aeppli": "Aeppli", "a": "Aeppli",
}
_EXACT_ALIASES = {
    "d": "d", "derham": "d",
    "ddbar": "ddbar", "i_ddbar": "ddbar", "bottchern": "ddbar", "bc": "ddbar",
    "aeppli": "aeppli", "a": "aeppli",
}


def i_ddbar(model: LieModel, a: Form) -> Form:
    return del_(model, delbar(model, a)) * IMAG


def aeppli_boundary(model: LieModel, s: Form) -> Form:
    """``del conj(s) + delbar s``; real for every s."""
    return del_(model, conjugate(s)) + delbar(model, s)


def real_part(a: Form) -> Form:
    return (a + conjugate(a)) * Fraction(1, 2)


def imag_part(a: Form) -> Form:
    return (a - conjugate(a)) * GaussianRational(0, Fraction(-1, 2))


def operator_rows(fn: Callable[[Form], Form], src, tgt) -> list[dict]:
    """Sparse rows (one per target coordinate) of the matrix of ``fn``."""
    rows: list[dict] = [dict() for _ in range(tgt.dim)]
    for col, e in enumerate(src.elements):
        img = fn(e)
        if img.is_zero():
            continue
        for r, v in enumerate(tgt.coords(img)):
            if v:
                rows[r][col] = Fraction(v)
    return rows


def _cached(model: LieModel, key, build):
    hit = model._cache.get(key)
    if hit is None:
        hit = build()
        model._cache[key] = hit
    return hit


@dataclass
class ExactnessSubspace:
    flavor: str
    spanning: list[Form]
    primitives: list[Form]

    def check(self, model: LieModel) -> bool:
        op = _exact_operator(model, self.flavor)
        return all(op(b) == a for a, b in zip(self.spanning, self.primitives))


@dataclass
class CohomologyGroup:
    model: str
    flavor: str
    degree: int
    dimension: int
    kernel_dimension: int
    representatives: list[Form]
    exactness: ExactnessSubspace

    def to_json(self) -> dict:
        return {
            "model": self.model,
            "flavor": self.flavor,
            "degree": self.degree,
            "dimension": self.dimension,
            "kernel_dimension": self.kernel_dimension,
            "exactness_rank": self.kernel_dimension - self.dimension,
            "representatives": [r.to_json() for r in self.representatives],
        }


def _exact_operator(model: LieModel, flavor: str) -> Callable[[Form], Form]:
    if flavor == "d":
        return lambda b: differential(model, b)
    if flavor == "ddbar":
        return lambda b: i_ddbar(model, b)
    if flavor == "aeppli":
        return lambda b: aeppli_boundary(model, b)
    raise ValueError(f"unknown exactness flavor {flavor!r}")


def _spaces(model: LieModel, flavor: str, k: int):
    """(numerator space, numerator operator, its target, denominator source, denominator op)."""
    n = model.n
    if flavor == "deRham":
        if not 0 <= k <= 2 * n:
            raise ValueError(f"de Rham degree must lie in 0..{2 * n}")
        src = real_basis_degree(n, k)
        tgt = real_basis_degree(n, k + 1) if k < 2 * n else None
        pre = real_basis_degree(n, k - 1) if k > 0 else None
        return src, (lambda a: differential(model, a)), tgt, pre, "d"
    if not 0 <= k <= n:
        raise ValueError(f"bidegree ({k},{k}) out of range for n={n}")
    src = real_basis(n, k)
    if flavor == "BottChern":
        tgt = real_basis_degree(n, 2 * k + 1) if k < n else None
        pre = real_basis(n, k - 1) if k > 0 else None
        return src, (lambda a: differential(model, a)), tgt, pre, "ddbar"
    if flavor == "Aeppli":
        tgt = real_basis(n, k + 1) if k < n else None
        pre = ComplexParam(n, [(k, k - 1)]) if k > 0 else None
        return src, (lambda a: i_ddbar(model, a)), tgt, pre, "aeppli"
    raise ValueError(f"unknown flavor {flavor!r}")


def compute_group(model: LieModel, flavor: str, degree: int) -> CohomologyGroup:
    flavor = _FLAVOR_ALIASES.get(flavor.lower(), flavor)
    key = ("group", flavor, degree)
    return _cached(model, key, lambda: _compute_group(model, flavor, degree))


def _compute_group(model: LieModel, flavor: str, k: int) -> CohomologyGroup:
    src, num_op, tgt, pre, exact_flavor = _spaces(model, flavor, k)
    if tgt is None:
        kernel = [[Fraction(int(i == j)) for j in range(src.dim)] for i in range(src.dim)]
    else:
        kernel = linalg.nullspace(operator_rows(num_op, src, tgt), src.dim)
    spanning, primitives = [], []
    if pre is not None:
        op = _exact_operator(model, exact_flavor)
        for e in pre.elements:
            img = op(e)
            if not img.is_zero():
                spanning.append(img)
                primitives.append(e)
    den_vectors = [src.coords(f) for f in spanning]
    R, piv = linalg.rref(den_vectors, src.dim)
    den_rank = len(piv)
    # extend the denominator basis greedily by kernel vectors
    reps = []
    current = [dict(r) for r in R]
    cur_rank = den_rank
    for v in kernel:
        trial = current + [linalg.to_sparse(v)]
        r = linalg.rank(trial, src.dim)
        if r > cur_rank:
            current = trial
            cur_rank = r
            reps.append(src.form(v))
    return CohomologyGroup(
        model=model.name,
        flavor=flavor,
        degree=k,
        dimension=len(kernel) - den_rank,
        kernel_dimension=len(kernel),
        representatives=reps,
        exactness=ExactnessSubspace(exact_flavor, spanning, primitives),
    )


@dataclass
class ExactnessResult:
    flavor: str
    status: Literal["exact", "not-exact", "precondition-failed"]
    primitive: Form | None = None
    functional: list[Fraction] | None = None
    functional_part: str | None = None
    detail: str = ""

    @property
    def exact(self) -> bool:
        return self.status == "exact"

    def to_json(self) -> dict:
        out = {"flavor": self.flavor, "status": self.status, "detail": self.detail}
        if self.primitive is not None:
            out["primitive"] = self.primitive.to_json()
        if self.functional is not None:
            from .scalar import format_fraction

            out["functional"] = [format_fraction(x) for x in self.functional]
            out["functional_part"] = self.functional_part
        return out


def _exact_setting(model: LieModel, flavor: str, a: Form):
    """(target space of a, source space of primitives)."""
    n = model.n
    if flavor == "d":
        k = a.degree
        if k == 0:
            return real_basis_degree(n, 0), None
        return real_basis_degree(n, k), real_basis_degree(n, k - 1)
    p, q = a.bidegree
    if p != q:
        raise ValueError(f"{flavor}-exactness is defined on (k,k)-forms, got ({p},{q})")
    if flavor == "ddbar":
        return real_basis(n, p), (real_basis(n, p - 1) if p > 0 else None)
    return real_basis(n, p), (ComplexParam(n, [(p, p - 1)]) if p > 0 else None)


def exactness_certificate(model: LieModel, a: Form, flavor: str = "d") -> ExactnessResult:
    """Primitive of ``a`` for the given flavor, or a functional proving non-exactness.

    Flavors: ``d`` (a = db), ``ddbar`` (a = i del delbar b, b real for real a),
    ``aeppli`` (a = del conj(s) + delbar s; a must be real).
    """
    flavor = _EXACT_ALIASES.get(flavor.lower(), flavor)
    if a.n != model.n:
        raise ValueError("dimension mismatch")
    if flavor in ("d", "ddbar"):
        if not differential(model, a).is_zero():
            return ExactnessResult(flavor, "precondition-failed", detail="form is not d-closed")
    elif flavor == "aeppli":
        if not i_ddbar(model, a).is_zero():
            return ExactnessResult(flavor, "precondition-failed", detail="form is not del-delbar-closed")
        if not a.is_real():
            return ExactnessResult(flavor, "precondition-failed", detail="Aeppli exactness is tested on real forms")
    else:
        raise ValueError(f"unknown exactness flavor {flavor!r}")
    if a.is_zero():
        return ExactnessResult(flavor, "exact", primitive=Form.zero(model.n))
    tgt, src = _exact_setting(model, flavor, a)
    parts = [("re", real_part(a)), ("im", imag_part(a))]
    if src is None:
        coords = tgt.coords(parts[0][1])
        return ExactnessResult(flavor, "not-exact", functional=[Fraction(int(bool(c))) for c in coords],
                               functional_part="re", detail="no primitives in degree -1")
    op = _exact_operator(model, flavor)
    rows = _cached(model, ("oprows", flavor, tgt.bidegrees, type(src).__name__, src.bidegrees),
                   lambda: operator_rows(op, src, tgt))
    primitive = Form.zero(model.n)
    for name, part in parts:
        if part.is_zero():
            continue
        rhs = tgt.coords(part)
        x = linalg.solve(rows, rhs, src.dim)
        if x is None:
            return ExactnessResult(flavor, "not-exact", functional=_separating_functional(rows, rhs, tgt.dim, src.dim),
                                   functional_part=name, detail=f"{name} part is not in the image")
        b = src.form(x)
        primitive = primitive + (b if name == "re" else b * IMAG)
    if op(primitive) != a:
        raise AssertionError("primitive failed exact re-derivation")
    return ExactnessResult(flavor, "exact", primitive=primitive)


def _separating_functional(rows: Sequence[dict], rhs: Sequence, m: int, ncols: int) -> list[Fraction]:
    """l with l^T A = 0 and l . rhs = 1."""
    cols: list[dict] = [dict() for _ in range(ncols)]
    for r, row in enumerate(rows):
        for c, v in row.items():
            cols[c][r] = v
    left_null = linalg.nullspace(cols, m)
    for l in left_null:
        val = sum((li * Fraction(bi) for li, bi in zip(l, rhs) if li and bi), Fraction(0))
        if val:
            return [li / val for li in l]
    raise AssertionError("rhs outside the image but orthogonal to its left null space")
