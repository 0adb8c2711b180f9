"""Invariant forms on Lie groups given by structure equations of a (1,0)-coframe.

A :class:`LieModel` stores ``d phi_k`` for each coframe element; ``d`` on
``conj(phi_k)`` is the conjugate, and ``d`` extends to every form as a graded
derivation.  All results refer to invariant forms only.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .exterior import Form, conjugate, multi_indices, phi, sigma, wedge
from .scalar import GaussianRational

__all__ = [
    "LieModel",
    "ModelError",
    "ModelReport",
    "differential",
    "split_d",
    "del_",
    "delbar",
    "verify_model",
    "etabeta",
    "iwasawa",
    "sl2_quotient",
    "catalog_names",
    "get_model",
    "load_model",
]


class ModelError(ValueError):
    """Invalid structure equations (d^2 != 0, bad indices, unknown name)."""


@dataclass(frozen=True, eq=False)
class LieModel:
    name: str
    n: int
    dphi: tuple[Form, ...]
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if len(self.dphi) != self.n:
            raise ModelError(f"expected {self.n} structure equations, got {len(self.dphi)}")
        for k, f in enumerate(self.dphi, 1):
            if f.n != self.n:
                raise ModelError(f"d phi_{k} lives in dimension {f.n}, expected {self.n}")
            if not f.is_zero() and f.degrees() != {2}:
                raise ModelError(f"d phi_{k} must be a 2-form")

    def __eq__(self, other):
        if not isinstance(other, LieModel):
            return NotImplemented
        return self.n == other.n and all(a == b for a, b in zip(self.dphi, other.dphi))

    def __hash__(self):
        return hash((self.n, tuple(self.dphi)))

    @property
    def holomorphically_parallelizable(self) -> bool:
        return all(f.bidegrees() <= {(2, 0)} for f in self.dphi)

    def metric_form(self) -> Form:
        """``omega = (i/2) sum phi_j ^ conj(phi_j)`` for the parallelization."""
        s = sigma(1)
        return Form(self.n, {((j,), (j,)): s for j in range(1, self.n + 1)})

    def is_unimodular(self) -> bool:
        """True iff d vanishes on invariant (2n-1)-forms (Stokes on the quotient)."""
        top = 2 * self.n - 1
        for p in range(max(0, top - self.n), min(top, self.n) + 1):
            for I in multi_indices(self.n, p):
                for J in multi_indices(self.n, top - p):
                    if not differential(self, Form.basis(self.n, I, J)).is_zero():
                        return False
        return True

    def to_json(self) -> dict:
        eqs = []
        for k, f in enumerate(self.dphi, 1):
            terms = []
            for (I, J), c in sorted(f.items()):
                if len(I) == 2:
                    kind, i, j = "20", I[0], I[1]
                elif len(I) == 1:
                    kind, i, j = "11", I[0], J[0]
                else:
                    kind, i, j = "02", J[0], J[1]
                t = {"coeff": c.to_json(), "i": i, "j": j}
                if kind != "20":
                    t["kind"] = kind
                terms.append(t)
            eqs.append({"k": k, "terms": terms})
        return {"name": self.name, "n": self.n, "d": eqs}

    @classmethod
    def from_json(cls, data: dict, check: bool = True) -> "LieModel":
        n = int(data["n"])
        dphi = [Form.zero(n) for _ in range(n)]
        for eq in data.get("d", []):
            k = int(eq["k"])
            if not 1 <= k <= n:
                raise ModelError(f"coframe index {k} out of range 1..{n}")
            acc = dphi[k - 1]
            for t in eq.get("terms", []):
                c = GaussianRational.from_json(t["coeff"])
                i, j = int(t["i"]), int(t["j"])
                kind = t.get("kind", "20")
                if kind == "20":
                    term = Form.basis(n, (i, j), (), c)
                elif kind == "11":
                    term = Form.basis(n, (i,), (j,), c)
                elif kind == "02":
                    term = Form.basis(n, (), (i, j), c)
                else:
                    raise ModelError(f"unknown term kind {kind!r}")
                acc = acc + term
            dphi[k - 1] = acc
        model = cls(str(data.get("name", "custom")), n, tuple(dphi))
        if check:
            report = verify_model(model)
            if not report.passed:
                raise ModelError(f"d^2 != 0 for model {model.name}: {report.violations}")
        return model


def _d_basis(model: LieModel, key) -> Form:
    cache = model._cache
    hit = cache.get(key)
    if hit is not None:
        return hit
    I, J = key
    n = model.n
    out = Form.zero(n)
    m = len(I)
    for t, i in enumerate(I):
        di = model.dphi[i - 1]
        if di.is_zero():
            continue
        left = Form.basis(n, I[:t], ())
        right = Form.basis(n, I[t + 1:], J)
        term = wedge(left, di, right)
        out = out - term if t & 1 else out + term
    for s, j in enumerate(J):
        dj = _dbar_phi(model, j)
        if dj.is_zero():
            continue
        left = Form.basis(n, I, J[:s])
        right = Form.basis(n, (), J[s + 1:])
        term = wedge(left, dj, right)
        out = out - term if (m + s) & 1 else out + term
    cache[key] = out
    return out


def _dbar_phi(model: LieModel, j: int) -> Form:
    key = ("bar", j)
    hit = model._cache.get(key)
    if hit is None:
        hit = conjugate(model.dphi[j - 1])
        model._cache[key] = hit
    return hit


def differential(model: LieModel, a: Form) -> Form:
    if a.n != model.n:
        raise ValueError(f"dimension mismatch: form n={a.n}, model n={model.n}")
    terms: dict = {}
    for key, c in a.items():
        for k2, v in _d_basis(model, key).items():
            val = v * c
            terms[k2] = terms[k2] + val if k2 in terms else val
    return Form(model.n, terms)


def split_d(model: LieModel, a: Form) -> tuple[Form, Form]:
    """``(del a, delbar a)`` for a form of pure bidegree."""
    if a.is_zero():
        return Form.zero(model.n), Form.zero(model.n)
    p, q = a.bidegree
    da = differential(model, a)
    return da.bidegree_component(p + 1, q) if p < model.n else Form.zero(model.n), (
        da.bidegree_component(p, q + 1) if q < model.n else Form.zero(model.n)
    )


def del_(model: LieModel, a: Form) -> Form:
    out = Form.zero(model.n)
    for comp in a.components().values():
        out = out + split_d(model, comp)[0]
    return out


def delbar(model: LieModel, a: Form) -> Form:
    out = Form.zero(model.n)
    for comp in a.components().values():
        out = out + split_d(model, comp)[1]
    return out


@dataclass
class ModelReport:
    model: str
    passed: bool
    violations: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"model": self.model, "passed": self.passed, "violations": self.violations}


def verify_model(model: LieModel) -> ModelReport:
    """Check ``d(d phi_k) = 0`` for every k, exactly."""
    violations = []
    for k, f in enumerate(model.dphi, 1):
        dd = differential(model, f)
        if not dd.is_zero():
            violations.append({"k": k, "residual": dd.to_json()})
    return ModelReport(model.name, not violations, violations)


# catalog ------------------------------------------------------------------


def etabeta(dim: int) -> LieModel:
    """The nilmanifold of odd complex dimension ``dim = 2m+1``:
    ``d phi_dim = phi_1^phi_2 + ... + phi_{2m-1}^phi_{2m}``, others closed."""
    if dim < 3 or dim % 2 == 0:
        raise ModelError(f"etabeta needs odd dimension >= 3, got {dim}")
    m = (dim - 1) // 2
    top = Form.zero(dim)
    for j in range(1, m + 1):
        top = top + wedge(phi(dim, 2 * j - 1), phi(dim, 2 * j))
    dphi = tuple([Form.zero(dim)] * (dim - 1) + [top])
    return LieModel(f"etabeta{dim}", dim, dphi)


def iwasawa() -> LieModel:
    m = etabeta(3)
    return LieModel("iwasawa", 3, m.dphi)


def sl2_quotient() -> LieModel:
    """Coframe (alpha, beta, eta) = (phi_1, phi_2, phi_3) with
    d alpha = -2 eta^alpha, d beta = 2 eta^beta, d eta = alpha^beta."""
    n = 3
    a, b, e = phi(n, 1), phi(n, 2), phi(n, 3)
    dphi = (wedge(e, a) * -2, wedge(e, b) * 2, wedge(a, b))
    return LieModel("sl2", n, dphi)


_FIXED: dict[str, Callable[[], LieModel]] = {
    "iwasawa": iwasawa,
    "etabeta3": lambda: etabeta(3),
    "etabeta5": lambda: etabeta(5),
    "etabeta7": lambda: etabeta(7),
    "sl2": sl2_quotient,
}

_ETABETA = re.compile(r"^etabeta\(?(\d+)\)?$")


def catalog_names() -> list[str]:
    return list(_FIXED)


def get_model(name: str) -> LieModel:
    """Catalog lookup; accepts ``etabeta(N)`` / ``etabetaN`` for any odd N >= 3."""
    key = name.strip().lower()
    if key in _FIXED:
        return _FIXED[key]()
    m = _ETABETA.match(key)
    if m:
        return etabeta(int(m.group(1)))
    if key in ("sl2_quotient", "sl2c"):
        return sl2_quotient()
    raise ModelError(f"unknown model {name!r}; known: {', '.join(catalog_names())}, etabeta(N)")


def load_model(spec: str) -> LieModel:
    """Catalog name or path to a model JSON file."""
    path = Path(spec)
    if path.suffix == ".json" and path.exists():
        return LieModel.from_json(json.loads(path.read_text()))
    return get_model(spec)
