"""Complexified exterior algebra on an n-dimensional complex vector space.

A :class:`Form` is a finite sum of terms ``c * phi_I ^ conj(phi_J)`` where
``I`` and ``J`` are strictly increasing 1-based multi-indices.  The factor
order inside a basis element is always holomorphic part first, then the
antiholomorphic part.  Coefficients are :class:`GaussianRational` for exact
work or ``complex`` for sampled numerics; all operations are generic over
the two.

Interior product convention: for multi-indices ``J`` contained in ``K``,
``contract(J, phi_K) = eps * phi_{K - J}`` where ``phi_K = eps * phi_J ^
phi_{K - J}`` (left contraction by the dual basis multivector ``e_J``).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Iterator, Mapping

from .scalar import GaussianRational, I as IMAG, ONE, as_scalar

__all__ = [
    "Form",
    "MultiIndex",
    "multi_indices",
    "merge_sign",
    "complement",
    "sigma",
    "volume_form",
    "wedge",
    "conjugate",
    "bidegree_component",
    "pair_top",
    "contract",
    "is_simple",
    "SimplicityResult",
    "RealBasis",
    "real_basis",
    "real_basis_degree",
    "ComplexParam",
    "phi",
    "phibar",
]

MultiIndex = tuple  # strictly increasing tuple of ints in 1..n


@lru_cache(maxsize=None)
def multi_indices(n: int, p: int) -> tuple[tuple[int, ...], ...]:
    """All length-p multi-indices over 1..n in lexicographic order."""
    return tuple(combinations(range(1, n + 1), p))


@lru_cache(maxsize=None)
def _index_position(n: int, p: int) -> dict:
    return {idx: k for k, idx in enumerate(multi_indices(n, p))}


def index_of(n: int, idx: tuple[int, ...]) -> int:
    return _index_position(n, len(idx))[idx]


@lru_cache(maxsize=1 << 16)
def merge_sign(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, tuple[int, ...] | None]:
    """Sign and sorted index of ``phi_a ^ phi_b``; ``(0, None)`` on overlap."""
    if not a:
        return 1, b
    if not b:
        return 1, a
    sb = set(b)
    if any(x in sb for x in a):
        return 0, None
    inversions = 0
    for x in a:
        for y in b:
            if x > y:
                inversions += 1
    return (-1 if inversions & 1 else 1), tuple(sorted(a + b))


def complement(n: int, idx: tuple[int, ...]) -> tuple[int, ...]:
    s = set(idx)
    return tuple(i for i in range(1, n + 1) if i not in s)


def _is_zero(c, tol: float | None = None) -> bool:
    if tol is None or isinstance(c, GaussianRational):
        return not c
    return abs(c) <= tol


def _conj(c):
    return c.conjugate()


class Form:
    """Immutable element of the complexified exterior algebra."""

    __slots__ = ("n", "_terms")

    def __init__(self, n: int, terms: Mapping | None = None):
        if n < 1:
            raise ValueError("dimension must be positive")
        clean = {}
        if terms:
            for (I, J), c in terms.items():
                I, J = tuple(I), tuple(J)
                if not _valid_index(I, n) or not _valid_index(J, n):
                    raise ValueError(f"invalid multi-index pair {(I, J)} for n={n}")
                if c:
                    clean[(I, J)] = c
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "_terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("Form is immutable")

    # constructors -------------------------------------------------------

    @classmethod
    def zero(cls, n: int) -> "Form":
        return cls(n)

    @classmethod
    def scalar(cls, n: int, c=1) -> "Form":
        return cls(n, {((), ()): as_scalar(c) if not isinstance(c, complex) else c})

    @classmethod
    def basis(cls, n: int, I: Iterable[int] = (), J: Iterable[int] = (), coeff=1) -> "Form":
        """``coeff * phi_I ^ conj(phi_J)`` with I, J given in any order."""
        I, J = tuple(I), tuple(J)
        c = coeff if isinstance(coeff, complex) else as_scalar(coeff)
        si, I_sorted = _sort_with_sign(I)
        sj, J_sorted = _sort_with_sign(J)
        if si == 0 or sj == 0:
            return cls(n)
        return cls(n, {(I_sorted, J_sorted): c * (si * sj)})

    # inspection ---------------------------------------------------------

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self) -> Iterator:
        return iter(self._terms.items())

    def __getitem__(self, key):
        I, J = key
        return self._terms.get((tuple(I), tuple(J)), 0)

    def __len__(self):
        return len(self._terms)

    def is_zero(self, tol: float | None = None) -> bool:
        return all(_is_zero(c, tol) for c in self._terms.values())

    def bidegrees(self) -> set[tuple[int, int]]:
        return {(len(I), len(J)) for I, J in self._terms}

    def degrees(self) -> set[int]:
        return {p + q for p, q in self.bidegrees()}

    @property
    def bidegree(self) -> tuple[int, int]:
        bd = self.bidegrees()
        if len(bd) != 1:
            raise ValueError(f"form is not of pure bidegree: {sorted(bd)}")
        return next(iter(bd))

    @property
    def degree(self) -> int:
        d = self.degrees()
        if len(d) > 1:
            raise ValueError(f"form is not homogeneous: degrees {sorted(d)}")
        return next(iter(d)) if d else 0

    def is_exact(self) -> bool:
        return all(isinstance(c, GaussianRational) for c in self._terms.values())

    def is_real(self, tol: float | None = None) -> bool:
        return (self - self.conjugate()).is_zero(tol)

    # algebra ------------------------------------------------------------

    def _check(self, other: "Form"):
        if not isinstance(other, Form):
            raise TypeError(f"expected Form, got {type(other).__name__}")
        if other.n != self.n:
            raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")

    def __add__(self, other: "Form") -> "Form":
        self._check(other)
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out[k] + c if k in out else c
        return Form(self.n, out)

    def __sub__(self, other: "Form") -> "Form":
        return self + (-other)

    def __neg__(self) -> "Form":
        return Form(self.n, {k: -c for k, c in self._terms.items()})

    def __mul__(self, c) -> "Form":
        if isinstance(c, Form):
            return NotImplemented
        if isinstance(c, (complex, float)):
            c = complex(c)
            return Form(self.n, {k: complex(v) * c for k, v in self._terms.items()})
        c = as_scalar(c)
        if not self.is_exact():
            return self * complex(c)
        return Form(self.n, {k: v * c for k, v in self._terms.items()})

    __rmul__ = __mul__

    def __truediv__(self, c) -> "Form":
        if isinstance(c, (complex, float)):
            return self * (1 / c)
        return self * (ONE / as_scalar(c))

    def __eq__(self, other):
        if not isinstance(other, Form):
            return NotImplemented
        return self.n == other.n and (self - other).is_zero()

    def __hash__(self):
        return hash((self.n, frozenset(self._terms.items())))

    def wedge(self, other: "Form") -> "Form":
        return wedge(self, other)

    def conjugate(self) -> "Form":
        return conjugate(self)

    def bidegree_component(self, p: int, q: int) -> "Form":
        return bidegree_component(self, p, q)

    def components(self) -> dict[tuple[int, int], "Form"]:
        out: dict[tuple[int, int], dict] = {}
        for (I, J), c in self._terms.items():
            out.setdefault((len(I), len(J)), {})[(I, J)] = c
        return {bd: Form(self.n, t) for bd, t in sorted(out.items())}

    def coefficient_vector(self, p: int, q: int) -> list:
        """Coefficients of bidegree (p, q) on the lexicographic (I, J) basis."""
        return [self._terms.get((I, J), 0) for I in multi_indices(self.n, p) for J in multi_indices(self.n, q)]

    def to_float(self) -> "Form":
        return Form(self.n, {k: complex(c) for k, c in self._terms.items()})

    def power(self, k: int) -> "Form":
        out = Form.scalar(self.n, 1)
        for _ in range(k):
            out = wedge(out, self)
        return out

    # serialization ------------------------------------------------------

    def to_json(self) -> dict:
        if not self.is_exact():
            raise ValueError("only exact forms serialize to fraction strings")
        entries = []
        for (I, J), c in sorted(self._terms.items(), key=lambda kv: _sort_key(kv[0])):
            entries.append({"p": len(I), "q": len(J), "I": list(I), "J": list(J), **c.to_json()})
        return {"n": self.n, "entries": entries}

    @classmethod
    def from_json(cls, data: Mapping) -> "Form":
        n = int(data["n"])
        terms: dict = {}
        for e in data.get("entries", []):
            I, J = tuple(e["I"]), tuple(e["J"])
            if len(I) != e.get("p", len(I)) or len(J) != e.get("q", len(J)):
                raise ValueError(f"bidegree does not match indices in entry {e}")
            c = GaussianRational.from_json(e)
            terms[(I, J)] = terms.get((I, J), 0) + c
        return cls(n, terms)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "Form":
        return cls.from_json(json.loads(text))

    def __repr__(self):
        if not self._terms:
            return f"Form(n={self.n}, 0)"
        parts = []
        for (I, J), c in sorted(self._terms.items(), key=lambda kv: _sort_key(kv[0])):
            name = "^".join([f"φ{i}" for i in I] + [f"φ̄{j}" for j in J]) or "1"
            parts.append(f"({c})·{name}")
        return f"Form(n={self.n}, " + " + ".join(parts) + ")"


def _sort_key(key):
    I, J = key
    return (len(I) + len(J), len(I), I, J)


def _valid_index(idx: tuple, n: int) -> bool:
    return all(1 <= i <= n for i in idx) and all(a < b for a, b in zip(idx, idx[1:]))


def _sort_with_sign(idx: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    if len(set(idx)) != len(idx):
        return 0, idx
    sign = 1
    arr = list(idx)
    for i in range(len(arr)):
        for j in range(len(arr) - 1 - i):
            if arr[j] > arr[j + 1]:
                arr[j], arr[j + 1] = arr[j + 1], arr[j]
                sign = -sign
    return sign, tuple(arr)


def phi(n: int, i: int) -> Form:
    return Form.basis(n, (i,), ())


def phibar(n: int, i: int) -> Form:
    return Form.basis(n, (), (i,))


def sigma(p: int) -> GaussianRational:
    """``i^(p^2) / 2^p``."""
    return IMAG ** (p * p) * GaussianRational(Fraction(1, 2 ** p))


def volume_form(n: int) -> Form:
    N = tuple(range(1, n + 1))
    return Form(n, {(N, N): sigma(n)})


def wedge(a: Form, b: Form, *more: Form) -> Form:
    """Exterior product; extra arguments are wedged left to right."""
    if more:
        out = wedge(a, b)
        for f in more:
            out = wedge(out, f)
        return out
    a._check(b)
    out: dict = {}
    for (I, J), c in a._terms.items():
        lj = len(J)
        for (K, L), d in b._terms.items():
            s1, IK = merge_sign(I, K)
            if not s1:
                continue
            s2, JL = merge_sign(J, L)
            if not s2:
                continue
            sign = s1 * s2
            if lj * len(K) & 1:
                sign = -sign
            key = (IK, JL)
            val = c * d if sign > 0 else -(c * d)
            out[key] = out[key] + val if key in out else val
    return Form(a.n, out)


def conjugate(a: Form) -> Form:
    out = {}
    for (I, J), c in a._terms.items():
        cc = _conj(c)
        out[(J, I)] = -cc if (len(I) * len(J)) & 1 else cc
    return Form(a.n, out)


def bidegree_component(a: Form, p: int, q: int) -> Form:
    if not (0 <= p <= a.n and 0 <= q <= a.n):
        raise ValueError(f"bidegree ({p},{q}) out of range for n={a.n}")
    return Form(a.n, {k: c for k, c in a._terms.items() if len(k[0]) == p and len(k[1]) == q})


def pair_top(a: Form, b: Form):
    """Coefficient of ``a ^ b`` relative to the volume form."""
    a._check(b)
    da, db = a.degrees(), b.degrees()
    if len(da) > 1 or len(db) > 1:
        raise ValueError("pair_top expects homogeneous forms")
    if da and db and next(iter(da)) + next(iter(db)) != 2 * a.n:
        raise ValueError(f"degrees {da} and {db} do not add up to {2 * a.n}")
    N = tuple(range(1, a.n + 1))
    top = wedge(a, b)[(N, N)]
    if not top:
        return top if isinstance(top, complex) else GaussianRational(0)
    s = sigma(a.n)
    if isinstance(top, complex):
        return top / complex(s)
    return top / s


# interior product / simplicity ------------------------------------------


def contract(J: tuple[int, ...], a: Form) -> Form:
    """Left contraction of the holomorphic part by the dual multivector ``e_J``."""
    J = tuple(J)
    out: dict = {}
    js = set(J)
    for (K, L), c in a._terms.items():
        if not js.issubset(K):
            continue
        rest = tuple(k for k in K if k not in js)
        s, _ = merge_sign(J, rest)
        key = (rest, L)
        val = c if s > 0 else -c
        out[key] = out[key] + val if key in out else val
    return Form(a.n, out)


@dataclass(frozen=True)
class SimplicityResult:
    simple: bool
    factors: tuple[Form, ...] | None = None
    violated: tuple[tuple[int, ...], Form] | None = None

    def __bool__(self):
        return self.simple


def is_simple(eta: Form, tol: float | None = None) -> SimplicityResult:
    """Plücker test for a (p,0)-form.

    ``eta`` is simple iff ``contract(J, eta) ^ eta == 0`` for every
    (p-1)-multi-index J.  On success the factors are the contractions of
    ``eta`` by ``e_{I - i}`` for the largest coefficient ``eta_I``, rescaled
    so their wedge reproduces ``eta``.  ``tol`` applies only to float forms.
    """
    if eta.is_zero(tol):
        return SimplicityResult(True, ())
    bd = eta.bidegrees()
    if len(bd) != 1 or next(iter(bd))[1] != 0:
        raise ValueError(f"is_simple expects a homogeneous (p,0)-form, got bidegrees {sorted(bd)}")
    p = next(iter(bd))[0]
    n = eta.n
    if p <= 1:
        return SimplicityResult(True, (eta,))
    for J in multi_indices(n, p - 1):
        psi = contract(J, eta)
        if psi.is_zero(tol):
            continue
        rel = wedge(psi, eta)
        if not rel.is_zero(tol):
            return SimplicityResult(False, violated=(J, rel))
    # factorization
    (Ibest, _), cbest = max(eta.items(), key=lambda kv: abs(complex(kv[1])))
    factors = []
    for pos in range(p):
        rest = Ibest[:pos] + Ibest[pos + 1:]
        s, _ = merge_sign(rest, (Ibest[pos],))
        factors.append(contract(rest, eta) * s)
    prod = factors[0]
    for f in factors[1:]:
        prod = wedge(prod, f)
    kappa = prod[(Ibest, ())]
    factors[0] = factors[0] * (cbest / kappa)
    return SimplicityResult(True, tuple(factors))


# real structure -----------------------------------------------------------


class RealBasis:
    """Rational basis of the real subspace ``{a : conj(a) = a}`` of given bidegrees.

    Orbits of the conjugation on basis keys give basis elements
    ``e_a + s e_b`` and ``i e_a - i s e_b`` (``s`` the sign of conjugation),
    or a single ``e_a`` / ``i e_a`` for self-conjugate keys.  Coordinates of a
    real form on this basis are rational whenever its coefficients are.
    """

    def __init__(self, n: int, bidegrees: Iterable[tuple[int, int]]):
        self.n = n
        self.bidegrees = tuple(sorted(set(bidegrees)))
        keys = [(I, J) for p, q in self.bidegrees for I in multi_indices(n, p) for J in multi_indices(n, q)]
        keyset = set(keys)
        for I, J in keys:
            if (J, I) not in keyset:
                raise ValueError("bidegree set is not closed under conjugation")
        self._slots = []  # (kind, key_a, key_b, sign)
        seen = set()
        for a in keys:
            if a in seen:
                continue
            I, J = a
            b = (J, I)
            s = -1 if (len(I) * len(J)) & 1 else 1
            seen.add(a)
            seen.add(b)
            if a == b:
                self._slots.append(("re" if s == 1 else "im", a, b, s))
            else:
                self._slots.append(("re", a, b, s))
                self._slots.append(("im", a, b, s))
        self._elements = None

    def __len__(self):
        return len(self._slots)

    @property
    def dim(self) -> int:
        return len(self._slots)

    def element(self, k: int) -> Form:
        kind, a, b, s = self._slots[k]
        if a == b:
            return Form(self.n, {a: ONE if kind == "re" else IMAG})
        if kind == "re":
            return Form(self.n, {a: ONE, b: GaussianRational(s)})
        return Form(self.n, {a: IMAG, b: IMAG * (-s)})

    @property
    def elements(self) -> list[Form]:
        if self._elements is None:
            self._elements = [self.element(k) for k in range(len(self))]
        return self._elements

    def coords(self, form: Form) -> list:
        """Real coordinates of a real form (Fractions for exact forms)."""
        out = []
        for kind, a, b, s in self._slots:
            c = form[a]
            re, im = _re_im(c)
            out.append(re if kind == "re" else im)
        return out

    def form(self, coords: Iterable) -> Form:
        terms: dict = {}
        for (kind, a, b, s), x in zip(self._slots, coords):
            if not x:
                continue
            if isinstance(x, float):
                x = complex(x)
            unit = ONE if kind == "re" else IMAG
            if isinstance(x, complex):
                unit = complex(unit)
            terms[a] = terms.get(a, 0) + unit * x
            if a != b:
                conj_unit = unit.conjugate() * s
                terms[b] = terms.get(b, 0) + conj_unit * x
        return Form(self.n, terms)


def _re_im(c):
    if isinstance(c, GaussianRational):
        return c.re, c.im
    if isinstance(c, int):
        return Fraction(c), Fraction(0)
    if isinstance(c, Fraction):
        return c, Fraction(0)
    c = complex(c)
    return c.real, c.imag


class ComplexParam:
    """Real parametrization ``c = x + i y`` of all complex forms of given bidegrees.

    Same interface as :class:`RealBasis`; used for complex unknowns and for
    complex-valued equations.
    """

    def __init__(self, n: int, bidegrees: Iterable[tuple[int, int]]):
        self.n = n
        self.bidegrees = tuple(sorted(set(bidegrees)))
        self.keys = [(I, J) for p, q in self.bidegrees for I in multi_indices(n, p) for J in multi_indices(n, q)]
        self._elements = None

    def __len__(self):
        return 2 * len(self.keys)

    @property
    def dim(self) -> int:
        return 2 * len(self.keys)

    @property
    def elements(self) -> list[Form]:
        if self._elements is None:
            els = []
            for k in self.keys:
                els.append(Form(self.n, {k: ONE}))
                els.append(Form(self.n, {k: IMAG}))
            self._elements = els
        return self._elements

    def coords(self, form: Form) -> list:
        out = []
        for k in self.keys:
            re, im = _re_im(form[k])
            out.append(re)
            out.append(im)
        return out

    def form(self, coords: Iterable) -> Form:
        coords = list(coords)
        terms = {}
        for m, k in enumerate(self.keys):
            x, y = coords[2 * m], coords[2 * m + 1]
            if isinstance(x, float) or isinstance(y, float):
                c = complex(x, y)
            else:
                c = GaussianRational(x, y)
            if c:
                terms[k] = c
        return Form(self.n, terms)


@lru_cache(maxsize=None)
def real_basis(n: int, p: int) -> RealBasis:
    """Real basis of the (p,p)-forms."""
    return RealBasis(n, [(p, p)])


@lru_cache(maxsize=None)
def real_basis_degree(n: int, k: int) -> RealBasis:
    """Real basis of all k-forms."""
    return RealBasis(n, [(a, k - a) for a in range(max(0, k - n), min(k, n) + 1)])
