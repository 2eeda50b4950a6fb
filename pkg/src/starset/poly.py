"""Sparse multivariate polynomials with float coefficients.

Terms are stored in a dict keyed by exponent tuples.  Canonical form keeps no
exact-zero coefficients, so two polynomials are equal iff their term maps are
equal.  All operations return new objects; instances are never mutated after
construction and are safe to share between threads.
"""

from __future__ import annotations

import math
from itertools import combinations_with_replacement
from typing import Mapping, Sequence

import numpy as np

# A monomial is an exponent tuple of length n (the ambient dimension).
Monomial = tuple


def grlex_key(exps: Monomial):
    """Sort key for graded-lexicographic order (x1 before x2, degree first)."""
    return (sum(exps), tuple(-e for e in exps))


def monomial_basis(n: int, d: int) -> list[Monomial]:
    """All monomials in n variables of total degree <= d, graded-lex ordered.

    Length is C(n+d, d).
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    if d < 0:
        raise ValueError(f"need d >= 0, got {d}")
    out = []
    for deg in range(d + 1):
        for combo in combinations_with_replacement(range(n), deg):
            e = [0] * n
            for i in combo:
                e[i] += 1
            out.append(tuple(e))
    out.sort(key=grlex_key)
    return out


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x + y for x, y in zip(a, b))


class Polynomial:
    """Sparse polynomial sum(coef * x^exps) in ``n`` variables."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Mapping[Monomial, float] | None = None):
        self.n = int(n)
        clean: dict[Monomial, float] = {}
        if terms:
            for m, c in terms.items():
                if len(m) != self.n:
                    raise ValueError(f"exponent tuple {m} has length {len(m)}, expected {self.n}")
                c = float(c)
                if c != 0.0:
                    clean[tuple(int(e) for e in m)] = clean.get(tuple(m), 0.0) + c
            clean = {m: c for m, c in clean.items() if c != 0.0}
        self.terms = clean

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, n: int) -> "Polynomial":
        return cls(n, {})

    @classmethod
    def constant(cls, n: int, value: float) -> "Polynomial":
        return cls(n, {tuple([0] * n): value})

    @classmethod
    def variable(cls, n: int, i: int) -> "Polynomial":
        e = [0] * n
        e[i] = 1
        return cls(n, {tuple(e): 1.0})

    @classmethod
    def monomial(cls, n: int, exps: Monomial, coef: float = 1.0) -> "Polynomial":
        return cls(n, {tuple(exps): coef})

    # -- basic queries -----------------------------------------------------

    def degree(self) -> int:
        """Total degree; deg(0) is defined as 0."""
        if not self.terms:
            return 0
        return max(sum(m) for m in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, exps: Monomial) -> float:
        return self.terms.get(tuple(exps), 0.0)

    def __eq__(self, other) -> bool:
        return isinstance(other, Polynomial) and self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, frozenset(self.terms.items())))

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other) -> "Polynomial":
        if isinstance(other, (int, float)):
            other = Polynomial.constant(self.n, other)
        if self.n != other.n:
            raise ValueError("dimension mismatch")
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0.0) + c
        return Polynomial(self.n, out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.n, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "Polynomial":
        if isinstance(other, (int, float)):
            other = Polynomial.constant(self.n, other)
        return self + (-other)

    def __rsub__(self, other) -> "Polynomial":
        return (-self) + other

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, (int, float)):
            return Polynomial(self.n, {m: c * other for m, c in self.terms.items()})
        if self.n != other.n:
            raise ValueError("dimension mismatch")
        out: dict[Monomial, float] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = mono_mul(m1, m2)
                out[m] = out.get(m, 0.0) + c1 * c2
        return Polynomial(self.n, out)

    __rmul__ = __mul__

    # -- evaluation --------------------------------------------------------

    def eval(self, x: Sequence[float]) -> float:
        """Evaluate at a single point of length n."""
        if len(x) != self.n:
            raise ValueError(f"point has length {len(x)}, expected {self.n}")
        total = 0.0
        for m, c in self.terms.items():
            t = c
            for xi, e in zip(x, m):
                if e:
                    t *= xi**e
            total += t
        return total

    def eval_many(self, pts: np.ndarray, chunk: int = 1 << 17) -> np.ndarray:
        """Vectorized evaluation at an (N, n) array of points."""
        pts = np.asarray(pts, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.n:
            raise ValueError(f"expected (N, {self.n}) array, got {pts.shape}")
        if not self.terms:
            return np.zeros(len(pts))
        exps = np.array(list(self.terms.keys()), dtype=float)  # (T, n)
        coefs = np.array(list(self.terms.values()))  # (T,)
        out = np.empty(len(pts))
        for lo in range(0, len(pts), chunk):
            block = pts[lo : lo + chunk]
            powers = block[:, None, :] ** exps[None, :, :]
            out[lo : lo + chunk] = powers.prod(axis=2) @ coefs
        return out

    # -- calculus and substitutions ----------------------------------------

    def gradient(self) -> list["Polynomial"]:
        """Partial derivatives, one polynomial per variable."""
        grads = []
        for j in range(self.n):
            terms: dict[Monomial, float] = {}
            for m, c in self.terms.items():
                if m[j] == 0:
                    continue
                e = list(m)
                e[j] -= 1
                terms[tuple(e)] = terms.get(tuple(e), 0.0) + c * m[j]
            grads.append(Polynomial(self.n, terms))
        return grads

    def substitute_scale(self, s: float) -> "Polynomial":
        """Return q with q(x) = p(x/s); each coefficient divides by s^degree."""
        if s <= 0:
            raise ValueError(f"scale must be positive, got {s}")
        return Polynomial(self.n, {m: c / s ** sum(m) for m, c in self.terms.items()})

    def translate(self, t: Sequence[float]) -> "Polynomial":
        """Return q with q(x) = p(x - t), expanded to canonical form."""
        if len(t) != self.n:
            raise ValueError(f"translation has length {len(t)}, expected {self.n}")
        out: dict[Monomial, float] = {}
        for m, c in self.terms.items():
            # expand prod_j (x_j - t_j)^{e_j} one axis at a time
            partial: dict[Monomial, float] = {tuple([0] * self.n): c}
            for j, e in enumerate(m):
                if e == 0:
                    continue
                nxt: dict[Monomial, float] = {}
                for k in range(e + 1):
                    w = math.comb(e, k) * (-t[j]) ** (e - k)
                    if w == 0.0:
                        continue
                    for mm, cc in partial.items():
                        ee = list(mm)
                        ee[j] += k
                        key = tuple(ee)
                        nxt[key] = nxt.get(key, 0.0) + cc * w
                partial = nxt
            for mm, cc in partial.items():
                out[mm] = out.get(mm, 0.0) + cc
        return Polynomial(self.n, out)

    def integrate_over_box(self, box: Sequence[tuple[float, float]]) -> float:
        """Exact integral over an axis-aligned box given as per-axis (lo, hi)."""
        if len(box) != self.n:
            raise ValueError(f"box has {len(box)} axes, expected {self.n}")
        for lo, hi in box:
            if not lo < hi:
                raise ValueError(f"degenerate box axis ({lo}, {hi})")
        total = 0.0
        for m, c in self.terms.items():
            t = c
            for (lo, hi), e in zip(box, m):
                t *= (hi ** (e + 1) - lo ** (e + 1)) / (e + 1)
            total += t
        return total

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        terms = sorted(self.terms.items(), key=lambda kv: grlex_key(kv[0]))
        return {"n": self.n, "terms": [{"exps": list(m), "coef": c} for m, c in terms]}

    @classmethod
    def from_dict(cls, d: dict) -> "Polynomial":
        return cls(d["n"], {tuple(t["exps"]): t["coef"] for t in d["terms"]})

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m, c in sorted(self.terms.items(), key=lambda kv: grlex_key(kv[0])):
            mono = "*".join(
                f"x{j + 1}" if e == 1 else f"x{j + 1}^{e}" for j, e in enumerate(m) if e
            )
            parts.append(f"{c:g}" if not mono else f"{c:g}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")
