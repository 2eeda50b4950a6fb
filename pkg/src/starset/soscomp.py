"""Compile sum-of-squares constraints into conic form.

A polynomial with affine unknown coefficients (``LinPoly``) is constrained to
equal z(x)^T P z(x) for a PSD Gram matrix P by matching coefficients monomial
by monomial.  Gram entries share one variable across the symmetric pair, and
monomials absent from both sides generate no row.

Compilation is pure; a single monotone counter allocates scalar variables and
block ids, so independently built constraint families can be merged into one
program.

The multiplier-based positivity certificates are sufficient in general and
necessary only under an Archimedean-type boundedness condition on the
constraint data; this module does not verify that condition, which remains
the caller's responsibility.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import conic
from .poly import Monomial, Polynomial, grlex_key, mono_mul, monomial_basis

CERT_TOL = 1e-6
PSD_TOL = 1e-7


def gram_basis_for(n: int, even_degree: int) -> list[Monomial]:
    """Monomial basis z(x) for an SOS polynomial of the given even degree."""
    if even_degree % 2 != 0 or even_degree < 0:
        raise ValueError(f"SOS degree must be even and >= 0, got {even_degree}")
    return monomial_basis(n, even_degree // 2)


def default_multiplier_degree(approx_degree: int, g_degree: int) -> int:
    """Default multiplier basis degree for an approximation of the given degree.

    Multiplier sizes are specified by the degree of their Gram basis (an SOS
    multiplier of basis degree d has polynomial degree 2d).  Matching only
    total degrees (approx_degree - g_degree) leaves the scaled feasibility
    program too weak to certify scalings near the geometric optimum on the
    worked examples; giving every multiplier polynomial degree equal to the
    approximation degree restores tightness at modest extra cost.
    """
    return max(0, math.ceil(approx_degree / 2))


class LinExpr:
    """Affine expression c0 + sum coef * var over conic variable references."""

    __slots__ = ("coeffs", "const")

    def __init__(self, coeffs: dict | None = None, const: float = 0.0):
        self.coeffs = dict(coeffs) if coeffs else {}
        self.const = float(const)

    def add_term(self, var, coef: float) -> None:
        c = self.coeffs.get(var, 0.0) + coef
        if c == 0.0:
            self.coeffs.pop(var, None)
        else:
            self.coeffs[var] = c

    def plus(self, other: "LinExpr") -> "LinExpr":
        out = LinExpr(self.coeffs, self.const + other.const)
        for v, c in other.coeffs.items():
            out.add_term(v, c)
        return out

    def scaled(self, f: float) -> "LinExpr":
        if f == 0.0:
            return LinExpr()
        return LinExpr({v: c * f for v, c in self.coeffs.items()}, self.const * f)

    def value(self, sol: conic.ConicSolution) -> float:
        return self.const + sol.value(self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs and self.const == 0.0


class LinPoly:
    """Polynomial whose coefficients are affine in conic decision variables."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: dict[Monomial, LinExpr] | None = None):
        self.n = n
        self.terms = terms if terms is not None else {}

    @classmethod
    def from_polynomial(cls, p: Polynomial) -> "LinPoly":
        return cls(p.n, {m: LinExpr(const=c) for m, c in p.terms.items()})

    def _expr(self, m: Monomial) -> LinExpr:
        e = self.terms.get(m)
        if e is None:
            e = self.terms[m] = LinExpr()
        return e

    def degree(self) -> int:
        degs = [sum(m) for m, e in self.terms.items() if not e.is_zero()]
        return max(degs, default=0)

    def plus(self, other: "LinPoly") -> "LinPoly":
        out = LinPoly(self.n, {m: LinExpr(e.coeffs, e.const) for m, e in self.terms.items()})
        for m, e in other.terms.items():
            out.terms[m] = out._expr(m).plus(e) if m in out.terms else LinExpr(e.coeffs, e.const)
        return out

    def scaled(self, f: float) -> "LinPoly":
        return LinPoly(self.n, {m: e.scaled(f) for m, e in self.terms.items()})

    def minus(self, other: "LinPoly") -> "LinPoly":
        return self.plus(other.scaled(-1.0))

    def plus_const_poly(self, p: Polynomial) -> "LinPoly":
        return self.plus(LinPoly.from_polynomial(p))

    def times_poly(self, p: Polynomial) -> "LinPoly":
        """Product with a known-coefficient polynomial."""
        out = LinPoly(self.n)
        for m1, e in self.terms.items():
            for m2, c in p.terms.items():
                m = mono_mul(m1, m2)
                out.terms[m] = out._expr(m).plus(e.scaled(c)) if m in out.terms else e.scaled(c)
        return out

    def substitute_scale(self, s: float) -> "LinPoly":
        """Coefficients of q(x) = p(x/s)."""
        if s <= 0:
            raise ValueError("scale must be positive")
        return LinPoly(self.n, {m: e.scaled(s ** -sum(m)) for m, e in self.terms.items()})

    def assemble(self, sol: conic.ConicSolution) -> Polynomial:
        """Substitute solved variable values to get a numeric polynomial."""
        return Polynomial(self.n, {m: e.value(sol) for m, e in self.terms.items()})


@dataclass(frozen=True)
class GramBlock:
    """A PSD matrix variable indexed by a graded-lex monomial basis."""

    block_id: str
    basis: tuple[Monomial, ...]

    @property
    def size(self) -> int:
        return len(self.basis)


def gram_expansion(gb: GramBlock) -> LinPoly:
    """z(x)^T P z(x) as a LinPoly over the Gram entries of the block."""
    n = len(gb.basis[0])
    out = LinPoly(n)
    for i in range(gb.size):
        for j in range(i, gb.size):
            m = mono_mul(gb.basis[i], gb.basis[j])
            out._expr(m).add_term((gb.block_id, i, j), 1.0 if i == j else 2.0)
    return out


def gram_matrix_polynomial(basis, G: np.ndarray, n: int) -> Polynomial:
    """Numeric z^T G z for a concrete symmetric matrix G."""
    terms: dict[Monomial, float] = {}
    k = len(basis)
    for i in range(k):
        for j in range(i, k):
            m = mono_mul(basis[i], basis[j])
            w = (1.0 if i == j else 2.0) * G[i, j]
            terms[m] = terms.get(m, 0.0) + w
    return Polynomial(n, terms)


def compile_sos_equal(expr: LinPoly, gram: GramBlock) -> list[conic.Row]:
    """Equalities tying expr's coefficients to the Gram expansion of ``gram``.

    One row per monomial appearing on either side; raises if expr's degree
    exceeds what the basis can represent.
    """
    cap = 2 * max(sum(m) for m in gram.basis)
    if expr.degree() > cap:
        raise ValueError(f"expression degree {expr.degree()} exceeds basis capacity {cap}")
    gram_cols: dict[Monomial, dict] = {}
    for i in range(gram.size):
        for j in range(i, gram.size):
            m = mono_mul(gram.basis[i], gram.basis[j])
            col = gram_cols.setdefault(m, {})
            ref = (gram.block_id, i, j)
            col[ref] = col.get(ref, 0.0) + (1.0 if i == j else 2.0)
    monos = set(gram_cols)
    monos.update(m for m, e in expr.terms.items() if not e.is_zero())
    rows = []
    for m in sorted(monos, key=grlex_key):
        e = expr.terms.get(m, LinExpr())
        coeffs = dict(e.coeffs)
        for ref, c in gram_cols.get(m, {}).items():
            coeffs[ref] = coeffs.get(ref, 0.0) - c
        rows.append((coeffs, -e.const))
    return rows


@dataclass
class CertBlock:
    """One SOS identity: a numeric target that must equal z^T G z, G PSD."""

    label: str
    target: Polynomial
    gram: np.ndarray
    basis: tuple[Monomial, ...]


@dataclass
class Certificate:
    """A-posteriori record of all SOS identities of a solved program."""

    blocks: list[CertBlock]
    polynomials: dict = field(default_factory=dict)  # label -> recovered Polynomial
    residual: float = math.nan
    min_eig: float = math.nan


def verify_certificate(cert: Certificate, cert_tol: float = CERT_TOL, psd_tol: float = PSD_TOL):
    """Recompute residual and min Gram eigenvalue from the solved values.

    Returns (residual, min_eig, valid).  The residual is the max absolute
    coefficient mismatch between each target polynomial and its Gram
    expansion; min_eig is over all Gram blocks.
    """
    residual = 0.0
    min_eig = math.inf
    for blk in cert.blocks:
        expansion = gram_matrix_polynomial(blk.basis, blk.gram, blk.target.n)
        diff = blk.target - expansion
        if diff.terms:
            residual = max(residual, max(abs(c) for c in diff.terms.values()))
        if blk.gram.size:
            min_eig = min(min_eig, float(np.linalg.eigvalsh(blk.gram)[0]))
    if min_eig is math.inf:
        min_eig = 0.0
    cert.residual = residual
    cert.min_eig = min_eig
    valid = residual <= cert_tol and min_eig >= -psd_tol
    return residual, min_eig, valid


class SosProgram:
    """Incremental builder for SOS feasibility/optimization programs."""

    def __init__(self):
        self.problem = conic.ConicProblem()
        self._block_counter = 0
        self.scalar_names: list[str] = []
        self.eq_labels: list[str] = []
        # identities: (label, target LinPoly, GramBlock) for certificate checks
        self.identities: list[tuple[str, LinPoly, GramBlock]] = []

    # -- variable allocation -------------------------------------------------

    def new_scalar(self, name: str = "") -> int:
        idx = self.problem.n_scalars
        self.problem.n_scalars += 1
        self.scalar_names.append(name or f"u{idx}")
        return idx

    def new_free_poly(self, n: int, degree: int, name: str = "p") -> LinPoly:
        out = LinPoly(n)
        for m in monomial_basis(n, degree):
            var = self.new_scalar(f"{name}[{','.join(map(str, m))}]")
            out.terms[m] = LinExpr({var: 1.0})
        return out

    def new_gram_block(self, n: int, even_degree: int, label: str) -> GramBlock:
        basis = tuple(gram_basis_for(n, even_degree))
        block_id = f"G{self._block_counter}_{label}"
        self._block_counter += 1
        self.problem.psd_blocks.append((block_id, len(basis)))
        return GramBlock(block_id=block_id, basis=basis)

    def new_sos_poly(self, n: int, even_degree: int, label: str) -> tuple[GramBlock, LinPoly]:
        gb = self.new_gram_block(n, even_degree, label)
        lp = gram_expansion(gb)
        self.identities.append((label, lp, gb))
        return gb, lp

    # -- constraints -----------------------------------------------------------

    def require_sos(self, target: LinPoly, label: str, basis_degree: int | None = None) -> GramBlock:
        """Constrain target(x) to be SOS via a fresh Gram block."""
        if basis_degree is None:
            basis_degree = math.ceil(target.degree() / 2)
        gb = self.new_gram_block(target.n, 2 * basis_degree, label)
        rows = compile_sos_equal(target, gb)
        self.problem.equalities.extend(rows)
        self.eq_labels.extend(f"{label}" for _ in rows)
        self.identities.append((label, target, gb))
        return gb

    def add_eq(self, expr: LinExpr, rhs: float = 0.0) -> None:
        self.problem.equalities.append((dict(expr.coeffs), rhs - expr.const))
        self.eq_labels.append("explicit")

    def add_ineq(self, expr: LinExpr, rhs: float = 0.0) -> None:
        self.problem.inequalities.append((dict(expr.coeffs), rhs - expr.const))

    def minimize(self, expr: LinExpr) -> None:
        self.problem.objective = dict(expr.coeffs)

    def maximize(self, expr: LinExpr) -> None:
        self.problem.objective = {v: -c for v, c in expr.coeffs.items()}

    # -- solving ---------------------------------------------------------------

    def solve(self, **kwargs) -> conic.ConicSolution:
        return conic.solve(self.problem, **kwargs)

    def certificate(self, sol: conic.ConicSolution, extra_polys: dict | None = None) -> Certificate:
        """Assemble the numeric certificate for a Feasible/Optimal solution."""
        blocks = []
        for label, target, gb in self.identities:
            blocks.append(
                CertBlock(
                    label=label,
                    target=target.assemble(sol),
                    gram=sol.blocks[gb.block_id],
                    basis=gb.basis,
                )
            )
        cert = Certificate(blocks=blocks, polynomials=dict(extra_polys or {}))
        verify_certificate(cert)
        return cert

    def dump_equalities_csv(self, path: str) -> None:
        """Debug dump: one row per compiled equality."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["label", "rhs", "terms"])
            for label, (coeffs, rhs) in zip(self.eq_labels, self.problem.equalities):
                terms = " ".join(
                    f"{self._var_name(v)}:{c:.17g}" for v, c in sorted(coeffs.items(), key=str)
                )
                w.writerow([label, f"{rhs:.17g}", terms])

    def _var_name(self, v):
        if isinstance(v, (int, np.integer)):
            return self.scalar_names[v]
        bid, i, j = v
        return f"{bid}[{i},{j}]"
