"""Simultaneous inner/outer sublevel-set approximation by scaling bisection.

For a set X = {g_i <= 1} containing the origin, a feasibility program asks
for a polynomial f whose 1-sublevel set F fits F <= X <= sF:

  * for every i:  f(x) - (1+eps) - lambda_i(x) (g_i(x) - 1)  is SOS,
  * 1 - f(x/s) - sum_i mu_i(x) (1 - g_i(x))                  is SOS,
  * every lambda_i, mu_i                                      is SOS.

The smallest workable s is located by doubling followed by bisection; the
returned certificate always comes from a fresh solve at the final upper
bound.  Also provides the ray-sampling lower-bound estimator for s and the
box-integral ("l1") outer-approximation baseline.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import conic, soscomp
from .poly import Polynomial
from .semialg import SemialgebraicSet, ray_boundary_crossings
from .soscomp import Certificate, LinPoly, SosProgram, default_multiplier_degree

logger = logging.getLogger(__name__)

EPS_DEFAULT = 1e-3
S_CAP = 2.0**20


class CertificateError(RuntimeError):
    """Solver claimed feasibility but the certificate does not check out."""


class ApproximationError(RuntimeError):
    """The scaling search could not complete."""


@dataclass
class FindApproxResult:
    status: conic.Status
    f: Polynomial | None = None
    lambdas: list[Polynomial] = field(default_factory=list)
    mus: list[Polynomial] = field(default_factory=list)
    certificate: Certificate | None = None
    solution: conic.ConicSolution | None = None

    @property
    def feasible(self) -> bool:
        return self.status == conic.Status.FEASIBLE


def _multiplier_degrees(X: SemialgebraicSet, degree: int, mult_degree) -> list[int]:
    """Gram-basis degrees of the multipliers (polynomial degree is twice this)."""
    if mult_degree is None:
        return [default_multiplier_degree(degree, g.degree()) for g in X.constraints]
    if isinstance(mult_degree, int):
        return [mult_degree] * X.m
    return list(mult_degree)


def find_approx(
    X: SemialgebraicSet,
    s: float,
    degree: int,
    eps: float = EPS_DEFAULT,
    mult_degree: int | list[int] | None = None,
    verbose: bool = False,
) -> FindApproxResult:
    """One feasibility solve for an inner/outer pair at fixed scaling s.

    ``mult_degree`` overrides the Gram-basis degree of the multipliers
    (polynomial degree twice that); the default gives every multiplier the
    approximation degree.
    """
    if not s > 1.0:
        raise ValueError(f"scaling must satisfy s > 1, got {s}")
    if not eps > 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    if degree % 2 != 0 or degree < 2:
        raise ValueError(f"approximation degree must be even and >= 2, got {degree}")

    n = X.n
    degs = _multiplier_degrees(X, degree, mult_degree)
    prog = SosProgram()
    f = prog.new_free_poly(n, degree, "f")

    lambdas = []
    for i, g in enumerate(X.constraints):
        _, lam = prog.new_sos_poly(n, 2 * degs[i], f"lambda[{i}]")
        lambdas.append(lam)
        target = f.plus_const_poly(Polynomial.constant(n, -(1.0 + eps)))
        target = target.minus(lam.times_poly(g - 1.0))
        prog.require_sos(target, f"inner[{i}]")

    outer = LinPoly.from_polynomial(Polynomial.constant(n, 1.0)).minus(f.substitute_scale(s))
    mus = []
    for i, g in enumerate(X.constraints):
        _, mu = prog.new_sos_poly(n, 2 * degs[i], f"mu[{i}]")
        mus.append(mu)
        outer = outer.minus(mu.times_poly(1.0 - g))
    prog.require_sos(outer, "outer")

    sol = prog.solve(verbose=verbose)
    if sol.status == conic.Status.FEASIBLE:
        f_poly = f.assemble(sol)
        lam_polys = [lp.assemble(sol) for lp in lambdas]
        mu_polys = [lp.assemble(sol) for lp in mus]
        polys = {"f": f_poly}
        polys.update({f"lambda[{i}]": p for i, p in enumerate(lam_polys)})
        polys.update({f"mu[{i}]": p for i, p in enumerate(mu_polys)})
        cert = prog.certificate(sol, extra_polys=polys)
        _, _, valid = soscomp.verify_certificate(cert)
        if not valid:
            raise CertificateError(
                f"claimed feasibility fails verification "
                f"(residual={cert.residual:.3g}, min_eig={cert.min_eig:.3g})"
            )
        return FindApproxResult(
            status=sol.status, f=f_poly, lambdas=lam_polys, mus=mu_polys,
            certificate=cert, solution=sol,
        )
    if sol.status == conic.Status.INFEASIBLE:
        return FindApproxResult(status=sol.status, solution=sol)
    return FindApproxResult(status=conic.Status.UNKNOWN, solution=sol)


@dataclass
class ApproximationResult:
    """Inner polynomial f with scaling s_star so that {f<=1} <= X <= s{f<=1}."""

    f: Polynomial
    s_star: float
    eps: float
    s_tol: float
    lambdas: list[Polynomial]
    mus: list[Polynomial]
    certificate: Certificate
    bisection_trace: list[tuple[float, str]]

    def trace_is_consistent(self) -> bool:
        """Every infeasible probe lies strictly below every feasible probe."""
        inf = [s for s, st in self.bisection_trace if st == "Infeasible"]
        feas = [s for s, st in self.bisection_trace if st == "Feasible"]
        if feas and abs(min(feas) - self.s_star) > 1e-12 * self.s_star:
            return False
        return not inf or not feas or max(inf) < min(feas)

    def to_dict(self) -> dict:
        return {
            "f": self.f.to_dict(),
            "s_star": self.s_star,
            "eps": self.eps,
            "s_tol": self.s_tol,
            "lambdas": [p.to_dict() for p in self.lambdas],
            "mus": [p.to_dict() for p in self.mus],
            "certificate": {"residual": self.certificate.residual, "min_eig": self.certificate.min_eig},
            "bisection_trace": [[s, st] for s, st in self.bisection_trace],
        }


def approximate(
    X: SemialgebraicSet,
    degree: int,
    s_tol: float = 1e-3,
    eps: float = EPS_DEFAULT,
    mult_degree: int | list[int] | None = None,
    unknown_policy: str = "infeasible",
    s_cap: float = S_CAP,
    verbose: bool = False,
) -> ApproximationResult:
    """Scaling bisection: double the upper bound until feasible, then bisect.

    Solver Unknown is treated per ``unknown_policy``: "infeasible" keeps
    bisecting conservatively (s_star can only grow), "error" aborts.  The
    returned certificate comes from a fresh solve at the final upper bound.
    """
    if not X.max_g(np.zeros(X.n)) < 1.0:
        raise ValueError("origin must be strictly interior to X")
    if s_tol <= 0:
        raise ValueError("s_tol must be positive")
    if unknown_policy not in ("infeasible", "error"):
        raise ValueError(f"unknown_policy must be 'infeasible' or 'error', got {unknown_policy}")

    trace: list[tuple[float, str]] = []

    def probe(s: float) -> bool:
        res = find_approx(X, s, degree, eps=eps, mult_degree=mult_degree, verbose=verbose)
        trace.append((s, res.status.value if res.status != conic.Status.UNKNOWN else "Unknown"))
        if res.status == conic.Status.UNKNOWN:
            if unknown_policy == "error":
                raise ApproximationError(f"solver returned Unknown at s={s}")
            logger.warning("solver Unknown at s=%g treated as Infeasible", s)
            return False
        return res.feasible

    s_lb, s_ub = 1.0, 1.0 + s_tol
    while not probe(s_ub):
        s_lb = s_ub
        s_ub = 2.0 * s_ub
        if s_ub > s_cap:
            raise ApproximationError(
                f"no feasible scaling found up to s={s_cap:g}; degree {degree} cannot enclose X"
            )
    while s_ub - s_lb > s_tol:
        s_try = 0.5 * (s_ub + s_lb)
        if probe(s_try):
            s_ub = s_try
        else:
            s_lb = s_try

    final = find_approx(X, s_ub, degree, eps=eps, mult_degree=mult_degree, verbose=verbose)
    trace.append((s_ub, final.status.value if final.status != conic.Status.UNKNOWN else "Unknown"))
    if not final.feasible:
        raise ApproximationError(f"final solve at s={s_ub} returned {final.status.value}")
    return ApproximationResult(
        f=final.f,
        s_star=s_ub,
        eps=eps,
        s_tol=s_tol,
        lambdas=final.lambdas,
        mus=final.mus,
        certificate=final.certificate,
        bisection_trace=trace,
    )


def scaling_lower_bound_estimate(X: SemialgebraicSet, n_rays: int, seed: int = 0) -> float:
    """Ray-sampled lower bound on the achievable scaling.

    For each random ray, consecutive boundary crossings whose gap lies outside
    X give a ratio t_reenter/t_exit that any inner/outer pair must beat.
    Returns the max ratio seen (1.0 when every ray crosses once).
    """
    rng = np.random.default_rng(seed)
    best = 1.0
    for _ in range(n_rays):
        d = rng.standard_normal(X.n)
        nrm = np.linalg.norm(d)
        if nrm < 1e-12:
            continue
        d /= nrm
        ts = ray_boundary_crossings(X, d)
        for a, b in zip(ts, ts[1:]):
            if not X.membership(0.5 * (a + b) * d):
                best = max(best, b / a)
    return best


def _box_moment(exps, box) -> float:
    t = 1.0
    for (lo, hi), e in zip(box, exps):
        t *= (hi ** (e + 1) - lo ** (e + 1)) / (e + 1)
    return t


def _check_box_covers(X: SemialgebraicSet, box, n_dirs: int = 256, pad: float = 1e-9) -> None:
    rng = np.random.default_rng(12345)
    for k in range(n_dirs):
        if X.n == 2:
            th = 2.0 * math.pi * k / n_dirs
            d = np.array([math.cos(th), math.sin(th)])
        else:
            d = rng.standard_normal(X.n)
            d /= np.linalg.norm(d)
        t_last = ray_boundary_crossings(X, d)[-1]
        pt = t_last * d
        for (lo, hi), v in zip(box, pt):
            if v < lo - pad or v > hi + pad:
                raise ValueError(f"box does not cover X: boundary point {pt} escapes {box}")


def find_l1_outer(
    X: SemialgebraicSet,
    box,
    degree: int,
    mult_degree: int | list[int] | None = None,
    verbose: bool = False,
):
    """Outer approximation by minimizing the integral of f over a box.

    Solves min int_B f dx subject to f SOS, lambda_i SOS and
    f - 1 - sum_i lambda_i (1 - g_i) SOS, so that X <= B ∩ {f >= 1}.
    Returns (f, certificate, objective_value).
    """
    if degree % 2 != 0 or degree < 0:
        raise ValueError(f"degree must be even and >= 0, got {degree}")
    _check_box_covers(X, box)

    n = X.n
    degs = _multiplier_degrees(X, degree, mult_degree)
    prog = SosProgram()
    _, f = prog.new_sos_poly(n, degree, "f")

    target = f.plus_const_poly(Polynomial.constant(n, -1.0))
    lambdas = []
    for i, g in enumerate(X.constraints):
        _, lam = prog.new_sos_poly(n, 2 * degs[i], f"lambda[{i}]")
        lambdas.append(lam)
        target = target.minus(lam.times_poly(1.0 - g))
    prog.require_sos(target, "cover")

    objective = soscomp.LinExpr()
    for m, expr in f.terms.items():
        objective = objective.plus(expr.scaled(_box_moment(m, box)))
    prog.minimize(objective)

    sol = prog.solve(verbose=verbose)
    if sol.status != conic.Status.OPTIMAL:
        raise ApproximationError(f"box-integral program unexpectedly {sol.status.value}")
    f_poly = f.assemble(sol)
    polys = {"f": f_poly}
    polys.update({f"lambda[{i}]": lp.assemble(sol) for i, lp in enumerate(lambdas)})
    cert = prog.certificate(sol, extra_polys=polys)
    _, _, valid = soscomp.verify_certificate(cert)
    if not valid:
        raise CertificateError(
            f"box-integral certificate fails verification "
            f"(residual={cert.residual:.3g}, min_eig={cert.min_eig:.3g})"
        )
    return f_poly, cert, sol.objective_value


def check_sandwich(
    X: SemialgebraicSet,
    f: Polynomial,
    s: float,
    box,
    n_points: int = 1000,
    seed: int = 0,
    tol: float = 1e-6,
) -> int:
    """Count sampled violations of {f<=1} <= X and X <= s{f<=1}."""
    rng = np.random.default_rng(seed)
    lo = np.array([b[0] for b in box])
    hi = np.array([b[1] for b in box])
    pts = rng.uniform(lo, hi, size=(n_points, X.n))
    fv = f.eval_many(pts)
    gv = X.max_g_many(pts)
    fv_scaled = f.eval_many(pts / s)
    inner_bad = np.count_nonzero((fv <= 1.0) & (gv > 1.0 + tol))
    outer_bad = np.count_nonzero((gv <= 1.0) & (fv_scaled > 1.0 + tol))
    return int(inner_bad + outer_bad)
