"""Conic solver contract: free scalars, PSD blocks, linear rows, linear cost.

Problems are solved by Clarabel behind this module's interface; every answer
is re-verified independently of the solver before it is reported.  Feasible
and Optimal imply the re-checked linear residual is within ``FEAS_TOL`` and
every PSD block has min eigenvalue >= -PSD_FEAS_TOL.  Infeasible is only
reported together with a Farkas certificate whose contradiction margin
passes ``INFEAS_TOL``.  Anything the solver cannot support with a verifiable
answer degrades to Unknown (or Unbounded for LPs with unbounded objective).

Variables are referenced as either an ``int`` (scalar variable index) or a
tuple ``(block_id, i, j)`` with i <= j (entry of a symmetric PSD block).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

import numpy as np
import scipy.sparse as sp

# Acceptance gates for the independent re-check of solver answers.  The
# linear gate is per-row relative; one decade of slack over the solver's
# 1e-9 target absorbs equilibration scaling on O(10)-coefficient data.
# Certificate verification downstream keeps its own absolute bars.
FEAS_TOL = 1e-7
PSD_FEAS_TOL = 1e-7
INFEAS_TOL = 1e-9
_CERT_REL_TOL = 1e-6

Row = tuple[dict, float]  # (coeffs keyed by variable reference, rhs)


class Status(Enum):
    OPTIMAL = "Optimal"
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    UNKNOWN = "Unknown"


class SolverIndeterminate(RuntimeError):
    """Raised by callers for whom an Unknown status is not a valid state."""


@dataclass
class FarkasCertificate:
    """Dual certificate of primal infeasibility (normalized to unit max norm).

    Contract: y_ineq >= 0, PSD components PSD, A^T y ~ 0, and b^T y = -margin
    with margin >= INFEAS_TOL.
    """

    y_eq: np.ndarray
    y_ineq: np.ndarray
    y_psd: dict
    margin: float
    residual: float  # ||A^T y||_inf


@dataclass
class ConicProblem:
    n_scalars: int = 0
    psd_blocks: list = field(default_factory=list)  # [(block_id, size)]
    equalities: list = field(default_factory=list)  # [(coeffs, rhs)]
    inequalities: list = field(default_factory=list)  # [(coeffs, rhs)] meaning a.y <= rhs
    objective: dict = field(default_factory=dict)  # minimized; empty = feasibility

    def block_size(self, block_id: str) -> int:
        for bid, k in self.psd_blocks:
            if bid == block_id:
                return k
        raise KeyError(block_id)

    def validate(self) -> None:
        sizes = {}
        for bid, k in self.psd_blocks:
            if k < 1:
                raise ValueError(f"PSD block {bid} has size {k} < 1")
            if bid in sizes:
                raise ValueError(f"duplicate PSD block id {bid}")
            sizes[bid] = k
        for coeffs, _ in [*self.equalities, *self.inequalities, (self.objective, 0.0)]:
            for ref in coeffs:
                if isinstance(ref, (int, np.integer)):
                    if not 0 <= ref < self.n_scalars:
                        raise ValueError(f"scalar variable {ref} out of range")
                else:
                    bid, i, j = ref
                    if bid not in sizes:
                        raise ValueError(f"unknown PSD block {bid}")
                    if not (0 <= i <= j < sizes[bid]):
                        raise ValueError(f"bad PSD entry {ref}")


@dataclass
class ConicSolution:
    status: Status
    scalars: np.ndarray | None = None
    blocks: dict = field(default_factory=dict)  # block_id -> dense symmetric matrix
    objective_value: float = math.nan
    primal_residual: float = math.nan
    certificate: FarkasCertificate | None = None
    ineq_duals: np.ndarray | None = None
    info: dict = field(default_factory=dict)

    def value(self, coeffs: Mapping) -> float:
        """Evaluate a linear functional at the solution."""
        total = 0.0
        for ref, c in coeffs.items():
            if isinstance(ref, (int, np.integer)):
                total += c * self.scalars[ref]
            else:
                bid, i, j = ref
                total += c * self.blocks[bid][i, j]
        return total


def _triangle(k: int):
    """Upper-triangle (i, j) entries in column-major order (svec layout)."""
    return [(i, j) for j in range(k) for i in range(j + 1)]


class _Layout:
    """Column layout: scalars first, then svec entries per PSD block."""

    def __init__(self, problem: ConicProblem):
        self.n_scalars = problem.n_scalars
        self.offsets = {}
        col = problem.n_scalars
        for bid, k in problem.psd_blocks:
            self.offsets[bid] = col
            col += k * (k + 1) // 2
        self.n_cols = col
        self._tri_index = {}
        for bid, k in problem.psd_blocks:
            for pos, (i, j) in enumerate(_triangle(k)):
                self._tri_index[(bid, i, j)] = self.offsets[bid] + pos

    def col(self, ref) -> int:
        if isinstance(ref, (int, np.integer)):
            return int(ref)
        bid, i, j = ref
        return self._tri_index[(bid, i, j)]


def _to_matrix_rows(problem: ConicProblem, layout: _Layout, rows: list):
    data, ri, ci, rhs = [], [], [], []
    for r, (coeffs, b) in enumerate(rows):
        rhs.append(float(b))
        for ref, c in coeffs.items():
            ri.append(r)
            ci.append(layout.col(ref))
            data.append(float(c))
    mat = sp.coo_matrix((data, (ri, ci)), shape=(len(rows), layout.n_cols))
    return mat, np.array(rhs)


def _assemble(problem: ConicProblem):
    import clarabel

    layout = _Layout(problem)
    A_eq, b_eq = _to_matrix_rows(problem, layout, problem.equalities)
    A_in, b_in = _to_matrix_rows(problem, layout, problem.inequalities)

    # PSD rows: s = svec(P) with sqrt(2)-scaled off-diagonals, so A = -D.
    data, ri, ci = [], [], []
    r = 0
    for bid, k in problem.psd_blocks:
        for i, j in _triangle(k):
            ri.append(r)
            ci.append(layout.col((bid, i, j)))
            data.append(-1.0 if i == j else -math.sqrt(2.0))
            r += 1
    A_psd = sp.coo_matrix((data, (ri, ci)), shape=(r, layout.n_cols))
    b_psd = np.zeros(r)

    A = sp.vstack([A_eq, A_in, A_psd]).tocsc()
    b = np.concatenate([b_eq, b_in, b_psd])
    cones = []
    if len(problem.equalities):
        cones.append(clarabel.ZeroConeT(len(problem.equalities)))
    if len(problem.inequalities):
        cones.append(clarabel.NonnegativeConeT(len(problem.inequalities)))
    for _, k in problem.psd_blocks:
        cones.append(clarabel.PSDTriangleConeT(k))

    q = np.zeros(layout.n_cols)
    for ref, c in problem.objective.items():
        q[layout.col(ref)] += float(c)
    P = sp.csc_matrix((layout.n_cols, layout.n_cols))
    return layout, P, q, A, b, cones


def _extract(problem: ConicProblem, layout: _Layout, x: np.ndarray):
    scalars = np.array(x[: problem.n_scalars])
    blocks = {}
    for bid, k in problem.psd_blocks:
        M = np.zeros((k, k))
        off = layout.offsets[bid]
        for pos, (i, j) in enumerate(_triangle(k)):
            M[i, j] = M[j, i] = x[off + pos]
        blocks[bid] = M
    return scalars, blocks


def _row_values(rows: list, scalars, blocks) -> np.ndarray:
    vals = np.zeros(len(rows))
    for r, (coeffs, _) in enumerate(rows):
        t = 0.0
        for ref, c in coeffs.items():
            if isinstance(ref, (int, np.integer)):
                t += c * scalars[ref]
            else:
                bid, i, j = ref
                t += c * blocks[bid][i, j]
        vals[r] = t
    return vals


def check_primal(problem: ConicProblem, scalars, blocks) -> tuple[float, float]:
    """(linear violation, PSD violation) of a candidate solution.

    The linear part is the max per-row residual, measured relative to the
    row's coefficient magnitude (absolute for rows with O(1) data); the PSD
    part is the most negative block eigenvalue as a positive number.
    Linear rows are gated at FEAS_TOL, blocks at PSD_FEAS_TOL (one decade
    of slack: interior-point block entries carry ~1e-8 of scaling noise on
    badly conditioned data).
    """
    lin = 0.0
    if problem.equalities:
        vals = _row_values(problem.equalities, scalars, blocks)
        rhs = np.array([b for _, b in problem.equalities])
        scale = np.array(
            [max(1.0, max(map(abs, coeffs.values()), default=0.0)) for coeffs, _ in problem.equalities]
        )
        lin = max(lin, float((np.abs(vals - rhs) / scale).max()))
    if problem.inequalities:
        vals = _row_values(problem.inequalities, scalars, blocks)
        rhs = np.array([b for _, b in problem.inequalities])
        scale = np.array(
            [max(1.0, max(map(abs, coeffs.values()), default=0.0)) for coeffs, _ in problem.inequalities]
        )
        lin = max(lin, float((np.maximum(vals - rhs, 0.0) / scale).max()))
    psd = 0.0
    for M in blocks.values():
        w = np.linalg.eigvalsh(M)
        psd = max(psd, float(max(0.0, -w[0])))
    return lin, psd


def _verify_farkas(problem: ConicProblem, A, b, z: np.ndarray) -> FarkasCertificate | None:
    nrm = float(np.abs(z).max()) if len(z) else 0.0
    if nrm <= 0.0 or not np.isfinite(nrm):
        return None
    y = z / nrm
    n_eq, n_in = len(problem.equalities), len(problem.inequalities)
    y_eq, y_in = y[:n_eq], y[n_eq : n_eq + n_in]
    if len(y_in) and y_in.min() < -1e-9:
        return None
    y_psd = {}
    off = n_eq + n_in
    for bid, k in problem.psd_blocks:
        m = k * (k + 1) // 2
        M = np.zeros((k, k))
        for pos, (i, j) in enumerate(_triangle(k)):
            v = y[off + pos] / (1.0 if i == j else math.sqrt(2.0))
            M[i, j] = M[j, i] = v
        if np.linalg.eigvalsh(M)[0] < -1e-7 * max(1.0, np.abs(M).max()):
            return None
        y_psd[bid] = M
        off += m
    margin = -float(b @ y)
    residual = float(np.abs(A.T @ y).max())
    if margin < INFEAS_TOL or residual > _CERT_REL_TOL * margin:
        return None
    return FarkasCertificate(y_eq=y_eq, y_ineq=y_in, y_psd=y_psd, margin=margin, residual=residual)


def _polish(problem: ConicProblem, layout: _Layout, x: np.ndarray, target: float) -> np.ndarray:
    """Alternate projections onto the equality subspace and the PSD blocks.

    Interior-point residuals are measured on the equilibrated problem, so on
    badly scaled data the raw violations can sit above our acceptance
    threshold.  Starting from a near-feasible point the corrections are tiny
    and a handful of sweeps reaches machine-level feasibility; the caller
    re-checks everything afterwards and keeps the polish only if it passes.
    """
    if not problem.equalities:
        return x
    rhs = np.array([b for _, b in problem.equalities])
    A = np.zeros((len(rhs), layout.n_cols))
    for r, (coeffs, _) in enumerate(problem.equalities):
        for ref, c in coeffs.items():
            A[r, layout.col(ref)] += c
    A_pinv = np.linalg.pinv(A)
    x = x.copy()
    for _ in range(25):
        x += A_pinv @ (rhs - A @ x)
        worst = 0.0
        for bid, k in problem.psd_blocks:
            off = layout.offsets[bid]
            M = np.zeros((k, k))
            for pos, (i, j) in enumerate(_triangle(k)):
                M[i, j] = M[j, i] = x[off + pos]
            w, V = np.linalg.eigh(M)
            worst = max(worst, -float(w[0]))
            if w[0] < 0.0:
                M = (V * np.maximum(w, 0.0)) @ V.T
                for pos, (i, j) in enumerate(_triangle(k)):
                    x[off + pos] = M[i, j]
        if worst <= target and np.abs(rhs - A @ x).max() <= target:
            break
    return x


def solve(problem: ConicProblem, *, verbose: bool = False, max_iter: int = 200) -> ConicSolution:
    """Solve a conic problem and return an independently verified solution.

    Solves at a tight tolerance first and falls back once to the solver's
    stock tolerances when the tight run ends in a numerical failure; every
    outcome is re-verified here regardless of the profile that produced it.
    """
    backend = os.environ.get("STARSET_SOLVER", "clarabel").lower()
    if backend != "clarabel":
        raise ValueError(f"unsupported solver backend {backend!r} (only 'clarabel')")
    import clarabel

    problem.validate()
    layout, P, q, A, b, cones = _assemble(problem)

    raw = None
    profiles = [
        {"tol_feas": 1e-9, "tol_gap_abs": 1e-9, "tol_gap_rel": 1e-9},
        {},  # stock tolerances
        {"static_regularization_constant": 1e-7},  # rescue ill-conditioned KKT systems
    ]
    for profile in profiles:
        settings = clarabel.DefaultSettings()
        settings.verbose = verbose
        settings.max_iter = max_iter
        for key, value in profile.items():
            setattr(settings, key, value)
        solver = clarabel.DefaultSolver(P, q, A, b, cones, settings)
        raw = solver.solve()
        if str(raw.status) not in (
            "SolverStatus.NumericalError",
            "SolverStatus.InsufficientProgress",
            "NumericalError",
            "InsufficientProgress",
        ):
            break
    status = str(raw.status)
    info = {"solver_status": status, "iterations": raw.iterations, "solve_time": raw.solve_time}

    if status in ("SolverStatus.Solved", "SolverStatus.AlmostSolved", "Solved", "AlmostSolved"):
        x = np.asarray(raw.x)
        scalars, blocks = _extract(problem, layout, x)
        lin, psd = check_primal(problem, scalars, blocks)
        if lin > FEAS_TOL or psd > PSD_FEAS_TOL:
            x = _polish(problem, layout, x, target=0.1 * FEAS_TOL)
            scalars, blocks = _extract(problem, layout, x)
            lin, psd = check_primal(problem, scalars, blocks)
        if lin > FEAS_TOL or psd > PSD_FEAS_TOL:
            info["recheck_residual"] = max(lin, psd)
            return ConicSolution(status=Status.UNKNOWN, info=info)
        residual = max(lin, psd)
        n_in = len(problem.inequalities)
        duals = np.asarray(raw.z)[len(problem.equalities) : len(problem.equalities) + n_in]
        return ConicSolution(
            status=Status.OPTIMAL if problem.objective else Status.FEASIBLE,
            scalars=scalars,
            blocks=blocks,
            objective_value=float(q @ x),
            primal_residual=residual,
            ineq_duals=duals,
            info=info,
        )

    if status in (
        "SolverStatus.PrimalInfeasible",
        "SolverStatus.AlmostPrimalInfeasible",
        "PrimalInfeasible",
        "AlmostPrimalInfeasible",
    ):
        cert = _verify_farkas(problem, A, b, np.asarray(raw.z))
        if cert is None:
            return ConicSolution(status=Status.UNKNOWN, info=info)
        return ConicSolution(status=Status.INFEASIBLE, certificate=cert, info=info)

    if status in (
        "SolverStatus.DualInfeasible",
        "SolverStatus.AlmostDualInfeasible",
        "DualInfeasible",
        "AlmostDualInfeasible",
    ):
        # Primal improving ray: the objective is unbounded below over the
        # feasible set (which in particular is nonempty).
        ray = np.asarray(raw.x)
        ok = len(problem.objective) > 0 and float(q @ ray) < 0
        if ok and problem.equalities:
            vals_eq = _row_values(problem.equalities, *_extract(problem, layout, ray))
            ok = bool(np.abs(vals_eq).max() <= 1e-6 * max(1.0, np.abs(ray).max()))
        if ok:
            return ConicSolution(status=Status.UNBOUNDED, info=info)
        return ConicSolution(status=Status.UNKNOWN, info=info)

    return ConicSolution(status=Status.UNKNOWN, info=info)


# -- problem dump (Conic Benchmark Format) ----------------------------------


def write_cbf(problem: ConicProblem, path: str) -> None:
    """Dump the problem in CBF v2 text format for external cross-checking.

    Scalar variables are free; PSD blocks become PSDVAR entries; equalities
    and inequalities become L= and L- constraint rows.
    """
    problem.validate()
    block_index = {bid: idx for idx, (bid, _) in enumerate(problem.psd_blocks)}
    lines = ["VER", "2", "", "OBJSENSE", "MIN", ""]
    if problem.psd_blocks:
        lines += ["PSDVAR", str(len(problem.psd_blocks))]
        lines += [str(k) for _, k in problem.psd_blocks]
        lines.append("")
    if problem.n_scalars:
        lines += ["VAR", f"{problem.n_scalars} 1", f"F {problem.n_scalars}", ""]
    rows = [*problem.equalities, *problem.inequalities]
    n_eq = len(problem.equalities)
    if rows:
        groups = []
        if n_eq:
            groups.append(f"L= {n_eq}")
        if len(problem.inequalities):
            groups.append(f"L- {len(problem.inequalities)}")
        lines += ["CON", f"{len(rows)} {len(groups)}", *groups, ""]

    def split_coeffs(coeffs):
        acoord, fcoord = [], []
        for ref, c in coeffs.items():
            if isinstance(ref, (int, np.integer)):
                acoord.append((int(ref), float(c)))
            else:
                bid, i, j = ref
                v = float(c) if i == j else float(c) / 2.0
                fcoord.append((block_index[bid], j, i, v))  # lower triangle (row>=col)
        return acoord, fcoord

    obj_a, obj_f = split_coeffs(problem.objective)
    if obj_f:
        lines += ["OBJFCOORD", str(len(obj_f))]
        lines += [f"{b} {i} {j} {v:.17g}" for b, i, j, v in obj_f]
        lines.append("")
    if obj_a:
        lines += ["OBJACOORD", str(len(obj_a))]
        lines += [f"{i} {v:.17g}" for i, v in obj_a]
        lines.append("")

    all_f, all_a, all_b = [], [], []
    for r, (coeffs, rhs) in enumerate(rows):
        acoord, fcoord = split_coeffs(coeffs)
        all_a += [(r, i, v) for i, v in acoord]
        all_f += [(r, b, i, j, v) for b, i, j, v in fcoord]
        if rhs != 0.0:
            all_b.append((r, -float(rhs)))
    if all_f:
        lines += ["FCOORD", str(len(all_f))]
        lines += [f"{r} {b} {i} {j} {v:.17g}" for r, b, i, j, v in all_f]
        lines.append("")
    if all_a:
        lines += ["ACOORD", str(len(all_a))]
        lines += [f"{r} {i} {v:.17g}" for r, i, v in all_a]
        lines.append("")
    if all_b:
        lines += ["BCOORD", str(len(all_b))]
        lines += [f"{r} {v:.17g}" for r, v in all_b]
        lines.append("")
    with open(path, "w") as fh:
        fh.write("\n".join(lines))
