import numpy as np
import pytest

from starset import conic


def test_lp_infeasible_with_farkas():
    # x <= -1 and -x <= -1 cannot hold together: summing rows gives 0 <= -2
    prob = conic.ConicProblem(
        n_scalars=1,
        inequalities=[({0: 1.0}, -1.0), ({0: -1.0}, -1.0)],
    )
    sol = conic.solve(prob)
    assert sol.status == conic.Status.INFEASIBLE
    cert = sol.certificate
    assert cert is not None
    assert cert.margin >= conic.INFEAS_TOL
    # re-evaluate the contradiction independently
    y = cert.y_ineq
    assert y.min() >= -1e-12
    assert abs(1.0 * y[0] - 1.0 * y[1]) <= 1e-6 * cert.margin
    assert -1.0 * y[0] + -1.0 * y[1] < 0


def test_sdp_min_t():
    # [[t, 1], [1, t]] is PSD iff t >= 1
    prob = conic.ConicProblem(
        n_scalars=1,
        psd_blocks=[("B", 2)],
        equalities=[
            ({("B", 0, 0): 1.0, 0: -1.0}, 0.0),
            ({("B", 1, 1): 1.0, 0: -1.0}, 0.0),
            ({("B", 0, 1): 1.0}, 1.0),
        ],
        objective={0: 1.0},
    )
    sol = conic.solve(prob)
    assert sol.status == conic.Status.OPTIMAL
    assert abs(sol.scalars[0] - 1.0) < 1e-6
    assert abs(sol.objective_value - 1.0) < 1e-6


def test_sdp_feasibility_identity():
    prob = conic.ConicProblem(
        n_scalars=0,
        psd_blocks=[("P", 2)],
        equalities=[
            ({("P", 0, 0): 1.0}, 1.0),
            ({("P", 1, 1): 1.0}, 1.0),
            ({("P", 0, 1): 1.0}, 0.0),
        ],
    )
    sol = conic.solve(prob)
    assert sol.status == conic.Status.FEASIBLE
    assert np.allclose(sol.blocks["P"], np.eye(2), atol=1e-7)


def test_equalities_rechecked_independently():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((3, 3))
    target = A @ A.T + 0.1 * np.eye(3)
    eqs = []
    for i in range(3):
        for j in range(i, 3):
            eqs.append(({("P", i, j): 1.0}, float(target[i, j])))
    prob = conic.ConicProblem(psd_blocks=[("P", 3)], equalities=eqs)
    sol = conic.solve(prob)
    assert sol.status == conic.Status.FEASIBLE
    lin, psd = conic.check_primal(prob, sol.scalars, sol.blocks)
    assert lin <= conic.FEAS_TOL
    assert psd <= conic.PSD_FEAS_TOL
    assert sol.primal_residual <= conic.FEAS_TOL


def test_unbounded_lp():
    # maximize x with only x >= 0: improving ray
    prob = conic.ConicProblem(n_scalars=1, inequalities=[({0: -1.0}, 0.0)], objective={0: -1.0})
    sol = conic.solve(prob)
    assert sol.status == conic.Status.UNBOUNDED


def test_iteration_limit_is_unknown():
    prob = conic.ConicProblem(
        n_scalars=1,
        psd_blocks=[("B", 2)],
        equalities=[
            ({("B", 0, 0): 1.0, 0: -1.0}, 0.0),
            ({("B", 1, 1): 1.0, 0: -1.0}, 0.0),
            ({("B", 0, 1): 1.0}, 1.0),
        ],
        objective={0: 1.0},
    )
    sol = conic.solve(prob, max_iter=1)
    assert sol.status == conic.Status.UNKNOWN


def test_validation_errors():
    with pytest.raises(ValueError):
        conic.ConicProblem(n_scalars=1, psd_blocks=[("B", 0)]).validate()
    with pytest.raises(ValueError):
        conic.ConicProblem(n_scalars=1, equalities=[({3: 1.0}, 0.0)]).validate()
    with pytest.raises(ValueError):
        conic.ConicProblem(n_scalars=0, equalities=[({("Q", 0, 0): 1.0}, 0.0)]).validate()


def test_backend_env_guard(monkeypatch):
    monkeypatch.setenv("STARSET_SOLVER", "mosek")
    with pytest.raises(ValueError):
        conic.solve(conic.ConicProblem(n_scalars=1, objective={0: 1.0}))


def test_cbf_dump(tmp_path):
    prob = conic.ConicProblem(
        n_scalars=2,
        psd_blocks=[("P", 2)],
        equalities=[({0: 1.0, ("P", 0, 1): 2.0}, 1.0)],
        inequalities=[({1: 1.0}, 3.0)],
        objective={0: 1.0, ("P", 0, 0): 1.0},
    )
    path = tmp_path / "prob.cbf"
    conic.write_cbf(prob, str(path))
    text = path.read_text()
    for section in ("VER", "OBJSENSE", "PSDVAR", "VAR", "CON", "OBJACOORD", "FCOORD", "BCOORD"):
        assert section in text
