"""Pyomo formulation of the polygon model and dispatch to global MINLP solvers.

The ConcreteModel carries the complete mixed-integer program: bounded line
coefficients a[k], b[k], binaries l[c, k] and z[c] per model cell c, the
bilinear determinant (detcon) and vertex (no1cons) rows, the big-M rows tying
l to the side of each line (lab1, lab2), the logic rows tying z to l (zl1, zl2),
the anchor row (zeq1) and the coverage row. The objective minimises the number
of cells inside the polygon. Cells and lines are zero-based here.

Solvers are optional executables. When none is installed the package solves
the same model with the search in reachset.polyopt.
"""

import logging
from pathlib import Path
from typing import List, NamedTuple, Optional, Sequence, Union

import numpy as np
from pyomo.environ import (
    Binary,
    ConcreteModel,
    Constraint,
    Objective,
    RangeSet,
    Reals,
    Set,
    SolverFactory,
    Var,
    minimize,
    quicksum,
    value,
)
from pyomo.opt import TerminationCondition

from reachset.errors import ModelError, ModelFileError
from reachset.modelfile import export_model as export_text
from reachset.models import Assignment, PolyModel

logger = logging.getLogger(__name__)

GLOBAL_SOLVERS = ("scip", "baron", "couenne")
WRITE_FORMATS = (".gms", ".nl", ".lp")
TIME_LIMIT_OPTIONS = {"scip": "limits/time", "baron": "MaxTime"}


class ExactResult(NamedTuple):
    """Line coefficients reported by an external solver"""

    a: np.ndarray
    b: np.ndarray
    solver: str
    termination: str
    proven: bool


def build_pyomo_model(model: PolyModel) -> ConcreteModel:
    """The full mixed-integer program of `model` as a Pyomo ConcreteModel"""
    n = model.n
    cb = model.coeff_bound
    margin = model.row_margin
    offsets = model.points - np.asarray(model.anchor_pt)
    weights = model.weights

    m = ConcreteModel(name=f"reachset_n{n}_N{model.wg.grid.N}")
    m.K = RangeSet(0, n - 1, doc="lines")
    m.C = RangeSet(0, model.size - 1, doc="model cells")
    m.P = Set(
        dimen=2,
        initialize=[(i, k) for i in range(n) for k in range(n) if k not in (i, (i + 1) % n)],
        doc="vertex V(i, i+1) against line k",
    )

    m.a = Var(m.K, within=Reals, bounds=(-cb, cb), initialize=0.0)
    m.b = Var(m.K, within=Reals, bounds=(-cb, cb), initialize=0.0)
    m.l = Var(m.C, m.K, within=Binary, initialize=0)
    m.z = Var(m.C, within=Binary, initialize=0)

    def det(m, i, j):
        return m.a[i] * m.b[j] - m.b[i] * m.a[j]

    def detcon(m, i):
        return det(m, i, (i + 1) % n) >= margin

    def no1cons(m, i, k):
        j = (i + 1) % n
        return (
            -m.a[k] * (m.b[i] - m.b[j]) + m.b[k] * (m.a[i] - m.a[j]) - det(m, i, j) <= -margin
        )

    def form(m, c, k):
        return float(offsets[c, 0]) * m.a[k] + float(offsets[c, 1]) * m.b[k] - 1.0

    def lab1(m, c, k):
        return form(m, c, k) <= float(model.big_m1[c]) * (1 - m.l[c, k])

    def lab2(m, c, k):
        return -form(m, c, k) <= float(model.big_m2[c]) * m.l[c, k] - model.eps

    def zl1(m, c):
        return quicksum(m.l[c, k] for k in m.K) - n * m.z[c] >= 0

    def zl2(m, c):
        return quicksum(m.l[c, k] for k in m.K) - m.z[c] <= n - 1

    m.detcon = Constraint(m.K, rule=detcon)
    m.no1cons = Constraint(m.P, rule=no1cons)
    m.lab1 = Constraint(m.C, m.K, rule=lab1)
    m.lab2 = Constraint(m.C, m.K, rule=lab2)
    m.zl1 = Constraint(m.C, rule=zl1)
    m.zl2 = Constraint(m.C, rule=zl2)
    m.zeq1 = Constraint(expr=m.z[model.anchor_position] == 1)
    m.coverage = Constraint(
        expr=quicksum(float(weights[c]) * m.z[c] for c in m.C) >= model.alpha
    )
    m.cells_inside = Objective(expr=quicksum(m.z[c] for c in m.C), sense=minimize)
    return m


def assign(m: ConcreteModel, a: Sequence[float], b: Sequence[float], assignment: Assignment) -> None:
    """Set every variable of `m`, e.g. to warm-start a solver from a known polygon"""
    for k in m.K:
        m.a[k].set_value(float(a[k]))
        m.b[k].set_value(float(b[k]))
    for c in m.C:
        m.z[c].set_value(int(assignment.z[c]))
        for k in m.K:
            m.l[c, k].set_value(int(assignment.l[c, k]))


def violated_rows(m: ConcreteModel, tol: float = 1e-9) -> List[str]:
    """Names of the constraints that the current variable values break"""
    bad = []
    for con in m.component_data_objects(Constraint, active=True):
        body = value(con.body)
        if con.has_lb() and body < value(con.lower) - tol:
            bad.append(con.name)
        elif con.has_ub() and body > value(con.upper) + tol:
            bad.append(con.name)
    return bad


def solver_available(name: str) -> bool:
    try:
        return bool(SolverFactory(name).available(exception_flag=False))
    except Exception as e:
        logger.debug("solver %s unavailable: %s", name, e)
        return False


def find_global_solver(candidates: Sequence[str] = GLOBAL_SOLVERS) -> Optional[str]:
    """First installed solver among `candidates`"""
    for name in candidates:
        if solver_available(name):
            return name
    return None


def solve_minlp(model: PolyModel, solver: str, time_limit: float = 60.0) -> Optional[ExactResult]:
    """Solve the full program with an external solver; None if it found nothing"""
    if not solver_available(solver):
        raise ModelError(f"MINLP solver '{solver}' is not available")
    m = build_pyomo_model(model)
    options = {}
    if solver in TIME_LIMIT_OPTIONS:
        options[TIME_LIMIT_OPTIONS[solver]] = time_limit
    else:
        logger.warning("no time limit option known for %s", solver)

    logger.info("solving %d-cell model with %s", model.size, solver)
    try:
        results = SolverFactory(solver).solve(m, options=options, load_solutions=False)
    except Exception as e:
        logger.warning("%s failed: %s", solver, e)
        return None

    termination = results.solver.termination_condition
    if len(results.solution) == 0:
        logger.warning("%s returned no solution (%s)", solver, termination)
        return None
    m.solutions.load_from(results)
    a = np.array([value(m.a[k]) for k in m.K], dtype=float)
    b = np.array([value(m.b[k]) for k in m.K], dtype=float)
    return ExactResult(
        a=a,
        b=b,
        solver=solver,
        termination=str(termination),
        proven=termination == TerminationCondition.optimal,
    )


def write_pyomo_model(model: PolyModel, path: Union[str, Path]) -> Path:
    """Write the program in the solver format named by the suffix of `path`"""
    path = Path(path)
    if path.suffix not in WRITE_FORMATS:
        raise ModelFileError(
            f"unsupported model format '{path.suffix}', expected one of {', '.join(WRITE_FORMATS)}"
        )
    path.parent.mkdir(parents=True, exist_ok=True)
    m = build_pyomo_model(model)
    m.write(str(path), io_options={"symbolic_solver_labels": True})
    logger.info("wrote %s model to %s", path.suffix[1:], path)
    return path


def export(model: PolyModel, path: Union[str, Path]) -> Path:
    """Solver formats (.gms, .nl, .lp) through Pyomo, anything else as the text dump"""
    if Path(path).suffix in WRITE_FORMATS:
        return write_pyomo_model(model, path)
    return export_text(model, path)
