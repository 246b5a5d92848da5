"""Plain-text export of the full mixed-integer polygon model.

The file is meant for inspection and diffing; solver formats (.gms, .nl,
.lp) are written from the Pyomo model in reachset.minlp. Layout:

    NAME <name>
    PARAMETERS
      <key> <value> ...
    VARIABLES
      <var> continuous <lo> <hi>
      <var> binary
    OBJECTIVE
      minimize: <terms>
    CONSTRAINTS
      <row>: <terms> <= | >= | = <rhs>
    END

A term is a signed coefficient followed by a variable or a product of two
variables (`+0.5 a_1*b_2`). Variables are a_k, b_k (line coefficients),
l_i_j_k (cell (i, j) on the inner side of line k) and z_i_j (cell (i, j)
inside the polygon); all indices are one-based. Lines starting with `#` are
comments.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, List, Tuple, Union

from reachset.errors import ModelFileError
from reachset.models import PolyModel

logger = logging.getLogger(__name__)

SENSES = ("<=", ">=", "=")

Monomial = Tuple[str, ...]


@dataclass
class Variable:
    name: str
    kind: str
    lo: float = 0.0
    hi: float = 1.0


@dataclass
class Row:
    """One linear or bilinear constraint; monomial keys are sorted name tuples"""

    name: str
    terms: Dict[Monomial, float]
    sense: str
    rhs: float

    @property
    def family(self) -> str:
        return self.name.split("_", 1)[0]


@dataclass
class ModelFile:
    name: str
    parameters: Dict[str, str] = field(default_factory=dict)
    variables: Dict[str, Variable] = field(default_factory=dict)
    objective: Dict[Monomial, float] = field(default_factory=dict)
    constraints: List[Row] = field(default_factory=list)

    def family_counts(self) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for row in self.constraints:
            counts[row.family] = counts.get(row.family, 0) + 1
        return counts


def _a(k: int) -> str:
    return f"a_{k + 1}"


def _b(k: int) -> str:
    return f"b_{k + 1}"


def _l(i: int, j: int, k: int) -> str:
    return f"l_{i + 1}_{j + 1}_{k + 1}"


def _z(i: int, j: int) -> str:
    return f"z_{i + 1}_{j + 1}"


def _add(terms: Dict[Monomial, float], coef: float, *names: str) -> None:
    if coef == 0:
        return
    key = tuple(sorted(names))
    terms[key] = terms.get(key, 0.0) + float(coef)
    if terms[key] == 0:
        del terms[key]


def _geometry_rows(n: int, margin: float) -> Iterator[Row]:
    for i in range(n):
        j = (i + 1) % n
        det: Dict[Monomial, float] = {}
        _add(det, 1.0, _a(i), _b(j))
        _add(det, -1.0, _b(i), _a(j))
        yield Row(f"detcon_{i + 1}_{j + 1}", det, ">=", margin)

    for i in range(n):
        j = (i + 1) % n
        for k in range(n):
            if k in (i, j):
                continue
            # -a_k (b_i - b_j) + b_k (a_i - a_j) - (a_i b_j - b_i a_j)
            terms: Dict[Monomial, float] = {}
            _add(terms, -1.0, _a(k), _b(i))
            _add(terms, 1.0, _a(k), _b(j))
            _add(terms, 1.0, _b(k), _a(i))
            _add(terms, -1.0, _b(k), _a(j))
            _add(terms, -1.0, _a(i), _b(j))
            _add(terms, 1.0, _b(i), _a(j))
            yield Row(f"no1cons_{i + 1}_{j + 1}_{k + 1}", terms, "<=", -margin)


def build_rows(model: PolyModel) -> ModelFile:
    """The model as variables, objective and rows, without touching the disk"""
    n = model.n
    cb = model.coeff_bound
    out = ModelFile(
        name=f"reachset_n{n}_N{model.wg.grid.N}",
        parameters={
            "n": str(n),
            "alpha": repr(model.alpha),
            "eps": repr(model.eps),
            "coeff_bound": repr(cb),
            "row_margin": repr(model.row_margin),
            "anchor": f"{model.anchor_idx[0] + 1} {model.anchor_idx[1] + 1}",
            "anchor_xy": f"{model.anchor_pt[0]!r} {model.anchor_pt[1]!r}",
        },
    )

    for k in range(n):
        out.variables[_a(k)] = Variable(_a(k), "continuous", -cb, cb)
        out.variables[_b(k)] = Variable(_b(k), "continuous", -cb, cb)
    cells = [(int(i), int(j)) for i, j in model.cells]
    for i, j in cells:
        for k in range(n):
            out.variables[_l(i, j, k)] = Variable(_l(i, j, k), "binary")
    for i, j in cells:
        out.variables[_z(i, j)] = Variable(_z(i, j), "binary")
        out.objective[(_z(i, j),)] = 1.0

    out.constraints.extend(_geometry_rows(n, model.row_margin))

    offsets = model.points - model.anchor_pt
    for c, (i, j) in enumerate(cells):
        dx, dy = float(offsets[c, 0]), float(offsets[c, 1])
        m1, m2 = float(model.big_m1[c]), float(model.big_m2[c])
        for k in range(n):
            lab1: Dict[Monomial, float] = {}
            _add(lab1, dx, _a(k))
            _add(lab1, dy, _b(k))
            _add(lab1, m1, _l(i, j, k))
            out.constraints.append(Row(f"lab1_{i + 1}_{j + 1}_{k + 1}", lab1, "<=", 1.0 + m1))
            lab2: Dict[Monomial, float] = {}
            _add(lab2, -dx, _a(k))
            _add(lab2, -dy, _b(k))
            _add(lab2, -m2, _l(i, j, k))
            out.constraints.append(
                Row(f"lab2_{i + 1}_{j + 1}_{k + 1}", lab2, "<=", -1.0 - model.eps)
            )

    for i, j in cells:
        zl1 = {(_l(i, j, k),): 1.0 for k in range(n)}
        zl1[(_z(i, j),)] = -float(n)
        out.constraints.append(Row(f"zl1_{i + 1}_{j + 1}", zl1, ">=", 0.0))
        zl2 = {(_l(i, j, k),): 1.0 for k in range(n)}
        zl2[(_z(i, j),)] = -1.0
        out.constraints.append(Row(f"zl2_{i + 1}_{j + 1}", zl2, "<=", float(n - 1)))

    ai, aj = model.anchor_idx
    out.constraints.append(Row("zeq1", {(_z(ai, aj),): 1.0}, "=", 1.0))

    coverage: Dict[Monomial, float] = {}
    for (i, j), w in zip(cells, model.weights):
        _add(coverage, float(w), _z(i, j))
    out.constraints.append(Row("coverage", coverage, ">=", model.alpha))
    return out


# ============================================================================
# Writing and reading
# ============================================================================


def _format_terms(terms: Dict[Monomial, float]) -> str:
    parts = []
    for names, coef in terms.items():
        sign = "+" if coef >= 0 else ""
        parts.append(f"{sign}{coef!r} {'*'.join(names)}")
    return " ".join(parts)


def write_model(mf: ModelFile, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        f.write("# reachset polygon model, see reachset.modelfile for the format\n")
        f.write(f"NAME {mf.name}\n")
        f.write("PARAMETERS\n")
        for key, value in mf.parameters.items():
            f.write(f"  {key} {value}\n")
        f.write("VARIABLES\n")
        for var in mf.variables.values():
            if var.kind == "binary":
                f.write(f"  {var.name} binary\n")
            else:
                f.write(f"  {var.name} continuous {var.lo!r} {var.hi!r}\n")
        f.write("OBJECTIVE\n")
        f.write(f"  minimize: {_format_terms(mf.objective)}\n")
        f.write("CONSTRAINTS\n")
        for row in mf.constraints:
            f.write(f"  {row.name}: {_format_terms(row.terms)} {row.sense} {row.rhs!r}\n")
        f.write("END\n")
    return path


def export_model(model: PolyModel, path: Union[str, Path]) -> Path:
    """Write the full mixed-integer model of `model` to `path`"""
    mf = build_rows(model)
    path = write_model(mf, path)
    logger.info(
        "exported %d variables and %d rows to %s", len(mf.variables), len(mf.constraints), path
    )
    return path


def _parse_terms(tokens: List[str], lineno: int) -> Dict[Monomial, float]:
    if len(tokens) % 2:
        raise ModelFileError(f"line {lineno}: unbalanced coefficient/variable pairs")
    terms: Dict[Monomial, float] = {}
    for coef, var in zip(tokens[::2], tokens[1::2]):
        try:
            value = float(coef)
        except ValueError:
            raise ModelFileError(f"line {lineno}: bad coefficient {coef!r}")
        _add(terms, value, *var.split("*"))
    return terms


def read_model(path: Union[str, Path]) -> ModelFile:
    """Parse a file written by export_model"""
    path = Path(path)
    if not path.is_file():
        raise ModelFileError(f"model file '{path}' not found")

    mf = ModelFile(name="")
    section = None
    ended = False
    with open(path, "r") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("NAME"):
                mf.name = line[4:].strip()
                continue
            if line in ("PARAMETERS", "VARIABLES", "OBJECTIVE", "CONSTRAINTS"):
                section = line
                continue
            if line == "END":
                ended = True
                break

            if section == "PARAMETERS":
                key, _, value = line.partition(" ")
                mf.parameters[key] = value.strip()
            elif section == "VARIABLES":
                fields = line.split()
                if len(fields) == 2 and fields[1] == "binary":
                    mf.variables[fields[0]] = Variable(fields[0], "binary")
                elif len(fields) == 4 and fields[1] == "continuous":
                    mf.variables[fields[0]] = Variable(
                        fields[0], "continuous", float(fields[2]), float(fields[3])
                    )
                else:
                    raise ModelFileError(f"line {lineno}: bad variable declaration")
            elif section == "OBJECTIVE":
                head, _, body = line.partition(":")
                if head.strip() != "minimize":
                    raise ModelFileError(f"line {lineno}: only 'minimize' objectives are supported")
                mf.objective = _parse_terms(body.split(), lineno)
            elif section == "CONSTRAINTS":
                name, sep, body = line.partition(":")
                tokens = body.split()
                if not sep or len(tokens) < 2 or tokens[-2] not in SENSES:
                    raise ModelFileError(f"line {lineno}: malformed constraint")
                mf.constraints.append(
                    Row(name.strip(), _parse_terms(tokens[:-2], lineno), tokens[-2], float(tokens[-1]))
                )
            else:
                raise ModelFileError(f"line {lineno}: content outside any section")

    if not ended:
        raise ModelFileError(f"model file '{path}' has no END marker")
    return mf
