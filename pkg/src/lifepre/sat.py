"""CNF container, DIMACS I/O, solver backends and projected model enumeration.

Three interchangeable backends:

* ``pysat:<name>`` (default ``pysat:glucose4``): in-process incremental solver.
* ``external:<path>``: any binary that reads DIMACS on a file argument and
  prints ``s SATISFIABLE`` / ``v ...`` lines (minisat-style output files are
  not supported, only the competition output format).
* ``dpll``: a tiny pure-Python DPLL used for desk-scale oracle tests.

The backend is chosen by argument, else by the ``LIFEPRE_SOLVER`` environment
variable, else ``pysat:glucose4``.
"""

from __future__ import annotations

import os
import shutil
import subprocess
import tempfile
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

Clause = list[int]


class BackendError(RuntimeError):
    """The SAT backend is missing or crashed (distinct from UNSAT)."""


class VarPool:
    """Monotone allocator of fresh variable ids."""

    def __init__(self, start: int = 0):
        self.top = start

    def __call__(self) -> int:
        self.top += 1
        return self.top

    new = __call__


@dataclass
class CnfInstance:
    num_vars: int = 0
    clauses: list[Clause] = field(default_factory=list)
    annotations: dict = field(default_factory=dict)

    def new_var(self, key=None) -> int:
        self.num_vars += 1
        if key is not None:
            self.annotations[key] = self.num_vars
        return self.num_vars

    def var(self, key) -> int:
        """Annotated variable for ``key``, allocated on first use."""
        v = self.annotations.get(key)
        if v is None:
            v = self.new_var(key)
        return v

    def pool(self) -> "_InstancePool":
        return _InstancePool(self)

    def add(self, clause: Iterable[int]) -> None:
        cl = [int(l) for l in clause]
        for l in cl:
            if l == 0 or abs(l) > self.num_vars:
                raise ValueError(f"literal {l} out of range (num_vars={self.num_vars})")
        self.clauses.append(cl)

    def extend(self, clauses: Iterable[Iterable[int]]) -> None:
        for cl in clauses:
            self.add(cl)

    def copy(self) -> "CnfInstance":
        return CnfInstance(self.num_vars, [list(c) for c in self.clauses], dict(self.annotations))

    def to_dimacs(self, extra_units: Sequence[int] = ()) -> str:
        lines = [f"p cnf {self.num_vars} {len(self.clauses) + len(extra_units)}"]
        lines += [" ".join(map(str, c)) + " 0" for c in self.clauses]
        lines += [f"{l} 0" for l in extra_units]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_dimacs(cls, text: str) -> "CnfInstance":
        cnf = None
        cur: list[int] = []
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("c"):
                continue
            if line.startswith("p"):
                parts = line.split()
                if len(parts) != 4 or parts[1] != "cnf":
                    raise ValueError(f"bad problem line {line!r}")
                cnf = cls(int(parts[2]))
                continue
            if cnf is None:
                raise ValueError("clause before problem line")
            for tok in line.split():
                l = int(tok)
                if l == 0:
                    cnf.add(cur)
                    cur = []
                else:
                    cur.append(l)
        if cnf is None:
            raise ValueError("missing problem line")
        if cur:
            raise ValueError("unterminated clause")
        return cnf


class _InstancePool:
    def __init__(self, cnf: CnfInstance):
        self.cnf = cnf

    def __call__(self) -> int:
        return self.cnf.new_var()

    new = __call__


@dataclass(frozen=True)
class SolveResult:
    sat: bool
    model: dict[int, bool] | None = None

    def __bool__(self) -> bool:
        return self.sat

    def value(self, var: int) -> bool:
        if self.model is None:
            raise ValueError("no model for an UNSAT result")
        return self.model.get(var, False)


UNSAT = SolveResult(False)


def check_model(clauses: Iterable[Sequence[int]], model: dict[int, bool]) -> bool:
    return all(any(model.get(abs(l), False) == (l > 0) for l in cl) for cl in clauses)


# --- backends ----------------------------------------------------------------

class _Session:
    """One solver session over a growing clause set (single owner)."""

    def __init__(self, cnf: CnfInstance):
        self.cnf = cnf.copy()
        self._flat = None

    def add_clause(self, clause: Sequence[int]) -> None:
        self.cnf.num_vars = max([self.cnf.num_vars] + [abs(l) for l in clause])
        self.cnf.add(clause)

    def _model_ok(self, model: dict[int, bool]) -> bool:
        cls = self.cnf.clauses
        if not cls:
            return True
        if any(len(c) == 0 for c in cls):
            return False
        if self._flat is None:
            # clauses added later (blocking clauses, mostly) are checked one by one
            lits = np.fromiter((l for c in cls for l in c), np.int64)
            starts = np.cumsum([0] + [len(c) for c in cls[:-1]])
            self._flat = (lits, starts, len(cls))
        lits, starts, n = self._flat
        vals = np.zeros(max(self.cnf.num_vars, int(np.abs(lits).max())) + 1, bool)
        for v, b in model.items():
            if b and v < len(vals):
                vals[v] = True
        true = vals[np.abs(lits)] == (lits > 0)
        return bool(np.logical_or.reduceat(true, starts).all()) and check_model(cls[n:], model)

    def solve(self, assumptions: Sequence[int] = ()) -> SolveResult:
        res = self._solve(list(assumptions))
        if res.sat:
            if not self._model_ok(res.model) or not all(
                    res.model.get(abs(a), False) == (a > 0) for a in assumptions):
                raise BackendError("solver returned a model that violates the instance")
        return res

    def _solve(self, assumptions: list[int]) -> SolveResult:
        raise NotImplementedError

    def close(self) -> None:
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class _PySatSession(_Session):
    def __init__(self, cnf: CnfInstance, name: str):
        super().__init__(cnf)
        try:
            from pysat.solvers import Solver
        except ImportError as e:  # pragma: no cover - depends on environment
            raise BackendError("python-sat is not installed") from e
        try:
            self._s = Solver(name=name, bootstrap_with=cnf.clauses)
        except Exception as e:
            raise BackendError(f"cannot start pysat solver {name!r}: {e}") from e

    def add_clause(self, clause):
        super().add_clause(clause)
        self._s.add_clause(list(clause))

    def _solve(self, assumptions):
        try:
            ok = self._s.solve(assumptions=assumptions)
        except Exception as e:
            raise BackendError(str(e)) from e
        if not ok:
            return UNSAT
        raw = self._s.get_model() or []
        model = {abs(l): l > 0 for l in raw}
        for v in range(1, self.cnf.num_vars + 1):
            model.setdefault(v, False)
        return SolveResult(True, model)

    def close(self):
        self._s.delete()


class _ExternalSession(_Session):
    def __init__(self, cnf: CnfInstance, path: str, timeout: float | None = None):
        super().__init__(cnf)
        exe = shutil.which(path) or (path if os.path.exists(path) else None)
        if exe is None:
            raise BackendError(f"solver binary {path!r} not found")
        self.exe = exe
        self.timeout = timeout

    def _solve(self, assumptions):
        with tempfile.NamedTemporaryFile("w", suffix=".cnf", delete=False) as f:
            f.write(self.cnf.to_dimacs(assumptions))
            name = f.name
        try:
            proc = subprocess.run([self.exe, name], capture_output=True, text=True,
                                  timeout=self.timeout)
        except (OSError, subprocess.TimeoutExpired) as e:
            raise BackendError(f"external solver failed: {e}") from e
        finally:
            os.unlink(name)
        return parse_solver_output(proc.stdout, self.cnf.num_vars)


def parse_solver_output(text: str, num_vars: int) -> SolveResult:
    status = None
    lits: list[int] = []
    for line in text.splitlines():
        if line.startswith("s "):
            status = line[2:].strip()
        elif line.startswith("v "):
            lits += [int(t) for t in line[2:].split() if t != "0"]
    if status == "UNSATISFIABLE":
        return UNSAT
    if status != "SATISFIABLE":
        raise BackendError(f"no verdict in solver output (status={status!r})")
    model = {v: False for v in range(1, num_vars + 1)}
    model.update({abs(l): l > 0 for l in lits})
    return SolveResult(True, model)


class _DpllSession(_Session):
    def _solve(self, assumptions):
        clauses = [list(c) for c in self.cnf.clauses] + [[a] for a in assumptions]
        model = dpll(clauses, self.cnf.num_vars)
        return UNSAT if model is None else SolveResult(True, model)


def dpll(clauses: list[list[int]], num_vars: int) -> dict[int, bool] | None:
    """Plain recursive DPLL with unit propagation; for small instances only."""

    def simplify(cls, lit):
        out = []
        for c in cls:
            if lit in c:
                continue
            if -lit in c:
                c = [l for l in c if l != -lit]
                if not c:
                    return None
            out.append(c)
        return out

    def rec(cls, assign):
        while True:
            unit = next((c[0] for c in cls if len(c) == 1), None)
            if unit is None:
                break
            assign[abs(unit)] = unit > 0
            cls = simplify(cls, unit)
            if cls is None:
                return None
        if not cls:
            return assign
        lit = cls[0][0]
        for choice in (lit, -lit):
            nxt = simplify(cls, choice)
            if nxt is not None:
                a = dict(assign)
                a[abs(choice)] = choice > 0
                res = rec(nxt, a)
                if res is not None:
                    return res
        return None

    if any(len(c) == 0 for c in clauses):
        return None
    res = rec(clauses, {})
    if res is None:
        return None
    for v in range(1, num_vars + 1):
        res.setdefault(v, False)
    return res


def default_backend() -> str:
    return os.environ.get("LIFEPRE_SOLVER", "pysat:glucose4")


def open_session(cnf: CnfInstance, backend: str | None = None) -> _Session:
    spec = backend or default_backend()
    if spec == "dpll":
        return _DpllSession(cnf)
    if spec.startswith("pysat"):
        name = spec.split(":", 1)[1] if ":" in spec else "glucose4"
        return _PySatSession(cnf, name)
    if spec.startswith("external:"):
        return _ExternalSession(cnf, spec.split(":", 1)[1])
    # bare path: treat as external binary
    return _ExternalSession(cnf, spec)


def solve(cnf: CnfInstance, assumptions: Sequence[int] = (), backend: str | None = None) -> SolveResult:
    with open_session(cnf, backend) as s:
        return s.solve(assumptions)


def enumerate_models(cnf: CnfInstance, projection: Sequence[int], limit: int | None = None,
                     assumptions: Sequence[int] = (), backend: str | None = None,
                     session: _Session | None = None) -> list[tuple[bool, ...]]:
    """Distinct projections of models onto ``projection``, blocking each one found.

    Exhaustive when fewer than ``limit`` exist.  With an empty projection the
    result is ``[()]`` or ``[]``.
    """
    out = []
    own = session is None
    s = open_session(cnf, backend) if own else session
    try:
        while limit is None or len(out) < limit:
            res = s.solve(assumptions)
            if not res:
                break
            proj = tuple(res.value(v) for v in projection)
            out.append(proj)
            if not projection:
                break
            s.add_clause([-v if b else v for v, b in zip(projection, proj)])
    finally:
        if own:
            s.close()
    return out


def count_models(cnf, projection, limit=None, assumptions=(), backend=None) -> int:
    return len(enumerate_models(cnf, projection, limit, assumptions, backend))
