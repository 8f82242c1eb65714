"""CSV network files and free-format MPS export/import."""
from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .model import MAXIMIZE, MINIMIZE, RISK_EQ, RISK_GEQ, MilpProblem
from .network import BankingSystem, leverage_kappa

BANK_COLUMNS = ("bank_id", "equity", "total_assets", "total_liabilities", "kappa")
EXPOSURE_COLUMNS = ("debtor_id", "creditor_id", "amount")


class FormatError(ValueError):
    pass


def _number(text: str, where: str) -> float:
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise FormatError(f"{where}: not a number: {text!r}") from None
    if not np.isfinite(value):
        raise FormatError(f"{where}: non-finite value {text!r}")
    return value


def _rows(path, required):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise FormatError(f"{path}: missing columns {missing}")
        for row in reader:
            yield reader.line_num, row


def parse_network(banks_file, exposures_file) -> BankingSystem:
    """Read a bank table and an exposure list.

    Banks: ``bank_id,equity`` plus optional ``total_assets,total_liabilities``
    (kappa from the leverage ratio) or an explicit ``kappa`` column; kappa is
    1 otherwise. Exposures: ``debtor_id,creditor_id,amount`` meaning the
    debtor owes the creditor ``amount``; repeated pairs are summed.
    """
    ids, equity, kappa = [], [], []
    for line, row in _rows(banks_file, ("bank_id", "equity")):
        where = f"{banks_file}:{line}"
        bank = (row.get("bank_id") or "").strip()
        if not bank:
            raise FormatError(f"{where}: empty bank_id")
        if bank in ids:
            raise FormatError(f"{where}: duplicate bank_id {bank!r}")
        ids.append(bank)
        equity.append(_number(row.get("equity"), where))
        if (row.get("kappa") or "").strip():
            kappa.append(_number(row["kappa"], where))
        elif (row.get("total_assets") or "").strip() and (row.get("total_liabilities") or "").strip():
            ta = _number(row["total_assets"], where)
            tl = _number(row["total_liabilities"], where)
            try:
                kappa.append(float(leverage_kappa([ta], [tl])[0]))
            except ValueError:
                raise FormatError(f"{where}: insolvent balance sheet (total_assets <= total_liabilities)") from None
        else:
            kappa.append(1.0)
    if not ids:
        raise FormatError(f"{banks_file}: no banks")

    index = {b: i for i, b in enumerate(ids)}
    L = np.zeros((len(ids), len(ids)))
    for line, row in _rows(exposures_file, EXPOSURE_COLUMNS):
        where = f"{exposures_file}:{line}"
        debtor = (row.get("debtor_id") or "").strip()
        creditor = (row.get("creditor_id") or "").strip()
        for bank in (debtor, creditor):
            if bank not in index:
                raise FormatError(f"{where}: unknown bank id {bank!r}")
        if debtor == creditor:
            raise FormatError(f"{where}: self-loop for {debtor!r}")
        amount = _number(row.get("amount"), where)
        if amount < 0:
            raise FormatError(f"{where}: negative amount {amount}")
        L[index[debtor], index[creditor]] += amount
    return BankingSystem(tuple(ids), np.array(equity), L, np.array(kappa))


def write_network(system: BankingSystem, banks_file, exposures_file) -> None:
    """Write the two CSV files; kappa is stored explicitly so re-reading is exact."""
    with open(banks_file, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("bank_id", "equity", "kappa"))
        for b, e, k in zip(system.bank_ids, system.equity, system.kappa):
            w.writerow((b, repr(float(e)), repr(float(k))))
    with open(exposures_file, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EXPOSURE_COLUMNS)
        for i, j in zip(*np.nonzero(system.liabilities)):
            w.writerow((system.bank_ids[i], system.bank_ids[j], repr(float(system.liabilities[i, j]))))


# --- MPS -----------------------------------------------------------------

def _num(x: float) -> str:
    return format(float(x), ".17g")


def _row_blocks(problem: MilpProblem):
    a4_type = "E" if problem.risk_sense == RISK_EQ else "G"
    return [
        ("a1", problem.A1, "L", problem.b1),
        ("a2", problem.A2, "E", problem.b2),
        ("a3", problem.A3, "E", problem.b3),
        ("a4", problem.A4, a4_type, problem.b4),
    ]


def column_names(problem: MilpProblem) -> list[str]:
    ny = 2 * problem.n_entries
    return [f"y_{k}" for k in range(ny)] + [f"d_{k}" for k in range(ny)]


def export_mps(problem: MilpProblem) -> str:
    """Free-format MPS text of the problem.

    Rows are ``r_a<block>_<k>``, columns ``y_<k>`` and ``d_<k>``; integer
    columns sit between INTORG/INTEND markers and every column gets an
    explicit UP or FX bound.
    """
    blocks = _row_blocks(problem)
    names = column_names(problem)
    out = io.StringIO()
    out.write(f"NAME {problem.name}\n")
    out.write("OBJSENSE\n    " + ("MAX" if problem.direction == MAXIMIZE else "MIN") + "\n")
    out.write("ROWS\n N obj\n")
    for tag, A, kind, _ in blocks:
        for r in range(A.shape[0]):
            out.write(f" {kind} r_{tag}_{r}\n")

    out.write("COLUMNS\n")
    cols = [A.tocsc() for _, A, _, _ in blocks]
    in_int = False
    marker = 0
    for c, name in enumerate(names):
        is_int = bool(problem.integrality[c])
        if is_int != in_int:
            kind = "INTORG" if is_int else "INTEND"
            out.write(f"    MARKER{marker} 'MARKER' '{kind}'\n")
            marker += 1
            in_int = is_int
        out.write(f"    {name} obj {_num(problem.c[c])}\n")
        for (tag, _, _, _), A in zip(blocks, cols):
            seg = slice(A.indptr[c], A.indptr[c + 1])
            for r, v in zip(A.indices[seg], A.data[seg]):
                out.write(f"    {name} r_{tag}_{r} {_num(v)}\n")
    if in_int:
        out.write(f"    MARKER{marker} 'MARKER' 'INTEND'\n")

    out.write("RHS\n")
    for tag, _, _, b in blocks:
        for r, v in enumerate(b):
            if v != 0:
                out.write(f"    rhs r_{tag}_{r} {_num(v)}\n")

    out.write("BOUNDS\n")
    for c, name in enumerate(names):
        lo, hi = problem.lb[c], problem.ub[c]
        if lo == hi:
            out.write(f" FX bnd {name} {_num(lo)}\n")
        else:
            if lo != 0:
                out.write(f" LO bnd {name} {_num(lo)}\n")
            out.write(f" UP bnd {name} {_num(hi)}\n")
    out.write("ENDATA\n")
    return out.getvalue()


def read_mps(text: str) -> MilpProblem:
    """Parse MPS text produced by ``export_mps`` back into a problem."""
    section = None
    direction = MINIMIZE
    row_kind: dict[str, str] = {}
    col_index: dict[str, int] = {}
    integer: list[bool] = []
    entries: list[tuple[str, int, float]] = []
    obj: dict[int, float] = {}
    rhs: dict[str, float] = {}
    bounds: dict[int, list[float]] = {}
    in_int = False
    name = "sysrisk"
    for raw in text.splitlines():
        if not raw.strip() or raw.startswith("*"):
            continue
        if not raw[0].isspace():
            head = raw.split()
            section = head[0]
            if section == "NAME" and len(head) > 1:
                name = head[1]
            if section == "ENDATA":
                break
            continue
        tok = raw.split()
        if section == "OBJSENSE":
            direction = MAXIMIZE if tok[0].upper() in ("MAX", "MAXIMIZE") else MINIMIZE
        elif section == "ROWS":
            row_kind[tok[1]] = tok[0]
        elif section == "COLUMNS":
            if len(tok) >= 3 and tok[1] == "'MARKER'":
                in_int = tok[2] == "'INTORG'"
                continue
            col = tok[0]
            if col not in col_index:
                col_index[col] = len(col_index)
                integer.append(in_int)
            c = col_index[col]
            for rname, val in zip(tok[1::2], tok[2::2]):
                if row_kind.get(rname) == "N":
                    obj[c] = float(val)
                else:
                    entries.append((rname, c, float(val)))
        elif section == "RHS":
            for rname, val in zip(tok[1::2], tok[2::2]):
                rhs[rname] = float(val)
        elif section == "BOUNDS":
            kind, _, col, *val = tok
            c = col_index[col]
            lo_hi = bounds.setdefault(c, [0.0, np.inf])
            v = float(val[0]) if val else 0.0
            if kind == "UP":
                lo_hi[1] = v
            elif kind == "LO":
                lo_hi[0] = v
            elif kind == "FX":
                lo_hi[0] = lo_hi[1] = v
            elif kind == "BV":
                lo_hi[0], lo_hi[1] = 0.0, 1.0
            else:
                raise FormatError(f"unsupported bound type {kind}")

    n_cols = len(col_index)
    n = int(round(np.sqrt(n_cols / 4)))
    if 4 * n * n != n_cols:
        raise FormatError(f"{n_cols} columns do not match a 4*N^2 layout")
    counts = {tag: 0 for tag in ("a1", "a2", "a3", "a4")}
    for rname in row_kind:
        if rname.startswith("r_a"):
            counts[rname.split("_")[1]] += 1
    trip = {tag: ([], [], []) for tag in counts}
    for rname, c, val in entries:
        tag, r = rname.split("_")[1], int(rname.split("_")[2])
        trip[tag][0].append(r)
        trip[tag][1].append(c)
        trip[tag][2].append(val)

    def block(tag):
        rows, cols, vals = trip[tag]
        m = sp.csr_array((vals, (rows, cols)), shape=(counts[tag], n_cols))
        m.sort_indices()
        return m

    def rhs_vec(tag):
        return np.array([rhs.get(f"r_{tag}_{r}", 0.0) for r in range(counts[tag])])

    c = np.zeros(n_cols)
    for k, v in obj.items():
        c[k] = v
    lb = np.zeros(n_cols)
    ub = np.full(n_cols, np.inf)
    for k, (lo, hi) in bounds.items():
        lb[k], ub[k] = lo, hi
    integrality = np.array(integer, dtype=bool)
    a4_kinds = {row_kind[f"r_a4_{r}"] for r in range(counts["a4"])}
    risk_sense = RISK_GEQ if a4_kinds == {"G"} else RISK_EQ
    return MilpProblem(
        n_banks=n, c=c, A1=block("a1"), A2=block("a2"), A3=block("a3"), A4=block("a4"),
        b2=rhs_vec("a2"), b3=rhs_vec("a3"), b4=rhs_vec("a4"),
        lb=lb, ub=ub, integrality=integrality, direction=direction, risk_sense=risk_sense,
        n_fixed_binaries=2 * n * n - int(integrality.sum()), name=name,
    )


def read_mps_file(path) -> MilpProblem:
    return read_mps(Path(path).read_text())


def write_long_csv(records, path) -> None:
    """Plot-ready long format: run, network_type, metric, value."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("run", "network_type", "metric", "value"))
        for rec in records:
            w.writerow(rec)
