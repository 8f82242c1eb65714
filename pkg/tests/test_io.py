import numpy as np
import pytest
from hypothesis import given, settings

from sysrisk.io import FormatError, export_mps, parse_network, read_mps, write_network
from sysrisk.model import build_problem, presolve
from sysrisk.network import BankingSystem

from conftest import family, systems


def write(path, text):
    path.write_text(text)
    return path


def test_parse_pair(tmp_path):
    b = write(tmp_path / "b.csv", "bank_id,equity\nA,10\nB,10\n")
    x = write(tmp_path / "x.csv", "debtor_id,creditor_id,amount\nA,B,2\nA,B,3\n")
    s = parse_network(b, x)
    assert s.bank_ids == ("A", "B")
    assert s.liabilities.tolist() == [[0, 5], [0, 0]]
    assert s.kappa.tolist() == [1, 1]


def test_parse_leverage(tmp_path):
    b = write(tmp_path / "b.csv", "bank_id,equity,total_assets,total_liabilities\nA,10,100,90\nB,5,,\n")
    x = write(tmp_path / "x.csv", "debtor_id,creditor_id,amount\n")
    assert parse_network(b, x).kappa.tolist() == [10, 1]


@pytest.mark.parametrize("rows, message", [
    ("A,A,1\n", "self-loop"),
    ("A,C,1\n", "unknown bank id"),
    ("A,B,abc\n", "not a number"),
    ("A,B,-1\n", "negative"),
])
def test_parse_errors(tmp_path, rows, message):
    b = write(tmp_path / "b.csv", "bank_id,equity\nA,10\nB,10\n")
    x = write(tmp_path / "x.csv", "debtor_id,creditor_id,amount\nA,B,1\n" + rows)
    with pytest.raises(FormatError, match=message) as err:
        parse_network(b, x)
    assert ":3:" in str(err.value)


@settings(max_examples=30, deadline=None)
@given(systems(max_n=7))
def test_csv_round_trip(tmp_path_factory, s):
    d = tmp_path_factory.mktemp("rt")
    write_network(s, d / "b.csv", d / "x.csv")
    t = parse_network(d / "b.csv", d / "x.csv")
    assert t.bank_ids == s.bank_ids
    assert np.array_equal(t.liabilities, s.liabilities)
    assert np.array_equal(t.equity, s.equity) and np.array_equal(t.kappa, s.kappa)


def assert_same_problem(p, q):
    for name in ("A1", "A2", "A3", "A4"):
        a, b = getattr(p, name), getattr(q, name)
        assert a.shape == b.shape
        assert np.array_equal(a.toarray(), b.toarray()), name
    for name in ("c", "b2", "b3", "b4", "lb", "ub", "integrality"):
        assert np.array_equal(getattr(p, name), getattr(q, name)), name
    assert (p.direction, p.risk_sense, p.n_banks, p.n_fixed_binaries) == \
        (q.direction, q.risk_sense, q.n_banks, q.n_fixed_binaries)


@settings(max_examples=25, deadline=None)
@given(systems(max_n=5))
def test_mps_round_trip(s):
    for direction, sense in (("min", "eq"), ("max", "geq")):
        p = presolve(build_problem(s, direction, sense))
        assert_same_problem(p, read_mps(export_mps(p)))


def test_mps_layout():
    p = presolve(build_problem(family(3.0)))
    text = export_mps(p)
    lines = text.splitlines()
    assert lines[0].startswith("NAME") and lines[-1] == "ENDATA"
    for section in ("ROWS", "COLUMNS", "RHS", "BOUNDS"):
        assert section in lines
    # every free binary appears inside an integer marker block
    intorg = [i for i, ln in enumerate(lines) if "INTORG" in ln]
    intend = [i for i, ln in enumerate(lines) if "INTEND" in ln]
    assert len(intorg) == len(intend) >= 1
    cols = set()
    for a, b in zip(intorg, intend):
        cols |= {ln.split()[0] for ln in lines[a + 1 : b]}
    assert len(cols) == int(p.integrality.sum()) == 2 * 9 - p.n_fixed_binaries
    assert "r_a1_0" in text and "y_0" in text and "d_0" in text


def test_mps_single_bank():
    s = BankingSystem.from_arrays([[0.0]], [1.0])
    p = presolve(build_problem(s))
    q = read_mps(export_mps(p))
    assert_same_problem(p, q)
    assert not q.integrality.any()


def test_mps_numbers_have_17_digits():
    s = BankingSystem.from_arrays([[0, 1 / 3], [2 / 3, 0]], [0.1, 0.7])
    text = export_mps(build_problem(s))
    assert format(1 / 3, ".17g") in text
