from __future__ import annotations

import csv
import json

import numpy as np
import pytest

from fracspec.cli import (
    EIGENFUNCTION_HEADER,
    SPECTRUM_HEADER,
    SWEEP_HEADER,
    Range,
    main,
)


def _read(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def test_solve_laplacian(tmp_path):
    out = tmp_path / "lap.csv"
    assert main(["solve", "--alpha", "1", "--beta", "1", "--n", "200", "--out", str(out), "--count", "1"]) == 0
    header, rows = _read(out)
    assert header == list(SPECTRUM_HEADER)
    assert len(rows) == 199
    lam = np.array([float(r[1]) for r in rows[:4]])
    exact = (np.arange(1, 5) * np.pi) ** 2
    assert np.all(np.abs(lam - exact) / exact <= 1e-2)
    report = json.loads((tmp_path / "lap_report.json").read_text())
    assert report["real_count"] == 199
    header, rows = _read(tmp_path / "lap_j1.csv")
    assert header == list(EIGENFUNCTION_HEADER) and len(rows) == 201


def test_solve_symmetric_and_cone(tmp_path):
    main(["solve", "--alpha", "0.75", "--beta", "0.75", "--n", "60", "--out", str(tmp_path / "s")])
    assert json.loads((tmp_path / "s_report.json").read_text())["real_count"] == 59
    main(["solve", "--alpha", "0.2", "--beta", "0.9", "--n", "100", "--out", str(tmp_path / "c")])
    report = json.loads((tmp_path / "c_report.json").read_text())
    assert report["cone_margin"] <= 0.02


def test_solve_json_format(tmp_path):
    main(["solve", "--alpha", "0.4", "--beta", "0.8", "--n", "20", "--out", str(tmp_path / "s"), "--format", "json"])
    records = json.loads((tmp_path / "s.json").read_text())
    assert len(records) == 19 and set(records[0]) == set(SPECTRUM_HEADER)


def test_solve_bad_config(tmp_path, capsys):
    assert main(["solve", "--alpha", "0.2", "--beta", "0.5", "--out", str(tmp_path / "x")]) == 2
    assert "alpha + beta" in capsys.readouterr().err
    assert main(["solve", "--alpha", "0.6", "--beta", "0.6", "--n", "0"]) == 2


def test_float_format_is_lossless(tmp_path):
    out = tmp_path / "s.csv"
    main(["solve", "--alpha", "0.6", "--beta", "0.9", "--n", "30", "--out", str(out)])
    _, rows = _read(out)
    assert all(len(r[1].replace("-", "").replace(".", "").split("e")[0]) <= 17 for r in rows)
    from fracspec import FractionalOrders, Mesh, compute_spectrum

    lam = compute_spectrum(Mesh(0, 1, 30), FractionalOrders(0.6, 0.9)).values
    np.testing.assert_array_equal([float(r[1]) for r in rows], lam.real)


def test_sweep_grid(tmp_path):
    out = tmp_path / "grid.csv"
    rc = main(["sweep", "--alpha-range", "0.6:1:3", "--beta-range", "0.6:1:3", "--n", "20", "--out", str(out)])
    assert rc == 0
    header, rows = _read(out)
    assert header == list(SWEEP_HEADER)
    assert len(rows) == 9
    pairs = [(float(r[0]), float(r[1])) for r in rows]
    assert pairs == sorted(pairs)
    assert all(r[-1] == "" for r in rows)


def test_sweep_skips_infeasible(tmp_path, caplog):
    out = tmp_path / "sum.csv"
    main(["sweep", "--alpha-range", "0.1:0.9:5", "--sum-fixed", "1.2", "--n", "20", "--out", str(out)])
    _, rows = _read(out)
    assert [r[0] for r in rows] == ["0.29999999999999999", "0.5", "0.69999999999999996", "0.90000000000000002"]
    assert "skipping infeasible point" in caplog.text


def test_sweep_diagonal_trend(tmp_path):
    out = tmp_path / "diag.csv"
    main(["sweep", "--alpha-range", "0.5:1:6", "--diagonal", "--n", "100", "--out", str(out)])
    _, rows = _read(out)
    lam = [float(r[2]) for r in rows]
    assert len(lam) == 6 and all(b > a for a, b in zip(lam, lam[1:]))
    assert abs(lam[-1] - np.pi**2) <= 1e-2 * np.pi**2


def test_sweep_fixed_sum_real_count(tmp_path):
    out = tmp_path / "fs.csv"
    main(["sweep", "--alpha-range", "0.2:0.6:5", "--sum-fixed", "1.2", "--n", "60", "--out", str(out)])
    _, rows = _read(out)
    counts = [int(r[4]) for r in rows]
    assert float(rows[-1][0]) == 0.6 and counts[-1] == max(counts)


def test_sweep_parallel_matches_serial(tmp_path, monkeypatch):
    args = ["sweep", "--alpha-range", "0.5:0.9:3", "--beta-range", "0.7:0.9:2", "--n", "20"]
    monkeypatch.setenv("FRACSPEC_THREADS", "1")
    main(args + ["--out", str(tmp_path / "a.csv")])
    monkeypatch.setenv("FRACSPEC_THREADS", "2")
    main(args + ["--out", str(tmp_path / "b.csv")])
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_sweep_requires_mode():
    with pytest.raises(SystemExit):
        main(["sweep", "--alpha-range", "0.5:1:3"])


def test_eigenfunctions(tmp_path):
    out = tmp_path / "ef.csv"
    main(["eigenfunction", "--alpha", "1", "--beta", "1", "--index", "1", "--out", str(out)])
    _, rows = _read(tmp_path / "ef_j1.csv")
    x = np.array([float(r[0]) for r in rows])
    u = np.array([float(r[1]) for r in rows])
    assert np.corrcoef(u, np.sqrt(2) * np.sin(np.pi * x))[0, 1] >= 0.999

    main(["eigenfunction", "--alpha", "0.2", "--beta", "0.9", "--index", "1", "2", "--out", str(out)])
    im1 = [abs(float(r[2])) for r in _read(tmp_path / "ef_j1.csv")[1]]
    im2 = [abs(float(r[2])) for r in _read(tmp_path / "ef_j2.csv")[1]]
    assert max(im1) <= 1e-6 and max(im2) > 1e-3


def test_eigenfunction_index_out_of_range(tmp_path):
    args = ["eigenfunction", "--alpha", "1", "--beta", "1", "--n", "10", "--index", "10"]
    assert main(args + ["--out", str(tmp_path / "e")]) == 1


def test_determinism(tmp_path):
    args = ["solve", "--alpha", "0.3", "--beta", "0.9", "--n", "40", "--seed", "3", "--count", "2"]
    main(args + ["--out", str(tmp_path / "a.csv")])
    main(args + ["--out", str(tmp_path / "b.csv")])
    for suffix in (".csv", "_report.json", "_j1.csv", "_j2.csv"):
        assert (tmp_path / f"a{suffix}").read_bytes() == (tmp_path / f"b{suffix}").read_bytes()


def test_range_parse():
    assert Range.parse("0.5:1:6").values() == [0.5, 0.6, 0.7, 0.8, 0.9, 1.0]
    for bad in ("0.5:1", "a:b:c", "0:1:1"):
        with pytest.raises(Exception):
            Range.parse(bad)
