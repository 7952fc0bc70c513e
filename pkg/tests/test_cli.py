import json
import subprocess
import sys

import pytest

from confh.cli import run
from confh.manifold import euclidean, to_manifest

PUBLISHED_ODD = {3: 0, 5: 6, 7: 20, 9: 45, 11: 84}


@pytest.fixture(autouse=True)
def _isolated_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("CONFH_CACHE", str(tmp_path / "cache"))
    monkeypatch.chdir(tmp_path)


def _rows(out):
    rows = {}
    for line in out.splitlines():
        if line.startswith("#"):
            continue
        n, vals = line.split(":")
        rows[int(n)] = [int(x) for x in vals.split()]
    return rows


def _padded(row, k):
    return row + [0] * (k - len(row))


def test_betti_euclidean():
    code, out = run(["betti", "--manifold", "euclidean:2", "--n-max", "4"])
    assert code == 0
    assert _rows(out) == {0: [1], 1: [1], 2: [1, 1], 3: [1, 1], 4: [1, 1]}


def test_betti_sphere():
    code, out = run(["betti", "--manifold", "sphere:2", "--n-max", "3"])
    rows = _rows(out)
    # trailing zeros are omitted in the table
    assert _padded(rows[2], 5) == [1, 0, 0, 0, 0]
    assert _padded(rows[3], 4) == [1, 0, 0, 1]


def test_betti_csv_genus_two_published_entry():
    code, out = run(["betti", "--manifold", "surface:2", "--n-max", "7", "--format", "csv"])
    assert code == 0 and out.startswith("n,i,dim\n")
    assert "7,8,20" in out.splitlines()


def test_betti_csv_covers_vanishing_range():
    code, out = run(["betti", "--manifold", "euclidean:2", "--n-max", "3", "--format", "csv"])
    lines = out.splitlines()
    # n = 3: degrees 0 .. nu_3 = 4
    assert [ln for ln in lines if ln.startswith("3,")] == ["3,0,1", "3,1,1", "3,2,0", "3,3,0", "3,4,0"]


def test_betti_show_algebra():
    code, out = run(["betti", "--manifold", "sphere:2", "--n-max", "1", "--show-algebra"])
    assert code == 0 and "[1_w.v, 1_w.v] = 1*1.[v,v]" in out


def test_betti_disjoint_union_selector():
    code, out = run(["betti", "--manifold", "euclidean:2+euclidean:2", "--n-max", "3"])
    assert code == 0 and [r[0] for r in _rows(out).values()] == [1, 2, 3, 4]


def test_betti_from_manifest(tmp_path):
    p = tmp_path / "m.json"
    p.write_text(to_manifest(euclidean(2)))
    code, out = run(["betti", "--manifest", str(p), "--n-max", "2"])
    assert code == 0 and _rows(out)[2] == [1, 1]


@pytest.mark.parametrize("argv", [
    ["betti", "--manifold", "nowhere", "--n-max", "2"],
    ["betti", "--manifold", "sphere:3"],
    ["betti", "--n-max", "2"],
    ["betti", "--manifold", "sphere:2", "--n-max", "-1"],
    ["betti", "--manifold", "sphere:2", "--threads", "0"],
    ["betti", "--manifest", "missing.json"],
    ["frobnicate"],
])
def test_usage_errors_exit_two(argv, capsys):
    code, _ = run(argv)
    assert code == 2
    assert capsys.readouterr().err


def test_verify_extremal_surface_two():
    code, out = run(["verify", "extremal", "--manifold", "surface:2", "--n-max", "13", "--codim", "0"])
    assert code == 0
    assert "fitted degree: 3" in out and "fitted period: 2" in out and out.endswith("status: pass\n")


def test_verify_weyl_sphere():
    code, out = run(["verify", "weyl", "--manifold", "sphere:2", "--n-max", "8"])
    assert code == 0 and "commutator: identically zero" in out


def test_verify_vanishing_bad_r():
    code, out = run(["verify", "vanishing", "--manifold", "sphere:2", "--r", "2"])
    assert code == 2 and "r ≥ 3 required" in out


def test_verify_stability_and_insufficient():
    code, out = run(["verify", "stability", "--manifold", "surface:2", "--n-max", "8", "--degree", "1"])
    assert code == 0
    code, out = run(["verify", "stability", "--manifold", "surface:2", "--n-max", "0", "--degree", "1"])
    assert code == 4 and "status: insufficient data" in out


def test_verify_freeness():
    code, out = run(["verify", "freeness", "--manifold", "open_surface:2", "--n-max", "6"])
    assert code == 0 and out.endswith("status: pass\n")
    code, out = run(["verify", "freeness", "--manifold", "surface:2", "--n-max", "6"])
    assert code == 2


def test_verify_csv_output():
    code, out = run(["verify", "stability", "--manifold", "euclidean:2", "--n-max", "4", "--degree", "1",
                     "--format", "csv"])
    assert code == 0 and out.splitlines()[0] == "n,dim,fitted"


def test_stabmap_open_surface_injective():
    code, out = run(["stabmap", "--manifold", "open_surface:2", "--class", "a1", "--n", "3", "--degree", "3"])
    assert code == 0
    fields = dict(ln.split(": ") for ln in out.splitlines()[:4])
    assert fields["rank"] == fields["source dim"] == "16"


def test_stabmap_errors_and_empty_source():
    assert run(["stabmap", "--manifold", "sphere:2", "--class", "1", "--n", "2", "--degree", "0"])[0] == 2
    assert run(["stabmap", "--manifold", "surface:2", "--class", "top", "--n", "2", "--degree", "0"])[0] == 2
    code, out = run(["stabmap", "--manifold", "surface:2", "--class", "a1", "--n", "2", "--degree", "3"])
    assert code == 0
    assert out.splitlines()[-1] == "H(2,3) -> H(4,5)  [6 x 0]"


def _fit(tmp_path, text, *extra):
    p = tmp_path / "in.csv"
    p.write_text(text)
    return run(["fit", "--input", str(p), *extra])


def test_fit_constant(tmp_path):
    code, out = _fit(tmp_path, "n,value\n" + "".join(f"{n},7\n" for n in range(6)), "--max-degree", "0")
    assert code == 0 and "fit: 7" in out and "degree: 0" in out


def test_fit_published_odd_values(tmp_path):
    text = "".join(f"{n},{v}\n" for n, v in PUBLISHED_ODD.items()) + "".join(f"{n},1\n" for n in (4, 6, 8, 10, 12))
    code, out = _fit(tmp_path, text, "--period", "2", "--max-degree", "3")
    assert code == 0 and "n = 1 mod 2: (n^3+n^2-9n-9)/16" in out


def test_fit_noise_insufficient_and_malformed(tmp_path):
    noise = "".join(f"{n},{v}\n" for n, v in enumerate([3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5, 8]))
    assert _fit(tmp_path, noise, "--max-degree", "2")[0] == 1
    assert _fit(tmp_path, "0,1\n1,2\n", "--max-degree", "2")[0] == 4
    assert _fit(tmp_path, "0,a\n")[0] == 2
    assert run(["fit", "--input", str(tmp_path / "none.csv")])[0] == 2


def test_fit_from_stdin(monkeypatch):
    import io
    monkeypatch.setattr(sys, "stdin", io.StringIO("".join(f"{n},{2 * n}\n" for n in range(5))))
    code, out = run(["fit", "--max-degree", "1"])
    assert code == 0 and "fit: 2n" in out


def test_betti_csv_roundtrips_through_fit(tmp_path):
    code, out = run(["betti", "--manifold", "euclidean:2", "--n-max", "8", "--format", "csv"])
    p = tmp_path / "b.csv"
    p.write_text(out)
    code, fitted = run(["fit", "--input", str(p), "--degree", "1", "--max-degree", "0"])
    assert code == 0 and "fit: 1" in fitted and "onset: 2" in fitted
    code, fitted = run(["fit", "--input", str(p), "--degree", "0", "--max-degree", "0"])
    assert code == 0 and "onset: 0" in fitted


def test_verify_csv_roundtrips_through_fit(tmp_path):
    code, out = run(["verify", "extremal", "--manifold", "surface:1", "--n-max", "12", "--format", "csv"])
    p = tmp_path / "v.csv"
    p.write_text(out)
    code2, fitted = run(["fit", "--input", str(p), "--period", "2", "--max-degree", "1"])
    assert code2 == 0
    code3, report = run(["verify", "extremal", "--manifold", "surface:1", "--n-max", "12"])
    fit_line = next(ln for ln in report.splitlines() if ln.startswith("fit: "))
    assert fit_line in fitted


def test_list():
    code, out = run(["list"])
    assert code == 0
    for name in ("euclidean", "sphere", "surface", "open_surface", "cpn", "klein_bottle", "torus_2d"):
        assert f"\n{name}" in "\n" + out
    assert run(["list"])[1] == out


def test_validate(tmp_path):
    import pathlib
    shipped = pathlib.Path(__file__).resolve().parent.parent / "manifests" / "genus2.json"
    code, out = run(["validate", str(shipped)])
    assert code == 0 and "FAIL" not in out
    bad = tmp_path / "odd.json"
    doc = json.loads(shipped.read_text())
    doc["dimension"] = 3
    bad.write_text(json.dumps(doc))
    code, out = run(["validate", str(bad)])
    assert code == 1 and "validation: fail" in out and "dimension" in out
    assert run(["validate", str(tmp_path / "nope.json")])[0] == 2


def test_threads_and_cache_do_not_change_output(tmp_path):
    base = ["betti", "--manifold", "surface:1", "--n-max", "7"]
    ref = run(base + ["--no-cache"])[1]
    d = str(tmp_path / "det")
    assert run(base + ["--threads", "8", "--cache", d])[1] == ref
    assert run(base + ["--threads", "1", "--cache", d])[1] == ref
    assert run(base + ["--modular", "--seed", "5", "--no-cache"])[1] == ref


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "confh", "betti", "--manifold", "euclidean:2", "--n-max", "2",
                        "--no-cache"], capture_output=True, text=True, check=False)
    assert r.returncode == 0 and r.stdout.endswith("2: 1 1\n")
