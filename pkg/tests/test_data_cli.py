import json

import numpy as np
import pytest

from bkr import cli
from bkr.data import Column, Dataset, load_dataset, parse_schema, write_dataset
from bkr.dp_posterior import RngStream
from bkr.errors import DataError
from bkr.synthetic import generate_d1


def _write(tmp_path, header, rows, schema):
    csv_path, schema_path = tmp_path / "d.csv", tmp_path / "d.json"
    csv_path.write_text("\n".join([header] + rows) + "\n")
    schema_path.write_text(json.dumps({"columns": schema}))
    return str(csv_path), str(schema_path)


class TestLoad:
    def test_numeric(self, tmp_path):
        paths = _write(tmp_path, "a,b", ["1.0,2", "3,4.5"],
                       [{"name": "a", "type": "numeric"}, {"name": "b", "type": "numeric"}])
        ds = load_dataset(*paths)
        assert ds.n == 2 and [c.kind for c in ds.columns] == ["numeric", "numeric"]
        np.testing.assert_array_equal(ds["b"].values, [2.0, 4.5])

    def test_vector(self, tmp_path):
        paths = _write(tmp_path, "v", ["1.0;2.0;3.0"],
                       [{"name": "v", "type": "numeric-vector(3)"}])
        np.testing.assert_array_equal(load_dataset(*paths)["v"].values, [[1.0, 2.0, 3.0]])

    def test_ragged_vector(self, tmp_path):
        paths = _write(tmp_path, "v", ["1.0;2.0;3.0", "1.0;2.0"],
                       [{"name": "v", "type": "numeric-vector", "dim": 3}])
        with pytest.raises(DataError, match=r"row 2, column 'v': ragged"):
            load_dataset(*paths)

    def test_unparsable(self, tmp_path):
        paths = _write(tmp_path, "a", ["1", "x"], [{"name": "a", "type": "numeric"}])
        with pytest.raises(DataError, match=r"row 2, column 'a'"):
            load_dataset(*paths)

    def test_header_mismatch(self, tmp_path):
        paths = _write(tmp_path, "a,c", ["1,2"],
                       [{"name": "a", "type": "numeric"}, {"name": "b", "type": "numeric"}])
        with pytest.raises(DataError, match="header"):
            load_dataset(*paths)

    def test_missing_cells(self, tmp_path):
        paths = _write(tmp_path, "a,s", ["1,", ",foo", "2,bar"],
                       [{"name": "a", "type": "numeric"}, {"name": "s", "type": "string"}])
        ds = load_dataset(*paths)
        np.testing.assert_array_equal(ds.missing(), [[False, True], [True, False], [False, False]])
        np.testing.assert_array_equal(ds.complete_rows(), [2])

    def test_schema_options(self):
        s = parse_schema({"columns": [{"name": "t", "type": "string", "kernel": "edit-rbf",
                                       "lengthscale": 2.0}]})
        assert s[0]["kernel"] == "edit-rbf" and s[0]["lengthscale"] == 2.0
        with pytest.raises(DataError):
            parse_schema({"columns": [{"name": "t", "type": "blob"}]})

    def test_column_validation(self):
        with pytest.raises(DataError):
            Column("a", "numeric", [1.0, np.inf])
        with pytest.raises(DataError):
            Dataset([Column("a", "numeric", [1.0]), Column("b", "numeric", [1.0, 2.0])])
        assert Column("c", "categorical", ["x"]).kernel_kind == "indicator"
        assert Column("s", "string", ["x"]).kernel_kind == "edit-rbf"


def test_round_trip(tmp_path):
    ds, _ = generate_d1(6, 0.4, RngStream(0), dim=5)
    write_dataset(ds, tmp_path / "a.csv", tmp_path / "a.json")
    back = load_dataset(tmp_path / "a.csv", tmp_path / "a.json")
    for c, d in zip(ds.columns, back.columns):
        assert c.kind == d.kind and c.name == d.name
        np.testing.assert_array_equal(c.values, d.values)
    write_dataset(back, tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_benchmark_emitter_round_trip(tmp_path):
    cfg = cli.RunConfig(n_mc=50, n_perm=20, nystrom_rank=None)
    cli.cmd_benchmark("d1", 8, [0.5], 1, cfg, emit_dir=str(tmp_path))
    stem = tmp_path / "d1_rho0.5_rep000"
    loaded = load_dataset(f"{stem}.csv", f"{stem}.schema.json")
    original, _ = generate_d1(8, 0.5, RngStream(cfg.seed, (100, 0, 0)))
    for c, d in zip(original.columns, loaded.columns):
        np.testing.assert_array_equal(c.values, d.values)


@pytest.fixture
def house(tmp_path):
    """House-shaped mixed table: 4 scalars, zip code, a 64x64 image, image size."""
    g = np.random.default_rng(1)
    n = 40
    area = g.uniform(50, 300, n)
    zipc = g.integers(0, 4, n)
    image = np.clip(g.random((n, 4096)) * 0.2 + (area / 300)[:, None], 0, 1)
    ds = Dataset([
        Column("bedrooms", "numeric", np.round(area / 60 + g.random(n))),
        Column("bathrooms", "numeric", np.round(area / 100 + g.random(n))),
        Column("area", "numeric", area),
        Column("zipcode", "categorical", zipc),
        Column("image", "numeric-vector", image),
        Column("imagesize", "numeric", g.integers(100, 200, n) + zipc * 20.0),
        Column("price", "numeric", area * 1000 + zipc * 20000 + g.normal(0, 5000, n)),
    ])
    write_dataset(ds, tmp_path / "house.csv", tmp_path / "house.json")
    return str(tmp_path / "house.csv"), str(tmp_path / "house.json")


def _run(argv, capsys):
    code = cli.main(argv)
    return code, capsys.readouterr()


def test_house_matrix(house, capsys):
    csv_path, schema_path = house
    code, out = _run(["matrix", csv_path, "--schema", schema_path, "--mc-samples", "200",
                      "--threads", "2"], capsys)
    assert code == 0
    rep = json.loads(out.out)
    assert np.array(rep["posterior_mean"]).shape == (7, 7)
    assert np.array(rep["p_dependent"]).shape == (7, 7)
    assert len(rep["pairs"]) == 21
    assert rep["joint"]["joint_probability"] > rep["joint"]["gamma"]
    means = {tuple(p["pair"]): p["posterior_mean"] for p in rep["pairs"]}
    assert means[("area", "price")] > 0.3


def test_test_command(house, capsys):
    csv_path, schema_path = house
    code, out = _run(["test", csv_path, "--schema", schema_path, "--pair", "area", "price",
                      "--mc-samples", "300"], capsys)
    assert code == 0
    rep = json.loads(out.out)
    assert set(rep) >= {"posterior_mean", "tau_mean", "quantiles", "histogram", "p_dependent",
                        "decision"}
    assert len(rep["histogram"]["counts"]) == 50 and sum(rep["histogram"]["counts"]) == 300
    assert set(rep["quantiles"]) == {"2.5", "50", "97.5"}
    assert rep["decision"] == "Dependent"


def test_same_seed_byte_identical(house, tmp_path):
    csv_path, schema_path = house
    args = ["matrix", csv_path, "--schema", schema_path, "--mc-samples", "100", "--seed", "5"]
    assert cli.main(args + ["--out", str(tmp_path / "1.json")]) == 0
    assert cli.main(args + ["--out", str(tmp_path / "2.json"), "--threads", "3"]) == 0
    assert (tmp_path / "1.json").read_bytes() == (tmp_path / "2.json").read_bytes()


def test_matrix_agrees_with_test_on_two_columns(tmp_path, capsys):
    ds, _ = generate_d1(50, 0.6, RngStream(2), dim=4)
    two = ds.select(["X", "CC_X"])
    write_dataset(two, tmp_path / "t.csv", tmp_path / "t.json")
    base = [str(tmp_path / "t.csv"), "--schema", str(tmp_path / "t.json"), "--mc-samples", "200"]
    _, out = _run(["matrix"] + base, capsys)
    m = json.loads(out.out)
    _, out = _run(["test"] + base + ["--pair", "X", "CC_X"], capsys)
    t = json.loads(out.out)
    assert m["posterior_mean"][0][1] == t["posterior_mean"]
    assert m["pairs"][0]["p_dependent"] == t["p_dependent"]
    assert m["pairs"][0]["tau_mean"] == t["tau_mean"]


def test_nystrom_flag(tmp_path, capsys):
    ds, _ = generate_d1(150, 0.6, RngStream(3), dim=4)
    write_dataset(ds, tmp_path / "t.csv", tmp_path / "t.json")
    base = [str(tmp_path / "t.csv"), "--schema", str(tmp_path / "t.json"), "--mc-samples", "200",
            "--pair", "X", "C_X"]
    _, out = _run(["test"] + base + ["--nystrom-rank", "32"], capsys)
    low = json.loads(out.out)
    _, out = _run(["test"] + base + ["--nystrom-rank", "exact"], capsys)
    exact = json.loads(out.out)
    assert low["lowrank"] and not exact["lowrank"]
    assert low["posterior_mean"] == pytest.approx(exact["posterior_mean"], rel=0.1)


def test_baseline_command(house, capsys):
    csv_path, schema_path = house
    code, out = _run(["baseline", csv_path, "--schema", schema_path, "--pair", "area", "price",
                      "--permutations", "99"], capsys)
    rep = json.loads(out.out)
    assert code == 0 and rep["p_value"] == pytest.approx(0.01) and rep["rejected"]


def test_benchmark_command(tmp_path, capsys):
    csv_out = tmp_path / "b.csv"
    code, out = _run(["benchmark", "--n", "30", "--rho", "0", "0.9", "--repetitions", "2",
                      "--mc-samples", "100", "--permutations", "50", "--csv-out", str(csv_out)],
                     capsys)
    assert code == 0
    rep = json.loads(out.out)
    assert [r["rho"] for r in rep["rows"]] == [0.0, 0.9]
    assert rep["rows"][0]["bkr_dep_accuracy"] is None
    lines = csv_out.read_text().splitlines()
    assert lines[0].startswith("rho,repetitions,bkr_ind") and len(lines) == 3


def test_generate_command(tmp_path, capsys):
    code, out = _run(["generate", "--generator", "d2", "--n", "12", "--rho", "0.3",
                      "--csv-out", str(tmp_path / "g.csv"), "--schema-out",
                      str(tmp_path / "g.json")], capsys)
    assert code == 0
    assert load_dataset(tmp_path / "g.csv", tmp_path / "g.json").n == 12
    assert sum(t["dependent"] for t in json.loads(out.out)["truth"]) == 7


class TestExitCodes:
    def test_usage(self, house, capsys):
        csv_path, schema_path = house
        assert _run(["test", csv_path, "--schema", schema_path], capsys)[0] == 1
        assert _run(["test", csv_path, "--schema", schema_path, "--pair", "area", "nope"],
                    capsys)[0] == 1
        assert _run(["matrix", csv_path, "--schema", schema_path, "--gamma", "1.5"],
                    capsys)[0] == 1
        assert _run(["matrix", csv_path, "--schema", schema_path, "--nystrom-rank", "many"],
                    capsys)[0] == 1

    def test_data_error(self, tmp_path, capsys):
        paths = _write(tmp_path, "a,b", ["1,2", "oops,3", "4,5"],
                       [{"name": "a", "type": "numeric"}, {"name": "b", "type": "numeric"}])
        code, out = _run(["matrix", paths[0], "--schema", paths[1]], capsys)
        assert code == 2 and "row 2" in out.err

    def test_missing_needs_flag(self, tmp_path, capsys):
        rows = [f"{i},{'' if i == 2 else i * i % 7}" for i in range(12)]
        paths = _write(tmp_path, "a,b", rows,
                       [{"name": "a", "type": "numeric"}, {"name": "b", "type": "numeric"}])
        assert _run(["matrix", paths[0], "--schema", paths[1], "--mc-samples", "50"],
                    capsys)[0] == 2
        code, out = _run(["matrix", paths[0], "--schema", paths[1], "--mc-samples", "50",
                          "--pairwise-complete"], capsys)
        assert code == 0 and json.loads(out.out)["joint"] is None
        code, out = _run(["matrix", paths[0], "--schema", paths[1], "--mc-samples", "50",
                          "--drop-incomplete"], capsys)
        assert code == 0 and json.loads(out.out)["n"] == 11

    def test_degenerate(self, tmp_path, capsys):
        paths = _write(tmp_path, "a,b", [f"{i},k" for i in range(6)],
                       [{"name": "a", "type": "numeric"}, {"name": "b", "type": "categorical"}])
        code, out = _run(["test", paths[0], "--schema", paths[1], "--pair", "a", "b",
                          "--mc-samples", "20"], capsys)
        assert code == 3 and "'b'" in out.err


def test_benchmark_warns_on_too_few_permutations():
    cfg = cli.RunConfig(n_mc=20, n_perm=100, nystrom_rank=None)
    with pytest.warns(UserWarning, match="too few"):
        cli.cmd_benchmark("d1", 10, [0.5], 1, cfg)


def test_constant_numeric_column_is_degenerate(tmp_path, capsys):
    paths = _write(tmp_path, "a,b", [f"{i},2.5" for i in range(6)],
                   [{"name": "a", "type": "numeric"}, {"name": "b", "type": "numeric"}])
    code, out = _run(["matrix", paths[0], "--schema", paths[1], "--mc-samples", "20"], capsys)
    assert code == 3 and "'b'" in out.err
