import json

import numpy as np
import pytest

from hawkes import DataValidationError
from hawkes.cli import main
from hawkes.io import (
    model_from_spec,
    read_counts_csv,
    read_events_csv,
    write_counts_csv,
    write_events_csv,
)

from conftest import make_events


EXP_SPEC = {
    "schema": 1,
    "lambda": 0.5,
    "kernel": {"type": "exp", "alpha": 1.0, "beta": 2.0},
}

ETAS_SPEC = {
    "schema": 1,
    "family": "etas",
    "lambda": 0.3,
    "A": 0.4,
    "alpha": 1.0,
    "beta": 2.0,
    "m0": 3.0,
    "c": 0.01,
    "p": 1.5,
}


def _write_spec(path, spec):
    path.write_text(json.dumps(spec), encoding="utf-8")
    return str(path)


# --- CSV round trips --------------------------------------------------------------


def test_events_csv_round_trip(tmp_path):
    ev = make_events([0.5, 1.25], horizon=2.0, marks=[3.5, 4.0], dims=[1, 2])
    path = tmp_path / "events.csv"
    write_events_csv(path, ev)
    back = read_events_csv(path, horizon=2.0)
    assert np.array_equal(back.times, ev.times)
    assert np.array_equal(back.marks, ev.marks)
    assert np.array_equal(back.dims, ev.dims)


def test_events_csv_duplicate_line_numbered(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("time\n1.0\n1.0\n", encoding="utf-8")
    with pytest.raises(DataValidationError, match="bad.csv:3.*duplicate"):
        read_events_csv(path)


def test_events_csv_unsorted_line_numbered(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("time\n2.0\n1.5\n", encoding="utf-8")
    with pytest.raises(DataValidationError, match="bad.csv:3.*out-of-order"):
        read_events_csv(path)


def test_events_csv_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("when\n1.0\n", encoding="utf-8")
    with pytest.raises(DataValidationError, match="header"):
        read_events_csv(path)


def test_events_csv_rejects_non_numeric(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("time,mark\n1.0,x\n", encoding="utf-8")
    with pytest.raises(DataValidationError, match="bad.csv:2"):
        read_events_csv(path)


def test_counts_csv_round_trip(tmp_path):
    path = tmp_path / "counts.csv"
    write_counts_csv(path, [0, 3, 1])
    assert read_counts_csv(path).tolist() == [0, 3, 1]


# --- model specs -------------------------------------------------------------------


def test_model_from_spec_families():
    from hawkes import (
        DiscreteModel,
        DynamicContagionModel,
        EtasModel,
        HawkesModel,
        MultivariateHawkesModel,
        NonlinearSpec,
        RenewalHawkesModel,
    )

    assert isinstance(model_from_spec(EXP_SPEC), HawkesModel)
    assert isinstance(model_from_spec(ETAS_SPEC), EtasModel)
    assert isinstance(
        model_from_spec(
            {"family": "nonlinear", "lambda": 0.5,
             "kernel": {"type": "exp", "alpha": -1.0, "beta": 2.0}}
        ),
        NonlinearSpec,
    )
    assert isinstance(
        model_from_spec(
            {"family": "discrete", "lambda": 0.5, "eta": 0.5, "g": [1.0]}
        ),
        DiscreteModel,
    )
    assert isinstance(
        model_from_spec(
            {
                "family": "dynamic-contagion",
                "a": 0.5,
                "lambda0": 1.0,
                "delta": 2.0,
                "rho": 0.3,
                "G": {"type": "exponential", "mean": 0.8},
                "H": {"type": "constant", "value": 0.0},
            }
        ),
        DynamicContagionModel,
    )
    assert isinstance(
        model_from_spec(
            {
                "family": "renewal",
                "g": {"family": "gamma", "shape": 2.0, "rate": 2.0},
                "kernel": {"type": "exp", "alpha": 1.0, "beta": 2.0},
            }
        ),
        RenewalHawkesModel,
    )
    mv = model_from_spec(
        {
            "family": "multivariate",
            "d": 2,
            "baselines": [1.0, 1.0],
            "kernels": [
                {"type": "exp", "alpha": 0.0, "beta": 1.0},
                {"type": "exp", "alpha": 0.5, "beta": 1.0},
                {"type": "exp", "alpha": 0.0, "beta": 1.0},
                {"type": "exp", "alpha": 0.0, "beta": 1.0},
            ],
        }
    )
    assert isinstance(mv, MultivariateHawkesModel) and mv.d == 2


def test_model_spec_errors():
    with pytest.raises(ValueError, match="schema"):
        model_from_spec({**EXP_SPEC, "schema": 2})
    with pytest.raises(ValueError, match="family"):
        model_from_spec({"family": "unknown"})
    with pytest.raises(ValueError, match="kernel"):
        model_from_spec({"lambda": 1.0, "kernel": {"type": "box"}})


# --- CLI ------------------------------------------------------------------------------


def test_cli_simulate_fit_round_trip(tmp_path):
    spec = _write_spec(tmp_path / "model.json", EXP_SPEC)
    out = tmp_path / "run1"
    code = main(
        ["simulate", "--model", spec, "--T", "10000", "--seed", "42",
         "--output", str(out)]
    )
    assert code == 0
    ev = read_events_csv(out / "events.csv", horizon=10_000.0)
    assert len(ev) / 10_000.0 == pytest.approx(1.0, rel=0.05)

    fit_out = tmp_path / "fit1"
    code = main(
        ["fit-mle", "--data", str(out / "events.csv"), "--T", "10000",
         "--family", "exp", "--output", str(fit_out)]
    )
    assert code == 0
    result = json.loads((fit_out / "fit.json").read_text())
    assert result["theta"]["lambda"] == pytest.approx(0.5, rel=0.1)
    assert result["theta"]["alpha"] == pytest.approx(1.0, rel=0.1)
    assert result["theta"]["beta"] == pytest.approx(2.0, rel=0.1)
    assert result["converged"] is True
    assert len(result["restarts"]) == 10


def test_cli_simulate_zero_rate(tmp_path):
    spec = _write_spec(
        tmp_path / "zero.json",
        {"lambda": 0.0, "kernel": {"type": "exp", "alpha": 1.0, "beta": 2.0}},
    )
    out = tmp_path / "zero"
    assert main(["simulate", "--model", spec, "--T", "100",
                 "--output", str(out)]) == 0
    assert (out / "events.csv").read_bytes() == b"time\r\n"


def test_cli_simulate_deterministic(tmp_path):
    spec = _write_spec(tmp_path / "model.json", EXP_SPEC)
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        main(["simulate", "--model", spec, "--T", "500", "--seed", "7",
              "--output", str(out)])
        outs.append((out / "events.csv").read_bytes())
    assert outs[0] == outs[1]


def test_cli_simulate_methods_and_intensity(tmp_path):
    spec = _write_spec(tmp_path / "model.json", EXP_SPEC)
    for method in ("exact", "cluster"):
        out = tmp_path / method
        assert main(["simulate", "--model", spec, "--T", "200",
                     "--method", method, "--output", str(out)]) == 0
        assert (out / "events.csv").exists()
    out = tmp_path / "grid"
    assert main(["simulate", "--model", spec, "--T", "50", "--output", str(out),
                 "--emit-intensity", "0.5"]) == 0
    lines = (out / "intensity.csv").read_text().strip().splitlines()
    assert lines[0] == "t,intensity"
    assert len(lines) == 102  # 0, 0.5, ..., 50


def test_cli_simulate_variants(tmp_path):
    dc_spec = _write_spec(
        tmp_path / "dc.json",
        {
            "family": "dynamic-contagion",
            "a": 0.5,
            "lambda0": 1.0,
            "delta": 2.0,
            "rho": 0.3,
            "G": {"type": "exponential", "mean": 0.8},
            "H": {"type": "exponential", "mean": 0.5},
        },
    )
    out = tmp_path / "dc"
    assert main(["simulate", "--model", dc_spec, "--T", "100",
                 "--output", str(out)]) == 0
    assert (out / "events.csv").exists()
    shocks = (out / "shocks.csv").read_text().splitlines()
    assert shocks[0] == "time,jump"

    disc_spec = _write_spec(
        tmp_path / "disc.json",
        {"family": "discrete", "lambda": 0.5, "eta": 0.5, "g": [1.0]},
    )
    out = tmp_path / "disc"
    assert main(["simulate", "--model", disc_spec, "--T", "50",
                 "--output", str(out)]) == 0
    assert read_counts_csv(out / "counts.csv").size == 50

    etas_spec = _write_spec(tmp_path / "etas.json", ETAS_SPEC)
    out = tmp_path / "etas"
    assert main(["simulate", "--model", etas_spec, "--T", "200",
                 "--output", str(out)]) == 0
    ev = read_events_csv(out / "events.csv")
    assert ev.marks is not None and ev.marks.min() >= 3.0


def test_cli_validate(tmp_path, capsys):
    good = tmp_path / "good.csv"
    write_events_csv(good, make_events([0.5, 1.5], horizon=2.0))
    assert main(["validate", str(good)]) == 0
    assert "OK" in capsys.readouterr().out

    bad = tmp_path / "bad.csv"
    bad.write_text("time\n1.0\n1.0\n", encoding="utf-8")
    assert main(["validate", str(bad)]) == 3
    err = capsys.readouterr().err
    assert json.loads(err)["code"] == 3


def test_cli_validate_etas_threshold(tmp_path, capsys):
    spec = _write_spec(tmp_path / "etas.json", ETAS_SPEC)
    path = tmp_path / "marked.csv"
    write_events_csv(path, make_events([0.5], horizon=1.0, marks=[2.0]))
    assert main(["validate", str(path), "--model", spec]) == 3
    assert "m0=3.0" in capsys.readouterr().err


def test_cli_malformed_config(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    out = tmp_path / "x"
    assert main(["simulate", "--model", str(path), "--T", "10",
                 "--output", str(out)]) == 2
    assert json.loads(capsys.readouterr().err)["code"] == 2


def test_cli_missing_file_is_config_error(tmp_path, capsys):
    out = tmp_path / "x"
    assert main(["simulate", "--model", str(tmp_path / "nope.json"),
                 "--T", "10", "--output", str(out)]) == 2


def test_cli_numerical_failure_exit_code(tmp_path, capsys):
    spec = _write_spec(tmp_path / "model.json", EXP_SPEC)
    out = tmp_path / "sim"
    main(["simulate", "--model", spec, "--T", "300", "--output", str(out)])
    fit_out = tmp_path / "fit"
    code = main(
        ["fit-mle", "--data", str(out / "events.csv"), "--T", "300",
         "--restarts", "2", "--max-iter", "1", "--output", str(fit_out)]
    )
    assert code == 4
    assert json.loads(capsys.readouterr().err)["code"] == 4


def test_cli_fit_gmm_and_moments(tmp_path):
    spec = _write_spec(tmp_path / "model.json", EXP_SPEC)
    out = tmp_path / "sim"
    main(["simulate", "--model", spec, "--T", "20000", "--seed", "3",
          "--output", str(out)])
    gmm_out = tmp_path / "gmm"
    code = main(
        ["fit-gmm", "--data", str(out / "events.csv"), "--T", "20000",
         "--tau", "1.0", "--delta", "5.0", "--output", str(gmm_out)]
    )
    assert code == 0
    result = json.loads((gmm_out / "fit.json").read_text())
    assert result["theta"]["lambda"] == pytest.approx(0.5, rel=0.5)
    assert result["n_discarded"] == 2000

    mom_out = tmp_path / "moments"
    code = main(
        ["moments", "--model", spec, "--data", str(out / "events.csv"),
         "--T", "20000", "--tau", "1.0", "--delta", "5.0",
         "--output", str(mom_out)]
    )
    assert code == 0
    payload = json.loads((mom_out / "moments.json").read_text())
    assert payload["theoretical"]["m1"] == pytest.approx(1.0)
    assert payload["empirical"]["m1"] == pytest.approx(1.0, rel=0.1)

    # pre-binned input path
    counts_out = tmp_path / "binned"
    from hawkes import bin_counts

    ev = read_events_csv(out / "events.csv", horizon=20_000.0)
    write_counts_csv(tmp_path / "counts.csv", bin_counts(ev, 1.0).counts)
    code = main(
        ["fit-gmm", "--data", str(tmp_path / "counts.csv"), "--binned",
         "--tau", "1.0", "--delta", "5.0", "--output", str(counts_out)]
    )
    assert code == 0


def test_cli_gof_and_decluster(tmp_path):
    spec = _write_spec(tmp_path / "model.json", EXP_SPEC)
    out = tmp_path / "sim"
    main(["simulate", "--model", spec, "--T", "2000", "--output", str(out)])

    gof_out = tmp_path / "gof"
    assert main(["gof", "--model", spec, "--data", str(out / "events.csv"),
                 "--T", "2000", "--output", str(gof_out)]) == 0
    payload = json.loads((gof_out / "gof.json").read_text())
    assert payload["p_value"] > 0.01
    lines = (gof_out / "rescaled.csv").read_text().strip().splitlines()
    assert lines[0] == "interarrival"
    assert len(lines) == payload["n_events"] + 1

    dec_out = tmp_path / "dec"
    assert main(["decluster", "--model", spec, "--data",
                 str(out / "events.csv"), "--T", "2000",
                 "--output", str(dec_out)]) == 0
    rows = (dec_out / "decluster.csv").read_text().strip().splitlines()
    assert rows[0] == "index,time,rho,label"
    first = rows[1].split(",")
    assert float(first[2]) == 1.0 and first[3] == "background"


def test_cli_smoke_matrix(tmp_path):
    """simulate -> validate -> fit round trip for every model family."""
    specs = {
        "hawkes-exp": (EXP_SPEC, "exp"),
        "hawkes-powerlaw": (
            {"lambda": 0.5, "kernel": {"type": "powerlaw", "K": 0.5, "c": 1.0,
                                       "p": 2.0}},
            "powerlaw",
        ),
        "etas": (ETAS_SPEC, "etas"),
        "nonlinear": (
            {"family": "nonlinear", "lambda": 0.5,
             "kernel": {"type": "exp", "alpha": -1.0, "beta": 2.0}},
            None,
        ),
        "multivariate": (
            {"family": "multivariate", "d": 2, "baselines": [0.5, 0.5],
             "kernels": [{"type": "exp", "alpha": 0.3, "beta": 2.0}] * 4},
            None,
        ),
        "dynamic-contagion": (
            {"family": "dynamic-contagion", "a": 0.5, "lambda0": 1.0,
             "delta": 2.0, "rho": 0.3,
             "G": {"type": "exponential", "mean": 0.8},
             "H": {"type": "exponential", "mean": 0.5}},
            None,
        ),
        "renewal": (
            {"family": "renewal",
             "g": {"family": "gamma", "shape": 2.0, "rate": 2.0},
             "kernel": {"type": "exp", "alpha": 1.0, "beta": 2.0}},
            None,
        ),
    }
    horizons = {"hawkes-powerlaw": 300, "etas": 150}
    for name, (spec, family) in specs.items():
        spec_path = _write_spec(tmp_path / f"{name}.json", spec)
        out = tmp_path / name
        T = horizons.get(name, 200)
        assert main(["simulate", "--model", spec_path, "--T", str(T),
                     "--output", str(out)]) == 0, name
        assert main(["validate", str(out / "events.csv"),
                     "--model", spec_path]) == 0, name
        if family is not None:
            fit_out = tmp_path / f"{name}-fit"
            args = ["fit-mle", "--data", str(out / "events.csv"),
                    "--T", str(T), "--family", family, "--restarts", "2",
                    "--output", str(fit_out)]
            if family == "etas":
                args += ["--m0", "3.0"]
            assert main(args) == 0, name
            assert (fit_out / "fit.json").exists()


def test_cli_renewal_mean(tmp_path):
    spec = _write_spec(
        tmp_path / "renewal.json",
        {
            "family": "renewal",
            "g": {"family": "exponential", "rate": 1.0},
            "kernel": {"type": "exp", "alpha": 0.0, "beta": 1.0},
        },
    )
    out = tmp_path / "rm"
    assert main(["renewal-mean", "--model", spec, "--horizon", "5",
                 "--step", "0.01", "--output", str(out)]) == 0
    rows = (out / "mean.csv").read_text().strip().splitlines()
    assert rows[0] == "t,K,M"
    t, k, m = (float(x) for x in rows[-1].split(","))
    assert t == 5.0 and k == 0.0 and m == pytest.approx(5.0, abs=1e-3)
