import json
from datetime import date
from pathlib import Path

import pytest
from click.testing import CliRunner

from fleetlife.cli import main
from fleetlife.fleet import (
    SyntheticFleetSpec,
    VoltageClass,
    draw_failures,
    generate_synthetic_fleet,
    write_asset_csv,
)
from fleetlife.weibull import REFERENCE_LAWS

runner = CliRunner()


def invoke(*args):
    return runner.invoke(main, [str(a) for a in args], catch_exceptions=False)


def write_fleet(path: Path, records) -> None:
    with open(path, "w", newline="") as handle:
        write_asset_csv(records, handle)


def manifest_without_duration(out_dir: Path) -> dict:
    data = json.loads((out_dir / "manifest.json").read_text())
    data.pop("duration_seconds")
    return data


@pytest.fixture()
def synth_spec(tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(
        json.dumps(
            {
                "sizes": {"110": 30, "150": 20, "220_380": 10},
                "commission_years": [1980, 2010],
                "seed": 42,
            }
        )
    )
    return spec


class TestSynth:
    def test_deterministic_artifacts(self, tmp_path, synth_spec):
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        assert invoke("synth", "--spec", synth_spec, "--out", out1).exit_code == 0
        assert invoke("synth", "--spec", synth_spec, "--out", out2).exit_code == 0
        assert (out1 / "fleet.csv").read_bytes() == (out2 / "fleet.csv").read_bytes()
        assert manifest_without_duration(out1) == manifest_without_duration(out2)

    def test_counts_match_spec(self, tmp_path, synth_spec):
        out = tmp_path / "run"
        invoke("synth", "--spec", synth_spec, "--out", out)
        lines = (out / "fleet.csv").read_text().splitlines()
        assert len(lines) == 1 + 60

    def test_bad_spec(self, tmp_path):
        spec = tmp_path / "spec.json"
        spec.write_text(json.dumps({"sizes": {}, "commission_years": [2000]}))
        result = runner.invoke(main, ["synth", "--spec", str(spec), "--out", str(tmp_path / "o")])
        assert result.exit_code == 2


class TestFit:
    def make_observed_fleet(self, tmp_path, n=4000):
        fleet = generate_synthetic_fleet(
            SyntheticFleetSpec(
                sizes={VoltageClass.V110: n},
                commission_years=(1950, 1995),
                seed=8,
            )
        )
        observed = draw_failures(fleet, REFERENCE_LAWS, date(2021, 7, 1), seed=15)
        path = tmp_path / "assets.csv"
        write_fleet(path, observed)
        return path

    def test_recovers_reference_law(self, tmp_path):
        assets = self.make_observed_fleet(tmp_path)
        out = tmp_path / "fit"
        result = invoke(
            "fit", "--assets", assets, "--cutoff", "2021-07-01", "--family", "110", "--out", out
        )
        assert result.exit_code == 0, result.output
        payload = json.loads((out / "law.json").read_text())
        mle = next(r for r in payload["laws"] if r["source"] == "mle")
        assert abs(mle["beta"] - 6.67) / 6.67 <= 0.05
        assert abs(mle["eta"] - 63.79) / 63.79 <= 0.05
        assert payload["diagnostics"]["110"]["converged"] is True
        assert (out / "km_110.csv").exists()
        assert "110" in payload["medians"]

    def test_all_censored_writes_curve_then_fails(self, tmp_path):
        fleet = generate_synthetic_fleet(
            SyntheticFleetSpec(
                sizes={VoltageClass.V110: 50}, commission_years=(2015, 2020), seed=3
            )
        )
        path = tmp_path / "young.csv"
        write_fleet(path, fleet)
        out = tmp_path / "fit"
        result = runner.invoke(
            main,
            ["fit", "--assets", str(path), "--cutoff", "2021-07-01", "--out", str(out)],
        )
        assert result.exit_code == 2
        assert "insufficient events" in result.output
        km = (out / "km_110.csv").read_text().splitlines()
        assert km == ["t,n_at_risk,d_events,survival"]

    def test_cutoff_before_commission(self, tmp_path):
        fleet = generate_synthetic_fleet(
            SyntheticFleetSpec(
                sizes={VoltageClass.V110: 5}, commission_years=(2000, 2010), seed=3
            )
        )
        path = tmp_path / "assets.csv"
        write_fleet(path, fleet)
        result = runner.invoke(
            main,
            ["fit", "--assets", str(path), "--cutoff", "1999-01-01", "--out", str(tmp_path / "o")],
        )
        assert result.exit_code == 2
        assert "before commission" in result.output

    def test_degenerate_durations_exit_three(self, tmp_path):
        path = tmp_path / "assets.csv"
        path.write_text(
            "asset_id,voltage_kv,commission_date,failure_date,manufacturer\n"
            "A1,110,2000-01-01,2010-01-01,\n"
            "A2,110,2000-01-01,2010-01-01,\n"
            "A3,110,2000-01-01,2010-01-01,\n"
        )
        result = runner.invoke(
            main,
            ["fit", "--assets", str(path), "--cutoff", "2021-07-01", "--out", str(tmp_path / "o")],
        )
        assert result.exit_code == 3
        assert "did not converge" in result.output

    def test_unbounded_median_rendering(self, tmp_path):
        # two failures among ten assets leave the survival curve at 0.8,
        # so the non-parametric median never materializes
        lines = ["asset_id,voltage_kv,commission_date,failure_date,manufacturer"]
        lines.append("F1,110,1990-01-01,2000-01-01,")
        lines.append("F2,110,1990-01-01,2002-01-01,")
        lines.extend(f"C{i},110,1990-01-01,," for i in range(8))
        path = tmp_path / "assets.csv"
        path.write_text("\n".join(lines) + "\n")
        out = tmp_path / "fit"
        result = invoke("fit", "--assets", path, "--cutoff", "2021-07-01", "--out", out)
        assert result.exit_code == 0, result.output
        medians = json.loads((out / "law.json").read_text())["medians"]["110"]
        assert medians["km_median_years"] == "unbounded"
        assert medians["km_q75_years"] == "unbounded"
        assert isinstance(medians["weibull_median_years"], float)


class TestScore:
    def laws_file(self, tmp_path):
        path = tmp_path / "laws.json"
        records = [
            {"family": vc.value, "beta": law.beta, "eta": law.eta, "source": "reference"}
            for vc, law in REFERENCE_LAWS.items()
        ]
        path.write_text(json.dumps({"laws": records}))
        return path

    def test_new_fleet_scores_ten(self, tmp_path):
        fleet = generate_synthetic_fleet(
            SyntheticFleetSpec(
                sizes={VoltageClass.V110: 5}, commission_years=(2021, 2021), seed=2
            )
        )
        path = tmp_path / "fleet.csv"
        write_fleet(path, fleet)
        out = tmp_path / "score"
        result = invoke(
            "score", "--assets", path, "--laws", self.laws_file(tmp_path),
            "--as-of", "2021-12-31", "--out", out,
        )
        assert result.exit_code == 0, result.output
        rows = (out / "ahi.csv").read_text().splitlines()[1:]
        assert len(rows) == 5
        assert all(row.split(",")[2] == "10" for row in rows)

    def test_seventy_year_asset_is_purple(self, tmp_path):
        path = tmp_path / "fleet.csv"
        path.write_text(
            "asset_id,voltage_kv,commission_date,failure_date,manufacturer\n"
            "OLD,110,1951-07-01,,\n"
        )
        out = tmp_path / "score"
        result = invoke(
            "score", "--assets", path, "--laws", self.laws_file(tmp_path),
            "--as-of", "2021-07-01", "--out", out,
        )
        assert result.exit_code == 0, result.output
        row = (out / "ahi.csv").read_text().splitlines()[1].split(",")
        assert row[0] == "OLD"
        assert float(row[1]) == pytest.approx(70.0, abs=0.05)
        assert row[2] == "3" and row[3] == "purple" and row[4] == "probability"

    def test_empty_fleet_ok(self, tmp_path):
        path = tmp_path / "fleet.csv"
        path.write_text("asset_id,voltage_kv,commission_date,failure_date,manufacturer\n")
        out = tmp_path / "score"
        result = invoke(
            "score", "--assets", path, "--laws", self.laws_file(tmp_path),
            "--as-of", "2021-07-01", "--out", out,
        )
        assert result.exit_code == 0
        assert (out / "ahi.csv").read_text() == "asset_id,apparent_age,score,band,basis\n"

    def test_missing_family_law(self, tmp_path):
        path = tmp_path / "fleet.csv"
        path.write_text(
            "asset_id,voltage_kv,commission_date,failure_date,manufacturer\n"
            "A,150,2000-01-01,,\n"
        )
        laws = tmp_path / "laws.json"
        laws.write_text(json.dumps([{"family": "110", "beta": 6.67, "eta": 63.79}]))
        result = runner.invoke(
            main,
            ["score", "--assets", str(path), "--laws", str(laws),
             "--as-of", "2021-07-01", "--out", str(tmp_path / "o")],
        )
        assert result.exit_code == 2
        assert "150" in result.output

    def test_failed_assets_excluded(self, tmp_path):
        path = tmp_path / "fleet.csv"
        path.write_text(
            "asset_id,voltage_kv,commission_date,failure_date,manufacturer\n"
            "DEAD,110,1980-01-01,2020-01-01,\n"
            "LIVE,110,2018-01-01,,\n"
        )
        out = tmp_path / "score"
        result = invoke(
            "score", "--assets", path, "--laws", self.laws_file(tmp_path),
            "--as-of", "2021-07-01", "--out", out,
        )
        assert result.exit_code == 0
        rows = (out / "ahi.csv").read_text().splitlines()[1:]
        assert [r.split(",")[0] for r in rows] == ["LIVE"]


@pytest.fixture()
def small_fleet_csv(tmp_path):
    fleet = generate_synthetic_fleet(
        SyntheticFleetSpec(
            sizes={VoltageClass.V110: 15, VoltageClass.V150: 10, VoltageClass.V220_380: 5},
            commission_years=(1980, 2015),
            seed=6,
        )
    )
    path = tmp_path / "fleet.csv"
    write_fleet(path, fleet)
    return path


def scenario_file(tmp_path, **overrides) -> Path:
    from fleetlife.scenarios import builtin_scenario, scenario_to_dict

    data = scenario_to_dict(builtin_scenario("time-based"))
    data.update({"horizon_years": 30, "replications": 2, "start_date": "2021-07-01"})
    data.update(overrides)
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(data))
    return path


class TestSimulate:
    def test_deterministic_reruns(self, tmp_path, small_fleet_csv):
        sc = scenario_file(tmp_path)
        out1, out2 = tmp_path / "s1", tmp_path / "s2"
        r1 = invoke("simulate", "--fleet", small_fleet_csv, "--scenario", sc, "--out", out1, "--seed", 1)
        r2 = invoke("simulate", "--fleet", small_fleet_csv, "--scenario", sc, "--out", out2, "--seed", 1)
        assert r1.exit_code == 0, r1.output
        assert r2.exit_code == 0
        assert (out1 / "report.json").read_bytes() == (out2 / "report.json").read_bytes()
        assert (out1 / "kpis.csv").read_bytes() == (out2 / "kpis.csv").read_bytes()
        assert manifest_without_duration(out1) == manifest_without_duration(out2)

    def test_builtin_name(self, tmp_path, small_fleet_csv):
        out = tmp_path / "sim"
        result = invoke(
            "simulate", "--fleet", small_fleet_csv, "--scenario", "time-based:fte60",
            "--out", out, "--jobs", 2,
        )
        assert result.exit_code == 0, result.output
        payload = json.loads((out / "report.json").read_text())
        assert payload["scenario_name"] == "time-based:fte60"
        assert len(payload["replications"]) == 5

    def test_seed_recorded_in_manifest(self, tmp_path, small_fleet_csv):
        sc = scenario_file(tmp_path)
        out = tmp_path / "sim"
        invoke("simulate", "--fleet", small_fleet_csv, "--scenario", sc, "--out", out, "--seed", 99)
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["seeds"] == {"master_seed": 99}

    def test_scenario_missing_resources(self, tmp_path, small_fleet_csv):
        sc_path = tmp_path / "broken.json"
        from fleetlife.scenarios import builtin_scenario, scenario_to_dict

        data = scenario_to_dict(builtin_scenario("time-based"))
        del data["resources"]
        sc_path.write_text(json.dumps(data))
        result = runner.invoke(
            main,
            ["simulate", "--fleet", str(small_fleet_csv), "--scenario", str(sc_path),
             "--out", str(tmp_path / "o")],
        )
        assert result.exit_code == 2
        assert "resources: required" in result.output

    def test_unknown_scenario_name(self, tmp_path, small_fleet_csv):
        result = runner.invoke(
            main,
            ["simulate", "--fleet", str(small_fleet_csv), "--scenario", "usage-based",
             "--out", str(tmp_path / "o")],
        )
        assert result.exit_code == 2


class TestReport:
    def test_self_comparison_zero_deltas(self, tmp_path, small_fleet_csv):
        sc = scenario_file(tmp_path)
        sim_out = tmp_path / "sim"
        invoke("simulate", "--fleet", small_fleet_csv, "--scenario", sc, "--out", sim_out)
        out = tmp_path / "cmp"
        result = invoke(
            "report", "--a", sim_out / "report.json", "--b", sim_out / "report.json", "--out", out
        )
        assert result.exit_code == 0, result.output
        rows = (out / "comparison.csv").read_text().splitlines()[1:]
        assert all(float(row.split(",")[3]) == 0.0 for row in rows)
        summary = json.loads((out / "summary.json").read_text())
        assert summary["crossover_year"] is None
        assert (out / "plotdata" / "a_totex_stack.csv").exists()
        assert (out / "plotdata" / "b_totex_stack.csv").exists()

    def test_horizon_mismatch(self, tmp_path, small_fleet_csv):
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        invoke("simulate", "--fleet", small_fleet_csv, "--scenario", scenario_file(tmp_path), "--out", out_a)
        invoke(
            "simulate", "--fleet", small_fleet_csv,
            "--scenario", scenario_file(tmp_path, horizon_years=20), "--out", out_b,
        )
        result = runner.invoke(
            main,
            ["report", "--a", str(out_a / "report.json"), "--b", str(out_b / "report.json"),
             "--out", str(tmp_path / "cmp")],
        )
        assert result.exit_code == 2


def test_help_lists_commands():
    result = invoke("--help")
    for command in ("fit", "score", "simulate", "synth", "report"):
        assert command in result.output
