"""Tests for the figures package: parsing of CLI grid CSVs, heatmap
rendering from real scenario outputs, and the argmax-agreement
invariant."""

import subprocess
import sys

import numpy as np
import pytest

from ringsfwm_figures import FigureJob, ParseError, load_grid, render
from ringsfwm_figures.cli import main as render_main


@pytest.fixture(scope="module")
def scenario_outputs(tmp_path_factory):
    """Run the bundled short-pulse and long-pulse scenarios through the
    primary CLI; the figures package consumes only the CSV files."""
    base = tmp_path_factory.mktemp("cli_out")
    outs = {}
    from importlib import resources
    scenarios = resources.files("ringsfwm") / "scenarios"
    for name in ("fig2a", "fig2b", "fig3a", "fig3b"):
        out = base / name
        cmd = [sys.executable, "-m", "ringsfwm.cli", "run",
               str(scenarios / f"{name}.json"), "--out", str(out),
               "--grid-n", "64"]
        subprocess.run(cmd, check=True, capture_output=True)
        outs[name] = out
    return outs


class TestLoadGrid:
    def test_roundtrip(self, scenario_outputs):
        g = load_grid(scenario_outputs["fig2a"] / "jsi.csv")
        assert g.values.shape == (64, 64)
        assert g.v_S == pytest.approx(1.5e8)
        assert np.max(g.values) == pytest.approx(1.0)

    def test_malformed_row_reports_line(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("# v_S_m_per_s=1e8 v_I_m_per_s=1e8\n"
                     "kappa_signal,kappa_idler,v\n"
                     "0,0,1\n"
                     "0,1,oops\n")
        with pytest.raises(ParseError, match=r"bad\.csv:4"):
            load_grid(p)

    def test_wrong_column_count(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("# v_S_m_per_s=1e8 v_I_m_per_s=1e8\n"
                     "kappa_signal,kappa_idler,v\n"
                     "0,0\n")
        with pytest.raises(ParseError, match=r"bad\.csv:3"):
            load_grid(p)

    def test_missing_header(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("just,some,stuff\n1,2,3\n")
        with pytest.raises(ParseError, match=r"bad\.csv:1"):
            load_grid(p)

    def test_incomplete_grid(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("# v_S_m_per_s=1e8 v_I_m_per_s=1e8\n"
                     "kappa_signal,kappa_idler,v\n"
                     "0,0,1\n0,1,2\n1,0,3\n")
        with pytest.raises(ParseError, match="complete"):
            load_grid(p)

    def test_missing_speed_metadata(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("kappa_signal,kappa_idler,v\n0,0,1\n")
        with pytest.raises(ParseError, match="v_S_m_per_s"):
            load_grid(p)


class TestRender:
    def test_single_panel(self, scenario_outputs, tmp_path):
        out = tmp_path / "fig2a.png"
        drawn = render(FigureJob(
            grid_path=scenario_outputs["fig2a"] / "jsi.csv",
            panel_path=None, out_path=out))
        assert out.exists() and out.stat().st_size > 0
        assert len(drawn) == 1

    def test_two_panel_comparison(self, scenario_outputs, tmp_path):
        out = tmp_path / "fig3.png"
        drawn = render(FigureJob(
            grid_path=scenario_outputs["fig3a"] / "jsi.csv",
            panel_path=scenario_outputs["fig3b"] / "jsi.csv",
            out_path=out))
        assert out.exists()
        assert len(drawn) == 2

    def test_peak_pixel_matches_input_argmax(self, scenario_outputs,
                                             tmp_path):
        for name in ("fig2a", "fig2b", "fig3a", "fig3b"):
            g = load_grid(scenario_outputs[name] / "jsi.csv")
            drawn = render(FigureJob(
                grid_path=scenario_outputs[name] / "jsi.csv",
                panel_path=None, out_path=tmp_path / f"{name}.png"))
            assert np.argmax(drawn[0]) == np.argmax(np.abs(g.values))
            assert np.max(drawn[0]) == pytest.approx(1.0)

    def test_all_zero_grid(self, tmp_path):
        p = tmp_path / "zero.csv"
        rows = ["# v_S_m_per_s=1.0e8 v_I_m_per_s=1.0e8",
                "kappa_signal,kappa_idler,v"]
        for i in range(4):
            for j in range(4):
                rows.append(f"{float(i)},{float(j)},0.0")
        p.write_text("\n".join(rows) + "\n")
        out = tmp_path / "zero.png"
        drawn = render(FigureJob(grid_path=p, panel_path=None,
                                 out_path=out))
        assert out.exists()
        assert np.all(drawn[0] == 0)

    def test_mismatched_panel_axes(self, tmp_path):
        def write(path, scale):
            rows = ["# v_S_m_per_s=1.0e8 v_I_m_per_s=1.0e8",
                    "kappa_signal,kappa_idler,v"]
            for i in range(3):
                for j in range(3):
                    rows.append(f"{scale * i},{scale * j},1.0")
            path.write_text("\n".join(rows) + "\n")

        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write(a, 1.0)
        write(b, 2.0)
        with pytest.raises(ParseError, match="share axes"):
            render(FigureJob(grid_path=a, panel_path=b,
                             out_path=tmp_path / "x.png"))

    def test_svg_output(self, scenario_outputs, tmp_path):
        out = tmp_path / "fig2a.svg"
        render(FigureJob(grid_path=scenario_outputs["fig2a"] / "jsi.csv",
                         panel_path=None, out_path=out))
        assert out.read_text().lstrip().startswith("<?xml")


class TestCliEntry:
    def test_exit_zero(self, scenario_outputs, tmp_path, capsys):
        out = tmp_path / "a.png"
        code = render_main([str(scenario_outputs["fig2a"] / "jsi.csv"),
                            "--out", str(out)])
        assert code == 0
        assert out.exists()

    def test_parse_error_exit_two(self, tmp_path, capsys):
        p = tmp_path / "bad.csv"
        p.write_text("nope\n")
        code = render_main([str(p), "--out", str(tmp_path / "a.png")])
        assert code == 2
        assert "parse error" in capsys.readouterr().err
