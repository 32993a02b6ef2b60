"""CSV result records and SVG curve output."""

import re
import xml.etree.ElementTree as ET

import pytest

from core.errors import ParameterError, SmxError
from modules.report import CSV_COLUMNS, ResultRecord, emit_svg, read_csv, render_csv, write_csv


def sample_records():
    params = {"omega": 5.0, "alpha": 10.0, "mdp": "chain_5.yaml"}
    return [
        ResultRecord("plan", params, "iterations", 241, wall_time=0.5),
        ResultRecord("plan", params, "fixed_point_gap", 1 / 3, bound=3.06854, passed=True, wall_time=0.5),
        ResultRecord("plan", params, "converged", False),
    ]


class TestCsv:

    def test_header_only(self):
        assert render_csv([]) == ",".join(CSV_COLUMNS) + "\n"

    def test_row_layout(self):
        lines = render_csv(sample_records()).splitlines()
        assert lines[0] == "command,params,metric,value,std_error,bound,passed,wall_time"
        assert lines[1] == "plan,alpha=10;mdp=chain_5.yaml;omega=5,iterations,241,,,,0.500000"
        assert lines[2] == "plan,alpha=10;mdp=chain_5.yaml;omega=5,fixed_point_gap,0.333333333333333,,3.06854,true,0.500000"
        assert lines[3].endswith(",converged,false,,,,0.000000")

    def test_list_params_are_quoted(self):
        record = ResultRecord("contract", {"inject_pair": [[50, 1], [5, 1]]}, "violations", 1)
        line = render_csv([record]).splitlines()[1]
        assert line.startswith('contract,"inject_pair=[[50,1],[5,1]]",violations,1')

    def test_file_round_trip(self, tmp_path):
        path = tmp_path / "out" / "results.csv"
        write_csv(sample_records(), path)
        loaded = read_csv(path)
        assert [r.metric for r in loaded] == ["iterations", "fixed_point_gap", "converged"]
        assert loaded[0].value == 241
        assert loaded[1].value == pytest.approx(1 / 3, rel=1e-14)
        assert loaded[1].passed is True
        assert loaded[2].value is False
        assert loaded[2].bound is None
        assert loaded[0].params == {"alpha": 10, "mdp": "chain_5.yaml", "omega": 5}

    def test_unwritable_path(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        with pytest.raises(SmxError, match="cannot write results"):
            write_csv(sample_records(), blocker / "results.csv")


class TestSvg:

    def series(self):
        return [("max_target", [1, 2, 3], [0.5, 0.4, 0.3]), ("sm2_target", [1, 2, 3], [0.2, 0.1, 0.05])]

    def test_parses_with_legend_in_order(self, tmp_path):
        path = tmp_path / "bias.svg"
        emit_svg(self.series(), path, title="Estimation bias", xlabel="step", ylabel="bias")
        root = ET.parse(path).getroot()
        assert root.tag.endswith("svg")
        text = path.read_text(encoding="utf-8")
        assert text.index("max_target") < text.index("sm2_target")
        assert "Estimation bias" in text

    def test_deterministic(self, tmp_path):
        first, second = tmp_path / "a.svg", tmp_path / "b.svg"
        emit_svg(self.series(), first)
        emit_svg(self.series(), second)
        assert first.read_bytes() == second.read_bytes()

    def test_identity_line_spans_plot_area(self, tmp_path):
        path = tmp_path / "identity.svg"
        xs = [0.0, 0.25, 0.5, 0.75, 1.0]
        emit_svg([("y=x", xs, xs)], path)
        groups = {g.get("id"): g for g in ET.parse(path).getroot().iter() if g.get("id")}

        def points(group):
            paths = [p.get("d") for p in group.iter() if p.tag.endswith("path") and p.get("d")]
            values = [float(v) for v in re.findall(r"-?\d+(?:\.\d+)?", paths[0])] if paths else []
            return list(zip(values[0::2], values[1::2]))

        def spans(pts):
            return max(x for x, _ in pts) - min(x for x, _ in pts), max(y for _, y in pts) - min(y for _, y in pts)

        area = points(groups["patch_2"])
        left, right = min(x for x, _ in area), max(x for x, _ in area)
        top, bottom = min(y for _, y in area), max(y for _, y in area)
        curves = [pts for name, g in groups.items() if name.startswith("line2d") for pts in [points(g)] if pts]
        # grid lines and the legend handle are axis-parallel; the data line is the only diagonal
        line = max(curves, key=lambda pts: min(spans(pts)))
        assert line[0] == pytest.approx((left, bottom), abs=0.05)
        assert line[-1] == pytest.approx((right, top), abs=0.05)

    def test_log_scale(self, tmp_path):
        path = tmp_path / "residual.svg"
        emit_svg([("sm2(10,5)", [1, 2, 3], [1.0, 1e-4, 1e-8])], path, logy=True)
        ET.parse(path)

    @pytest.mark.parametrize("series", [
        [],
        [("a", [1, 2], [1.0])],
        [("a", [1], [1.0])],
        [("a", [2, 2], [1.0, 2.0])],
    ])
    def test_invalid_series(self, tmp_path, series):
        with pytest.raises(ParameterError):
            emit_svg(series, tmp_path / "x.svg")
