import io
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "scripts"))

import plot_heatmaps

from gridquorum import alpha_tightness_sweep, sweep_2d, write_alpha_csv, write_scan_csv


def test_ratio_heatmap_from_usefulness_csv(tmp_path):
    csv_path = tmp_path / "ratio.csv"
    with open(csv_path, "w", encoding="utf-8") as fh:
        write_scan_csv(list(sweep_2d(range(4, 8), range(4, 8))), fh)
    out = tmp_path / "ratio.png"
    assert plot_heatmaps.main([str(csv_path), "--out", str(out)]) == 0
    assert out.stat().st_size > 1000


def test_increase_heatmap_from_alpha_csv(tmp_path):
    csv_path = tmp_path / "alpha.csv"
    rows = list(alpha_tightness_sweep([4, 5], [4, 5], mode="EXHAUSTIVE"))
    with open(csv_path, "w", encoding="utf-8") as fh:
        write_alpha_csv(rows, fh)
    out = tmp_path / "alpha.png"
    assert plot_heatmaps.main([str(csv_path), "--out", str(out)]) == 0
    assert out.stat().st_size > 1000


def test_unrecognized_header_rejected(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    import pytest

    with pytest.raises(SystemExit):
        plot_heatmaps.main([str(bad)])
