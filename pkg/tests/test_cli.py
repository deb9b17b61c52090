"""Command-line surface: subcommand output, exit codes, and a small end-to-end run."""

from __future__ import annotations

import json

import pytest

from relcomp.cli import main
from relcomp.quality import catalog_to_csv
from relcomp.synthetic import synth_surgery

from test_api_service import make_catalog


class TestGrid:
    def test_av1_grid_has_39_rows(self, capsys):
        assert main(["grid", "--codec", "av1"]) == 0
        out = capsys.readouterr().out.strip().splitlines()
        assert out[0] == "codec,crf,width,height"
        assert len(out) == 40
        assert out[1] == "av1,27,1024,768"
        assert out[-1] == "av1,63,640,480"

    def test_json_output(self, capsys):
        assert main(["grid", "--codec", "h265", "--json"]) == 0
        rows = json.loads(capsys.readouterr().out)
        assert len(rows) == 39
        assert {r["crf"] for r in rows} == set(range(23, 48, 2))

    def test_unknown_codec_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["grid", "--codec", "vp9"])
        assert exc.value.code == 2


class TestRank:
    def test_rank_orders_measurements(self, tmp_path, capsys):
        measurements = tmp_path / "m.csv"
        measurements.write_text(
            "codec,crf,width,height,mean_ssim,bitrate_kbps\n"
            "h264,47,640,480,0.80,100\n"
            "h264,23,1024,768,0.95,900\n"
            "h264,35,800,600,0.90,300\n",
            encoding="utf-8",
        )
        assert main(["rank", str(measurements)]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0].startswith("setup,codec")
        assert lines[1].startswith("1,h264,23")
        assert lines[3].startswith("3,h264,47")

    def test_missing_input_is_input_error(self, tmp_path):
        assert main(["rank", str(tmp_path / "nope.csv")]) == 3

    def test_bad_header_is_catalog_error(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n1,2\n", encoding="utf-8")
        assert main(["rank", str(bad)]) == 5


class TestThresholds:
    def test_thresholds_and_optima(self, tmp_path, capsys):
        catalog_path = tmp_path / "catalog.csv"
        catalog_path.write_text(catalog_to_csv(make_catalog(78)), encoding="utf-8")
        results = tmp_path / "results.csv"
        results.write_text(
            "participant,category,result_setup\n"
            "dr-a,HR,30\ndr-b,HR,36\ndr-c,HR,37\ndr-d,HR,45\n",
            encoding="utf-8",
        )
        assert main(["thresholds", str(results), "--catalog", str(catalog_path), "--json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["HR"]["threshold_setup"] == 36
        # linear catalog: cheapest qualifying H264 entry is the threshold setup
        assert doc["HR"]["optimal"]["h264"]["setup"] == 36


@pytest.mark.usefixtures("backend")
class TestCompress:
    def test_missing_annotations_is_input_error(self, tmp_path):
        video = tmp_path / "v.y4m"
        video.write_bytes(b"YUV4MPEG2")
        assert main(["compress", str(video), str(tmp_path / "missing.csv")]) == 3

    def test_small_end_to_end_merge_policy(self, tmp_path, capsys):
        clip, annotations = synth_surgery(
            tmp_path, width=160, height=120, fps=12.0, duration_s=4.0, seed=5
        )
        out = tmp_path / "archive"
        code = main(
            [
                "compress", str(clip), str(annotations),
                "--codec", "h264",
                "--idle-policy", "merge-preceding",
                "--out", str(out),
                "--no-baseline",
                "--json",
            ]
        )
        assert code == 0
        manifest = json.loads(capsys.readouterr().out)
        assert manifest["dropped_frames"] == 0
        assert manifest["policy"] == "merge-preceding"
        assert (out / "manifest.json").is_file()
        assert (out / "report.json").is_file()
        total = sum(
            seg["frames"][1] - seg["frames"][0] for seg in manifest["segments"]
        )
        assert total == manifest["total_frames"]
