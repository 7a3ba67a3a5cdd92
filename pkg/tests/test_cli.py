import json

import pytest

from hometwin.cli import main
from hometwin.config import PipelineConfig
from hometwin.core import MS_PER_MINUTE, PostureLabel, parse_epoch
from hometwin.layout import lite_layout, save_layout
from hometwin.simulate import OccupyRoom, ScenarioScript, save_scenario
from hometwin.simulate.scripts import restroom_visit

EPOCH = parse_epoch("2024-03-04T10:00:00")


@pytest.fixture(scope="module")
def workdir(tmp_path_factory, small_models):
    """A scenario + layout on disk plus the shared small models."""
    _, model_dir = small_models
    root = tmp_path_factory.mktemp("cli")
    layout = lite_layout()
    save_layout(layout, root / "layout.json")
    script = ScenarioScript(
        EPOCH,
        40,
        [
            OccupyRoom(
                EPOCH + 3 * MS_PER_MINUTE, EPOCH + 20 * MS_PER_MINUTE, "dining", PostureLabel.SIT
            ),
            restroom_visit(EPOCH, 22, 27),
        ],
    )
    save_scenario(script, root / "scenario.json")
    return root, model_dir


def test_print_config_lists_defaults(capsys):
    assert main(["print-config"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["k_rest"] == PipelineConfig().k_rest
    assert set(data) == set(PipelineConfig().to_dict())


def test_unknown_config_key_exits_2(capsys):
    assert main(["print-config", "--set", "not_a_key=1"]) == 2


def test_simulate_writes_packets_and_truth(workdir):
    root, _ = workdir
    out = root / "sim"
    code = main(
        [
            "simulate",
            "--scenario", str(root / "scenario.json"),
            "--layout", str(root / "layout.json"),
            "--seed", "7",
            "--out", str(out),
        ]
    )
    assert code == 0
    assert (out / "packets.bin").stat().st_size > 0
    assert (out / "truth.tsv").read_text().startswith("record\t")


def test_simulate_deterministic_bytes(workdir):
    root, _ = workdir
    outs = []
    for name in ("sim_a", "sim_b"):
        out = root / name
        assert main(
            [
                "simulate",
                "--scenario", str(root / "scenario.json"),
                "--layout", str(root / "layout.json"),
                "--seed", "7",
                "--out", str(out),
            ]
        ) == 0
        outs.append((out / "packets.bin").read_bytes())
    assert outs[0] == outs[1]


def test_missing_scenario_file_exits_3(workdir):
    root, model_dir = workdir
    code = main(
        [
            "simulate",
            "--scenario", str(root / "nope.json"),
            "--layout", str(root / "layout.json"),
            "--out", str(root / "x"),
        ]
    )
    assert code == 3


def test_run_produces_timeline_and_report(workdir):
    root, model_dir = workdir
    out = root / "run"
    code = main(
        [
            "run",
            "--scenario", str(root / "scenario.json"),
            "--layout", str(root / "layout.json"),
            "--models", str(model_dir),
            "--seed", "7",
            "--out", str(out),
            "--plot-data",
        ]
    )
    assert code == 0
    timeline = (out / "timeline.csv").read_text().splitlines()
    assert timeline[0] == "minute_start,label,winning_room,score"
    assert len(timeline) == 41
    report = json.loads((out / "report.json").read_text())
    assert "sleep" in report and "environment" in report
    assert (out / "report.txt").exists()
    assert (out / "environment.csv").exists()
    assert (out / "activity_series.csv").exists()


def test_run_from_packet_file(workdir):
    root, model_dir = workdir
    sim_out = root / "sim"
    out = root / "run_packets"
    code = main(
        [
            "run",
            "--packets", str(sim_out / "packets.bin"),
            "--truth", str(sim_out / "truth.tsv"),
            "--layout", str(root / "layout.json"),
            "--models", str(model_dir),
            "--out", str(out),
        ]
    )
    assert code == 0
    assert (out / "timeline.csv").exists()


def test_missing_model_exits_4(workdir, tmp_path):
    root, _ = workdir
    code = main(
        [
            "run",
            "--scenario", str(root / "scenario.json"),
            "--layout", str(root / "layout.json"),
            "--models", str(tmp_path / "nope"),
            "--out", str(root / "y"),
        ]
    )
    assert code == 4


def test_evaluate_prints_accuracy(workdir, capsys):
    root, model_dir = workdir
    code = main(
        [
            "evaluate",
            "--scenario", str(root / "scenario.json"),
            "--layout", str(root / "layout.json"),
            "--models", str(model_dir),
            "--seed", "7",
            "--out", str(root / "eval"),
        ]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "minute-level accuracy" in out
    assert "posture accuracy 4x4" in out


def test_ingest_dumps_csv_and_snapshot(workdir):
    root, _ = workdir
    sim_out = root / "sim"
    snapshot = root / "store.bin"
    csv = root / "dump.csv"
    code = main(
        [
            "ingest",
            "--packets", str(sim_out / "packets.bin"),
            "--snapshot", str(snapshot),
            "--csv", str(csv),
        ]
    )
    assert code == 0
    lines = csv.read_text().splitlines()
    assert lines[0] == "timestamp,sensor_id,kind,value"
    assert len(lines) > 100
    from hometwin.ingestion.store import RecordStore

    store = RecordStore.load(snapshot)
    assert store.record_count() > 0


def test_builtin_scenario_runs(workdir, tmp_path):
    _, model_dir = workdir
    out = tmp_path / "builtin"
    code = main(
        [
            "simulate",
            "--scenario", "builtin:sunlight",
            "--seed", "3",
            "--out", str(out),
        ]
    )
    assert code == 0
    assert (out / "packets.bin").exists()
