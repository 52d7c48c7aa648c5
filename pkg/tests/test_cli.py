import json

import pytest

from lfads.cli import build_parser, main
from lfads.datasets import load_dataset
from lfads.run import RESOLVED_FILE
from lfads.trainer import CHECKPOINT_DIR, LAST_CHECKPOINT, METRICS_FILE, POSTERIOR_MEANS_FILE

QUIET = ["--log-level", "WARNING"]


def generate(path):
    return main(QUIET + [
        "generate-lorenz", "--out", str(path), "--trials", "50", "--bins", "8",
        "--neurons", "3", "--heldout", "2", "--fp-steps", "1", "--base-rate", "2.0",
    ])


def test_generate_lorenz(tmp_path):
    path = tmp_path / "lorenz.lfds"
    assert generate(path) == 0
    dataset = load_dataset(path)
    assert dataset.encod_data.shape == (50, 8, 3)
    assert dataset.recon_data.shape == (50, 9, 5)
    assert dataset.truth is not None


def test_train_and_eval(tmp_path, capsys):
    data = tmp_path / "lorenz.lfds"
    assert generate(data) == 0
    run_dir = tmp_path / "run"
    code = main(QUIET + [
        "train", "lorenz_tiny",
        "datamodule=file", f"datamodule.path={data}", "datamodule.batch_size=8",
        "trainer.max_epochs=1", "trainer.n_posterior_samples=1", "trainer.save_plot=false",
        "--run-dir", str(run_dir),
    ])
    assert code == 0
    assert capsys.readouterr().out.strip() == str(run_dir)
    for name in (RESOLVED_FILE, METRICS_FILE, POSTERIOR_MEANS_FILE):
        assert (run_dir / name).exists()
    assert (run_dir / CHECKPOINT_DIR / LAST_CHECKPOINT).exists()

    assert main(QUIET + ["eval", str(run_dir), "--data", str(data)]) == 0
    metrics = json.loads(capsys.readouterr().out)
    assert set(metrics) == {"co_bps", "fp_bps", "r2_heldin"}


def test_library_errors_exit_with_one(tmp_path, capsys):
    code = main(QUIET + ["train", "lorenz_tiny", "model.gen_dimm=3", "--run-dir", str(tmp_path / "run")])
    assert code == 1
    payload = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert payload["error"] == "UnknownOverridePathError"
    assert "model.gen_dimm" in payload["message"]


def test_missing_run_exits_with_one(tmp_path, capsys):
    assert main(QUIET + ["eval", str(tmp_path), "--data", str(tmp_path / "none.lfds")]) == 1
    assert "error" in json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_unexpected_errors_exit_with_one(tmp_path, capsys, monkeypatch):
    def broken(*args, **kwargs):
        raise RuntimeError("disk on fire")

    monkeypatch.setattr("lfads.cli.evaluate_run", broken)
    assert main(QUIET + ["eval", str(tmp_path), "--data", str(tmp_path / "none.lfds")]) == 1
    payload = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert payload == {"error": "RuntimeError", "message": "disk on fire"}


@pytest.mark.parametrize("argv", [
    [],
    ["train"],
    ["unknown-command"],
    ["search", "lorenz_tiny"],
    ["generate-lorenz", "--out", "x.lfds", "--trials", "many"],
])
def test_usage_errors_exit_with_two(argv):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 2


def test_parser_lists_commands():
    help_text = build_parser().format_help()
    for command in ("generate-lorenz", "train", "search", "pbt", "eval"):
        assert command in help_text
