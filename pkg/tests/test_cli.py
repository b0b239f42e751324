from __future__ import annotations

import json
import subprocess
import sys

import pytest

from conftest import DATA_DIR
from songstruct.cli import main
from songstruct.formats import load_manifest


def test_run_end_to_end(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(DATA_DIR)
    monkeypatch.setenv("SONGSTRUCT_OUTPUT_DIR", str(tmp_path))
    code = main(["run", "--config", "pipeline.yaml", "--input", "inputs.jsonl"])
    out = capsys.readouterr().out
    assert code == 0
    assert "processed 3 songs: 3 ok, 0 rejected, 0 failed" in out
    assert (tmp_path / "manifest.jsonl").exists()
    golden = (DATA_DIR / "golden" / "s1.txt").read_text(encoding="utf-8")
    assert (tmp_path / "s1.txt").read_text(encoding="utf-8") == golden


def test_run_reports_failures_without_failing(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(DATA_DIR)
    config = tmp_path / "cfg.yaml"
    config.write_text(
        "worker_count: 1\n"
        f"output_dir: {tmp_path / 'out'}\n"
        "backends:\n"
        "  separate: {kind: mock, seed: 7}\n"
        "  structure: {kind: mock, seed: 7, fail_songs: [s2]}\n"
        "  transcribe: {kind: mock, seed: 7}\n"
        "  align: {kind: mock, seed: 7}\n",
        encoding="utf-8",
    )
    code = main(["run", "--config", str(config), "--input", "inputs.jsonl"])
    out = capsys.readouterr().out
    assert code == 0
    assert "2 ok, 0 rejected, 1 failed" in out
    assert "s2: failed" in out


def test_run_bad_config_exits_one(tmp_path, monkeypatch, capsys):
    config = tmp_path / "cfg.yaml"
    config.write_text("mode: sideways\n", encoding="utf-8")
    code = main(["run", "--config", str(config), "--input", "nope.jsonl"])
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_eval_text_and_json_output(tmp_path, capsys):
    json_path = tmp_path / "report.json"
    code = main(
        [
            "eval",
            "--hyp",
            str(DATA_DIR / "golden"),
            "--gold",
            str(DATA_DIR / "gold"),
            "--json",
            str(json_path),
        ]
    )
    out = capsys.readouterr().out
    assert code == 0
    assert "DER" in out and "WER" in out
    data = json.loads(json_path.read_text(encoding="utf-8"))
    assert data["der"]["der"] == 0.0
    assert data["wer"]["wer"] == 0.0


def test_eval_missing_gold_exits_two(tmp_path, capsys):
    (tmp_path / "empty-gold").mkdir()
    code = main(
        ["eval", "--hyp", str(DATA_DIR / "golden"), "--gold", str(tmp_path / "empty-gold")]
    )
    err = capsys.readouterr().err
    assert code == 2
    assert "no gold annotation" in err


def test_parse_and_serialize_are_inverse(tmp_path, capsys):
    lyrics = DATA_DIR / "golden" / "s1.txt"
    assert main(["parse", str(lyrics)]) == 0
    parsed = capsys.readouterr().out
    data = json.loads(parsed)
    assert data["song_id"] == "s1"
    assert data["duration_s"] == 103.3

    gold_file = tmp_path / "s1.json"
    gold_file.write_text(parsed, encoding="utf-8")
    assert main(["serialize", str(gold_file)]) == 0
    assert capsys.readouterr().out == lyrics.read_text(encoding="utf-8")


def test_parse_rejects_empty_file(tmp_path, capsys):
    empty = tmp_path / "empty.txt"
    empty.write_text("\n", encoding="utf-8")
    assert main(["parse", str(empty)]) == 1
    assert "no segments" in capsys.readouterr().err


def test_parse_error_exits_one(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("[what][0:2]x\n", encoding="utf-8")
    assert main(["parse", str(bad)]) == 1
    err = capsys.readouterr().err
    assert "line 1" in err


def test_wer_command(tmp_path, capsys):
    ref = tmp_path / "ref.txt"
    hyp = tmp_path / "hyp.txt"
    ref.write_text("a b c d", encoding="utf-8")
    hyp.write_text("a x c", encoding="utf-8")
    assert main(["wer", "--ref", str(ref), "--hyp", str(hyp)]) == 0
    out = capsys.readouterr().out
    assert out == "wer 0.500000 (S=1 D=1 I=0 N=4)\n"


def test_wer_language_hints(tmp_path, capsys):
    ref = tmp_path / "ref.txt"
    hyp = tmp_path / "hyp.txt"
    ref.write_text("我爱你", encoding="utf-8")
    hyp.write_text("我 爱 你", encoding="utf-8")
    assert main(["wer", "--ref", str(ref), "--hyp", str(hyp), "--hint", "zh"]) == 0
    assert "wer 0.000000" in capsys.readouterr().out
    assert main(["wer", "--ref", str(ref), "--hyp", str(hyp), "--hint", "en"]) == 0
    assert "wer 0.000000" not in capsys.readouterr().out


def test_der_command(capsys):
    code = main(
        [
            "der",
            "--ref",
            str(DATA_DIR / "micro" / "gold" / "a.json"),
            "--hyp",
            str(DATA_DIR / "micro" / "hyp" / "a.txt"),
        ]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert out.startswith("der 0.100000 (mismatch 2.000s / 20.000s")


def test_der_duration_override(capsys):
    code = main(
        [
            "der",
            "--ref",
            str(DATA_DIR / "micro" / "gold" / "a.json"),
            "--hyp",
            str(DATA_DIR / "micro" / "hyp" / "a.txt"),
            "--duration",
            "10.0",
        ]
    )
    assert code == 0
    # Only the first 10s are scored now, and they agree.
    assert "der 0.000000" in capsys.readouterr().out


def test_fix_command_fixed_and_rejected(tmp_path, capsys):
    ref = tmp_path / "ref.txt"
    hyp = tmp_path / "hyp.txt"
    ref.write_text("hello world again", encoding="utf-8")
    hyp.write_text("hello word again now", encoding="utf-8")
    assert main(["fix", "--ref", str(ref), "--hyp", str(hyp)]) == 0
    captured = capsys.readouterr()
    assert captured.out == "hello world again now\n"

    ref.write_text("entirely different words", encoding="utf-8")
    assert main(["fix", "--ref", str(ref), "--hyp", str(hyp)]) == 0
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "rejected: wer" in captured.err


def test_filter_command(tmp_path, capsys):
    manifest = DATA_DIR / "golden" / "manifest.jsonl"
    code = main(["filter", "--manifest", str(manifest), "--max-wer", "0.1"])
    captured = capsys.readouterr()
    assert code == 0
    kept = load_manifest(captured.out)
    assert [e.song_id for e in kept] == ["s1", "s3"]
    assert "kept 2 dropped 1" in captured.err


def test_usage_errors_exit_one(capsys):
    assert main(["wer", "--ref", "only-one-side.txt"]) == 1
    assert main(["no-such-command"]) == 1
    assert main([]) == 1


def test_missing_file_exits_one(tmp_path, capsys):
    assert main(["parse", str(tmp_path / "absent.txt")]) == 1
    assert "error:" in capsys.readouterr().err


def test_console_script_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "songstruct.cli", "--help"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "songstruct" in proc.stdout


@pytest.mark.parametrize("command", ["run", "eval", "parse", "serialize",
                                     "wer", "der", "fix", "filter"])
def test_every_subcommand_has_help(command, capsys):
    with pytest.raises(SystemExit) as exc:
        main([command, "--help"])
    assert exc.value.code == 0
    assert capsys.readouterr().out