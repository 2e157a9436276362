import csv
import io

import pytest

from cute.cli import main
from cute.experiments import FIXED_COLUMNS

NETWORK = """\
sources: 2
hops: 3
buffer_capacity: 20
credits: 6
duration: 400
warmup: 40
"""


@pytest.fixture
def net_file(tmp_path):
    path = tmp_path / "net.yaml"
    path.write_text(NETWORK)
    return path


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_run_to_stdout(net_file, capsys):
    assert main(["run", str(net_file)]) == 0
    table = rows(capsys.readouterr().out)
    assert table[0] == FIXED_COLUMNS + ["t1", "t2"]
    assert len(table) == 2


def test_run_trace(net_file, tmp_path):
    trace, out = tmp_path / "trace.csv", tmp_path / "out.csv"
    assert main(["run", str(net_file), "--trace", str(trace),
                 "--out", str(out), "--seed", "4"]) == 0
    table = rows(trace.read_text())
    assert table[0] == ["time", "kind", "connection", "ws", "seq"]
    assert any(r[1] == "send" for r in table[1:])
    assert rows(out.read_text())[1][5] == "4"


def test_sweep_file(tmp_path):
    path = tmp_path / "sweep.yaml"
    path.write_text("base:\n" + "".join(f"  {l}\n" for l in
                                        NETWORK.splitlines())
                    + "sweep:\n  variable: sources\n  values: [1, 3]\n"
                    + "arms:\n  - {control: true, caching: false}\n")
    out = tmp_path / "out.csv"
    assert main(["sweep", str(path), "--replications", "2",
                 "--out", str(out)]) == 0
    table = rows(out.read_text())
    assert len(table) == 1 + 2 * 3
    assert table[0][-1] == "t3"


def test_analyze(capsys):
    assert main(["analyze", "--service-times", "1", "1", "1", "1",
                 "--c-max", "5"]) == 0
    table = rows(capsys.readouterr().out)
    assert table[0] == ["C", "throughput", "response", "power"]
    assert table[3] == ["3", "0.5", "6", "0.0833333"]


@pytest.mark.parametrize("argv, expected", [
    (["pipesize", "--hops", "4"], "12\n"),
    (["pipesize", "--min-delay", "600", "--bottleneck", "50"], "12\n"),
])
def test_pipesize(argv, expected, capsys):
    assert main(argv) == 0
    assert capsys.readouterr().out == expected


@pytest.mark.parametrize("argv", [
    ["pipesize"],
    ["pipesize", "--hops", "0"],
    ["pipesize", "--min-delay", "1", "--bottleneck", "2"],
    ["analyze", "--service-times", "1", "--c-max", "3"],
    ["run", "/nonexistent.yaml"],
    ["sweep"],
])
def test_errors_exit_one(argv, capsys):
    assert main(argv) == 1
    assert capsys.readouterr().err.startswith("cute: error:")


def test_config_error_reported(tmp_path, capsys):
    path = tmp_path / "bad.yaml"
    path.write_text(NETWORK + "bufer: 3\n")
    assert main(["run", str(path)]) == 1
    assert "unknown key 'bufer'" in capsys.readouterr().err


def test_wrong_document_kind(tmp_path, net_file, capsys):
    assert main(["sweep", str(net_file)]) == 1
    assert "cute run" in capsys.readouterr().err


def test_trace_only_for_run(capsys):
    assert main(["pipesize", "--hops", "2", "--trace", "t.csv"]) == 2
    assert "--trace" in capsys.readouterr().err
