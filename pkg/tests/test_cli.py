import json
import random

import pytest

from samrec.cli import main
from samrec.graph import ContextGraph


@pytest.fixture
def dataset(tmp_path):
    rng = random.Random(5)
    rows = ["userId,movieId,rating,timestamp"]
    for user in range(1, 16):
        for movie in rng.sample(range(1, 9), 5):
            rows.append(f"{user},{movie},{rng.choice([0.5, 1.5, 2.5, 3.0, 4.0, 5.0])},{user * 100 + movie}")
    (tmp_path / "ratings.csv").write_text("\n".join(rows) + "\n")
    movies = ["movieId,title,genres"] + [f"{m},Movie {m} (2000),{'Drama|Crime' if m % 2 else 'Comedy'}" for m in range(1, 9)]
    (tmp_path / "movies.csv").write_text("\n".join(movies) + "\n")
    (tmp_path / "tags.csv").write_text("userId,movieId,tag,timestamp\n1,1,noir,5\n2,1,Noir,6\n3,2,heist,7\n")
    return tmp_path


def ingest(dataset, *extra):
    return main([
        "ingest", "--ratings", str(dataset / "ratings.csv"), "--tags", str(dataset / "tags.csv"),
        "--movies", str(dataset / "movies.csv"), "--seed", "42", "--n-movies", "6", "--out", str(dataset / "graph.jsonl"),
        *extra,
    ])


def test_ingest_writes_snapshot_and_test_csv(dataset, capsys):
    assert ingest(dataset) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["movies"] == 6
    assert (dataset / "graph.test.csv").read_text().startswith("user,movie,weight\n")
    g = ContextGraph.restore(dataset / "graph.jsonl")
    assert g.interaction_count == summary["train"]
    assert len(g.root_assets()) == 6
    assert g.keyword("drama") is not None


def test_recommend_roots(dataset, capsys):
    ingest(dataset)
    capsys.readouterr()
    assert main(["recommend", "--graph", str(dataset / "graph.jsonl"), "--user", "u1", "--level", "roots", "--k", "3", "--include-consumed"]) == 0
    entries = json.loads(capsys.readouterr().out)
    assert len(entries) == 3
    scores = [e["score"] for e in entries]
    assert scores == sorted(scores, reverse=True)


def test_recommend_widgets_needs_root(dataset, capsys):
    ingest(dataset)
    root = ContextGraph.restore(dataset / "graph.jsonl").root_assets()[0]
    assert main(["recommend", "--graph", str(dataset / "graph.jsonl"), "--user", "u1", "--level", "widgets"]) == 1
    assert main(["recommend", "--graph", str(dataset / "graph.jsonl"), "--user", "u1", "--level", "widgets", "--root", root]) == 0


def test_evaluate_emits_both_blocks(dataset, capsys):
    ingest(dataset)
    capsys.readouterr()
    out = dataset / "report.json"
    assert main(["evaluate", "--graph", str(dataset / "graph.jsonl"), "--test", str(dataset / "graph.test.csv"), "--json", str(out)]) == 0
    printed = json.loads(capsys.readouterr().out)
    assert set(printed) == {"sam", "knn"}
    assert json.loads(out.read_text()) == printed
    for block in printed.values():
        assert block["rmse"] >= block["mae"]
        assert block["mpe_percent"] == block["mae"] / 2 * 100


def test_bench_in_process(dataset, capsys):
    ingest(dataset)
    capsys.readouterr()
    csv_path = dataset / "lat.csv"
    code = main([
        "bench", "--graph", str(dataset / "graph.jsonl"), "--test", str(dataset / "graph.test.csv"),
        "--requests", "12", "--warmup", "2", "--csv", str(csv_path),
    ])
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["sam"]["count"] == summary["knn"]["count"] == 12
    assert len(csv_path.read_text().splitlines()) == 1 + 24


def test_env_override(dataset, capsys, monkeypatch):
    ingest(dataset)
    capsys.readouterr()
    monkeypatch.setenv("SAMREC_GRAPH", str(dataset / "graph.jsonl"))
    assert main(["recommend", "--user", "u2", "--k", "1", "--include-consumed"]) == 0
    assert len(json.loads(capsys.readouterr().out)) == 1


def test_usage_errors_exit_1(capsys):
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["recommend", "--graph", "g.jsonl", "--user", "u", "--k", "many"])
    assert exc.value.code == 1
    assert "usage" in capsys.readouterr().err


def test_missing_file_exits_2(tmp_path, capsys):
    assert main(["recommend", "--graph", str(tmp_path / "absent.jsonl"), "--user", "u"]) == 2
    assert "absent.jsonl" in capsys.readouterr().err


def test_bad_data_exits_3(dataset, tmp_path, capsys):
    (tmp_path / "bad.jsonl").write_text('{"record": "wat"}\n')
    assert main(["recommend", "--graph", str(tmp_path / "bad.jsonl"), "--user", "u"]) == 3
    (dataset / "ratings.csv").write_text("userId,movieId,rating,timestamp\n1,1,9.0,1\n")
    assert ingest(dataset) == 3
    assert "ratings.csv:2" in capsys.readouterr().err


def test_unknown_user_exits_3(dataset, capsys):
    ingest(dataset)
    assert main(["recommend", "--graph", str(dataset / "graph.jsonl"), "--user", "nobody"]) == 3


def test_serve_flushes_snapshot_on_sigterm(dataset):
    import re
    import signal
    import subprocess
    import sys
    import urllib.request

    ingest(dataset)
    snap = dataset / "flushed.jsonl"
    proc = subprocess.Popen(
        [sys.executable, "-m", "samrec.cli", "serve", "--graph", str(dataset / "graph.jsonl"), "--port", "0", "--snapshot", str(snap)],
        stderr=subprocess.PIPE, text=True,
    )
    try:
        line = proc.stderr.readline()
        url = re.search(r"http://\S+", line).group(0)
        with urllib.request.urlopen(url + "/health", timeout=10) as resp:
            assert json.load(resp)["status"] == "ok"
    finally:
        proc.send_signal(signal.SIGTERM)
        assert proc.wait(timeout=10) == 0
    assert ContextGraph.restore(snap) == ContextGraph.restore(dataset / "graph.jsonl")
