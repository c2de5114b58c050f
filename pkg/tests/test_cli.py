import numpy as np
import pytest

from deeploop.cli import build_parser, run
from deeploop.db import load_db
from deeploop.evaluation import read_pr_csv
from deeploop.geometry import Homography, warp_image
from deeploop.image import save_pgm
from deeploop.net import load_model
from deeploop.synthetic import corpus


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    imgs = root / "imgs"
    imgs.mkdir()
    queries = root / "queries"
    queries.mkdir()
    for i, im in enumerate(corpus(6, seed=21)):
        save_pgm(im, imgs / f"{i:04d}.pgm")
        save_pgm(warp_image(im, Homography.translation(1, 0)), queries / f"{i:04d}.pgm")
    data = root / "d.clcd"
    model = root / "m.clcm"
    assert run(["gen-data", "--images", str(imgs), "--out", str(data), "--count", "4", "--seed", "3"]) == 0
    assert run(["train", "--data", str(data), "--model-out", str(model), "--epochs", "1", "--batch", "2"]) == 0
    return root, imgs, queries, data, model


def test_gen_data_and_train_reproducible(workspace, tmp_path):
    root, imgs, _, data, model = workspace
    d2, m2 = tmp_path / "d.clcd", tmp_path / "m.clcm"
    assert run(["gen-data", "--images", str(imgs), "--out", str(d2), "--count", "4", "--seed", "3"]) == 0
    assert d2.read_bytes() == data.read_bytes()
    assert run(["train", "--data", str(d2), "--model-out", str(m2), "--epochs", "1", "--batch", "2"]) == 0
    assert m2.read_bytes() == model.read_bytes()
    log = (root / "m.clcm.loss.csv").read_text().splitlines()
    assert log[0] == "epoch,mean_loss" and len(log) == 2


def test_extract_query_evaluate(workspace, capsys):
    root, imgs, queries, _, model = workspace
    db_path = root / "db.clcb"
    assert run(["extract", "--model", str(model), "--images", str(imgs), "--db-out", str(db_path)]) == 0
    db = load_db(db_path)
    assert len(db) == 6 and db.dim == 1064 and db.ids.tolist() == list(range(6))
    capsys.readouterr()
    assert run(["query", "--db", str(db_path), "--model", str(model), "--image", str(imgs / "0002.pgm"),
                "--k", "3"]) == 0
    lines = capsys.readouterr().out.split()
    assert len(lines) == 3 and lines[0].startswith("2,")
    pr = root / "pr.csv"
    assert run(["evaluate", "--db", str(db_path), "--model", str(model), "--queries", str(queries),
                "--tolerance", "0", "--out", str(pr)]) == 0
    assert len(read_pr_csv(pr)) >= 1
    gt = root / "gt.csv"
    gt.write_text("query_idx,db_idx\n" + "".join(f"{i},{i}\n" for i in range(6)))
    pr2 = root / "pr2.csv"
    assert run(["evaluate", "--db", str(db_path), "--model", str(model), "--queries", str(queries),
                "--gt", str(gt), "--out", str(pr2)]) == 0
    assert pr2.read_bytes() == pr.read_bytes()


def test_loop(workspace, tmp_path, capsys):
    _, imgs, _, _, model = workspace
    log = tmp_path / "events.csv"
    assert run(["loop", "--model", str(model), "--images", str(imgs), "--stride", "1", "--exclude", "1",
                "--min-db", "1", "--log", str(log)]) == 0
    assert "closures over 6 frames" in capsys.readouterr().out
    assert log.read_text().splitlines()[0] == "frame_index,keyframe_flag,match_id,score,event_kind"


def test_bench(workspace, capsys):
    _, imgs, _, _, model = workspace
    assert run(["bench", "--model", str(model), "--images", str(imgs), "--db-size", "50", "--reps", "5"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "phase,mean_ms,std_ms"
    assert out[1].startswith("extract,") and out[2].startswith("query,") and out[3].startswith("# reference")


def test_grad_check(capsys):
    assert run(["grad-check", "--seed", "1", "--trials", "1"]) == 0
    assert "max relative error" in capsys.readouterr().out


def test_usage_errors(capsys):
    assert run([]) == 1
    assert run(["frobnicate"]) == 1
    assert run(["grad-check", "--bogus"]) == 1
    assert run(["train", "--epochs", "x", "--data", "a", "--model-out", "b"]) == 1
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 4 and all(e.startswith("deeploop") for e in err)


def test_data_errors(tmp_path, capsys):
    assert run(["extract", "--model", str(tmp_path / "none.clcm"), "--images", str(tmp_path),
                "--db-out", str(tmp_path / "x")]) == 2
    bad = tmp_path / "bad.clcm"
    bad.write_bytes(b"NOPE" + bytes(20))
    assert run(["query", "--db", str(bad), "--model", str(bad), "--image", "x.pgm"]) == 2
    empty = tmp_path / "empty"
    empty.mkdir()
    assert run(["gen-data", "--images", str(empty), "--out", str(tmp_path / "o")]) == 2


def test_help_lists_defaults():
    parser = build_parser()
    sub = parser._subparsers._group_actions[0].choices
    assert set(sub) == {"gen-data", "train", "extract", "query", "evaluate", "loop", "bench", "grad-check"}
    train_help = sub["train"].format_help()
    for flag, default in [("--epochs", "42"), ("--lr", "0.0009"), ("--momentum", "0.9"), ("--wd", "0.0005")]:
        assert flag in train_help and f"default: {default}" in train_help
    loop_help = sub["loop"].format_help()
    assert "default: 7" in loop_help and "(chosen" in loop_help
    for p in sub.values():
        text = " ".join(p.format_help().split())
        optional = [a for a in p._actions if a.option_strings and not a.required and a.dest != "help"]
        assert text.count("(default:") >= len(optional)
