import csv
import io

import pytest

from lemmaseq.cli import load_config, main
from lemmaseq.conllu import read_conllu

SAMPLE = (
    "# sent_id = 1\r\n"
    "# text = dogs ran\r\n"
    "1-2\tdogsran\t_\t_\t_\t_\t_\t_\t_\t_\r\n"
    "1\tdogs\tdog\tNOUN\tNNS\tNumber=Plur\t2\tnsubj\t_\t_\r\n"
    "2\tran\trun\tVERB\tVBD\tTense=Past\t0\troot\t_\tSpaceAfter=No\r\n"
    "\r\n"
    "1\tlives\tlife\tNOUN\tNNS\tNumber=Plur\t0\troot\t_\t_\r\n"
    "1.1\tx\t_\t_\t_\t_\t_\t_\t_\t_\r\n"
    "\r\n"
)


@pytest.fixture
def sample(tmp_path):
    p = tmp_path / "s.conllu"
    p.write_bytes(SAMPLE.encode("utf-8"))
    return p


def test_version(capsys):
    with pytest.raises(SystemExit) as e:
        main(["--version"])
    assert e.value.code == 0
    assert "model format 1" in capsys.readouterr().out


def test_error_line_and_exit_code(tmp_path, capsys):
    assert main(["stats", str(tmp_path / "missing.conllu")]) == 1
    err = capsys.readouterr().err.strip().splitlines()[-1]
    assert err.startswith("error=FileNotFoundError message=\"")
    assert main(["cache-build", str(tmp_path / "x")]) == 1
    assert "missing required setting --output" in capsys.readouterr().err


def test_stats_and_pool(sample, tmp_path, capsys):
    out = tmp_path / "rates.csv"
    assert main(["stats", str(sample), str(sample), "--pool", "-o", str(out), "-q"]) == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert len(rows) == 1 and rows[0]["treebank"] == "pooled" and rows[0]["tokens"] == "6"
    single = tmp_path / "one.csv"
    assert main(["stats", str(sample), "-o", str(single), "-q"]) == 0
    assert next(csv.DictReader(io.StringIO(single.read_text())))["token_rate"] == rows[0]["token_rate"]


def test_cache_predict_preserves_bytes_and_skips_decoding(sample, tmp_path, capsys):
    cache = tmp_path / "c.tsv"
    assert main(["cache-build", str(sample), "-o", str(cache), "-q"]) == 0
    blind = tmp_path / "blind.conllu"
    blind.write_bytes(SAMPLE.replace("\tdog\t", "\t_\t").replace("\trun\t", "\t_\t").encode("utf-8"))
    out = tmp_path / "pred.conllu"
    assert main(["predict", str(blind), "--cache", str(cache), "-o", str(out)]) == 0
    assert out.read_bytes() == SAMPLE.encode("utf-8")
    err = capsys.readouterr().err
    assert "cache_hits=3" in err and "decodes=0" in err


def test_train_predict_eval_with_config(sample, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# tiny\nembedding-dim=8\nhidden_dim=8\nepochs=2\nmin_frequency=1\nbeam-size=2\n", encoding="utf-8")
    assert load_config(cfg)["embedding_dim"] == "8"
    model, log = tmp_path / "m.bin", tmp_path / "ep.log"
    argv = ["train", "--config", str(cfg), "--train", str(sample), "--model", str(model), "--log", str(log), "--epochs", "3", "-q"]
    assert main(argv) == 0
    lines = log.read_text().splitlines()
    assert len(lines) == 3 and lines[0].startswith("epoch=1 ")  # flag beats config
    out, att = tmp_path / "p.conllu", tmp_path / "att"
    assert main(["predict", str(sample), "--model", str(model), "-o", str(out), "--attention-dir", str(att), "-q"]) == 0
    pred = read_conllu(out)
    assert [t.form for t in pred.tokens()] == ["dogs", "ran", "lives"]
    assert (att / "index.tsv").read_text().count("\n") == 4
    res = tmp_path / "r.csv"
    assert main(["eval", "--pred", str(out), str(sample), "--gold", str(sample), str(sample), "-o", str(res), "-q"]) == 0
    assert res.read_text().splitlines()[-1].startswith("macro:all,6,")


def test_bad_config_key(sample, tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("nonsense=1\n", encoding="utf-8")
    assert main(["stats", str(sample), "--config", str(cfg)]) == 1
    assert "unknown config key" in capsys.readouterr().err


def test_synth_augment_lexicon_eval(tmp_path):
    d = tmp_path / "toy"
    assert main(["synth", str(d), "-q"]) == 0
    assert {p.name for p in d.iterdir()} >= {"train.conllu", "test-blind.conllu", "lexicon.tsv", "freq.tsv"}
    assert all(t.lemma is None for t in read_conllu(d / "test-blind.conllu").tokens())
    out = tmp_path / "aug.tsv"
    argv = ["augment", "--train", str(d / "train.conllu"), "--autoencoder", "50", "--transducer", "5"]
    argv += ["--lexicon", str(d / "lexicon.tsv"), "--freq", str(d / "freq.tsv"), "-o", str(out), "-q"]
    assert main(argv) == 0
    assert len(out.read_text().splitlines()) > 2000 + 50
    res = tmp_path / "lex.csv"
    assert main(["lexicon-eval", "--lexicon", str(d / "lexicon.tsv"), str(d / "test.conllu"), "-o", str(res), "-q"]) == 0
    assert res.read_text().splitlines()[1].endswith(",1.0000,1.0000")
