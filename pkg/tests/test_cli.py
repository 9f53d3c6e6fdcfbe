import numpy as np
import pytest

from bri.cli import main
from bri.geometry import apply_motion, random_backbone, random_motion
from bri.ingest import ChainRecord, read_coords, write_coords, write_manifest

from conftest import PROTOCOL

SUBCOMMANDS = ["clean", "invariant", "reconstruct", "compare", "dedup", "bid", "bib", "heatmap", "perturb", "stats"]


@pytest.fixture
def work(tmp_path):
    """A cleaned corpus with one planted rigid duplicate."""
    rng = np.random.default_rng(5)
    chains = [ChainRecord.from_backbone(f"X{k}", "A", np.round(random_backbone(m, rng), 3)) for k, m in enumerate((12, 12, 15))]
    copy = np.round(apply_motion(random_motion(1), chains[0].backbone), 3)
    chains.append(ChainRecord.from_backbone("Y0", "A", copy))
    for c in chains:
        write_coords(c, tmp_path / f"{c.entry_id}_A.csv")
    write_manifest(chains, tmp_path / "manifest.tsv")
    return tmp_path


def test_version(capsys):
    assert main(["--version"]) == 0
    assert "format" in capsys.readouterr().out


@pytest.mark.parametrize("cmd", SUBCOMMANDS)
def test_help(cmd, capsys):
    assert main([cmd, "--help"]) == 0
    assert "usage" in capsys.readouterr().out


def test_unknown_flag(capsys):
    assert main(["stats", "--bogus"]) == 1
    assert "usage" in capsys.readouterr().err
    assert main([]) == 1


def test_missing_file_is_data_error(tmp_path, capsys):
    assert main(["invariant", str(tmp_path / "nope.csv")]) == 2
    assert capsys.readouterr().err.startswith("bri:")


def test_clean_fixtures(tmp_path):
    out = tmp_path / "work"
    assert main(["clean", "--in", str(PROTOCOL), "--out", str(out), "--report", str(tmp_path / "rej.tsv")]) == 0
    assert (out / "manifest.tsv").read_text().splitlines()[1:] == ["0OKK\tA\t20"]
    rows = [line.split("\t") for line in (tmp_path / "rej.tsv").read_text().splitlines()[1:]]
    assert sorted(int(r[2]) for r in rows) == [1, 2, 3, 4, 5, 6]


def test_dedup_finds_planted_pair(work):
    report = work / "pairs.tsv"
    assert main(["dedup", "--manifest", str(work / "manifest.tsv"), "--threshold", "0.01", "--report", str(report)]) == 0
    lines = report.read_text().splitlines()
    assert len(lines) == 2
    assert lines[1].split("\t")[:4] == ["X0", "A", "Y0", "A"]


def test_outputs_independent_of_threads(work):
    outs = []
    for t in ("1", "3"):
        rep, st = work / f"p{t}.tsv", work / f"s{t}.tsv"
        assert main(["dedup", "--manifest", str(work / "manifest.tsv"), "--report", str(rep), "--stats", str(st), "--threads", t]) == 0
        outs.append((rep.read_bytes(), st.read_bytes()))
    assert outs[0] == outs[1]


def test_invariant_reconstruct_roundtrip(work):
    src = work / "X0_A.csv"
    assert main(["invariant", str(src), "--out", str(work / "b.csv")]) == 0
    assert main(["reconstruct", str(work / "b.csv"), "--out", str(work / "r_A.csv")]) == 0
    rec = read_coords(work / "r_A.csv")
    assert rec.sequence == ["UNK"] * 12
    for kind in ("trin", "mirror", "hat", "brain"):
        assert main(["invariant", str(src), "--kind", kind, "--out", str(work / f"{kind}.csv")]) == 0


def test_compare(work, capsys):
    assert main(["compare", str(work / "X0_A.csv"), str(work / "Y0_A.csv"), "--hat", "--mirror"]) == 0
    out = dict(line.split("\t") for line in capsys.readouterr().out.splitlines())
    assert float(out["linf_bri"]) < 0.01
    assert main(["compare", str(work / "X0_A.csv"), str(work / "X2_A.csv")]) == 2


def test_diagrams_and_stats(work):
    src = str(work / "X1_A.csv")
    assert main(["bid", src, "--svg", str(work / "d.svg"), "--csv", str(work / "d.csv")]) == 0
    assert main(["bid", src]) == 1
    assert main(["stats", "--manifest", str(work / "manifest.tsv"), "--out", str(work / "st.tsv")]) == 0
    assert main(["bib", src, "--svg", str(work / "b.svg"), "--ranges", str(work / "st.tsv")]) == 0
    assert main(["heatmap", "--manifest", str(work / "manifest.tsv"), "--x", "xA", "--y", "yA", "--bins", "16", "--out", str(work / "h.png")]) == 0
    assert (work / "h.png").read_bytes()[:4] == b"\x89PNG"
    assert main(["heatmap", "--x", "xA", "--y", "yA", "--out", str(work / "h.png")]) == 1


def test_perturb_is_seeded(work):
    args = ["perturb", str(work / "X1_A.csv"), "--eps", "0.01,0.02", "--trials", "4", "--seed", "9"]
    assert main(args + ["--out", str(work / "a.csv")]) == 0
    assert main(args + ["--out", str(work / "b.csv")]) == 0
    assert (work / "a.csv").read_bytes() == (work / "b.csv").read_bytes()
    assert main(["perturb", str(work / "X1_A.csv"), "--eps", "x:y"]) == 1
