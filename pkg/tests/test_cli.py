import json

import pytest

from herdflock.cli import artifact_dir, main, read_oval_classes
from herdflock.gf2e import GF2e, field
from herdflock.qclan import QClan

from conftest import run_cli


@pytest.fixture
def cli(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("HERDFLOCK_ARTIFACTS", str(tmp_path))

    def run(*args):
        code = main(list(args))
        return code, capsys.readouterr().out.strip()

    return run


def test_field_info(cli):
    code, out = cli("field-info", "--q", "64")
    info = json.loads(out)
    assert code == 0 and info["trace_one_smallest"] == "8"
    code, out = cli("field-info", "--q", "64", "--field-poly", "43")
    assert json.loads(out)["poly"] in (0x43, "43", "0x43")


def test_make_family_and_checks(cli, tmp_path):
    for fam in ("classical", "subiaco", "adelaide"):
        code, out = cli("make-family", "--q", "16", "--family", fam, "--auto")
        assert code == 0 and out.endswith("qclan=PASS")
        path = tmp_path / "q16" / "families" / f"{fam}.qclan"
        assert cli("verify-qclan", "--q", "16", str(path)) == (0, "PASS")
        code, out = cli("flock-check", "--q", "16", str(path))
        assert code == 0 and out == f"PASS linear={int(fam == 'classical')}"
    bad = tmp_path / "bad.qclan"
    F = field(16)
    bad.write_text(QClan(F, [0] * 16, [0] * 16, [0] * 16).to_text())
    assert cli("verify-qclan", "--q", "16", str(bad)) == (1, "FAIL")


def test_adelaide_needs_even_extension(cli, capsys):
    code = main(["make-family", "--q", "8", "--family", "adelaide"])
    assert code == 2 and "error" in capsys.readouterr().err


def test_stabilizer(cli):
    code, out = cli("stabilizer", "--q", "64", "--family", "subiaco")
    assert code == 0 and out.startswith("order=")
    code, out = cli("stabilizer", "--q", "8", "--opoly", "0,1,0,0,0,0,0")
    # D(t^2) at q=8: the pointed conic
    assert (code, out) == (0, "order=168 orbits=[1, 8]")


def test_small_pipeline(cli, tmp_path):
    assert cli("oval-classes", "--q", "8", "--hyperovals", "census")[0] == 0
    assert cli("build-store", "--q", "8", "--workers", "1")[0] == 0
    assert cli("store-query", "--q", "8") == (0, "10")
    assert cli("store-query", "--q", "8", "--opoly", "0,1,0,0,0,0,0") == (0, "present")
    assert cli("store-query", "--q", "8", "--opoly", "0,2,0,0,0,0,0") == (1, "absent")
    code, out = cli("herd-search", "--q", "8", "--workers", "1")
    assert (code, out.split(" -> ")[0]) == (0, "stage-1=14 stage-2=3")
    d = tmp_path / "q8"
    man = json.loads((d / "manifest-herd-search-k1.json").read_text())
    assert man["counters"]["stage2"] == 3 and man["kappa"] == 1
    assert set(man["inputs"]) == {str(d / "oval_classes.txt"), str(d / "store.bin")}
    lines = (d / "survivors-k1.txt").read_text().splitlines()
    assert len(lines) == 14 and sum("stage=2" in ln for ln in lines) == 3
    # resuming reads the range checkpoints and reproduces the survivors
    assert cli("herd-search", "--q", "8", "--workers", "1", "--resume")[0] == 0
    assert (d / "survivors-k1.txt").read_text().splitlines() == lines
    code, out = cli("fingerprint", "--q", "8", "classical")
    assert code == 0 and sum(json.loads(out).values()) == 9
    assert cli("herd-isomorphic", "--q", "8", "classical", "subiaco") == (1, "not isomorphic")
    assert len(read_oval_classes(d / "oval_classes.txt", field(8))) == 2


def test_missing_inputs(cli, capsys):
    assert main(["build-store", "--q", "16", "--workers", "1"]) == 2
    assert "oval-classes first" in capsys.readouterr().err


def test_gq_check(cli, tmp_path):
    assert cli("gq-check", "--q", "2") == (0, "PASS points=45 lines=27")
    out = tmp_path / "t2.txt"
    assert cli("gq-check", "--q", "4", "--kind", "t2", "--export", str(out)) == (0, "PASS points=85 lines=85")
    assert out.read_text().startswith("points 85")


def test_census(cli):
    assert cli("census", "--q", "8") == (0, "1 hyperovals up to equivalence, stabilizer orders [1512]")


def test_non_conway_directory(tmp_path):
    assert artifact_dir(GF2e(6, 0x43), str(tmp_path)).name == "q64-p43"
    assert artifact_dir(field(64), str(tmp_path)).name == "q64"


def test_entry_point_subprocess(tmp_path):
    proc, _ = run_cli(tmp_path, "field-info", "--q", "8")
    assert proc.returncode == 0 and json.loads(proc.stdout)["q"] == 8
    proc, _ = run_cli(tmp_path, "field-info")
    assert proc.returncode != 0


def test_alternate_polynomial_q8(cli, tmp_path):
    # x^3 + x^2 + 1 instead of the Conway polynomial; counts must not change
    common = ("--q", "8", "--field-poly", "d", "--workers", "1")
    assert cli("oval-classes", *common, "--hyperovals", "census")[0] == 0
    assert cli("build-store", *common)[0] == 0
    assert cli("store-query", *common) == (0, "10")
    code, out = cli("herd-search", *common)
    assert out.split(" -> ")[0] == "stage-1=14 stage-2=3"
    assert (tmp_path / "q8-pd" / "store.bin").exists()


def test_alternate_polynomial_q64_classes(cli, tmp_path):
    code, out = cli("oval-classes", "--q", "64", "--field-poly", "43", "--hyperovals", "known")
    assert code == 0 and out.startswith("19 classes")
    man = json.loads((tmp_path / "q64-p43" / "manifest-oval-classes.json").read_text())
    assert man["counters"]["store_size_predicted"] == 17297346
