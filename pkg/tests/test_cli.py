import hashlib
import os

import numpy as np
import pytest

from hetbench.cli import SCHEMAS, ConfigError, build_config, read_manifest, run
from hetbench.cli import svg
from hetbench.embed import EmbeddingMatrix, format_embedding_tsv, write_embedding_binary
from hetbench.grid import load_mrc
from hetbench.model import RamachandranTable, format_pdb, format_ramachandran
from hetbench.simulate import read_star

from helpers import build_peptide


def write(path, text):
    path.write_text(text)
    return str(path)


def files(root):
    out = {}
    for dirpath, _, names in os.walk(root):
        for n in names:
            p = os.path.join(dirpath, n)
            with open(p, "rb") as fh:
                out[os.path.relpath(p, root)] = fh.read()
    return out


@pytest.fixture(scope="module")
def volumes(tmp_path_factory):
    """Four small two-blob maps shared by several tests."""
    d = tmp_path_factory.mktemp("vols")
    cfg = write(d / "gen.cfg", "mode = two_blob\nout = vols\nn_conformations = 4\nD = 16\n"
                               "pixel_size = 5\nresolution = 12\narm = 14\n")
    assert run(["gen-volumes", "--config", cfg, "--seed", "3"]) == 0
    return d / "vols"


# -- config -------------------------------------------------------------------

def test_config_defaults_file_and_overrides():
    cfg = build_config(SCHEMAS["simulate"], "volumes = v.tsv\nout = o\ncounts = 3, 4\n",
                       overrides={"snr": "0.5"}, check_paths=False)
    assert cfg["counts"] == (3, 4)
    assert cfg["snr"] == 0.5
    assert cfg["voltage"] == 300.0 and cfg["spherical_aberration"] == 2.7 and cfg["amplitude_contrast"] == 0.1
    assert cfg["t_bound"] == 20.0


@pytest.mark.parametrize("text, message", [
    ("out = o\nbogus = 1\n", "unknown key 'bogus'"),
    ("out = o\nvolumes = a\nvolumes = b\n", "already set on line 2"),
    ("out = o\nvolumes = a\ncounts = x\n", ":3:"),
    ("out = o\nvolumes = a\nno equals sign\n", ":3: expected 'key = value'"),
    ("volumes = a\n", "missing required key 'out'"),
])
def test_config_errors(text, message):
    with pytest.raises(ConfigError, match=message):
        build_config(SCHEMAS["simulate"], text, check_paths=False)


def test_config_checks_input_paths(tmp_path):
    with pytest.raises(ConfigError, match="does not exist"):
        build_config(SCHEMAS["simulate"], "out = o\nvolumes = missing.tsv\n", base_dir=str(tmp_path))


def test_config_families():
    cfg = build_config(SCHEMAS["eval-volumes"], "gt = g\nout = o\ncandidates.b = y\ncandidates.a = x\n",
                       check_paths=False)
    assert list(cfg.family("candidates")) == ["a", "b"]
    with pytest.raises(ConfigError):
        build_config(SCHEMAS["eval-volumes"], "gt = g\nout = o\nother.a = x\n", check_paths=False)


def test_config_choices():
    with pytest.raises(ConfigError, match="not one of"):
        build_config(SCHEMAS["eval-volumes"], "gt = g\nout = o\npairing = best\n", check_paths=False)


def test_print_config_lists_every_key(capsys):
    assert run(["simulate", "--print-config"]) == 0
    text = capsys.readouterr().out
    for f in SCHEMAS["simulate"].fields:
        assert f"\n{f.name} = " in text
    assert "voltage = 300.0" in text
    # the printout is itself a valid config once required keys are filled in
    body = text.replace("volumes = \n", "volumes = v\n").replace("out = \n", "out = o\n")
    build_config(SCHEMAS["simulate"], body, check_paths=False)


def test_unknown_override_exits_nonzero(capsys):
    assert run(["mask", "--set", "nope=1"]) == 1
    assert "unknown key" in capsys.readouterr().err


# -- run directory ------------------------------------------------------------

def test_manifest_lists_every_artifact_with_hash(volumes):
    man = read_manifest((volumes / "manifest.tsv").read_text())
    on_disk = files(volumes)
    on_disk.pop("manifest.tsv")
    assert set(man) == set(on_disk)
    for name, payload in on_disk.items():
        assert man[name] == (len(payload), hashlib.sha256(payload).hexdigest())


def test_no_temporary_files_left(volumes):
    assert not [n for n in os.listdir(volumes) if n.startswith(".") or n.endswith(".tmp")]


# -- gen-volumes --------------------------------------------------------------

def test_gen_volumes_manifest_rows_match_volume_count(volumes):
    rows = (volumes / "conformations.tsv").read_text().splitlines()
    mrcs = sorted(n for n in os.listdir(volumes) if n.endswith(".mrc"))
    assert rows[0] == "index\tfile\tsource\tparameter\tvalue"
    assert len(rows) - 1 == len(mrcs) == 4
    assert [r.split("\t")[1] for r in rows[1:]] == mrcs
    assert [float(r.split("\t")[4]) for r in rows[1:]] == [0.0, 90.0, 180.0, 270.0]
    v = load_mrc(str(volumes / mrcs[0]))
    assert v.D == 16 and v.pixel_size == 5.0


def test_gen_volumes_zero_conformations_fails(tmp_path, capsys):
    cfg = write(tmp_path / "g.cfg", "out = o\nn_conformations = 0\n")
    assert run(["gen-volumes", "--config", cfg]) == 1
    assert "n_conformations" in capsys.readouterr().err
    assert not (tmp_path / "o" / "manifest.tsv").exists()


def test_gen_volumes_dihedral_sweep_100_steps(tmp_path):
    pdb = write(tmp_path / "pep.pdb", format_pdb(build_peptide(8)))
    cfg = write(tmp_path / "g.cfg", f"mode = dihedral_sweep\npdb = {pdb}\nresidue = 4\nout = sweep\n"
                                    "n_conformations = 100\nstep_deg = 3.6\nD = 16\npixel_size = 2.0\n"
                                    "resolution = 8\n")
    assert run(["gen-volumes", "--config", cfg]) == 0
    rows = (tmp_path / "sweep" / "conformations.tsv").read_text().splitlines()[1:]
    assert len(rows) == 100
    assert float(rows[-1].split("\t")[4]) == pytest.approx(99 * 3.6)
    assert len([n for n in os.listdir(tmp_path / "sweep") if n.endswith(".mrc")]) == 100


def test_gen_volumes_linker_mode_is_seeded(tmp_path):
    pdb = write(tmp_path / "pep.pdb", format_pdb(build_peptide(10, phi=-65, psi=140)))
    rama = write(tmp_path / "rama.txt", format_ramachandran(RamachandranTable.uniform(12)))
    body = (f"mode = linker\npdb = {pdb}\nramachandran = {rama}\nlinker_residues = 5,6\n"
            "n_conformations = 3\nD = 24\npixel_size = 2.0\nresolution = 8\n")
    for out in ("a", "b"):
        cfg = write(tmp_path / f"{out}.cfg", body + f"out = {out}\n")
        assert run(["gen-volumes", "--config", cfg, "--seed", "5"]) == 0
    fa, fb = files(tmp_path / "a"), files(tmp_path / "b")
    assert fa == fb
    assert fa["vol_000.mrc"] != fa["vol_001.mrc"]


# -- simulate -----------------------------------------------------------------

def _simulate(tmp_path, volumes, out, threads=1, extra=""):
    cfg = write(tmp_path / f"{out}.cfg", f"volumes = {volumes}/conformations.tsv\nout = {out}\n"
                                         f"counts = 5,0,3,2\nsnr = 0.1\nt_bound = 1\n{extra}")
    assert run(["simulate", "--config", cfg, "--seed", "11", "--threads", str(threads)]) == 0
    return tmp_path / out


def test_simulate_outputs_and_label_propagation(tmp_path, volumes):
    out = _simulate(tmp_path, volumes, "s")
    names = set(os.listdir(out))
    assert {"particles.mrcs", "particles.star", "poses.tsv", "ctf.tsv", "labels.tsv", "summary.json",
            "config.txt", "manifest.tsv"} <= names
    labels = [int(x) for x in (out / "labels.tsv").read_text().split()[1:]]
    assert labels == [0] * 5 + [2] * 3 + [3] * 2
    meta = read_star((out / "particles.star").read_text())
    assert list(meta.labels) == labels
    assert {c.voltage for c in meta.ctfs} == {300.0}
    assert {c.spherical_aberration for c in meta.ctfs} == {2.7}
    assert {c.amplitude_contrast for c in meta.ctfs} == {0.1}
    assert load_mrc(str(out / "particles.mrcs")).data.shape == (10, 16, 16)


def test_simulate_is_byte_identical_across_runs_and_threads(tmp_path, volumes):
    a = files(_simulate(tmp_path, volumes, "a", threads=1))
    b = files(_simulate(tmp_path, volumes, "b", threads=1))
    c = files(_simulate(tmp_path, volumes, "c", threads=8))
    assert a == b == c


def test_simulate_rejects_bad_counts(tmp_path, volumes, capsys):
    cfg = write(tmp_path / "x.cfg", f"volumes = {volumes}/conformations.tsv\nout = x\ncounts = 1,2\n")
    assert run(["simulate", "--config", cfg]) == 1
    assert "counts" in capsys.readouterr().err


def test_simulate_uses_given_ctf_table(tmp_path, volumes):
    table = write(tmp_path / "ctf.tsv", "defocus_u\tdefocus_v\tastigmatism_angle\n15000\t14000\t10\n")
    out = _simulate(tmp_path, volumes, "t", extra=f"ctf_table = {table}\n")
    meta = read_star((out / "particles.star").read_text())
    assert {(c.defocus_u, c.defocus_v, c.astigmatism_angle) for c in meta.ctfs} == {(15000.0, 14000.0, 10.0)}


# -- mask / eval-volumes / align / plot ---------------------------------------

def test_mask_command(tmp_path, volumes):
    cfg = write(tmp_path / "m.cfg", f"volumes = {volumes}\nout = m\ndilation_px = 1\nsoft_width_px = 2\n")
    assert run(["mask", "--config", cfg]) == 0
    m = load_mrc(str(tmp_path / "m" / "mask.mrc")).data
    assert m.max() == 1.0 and m.min() == 0.0


def test_eval_volumes_identical_candidates(tmp_path, volumes):
    cfg = write(tmp_path / "e.cfg", f"gt = {volumes}/conformations.tsv\nout = e\n"
                                    f"candidates.same = {volumes}/conformations.tsv\n")
    assert run(["eval-volumes", "--config", cfg]) == 0
    row = (tmp_path / "e" / "summary.tsv").read_text().splitlines()[1].split("\t")
    assert row[:3] == ["same", "per_conformation", "4"]
    assert float(row[3]) == 0.5 and float(row[4]) == 0.0
    svg_text = (tmp_path / "e" / "mean_fsc.svg").read_text()
    assert svg_text.startswith("<svg") and "same" in svg_text


def test_eval_volumes_per_image_needs_pairs(tmp_path, volumes, capsys):
    cfg = write(tmp_path / "e.cfg", f"gt = {volumes}\nout = e\npairing = per_image\ncandidates.x = {volumes}\n")
    assert run(["eval-volumes", "--config", cfg]) == 1
    err = capsys.readouterr().err
    assert "pairs" in err and "labels.tsv" in err


def test_eval_volumes_per_image_with_star_pairs(tmp_path, volumes):
    sim = _simulate(tmp_path, volumes, "s")
    # candidates: one map per image, here the true map of each image
    labels = [int(x) for x in (sim / "labels.tsv").read_text().split()[1:]]
    cand = tmp_path / "cand"
    cand.mkdir()
    for i, lab in enumerate(labels):
        (cand / f"c{i:03d}.mrc").write_bytes((volumes / f"vol_{lab:03d}.mrc").read_bytes())
    cfg = write(tmp_path / "e.cfg", f"gt = {volumes}\nout = e\npairing = per_image\ncandidates.x = {cand}\n"
                                    f"pairs = {sim}/particles.star\n")
    assert run(["eval-volumes", "--config", cfg]) == 0
    fsc_rows = (tmp_path / "e" / "fsc_x.tsv").read_text().splitlines()[1:]
    assert [int(r.split("\t")[0]) for r in fsc_rows] == labels
    assert all(float(r.split("\t")[2]) == 0.5 for r in fsc_rows)


def test_eval_volumes_sample_max_matrix_and_plot(tmp_path, volumes):
    cfg = write(tmp_path / "e.cfg", f"gt = {volumes}\nout = e\npairing = sample_max\ncandidates.x = {volumes}\n")
    assert run(["eval-volumes", "--config", cfg]) == 0
    m = np.loadtxt(tmp_path / "e" / "matrix_x.tsv")
    assert m.shape == (4, 4)
    assert np.allclose(np.diag(m), 0.5)
    pcfg = write(tmp_path / "p.cfg", f"table = e/matrix_x.tsv\nkind = heatmap\nout = p\nname = heat.svg\n")
    assert run(["plot", "--config", pcfg]) == 0
    assert (tmp_path / "p" / "heat.svg").read_text().count("<rect") >= 16
    pcfg = write(tmp_path / "q.cfg", "table = e/curves_x.tsv\nkind = fsc\nout = q\n")
    assert run(["plot", "--config", pcfg]) == 0


def test_align_command_recovers_rotation(tmp_path, volumes):
    from hetbench.fsc.align import _axis_angle
    from hetbench.grid import rotate_volume, save_mrc
    ref = load_mrc(str(volumes / "vol_001.mrc"))
    moving = rotate_volume(ref, _axis_angle([0, 0, 1], 30.0), order=3)
    save_mrc(str(tmp_path / "moving.mrc"), moving)
    cfg = write(tmp_path / "a.cfg", f"ref = {volumes}/vol_001.mrc\nmoving = moving.mrc\nout = a\n")
    assert run(["align", "--config", cfg]) == 0
    import json
    info = json.loads((tmp_path / "a" / "align.json").read_text())
    assert info["auc_after"] > info["auc_before"]


# -- eval-embeddings ----------------------------------------------------------

def _embedding_run(tmp_path, threads=1, out="ee", extra=""):
    rng = np.random.default_rng(0)
    labels = np.repeat(np.arange(5), 40)
    gt = np.c_[np.sin(labels), np.cos(labels)]
    noisy = gt + 0.3 * rng.standard_normal(gt.shape)
    write(tmp_path / "labels.tsv", "label\n" + "".join(f"{l}\n" for l in labels))
    write(tmp_path / "gt.tsv", format_embedding_tsv(EmbeddingMatrix(gt)))
    (tmp_path / "noisy.bin").write_bytes(write_embedding_binary(EmbeddingMatrix(noisy)))
    write(tmp_path / "noise.tsv", format_embedding_tsv(EmbeddingMatrix(rng.standard_normal((200, 3)))))
    cfg = write(tmp_path / f"{out}.cfg", f"labels = labels.tsv\ngt = gt.tsv\nout = {out}\n"
                                         "embeddings.gt = gt.tsv\nembeddings.noisy = noisy.bin\n"
                                         f"embeddings.random = noise.tsv\nsubset_size = 200\n{extra}")
    assert run(["eval-embeddings", "--config", cfg, "--seed", "2", "--threads", str(threads)]) == 0
    return tmp_path / out


def _table(path):
    lines = path.read_text().splitlines()
    head = lines[0].split("\t")
    return [dict(zip(head, l.split("\t"))) for l in lines[1:]]


def test_eval_embeddings_gt_vs_gt(tmp_path):
    out = _embedding_run(tmp_path)
    pmn = [r for r in _table(out / "pmn.tsv") if r["method"] == "gt"]
    assert pmn and all(float(r["mean"]) == 100.0 for r in pmn)
    ii = {r["method"]: r for r in _table(out / "imbalance.tsv")}
    # identical spaces: each k-neighbourhood is matched exactly, Delta = (k + 1) / n
    floor = np.mean([(k + 1) / 200 for k in (1, 3, 10, 30)])
    assert float(ii["gt"]["delta_method_to_gt"]) == pytest.approx(floor, abs=1e-12)
    assert float(ii["gt"]["delta_gt_to_method"]) == pytest.approx(floor, abs=1e-12)
    assert float(ii["random"]["delta_method_to_gt"]) > 0.5
    cl = {r["method"]: r for r in _table(out / "clustering.tsv")}
    assert set(cl) == {"gt", "noisy", "random"}
    assert float(cl["gt"]["ari"]) == 1.0 and float(cl["gt"]["ami"]) == pytest.approx(1.0, abs=1e-9)
    assert cl["gt"]["k"] == "5"
    assert (out / "scatter_gt.svg").exists() and not (out / "scatter_random.svg").exists()
    reps = _table(out / "representatives_gt.tsv")
    assert [int(r["label"]) for r in reps] == [0, 1, 2, 3, 4]


def test_eval_embeddings_deterministic_across_threads(tmp_path):
    a = files(_embedding_run(tmp_path, 1, "a"))
    b = files(_embedding_run(tmp_path, 8, "b"))
    assert a == b


def test_eval_embeddings_malformed_row_reports_line(tmp_path, capsys):
    write(tmp_path / "labels.tsv", "label\n0\n1\n1\n")
    write(tmp_path / "gt.tsv", "z0\tz1\n0\t1\n1\t0\nfoo\t1\n")
    cfg = write(tmp_path / "c.cfg", "labels = labels.tsv\ngt = gt.tsv\nout = o\nembeddings.m = gt.tsv\n")
    assert run(["eval-embeddings", "--config", cfg]) == 1
    assert "line 4" in capsys.readouterr().err


def test_eval_embeddings_labels_from_star(tmp_path, volumes):
    sim = _simulate(tmp_path, volumes, "s")
    labels = np.array([int(x) for x in (sim / "labels.tsv").read_text().split()[1:]])
    write(tmp_path / "z.tsv", format_embedding_tsv(EmbeddingMatrix(np.c_[labels, labels ** 2].astype(float))))
    cfg = write(tmp_path / "c.cfg", f"labels = {sim}/particles.star\ngt = z.tsv\nout = o\nembeddings.m = z.tsv\n"
                                    "subset_size = 10\nk_list = 1,3\nn_splits = 2\n")
    assert run(["eval-embeddings", "--config", cfg]) == 0
    assert _table(tmp_path / "o" / "clustering.tsv")[0]["ari"] == "1.0"


# -- svg ----------------------------------------------------------------------

def test_svg_is_deterministic_and_well_formed():
    import xml.etree.ElementTree as ET
    x = np.linspace(0, 0.5, 17)
    a = svg.line_plot([("m", x, np.cos(x), 0.1 * np.ones_like(x))], "t", "x", "y")
    assert a == svg.line_plot([("m", x, np.cos(x), 0.1 * np.ones_like(x))], "t", "x", "y")
    for text in (a, svg.scatter_plot(np.c_[x, x], np.arange(17) % 3), svg.heatmap(np.eye(3))):
        root = ET.fromstring(text)
        assert root.tag.endswith("svg")
