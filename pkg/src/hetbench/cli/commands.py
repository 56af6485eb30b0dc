"""Subcommand schemas and implementations.

Every command takes a validated :class:`RunConfig` and the thread count and
writes its artifacts into the run directory named by ``out``. The thread
count never changes an output byte.
"""
from __future__ import annotations

import json
import os

import numpy as np

from ..embed import (
    EmbeddingError,
    EmbeddingMatrix,
    clustering_scores,
    format_embedding_tsv,
    gt_embedding,
    information_imbalance,
    kmeans_labels,
    pmn_curve,
    read_embedding_binary,
    read_embedding_tsv,
    read_labels,
)
from ..fsc import FscError, align_volumes, auc_fsc, fsc, fsc_table, select_per_conformation, zero_pad
from ..grid import GridError, MaskVolume, Volume, generate_mask, load_mrc
from ..model import (
    DihedralSpec,
    ModelError,
    dihedral_sweep,
    parse_pdb,
    read_ramachandran,
    sample_linker,
    synthesize_density,
    two_blob_series,
)
from ..simulate import (
    CtfParams,
    ParticleMetadata,
    read_ctf_table,
    read_star,
    simulate_dataset,
    write_star,
)
from ..simulate.tables import format_ctf_table, format_labels, format_pose_table
from .config import ConfigError, Field, RunConfig, Schema
from .rundir import RunDir
from . import svg

CONFIG_NAME = "config.txt"
CTF_POOL_STREAM = 41
LINKER_STREAM = 43


def _f(name, kind, default=None, help="", **kw):
    return Field(name, kind, default, help, **kw)


OUT = _f("out", "path", help="run directory for all outputs", required=True)
SEED = _f("seed", "int", 0, "random seed")
THREADS = _f("threads", "int", 1, "worker threads (never changes outputs)")

SCHEMAS = {
    "gen-volumes": Schema("gen-volumes", (
        _f("mode", "str", "two_blob", "how conformations are generated",
           choices=("two_blob", "dihedral_sweep", "linker")),
        OUT, SEED, THREADS,
        _f("n_conformations", "int", 20, "number of conformations"),
        _f("D", "int", 32, "box size in voxels"),
        _f("pixel_size", "float", 5.0, "Angstrom per voxel"),
        _f("resolution", "float", 12.0, "map resolution in Angstrom (Gaussian sigma = 0.225 * resolution)"),
        _f("density_method", "str", "real", "Gaussian evaluation", choices=("real", "fourier")),
        _f("center", "bool", True, "shift every model by the centre of mass of the first one"),
        _f("arm", "float", 14.0, "two_blob: distance of the moving blob from the fixed one (Angstrom)"),
        _f("blob_atoms", "int", 4, "two_blob: atoms in the moving blob"),
        _f("fixed_atoms", "int", 1, "two_blob: atoms in the fixed blob"),
        _f("blob_radius", "float", 0.0, "two_blob: radius of each blob's atom cloud (Angstrom)"),
        _f("pdb", "path", help="dihedral_sweep/linker: input PDB file", must_exist=True),
        _f("chain", "str", "A", "dihedral_sweep/linker: chain id"),
        _f("residue", "int", None, "dihedral_sweep: residue number of the rotated bond"),
        _f("dihedral", "str", "psi", "dihedral_sweep: backbone torsion", choices=("phi", "psi")),
        _f("step_deg", "float", 3.6, "dihedral_sweep: angle increment per conformation"),
        _f("linker_residues", "ints", None, "linker: residue numbers to resample"),
        _f("ramachandran", "path", None, "linker: (phi, psi) probability table", must_exist=True),
        _f("clash_cutoff", "float", 2.0, "linker: minimum heavy-atom distance (Angstrom)"),
        _f("max_attempts", "int", 10000, "linker: rejection budget per conformation"),
    ), stochastic=True),
    "simulate": Schema("simulate", (
        _f("volumes", "path", help="conformations.tsv, a directory of .mrc files or one .mrc",
           required=True, must_exist=True),
        OUT, SEED, THREADS,
        _f("counts", "ints", (100,), "images per volume (one value applies to all)"),
        _f("snr", "float", 0.01, "signal variance / noise variance over the whole stack"),
        _f("clean", "bool", False, "skip noise (snr is then ignored)"),
        _f("t_bound", "float", 20.0, "in-plane shifts are uniform in [-t_bound, t_bound] pixels"),
        _f("oversample", "int", 3, "Fourier padding factor for projection"),
        _f("ctf_table", "path", None, "TSV of CTF parameters to draw from without replacement",
           must_exist=True),
        _f("defocus_min", "float", 10000.0, "generated pool: smallest defocus (Angstrom)"),
        _f("defocus_max", "float", 25000.0, "generated pool: largest defocus (Angstrom)"),
        _f("astigmatism_max", "float", 500.0, "generated pool: largest defocus_u - defocus_v"),
        _f("ctf_pool_size", "int", 1000, "generated pool: number of distinct CTFs"),
        _f("voltage", "float", 300.0, "kV"),
        _f("spherical_aberration", "float", 2.7, "mm"),
        _f("amplitude_contrast", "float", 0.1, "amplitude contrast ratio"),
    ), stochastic=True),
    "mask": Schema("mask", (
        _f("volumes", "path", help="volumes whose union is masked", required=True, must_exist=True),
        OUT, THREADS,
        _f("threshold", "float", None, "binarization level (default half the maximum)"),
        _f("dilation_px", "int", 8, "dilation in voxels"),
        _f("soft_width_px", "int", 5, "raised-cosine edge width in voxels"),
    )),
    "eval-volumes": Schema("eval-volumes", (
        _f("gt", "path", help="ground-truth volumes", required=True, must_exist=True),
        OUT, THREADS,
        _f("pairing", "str", "per_conformation", "how candidates meet ground truths",
           choices=("per_conformation", "per_image", "sample_max")),
        _f("pairs", "path", None, "labels TSV or STAR giving each candidate's ground truth",
           must_exist=True),
        _f("mask", "path", None, "mask .mrc applied to both maps", must_exist=True),
        _f("zero_pad", "int", None, "zero-pad all maps to this box size first"),
        _f("align", "bool", False, "rotate each candidate onto its ground truth first"),
        _f("align_step", "float", 15.0, "coarse alignment grid spacing (degrees)"),
    ), families=(Field("candidates", "path", help="candidate volumes of one method", must_exist=True),)),
    "eval-embeddings": Schema("eval-embeddings", (
        _f("labels", "path", help="ground-truth labels, TSV or STAR", required=True, must_exist=True),
        OUT, SEED, THREADS,
        _f("gt", "path", None, "ground-truth embedding (TSV or binary)", must_exist=True),
        _f("gt_kind", "str", "file", "how the ground-truth embedding is obtained",
           choices=("file", "circular_angle", "voxel_intensity")),
        _f("conformations", "path", None, "conformations.tsv for gt_kind circular_angle/voxel_intensity",
           must_exist=True),
        _f("n_structures", "int", None, "distinct structures (default: distinct labels)"),
        _f("n_splits", "int", 5, "pMN subsets"),
        _f("k_list", "ints", (1, 3, 10, 30), "information imbalance neighbourhood sizes"),
        _f("subset_size", "int", 2000, "information imbalance subset"),
        _f("clusters", "int", None, "k-means clusters (default n_structures)"),
    ), families=(
        Field("embeddings", "path", help="latent embedding of one method", must_exist=True),
        Field("coords", "path", help="precomputed 2-D coordinates of one method for the scatter plot",
              must_exist=True),
    ), stochastic=True),
    "align": Schema("align", (
        _f("ref", "path", help="reference map", required=True, must_exist=True),
        _f("moving", "path", help="map to rotate", required=True, must_exist=True),
        OUT, THREADS,
        _f("coarse_step", "float", 15.0, "coarse grid spacing (degrees)"),
        _f("min_step", "float", 1.0, "refinement stops below this step (degrees)"),
    )),
    "plot": Schema("plot", (
        _f("table", "path", help="TSV produced by another command", required=True, must_exist=True),
        OUT, THREADS,
        _f("kind", "str", "fsc", "what the table holds", choices=("fsc", "pmn", "heatmap")),
        _f("title", "str", "", "plot title"),
        _f("name", "str", "plot.svg", "output file name"),
    )),
}


# -- shared I/O ----------------------------------------------------------------

def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def read_conformations(path: str) -> list[dict]:
    """Rows of a conformations manifest; ``file`` resolved against its folder."""
    lines = [l for l in _read(path).splitlines() if l.strip()]
    if not lines:
        raise ConfigError(f"{path}: empty manifest")
    head = lines[0].split("\t")
    if "file" not in head:
        raise ConfigError(f"{path}: manifest needs a 'file' column")
    rows = []
    for n, line in enumerate(lines[1:], 2):
        parts = line.split("\t")
        if len(parts) != len(head):
            raise ConfigError(f"{path}:{n}: {len(parts)} fields, header has {len(head)}")
        row = dict(zip(head, parts))
        row["file"] = os.path.join(os.path.dirname(path), row["file"])
        rows.append(row)
    return rows


def volume_paths(path: str) -> list[str]:
    if os.path.isdir(path):
        files = sorted(f for f in os.listdir(path) if f.endswith(".mrc"))
        if not files:
            raise ConfigError(f"{path}: no .mrc files")
        return [os.path.join(path, f) for f in files]
    if path.endswith(".tsv"):
        return [r["file"] for r in read_conformations(path)]
    return [path]


def load_volumes(path: str) -> list[Volume]:
    out = []
    for p in volume_paths(path):
        v = load_mrc(p)
        if not isinstance(v, Volume):
            raise ConfigError(f"{p}: expected a volume, found an image stack")
        out.append(v)
    return out


def load_labels(path: str) -> np.ndarray:
    text = _read(path)
    if path.endswith(".star"):
        meta = read_star(text)
        if meta.labels is None:
            raise ConfigError(f"{path}: STAR file has no _rlnClassNumber column")
        return meta.labels
    return read_labels(text)


def load_embedding(path: str) -> EmbeddingMatrix:
    if path.endswith(".tsv") or path.endswith(".txt"):
        return read_embedding_tsv(_read(path))
    with open(path, "rb") as fh:
        return read_embedding_binary(fh.read())


def _start(cfg: RunConfig) -> RunDir:
    run = RunDir(cfg.path("out"))
    run.write_text(CONFIG_NAME, cfg.render(exclude=("threads", "out")))
    return run


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# -- gen-volumes ---------------------------------------------------------------

def _models(cfg: RunConfig):
    mode, n = cfg["mode"], cfg["n_conformations"]
    if n < 1:
        raise ConfigError("n_conformations must be at least 1")
    if mode == "two_blob":
        models, angles = two_blob_series(n, n_atoms=cfg["blob_atoms"], fixed_atoms=cfg["fixed_atoms"],
                                         blob_radius=cfg["blob_radius"], arm=cfg["arm"], seed=cfg["seed"])
        return models, [("angle", float(a)) for a in angles]
    if cfg.get("pdb") is None:
        raise ConfigError(f"mode {mode} needs a pdb file")
    base = parse_pdb(_read(cfg.path("pdb")), source=os.path.basename(cfg["pdb"]))
    if mode == "dihedral_sweep":
        if cfg.get("residue") is None:
            raise ConfigError("dihedral_sweep needs 'residue'")
        spec = DihedralSpec(cfg["chain"], cfg["residue"], cfg["dihedral"])
        models = dihedral_sweep(base, spec, n, cfg["step_deg"])
        return models, [("delta_deg", i * cfg["step_deg"]) for i in range(n)]
    if not cfg.get("linker_residues") or cfg.get("ramachandran") is None:
        raise ConfigError("linker mode needs 'linker_residues' and 'ramachandran'")
    table = read_ramachandran(_read(cfg.path("ramachandran")))
    models = [sample_linker(base, cfg["chain"], cfg["linker_residues"], table,
                            np.random.default_rng([cfg["seed"], LINKER_STREAM, i]),
                            clash_cutoff=cfg["clash_cutoff"], max_attempts=cfg["max_attempts"])
              for i in range(n)]
    return models, [("draw", float(i)) for i in range(n)]


def cmd_gen_volumes(cfg: RunConfig, threads: int = 1) -> RunDir:
    models, params = _models(cfg)
    shift = models[0].center_of_mass() if cfg["center"] else np.zeros(3)
    run = _start(cfg)
    rows = ["index\tfile\tsource\tparameter\tvalue"]
    for i, (m, (pname, value)) in enumerate(zip(models, params)):
        moved = m.with_coords(m.coords - shift)
        v = synthesize_density(moved, cfg["resolution"], cfg["D"], cfg["pixel_size"], center=False,
                               method=cfg["density_method"])
        name = f"vol_{i:03d}.mrc"
        run.write_mrc(name, v)
        rows.append(f"{i}\t{name}\t{m.source or cfg['mode']}\t{pname}\t{value!r}")
    run.write_text("conformations.tsv", "\n".join(rows) + "\n")
    return run


# -- simulate ------------------------------------------------------------------

def ctf_pool(cfg: RunConfig) -> list[CtfParams]:
    defaults = CtfParams(0.0, 0.0, 0.0, cfg["voltage"], cfg["spherical_aberration"], cfg["amplitude_contrast"])
    if cfg.get("ctf_table") is not None:
        return read_ctf_table(_read(cfg.path("ctf_table")), defaults=defaults)
    lo, hi, n = cfg["defocus_min"], cfg["defocus_max"], cfg["ctf_pool_size"]
    if not 0 < lo <= hi or n < 1:
        raise ConfigError("need 0 < defocus_min <= defocus_max and ctf_pool_size >= 1")
    rng = np.random.default_rng([cfg["seed"], CTF_POOL_STREAM])
    du = rng.uniform(lo, hi, n)
    dv = du - rng.uniform(0, cfg["astigmatism_max"], n)
    ang = rng.uniform(0, 180, n)
    return [CtfParams(float(u), float(v), float(a), cfg["voltage"], cfg["spherical_aberration"],
                      cfg["amplitude_contrast"]) for u, v, a in zip(du, dv, ang)]


def cmd_simulate(cfg: RunConfig, threads: int = 1) -> RunDir:
    vols = load_volumes(cfg.path("volumes"))
    counts = list(cfg["counts"])
    if len(counts) == 1:
        counts = counts * len(vols)
    pool = ctf_pool(cfg)
    snr = None if cfg["clean"] else cfg["snr"]
    if snr is not None and not snr > 0:
        raise ConfigError("snr must be positive (set clean = true for noise-free images)")
    stack = simulate_dataset(vols, counts, pool, snr, cfg["t_bound"], cfg["seed"], threads, cfg["oversample"])
    run = _start(cfg)
    run.write_mrc("particles.mrcs", stack.as_image_stack())
    run.write_text("particles.star", write_star(ParticleMetadata.from_stack(stack, "particles.mrcs")))
    run.write_text("poses.tsv", format_pose_table(stack.rotations, stack.translations))
    run.write_text("ctf.tsv", format_ctf_table(stack.ctfs))
    run.write_text("labels.tsv", format_labels(stack.labels))
    run.write_text("summary.json", _json({
        "n_images": len(stack), "D": stack.D, "pixel_size": stack.pixel_size, "counts": counts,
        "snr": snr, "noise_sigma": stack.noise_sigma, "seed": cfg["seed"], "t_bound": cfg["t_bound"],
        "volumes": [os.path.basename(p) for p in volume_paths(cfg.path("volumes"))],
    }))
    return run


# -- mask ----------------------------------------------------------------------

def cmd_mask(cfg: RunConfig, threads: int = 1) -> RunDir:
    vols = load_volumes(cfg.path("volumes"))
    m = generate_mask(vols, cfg.get("threshold"), cfg["dilation_px"], cfg["soft_width_px"])
    run = _start(cfg)
    run.write_mrc("mask.mrc", m.as_volume())
    return run


# -- eval-volumes --------------------------------------------------------------

def _mask(cfg: RunConfig) -> MaskVolume | None:
    if cfg.get("mask") is None:
        return None
    v = load_mrc(cfg.path("mask"))
    return MaskVolume(v.data, v.pixel_size)


def cmd_eval_volumes(cfg: RunConfig, threads: int = 1) -> RunDir:
    cands = cfg.family("candidates")
    if not cands:
        raise ConfigError("eval-volumes needs at least one 'candidates.NAME = PATH' entry")
    pairing = cfg["pairing"]
    pairs = None
    if cfg.get("pairs") is not None:
        pairs = load_labels(cfg.path("pairs"))
    elif pairing == "per_image":
        raise ConfigError("pairing per_image needs 'pairs' (labels.tsv or particles.star from simulate) "
                          "giving the ground-truth index of every candidate volume")
    if cfg["align"] and pairing == "sample_max":
        raise ConfigError("align works with per_conformation or per_image pairing, not sample_max")
    gt = load_volumes(cfg.path("gt"))
    mask = _mask(cfg)
    pad = cfg.get("zero_pad")
    if pad is not None:
        gt = [zero_pad(v, pad) for v in gt]
        if mask is not None:
            mask = MaskVolume(zero_pad(mask.as_volume(), pad).data, mask.pixel_size)

    run = _start(cfg)
    summary = ["method\tpairing\tn\tmean\tstd\tmedian"]
    series = []
    for name, path in cands.items():
        vols = load_volumes(cfg.path(f"candidates.{name}"))
        if pad is not None:
            vols = [zero_pad(v, pad) for v in vols]
        if cfg["align"]:
            targets = pairs if pairs is not None else range(len(vols))
            if len(targets) != len(vols):
                raise FscError(f"{name}: {len(targets)} pairings for {len(vols)} candidates")
            vols = [align_volumes(gt[int(g)], v, cfg["align_step"], threads=threads)[1]
                    for g, v in zip(targets, vols)]
        rep = fsc_table(gt, vols, pairing, mask, pairs, threads)
        run.write_text(f"fsc_{name}.tsv", rep.to_tsv())
        run.write_text(f"curves_{name}.tsv", rep.curves_tsv())
        run.write_text(f"summary_{name}.json", rep.summary_text())
        if rep.matrix is not None:
            run.write_text(f"matrix_{name}.tsv", format_matrix(rep.matrix))
            run.write_text(f"matrix_{name}.svg", svg.heatmap(
                rep.matrix, f"AUC-FSC {name}", "ground truth", "candidate", vmax=0.5))
        summary.append(f"{name}\t{pairing}\t{len(rep.pairs)}\t{rep.mean!r}\t{rep.std!r}\t{rep.median!r}")
        curves = np.array([p.curve.correlation for p in rep.pairs])
        series.append((name, rep.pairs[0].curve.shell_freq, curves.mean(axis=0), curves.std(axis=0)))
    run.write_text("summary.tsv", "\n".join(summary) + "\n")
    run.write_text("mean_fsc.svg", svg.line_plot(series, "Mean FSC across conformations",
                                                 "spatial frequency (1/px)", "FSC"))
    return run


def format_matrix(m: np.ndarray) -> str:
    return "".join("\t".join(repr(float(x)) for x in row) + "\n" for row in m)


def read_matrix(text: str) -> np.ndarray:
    rows = []
    for n, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            rows.append([float(x) for x in line.split("\t")])
        except ValueError:
            raise ConfigError(f"line {n}: non-numeric matrix entry") from None
    if not rows or len({len(r) for r in rows}) != 1:
        raise ConfigError("matrix rows must be non-empty and equally long")
    return np.array(rows)


# -- eval-embeddings -----------------------------------------------------------

def _gt_embedding(cfg: RunConfig, labels: np.ndarray) -> EmbeddingMatrix:
    kind = cfg["gt_kind"]
    if kind == "file":
        if cfg.get("gt") is None:
            raise ConfigError("gt_kind file needs 'gt'")
        return load_embedding(cfg.path("gt"))
    if cfg.get("conformations") is None:
        raise ConfigError(f"gt_kind {kind} needs 'conformations'")
    rows = read_conformations(cfg.path("conformations"))
    if kind == "circular_angle":
        angles = np.array([float(r["value"]) for r in rows])
        return gt_embedding("circular_angle", labels=labels, angles=angles)
    vols = [load_mrc(r["file"]) for r in rows]
    return gt_embedding("voxel_intensity", labels=labels, volumes=vols)


def cmd_eval_embeddings(cfg: RunConfig, threads: int = 1) -> RunDir:
    methods = cfg.family("embeddings")
    if not methods:
        raise ConfigError("eval-embeddings needs at least one 'embeddings.NAME = PATH' entry")
    labels = load_labels(cfg.path("labels"))
    gt = _gt_embedding(cfg, labels)
    if gt.N != len(labels):
        raise EmbeddingError(f"ground truth has {gt.N} rows for {len(labels)} labels")
    n_struct = cfg.get("n_structures") or len(np.unique(labels))
    k_clusters = cfg.get("clusters") or n_struct
    coords = cfg.family("coords")
    for name in coords:
        if name not in methods:
            raise ConfigError(f"coords.{name} has no matching embeddings.{name}")

    run = _start(cfg)
    pmn_rows = ["method\tradius_pct\tk\tmean\tstd\tsem"]
    ii_rows = ["method\tdelta_method_to_gt\tdelta_gt_to_method\tstd_method_to_gt\tstd_gt_to_method\t"
               + "\t".join(f"m2g_k{k}\tg2m_k{k}" for k in cfg["k_list"])]
    cl_rows = ["method\tk\tari\tami"]
    pmn_series, ii_points = [], []
    for name in methods:
        emb = load_embedding(cfg.path(f"embeddings.{name}"))
        if emb.N != gt.N:
            raise EmbeddingError(f"{name}: {emb.N} rows but the ground truth has {gt.N}")
        curve = pmn_curve(emb, gt, n_struct, cfg["n_splits"])
        for r, k, m, s, e in zip(curve.radii, curve.k, curve.mean, curve.std, curve.sem):
            pmn_rows.append(f"{name}\t{float(r)!r}\t{int(k)}\t{float(m)!r}\t{float(s)!r}\t{float(e)!r}")
        pmn_series.append((name, curve.radii, curve.mean, curve.sem))
        ii = information_imbalance(emb, gt, cfg["k_list"], min(cfg["subset_size"], emb.N),
                                   np.random.default_rng([cfg["seed"], 1]))
        per_k = "\t".join(f"{a!r}\t{b!r}" for a, b in zip(ii.per_k_ab.tolist(), ii.per_k_ba.tolist()))
        ii_rows.append(f"{name}\t{ii.delta_ab!r}\t{ii.delta_ba!r}\t{ii.std_ab!r}\t{ii.std_ba!r}\t{per_k}")
        ii_points.append((ii.delta_ba, ii.delta_ab))
        pred = kmeans_labels(emb, k_clusters, seed=cfg["seed"])
        ari, ami = clustering_scores(pred, labels)
        cl_rows.append(f"{name}\t{k_clusters}\t{ari!r}\t{ami!r}")
        sel = select_per_conformation(emb, labels)
        reps = ["label\trow\t" + "\t".join(f"z{j}" for j in range(emb.rows.shape[1]))]
        for lab, row, z in zip(sel.labels, sel.indices, sel.coords):
            reps.append(f"{int(lab)}\t{int(row)}\t" + "\t".join(repr(float(x)) for x in z))
        run.write_text(f"representatives_{name}.tsv", "\n".join(reps) + "\n")
        xy = None
        if name in coords:
            xy = load_embedding(cfg.path(f"coords.{name}")).rows
        elif emb.rows.shape[1] == 2:
            xy = emb.rows
        if xy is not None:
            if xy.shape != (len(labels), 2):
                raise EmbeddingError(f"coords.{name}: expected {len(labels)} rows of 2 columns")
            run.write_text(f"scatter_{name}.svg", svg.scatter_plot(xy, labels, f"{name} latent space",
                                                                   "dim 1", "dim 2"))
    run.write_text("pmn.tsv", "\n".join(pmn_rows) + "\n")
    run.write_text("imbalance.tsv", "\n".join(ii_rows) + "\n")
    run.write_text("clustering.tsv", "\n".join(cl_rows) + "\n")
    run.write_text("pmn.svg", svg.line_plot(pmn_series, "Matching neighbours", "neighbourhood radius (%)",
                                            "pMN (%)"))
    pts = np.array(ii_points)
    run.write_text("imbalance.svg", svg.scatter_plot(
        np.vstack([pts, [[0, 0], [1, 1]]]), list(range(len(pts))) + [len(pts)] * 2,
        "Information imbalance", "Delta(gt -> method)", "Delta(method -> gt)",
        names=list(methods) + ["reference (0,0) and (1,1)"], radius=4.0))
    run.write_text("gt_embedding.tsv", format_embedding_tsv(gt))
    return run


# -- align ---------------------------------------------------------------------

def cmd_align(cfg: RunConfig, threads: int = 1) -> RunDir:
    ref, moving = load_mrc(cfg.path("ref")), load_mrc(cfg.path("moving"))
    if not (isinstance(ref, Volume) and isinstance(moving, Volume)):
        raise GridError("align needs two volumes")
    R, aligned, score = align_volumes(ref, moving, cfg["coarse_step"], cfg["min_step"], threads)
    run = _start(cfg)
    run.write_mrc("aligned.mrc", aligned)
    run.write_text("rotation.tsv", "".join("\t".join(repr(float(x)) for x in row) + "\n" for row in R))
    run.write_text("align.json", _json({
        "correlation": score,
        "auc_before": auc_fsc(fsc(ref, moving)),
        "auc_after": auc_fsc(fsc(ref, aligned)),
    }))
    return run


# -- plot ----------------------------------------------------------------------

def _columns(text: str) -> tuple[list[str], list[list[str]]]:
    lines = [l for l in text.splitlines() if l.strip()]
    if not lines:
        raise ConfigError("table is empty")
    head = lines[0].split("\t")
    rows = []
    for n, line in enumerate(lines[1:], 2):
        parts = line.split("\t")
        if len(parts) != len(head):
            raise ConfigError(f"line {n}: {len(parts)} fields, header has {len(head)}")
        rows.append(parts)
    return head, rows


def cmd_plot(cfg: RunConfig, threads: int = 1) -> RunDir:
    text = _read(cfg.path("table"))
    kind, title = cfg["kind"], cfg["title"]
    if kind == "heatmap":
        out = svg.heatmap(read_matrix(text), title)
    elif kind == "fsc":
        head, rows = _columns(text)
        try:
            data = np.array(rows, float)
        except ValueError:
            raise ConfigError("FSC curve table has non-numeric entries") from None
        series = [(h, data[:, 0], data[:, j], None) for j, h in enumerate(head[1:], 1)]
        out = svg.line_plot(series, title, "spatial frequency (1/px)", "FSC")
    else:
        head, rows = _columns(text)
        need = ["method", "radius_pct", "mean", "sem"]
        if any(h not in head for h in need):
            raise ConfigError(f"pMN table needs columns {', '.join(need)}")
        ix = {h: head.index(h) for h in need}
        series = []
        for m in dict.fromkeys(r[ix["method"]] for r in rows):
            sub = [r for r in rows if r[ix["method"]] == m]
            series.append((m, [float(r[ix["radius_pct"]]) for r in sub], [float(r[ix["mean"]]) for r in sub],
                           [float(r[ix["sem"]]) for r in sub]))
        out = svg.line_plot(series, title, "neighbourhood radius (%)", "pMN (%)")
    run = _start(cfg)
    run.write_text(cfg["name"], out)
    return run


COMMANDS = {
    "gen-volumes": cmd_gen_volumes,
    "simulate": cmd_simulate,
    "mask": cmd_mask,
    "eval-volumes": cmd_eval_volumes,
    "eval-embeddings": cmd_eval_embeddings,
    "align": cmd_align,
    "plot": cmd_plot,
}

ERRORS = (ConfigError, ModelError, GridError, FscError, EmbeddingError, ValueError, OSError)
