"""Test-only oracles that must stay independent of the package code."""
import struct

import numpy as np


def handmade_mrc(data: np.ndarray, pixel_size: float, ispg: int) -> bytes:
    """Build an MRC2014 file byte by byte with ``struct`` (no package code)."""
    data = np.ascontiguousarray(data, dtype="<f4")
    nz, ny, nx = data.shape
    mz = 1 if ispg == 0 else nz
    head = struct.pack("<3i", nx, ny, nz)
    head += struct.pack("<i", 2)
    head += struct.pack("<3i", 0, 0, 0)
    head += struct.pack("<3i", nx, ny, mz)
    head += struct.pack("<3f", nx * pixel_size, ny * pixel_size, mz * pixel_size)
    head += struct.pack("<3f", 90, 90, 90)
    head += struct.pack("<3i", 1, 2, 3)
    head += struct.pack("<3f", float(data.min()), float(data.max()), float(data.mean()))
    head += struct.pack("<2i", ispg, 0)
    head += b"\0" * 100
    head += struct.pack("<3f", 0, 0, 0)
    head += b"MAP "
    head += bytes([0x44, 0x44, 0, 0])
    head += struct.pack("<f", float(data.std()))
    head += struct.pack("<i", 0)
    head += b"\0" * 800
    assert len(head) == 1024
    return head + data.tobytes()


def _place(a, b, c, bond, angle, torsion):
    """NeRF: position of atom d given a, b, c and internal coordinates (degrees)."""
    angle, torsion = np.radians(angle), np.radians(torsion)
    bc = c - b
    bc /= np.linalg.norm(bc)
    n = np.cross(b - a, bc)
    n /= np.linalg.norm(n)
    m = np.cross(n, bc)
    d2 = np.array([-bond * np.cos(angle), bond * np.sin(angle) * np.cos(torsion), bond * np.sin(angle) * np.sin(torsion)])
    return c + d2[0] * bc + d2[1] * m + d2[2] * n


def build_peptide(n_res, phi=-60.0, psi=-45.0, chain="A", start=1, offset=(0.0, 0.0, 0.0)):
    """Ideal-geometry poly-alanine backbone (N, CA, C, O, CB per residue)."""
    from hetbench.model import AtomicModel

    phis = np.broadcast_to(np.asarray(phi, float), (n_res,))
    psis = np.broadcast_to(np.asarray(psi, float), (n_res,))
    N = np.array([0.0, 1.458, 0.0])
    CA = np.array([0.0, 0.0, 0.0])
    C = _place(np.array([1.0, 1.458, 0.0]), N, CA, 1.525, 111.2, -60.0)
    coords, names = [], []
    for i in range(n_res):
        if i > 0:
            N = _place(prevN, prevCA, prevC, 1.329, 116.2, psis[i - 1])
            CA = _place(prevCA, prevC, N, 1.458, 121.7, 180.0)
            C = _place(prevC, N, CA, 1.525, 111.2, phis[i])
        Nn = _place(N, CA, C, 1.329, 116.2, psis[i])
        O = _place(Nn, CA, C, 1.231, 120.5, 180.0)
        CB = _place(C, N, CA, 1.53, 110.5, -122.5)
        coords += [N, CA, C, O, CB]
        names += ["N", "CA", "C", "O", "CB"]
        prevN, prevCA, prevC = N, CA, C
    coords = np.array(coords) + np.asarray(offset)
    n = len(coords)
    res = np.repeat(np.arange(start, start + n_res), 5)
    return AtomicModel(coords, [nm[0] for nm in names], names, ["ALA"] * n, res, [chain] * n, "peptide")


def merge_models(*models):
    from hetbench.model import AtomicModel

    return AtomicModel(
        np.concatenate([m.coords for m in models]),
        sum((m.elements for m in models), ()),
        sum((m.names for m in models), ()),
        sum((m.res_names for m in models), ()),
        np.concatenate([m.res_seq for m in models]),
        sum((m.chains for m in models), ()),
        "merged",
    )


def compact_volume(rng, D=32, coarse=8, envelope=2.5):
    """Random band-limited field (a coarse grid Fourier-padded to D) under a
    Gaussian envelope, so the particle sits well inside the box."""
    from hetbench.grid import Volume, fourier_pad
    from conftest import gaussian_blob

    small = Volume(rng.standard_normal((coarse,) * 3), 1.0)
    return Volume(fourier_pad(small, D).data * gaussian_blob(D, envelope), 1.0)
