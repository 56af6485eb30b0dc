"""Voxel/image containers, Fourier conventions, masks and MRC I/O."""
from .containers import FourierGrid, GridError, Image, ImageStack, MaskVolume, Volume, check_same_grid
from .fourier import (
    fourier_crop,
    fourier_pad,
    fourier_transform,
    ft,
    ift,
    inverse_fourier_transform,
    radial_index,
)
from .mask import apply_mask, cosine_edge, generate_mask
from .transform import rotate_volume
from .mrc import MrcError, atomic_write_bytes, load_mrc, read_mrc, save_mrc, write_mrc

__all__ = [
    "FourierGrid", "GridError", "Image", "ImageStack", "MaskVolume", "Volume", "check_same_grid",
    "fourier_crop", "fourier_pad", "fourier_transform", "ft", "ift", "inverse_fourier_transform",
    "radial_index", "rotate_volume", "apply_mask", "cosine_edge", "generate_mask",
    "MrcError", "atomic_write_bytes", "load_mrc", "read_mrc", "save_mrc", "write_mrc",
]
