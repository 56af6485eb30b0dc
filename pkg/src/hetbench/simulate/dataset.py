"""Dataset assembly: poses -> projection -> CTF -> stack-wide SNR noise.

Random streams are keyed by ``(seed, stream, index)`` so every image is
reproducible on its own and results do not depend on the worker count:
stream 0 draws the pose of image ``i``, stream 1 orders the CTF pool and
stream 2 draws the noise of image ``i``.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from ..grid import ImageStack, Volume, check_same_grid
from .ctf import CtfParams, ctf_evaluate
from .pose import Pose, sample_pose_uniform
from .project import DEFAULT_OVERSAMPLE, Projector

POSE_STREAM, CTF_STREAM, NOISE_STREAM = 0, 1, 2


class SimulationError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ParticleStack:
    """Simulated images with their per-image ground truth.

    ``rotations`` (N, 3, 3), ``translations`` (N, 2) in pixels, ``labels`` the
    index of the generating structure. ``noise_sigma`` is 0 for clean stacks.
    """

    images: np.ndarray
    pixel_size: float
    rotations: np.ndarray
    translations: np.ndarray
    ctfs: tuple[CtfParams, ...]
    labels: np.ndarray
    noise_sigma: float = 0.0
    snr: float | None = None
    seed: int | None = None

    def __post_init__(self):
        n = len(self.images)
        lens = {len(self.rotations), len(self.translations), len(self.ctfs), len(self.labels)}
        if lens != {n}:
            raise SimulationError("per-image arrays differ in length")
        if np.any(np.asarray(self.labels) < 0):
            raise SimulationError("labels must be non-negative")
        object.__setattr__(self, "ctfs", tuple(self.ctfs))

    def __len__(self) -> int:
        return len(self.images)

    @property
    def D(self) -> int:
        return self.images.shape[-1]

    def pose(self, i: int) -> Pose:
        return Pose(self.rotations[i], self.translations[i])

    def as_image_stack(self) -> ImageStack:
        return ImageStack(self.images, self.pixel_size)


def image_rng(seed: int, stream: int, index: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), stream, int(index)])


def assign_ctfs(pool: Sequence[CtfParams], n: int, seed: int) -> list[CtfParams]:
    """Draw ``n`` entries without replacement, reshuffling the pool when exhausted."""
    if not pool:
        raise SimulationError("CTF pool is empty")
    rng = np.random.default_rng([int(seed), CTF_STREAM])
    out: list[CtfParams] = []
    while len(out) < n:
        out.extend(pool[j] for j in rng.permutation(len(pool)))
    return out[:n]


def dataset_labels(counts: Sequence[int]) -> np.ndarray:
    """Ground-truth label of every image: ``counts[j]`` copies of ``j`` in order."""
    counts = [int(c) for c in counts]
    if not counts:
        raise SimulationError("counts is empty")
    if any(c < 0 for c in counts):
        raise SimulationError("counts must be non-negative")
    labels = np.repeat(np.arange(len(counts)), counts)
    if labels.size == 0:
        raise SimulationError("counts sum to zero")
    return labels


def noise_sigma_for_snr(clean: np.ndarray, snr: float) -> float:
    """sigma = sqrt(var(signal) / snr), variance over every pixel of every image."""
    if not snr > 0:
        raise SimulationError(f"SNR must be positive, got {snr}")
    var = float(np.var(clean, dtype=np.float64))
    if var == 0:
        raise SimulationError("clean stack has zero variance; SNR is undefined")
    return float(np.sqrt(var / snr))


def _noise(shape, sigma: float, seed: int, index: int) -> np.ndarray:
    return image_rng(seed, NOISE_STREAM, index).normal(0.0, sigma, shape)


def add_noise_to_snr(stack, snr: float, rng: np.random.Generator | int):
    """Add white Gaussian noise so that var(signal) / var(noise) == ``snr``.

    ``stack`` is a :class:`ParticleStack` or a grid :class:`ImageStack`. An
    integer ``rng`` is a seed and gives the per-image noise streams used by
    :func:`simulate_dataset`; a Generator draws the whole stack at once.
    Returns ``(noisy_stack, sigma)``.
    """
    images = stack.images if isinstance(stack, ParticleStack) else stack.data
    if isinstance(stack, ParticleStack) and stack.noise_sigma:
        raise SimulationError("stack already carries noise")
    sigma = noise_sigma_for_snr(images, snr)
    if isinstance(rng, np.random.Generator):
        noise = rng.normal(0.0, sigma, images.shape)
    else:
        noise = np.stack([_noise(images.shape[1:], sigma, rng, i) for i in range(len(images))])
    noisy = images + noise
    if isinstance(stack, ParticleStack):
        seed = None if isinstance(rng, np.random.Generator) else int(rng)
        return replace(stack, images=noisy, noise_sigma=sigma, snr=snr, seed=seed), sigma
    return ImageStack(noisy, stack.pixel_size), sigma


def render_clean(projector: Projector, pose: Pose, ctf: CtfParams | None) -> np.ndarray:
    transfer = None if ctf is None else ctf_evaluate(ctf, projector.D, projector.pixel_size)
    return projector.project(pose, transfer)


def simulate_dataset(
    volumes: Sequence[Volume],
    counts: Sequence[int],
    ctf_pool: Sequence[CtfParams],
    snr: float | None,
    t_bound: float,
    seed: int,
    threads: int = 1,
    oversample: int = DEFAULT_OVERSAMPLE,
) -> ParticleStack:
    """Simulate ``counts[j]`` images of ``volumes[j]`` for every j.

    ``snr=None`` returns the clean CTF-modulated stack.
    """
    volumes = list(volumes)
    if not volumes:
        raise SimulationError("no volumes given")
    if len(volumes) != len(counts):
        raise SimulationError(f"{len(volumes)} volumes but {len(counts)} counts")
    for v in volumes[1:]:
        check_same_grid(volumes[0], v, "volumes")
    labels = dataset_labels(counts)
    n = len(labels)
    ctfs = assign_ctfs(list(ctf_pool), n, seed)
    D, apix = volumes[0].D, volumes[0].pixel_size
    poses = [sample_pose_uniform(image_rng(seed, POSE_STREAM, i), t_bound) for i in range(n)]

    images = np.empty((n, D, D))
    projector_cache: dict[int, Projector] = {}

    def projector(j: int) -> Projector:
        if j not in projector_cache:
            projector_cache[j] = Projector(volumes[j], oversample)
        return projector_cache[j]

    def work(i: int) -> None:
        images[i] = render_clean(projector_cache[labels[i]], poses[i], ctfs[i])

    # one structure at a time keeps a single padded spectrum in memory
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        for j in range(len(volumes)):
            idx = np.flatnonzero(labels == j)
            if idx.size == 0:
                continue
            projector(j)
            list(pool.map(work, idx))
            projector_cache.clear()

    stack = ParticleStack(
        images=images,
        pixel_size=apix,
        rotations=np.stack([p.rotation for p in poses]),
        translations=np.stack([p.translation for p in poses]),
        ctfs=tuple(ctfs),
        labels=labels,
        seed=seed,
    )
    if snr is None:
        return stack
    sigma = noise_sigma_for_snr(images, snr)

    def add(i: int) -> None:
        images[i] += _noise((D, D), sigma, seed, i)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        list(pool.map(add, range(n)))
    return replace(stack, noise_sigma=sigma, snr=snr)


def replay_image(stack: ParticleStack, volumes: Sequence[Volume], i: int,
                 oversample: int = DEFAULT_OVERSAMPLE) -> np.ndarray:
    """Recompute image ``i`` from its recorded pose, CTF, sigma and seed."""
    proj = Projector(volumes[int(stack.labels[i])], oversample)
    img = render_clean(proj, stack.pose(i), stack.ctfs[i])
    if stack.noise_sigma:
        img = img + _noise(img.shape, stack.noise_sigma, stack.seed, i)
    return img
