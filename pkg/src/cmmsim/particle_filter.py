"""Per-vehicle particle filter over the shared 2-D GNSS error.

Each particle hypothesizes the common error offset; a measurement supports
a hypothesis when the corrected position (measurement minus offset) lands
on the road. Receiver noise is folded into the constraint softness rather
than modeled as a separate likelihood term.

Every operation returns a new ParticleSet; sets are never mutated, so a
snapshot handed to a neighbor during fusion stays valid. Seeds may be
integers, SeedSequences, or Generators (a Generator is used in place,
which lets a caller chain several operations on one stream).
"""

from dataclasses import dataclass

import numpy as np

from . import kernels


class DegenerateWeights(RuntimeError):
    """Every particle weight underflowed to zero."""


@dataclass(frozen=True)
class FilterConfig:
    particles: int = 500
    diffusion_sigma: float = 0.2
    noise_sigma: float = 1.0
    softness: float = 0.5
    init_sigma: float = 5.0

    def __post_init__(self):
        if self.particles < 10:
            raise ValueError("need at least 10 particles")
        for field in ("diffusion_sigma", "noise_sigma", "softness", "init_sigma"):
            if getattr(self, field) < 0:
                raise ValueError(f"{field} must be nonnegative")


@dataclass(frozen=True)
class ParticleSet:
    """Weighted hypotheses over the common error.

    offsets: (M, 2) float; weights: (M,) nonnegative, normalized to sum 1;
    capacity: the population size resampling restores.
    """

    offsets: np.ndarray
    weights: np.ndarray
    capacity: int

    def __post_init__(self):
        object.__setattr__(self, "offsets", np.asarray(self.offsets, dtype=float))
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        self.offsets.setflags(write=False)
        self.weights.setflags(write=False)

    def __len__(self):
        return self.offsets.shape[0]


def effective_softness(softness: float, noise_sigma: float) -> float:
    """Constraint scale with receiver noise folded in."""
    return float(np.hypot(softness, noise_sigma))


def init_particles(capacity: int, init_sigma: float, seed) -> ParticleSet:
    """Gaussian cloud of hypotheses around a zero common error."""
    rng = np.random.default_rng(seed)
    offsets = rng.normal(0.0, init_sigma, size=(capacity, 2))
    return ParticleSet(offsets, np.full(capacity, 1.0 / capacity), capacity)


def predict(pset: ParticleSet, diffusion_sigma: float, seed) -> ParticleSet:
    """Diffuse every hypothesis by zero-mean Gaussian noise."""
    if diffusion_sigma == 0.0:
        return pset
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, diffusion_sigma, size=pset.offsets.shape)
    return ParticleSet(pset.offsets + noise, pset.weights, pset.capacity)


def update(pset: ParticleSet, measured, rm, softness: float) -> ParticleSet:
    """Reweight hypotheses by map matching the corrected positions.

    measured: (K, 2) positions, the node's own and its in-neighbors'.
    Accumulates in log domain; raises DegenerateWeights when every
    hypothesis is incompatible with the constraints.
    """
    measured = np.atleast_2d(np.asarray(measured, dtype=float))
    if measured.size == 0:
        raise ValueError("update needs at least one measurement")
    logw = kernels.gnss_log_weights(pset.offsets, measured, rm.array, softness)
    with np.errstate(divide="ignore"):
        logw = logw + np.log(pset.weights)
    shift = logw.max()
    if not np.isfinite(shift):
        raise DegenerateWeights("all hypotheses off-road")
    w = np.exp(logw - shift)
    return ParticleSet(pset.offsets, w / w.sum(), pset.capacity)


def resample(pset: ParticleSet, seed) -> ParticleSet:
    """Systematic resampling back to capacity with equal weights."""
    total = pset.weights.sum()
    if total <= 0.0:
        raise DegenerateWeights("zero total weight")
    rng = np.random.default_rng(seed)
    idx = kernels.systematic_indices(pset.weights, pset.capacity, rng.random())
    return ParticleSet(
        pset.offsets[idx],
        np.full(pset.capacity, 1.0 / pset.capacity),
        pset.capacity,
    )


def estimate(pset: ParticleSet) -> np.ndarray:
    """Weighted mean hypothesis, the node's common error estimate."""
    return np.average(pset.offsets, weights=pset.weights, axis=0)


def uniform_weights(pset: ParticleSet) -> ParticleSet:
    """Degenerate-weight recovery: keep hypotheses, forget the evidence."""
    m = len(pset)
    return ParticleSet(pset.offsets, np.full(m, 1.0 / m), pset.capacity)


def simulate_gnss(true_position, common_error, noise_sigma: float, seed) -> np.ndarray:
    """Measured position: truth plus shared offset plus receiver noise."""
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, noise_sigma, size=2) if noise_sigma > 0.0 else 0.0
    return np.asarray(true_position, dtype=float) + np.asarray(common_error, dtype=float) + noise


def dump_rows(pset: ParticleSet, node: int, t: int) -> list[str]:
    """Debug rows `node t hyp_x hyp_y weight`, one per particle."""
    return [
        f"{node} {t} {float(x)!r} {float(y)!r} {float(w)!r}"
        for (x, y), w in zip(pset.offsets, pset.weights)
    ]
