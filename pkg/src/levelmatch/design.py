"""Latin-hypercube designs (plain and sliced) and candidate-set construction."""

from __future__ import annotations

import itertools
from pathlib import Path

import numpy as np

from .space import CandidateSet, DesignSpace, SpaceError


def _lhs_unit(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    """Random Latin hypercube on [0,1]^d: one point per stratum per dimension."""
    out = np.empty((n, d))
    for j in range(d):
        perm = rng.permutation(n)
        out[:, j] = (perm + rng.uniform(size=n)) / n
    return out


def _binary_levels(n_binary: int) -> np.ndarray:
    """All binary-level combinations, one row per slice, in lexicographic order."""
    if n_binary == 0:
        return np.zeros((1, 0))
    return np.array(list(itertools.product((0.0, 1.0), repeat=n_binary)))


def latin_hypercube(space: DesignSpace, n: int, rng_seed: int) -> np.ndarray:
    """n-point random LHS over the continuous dims; binary coords drawn uniformly.

    Returns unit-scale rows (n, dim).
    """
    if n < 1:
        raise SpaceError("n must be >= 1")
    rng = np.random.default_rng(rng_seed)
    cont = _lhs_unit(rng, n, space.n_continuous)
    binary = rng.integers(0, 2, size=(n, space.n_binary)).astype(float)
    return np.hstack([cont, binary])


def sliced_latin_hypercube(space: DesignSpace, n_per_slice: int, rng_seed: int) -> np.ndarray:
    """Sliced LHS: one slice per binary-level combination.

    Each slice is an n_per_slice-point LHS in the continuous dims, and the
    union of all slices is itself an LHS at n_per_slice * n_slices strata.
    Construction: within each coarse stratum, the fine sub-strata are dealt
    out across slices by a random permutation.
    """
    if space.n_binary == 0:
        raise SpaceError("sliced design needs at least one binary variable; use latin_hypercube")
    if n_per_slice < 1:
        raise SpaceError("n_per_slice must be >= 1")
    rng = np.random.default_rng(rng_seed)
    levels = _binary_levels(space.n_binary)
    s = levels.shape[0]
    m = n_per_slice
    n = m * s
    d = space.n_continuous

    cont = np.empty((n, d))
    for j in range(d):
        # fine[j_coarse, k] = fine stratum index given to slice k inside coarse stratum j_coarse
        fine = np.empty((m, s), dtype=np.int64)
        for jc in range(m):
            fine[jc, :] = jc * s + rng.permutation(s)
        for k in range(s):
            strata = fine[rng.permutation(m), k]
            cont[k * m : (k + 1) * m, j] = (strata + rng.uniform(size=m)) / n
    binary = np.repeat(levels, m, axis=0)
    return np.hstack([cont, binary])


def replicate_design(points: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Expand each design point into k simulation jobs.

    Returns (rows, point_index, replicate_id) where rows repeats each input
    point k times and replicate ids run 0..k-1 per point.
    """
    if k < 1:
        raise SpaceError("replicate count must be >= 1")
    points = np.atleast_2d(points)
    n = points.shape[0]
    rows = np.repeat(points, k, axis=0)
    idx = np.repeat(np.arange(n), k)
    reps = np.tile(np.arange(k), n)
    return rows, idx, reps


def candidate_set(space: DesignSpace, n_total: int, rng_seed: int) -> CandidateSet:
    """Candidate pool: one LHS per binary-level combination, concatenated.

    n_total is split evenly over the binary levels (e.g. one binary variable
    gives two hypercubes of n_total/2 points each).
    """
    levels = _binary_levels(space.n_binary)
    s = levels.shape[0]
    if n_total < s or n_total % s != 0:
        raise SpaceError(f"candidate count {n_total} must be a positive multiple of {s}")
    per = n_total // s
    rng = np.random.default_rng(rng_seed)
    blocks = []
    for lev in levels:
        cont = _lhs_unit(rng, per, space.n_continuous)
        blocks.append(np.hstack([cont, np.tile(lev, (per, 1))]))
    return CandidateSet(space=space, unit=np.vstack(blocks))


def write_design_csv(path: Path, space: DesignSpace, unit_rows: np.ndarray,
                     point_index: np.ndarray, replicate_id: np.ndarray) -> None:
    """Export a replicated design as CSV with header id,rep,x1,...,xD in native units."""
    native = space.to_native(unit_rows)
    cols = ",".join(f"x{j + 1}" for j in range(space.dim))
    lines = [f"id,rep,{cols}"]
    for i in range(native.shape[0]):
        vals = ",".join(repr(float(v)) for v in native[i])
        lines.append(f"{int(point_index[i])},{int(replicate_id[i])},{vals}")
    Path(path).write_text("\n".join(lines) + "\n")
