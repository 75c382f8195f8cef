"""Finite-difference Fokker-Planck solver for low-dimensional reduced SDEs.

The generator is always assembled from a StratonovichField (never transcribed
from a closed-form PDE): the Stratonovich drift is converted to its
Fokker-Planck advection by the correction a_i + sum_jk b_jk d_j b_ik / 2 and
the diffusion matrix is b b^T / 2.  Space discretization is conservative
first-order upwind for advection plus central second differences for
diffusion, with zero-flux boundaries; time stepping is explicit Euler with
mass renormalization each step.

Grids are limited to 1-3 axes; the intended use is the reduced Suslov system
over (Omega1, Omega2, N).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field
from typing import Optional

import numpy as np

from .sde import StratonovichField


class CFLViolation(RuntimeError):
    """Requested time step exceeds the advertised stability bound."""


class UnsupportedDependence(ValueError):
    """Field dimension does not match the grid coordinates."""


class CoverageLow(RuntimeError):
    """More than 1% of Monte Carlo samples fell outside the grid."""


@dataclass
class FPGrid:
    """Cell-centered density over a box, dims in {1, 2, 3}.

    ``bounds`` is a sequence of (lo, hi) per axis, ``cells`` the cell counts.
    ``density`` integrates to 1 over the box (sum * cell_volume).
    """

    bounds: tuple
    cells: tuple
    density: np.ndarray
    diagnostics: dict = dataclass_field(default_factory=dict)

    def __post_init__(self):
        self.bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        self.cells = tuple(int(c) for c in self.cells)
        if not 1 <= len(self.bounds) <= 3 or len(self.bounds) != len(self.cells):
            raise ValueError("bounds/cells must describe 1-3 matching axes")
        for (lo, hi), c in zip(self.bounds, self.cells):
            if hi <= lo or c < 2:
                raise ValueError("each axis needs hi > lo and >= 2 cells")
        self.density = np.asarray(self.density, dtype=float).reshape(self.cells)

    @property
    def dims(self) -> int:
        return len(self.cells)

    @property
    def deltas(self):
        return tuple((hi - lo) / c for (lo, hi), c in zip(self.bounds, self.cells))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.deltas))

    @property
    def centers(self):
        return tuple(
            lo + (np.arange(c) + 0.5) * dx
            for (lo, hi), c, dx in zip(self.bounds, self.cells, self.deltas)
        )

    @property
    def edges(self):
        return tuple(
            lo + np.arange(c + 1) * dx
            for (lo, hi), c, dx in zip(self.bounds, self.cells, self.deltas)
        )

    def mass(self) -> float:
        return float(self.density.sum() * self.cell_volume)

    def center_mesh(self):
        """Flattened (n_cells, dims) array of cell centers."""
        mesh = np.meshgrid(*self.centers, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    @classmethod
    def zeros(cls, bounds, cells):
        return cls(bounds=tuple(bounds), cells=tuple(cells),
                   density=np.zeros(tuple(int(c) for c in cells)))

    @classmethod
    def point_mass(cls, bounds, cells, point):
        """All mass in the single cell containing ``point``."""
        grid = cls.zeros(bounds, cells)
        idx = []
        for x, (lo, hi), c, dx in zip(point, grid.bounds, grid.cells, grid.deltas):
            i = int((x - lo) / dx)
            if not 0 <= i < c:
                raise ValueError("point %s outside grid bounds" % (point,))
            idx.append(i)
        grid.density[tuple(idx)] = 1.0 / grid.cell_volume
        return grid

    def snap_to_center(self, point):
        """Center of the cell containing ``point`` (for matched FP/MC starts)."""
        out = []
        for x, (lo, hi), dx in zip(point, self.bounds, self.deltas):
            i = int((x - lo) / dx)
            out.append(lo + (i + 0.5) * dx)
        return np.array(out)


@dataclass(frozen=True)
class FPGenerator:
    """Itô-form advection/diffusion coefficients sampled on a grid."""

    bounds: tuple
    cells: tuple
    advection: tuple   # one array per axis, shape = cells
    diffusion: tuple   # diagonal entries D_kk, shape = cells
    cross: dict        # {(i, j): D_ij} for i < j, possibly empty


def assemble_generator(field: StratonovichField, grid: FPGrid,
                       fd_step: float = 1e-6) -> FPGenerator:
    """Sample the Fokker-Planck advection/diffusion of ``field`` on ``grid``.

    The field must live exactly on the grid coordinates (dimension match);
    any dependence on excluded coordinates must already have been reduced
    away, otherwise UnsupportedDependence is raised.
    """
    if field.dim != grid.dims:
        raise UnsupportedDependence(
            "field dimension %d does not match grid dims %d"
            % (field.dim, grid.dims)
        )
    pts = grid.center_mesh()
    drift = np.asarray(field.drift(pts), dtype=float)
    b = np.asarray(field.diffusion(pts), dtype=float)
    if field.channels == 1:
        b = b[..., None]
    d = grid.dims

    # Stratonovich -> Ito drift correction: + sum_{j,k} b_jk d_j b_ik / 2
    correction = np.zeros_like(drift)
    for j in range(d):
        h = fd_step * (1.0 + np.abs(pts[:, j]))
        shift = np.zeros_like(pts)
        shift[:, j] = h
        b_plus = np.asarray(field.diffusion(pts + shift), dtype=float)
        b_minus = np.asarray(field.diffusion(pts - shift), dtype=float)
        if field.channels == 1:
            b_plus, b_minus = b_plus[..., None], b_minus[..., None]
        db_dj = (b_plus - b_minus) / (2.0 * h)[:, None, None]
        correction += 0.5 * np.einsum("nk,nik->ni", b[:, j, :], db_dj)
    adv = drift + correction

    dmat = 0.5 * np.einsum("nik,njk->nij", b, b)
    advection = tuple(adv[:, k].reshape(grid.cells) for k in range(d))
    diffusion = tuple(dmat[:, k, k].reshape(grid.cells) for k in range(d))
    cross = {}
    for i in range(d):
        for j in range(i + 1, d):
            entry = dmat[:, i, j]
            if np.any(entry != 0.0):
                cross[(i, j)] = entry.reshape(grid.cells)
    return FPGenerator(bounds=grid.bounds, cells=grid.cells,
                       advection=advection, diffusion=diffusion, cross=cross)


def _neighbor_max(arr, axis):
    """Elementwise max of |arr| with its two axis-neighbors (edge-padded)."""
    a = np.abs(arr)
    padded = np.concatenate(
        [a.take([0], axis=axis), a, a.take([-1], axis=axis)], axis=axis
    )
    n = arr.shape[axis]
    lo = padded.take(range(0, n), axis=axis)
    hi = padded.take(range(2, n + 2), axis=axis)
    return np.maximum(a, np.maximum(lo, hi))


def cfl_limit(gen: FPGenerator) -> float:
    """Advertised stability bound 0.9 min(dx/|adv|, dx^2/(2 diff)) over the grid."""
    deltas = tuple((hi - lo) / c for (lo, hi), c in zip(gen.bounds, gen.cells))
    limit = np.inf
    for k, dx in enumerate(deltas):
        amax = float(np.abs(gen.advection[k]).max())
        dmax = float(gen.diffusion[k].max())
        if amax > 0.0:
            limit = min(limit, dx / amax)
        if dmax > 0.0:
            limit = min(limit, dx * dx / (2.0 * dmax))
    return 0.9 * limit


def _cfl_limiting_cell(gen: FPGenerator, deltas):
    worst, cell, why = np.inf, None, ""
    for k, dx in enumerate(deltas):
        with np.errstate(divide="ignore"):
            adv_lim = dx / np.abs(gen.advection[k])
            dif_lim = (dx * dx / 2.0) / gen.diffusion[k]
        for name, arr in (("advection", adv_lim), ("diffusion", dif_lim)):
            idx = np.unravel_index(np.argmin(arr), arr.shape)
            if arr[idx] < worst:
                worst, cell, why = float(arr[idx]), idx, "%s axis %d" % (name, k)
    return worst, cell, why


def stable_timestep(gen: FPGenerator) -> float:
    """Positivity-preserving explicit step: 0.9 / max_cells sum_k (outflow rates)."""
    deltas = tuple((hi - lo) / c for (lo, hi), c in zip(gen.bounds, gen.cells))
    coef = np.zeros(gen.cells)
    for k, dx in enumerate(deltas):
        coef = coef + 2.0 * _neighbor_max(gen.advection[k], k) / dx
        coef = coef + 2.0 * gen.diffusion[k] / (dx * dx)
    cmax = float(coef.max())
    if cmax == 0.0:
        return np.inf
    return 0.9 / cmax


def fp_solve(grid: FPGrid, gen: FPGenerator, t_final: float,
             dt_fp: Optional[float] = None) -> FPGrid:
    """Explicit-Euler evolution of the density to ``t_final``.

    ``dt_fp`` defaults to the positivity-safe bound; a requested value above
    the advertised CFL limit raises CFLViolation naming the limiting cell.
    Mass is renormalized each step; the maximum pre-renormalization mass
    defect is reported in the returned grid's diagnostics.
    """
    limit = cfl_limit(gen)
    if dt_fp is None:
        dt_fp = min(stable_timestep(gen), limit)
    elif dt_fp > limit:
        deltas = grid.deltas
        worst, cell, why = _cfl_limiting_cell(gen, deltas)
        raise CFLViolation(
            "dt_fp=%g exceeds CFL bound %g (limiting cell %s, %s)"
            % (dt_fp, limit, cell, why)
        )
    if t_final <= 0.0:
        return FPGrid(grid.bounds, grid.cells, grid.density.copy())

    n_steps = max(1, int(np.ceil(t_final / dt_fp)))
    dt = t_final / n_steps
    deltas = grid.deltas
    d = grid.dims
    p = grid.density.copy()
    vol = grid.cell_volume

    # time-independent face coefficients per axis
    face_adv, dpos, diffu = [], [], []
    for k in range(d):
        a = gen.advection[k]
        lo = [slice(None)] * d
        hi = [slice(None)] * d
        lo[k] = slice(0, -1)
        hi[k] = slice(1, None)
        af = 0.5 * (a[tuple(lo)] + a[tuple(hi)])
        face_adv.append(af)
        dpos.append(af > 0.0)
        diffu.append(gen.diffusion[k])

    max_defect = 0.0
    for _ in range(n_steps):
        dp = np.zeros_like(p)
        for k in range(d):
            lo = [slice(None)] * d
            hi = [slice(None)] * d
            lo[k] = slice(0, -1)
            hi[k] = slice(1, None)
            p_lo, p_hi = p[tuple(lo)], p[tuple(hi)]
            flux = face_adv[k] * np.where(dpos[k], p_lo, p_hi)
            dprod = diffu[k] * p
            flux = flux - (dprod[tuple(hi)] - dprod[tuple(lo)]) / deltas[k]
            # zero-flux boundaries: pad faces with zeros, take divergence
            pad_shape = list(p.shape)
            pad_shape[k] = 1
            zeros = np.zeros(pad_shape)
            padded = np.concatenate([zeros, flux, zeros], axis=k)
            dp -= np.diff(padded, axis=k) / deltas[k]
        for (i, j), dij in gen.cross.items():
            dp += _cross_term(dij * p, i, j, deltas)
        p = p + dt * dp
        mass = float(p.sum() * vol)
        max_defect = max(max_defect, abs(mass - 1.0))
        if mass > 0.0:
            p /= mass
    out = FPGrid(grid.bounds, grid.cells, p)
    out.diagnostics = {"steps": n_steps, "dt": dt, "max_mass_defect": max_defect,
                       "min_density": float(p.min())}
    return out


def _cross_term(q, i, j, deltas):
    """Central-difference d_i d_j q (used only for off-diagonal diffusion)."""
    gi = np.gradient(q, deltas[j], axis=j, edge_order=1)
    return 2.0 * np.gradient(gi, deltas[i], axis=i, edge_order=1)


def histogram_density(samples, grid: FPGrid):
    """Bin samples onto the grid, normalized to unit mass over in-grid points.

    Raises CoverageLow when more than 1% of the samples fall outside.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    if samples.shape[1] != grid.dims:
        raise ValueError("samples have %d coordinates, grid has %d dims"
                         % (samples.shape[1], grid.dims))
    inside = np.ones(samples.shape[0], dtype=bool)
    for k, (lo, hi) in enumerate(grid.bounds):
        inside &= (samples[:, k] >= lo) & (samples[:, k] <= hi)
    frac_out = 1.0 - inside.mean()
    if frac_out > 0.01:
        raise CoverageLow("%.2f%% of samples outside the grid" % (100 * frac_out))
    counts, _ = np.histogramdd(samples[inside], bins=grid.edges)
    total = counts.sum()
    if total == 0:
        raise CoverageLow("no samples fell inside the grid")
    return counts / (total * grid.cell_volume)


def l1_distance(density_a, density_b, cell_volume: float) -> float:
    """L1 distance sum |p_a - p_b| vol, in [0, 2] for unit-mass densities."""
    return float(np.abs(np.asarray(density_a) - np.asarray(density_b)).sum() * cell_volume)


def mc_histogram_distance(samples, grid: FPGrid) -> float:
    """L1 distance between the grid density and a Monte Carlo histogram."""
    mc = histogram_density(samples, grid)
    return l1_distance(grid.density, mc, grid.cell_volume)
