"""Density evaluation on rectangular (x, z) grids, cross-sections, exports.

Grid evaluation is data-parallel over rows: every (x, z) sample is computed
independently with a fixed per-point summation order, so results are
bit-identical for any worker count and any repeated run.  No interpolation
happens anywhere; cross-sections return the nearest sampled row.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import DomainError, centered_axis
from .coherence import spectral_density_profile
from .scenario import Scenario, fingerprint, scenario_lines


@dataclass(frozen=True)
class GridSpec:
    """Uniform rectangular sampling of the (x, z) plane, endpoints included."""

    x_min: float
    x_max: float
    z_min: float
    z_max: float
    nx: int
    nz: int

    def __post_init__(self) -> None:
        if not (self.x_min < self.x_max):
            raise DomainError(f"need x_min < x_max, got [{self.x_min}, {self.x_max}]")
        if not (self.z_min < self.z_max):
            raise DomainError(f"need z_min < z_max, got [{self.z_min}, {self.z_max}]")
        if self.nx < 2 or self.nz < 2:
            raise DomainError(f"need nx >= 2 and nz >= 2, got nx={self.nx}, nz={self.nz}")

    def x_axis(self) -> np.ndarray:
        return centered_axis(self.x_min, self.x_max, self.nx)

    def z_axis(self) -> np.ndarray:
        return centered_axis(self.z_min, self.z_max, self.nz)

    def lines(self) -> list[str]:
        return [
            f"grid.x_min = {self.x_min:.17g}",
            f"grid.x_max = {self.x_max:.17g}",
            f"grid.z_min = {self.z_min:.17g}",
            f"grid.z_max = {self.z_max:.17g}",
            f"grid.nx = {self.nx}",
            f"grid.nz = {self.nz}",
        ]


@dataclass(frozen=True)
class DensityField:
    """Sampled density p(x, z): nz x nx matrix, row-major in z (row 0 = z_min)."""

    grid: GridSpec
    values: np.ndarray
    fingerprint: str

    @property
    def p_min(self) -> float:
        return float(self.values.min())

    @property
    def p_max(self) -> float:
        return float(self.values.max())


@dataclass(frozen=True)
class Profile:
    """One density cross-section at fixed z."""

    z: float
    x: np.ndarray
    p: np.ndarray

    def restrict(self, x_lo: float, x_hi: float) -> "Profile":
        mask = (self.x >= x_lo) & (self.x <= x_hi)
        if not np.any(mask):
            raise DomainError(f"window [{x_lo}, {x_hi}] contains no samples")
        return Profile(z=self.z, x=self.x[mask], p=self.p[mask])

    def integral(self) -> float:
        """Trapezoidal integral of p over the sampled x range."""
        return float(np.trapezoid(self.p, self.x))


def _check_grid_region(scn: Scenario, grid: GridSpec) -> None:
    if grid.z_min < scn.z0:
        raise DomainError(f"grid starts before grating G0: z_min={grid.z_min} < z0={scn.z0}")
    if scn.region == "between" and grid.z_max > scn.z1:
        raise DomainError(f"between-region grid must end at z1={scn.z1}, got z_max={grid.z_max}")
    if scn.region == "behind" and grid.z_min < scn.z1:
        raise DomainError(f"behind-region grid must start at z1={scn.z1}, got z_min={grid.z_min}")


def _eval_rows(scn: Scenario, grid: GridSpec, lo: int, hi: int) -> np.ndarray:
    x = grid.x_axis()
    zs = grid.z_axis()
    out = np.empty((hi - lo, grid.nx), dtype=float)
    for i in range(lo, hi):
        out[i - lo] = spectral_density_profile(scn, x, float(zs[i]))
    return out


def default_workers() -> int:
    env = os.environ.get("TLSIM_THREADS")
    if env is not None:
        try:
            n = int(env)
        except ValueError as exc:
            raise DomainError(f"TLSIM_THREADS must be an integer, got {env!r}") from exc
        if n < 1:
            raise DomainError(f"TLSIM_THREADS must be >= 1, got {n}")
        return n
    return os.cpu_count() or 1


def evaluate_grid(scn: Scenario, grid: GridSpec, workers: int | None = None) -> DensityField:
    """Evaluate the scenario's density on the grid.

    A grid spanning both regions is evaluated piecewise: rows below the G1
    plane use the between-gratings form, rows above it the behind form; for a
    region='full' scenario the z == z1 row is assigned to the between form,
    while a region='behind' scenario evaluates it as the behind-form limit
    (incident field times the slit transmission).
    """
    _check_grid_region(scn, grid)
    if workers is None:
        workers = default_workers()
    if workers < 1:
        raise DomainError(f"workers must be >= 1, got {workers}")

    nz = grid.nz
    if workers == 1 or nz < 4:
        values = _eval_rows(scn, grid, 0, nz)
    else:
        chunks = min(nz, workers * 4)
        bounds = np.linspace(0, nz, chunks + 1, dtype=int)
        values = np.empty((nz, grid.nx), dtype=float)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                (lo, hi, pool.submit(_eval_rows, scn, grid, int(lo), int(hi)))
                for lo, hi in zip(bounds[:-1], bounds[1:])
                if hi > lo
            ]
            for lo, hi, fut in futures:
                values[lo:hi] = fut.result()

    values.setflags(write=False)
    return DensityField(grid=grid, values=values, fingerprint=fingerprint(scn, grid.lines()))


def cross_section(field: DensityField, z: float) -> Profile:
    """Nearest-row extraction (no interpolation); ties go to the lower row."""
    zs = field.grid.z_axis()
    if z < zs[0] or z > zs[-1]:
        raise DomainError(f"z={z} outside grid range [{zs[0]}, {zs[-1]}]")
    dist = np.abs(zs - z)
    idx = int(np.argmin(dist))  # argmin takes the first (lower) row on ties
    return Profile(z=float(zs[idx]), x=field.grid.x_axis(), p=field.values[idx].copy())


# ---------------------------------------------------------------------------
# Exports.
# ---------------------------------------------------------------------------


def export_csv(field: DensityField, path) -> None:
    """x_m,z_m,p samples at full double precision (17 significant digits)."""
    x = field.grid.x_axis()
    zs = field.grid.z_axis()
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("x_m,z_m,p\n")
            for i, z in enumerate(zs):
                row = field.values[i]
                fh.write(
                    "".join(
                        f"{x[j]:.17g},{z:.17g},{row[j]:.17g}\n" for j in range(len(x))
                    )
                )
    except OSError as exc:
        raise IOError(f"writing CSV to {path}: {exc}") from exc


def parse_csv(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Read back an export_csv file: (x, z, p) flat arrays."""
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except OSError as exc:
        raise IOError(f"reading CSV from {path}: {exc}") from exc
    return data[:, 0], data[:, 1], data[:, 2]


def export_pgm(field: DensityField, path, log_scale: bool = False) -> None:
    """Binary 16-bit PGM (P5, maxval 65535, big-endian samples).

    Linear mode maps [0, max p] onto [0, 65535]; log mode maps four decades
    of log10(p / max p) onto the same range.
    """
    p = field.values
    pmax = field.p_max
    if pmax <= 0.0:
        pix = np.zeros_like(p)
    elif log_scale:
        with np.errstate(divide="ignore"):
            rel = np.log10(np.where(p > 0.0, p / pmax, np.nan))
        frac = np.clip(1.0 + rel / 4.0, 0.0, 1.0)
        pix = np.where(np.isnan(frac), 0.0, frac) * 65535.0
    else:
        pix = p / pmax * 65535.0
    samples = np.round(pix).astype(">u2")
    header = f"P5\n{field.grid.nx} {field.grid.nz}\n65535\n".encode("ascii")
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(samples.tobytes())
    except OSError as exc:
        raise IOError(f"writing PGM to {path}: {exc}") from exc


def read_pgm(path) -> np.ndarray:
    """Read back an export_pgm file as a uint16 matrix."""
    try:
        with open(path, "rb") as fh:
            magic = fh.readline().strip()
            if magic != b"P5":
                raise IOError(f"{path}: not a binary PGM")
            dims = fh.readline().split()
            maxval = int(fh.readline())
            nx, nz = int(dims[0]), int(dims[1])
            if maxval != 65535:
                raise IOError(f"{path}: expected 16-bit PGM, maxval={maxval}")
            raw = fh.read(nx * nz * 2)
    except OSError as exc:
        raise IOError(f"reading PGM from {path}: {exc}") from exc
    vals = np.frombuffer(raw, dtype=">u2").reshape(nz, nx)
    return vals.astype(np.uint16)


def export_meta(field: DensityField, scn: Scenario, path, extra: dict | None = None) -> None:
    """Plain-text metadata: scenario echo, grid, extrema, fingerprint."""
    lines = scenario_lines(scn) + field.grid.lines()
    lines.append(f"field.p_min = {field.p_min:.17g}")
    lines.append(f"field.p_max = {field.p_max:.17g}")
    if extra:
        lines.extend(f"{k} = {v}" for k, v in extra.items())
    lines.append(f"fingerprint = {field.fingerprint}")
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise IOError(f"writing metadata to {path}: {exc}") from exc


def export_field(field: DensityField, fmt: str, path, scn: Scenario | None = None, **kw) -> None:
    """Dispatch on format: 'csv', 'pgm' or 'meta'."""
    if fmt == "csv":
        export_csv(field, path)
    elif fmt == "pgm":
        export_pgm(field, path, log_scale=bool(kw.get("log_scale", False)))
    elif fmt == "meta":
        if scn is None:
            raise DomainError("meta export needs the scenario")
        export_meta(field, scn, path, extra=kw.get("extra"))
    else:
        raise DomainError(f"unknown export format {fmt!r}")


def export_profile_csv(profile: Profile, path) -> None:
    """x_m,p samples of one cross-section at full double precision."""
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"# z_m = {profile.z:.17g}\n")
            fh.write("x_m,p\n")
            for xv, pv in zip(profile.x, profile.p):
                fh.write(f"{xv:.17g},{pv:.17g}\n")
    except OSError as exc:
        raise IOError(f"writing profile CSV to {path}: {exc}") from exc
