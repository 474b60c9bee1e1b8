"""Single-path wave functions for the two-grating interferometer.

Conventions
-----------
Amplitudes drop the overall sqrt(m/(2*pi*i*hbar*T)) radical: the finite-source
wave functions carry the prefactor 1/D and the paraxial ones carry 1/D with
the free constant set to 1.  Densities are therefore unnormalized, matching
the way the reference patterns are reported; the quadrature oracle multiplies
the raw path integral by sqrt(2*pi*i*hbar*T/m) so both sides live in the same
convention.

The removable singularity of the tilt parameter at x1 == x0 never appears
here: all phases are assembled from the grouped product (x1-x0)*xi0, which is
finite for every input.

Evaluation exactly on a grating plane (z == z0 for the between-region form,
z == z1 for the behind-region forms) uses the analytic limit of the closed
form; the limit is the incident field modulated by the slit transmission.
Everything is vectorized over the detector coordinate and over slit centers;
the scalar entry points route through the same code path so grid samples and
direct calls agree bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    HBAR,
    DomainError,
    GratingSpec,
    Particle,
    is_paraxial,
)

_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


class BranchCutError(ArithmeticError):
    """The complex square-root argument left the principal-branch half plane."""


@dataclass(frozen=True)
class PathContext:
    """Everything fixed along one source->slit(->slit) path.

    ``x1 is None`` selects the between-gratings region (only grating 0 is
    traversed); otherwise the path continues through slit center x1 of
    grating 1 into the region behind it.
    """

    particle: Particle
    grating0: GratingSpec
    grating1: GratingSpec | None
    x_s: float
    z_s: float
    x0: float
    x1: float | None = None

    def __post_init__(self) -> None:
        if not (self.z_s < self.grating0.z_pos):
            raise DomainError(
                f"source must precede grating G0: z_s={self.z_s} >= z0={self.grating0.z_pos}"
            )
        if self.x1 is not None and self.grating1 is None:
            raise DomainError("x1 given but no grating 1 in context")
        if self.grating1 is not None and not (self.grating0.z_pos < self.grating1.z_pos):
            raise DomainError("grating 1 must lie behind grating 0")

    @property
    def lam(self) -> float:
        return self.particle.lambda_dB


def free_kernel(x_b, t_b: float, x_a, t_a: float, particle: Particle):
    """Free-particle propagator between two spacetime points.

    Accepts scalars or arrays for the positions.  This is the only physics
    input of the quadrature oracle.
    """
    dt = t_b - t_a
    if not (dt > 0.0):
        raise DomainError(f"free kernel needs t_b > t_a, got dt={dt}")
    m = particle.mass
    pref = 1.0 / np.sqrt(2j * math.pi * HBAR * dt / m)
    dx = np.asarray(x_b) - np.asarray(x_a)
    val = pref * np.exp(1j * m * dx * dx / (2.0 * HBAR * dt))
    return complex(val) if np.ndim(val) == 0 else val


def d_term(Sigma0: complex, Sigma1: complex, z0: float, z1: float, z2: float) -> complex:
    """Common divisor D = sqrt(Sigma0*Sigma1 - (z2-z1)/(z1-z0)), principal branch."""
    if not (z1 > z0):
        raise DomainError(f"need z1 > z0, got z0={z0}, z1={z1}")
    arg = complex(Sigma0) * complex(Sigma1) - (z2 - z1) / (z1 - z0)
    if arg == 0:
        raise DomainError("degenerate geometry: D^2 = 0")
    _check_branch(arg)
    return complex(np.sqrt(arg))


def _check_branch(d_squared: complex) -> None:
    # Valid geometries keep D^2 off the negative real axis (Im > 0 whenever a
    # grating has been crossed); a violation means inputs outside the model.
    if d_squared.imag < 0.0 and d_squared.real <= 0.0:
        raise BranchCutError(f"D^2 = {d_squared} crosses the principal branch cut")


def gaussian_slit(xi, b: float):
    """Fuzzy-edged slit form factor exp(-xi^2 / 2 b^2)."""
    xi = np.asarray(xi, dtype=float)
    return np.exp(-(xi * xi) / (2.0 * b * b))


def comb_offsets(K: int) -> np.ndarray:
    """The integer offsets K-(2k-1), k = 1..K."""
    return K - (2.0 * np.arange(1, K + 1) - 1.0)


def comb_form_factor(xi, b: float, eta: float, K: int):
    """Hard-edged slit form factor: K narrow Gaussians tiling the window.

    (1/eta)*sqrt(2/pi) * sum_k exp(-(K*xi - b*(K-(2k-1)))^2 / (2 (b*eta)^2)).
    Its integral is exactly 2b for every (K, eta); at K = 1 it is a single
    Gaussian of standard width b*eta.
    """
    if not (b > 0.0) or not (eta > 0.0) or K < 1:
        raise DomainError(f"need b > 0, eta > 0, K >= 1; got b={b}, eta={eta}, K={K}")
    xi = np.asarray(xi, dtype=float)
    m = comb_offsets(K)
    arg = K * xi[..., None] - b * m
    val = (_SQRT_2_OVER_PI / eta) * np.exp(-(arg * arg) / (2.0 * (b * eta) ** 2)).sum(axis=-1)
    return float(val) if np.ndim(val) == 0 else val


# ---------------------------------------------------------------------------
# Row kernels.  These evaluate the wave function for a whole vector of
# detector positions x (and all slit centers at once); the public single-path
# operations below call them with singleton center arrays so that every code
# path is the same one the grid evaluator uses.
# ---------------------------------------------------------------------------


def reduce_paths(terms: np.ndarray) -> np.ndarray:
    """Deterministic pairwise sum of (paths, nx) terms along the path axis.

    The fold tree depends only on the path count, never on nx, so a scalar
    evaluation and a whole-row evaluation produce bit-identical sums (numpy's
    own reduce picks different accumulation orders for different shapes).
    """
    while terms.shape[0] > 1:
        m = terms.shape[0] // 2
        rest = terms[2 * m:]
        terms = terms[0:2 * m:2] + terms[1:2 * m:2]
        if rest.shape[0]:
            terms = np.concatenate([terms, rest], axis=0)
    return terms[0]


def _sigma0_between(lam: float, z_s: float, z0: float, b0: float, z: float) -> complex:
    real = 1.0 if is_paraxial(z_s) else (z - z_s) / (z0 - z_s)
    return complex(real, lam * (z - z0) / (2.0 * math.pi * b0 * b0))


def _sigma0_behind(lam: float, z_s: float, z0: float, z1: float, b0: float) -> complex:
    real = 1.0 if is_paraxial(z_s) else (z1 - z_s) / (z0 - z_s)
    return complex(real, lam * (z1 - z0) / (2.0 * math.pi * b0 * b0))


def _sigma1_behind(
    lam: float, z0: float, z1: float, b1: float, z: float, comb_scale: float
) -> complex:
    return complex(
        (z - z0) / (z1 - z0),
        lam * (z - z1) / (2.0 * math.pi * b1 * b1) * comb_scale,
    )


# note: 4*pi*sigma0^2 = 2*pi*b^2 since sigma0 = b/sqrt(2); the kernels above
# use the b-form directly.


def between_row(
    lam: float,
    z_s: float,
    x_s: float,
    z0: float,
    b0: float,
    x0s: np.ndarray,
    x: np.ndarray,
    z: float,
) -> np.ndarray:
    """Sum of single-slit between-gratings wave functions over centers x0s.

    Valid for z >= z0 (z == z0 returns the aperture-modulated source wave).
    """
    x0s = np.atleast_1d(np.asarray(x0s, dtype=float))
    x = np.asarray(x, dtype=float)
    paraxial = is_paraxial(z_s)
    dx = x[None, :] - x0s[:, None]

    if paraxial:
        p3 = np.zeros(len(x0s))
        g = np.zeros(len(x0s))
    else:
        p3 = (x0s - x_s) ** 2 / (lam * (z0 - z_s))
        g = (x0s - x_s) / (z0 - z_s)

    if z == z0:
        # Analytic z -> z0 limit: source wave modulated by the G0 aperture.
        c = complex(0.0 if paraxial else 1.0 / (z0 - z_s), lam / (2.0 * math.pi * b0 * b0))
        phase = (1j * math.pi) * ((dx * dx * c + 2.0 * dx * g[:, None]) / lam + p3[:, None])
        return reduce_paths(np.exp(phase))

    if z < z0:
        raise DomainError(f"between-region evaluation needs z >= z0, got z={z}, z0={z0}")

    sig0 = _sigma0_between(lam, z_s, z0, b0, z)
    u = dx - g[:, None] * (z - z0)
    bracket = (dx * dx - u * u / sig0) / (lam * (z - z0)) + p3[:, None]
    psi = reduce_paths(np.exp((1j * math.pi) * bracket))
    return psi / np.sqrt(sig0)


def behind_row(
    lam: float,
    z_s: float,
    x_s: float,
    z0: float,
    z1: float,
    b0: float,
    b1: float,
    x0s: np.ndarray,
    x1s: np.ndarray,
    x: np.ndarray,
    z: float,
    *,
    comb_k: int = 1,
    comb_eta: float = 1.0,
    hard: bool = False,
) -> np.ndarray:
    """Sum of single-path behind-G1 wave functions over all (x1, x0) pairs.

    Covers the standard fuzzy-slit form, the paraxial limit (z_s = -inf) and
    the hard-edged comb form (``hard=True``); z == z1 evaluates the analytic
    limit (incident field times slit transmission).
    """
    x0s = np.atleast_1d(np.asarray(x0s, dtype=float))
    x1s = np.atleast_1d(np.asarray(x1s, dtype=float))
    x = np.asarray(x, dtype=float)
    paraxial = is_paraxial(z_s)
    if z < z1:
        raise DomainError(f"behind-region evaluation needs z >= z1, got z={z}, z1={z1}")

    sig0 = _sigma0_behind(lam, z_s, z0, z1, b0)
    comb_scale = (comb_k / comb_eta) ** 2 if (hard and comb_k > 1) else 1.0
    L10 = lam * (z1 - z0)

    dx10 = x1s[:, None] - x0s[None, :]
    if paraxial:
        u = dx10
        p3 = np.zeros(len(x0s))
    else:
        u = dx10 - ((x0s - x_s) * ((z1 - z0) / (z0 - z_s)))[None, :]
        p3 = (x0s - x_s) ** 2 / (lam * (z0 - z_s))
    p23 = (dx10 * dx10 - u * u / sig0) / L10 + p3[None, :]
    bq = (dx10 - u / sig0) / L10

    dx1 = x[None, :] - x1s[:, None]

    if hard:
        K, eta = comb_k, comb_eta
        mk = comb_offsets(K)
        ck = mk * mk / (2.0 * math.pi * eta * eta)
        fk = K * mk / (2.0 * math.pi * eta * eta * b1)
        pref = _SQRT_2_OVER_PI / eta
    else:
        K = 1
        ck = np.zeros(1)
        fk = np.zeros(1)
        pref = 1.0

    if z == z1:
        # Analytic z -> z1 limit.
        e_lim = complex(
            (sig0 - 1.0) / (z1 - z0)
        ) + 1j * sig0 * lam * comb_scale / (2.0 * math.pi * b1 * b1)
        quad = (dx1 * dx1) * (e_lim / (lam * sig0))
        phase = (
            quad[:, None, None, :]
            + p23[:, :, None, None]
            + (1j * ck)[None, None, :, None]
            + 2.0 * dx1[:, None, None, :] * (bq[:, :, None, None] - (1j * fk)[None, None, :, None])
        )
        terms = np.exp((1j * math.pi) * phase)
        psi = reduce_paths(terms.reshape(-1, x.shape[0]))
        return pref * psi / np.sqrt(sig0)

    sig1 = _sigma1_behind(lam, z0, z1, b1, z, comb_scale)
    d2 = sig0 * sig1 - (z - z1) / (z1 - z0)
    _check_branch(d2)
    d = complex(np.sqrt(d2))
    Lz = lam * (z - z1)
    c_quad = Lz * sig0 / d2

    w = dx1 / Lz
    t1 = dx1 * w

    # The quadratic phase is assembled in place in one (paths, nx) buffer;
    # this is the innermost cost of every grid row.
    if hard:
        acc = np.empty((len(x1s), len(x0s), K, x.shape[0]), dtype=complex)
        np.subtract(
            w[:, None, None, :], bq[:, :, None, None] - (1j * fk)[None, None, :, None],
            out=acc,
        )
        np.multiply(acc, acc, out=acc)
        np.multiply(acc, -c_quad, out=acc)
        acc += t1[:, None, None, :]
        acc += (p23[:, :, None] + (1j * ck)[None, None, :])[:, :, :, None]
    else:
        acc = np.empty((len(x1s), len(x0s), x.shape[0]), dtype=complex)
        np.subtract(w[:, None, :], bq[:, :, None], out=acc)
        np.multiply(acc, acc, out=acc)
        np.multiply(acc, -c_quad, out=acc)
        acc += t1[:, None, :]
        acc += p23[:, :, None]
    np.multiply(acc, 1j * math.pi, out=acc)
    np.exp(acc, out=acc)
    psi = reduce_paths(acc.reshape(-1, x.shape[0]))
    return pref * psi / d


# ---------------------------------------------------------------------------
# Public single-path operations.
# ---------------------------------------------------------------------------


def _as_row(x):
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    return arr, np.ndim(x) == 0


def psi_between(ctx: PathContext, x, z: float):
    """Wave function between the gratings for the path through slit ctx.x0.

    Requires a finite source; z must satisfy z0 <= z (<= z1 when grating 1 is
    present in the context).
    """
    if is_paraxial(ctx.z_s):
        raise DomainError("psi_between needs a finite source; use psi_paraxial")
    _require_between_z(ctx, z)
    xr, scalar = _as_row(x)
    out = between_row(
        ctx.lam, ctx.z_s, ctx.x_s, ctx.grating0.z_pos, ctx.grating0.half_width,
        np.array([ctx.x0]), xr, z,
    )
    return complex(out[0]) if scalar else out


def psi_behind(ctx: PathContext, x, z: float):
    """Wave function behind grating 1 for the path (ctx.x0 -> ctx.x1)."""
    if is_paraxial(ctx.z_s):
        raise DomainError("psi_behind needs a finite source; use psi_paraxial")
    _require_behind(ctx, z)
    xr, scalar = _as_row(x)
    out = behind_row(
        ctx.lam, ctx.z_s, ctx.x_s,
        ctx.grating0.z_pos, ctx.grating1.z_pos,
        ctx.grating0.half_width, ctx.grating1.half_width,
        np.array([ctx.x0]), np.array([ctx.x1]), xr, z,
    )
    return complex(out[0]) if scalar else out


def psi_paraxial(ctx: PathContext, x, z: float):
    """Plane-wave-illumination wave function (source at z_s = -inf).

    The region follows the context: with ctx.x1 set this is the behind-G1
    form, otherwise the single-grating near-field form.
    """
    if not is_paraxial(ctx.z_s):
        raise DomainError("psi_paraxial needs the paraxial source (z_s = -inf)")
    xr, scalar = _as_row(x)
    if ctx.x1 is None:
        _require_between_z(ctx, z)
        out = between_row(
            ctx.lam, ctx.z_s, 0.0, ctx.grating0.z_pos, ctx.grating0.half_width,
            np.array([ctx.x0]), xr, z,
        )
    else:
        _require_behind(ctx, z)
        out = behind_row(
            ctx.lam, ctx.z_s, 0.0,
            ctx.grating0.z_pos, ctx.grating1.z_pos,
            ctx.grating0.half_width, ctx.grating1.half_width,
            np.array([ctx.x0]), np.array([ctx.x1]), xr, z,
        )
    return complex(out[0]) if scalar else out


def psi_hard_edge(ctx: PathContext, x, z: float):
    """Behind-G1 wave function with grating 1's hard-edged comb slits.

    With comb_k = 1 this reduces exactly to sqrt(2/pi)/eta times
    :func:`psi_behind`.
    """
    if is_paraxial(ctx.z_s):
        raise DomainError("psi_hard_edge needs a finite source")
    _require_behind(ctx, z)
    g1 = ctx.grating1
    xr, scalar = _as_row(x)
    out = behind_row(
        ctx.lam, ctx.z_s, ctx.x_s,
        ctx.grating0.z_pos, g1.z_pos,
        ctx.grating0.half_width, g1.half_width,
        np.array([ctx.x0]), np.array([ctx.x1]), xr, z,
        comb_k=g1.comb_k, comb_eta=g1.comb_eta, hard=True,
    )
    return complex(out[0]) if scalar else out


def _require_between_z(ctx: PathContext, z: float) -> None:
    z0 = ctx.grating0.z_pos
    if z < z0:
        raise DomainError(f"between-region point must have z >= z0={z0}, got {z}")
    if ctx.grating1 is not None and z > ctx.grating1.z_pos:
        raise DomainError(
            f"between-region point must have z <= z1={ctx.grating1.z_pos}, got {z}"
        )


def _require_behind(ctx: PathContext, z: float) -> None:
    if ctx.x1 is None or ctx.grating1 is None:
        raise DomainError("behind-region evaluation needs grating 1 and a slit center x1")
    if z < ctx.grating1.z_pos:
        raise DomainError(f"behind-region point must have z >= z1={ctx.grating1.z_pos}, got {z}")
