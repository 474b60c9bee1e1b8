"""Figure-reproduction presets and their drivers.

Each preset is a complete flat configuration (same keys as the config file
format) plus a driver kind: plain density fields, coherence profiles/sweeps,
the wavelength resonance scan, cross-section profile sets, and the
focusing-contrast series.  Output files land in the chosen directory as
``<preset>.<kind>.<ext>`` and the key scalar results go to standard output.
"""

from __future__ import annotations

import dataclasses
import os

import numpy as np

from .coherence import (
    CoherenceKernelSpec,
    coherence_sweep,
    density_profile,
    fringe_metrics,
    focusing_contrast,
    gsm_average,
    resonance_scan,
    source_field_matrix,
)
from .config import SCHEMA, build_run_config
from .core import DomainError, centered_axis
from .fieldgrid import (
    Profile,
    cross_section,
    evaluate_grid,
    export_csv,
    export_meta,
    export_pgm,
    export_profile_csv,
)
from .scenario import Scenario, fingerprint, scenario_lines


def default_values() -> dict:
    vals = {}
    for key, (conv, default, required, unit, help_) in SCHEMA.items():
        if not required:
            vals[key] = default
    return vals


def _preset_values(overrides: dict) -> dict:
    vals = default_values()
    vals["particle.lambda"] = 5e-12
    vals.update(overrides)
    return vals


_UM = 1e-6
_NM = 1e-9
_PM = 1e-12

_PARAXIAL = float("-inf")

# Small-grating hard-edge base (4 and 5 slits, eta = 1.5).
_HARD_BASE = {
    "grating0.slits": 4,
    "grating1.slits": 5,
    "grating1.comb_eta": 1.5,
    "scenario.propagator": "hard-edge",
    "grid.x_min": -3e-6,
    "grid.x_max": 3e-6,
}

_SLIT_ZOOM = {
    "scenario.region": "behind",
    "grid.x_min": -250 * _NM,
    "grid.x_max": 250 * _NM,
    "grid.z_min": 0.05,
    "grid.z_max": 0.06,
    "grid.nx": 512,
    "grid.nz": 400,
}

PRESETS: dict[str, dict] = {
    "fig4a": {
        "kind": "field",
        "note": "two-grating density, point source on axis",
        "config": {},
    },
    "fig4b": {
        "kind": "field",
        "note": "point source shifted to +2 um",
        "config": {"source.xs": 2 * _UM},
    },
    "fig4c": {
        "kind": "field",
        "note": "point source shifted to +4 um",
        "config": {"source.xs": 4 * _UM},
    },
    "fig5a": {
        "kind": "field",
        "note": "33-source coherent beam, sigma_I = 10 um",
        "config": {"source.kind": "line", "source.sigma_i": 10 * _UM},
    },
    "fig5b": {
        "kind": "field",
        "note": "33-source almost coherent beam, sigma_I = 1 um",
        "config": {"source.kind": "line", "source.sigma_i": 1 * _UM},
    },
    "fig5c": {
        "kind": "field",
        "note": "33-source almost noncoherent beam, sigma_I = 0.3 um",
        "config": {"source.kind": "line", "source.sigma_i": 0.3 * _UM},
    },
    "fig6": {
        "kind": "gsm-profiles",
        "note": "fringe cross-sections at z = zT for sigma_I = 1 um and 0.1 um",
        "config": {"source.kind": "line"},
        "sigmas": (1 * _UM, 0.1 * _UM),
    },
    "fig7": {
        "kind": "sigma-sweep",
        "note": "pedestal and visibility vs coherence width",
        "config": {"source.kind": "line"},
        "sigmas": tuple(np.logspace(-2, 2, 17) * _UM),
    },
    "fig8a": {
        "kind": "field",
        "note": "close source (zs = -0.5 m), divergent ray groups",
        "config": {"grid.z_max": 0.2},
    },
    "fig8b": {
        "kind": "field",
        "note": "remote source (zs = -50 m), near-paraxial carpet",
        "config": {"source.zs": -50.0, "grid.z_max": 0.2},
    },
    "fig9": {
        "kind": "field",
        "note": "paraxial Talbot carpet, 64/63 slits",
        "config": {
            "source.zs": _PARAXIAL,
            "grating0.slits": 64,
            "grating1.slits": 63,
            "grid.x_min": -18 * _UM,
            "grid.x_max": 18 * _UM,
        },
    },
    "fig10a": {
        "kind": "field",
        "note": "paraxial two-grating field at 3 pm",
        "config": {
            "source.zs": _PARAXIAL,
            "particle.lambda": 3 * _PM,
            "grating0.slits": 8,
            "grating1.slits": 9,
            "grid.x_min": -4 * _UM,
            "grid.x_max": 4 * _UM,
        },
    },
    "fig10b": {
        "kind": "field",
        "note": "paraxial two-grating field at 5 pm (resonance)",
        "config": {
            "source.zs": _PARAXIAL,
            "grating0.slits": 8,
            "grating1.slits": 9,
            "grid.x_min": -4 * _UM,
            "grid.x_max": 4 * _UM,
        },
    },
    "fig10c": {
        "kind": "field",
        "note": "paraxial two-grating field at 7 pm",
        "config": {
            "source.zs": _PARAXIAL,
            "particle.lambda": 7 * _PM,
            "grating0.slits": 8,
            "grating1.slits": 9,
            "grid.x_min": -4 * _UM,
            "grid.x_max": 4 * _UM,
        },
    },
    "fig11": {
        "kind": "resonance",
        "note": "emittance P_max at the detector vs wavelength/velocity",
        "config": {
            "source.zs": _PARAXIAL,
            "grating0.slits": 8,
            "grating1.slits": 9,
        },
        "lambdas": tuple(3e-12 + 0.25e-12 * k for k in range(17)),
    },
    "fig12": {
        "kind": "spectral-field",
        "note": "wavelength-averaged density, mean 5 pm, sigma_g 2.25 pm",
        "config": {
            "source.zs": _PARAXIAL,
            "grating0.slits": 8,
            "grating1.slits": 9,
            "spectral.enabled": True,
            "grid.x_min": -4 * _UM,
            "grid.x_max": 4 * _UM,
        },
    },
    "fig14a": {
        "kind": "field",
        "note": "hard-edged G1, K1 = 1",
        "config": dict(_HARD_BASE, **{"grating1.comb_k": 1}),
    },
    "fig14b": {
        "kind": "field",
        "note": "hard-edged G1, K1 = 4",
        "config": dict(_HARD_BASE, **{"grating1.comb_k": 4}),
    },
    "fig14c": {
        "kind": "field",
        "note": "hard-edged G1, K1 = 16",
        "config": dict(_HARD_BASE, **{"grating1.comb_k": 16}),
    },
    "fig15a": {
        "kind": "field",
        "note": "central-slit jet, K1 = 16",
        "config": dict(_HARD_BASE, **_SLIT_ZOOM, **{"grating1.comb_k": 16}),
    },
    "fig15b": {
        "kind": "field",
        "note": "central-slit jet, K1 = 64",
        "config": dict(_HARD_BASE, **_SLIT_ZOOM, **{"grating1.comb_k": 64}),
    },
    "fig16": {
        "kind": "profiles",
        "note": "density profiles at z/zT = 0.5, 0.513, 0.55 (K1 = 64)",
        "config": dict(_HARD_BASE, **_SLIT_ZOOM, **{"grating1.comb_k": 64}),
        "z_fractions": (0.5, 0.513, 0.55),
    },
    "fig17": {
        "kind": "contrast",
        "note": "profile difference p(zb) - p(za) across the beam waist vs K1",
        "config": dict(_HARD_BASE, **_SLIT_ZOOM, **{"grating1.comb_k": 16}),
        "k_list": (1, 2, 4, 8, 16),
        "z_fractions": (0.5, 0.513),
    },
    "fig19a": {
        "kind": "field",
        "note": "single hard-edged slit, K1 = 7, eta = 0.2",
        "config": None,  # filled below
    },
    "fig19b": {"kind": "field", "note": "K1 = 7, eta = 0.5", "config": None},
    "fig19c": {"kind": "field", "note": "K1 = 7, eta = 0.8", "config": None},
    "fig19d": {"kind": "field", "note": "K1 = 7, eta = 1.1", "config": None},
}


def _fig19(eta: float) -> dict:
    return {
        "grating0.slits": 2,
        "grating1.slits": 1,
        "grating1.comb_k": 7,
        "grating1.comb_eta": eta,
        "scenario.propagator": "hard-edge",
        "scenario.region": "behind",
        "grid.x_min": -125 * _NM,
        "grid.x_max": 125 * _NM,
        "grid.z_min": 0.05,
        "grid.z_max": 0.054,
        "grid.nx": 512,
        "grid.nz": 320,
    }


PRESETS["fig19a"]["config"] = _fig19(0.2)
PRESETS["fig19b"]["config"] = _fig19(0.5)
PRESETS["fig19c"]["config"] = _fig19(0.8)
PRESETS["fig19d"]["config"] = _fig19(1.1)


def preset_names() -> list[str]:
    return sorted(PRESETS)


def preset_run_config(name: str, nx: int | None = None, nz: int | None = None):
    if name not in PRESETS:
        raise DomainError(
            f"unknown preset {name!r}; available: {', '.join(preset_names())}"
        )
    vals = _preset_values(PRESETS[name]["config"])
    if nx is not None:
        vals["grid.nx"] = nx
    if nz is not None:
        vals["grid.nz"] = nz
    return build_run_config(vals)


def _write_sweep_csv(path, header: str, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def _meta_for(scn: Scenario, path, note: str, extra_lines: list[str]) -> None:
    lines = scenario_lines(scn) + extra_lines
    lines.append(f"note = {note}")
    lines.append(f"fingerprint = {fingerprint(scn, extra_lines)}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def run_preset(
    name: str,
    out_dir,
    *,
    threads: int | None = None,
    nx: int | None = None,
    nz: int | None = None,
    log_scale: bool = False,
    echo=print,
) -> list[str]:
    """Run one preset, writing its outputs under ``out_dir``.

    Returns the list of file paths written.  ``nx``/``nz`` shrink or enlarge
    the evaluation grid of field presets (profile/sweep presets have fixed
    sampling).
    """
    entry = PRESETS.get(name)
    if entry is None:
        raise DomainError(
            f"unknown preset {name!r}; available: {', '.join(preset_names())}"
        )
    os.makedirs(out_dir, exist_ok=True)
    rc = preset_run_config(name, nx=nx, nz=nz)
    scn, grid = rc.scenario, rc.grid
    kind = entry["kind"]
    note = entry["note"]
    written: list[str] = []

    def path(kind_ext: str) -> str:
        p = os.path.join(out_dir, f"{name}.{kind_ext}")
        written.append(p)
        return p

    if kind in ("field", "spectral-field"):
        field = evaluate_grid(scn, grid, workers=threads)
        if "csv" in rc.formats:
            export_csv(field, path("field.csv"))
        if "pgm" in rc.formats:
            export_pgm(field, path("field.pgm"), log_scale=log_scale or rc.log_scale)
        if "meta" in rc.formats:
            export_meta(field, scn, path("meta.txt"), extra={"note": note})
        echo(f"{name}: p_min={field.p_min:.6g} p_max={field.p_max:.6g}")
        if kind == "spectral-field":
            z_det = scn.z0 + scn.z_talbot
            if grid.z_min <= z_det <= grid.z_max:
                prof = cross_section(field, z_det)
                lo, hi = scn.metrics_window()
                v_avg = fringe_metrics(prof.restrict(lo, hi).p).visibility
                mono = dataclasses.replace(
                    scn,
                    source=dataclasses.replace(scn.source, spectral=None),
                )
                x = prof.restrict(lo, hi).x
                v_mono = fringe_metrics(density_profile(mono, x, prof.z)).visibility
                echo(f"{name}: V(averaged)={v_avg:.4f} V(monochromatic)={v_mono:.4f}")
        return written

    if kind == "gsm-profiles":
        z = scn.z0 + scn.z_talbot
        lo, hi = scn.metrics_window()
        x = centered_axis(lo, hi, 2048)
        F = source_field_matrix(scn, x, z)
        extra = [f"profile.z = {z:.17g}", "profile.samples = 2048"]
        for sigma in entry["sigmas"]:
            spec = CoherenceKernelSpec(
                sigma_I=sigma, x_positions=scn.source.x_positions, z_s=scn.source.z_s
            )
            p = gsm_average(F, spec)
            met = fringe_metrics(p)
            tag = f"sigma{sigma / _UM:g}um"
            export_profile_csv(Profile(z=z, x=x, p=p), path(f"profile_{tag}.csv"))
            echo(
                f"{name}: sigma_I={sigma:.3g} m  P_min={met.p_min:.6g} "
                f"P_max={met.p_max:.6g} V={met.visibility:.4f}"
            )
        _meta_for(scn, path("meta.txt"), note, extra)
        return written

    if kind == "sigma-sweep":
        rows = coherence_sweep(scn, entry["sigmas"])
        table = [(s, m.p_min, m.p_max, m.visibility) for s, m in rows]
        _write_sweep_csv(path("sweep.csv"), "sigma_i_m,p_min,p_max,visibility", table)
        echo(f"{name}: sigma_I(m)  P_min  P_max  V")
        for s, pmin, pmax, vis in table:
            echo(f"{name}: {s:.6g}  {pmin:.6g}  {pmax:.6g}  {vis:.4f}")
        _meta_for(scn, path("meta.txt"), note, [f"sweep.z = {scn.z0 + scn.z_talbot:.17g}"])
        return written

    if kind == "resonance":
        rows = resonance_scan(scn, entry["lambdas"])
        _write_sweep_csv(path("sweep.csv"), "lambda_m,velocity_mps,p_max", rows)
        echo(f"{name}: lambda(m)  velocity(m/s)  P_max")
        for lam, v, pmax in rows:
            echo(f"{name}: {lam:.6g}  {v:.4g}  {pmax:.6g}")
        best = max(rows, key=lambda r: r[2])
        echo(f"{name}: peak emittance at lambda={best[0]:.6g} m (v={best[1]:.4g} m/s)")
        _meta_for(scn, path("meta.txt"), note, [f"detector.z = {scn.z0 + 2 * (scn.z1 - scn.z0):.17g}"])
        return written

    if kind == "profiles":
        zt = scn.z_talbot
        x = centered_axis(grid.x_min, grid.x_max, 1024)
        extra = []
        for frac in entry["z_fractions"]:
            z = scn.z0 + frac * zt
            p = density_profile(scn, x, z)
            prof = Profile(z=z, x=x, p=p)
            tag = f"z{frac:g}zT"
            export_profile_csv(prof, path(f"profile_{tag}.csv"))
            integral = prof.integral()
            extra.append(f"profile.{tag}.integral = {integral:.17g}")
            echo(f"{name}: z/zT={frac:g}  integral={integral:.6g}  max={p.max():.6g}")
        _meta_for(scn, path("meta.txt"), note, extra)
        return written

    if kind == "contrast":
        zt = scn.z_talbot
        fa, fb = entry["z_fractions"]
        za, zb = scn.z0 + fa * zt, scn.z0 + fb * zt
        x = centered_axis(-125 * _NM, 125 * _NM, 1024)
        b1 = scn.grating1.half_width
        extra = [f"contrast.za = {za:.17g}", f"contrast.zb = {zb:.17g}"]
        for k in entry["k_list"]:
            scn_k = dataclasses.replace(
                scn, grating1=dataclasses.replace(scn.grating1, comb_k=k)
            )
            pa = density_profile(scn_k, x, za)
            pb = density_profile(scn_k, x, zb)
            _, dp = focusing_contrast(Profile(za, x, pa), Profile(zb, x, pb))
            with open(path(f"contrast_k{k}.csv"), "w", encoding="utf-8") as fh:
                fh.write("x_m,p_za,p_zb,delta_p\n")
                for j in range(len(x)):
                    fh.write(f"{x[j]:.17g},{pa[j]:.17g},{pb[j]:.17g},{dp[j]:.17g}\n")
            inside = np.abs(x) < b1
            peak = float(dp.max())
            well = float(dp[inside].min())
            extra.append(f"contrast.k{k}.peak = {peak:.17g}")
            extra.append(f"contrast.k{k}.well = {well:.17g}")
            echo(f"{name}: K1={k}  peak={peak:.6g}  well={well:.6g}")
        _meta_for(scn, path("meta.txt"), note, extra)
        return written

    raise DomainError(f"preset {name!r} has unknown kind {kind!r}")
