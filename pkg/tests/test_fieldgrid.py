import numpy as np
import pytest

from tlsim.core import DomainError, GratingSpec, SourceSpec
from tlsim.fieldgrid import (
    DensityField,
    GridSpec,
    cross_section,
    evaluate_grid,
    export_csv,
    export_field,
    export_meta,
    export_pgm,
    export_profile_csv,
    parse_csv,
    read_pgm,
)
from tlsim.scenario import Scenario
from tlsim.superposition import density, superpose_behind, superpose_between


def _scenario(particle, n0=3, n1=2, region="full", z_s=-0.5, **g1_kw):
    g0 = GratingSpec(n0, 500e-9, 37.5e-9, 0.0)
    g1 = GratingSpec(n1, 500e-9, 75e-9, 0.05, **g1_kw)
    src = SourceSpec(kind="point", x_positions=(0.0,), z_s=z_s)
    return Scenario(particle=particle, grating0=g0, grating1=g1, source=src,
                    region=region, propagator="standard")


def _small_grid(region="full"):
    if region == "behind":
        return GridSpec(-2e-6, 2e-6, 0.05, 0.12, 31, 9)
    return GridSpec(-2e-6, 2e-6, 0.0, 0.12, 31, 9)


class TestGridSpec:
    def test_validation(self):
        with pytest.raises(DomainError):
            GridSpec(1.0, 0.0, 0.0, 1.0, 4, 4)
        with pytest.raises(DomainError):
            GridSpec(0.0, 1.0, 1.0, 0.5, 4, 4)
        with pytest.raises(DomainError):
            GridSpec(0.0, 1.0, 0.0, 1.0, 1, 4)

    def test_axes_endpoints_exact(self):
        g = GridSpec(-1e-6, 3e-6, 0.05, 0.06, 17, 11)
        assert g.x_axis()[0] == -1e-6 and g.x_axis()[-1] == 3e-6
        assert g.z_axis()[0] == 0.05 and g.z_axis()[-1] == 0.06


class TestEvaluateGrid:
    def test_two_by_two_single_paths(self, fullerene):
        scn = _scenario(fullerene, n0=1, n1=1, region="behind")
        grid = GridSpec(-1e-6, 1e-6, 0.06, 0.1, 2, 2)
        field = evaluate_grid(scn, grid, workers=1)
        req = scn.request()
        for i, z in enumerate(grid.z_axis()):
            for j, x in enumerate(grid.x_axis()):
                assert field.values[i, j] == density(superpose_behind(req, float(x), float(z)))

    def test_spot_checks_bit_equal(self, fullerene, rng):
        scn = _scenario(fullerene, n0=4, n1=3)
        grid = _small_grid()
        field = evaluate_grid(scn, grid, workers=1)
        req = scn.request()
        xs, zs = grid.x_axis(), grid.z_axis()
        for _ in range(10):
            i = int(rng.integers(0, grid.nz))
            j = int(rng.integers(0, grid.nx))
            z = float(zs[i])
            if z <= scn.z1:
                expect = density(superpose_between(req, float(xs[j]), z))
            else:
                expect = density(superpose_behind(req, float(xs[j]), z))
            assert field.values[i, j] == expect

    def test_symmetric_scenario_mirror_columns(self, fullerene):
        scn = _scenario(fullerene, n0=4, n1=3)
        field = evaluate_grid(scn, _small_grid(), workers=1)
        vals = field.values
        assert np.max(np.abs(vals - vals[:, ::-1])) <= 1e-9 * vals.max()

    def test_parallel_bit_identical(self, fullerene):
        scn = _scenario(fullerene, n0=4, n1=3)
        grid = _small_grid()
        f1 = evaluate_grid(scn, grid, workers=1)
        f2 = evaluate_grid(scn, grid, workers=2)
        f3 = evaluate_grid(scn, grid, workers=3)
        assert np.array_equal(f1.values, f2.values)
        assert np.array_equal(f1.values, f3.values)
        assert f1.fingerprint == f2.fingerprint

    def test_region_grid_mismatch(self, fullerene):
        scn = _scenario(fullerene, region="behind")
        with pytest.raises(DomainError):
            evaluate_grid(scn, _small_grid("full"), workers=1)
        scn_b = _scenario(fullerene, region="between")
        with pytest.raises(DomainError):
            evaluate_grid(scn_b, _small_grid("full"), workers=1)

    def test_boundary_row_uses_between_form_for_full_region(self, fullerene):
        scn = _scenario(fullerene, n0=3, n1=2)
        grid = GridSpec(-1e-6, 1e-6, 0.0, 0.1, 9, 3)  # middle row exactly at z1
        field = evaluate_grid(scn, grid, workers=1)
        req = scn.request()
        x = grid.x_axis()
        expect = density(superpose_between(req, x, 0.05))
        assert np.array_equal(field.values[1], expect)

    def test_boundary_row_uses_behind_limit_for_behind_region(self, fullerene):
        scn = _scenario(fullerene, n0=3, n1=2, region="behind")
        grid = GridSpec(-1e-6, 1e-6, 0.05, 0.1, 9, 3)
        field = evaluate_grid(scn, grid, workers=1)
        req = scn.request()
        x = grid.x_axis()
        expect = density(superpose_behind(req, x, 0.05))
        assert np.array_equal(field.values[0], expect)


class TestCrossSection:
    def _field(self, fullerene):
        scn = _scenario(fullerene, n0=2, n1=2)
        return evaluate_grid(scn, _small_grid(), workers=1)

    def test_first_row(self, fullerene):
        field = self._field(fullerene)
        prof = cross_section(field, field.grid.z_min)
        assert prof.z == field.grid.z_min
        assert np.array_equal(prof.p, field.values[0])

    def test_tie_goes_to_lower_row(self, fullerene):
        field = self._field(fullerene)
        zs = field.grid.z_axis()
        mid = 0.5 * (zs[3] + zs[4])
        prof = cross_section(field, float(mid))
        assert prof.z == zs[3]

    def test_out_of_range(self, fullerene):
        field = self._field(fullerene)
        with pytest.raises(DomainError):
            cross_section(field, 0.2)

    def test_restrict_window(self, fullerene):
        field = self._field(fullerene)
        prof = cross_section(field, 0.08).restrict(-1e-6, 1e-6)
        assert prof.x.min() >= -1e-6 and prof.x.max() <= 1e-6


class TestExports:
    def test_csv_round_trip_bit_exact(self, fullerene, tmp_path):
        scn = _scenario(fullerene, n0=2, n1=2)
        field = evaluate_grid(scn, GridSpec(-1e-6, 1e-6, 0.0, 0.1, 5, 4), workers=1)
        path = tmp_path / "field.csv"
        export_csv(field, path)
        x, z, p = parse_csv(path)
        assert np.array_equal(p.reshape(4, 5), field.values)
        assert np.array_equal(x.reshape(4, 5)[0], field.grid.x_axis())
        assert np.array_equal(z.reshape(4, 5)[:, 0], field.grid.z_axis())

    def test_csv_header(self, fullerene, tmp_path):
        scn = _scenario(fullerene, n0=1, n1=1, region="behind")
        field = evaluate_grid(scn, GridSpec(-1e-6, 1e-6, 0.06, 0.1, 2, 2), workers=1)
        path = tmp_path / "f.csv"
        export_csv(field, path)
        assert path.read_text().splitlines()[0] == "x_m,z_m,p"

    def test_pgm_zero_field(self, tmp_path):
        grid = GridSpec(0.0, 1.0, 0.0, 1.0, 2, 2)
        field = DensityField(grid=grid, values=np.zeros((2, 2)), fingerprint="0" * 64)
        path = tmp_path / "zero.pgm"
        export_pgm(field, path)
        raw = path.read_bytes()
        assert raw.startswith(b"P5\n2 2\n65535\n")
        assert raw[-8:] == b"\x00" * 8
        assert np.array_equal(read_pgm(path), np.zeros((2, 2), dtype=np.uint16))

    def test_pgm_linear_mapping(self, tmp_path):
        grid = GridSpec(0.0, 1.0, 0.0, 1.0, 2, 2)
        vals = np.array([[0.0, 0.25], [0.5, 1.0]])
        field = DensityField(grid=grid, values=vals, fingerprint="0" * 64)
        path = tmp_path / "lin.pgm"
        export_pgm(field, path)
        pix = read_pgm(path)
        assert pix[1, 1] == 65535  # max value pixel saturates
        assert pix[0, 0] == 0
        assert pix[0, 1] == round(0.25 * 65535)
        # monotone: sorted densities give sorted pixels
        order = np.argsort(vals.ravel())
        assert np.all(np.diff(pix.ravel()[order].astype(int)) >= 0)

    def test_pgm_log_mapping(self, tmp_path):
        grid = GridSpec(0.0, 1.0, 0.0, 1.0, 2, 2)
        vals = np.array([[1.0, 1e-2], [1e-5, 0.0]])
        field = DensityField(grid=grid, values=vals, fingerprint="0" * 64)
        path = tmp_path / "log.pgm"
        export_pgm(field, path, log_scale=True)
        pix = read_pgm(path)
        assert pix[0, 0] == 65535
        assert pix[0, 1] == round(0.5 * 65535)  # two decades down over a 4-decade range
        assert pix[1, 0] == 0  # below the 4-decade floor
        assert pix[1, 1] == 0  # exact zero maps to black

    def test_meta_contains_fingerprint_and_echo(self, fullerene, tmp_path):
        scn = _scenario(fullerene, n0=2, n1=2)
        field = evaluate_grid(scn, GridSpec(-1e-6, 1e-6, 0.0, 0.1, 3, 3), workers=1)
        path = tmp_path / "meta.txt"
        export_meta(field, scn, path, extra={"note": "smoke"})
        text = path.read_text()
        assert f"fingerprint = {field.fingerprint}" in text
        assert f"particle.lambda = {5e-12:.17g}" in text
        assert "grid.nx = 3" in text
        assert "note = smoke" in text

    def test_fingerprint_stable_and_sensitive(self, fullerene):
        scn = _scenario(fullerene, n0=2, n1=2)
        grid = GridSpec(-1e-6, 1e-6, 0.0, 0.1, 3, 3)
        f1 = evaluate_grid(scn, grid, workers=1)
        f2 = evaluate_grid(scn, grid, workers=2)
        assert f1.fingerprint == f2.fingerprint
        other = evaluate_grid(_scenario(fullerene, n0=3, n1=2), grid, workers=1)
        assert other.fingerprint != f1.fingerprint

    def test_export_field_dispatch(self, fullerene, tmp_path):
        scn = _scenario(fullerene, n0=1, n1=1, region="behind")
        field = evaluate_grid(scn, GridSpec(-1e-6, 1e-6, 0.06, 0.1, 2, 2), workers=1)
        export_field(field, "csv", tmp_path / "a.csv")
        export_field(field, "pgm", tmp_path / "a.pgm")
        export_field(field, "meta", tmp_path / "a.txt", scn=scn)
        with pytest.raises(DomainError):
            export_field(field, "bmp", tmp_path / "a.bmp")
        with pytest.raises(DomainError):
            export_field(field, "meta", tmp_path / "b.txt")

    def test_io_error_carries_path(self, fullerene):
        scn = _scenario(fullerene, n0=1, n1=1, region="behind")
        field = evaluate_grid(scn, GridSpec(-1e-6, 1e-6, 0.06, 0.1, 2, 2), workers=1)
        with pytest.raises(IOError, match="no/such/dir"):
            export_csv(field, "no/such/dir/f.csv")

    def test_profile_csv(self, fullerene, tmp_path):
        scn = _scenario(fullerene, n0=2, n1=2)
        field = evaluate_grid(scn, _small_grid(), workers=1)
        prof = cross_section(field, 0.1)
        path = tmp_path / "prof.csv"
        export_profile_csv(prof, path)
        lines = path.read_text().splitlines()
        assert lines[1] == "x_m,p"
        assert len(lines) == 2 + len(prof.x)


class TestWorkerDefaults:
    def test_env_variable_sets_default(self, monkeypatch):
        from tlsim.fieldgrid import default_workers

        monkeypatch.setenv("TLSIM_THREADS", "3")
        assert default_workers() == 3
        monkeypatch.setenv("TLSIM_THREADS", "zero")
        with pytest.raises(DomainError):
            default_workers()
        monkeypatch.setenv("TLSIM_THREADS", "0")
        with pytest.raises(DomainError):
            default_workers()
        monkeypatch.delenv("TLSIM_THREADS")
        assert default_workers() >= 1


class TestProfileIntegrals:
    def test_jet_cross_sections_conserve_flux(self, fullerene):
        # profiles taken right at the slit exit, at the waist and past it
        # integrate to nearly the same flux
        scn = Scenario(
            particle=fullerene,
            grating0=GratingSpec(4, 500e-9, 37.5e-9, 0.0),
            grating1=GratingSpec(5, 500e-9, 75e-9, 0.05, comb_k=64, comb_eta=1.5),
            source=SourceSpec(kind="point", x_positions=(0.0,), z_s=-0.5),
            region="behind",
            propagator="hard-edge",
        )
        grid = GridSpec(-250e-9, 250e-9, 0.05, 0.06, 257, 101)
        field = evaluate_grid(scn, grid, workers=2)
        zt = scn.z_talbot
        integrals = [cross_section(field, f * zt).integral() for f in (0.5, 0.513, 0.55)]
        spread = (max(integrals) - min(integrals)) / max(integrals)
        assert spread < 0.05
