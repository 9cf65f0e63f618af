"""Tests for the .scat and .rec formats, JSON reports and run manifests."""

import json
import tempfile
import unittest
from pathlib import Path

import numpy as np

from src.domain.fields import ScatteringData
from src.domain.grids import PGrid, SphereGrid
from src.errors import (
    CorruptFieldError,
    DimensionMismatchError,
    EnergyMismatchError,
    FormatError,
    TruncatedDataError,
    VersionMismatchError,
)
from src.io_formats import (
    read_reconstruction,
    read_scattering,
    verify_manifest,
    write_manifest,
    write_reconstruction,
    write_scattering,
)
from src.models import RunConfig


def random_data(E=4.0, n_sphere=4, seed=0):
    grid = SphereGrid(E, n_sphere)
    rng = np.random.default_rng(seed)
    n = len(grid)
    f = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return ScatteringData(E, grid, f)


class TestScatteringFile(unittest.TestCase):
    """Test reading and writing scattering data."""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)
        self.data = random_data()

    def tearDown(self):
        self.tmp.cleanup()

    def test_binary_exact(self):
        """Binary files reproduce every bit."""
        path = write_scattering(str(self.dir / "f.scat"), self.data)
        back = read_scattering(str(path), expected_E=4.0)
        np.testing.assert_array_equal(back.f, self.data.f)
        self.assertEqual(len(back.grid), len(self.data.grid))

    def test_csv_close(self):
        """CSV files keep 17 significant digits."""
        path = write_scattering(str(self.dir / "f.scat"), self.data, encoding="csv")
        back = read_scattering(str(path))
        np.testing.assert_allclose(back.f, self.data.f, rtol=1e-15, atol=0)

    def test_header(self):
        """The header is one JSON line naming the grid."""
        path = write_scattering(str(self.dir / "f.scat"), self.data)
        header = json.loads(path.read_bytes().split(b"\n", 1)[0])
        self.assertEqual(header["format"], "isct-scat")
        self.assertEqual(header["n_sphere"], 4)
        self.assertEqual(header["n_nodes"], len(self.data.grid))

    def test_energy_mismatch(self):
        """A file for another energy is rejected."""
        path = write_scattering(str(self.dir / "f.scat"), self.data)
        with self.assertRaises(EnergyMismatchError):
            read_scattering(str(path), expected_E=9.0)

    def test_truncated(self):
        """A short body is reported as truncated."""
        path = write_scattering(str(self.dir / "f.scat"), self.data)
        raw = path.read_bytes()
        path.write_bytes(raw[:-16])
        with self.assertRaises(TruncatedDataError):
            read_scattering(str(path))

    def test_trailing_bytes(self):
        """Extra values do not fit the header's grid."""
        path = write_scattering(str(self.dir / "f.scat"), self.data)
        path.write_bytes(path.read_bytes() + b"\0" * 16)
        with self.assertRaises(DimensionMismatchError):
            read_scattering(str(path))

    def test_version_mismatch(self):
        """Unknown format versions are rejected."""
        path = write_scattering(str(self.dir / "f.scat"), self.data)
        head, body = path.read_bytes().split(b"\n", 1)
        header = json.loads(head)
        header["version"] = 99
        path.write_bytes(json.dumps(header).encode("utf-8") + b"\n" + body)
        with self.assertRaises(VersionMismatchError):
            read_scattering(str(path))

    def test_missing_file(self):
        """A missing file is a format error."""
        with self.assertRaises(FormatError):
            read_scattering(str(self.dir / "missing.scat"))

    def test_non_finite_rejected(self):
        """Corrupt data is never written."""
        bad = self.data.with_values(np.full(self.data.f.shape, np.nan))
        with self.assertRaises(CorruptFieldError):
            write_scattering(str(self.dir / "bad.scat"), bad)
        self.assertFalse((self.dir / "bad.scat").exists())


class TestReconstructionFile(unittest.TestCase):
    """Test the .rec format."""

    def test_roundtrip(self):
        """Header and both tables come back."""
        p_grid = PGrid(2.0, 4, np.array([0.0, 0.0, 1.0]), 0.0)
        P = len(p_grid)
        vplus = np.linspace(0.0, 1.0, P) + 0.25j
        vminus = vplus - 0.5j
        x_grid = np.array([[0.0, 0.0, 0.0], [1.0, -1.0, 0.5]])
        v_appr = np.array([0.1, -0.2])
        with tempfile.TemporaryDirectory() as tmp:
            path = write_reconstruction(
                str(Path(tmp) / "out.rec"), {"E": 4.0, "gap": 0.0}, p_grid, vplus, vminus, x_grid, v_appr
            )
            header, vhat_table, v_table = read_reconstruction(str(path))
        self.assertEqual(header["format"], "isct-rec")
        self.assertEqual(header["E"], 4.0)
        self.assertEqual(len(vhat_table), P)
        np.testing.assert_array_equal(vhat_table["re_vhat_plus"].to_numpy(), vplus.real)
        np.testing.assert_array_equal(vhat_table["im_vhat_minus"].to_numpy(), vminus.imag)
        np.testing.assert_array_equal(v_table["v_appr"].to_numpy(), v_appr)
        np.testing.assert_array_equal(v_table[["x", "y", "z"]].to_numpy(), x_grid)


class TestManifest(unittest.TestCase):
    """Test run manifests."""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)
        self.output = self.dir / "out.txt"
        self.output.write_text("result\n")

    def tearDown(self):
        self.tmp.cleanup()

    def test_deterministic(self):
        """The same run gives the same manifest bytes."""
        cfg = RunConfig()
        a = write_manifest(str(self.dir / "a.json"), "verify", cfg, outputs=[str(self.output)]).read_bytes()
        b = write_manifest(str(self.dir / "b.json"), "verify", cfg, outputs=[str(self.output)]).read_bytes()
        self.assertEqual(a, b)

    def test_config_hash(self):
        """Changing a parameter changes the hash."""
        path = write_manifest(str(self.dir / "m.json"), "verify", RunConfig())
        other = write_manifest(str(self.dir / "n.json"), "verify", RunConfig(tau=0.4))
        h1 = json.loads(path.read_text())["config_hash"]
        h2 = json.loads(other.read_text())["config_hash"]
        self.assertNotEqual(h1, h2)

    def test_verify(self):
        """Hashes match until a listed file changes."""
        path = write_manifest(str(self.dir / "m.json"), "verify", RunConfig(), outputs=[str(self.output)])
        self.assertEqual(verify_manifest(str(path)), {"out.txt": True})
        self.output.write_text("tampered\n")
        self.assertEqual(verify_manifest(str(path)), {"out.txt": False})


if __name__ == "__main__":
    unittest.main()
