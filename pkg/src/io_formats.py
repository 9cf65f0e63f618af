"""Serialization of scattering data, reconstructions, reports and run manifests.

Every file starts with a one-line JSON header. Writers go through a temp file
and os.replace, so a reader never sees a partial file.
"""

import hashlib
import io
import json
import logging
import os
import tempfile
from importlib import metadata
from pathlib import Path
from typing import Any, Dict, Iterable, Literal, Mapping, Optional, Tuple

import numpy as np
import pandas as pd

import src
from src.domain.fields import ScatteringData
from src.domain.grids import PGrid, SphereGrid
from src.errors import (
    DimensionMismatchError,
    EnergyMismatchError,
    FormatError,
    TruncatedDataError,
    VersionMismatchError,
)
from src.models import RunConfig

logger = logging.getLogger(__name__)

SCAT_FORMAT = "isct-scat"
REC_FORMAT = "isct-rec"
MANIFEST_FORMAT = "isct-manifest"
FORMAT_VERSION = 1
SPHERE_SCHEME = "gauss-legendre-x-uniform"
FLOAT_FORMAT = "%.17g"

Encoding = Literal["binary", "csv"]


def _atomic_write(path: Path, payload: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _split_header(raw: bytes, expected_format: str, path: Path) -> Tuple[Dict[str, Any], bytes]:
    newline = raw.find(b"\n")
    if newline < 0:
        raise TruncatedDataError(f"{path}: missing header line")
    try:
        header = json.loads(raw[:newline].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise FormatError(f"{path}: header is not JSON: {str(e)}") from e
    if not isinstance(header, dict) or header.get("format") != expected_format:
        raise FormatError(f"{path}: not an {expected_format} file")
    if header.get("version") != FORMAT_VERSION:
        raise VersionMismatchError(
            f"{path}: format version {header.get('version')} is not supported (expected {FORMAT_VERSION})"
        )
    return header, raw[newline + 1 :]


def _header_line(header: Mapping[str, Any]) -> bytes:
    return (json.dumps(header, sort_keys=True) + "\n").encode("utf-8")


def write_scattering(path: str, data: ScatteringData, encoding: Encoding = "binary") -> Path:
    """Write f(k, l) as a .scat file.

    Args:
        path: Target file
        data: Scattering data; must be finite
        encoding: "binary" (little-endian float64, re/im interleaved) or "csv"

    Returns:
        The written path
    """
    data.check_finite()
    grid = data.grid
    header = {
        "format": SCAT_FORMAT,
        "version": FORMAT_VERSION,
        "E": data.E,
        "n_sphere": grid.n_polar,
        "scheme": SPHERE_SCHEME,
        "n_nodes": len(grid),
        "encoding": encoding,
    }
    flat = np.ascontiguousarray(data.f).view(np.float64).reshape(-1, 2)
    if encoding == "binary":
        body = flat.astype("<f8").tobytes()
    elif encoding == "csv":
        buf = io.StringIO()
        np.savetxt(buf, flat, fmt=FLOAT_FORMAT, delimiter=",")
        body = buf.getvalue().encode("utf-8")
    else:
        raise FormatError(f"unknown encoding: {encoding}")
    out = Path(path)
    _atomic_write(out, _header_line(header) + body)
    logger.info(f"Wrote {len(grid)}x{len(grid)} scattering matrix to {out} ({encoding})")
    return out


def read_scattering(path: str, expected_E: Optional[float] = None) -> ScatteringData:
    """Read a .scat file.

    Args:
        path: Source file
        expected_E: Configured energy; a different header energy is an error

    Returns:
        ScatteringData on the grid named by the header
    """
    src_path = Path(path)
    if not src_path.is_file():
        raise FormatError(f"data not found: {path}")
    header, body = _split_header(src_path.read_bytes(), SCAT_FORMAT, src_path)
    try:
        E = float(header["E"])
        n_sphere = int(header["n_sphere"])
        n_nodes = int(header["n_nodes"])
        encoding = header["encoding"]
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"{src_path}: incomplete header: {str(e)}") from e
    if header.get("scheme") != SPHERE_SCHEME:
        raise FormatError(f"{src_path}: unknown sphere scheme {header.get('scheme')}")
    if expected_E is not None and abs(E - expected_E) > 1e-12 * max(1.0, abs(expected_E)):
        raise EnergyMismatchError(f"energy mismatch: file has E={E}, config has E={expected_E}")

    grid = SphereGrid(E, n_sphere)
    if len(grid) != n_nodes:
        raise DimensionMismatchError(f"{src_path}: header says {n_nodes} nodes, grid has {len(grid)}")
    n_values = 2 * n_nodes * n_nodes

    if encoding == "binary":
        if len(body) < 8 * n_values:
            raise TruncatedDataError(f"{src_path}: body has {len(body)} bytes, expected {8 * n_values}")
        if len(body) > 8 * n_values:
            raise DimensionMismatchError(f"{src_path}: {len(body) - 8 * n_values} trailing bytes")
        flat = np.frombuffer(body, dtype="<f8").astype(np.float64)
    elif encoding == "csv":
        try:
            flat = np.loadtxt(io.StringIO(body.decode("utf-8")), delimiter=",", ndmin=2).ravel()
        except ValueError as e:
            raise FormatError(f"{src_path}: malformed CSV body: {str(e)}") from e
        if flat.size < n_values:
            raise TruncatedDataError(f"{src_path}: body has {flat.size} values, expected {n_values}")
        if flat.size > n_values:
            raise DimensionMismatchError(f"{src_path}: {flat.size - n_values} extra values")
    else:
        raise FormatError(f"{src_path}: unknown encoding {encoding}")

    f = flat.view(np.complex128).reshape(n_nodes, n_nodes)
    return ScatteringData(E, grid, f)


def _vhat_frame(p_grid: PGrid, vplus: np.ndarray, vminus: np.ndarray) -> pd.DataFrame:
    p = p_grid.nodes
    return pd.DataFrame(
        {
            "p_x": p[:, 0],
            "p_y": p[:, 1],
            "p_z": p[:, 2],
            "re_vhat_plus": np.real(vplus),
            "im_vhat_plus": np.imag(vplus),
            "re_vhat_minus": np.real(vminus),
            "im_vhat_minus": np.imag(vminus),
        }
    )


def _v_frame(x_grid: np.ndarray, v_appr: np.ndarray) -> pd.DataFrame:
    x = np.atleast_2d(x_grid)
    return pd.DataFrame({"x": x[:, 0], "y": x[:, 1], "z": x[:, 2], "v_appr": np.real(v_appr)})


def write_reconstruction(
    path: str,
    header: Mapping[str, Any],
    p_grid: PGrid,
    vplus: np.ndarray,
    vminus: np.ndarray,
    x_grid: np.ndarray,
    v_appr: np.ndarray,
) -> Path:
    """Write a .rec file: JSON header, then "# vhat" and "# v" CSV sections.

    Args:
        path: Target file
        header: E, tau, mu0, norms and gap
        p_grid: Grid carrying vplus and vminus
        vplus, vminus: v-hat_+ and v-hat_- on p_grid.nodes
        x_grid: (X, 3) real-space points
        v_appr: Reconstruction on x_grid
    """
    full_header = {"format": REC_FORMAT, "version": FORMAT_VERSION, **header}
    parts = [
        _header_line(full_header).decode("utf-8"),
        "# vhat\n",
        _vhat_frame(p_grid, vplus, vminus).to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n"),
        "# v\n",
        _v_frame(x_grid, v_appr).to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n"),
    ]
    out = Path(path)
    _atomic_write(out, "".join(parts).encode("utf-8"))
    logger.info(f"Wrote reconstruction to {out}")
    return out


def read_reconstruction(path: str) -> Tuple[Dict[str, Any], pd.DataFrame, pd.DataFrame]:
    """Read a .rec file back into (header, vhat table, v table)."""
    src_path = Path(path)
    if not src_path.is_file():
        raise FormatError(f"reconstruction not found: {path}")
    header, body = _split_header(src_path.read_bytes(), REC_FORMAT, src_path)
    text = body.decode("utf-8")
    if not text.startswith("# vhat\n") or "\n# v\n" not in text:
        raise TruncatedDataError(f"{src_path}: missing vhat or v section")
    vhat_text, v_text = text[len("# vhat\n") :].split("# v\n", 1)
    vhat_table = pd.read_csv(io.StringIO(vhat_text), float_precision="round_trip")
    v_table = pd.read_csv(io.StringIO(v_text), float_precision="round_trip")
    return header, vhat_table, v_table


def write_json_report(path: str, report: Mapping[str, Any]) -> Path:
    """Write a report dictionary as indented, key-sorted JSON."""
    out = Path(path)
    text = json.dumps(report, indent=2, sort_keys=True, default=str) + "\n"
    _atomic_write(out, text.encode("utf-8"))
    return out


def file_sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def package_versions() -> Dict[str, str]:
    """Versions of this package and of the numeric stack."""
    versions = {"isct": src.__version__}
    for name in ("numpy", "scipy", "pandas", "pydantic"):
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "unknown"
    return versions


def write_manifest(
    path: str,
    command: str,
    cfg: RunConfig,
    inputs: Iterable[str] = (),
    outputs: Iterable[str] = (),
) -> Path:
    """Write a manifest with the config hash and SHA-256 of inputs and outputs.

    Paths are stored relative to the manifest directory when possible. No
    timestamps are recorded, so the same run twice gives the same bytes.
    """
    out = Path(path)
    base = out.parent.resolve()

    def entry(name: str) -> Tuple[str, str]:
        p = Path(name).resolve()
        try:
            key = p.relative_to(base).as_posix()
        except ValueError:
            key = p.as_posix()
        return key, file_sha256(p)

    manifest = {
        "format": MANIFEST_FORMAT,
        "version": FORMAT_VERSION,
        "command": command,
        "config_hash": cfg.config_hash(),
        "config": cfg.model_dump(mode="json"),
        "inputs": dict(sorted(entry(p) for p in inputs)),
        "outputs": dict(sorted(entry(p) for p in outputs)),
        "versions": package_versions(),
    }
    return write_json_report(str(out), manifest)


def verify_manifest(path: str) -> Dict[str, bool]:
    """Re-hash every file a manifest names.

    Returns:
        Mapping of file key to True when the file exists and its hash matches
    """
    man_path = Path(path)
    try:
        manifest = json.loads(man_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise FormatError(f"cannot read manifest {path}: {str(e)}") from e
    if manifest.get("format") != MANIFEST_FORMAT:
        raise FormatError(f"{path}: not a manifest")
    if manifest.get("version") != FORMAT_VERSION:
        raise VersionMismatchError(f"{path}: manifest version {manifest.get('version')} is not supported")

    base = man_path.parent
    status: Dict[str, bool] = {}
    for section in ("inputs", "outputs"):
        for key, digest in manifest.get(section, {}).items():
            target = Path(key) if Path(key).is_absolute() else base / key
            status[key] = target.is_file() and file_sha256(target) == digest
    return status
