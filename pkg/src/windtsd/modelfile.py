"""Self-contained binary container for reduced models and ensembles.

Layout (all integers little-endian)::

    magic        8 bytes   b"WTSDMDL\\0" (model) or b"WTSDENS\\0" (ensemble)
    version      uint32    FORMAT_VERSION
    n_arrays     uint32
    text_len     uint32
    text         text_len bytes of UTF-8 "key = value" lines (config echo,
                 source checksum, free metadata)
    n_arrays times:
        name_len uint16, name (ASCII)
        ndim     uint8,  dims (ndim x uint64)
        data     prod(dims) IEEE-754 binary64, little-endian, C order
    checksum     32 bytes  SHA-256 of every preceding byte

Model arrays: ``header`` = [M, n_intervals, nz, nx, n_realizations,
inner_product], ``grid/z_levels``, ``grid/scalars`` = [nx, dx, interval_s],
``vbar``, ``T``, ``mu``, optional ``temporal_covariance``, and per temporal
mode ``i``: ``mode<i>/abar``, ``/lam``, ``/X``, ``/xi``, ``/h``, ``/sigma``,
``/energy``. No compression; identical content always gives identical bytes.
"""

from __future__ import annotations

import hashlib
import struct
from pathlib import Path

import numpy as np

from .density import KdeModel
from .errors import CorruptModel, UnsupportedVersion
from .ingest import SnapshotGrid, VelocityEnsemble
from .synth import ModeTerms, ReducedModel

MODEL_MAGIC = b"WTSDMDL\x00"
ENSEMBLE_MAGIC = b"WTSDENS\x00"
FORMAT_VERSION = 1
_DIGEST = 32


def encode(magic: bytes, text: str, arrays: dict[str, np.ndarray]) -> bytes:
    tb = text.encode("utf-8")
    parts = [magic, struct.pack("<III", FORMAT_VERSION, len(arrays), len(tb)), tb]
    for name, arr in arrays.items():
        a = np.ascontiguousarray(arr, dtype="<f8")
        nb = name.encode("ascii")
        parts.append(struct.pack("<H", len(nb)) + nb)
        parts.append(struct.pack("<B", a.ndim) + struct.pack(f"<{a.ndim}Q", *a.shape))
        parts.append(a.tobytes())
    body = b"".join(parts)
    return body + hashlib.sha256(body).digest()


def decode(blob: bytes, magic: bytes, source: str = "file") -> tuple[str, dict[str, np.ndarray]]:
    if len(blob) < len(magic) + 12 + _DIGEST:
        raise CorruptModel(f"{source}: truncated ({len(blob)} bytes)")
    if blob[: len(magic)] != magic:
        raise CorruptModel(f"{source}: bad magic bytes {blob[:len(magic)]!r}")
    version, n_arrays, text_len = struct.unpack_from("<III", blob, len(magic))
    if version != FORMAT_VERSION:
        raise UnsupportedVersion(f"{source}: format version {version}, this build reads {FORMAT_VERSION}")
    body, digest = blob[:-_DIGEST], blob[-_DIGEST:]
    if hashlib.sha256(body).digest() != digest:
        raise CorruptModel(f"{source}: checksum mismatch (truncated or modified)")
    pos = len(magic) + 12
    try:
        text = body[pos : pos + text_len].decode("utf-8")
        pos += text_len
        arrays = {}
        for _ in range(n_arrays):
            (nl,) = struct.unpack_from("<H", body, pos)
            pos += 2
            name = body[pos : pos + nl].decode("ascii")
            pos += nl
            (ndim,) = struct.unpack_from("<B", body, pos)
            pos += 1
            shape = struct.unpack_from(f"<{ndim}Q", body, pos)
            pos += 8 * ndim
            count = int(np.prod(shape, dtype=np.int64))
            if pos + 8 * count > len(body):
                raise CorruptModel(f"{source}: array {name!r} runs past end of file")
            arrays[name] = np.frombuffer(body, dtype="<f8", count=count, offset=pos).reshape(shape).astype(float)
            pos += 8 * count
    except (struct.error, UnicodeDecodeError, ValueError) as exc:
        raise CorruptModel(f"{source}: malformed layout ({exc})") from None
    if pos != len(body):
        raise CorruptModel(f"{source}: {len(body) - pos} trailing bytes")
    return text, arrays


def parse_text(text: str) -> dict[str, str]:
    out = {}
    for line in text.splitlines():
        if "=" in line:
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out


def _grid_arrays(grid: SnapshotGrid) -> dict[str, np.ndarray]:
    return {
        "grid/z_levels": grid.z_levels,
        "grid/scalars": np.array([grid.nx, grid.dx, grid.interval_s], dtype=float),
    }


def _grid_from(arrays) -> SnapshotGrid:
    nx, dx, interval = arrays["grid/scalars"]
    return SnapshotGrid(arrays["grid/z_levels"], int(nx), float(dx), float(interval))


def model_to_bytes(model: ReducedModel) -> bytes:
    n_real = max((m.kdes[0].observations.size for m in model.modes if m.kdes), default=0)
    arrays = {
        "header": np.array([model.M, model.n_intervals, *model.grid.shape, n_real, model.inner_product], dtype=float),
        **_grid_arrays(model.grid),
        "vbar": model.vbar,
        "T": model.T,
        "mu": model.mu,
    }
    if model.temporal_covariance is not None:
        arrays["temporal_covariance"] = model.temporal_covariance
    for i, m in enumerate(model.modes):
        p = f"mode{i}/"
        arrays[p + "abar"] = m.abar
        arrays[p + "lam"] = m.lam
        arrays[p + "X"] = m.X
        arrays[p + "xi"] = m.xi_observations.reshape(n_real, m.N)
        arrays[p + "h"] = np.array([k.h for k in m.kdes], dtype=float)
        arrays[p + "sigma"] = np.array([k.sigma_hat for k in m.kdes], dtype=float)
        arrays[p + "energy"] = np.array([m.total_energy])
    lines = [f"source_sha256 = {model.source_hash}"]
    lines += [f"config.{k} = {v}" for k, v in model.config.items()]
    return encode(MODEL_MAGIC, "\n".join(lines) + "\n", arrays)


def model_from_bytes(blob: bytes, source: str = "model") -> ReducedModel:
    text, arrays = decode(blob, MODEL_MAGIC, source)
    try:
        header = arrays["header"]
        M, nt, nz, nx, n_real, ip = (int(v) for v in header)
        grid = _grid_from(arrays)
        modes = []
        for i in range(M):
            p = f"mode{i}/"
            xi = arrays[p + "xi"]
            kdes = []
            for j in range(xi.shape[1]):
                obs = xi[:, j].copy()
                obs.setflags(write=False)
                kdes.append(KdeModel(obs, float(arrays[p + "h"][j]), float(arrays[p + "sigma"][j])))
            modes.append(ModeTerms(arrays[p + "abar"], arrays[p + "lam"], arrays[p + "X"], kdes,
                                   float(arrays[p + "energy"][0])))
    except (KeyError, ValueError, IndexError) as exc:
        raise CorruptModel(f"{source}: missing or malformed array ({exc})") from None
    meta = parse_text(text)
    config = {k[len("config."):]: v for k, v in meta.items() if k.startswith("config.")}
    return ReducedModel(grid, arrays["vbar"], arrays["mu"], arrays["T"], modes, ip, config,
                        meta.get("source_sha256", ""), arrays.get("temporal_covariance"))


def write_model(path: str | Path, model: ReducedModel) -> int:
    blob = model_to_bytes(model)
    Path(path).write_bytes(blob)
    return len(blob)


def read_model(path: str | Path) -> ReducedModel:
    path = Path(path)
    return model_from_bytes(path.read_bytes(), str(path))


def ensemble_to_bytes(ens: VelocityEnsemble, text: str = "") -> bytes:
    return encode(ENSEMBLE_MAGIC, text, {"data": ens.data, **_grid_arrays(ens.grid)})


def write_ensemble(path: str | Path, ens: VelocityEnsemble, text: str = "") -> int:
    blob = ensemble_to_bytes(ens, text)
    Path(path).write_bytes(blob)
    return len(blob)


def read_ensemble(path: str | Path) -> VelocityEnsemble:
    path = Path(path)
    _, arrays = decode(path.read_bytes(), ENSEMBLE_MAGIC, str(path))
    try:
        return VelocityEnsemble(arrays["data"], _grid_from(arrays))
    except KeyError as exc:
        raise CorruptModel(f"{path}: missing array {exc}") from None
