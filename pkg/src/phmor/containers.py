"""On-disk model containers.

A model is stored as a directory holding a plain-text ``manifest.txt``
(``key = value`` lines, ``#`` comments) and one Matrix Market file per
system matrix (``E.mtx`` ... ``N.mtx``).  All-zero matrices may be
omitted; their shapes are reconstructed from the manifest.  Reduced
models additionally record their metadata (method, passivity flag,
polynomial part, augmentation) so that a round trip preserves the
transfer function exactly.
"""

from __future__ import annotations

import pathlib

import numpy as np
import scipy.io
import scipy.sparse as sp

from .linalg import LinAlgContractError
from .systems import PHDAESystem

__all__ = [
    "read_manifest",
    "write_manifest",
    "save_phdae",
    "load_phdae",
    "load_phdae_sparse",
    "save_reduced",
    "load_reduced",
]

_MATRIX_NAMES = ("E", "J", "R", "B", "P", "S", "N")


def write_manifest(path, entries):
    lines = ["# phmor model manifest"]
    for key, value in entries.items():
        lines.append(f"{key} = {value}")
    pathlib.Path(path).write_text("\n".join(lines) + "\n")


def read_manifest(path):
    entries = {}
    for raw in pathlib.Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise LinAlgContractError(f"malformed manifest line: {raw!r}")
        key, _, value = line.partition("=")
        entries[key.strip()] = value.strip()
    return entries


def _shape_of(name, n, m):
    return {
        "E": (n, n), "J": (n, n), "R": (n, n),
        "B": (n, m), "P": (n, m), "S": (m, m), "N": (m, m),
        "P0": (m, m), "P1": (m, m),
    }[name]


def _write_matrix(directory, name, M, omit_zero=True):
    if sp.issparse(M):
        if omit_zero and M.nnz == 0:
            return
        scipy.io.mmwrite(str(directory / f"{name}.mtx"), M)
    else:
        M = np.atleast_2d(np.asarray(M))
        if omit_zero and not np.any(M):
            return
        scipy.io.mmwrite(str(directory / f"{name}.mtx"), M)


def _read_matrix(directory, name, shape, sparse=False):
    f = directory / f"{name}.mtx"
    if not f.exists():
        return sp.csr_matrix(shape) if sparse else np.zeros(shape)
    M = scipy.io.mmread(str(f))
    if sparse:
        return sp.csr_matrix(M)
    M = M.toarray() if sp.issparse(M) else np.asarray(M)
    if M.shape != shape:
        raise LinAlgContractError(
            f"{name}.mtx has shape {M.shape}, manifest implies {shape}"
        )
    return M


def save_phdae(path, system, extra=None):
    """Write a pHDAE to a directory container.

    ``system`` is a :class:`PHDAESystem` or a dict of (dense or sparse)
    matrices keyed E, J, R, B, P, S, N.  ``extra`` entries (for example
    ``n1`` or ``index``) are merged into the manifest.
    """
    directory = pathlib.Path(path)
    directory.mkdir(parents=True, exist_ok=True)
    if isinstance(system, PHDAESystem):
        mats = {name: getattr(system, name) for name in _MATRIX_NAMES}
        n, m = system.n, system.m
        fmt = "dense"
    else:
        mats = {name: system[name] for name in _MATRIX_NAMES}
        n = mats["E"].shape[0]
        m = mats["B"].shape[1]
        fmt = "sparse" if sp.issparse(mats["E"]) else "dense"
        if "n1" in system and extra is not None and "n1" not in extra:
            extra = dict(extra, n1=system["n1"])
        elif "n1" in system and extra is None:
            extra = {"n1": system["n1"]}
    manifest = {"kind": "phdae", "n": n, "m": m, "format": fmt}
    if extra:
        manifest.update(extra)
    write_manifest(directory / "manifest.txt", manifest)
    for name, M in mats.items():
        _write_matrix(directory, name, M)
    return directory


def _load_matrices(directory, sparse):
    manifest = read_manifest(directory / "manifest.txt")
    n, m = int(manifest["n"]), int(manifest["m"])
    mats = {
        name: _read_matrix(directory, name, _shape_of(name, n, m), sparse=sparse)
        for name in _MATRIX_NAMES
    }
    return mats, manifest


def load_phdae(path):
    """Load a container as a dense :class:`PHDAESystem`.

    Returns ``(system, manifest)``; manifest values are strings except
    for the reconstructed n/m.
    """
    directory = pathlib.Path(path)
    mats, manifest = _load_matrices(directory, sparse=False)
    sys = PHDAESystem(**mats)
    return sys, manifest


def load_phdae_sparse(path):
    """Load a container as a dict of CSR matrices plus the manifest."""
    directory = pathlib.Path(path)
    mats, manifest = _load_matrices(directory, sparse=True)
    if "n1" in manifest:
        mats["n1"] = int(manifest["n1"])
    return mats, manifest


def save_reduced(path, model):
    """Write a reduced model (matrices, metadata, polynomial part)."""
    directory = pathlib.Path(path)
    directory.mkdir(parents=True, exist_ok=True)
    sys = model.system
    manifest = {
        "kind": "reduced",
        "n": sys.n,
        "m": sys.m,
        "format": "dense",
        "method": model.method,
        "ph_valid": int(model.ph_valid),
        "w_min_eig": repr(model.w_min_eig),
        "augmented_input": int(model.augmented_input),
    }
    write_manifest(directory / "manifest.txt", manifest)
    for name in _MATRIX_NAMES:
        _write_matrix(directory, name, getattr(sys, name))
    _write_matrix(directory, "P0", model.polynomial.P0)
    _write_matrix(directory, "P1", model.polynomial.P1)
    return directory


def load_reduced(path):
    """Round-trip counterpart of :func:`save_reduced`."""
    from .reducers import ReducedModel
    from .transfer import PolynomialPart

    directory = pathlib.Path(path)
    mats, manifest = _load_matrices(directory, sparse=False)
    if manifest.get("kind") != "reduced":
        raise LinAlgContractError(f"{path} does not hold a reduced model")
    m = int(manifest["m"])
    poly = PolynomialPart(
        P0=_read_matrix(directory, "P0", (m, m)),
        P1=_read_matrix(directory, "P1", (m, m)),
    )
    sys = PHDAESystem(**mats)
    return ReducedModel(
        system=sys,
        method=manifest["method"],
        ph_valid=bool(int(manifest["ph_valid"])),
        w_min_eig=float(manifest["w_min_eig"]),
        polynomial=poly,
        augmented_input=bool(int(manifest["augmented_input"])),
    )
