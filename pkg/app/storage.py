"""
CSV and JSON artifacts written and read by the command line.

Every writer goes through a temporary file in the target directory followed
by an atomic rename, and formats floats with full round-trip precision so
identical inputs give byte-identical files.
"""

import csv
import io
import os
import tempfile
from pathlib import Path

import numpy as np
from pydantic import BaseModel

from app.errors import InvalidArgumentError
from app.physics.classical import ClassicalEnsemble
from app.physics.design import DefectCurve
from app.physics.fringes import FringeDataset
from app.physics.states import Grid, WaveFunction

WAVEFUNCTION_HEADER = ["x_m", "re_amplitude", "im_amplitude"]
CURVE_HEADER = ["scaled_z", "defect"]
DATASET_HEADER = ["x_m", "counts"]
ENSEMBLE_HEADER = ["x0_m", "px_kgms"]


def _fmt(value: float) -> str:
    return repr(float(value))


def write_atomic(path: Path, text: str) -> Path:
    """Write text to path via a temporary sibling and os.replace."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    return path


def _write_rows(path: Path, header: list[str], rows) -> Path:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return write_atomic(path, buffer.getvalue())


def _read_rows(path: Path, header: list[str]) -> list[list[str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        found = next(reader, None)
        if found != header:
            raise InvalidArgumentError(f"{path}: expected header {','.join(header)}, found {found}.")
        return [row for row in reader if row]


def write_json(path: Path, model: BaseModel) -> Path:
    return write_atomic(path, model.model_dump_json(indent=2) + "\n")


def read_json(path: Path, model_type: type[BaseModel]) -> BaseModel:
    return model_type.model_validate_json(Path(path).read_text(encoding="utf-8"))


# --- WaveFunction ---


def write_wavefunction(path: Path, psi: WaveFunction) -> Path:
    rows = (
        (_fmt(x), _fmt(a.real), _fmt(a.imag)) for x, a in zip(psi.grid.positions, psi.amplitudes, strict=True)
    )
    return _write_rows(path, WAVEFUNCTION_HEADER, rows)


def read_wavefunction(path: Path) -> WaveFunction:
    raw = _read_rows(path, WAVEFUNCTION_HEADER)
    if len(raw) < 2:
        raise InvalidArgumentError(f"{path}: a wavefunction needs at least 2 rows, found {len(raw)}.")
    try:
        rows = np.array(raw, dtype=float)
    except ValueError as e:
        raise InvalidArgumentError(f"{path}: malformed wavefunction row ({e}).") from e
    if rows.ndim != 2 or rows.shape[1] != len(WAVEFUNCTION_HEADER):
        raise InvalidArgumentError(f"{path}: every row needs {len(WAVEFUNCTION_HEADER)} columns.")
    x = rows[:, 0]
    spacing = np.diff(x)
    if not np.allclose(spacing, spacing[0], rtol=1e-9):
        raise InvalidArgumentError(f"{path}: positions are not uniformly spaced.")
    grid = Grid(x_min=float(x[0]), n_points=x.size, dx=float((x[-1] - x[0]) / (x.size - 1)))
    return WaveFunction(grid, rows[:, 1] + 1j * rows[:, 2])


# --- DefectCurve ---


def write_curve(path: Path, curve: DefectCurve) -> Path:
    rows = ((_fmt(z), _fmt(d)) for z, d in zip(curve.scaled_z, curve.defect, strict=True))
    return _write_rows(path, CURVE_HEADER, rows)


def read_curve_rows(path: Path) -> tuple[list[float], list[float]]:
    rows = _read_rows(path, CURVE_HEADER)
    return [float(r[0]) for r in rows], [float(r[1]) for r in rows]


# --- FringeDataset ---


def write_dataset(path: Path, data: FringeDataset) -> Path:
    rows = ((_fmt(x), str(int(c))) for x, c in zip(data.positions, data.counts, strict=True))
    return _write_rows(path, DATASET_HEADER, rows)


def read_dataset(path: Path, *, z: float = 0.0, label: str = "") -> FringeDataset:
    rows = _read_rows(path, DATASET_HEADER)
    try:
        positions = [float(r[0]) for r in rows]
        counts = [int(r[1]) for r in rows]
    except (ValueError, IndexError) as e:
        raise InvalidArgumentError(f"{path}: malformed dataset row ({e}).") from e
    return FringeDataset(np.array(positions), np.array(counts), z=z, label=label or Path(path).stem)


# --- ClassicalEnsemble ---


def write_ensemble(path: Path, ens: ClassicalEnsemble) -> Path:
    rows = ((_fmt(x), _fmt(p)) for x, p in zip(ens.x0, ens.px, strict=True))
    return _write_rows(path, ENSEMBLE_HEADER, rows)
