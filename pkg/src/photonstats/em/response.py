"""Retarded response and spectral-density matrices over a frequency grid.

R_ij(w) = 4 pi C w^2 mu_i mu_j (n_i . G(r_i, r_j, w) . n_j) / (hbar c)^2
with C the Coulomb constant in eV nm; J = Im R / pi. Diagonal (and
coincident-pair) entries keep only the scattering part of Re R: the
divergent free-space real part is absorbed into bare emitter frequencies.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from ..units import UNITS
from .geometry import DipoleSpec, FrequencyGrid, SphereScene
from .greens import greens_free, greens_scatter_sphere
from .materials import DomainError, DrudeMaterial

_COINCIDENT_NM = 1e-9


@dataclass(eq=False)
class ResponseTable:
    grid: FrequencyGrid
    sources: list
    R: np.ndarray                       # (G, N, N) complex, eV
    scattering_only_Re_diagonal: bool = True
    l_max: int = 50
    scene_key: tuple | None = None
    warnings: list = field(default_factory=list)

    @property
    def J(self) -> np.ndarray:
        return self.R.imag / np.pi

    @property
    def emitter_idx(self) -> np.ndarray:
        return np.array([i for i, s in enumerate(self.sources)
                         if s.role == "emitter"], dtype=int)

    @property
    def detector_idx(self) -> np.ndarray:
        return np.array([i for i, s in enumerate(self.sources)
                         if s.role == "detector"], dtype=int)

    def block(self, rows, cols) -> np.ndarray:
        return self.R[:, rows][:, :, cols]

    @property
    def R_ee(self) -> np.ndarray:
        e = self.emitter_idx
        return self.block(e, e)

    @property
    def R_ed(self) -> np.ndarray:
        return self.block(self.emitter_idx, self.detector_idx)

    def validate(self, tol: float = 1e-10):
        """Check Im R = pi J and diagonal passivity on every grid point."""
        J = self.J
        imr = self.R.imag
        scale = np.abs(imr).max() or 1.0
        if np.abs(imr - np.pi * J).max() > tol * scale:
            raise DomainError("Im R != pi J")
        e = self.emitter_idx
        diag = J[:, e, e]
        if diag.size and diag.min() < -1e-12 * max(diag.max(), 1e-300):
            raise DomainError("emitter spectral density must be non-negative")


def response_matrix(sources, scene: SphereScene | None, grid: FrequencyGrid,
                    l_max: int = 50, tol: float = 1e-8,
                    units=UNITS) -> ResponseTable:
    """Assemble R(w) and J(w) for all source pairs over the grid."""
    sources = list(sources)
    if not any(s.role == "emitter" for s in sources):
        raise DomainError("need at least one emitter")
    if len(grid) == 0:
        raise DomainError("empty frequency grid")
    if scene is not None:
        for s in sources:
            if np.linalg.norm(s.position) <= scene.radius_nm:
                raise DomainError("all sources must lie outside the sphere")

    N = len(sources)
    G = len(grid)
    R = np.zeros((G, N, N), dtype=np.complex128)
    warnings = []
    mu = np.array([s.dipole_enm for s in sources])
    pref = 4 * np.pi * units.coulomb_const / units.hbar_c**2

    pairs = [(i, j) for i in range(N) for j in range(i, N)]
    for g, w in enumerate(grid.points):
        k = units.wavenumber(w)
        for (i, j) in pairs:
            si, sj = sources[i], sources[j]
            dist = np.linalg.norm(si.position - sj.position)
            coincident = dist < _COINCIDENT_NM
            Gd = greens_free(si.position, sj.position, w, units=units)
            if scene is not None:
                res = greens_scatter_sphere(scene, si.position, sj.position,
                                            w, l_max=l_max, tol=tol,
                                            units=units)
                if not res.converged:
                    warnings.append(
                        f"multipole sum not converged: pair ({i},{j}) at "
                        f"omega={w:.6g} estimate={res.trunc_estimate:.2e}")
                Gd = Gd + res.G
            val = pref * w**2 * mu[i] * mu[j] * (
                si.orientation @ Gd @ sj.orientation)
            if coincident:
                # free-space Re divergence dropped by greens_free already;
                # nothing else to subtract
                pass
            R[g, i, j] = val
            R[g, j, i] = val
    scene_key = scene.key() if scene is not None else None
    table = ResponseTable(grid=grid, sources=sources, R=R, l_max=l_max,
                          scene_key=scene_key, warnings=warnings)
    return table


# ---------------------------------------------------------------- file I/O

def _fmt(x: float) -> str:
    return repr(float(x))


def save_response_table(table: ResponseTable, path):
    buf = io.StringIO()
    buf.write("# photonstats response-table v1\n")
    buf.write("# units: omega=eV R=eV length=nm dipole=Debye\n")
    buf.write(f"# scattering_only_Re_diagonal: {table.scattering_only_Re_diagonal}\n")
    buf.write(f"# l_max: {table.l_max}\n")
    if table.scene_key is None:
        buf.write("# scene: none\n")
    else:
        r, eps_inf, wp, gam = table.scene_key
        buf.write(f"# scene: radius_nm={_fmt(r)} eps_inf={_fmt(eps_inf)} "
                  f"omega_p={_fmt(wp)} gamma={_fmt(gam)}\n")
    buf.write(f"# n_sources: {len(table.sources)}\n")
    for s in table.sources:
        p, o = s.position, s.orientation
        buf.write(f"# source: role={s.role} dipole_D={_fmt(s.dipole_debye)} "
                  f"pos=({_fmt(p[0])},{_fmt(p[1])},{_fmt(p[2])}) "
                  f"orient=({_fmt(o[0])},{_fmt(o[1])},{_fmt(o[2])})\n")
    N = len(table.sources)
    cols = ["omega"]
    for i in range(N):
        for j in range(N):
            cols += [f"Re_R[{i},{j}]", f"Im_R[{i},{j}]"]
    buf.write("# columns: " + " ".join(cols) + "\n")
    for g, w in enumerate(table.grid.points):
        row = [_fmt(w)]
        for i in range(N):
            for j in range(N):
                row.append(_fmt(table.R[g, i, j].real))
                row.append(_fmt(table.R[g, i, j].imag))
        buf.write(" ".join(row) + "\n")
    with open(path, "w") as fh:
        fh.write(buf.getvalue())


def load_response_table(path) -> ResponseTable:
    header = {}
    sources = []
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("source:"):
                    d = dict(tok.split("=", 1) for tok in body[7:].split())
                    pos = [float(v) for v in d["pos"].strip("()").split(",")]
                    ori = [float(v) for v in d["orient"].strip("()").split(",")]
                    sources.append(DipoleSpec(position=np.array(pos),
                                              orientation=np.array(ori),
                                              dipole_debye=float(d["dipole_D"]),
                                              role=d["role"]))
                elif ":" in body:
                    key, val = body.split(":", 1)
                    header[key.strip()] = val.strip()
                continue
            rows.append([float(tok) for tok in line.split()])
    if not rows:
        raise DomainError(f"no data rows in {path}")
    data = np.array(rows)
    N = len(sources)
    grid = FrequencyGrid(data[:, 0])
    R = np.empty((len(rows), N, N), dtype=np.complex128)
    idx = 1
    for i in range(N):
        for j in range(N):
            R[:, i, j] = data[:, idx] + 1j * data[:, idx + 1]
            idx += 2
    scene_key = None
    if header.get("scene", "none") != "none":
        d = dict(tok.split("=", 1) for tok in header["scene"].split())
        scene_key = (float(d["radius_nm"]), float(d["eps_inf"]),
                     float(d["omega_p"]), float(d["gamma"]))
    table = ResponseTable(
        grid=grid, sources=sources, R=R,
        scattering_only_Re_diagonal=header.get(
            "scattering_only_Re_diagonal", "True") == "True",
        l_max=int(header.get("l_max", "50")), scene_key=scene_key)
    return table
