"""Fitted discrete-mode network parameters and their serialization."""
from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from ..em.materials import DomainError


@dataclass(eq=False)
class BlockMeta:
    """Partition of modes into an emitter subset and per-detector-group subsets.

    Detectors sharing a group are physically identical (same position and
    orientation) and couple to the same detector modes.
    """
    n_emitter_modes: int
    detector_groups: list          # list[list[int]] detector indices
    group_slices: list             # list[(start, stop)] absolute mode ranges

    def validate(self, n_modes: int, n_detectors: int):
        seen = set()
        for g in self.detector_groups:
            for d in g:
                if d in seen:
                    raise DomainError("detector appears in two groups")
                seen.add(d)
        if seen and seen != set(range(n_detectors)):
            raise DomainError("detector groups must cover all detectors")
        stop = self.n_emitter_modes
        for (a, b) in self.group_slices:
            if a != stop:
                raise DomainError("group slices must tile the detector modes")
            stop = b
        if stop != n_modes:
            raise DomainError("group slices must end at n_modes")


@dataclass(eq=False)
class FewModeParams:
    """Mode network: H = omega_matrix - (i/2) diag(kappa), couplings Lambda."""

    omega_matrix: np.ndarray       # (Nm, Nm) real symmetric, eV
    kappa: np.ndarray              # (Nm,) >= 0, eV
    lambda_e: np.ndarray           # (Ne, Nm), eV
    lambda_d: np.ndarray           # (Nd, Nm), eV
    block_meta: BlockMeta | None = None
    lamb_shift: np.ndarray | None = None    # (Ne,), eV
    mu_e_debye: np.ndarray | None = None    # reference dipoles of the fit
    mu_d_debye: np.ndarray | None = None

    def __post_init__(self):
        self.omega_matrix = np.asarray(self.omega_matrix, dtype=float)
        self.kappa = np.asarray(self.kappa, dtype=float)
        self.lambda_e = np.atleast_2d(np.asarray(self.lambda_e, dtype=float))
        self.lambda_d = np.atleast_2d(np.asarray(self.lambda_d, dtype=float))
        if self.lamb_shift is None:
            self.lamb_shift = np.zeros(self.lambda_e.shape[0])
        self.lamb_shift = np.asarray(self.lamb_shift, dtype=float)
        self.validate()

    @property
    def n_modes(self) -> int:
        return self.omega_matrix.shape[0]

    @property
    def n_emitters(self) -> int:
        return self.lambda_e.shape[0]

    @property
    def n_detectors(self) -> int:
        return 0 if self.lambda_d.size == 0 else self.lambda_d.shape[0]

    def validate(self):
        Om = self.omega_matrix
        if Om.ndim != 2 or Om.shape[0] != Om.shape[1]:
            raise DomainError("omega_matrix must be square")
        if not np.array_equal(Om, Om.T):
            raise DomainError("omega_matrix must be exactly symmetric")
        if self.kappa.shape != (Om.shape[0],):
            raise DomainError("kappa length mismatch")
        if np.any(self.kappa < 0):
            raise DomainError("kappa must be non-negative")
        if self.lambda_e.shape[1] != Om.shape[0]:
            raise DomainError("lambda_e column count mismatch")
        if self.lambda_d.size and self.lambda_d.shape[1] != Om.shape[0]:
            raise DomainError("lambda_d column count mismatch")
        if self.block_meta is not None:
            bm = self.block_meta
            bm.validate(self.n_modes, self.n_detectors)
            ne_m = bm.n_emitter_modes
            if self.lambda_e[:, ne_m:].any():
                raise DomainError("lambda_e must vanish on detector-mode columns")
            if self.lambda_d.size and self.lambda_d[:, :ne_m].any():
                raise DomainError("lambda_d must vanish on emitter-mode columns")

    @property
    def H_tilde(self) -> np.ndarray:
        return self.omega_matrix - 0.5j * np.diag(self.kappa)

    @property
    def Lambda(self) -> np.ndarray:
        """(Ne+Nd, Nm) stacked coupling matrix."""
        if self.lambda_d.size:
            return np.vstack([self.lambda_e, self.lambda_d])
        return self.lambda_e

    def rescale_emitter_dipole(self, new_mu_debye) -> "FewModeParams":
        """Couplings scale linearly with the emitter dipole magnitude."""
        if self.mu_e_debye is None:
            raise DomainError("reference emitter dipole unknown")
        new_mu = np.atleast_1d(np.asarray(new_mu_debye, dtype=float))
        scale = new_mu / self.mu_e_debye
        out = FewModeParams(
            omega_matrix=self.omega_matrix.copy(), kappa=self.kappa.copy(),
            lambda_e=self.lambda_e * scale[:, None],
            lambda_d=self.lambda_d.copy(),
            block_meta=self.block_meta,
            lamb_shift=self.lamb_shift * scale**2,
            mu_e_debye=new_mu, mu_d_debye=self.mu_d_debye)
        return out


def _fmt(x: float) -> str:
    return repr(float(x))


def _fmt_mat(M: np.ndarray) -> str:
    return "\n".join(" ".join(_fmt(v) for v in row) for row in np.atleast_2d(M))


def save_params(params: FewModeParams, path):
    buf = io.StringIO()
    buf.write("# photonstats fewmode-params v1\n")
    buf.write("# units: omega=eV kappa=eV lambda=eV dipole=Debye\n")
    buf.write(f"# n_modes: {params.n_modes}\n")
    buf.write(f"# n_emitters: {params.n_emitters}\n")
    buf.write(f"# n_detectors: {params.n_detectors}\n")
    if params.block_meta is not None:
        bm = params.block_meta
        groups = ";".join(",".join(str(d) for d in g) for g in bm.detector_groups)
        slices = ";".join(f"{a}:{b}" for a, b in bm.group_slices)
        buf.write(f"# block_meta: n_emitter_modes={bm.n_emitter_modes} "
                  f"groups={groups} slices={slices}\n")
    if params.mu_e_debye is not None:
        buf.write("# mu_e_debye: " + " ".join(_fmt(v) for v in params.mu_e_debye) + "\n")
    if params.mu_d_debye is not None:
        buf.write("# mu_d_debye: " + " ".join(_fmt(v) for v in params.mu_d_debye) + "\n")
    buf.write("[omega_matrix]\n" + _fmt_mat(params.omega_matrix) + "\n")
    buf.write("[kappa]\n" + " ".join(_fmt(v) for v in params.kappa) + "\n")
    buf.write("[lambda_e]\n" + _fmt_mat(params.lambda_e) + "\n")
    if params.n_detectors:
        buf.write("[lambda_d]\n" + _fmt_mat(params.lambda_d) + "\n")
    buf.write("[lamb_shift]\n" + " ".join(_fmt(v) for v in params.lamb_shift) + "\n")
    with open(path, "w") as fh:
        fh.write(buf.getvalue())


def load_params(path) -> FewModeParams:
    header = {}
    sections = {}
    current = None
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if ":" in body:
                    k, v = body.split(":", 1)
                    header[k.strip()] = v.strip()
                continue
            if line.startswith("["):
                current = line.strip("[]")
                sections[current] = []
                continue
            if current is None:
                raise DomainError("data before any section header")
            sections[current].append([float(t) for t in line.split()])
    n_modes = int(header["n_modes"])
    ne = int(header["n_emitters"])
    nd = int(header["n_detectors"])
    Om = np.array(sections["omega_matrix"])
    kappa = np.array(sections["kappa"]).ravel()
    lam_e = np.array(sections["lambda_e"]).reshape(ne, n_modes)
    lam_d = (np.array(sections["lambda_d"]).reshape(nd, n_modes)
             if nd else np.zeros((0, n_modes)))
    lamb = np.array(sections.get("lamb_shift", [[0.0] * ne])).ravel()
    block_meta = None
    if "block_meta" in header:
        d = dict(tok.split("=", 1) for tok in header["block_meta"].split())
        groups = [[int(x) for x in g.split(",") if x != ""]
                  for g in d["groups"].split(";")] if d["groups"] else []
        slices = [tuple(int(x) for x in s.split(":"))
                  for s in d["slices"].split(";")] if d["slices"] else []
        block_meta = BlockMeta(n_emitter_modes=int(d["n_emitter_modes"]),
                               detector_groups=groups, group_slices=slices)
    mu_e = (np.array([float(v) for v in header["mu_e_debye"].split()])
            if "mu_e_debye" in header else None)
    mu_d = (np.array([float(v) for v in header["mu_d_debye"].split()])
            if "mu_d_debye" in header else None)
    return FewModeParams(omega_matrix=Om, kappa=kappa, lambda_e=lam_e,
                         lambda_d=lam_d, block_meta=block_meta,
                         lamb_shift=lamb, mu_e_debye=mu_e, mu_d_debye=mu_d)
