"""Periodic finite-element homogenization of pixelated 2D unit cells.

A unit cell is a square density grid mapped onto the unit square, one
bilinear quadrilateral element per pixel, with periodic displacement
boundary conditions (node columns/rows wrap around). For each of the
three unit test strains (exx, eyy, gxy) the periodic fluctuation field
is solved from the assembled linear system, with one node pinned to
remove rigid-body translation, and the effective stiffness follows from
the strain-energy cross terms:

    C_kl = sum_e  (u0_k + v_k)^T k_e (u0_l + v_l)   over elements e

in Voigt order (11, 22, 12/shear), plane stress, unit cell volume 1.
Pixel densities enter through the SIMP interpolation
E(rho) = Emin + rho^3 (E0 - Emin), so binary cells see the plain
solid/void contrast while residual grayscale is penalized.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

SIMP_EXPONENT = 3.0


class HomogenizationError(RuntimeError):
    """Linear solve failed to converge; carries the relative residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class MaterialModel:
    """Isotropic plane-stress base material with a soft void phase.

    e0 is the solid Young's modulus (results scale linearly with it),
    nu the Poisson ratio, emin the void modulus keeping the system
    nonsingular for fully void regions.
    """

    e0: float = 1.0
    nu: float = 0.3
    emin: float = 1e-6

    def __post_init__(self):
        if not 0.0 < self.emin < self.e0:
            raise ValueError(f"require 0 < emin < e0, got emin={self.emin}, e0={self.e0}")
        if not 0.0 <= self.nu < 0.5:
            raise ValueError(f"require 0 <= nu < 0.5, got nu={self.nu}")


DEFAULT_MATERIAL = MaterialModel()


def plane_stress_matrix(e: float, nu: float) -> np.ndarray:
    """Isotropic plane-stress constitutive matrix E/(1-nu^2)*[[1,nu,0],[nu,1,0],[0,0,(1-nu)/2]]."""
    return (e / (1.0 - nu**2)) * np.array(
        [[1.0, nu, 0.0], [nu, 1.0, 0.0], [0.0, 0.0, (1.0 - nu) / 2.0]]
    )


def element_stiffness(nu: float) -> np.ndarray:
    """8x8 stiffness of a unit-thickness square Q4 element with E=1.

    Element side length cancels for 2D plane problems, so one matrix
    serves every pixel. 2x2 Gauss quadrature, exact for bilinear quads.
    """
    C = plane_stress_matrix(1.0, nu)
    xc = np.array([0.0, 1.0, 1.0, 0.0])
    yc = np.array([0.0, 0.0, 1.0, 1.0])
    gp = np.array([-1.0, 1.0]) / np.sqrt(3.0)
    ke = np.zeros((8, 8))
    for xi in gp:
        for eta in gp:
            dN_dxi = 0.25 * np.array([-(1 - eta), (1 - eta), (1 + eta), -(1 + eta)])
            dN_deta = 0.25 * np.array([-(1 - xi), -(1 + xi), (1 + xi), (1 - xi)])
            J = np.array([[dN_dxi @ xc, dN_dxi @ yc], [dN_deta @ xc, dN_deta @ yc]])
            dN = np.linalg.solve(J, np.vstack([dN_dxi, dN_deta]))
            B = np.zeros((3, 8))
            B[0, 0::2] = dN[0]
            B[1, 1::2] = dN[1]
            B[2, 0::2] = dN[1]
            B[2, 1::2] = dN[0]
            ke += B.T @ C @ B * np.linalg.det(J)
    return ke


class _GridStructure:
    """Assembly structure for an (nely, nelx) periodic pixel grid.

    Everything that does not depend on the density field is precomputed:
    element-to-dof map, the CSC sparsity pattern of the stiffness matrix,
    the scatter map from element-matrix entries into CSC data slots, and
    the affine nodal displacements of the three unit test strains.
    """

    def __init__(self, nely: int, nelx: int, nu: float):
        self.nely, self.nelx = nely, nelx
        self.ke = element_stiffness(nu)
        self.ndof = 2 * nelx * nely

        rr, cc = np.meshgrid(np.arange(nely), np.arange(nelx), indexing="ij")
        rr, cc = rr.ravel(), cc.ravel()

        def nid(i, j):
            return (i % nely) * nelx + (j % nelx)

        # node order CCW: (r,c), (r,c+1), (r+1,c+1), (r+1,c)
        nodes = np.column_stack([nid(rr, cc), nid(rr, cc + 1), nid(rr + 1, cc + 1), nid(rr + 1, cc)])
        edof = np.empty((nelx * nely, 8), dtype=np.int64)
        edof[:, 0::2] = 2 * nodes
        edof[:, 1::2] = 2 * nodes + 1
        self.edof = edof

        iK = np.repeat(edof, 8, axis=1).ravel()
        jK = np.tile(edof, (1, 8)).ravel()
        # map each of the nel*64 triplets to its slot in the summed CSC data array
        order = np.lexsort((iK, jK))
        keys = jK[order] * self.ndof + iK[order]
        new_slot = np.empty(len(keys), dtype=bool)
        new_slot[0] = True
        new_slot[1:] = keys[1:] != keys[:-1]
        slot_sorted = np.cumsum(new_slot) - 1
        self.slot = np.empty(len(iK), dtype=np.int64)
        self.slot[order] = slot_sorted
        self.nnz = int(slot_sorted[-1]) + 1
        pattern = sp.csc_matrix((np.ones(len(iK)), (iK, jK)), shape=(self.ndof, self.ndof))
        self.indices, self.indptr = pattern.indices, pattern.indptr

        # affine displacements of unit strains on one element (corners at
        # (0,0),(hx,0),(hx,hy),(0,hy)); shear is the engineering strain gxy=1
        hx, hy = 1.0 / nelx, 1.0 / nely
        xs = np.array([0.0, hx, hx, 0.0])
        ys = np.array([0.0, 0.0, hy, hy])
        U0 = np.zeros((8, 3))
        U0[0::2, 0] = xs
        U0[1::2, 1] = ys
        U0[0::2, 2] = 0.5 * ys
        U0[1::2, 2] = 0.5 * xs
        self.U0 = U0
        self.feT = self.ke @ U0  # (8,3) unit-modulus element load

    def assemble(self, E: np.ndarray) -> sp.csc_matrix:
        vals = (self.ke.ravel()[None, :] * E[:, None]).ravel()
        data = np.bincount(self.slot, weights=vals, minlength=self.nnz)
        return sp.csc_matrix((data, self.indices, self.indptr), shape=(self.ndof, self.ndof))


@lru_cache(maxsize=8)
def _grid_structure(nely: int, nelx: int, nu: float) -> _GridStructure:
    return _GridStructure(nely, nelx, nu)


def homogenize_grid(
    rho: np.ndarray,
    material: MaterialModel = DEFAULT_MATERIAL,
    solver: str = "direct",
    cg_rtol: float = 1e-8,
    cg_maxiter: int | None = None,
) -> np.ndarray:
    """Homogenized 3x3 plane-stress tensor of a density grid in [0,1].

    rho is (nely, nelx), row index = y, column index = x. solver is
    "direct" (sparse LU) or "cg" (Jacobi-preconditioned conjugate
    gradients, relative residual <= cg_rtol, else HomogenizationError).
    """
    rho = np.asarray(rho, dtype=np.float64)
    if rho.ndim != 2:
        raise ValueError(f"density grid must be 2D, got shape {rho.shape}")
    if rho.min() < 0.0 or rho.max() > 1.0:
        raise ValueError("density values must lie in [0, 1]")

    g = _grid_structure(rho.shape[0], rho.shape[1], material.nu)
    E = material.emin + rho.ravel() ** SIMP_EXPONENT * (material.e0 - material.emin)

    K = g.assemble(E)
    F = np.zeros((g.ndof, 3))
    np.add.at(F, g.edof, E[:, None, None] * g.feT[None, :, :])

    free = slice(2, g.ndof)  # pin node 0 (dofs 0,1): rigid translations removed
    Kff = K[free, free].tocsc()
    v = np.zeros((g.ndof, 3))
    if solver == "direct":
        lu = spla.splu(Kff, permc_spec="MMD_AT_PLUS_A")
        v[free] = lu.solve(-F[free])
    elif solver == "cg":
        M = spla.LinearOperator(Kff.shape, matvec=lambda x: x / Kff.diagonal())
        for load in range(3):
            b = -F[free, load]
            x, info = spla.cg(Kff, b, rtol=cg_rtol, atol=0.0, M=M, maxiter=cg_maxiter)
            bnorm = np.linalg.norm(b)
            res = np.linalg.norm(Kff @ x - b) / bnorm if bnorm > 0 else 0.0
            if info != 0 or res > cg_rtol:
                raise HomogenizationError(
                    f"CG failed on load case {load}: relative residual {res:.3e}", res
                )
            v[free, load] = x
    else:
        raise ValueError(f"unknown solver {solver!r}")

    W = g.U0[None, :, :] + v[g.edof]  # (nel, 8, 3) total displacement per element
    CH = np.einsum("eik,ij,ejl,e->kl", W, g.ke, W, E, optimize=True)
    return 0.5 * (CH + CH.T)  # quadratic form is symmetric up to round-off


def homogenize_cell(cell: np.ndarray, material: MaterialModel = DEFAULT_MATERIAL, **kw) -> np.ndarray:
    """Homogenize one 50x50 unit cell. See homogenize_grid for solver options."""
    cell = np.asarray(cell, dtype=np.float64)
    if cell.shape != (50, 50):
        raise ValueError(f"unit cell must be 50x50, got {cell.shape}")
    return homogenize_grid(cell, material, **kw)


def validate_stiffness_tensor(c: np.ndarray, material: MaterialModel = DEFAULT_MATERIAL) -> None:
    """Raise ValueError unless c is a symmetric, PSD, Voigt-bounded 3x3 tensor."""
    c = np.asarray(c, dtype=np.float64)
    if c.shape != (3, 3):
        raise ValueError(f"stiffness tensor must be 3x3, got {c.shape}")
    scale = np.abs(c).max()
    if np.abs(c - c.T).max() > 1e-9 * scale:
        raise ValueError("stiffness tensor is not symmetric")
    if np.linalg.eigvalsh(c).min() < -1e-9 * scale:
        raise ValueError("stiffness tensor is not positive semidefinite")
    bound = plane_stress_matrix(material.e0, material.nu)
    if np.any(np.abs(c) > np.abs(bound).max() * (1.0 + 1e-9)):
        raise ValueError("stiffness tensor exceeds the solid-material bound")


@dataclass
class StiffnessStats:
    """Componentwise extrema of stiffness tensors over a training set."""

    cmin: np.ndarray  # (3,3)
    cmax: np.ndarray  # (3,3)

    def __post_init__(self):
        self.cmin = np.asarray(self.cmin, dtype=np.float64).reshape(3, 3)
        self.cmax = np.asarray(self.cmax, dtype=np.float64).reshape(3, 3)
        if np.any(self.cmin > self.cmax):
            raise ValueError("componentwise min exceeds max")

    def to_dict(self) -> dict:
        return {"cmin": self.cmin.tolist(), "cmax": self.cmax.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "StiffnessStats":
        return cls(np.array(d["cmin"]), np.array(d["cmax"]))


def stiffness_stats(train) -> StiffnessStats:
    """Componentwise min/max over the stiffness tensors of a training set.

    Accepts a Dataset (uses its records) or an (n, 3, 3) array.
    """
    if hasattr(train, "stiffness_array"):
        arr = train.stiffness_array()
    else:
        arr = np.asarray(train, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("stiffness stats need a non-empty training set")
    arr = arr.reshape(-1, 3, 3)
    return StiffnessStats(arr.min(axis=0), arr.max(axis=0))


def normalize_stiffness(tensor: np.ndarray, stats: StiffnessStats) -> np.ndarray:
    """Min-max normalize a 3x3 tensor to a flat 9-vector in [0,1].

    Components with zero training range map to 0; values outside the
    training range clamp, so downstream RMSEs stay bounded by 1.
    """
    t = np.asarray(tensor, dtype=np.float64).reshape(3, 3)
    span = stats.cmax - stats.cmin
    out = np.zeros(9)
    nz = (span > 0.0).ravel()
    out[nz] = ((t - stats.cmin).ravel()[nz]) / span.ravel()[nz]
    return np.clip(out, 0.0, 1.0)
