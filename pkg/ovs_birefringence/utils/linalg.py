import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import LinearOperator, cg, splu

from ..errors import ConvergenceError, SingularSystemError

logger = logging.getLogger("LinearSolver")

ASSEMBLY_CHUNK = 8192


def element_dofs(connectivity: np.ndarray, components: int = 1) -> np.ndarray:
    """(ne, 8*components) global dof ids, node-major (u0x, u0y, u0z, u1x, ...)"""
    if components == 1:
        return connectivity
    base = connectivity[:, :, None] * components + np.arange(components)
    return base.reshape(connectivity.shape[0], -1)


def assemble(
    dofs: np.ndarray,
    terms: Sequence[Tuple[np.ndarray, np.ndarray]],
    size: int,
) -> sparse.csr_matrix:
    """
    Sum per-element matrices into a global CSR matrix

    Args:
        dofs: (ne, m) global dof ids of each element
        terms: (reference m x m matrix, per-element scale) pairs; element e
            contributes sum(scale[e] * reference)
        size: number of global dofs

    Returns:
        size x size CSR matrix
    """
    m = dofs.shape[1]
    index_type = np.int32 if size < np.iinfo(np.int32).max else np.int64
    total = sparse.csr_matrix((size, size))
    for start in range(0, dofs.shape[0], ASSEMBLY_CHUNK):
        block = dofs[start:start + ASSEMBLY_CHUNK].astype(index_type)
        local = np.zeros((block.shape[0], m, m))
        for reference, scale in terms:
            local += np.asarray(scale[start:start + ASSEMBLY_CHUNK])[:, None, None] * reference
        rows = np.repeat(block, m, axis=1).ravel()
        cols = np.tile(block, (1, m)).ravel()
        total = total + sparse.coo_matrix((local.ravel(), (rows, cols)), shape=(size, size)).tocsr()
    total.sum_duplicates()
    return total


def assemble_vector(dofs: np.ndarray, local: np.ndarray, size: int) -> np.ndarray:
    """Scatter-add (ne, m) element vectors into a global vector"""
    out = np.zeros(size)
    np.add.at(out, dofs.ravel(), local.ravel())
    return out


@dataclass
class ReducedSystem:
    """Partition of a matrix into free and prescribed dofs"""

    free: np.ndarray
    fixed: np.ndarray
    free_free: sparse.csr_matrix
    free_fixed: sparse.csr_matrix

    @classmethod
    def split(cls, matrix: sparse.csr_matrix, fixed: np.ndarray) -> "ReducedSystem":
        mask = np.zeros(matrix.shape[0], dtype=bool)
        mask[fixed] = True
        free = np.nonzero(~mask)[0]
        fixed = np.nonzero(mask)[0]
        rows = matrix[free]
        return cls(free, fixed, rows[:, free].tocsr(), rows[:, fixed].tocsr())

    def expand(self, free_values: np.ndarray, fixed_values: np.ndarray) -> np.ndarray:
        out = np.empty(self.free.size + self.fixed.size)
        out[self.free] = free_values
        out[self.fixed] = fixed_values
        return out


class SPDSolver:
    """Solves a fixed symmetric positive-definite system for many right-hand sides"""

    def __init__(
        self,
        matrix: sparse.spmatrix,
        method: str = "cg",
        rel_tol: float = 1e-9,
        max_iter: int = 20000,
        label: str = "solve",
    ):
        self.matrix = matrix.tocsr()
        self.method = method
        self.rel_tol = rel_tol
        self.max_iter = max_iter
        self.label = label
        self.last_iterations = 0

        diagonal = self.matrix.diagonal()
        if diagonal.size and np.min(diagonal) <= 0.0:
            raise SingularSystemError(f"{label}: system has a zero or negative diagonal entry")

        if method == "direct":
            try:
                # SPD: symmetric ordering, no pivoting.
                self._factor = splu(self.matrix.tocsc(), permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                                    options={"SymmetricMode": True}).solve
            except RuntimeError as e:
                raise SingularSystemError(f"{label}: {e}") from e
        elif method == "cg":
            inverse_diagonal = 1.0 / diagonal
            self._preconditioner = LinearOperator(
                self.matrix.shape, matvec=lambda r: inverse_diagonal * np.ravel(r), dtype=float
            )
        else:
            raise ValueError(f"unknown linear solver '{method}'")

    def solve(self, rhs: np.ndarray, x0: Optional[np.ndarray] = None) -> np.ndarray:
        norm_b = float(np.linalg.norm(rhs))
        if norm_b == 0.0:
            self.last_iterations = 0
            return np.zeros_like(rhs)

        if self.method == "direct":
            solution = self._factor(rhs)
            self.last_iterations = 1
            if not np.all(np.isfinite(solution)):
                raise SingularSystemError(f"{self.label}: factorization produced non-finite values")
        else:
            iterations = [0]

            def count(_xk):
                iterations[0] += 1

            solution, info = cg(
                self.matrix, rhs, x0=x0, rtol=self.rel_tol, atol=0.0,
                maxiter=self.max_iter, M=self._preconditioner, callback=count,
            )
            self.last_iterations = iterations[0]
            if info != 0:
                residual = float(np.linalg.norm(rhs - self.matrix @ solution)) / norm_b
                raise ConvergenceError(self.label, residual, iterations[0])

        residual = float(np.linalg.norm(rhs - self.matrix @ solution)) / norm_b
        logger.debug(f"{self.label}: {self.last_iterations} iterations, relative residual {residual:.2e}")
        return solution
