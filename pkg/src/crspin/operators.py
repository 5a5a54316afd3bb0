"""Dirac-type operators on truncated section spaces.

Everything here is assembled from two commuting layers: Clifford
generator matrices acting on the spinor fiber (``clifford``) and
derivative matrices acting on base coefficients (``sections``).  In the
unitary frame the Kohn-Dirac operator splits as

    D = D_plus + D_minus,
    D_plus  = 2 sum_a c(E_a) nabla_{Ebar_a},
    D_minus = 2 sum_a c(Ebar_a) nabla_{E_a},

where D_plus raises the fiber degree by one (so it shifts the grading
eigenvalue mu = m - 2q by -2) and D_minus lowers it.  Both squares
vanish identically, even on the truncated spaces, because the fiber
parts anticommute while the base parts commute slot by slot.

The connection Laplacians use the dual-frame normalization fixed by
g(E_a, Ebar_b) = delta_ab / 2:

    nabla_10* nabla_10 = -2 sum_a nabla_{Ebar_a} nabla_{E_a},
    nabla_01* nabla_01 = -2 sum_a nabla_{E_a} nabla_{Ebar_a},

and the sub-Laplacian is their sum, equal to minus the sum of squared
real-frame derivatives.

Twistor operators project the full covariant derivative onto the kernel
of Clifford contraction, with the degree-dependent weights
a_q = 1/(2(q+1)) and b_q = 1/(2(m-q+1)).  Their output is stacked over
2m coframe slots (the E_a slots first, then the Ebar_a slots).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clifford import (
    annihilation_matrix,
    creation_matrix,
    theta_matrix,
    two_form_matrix,
)
from .models import rho_frame_components
from .sections import SectionSpace

__all__ = [
    "OperatorMatrix",
    "assemble_dplus",
    "assemble_dminus",
    "assemble_kohn_dirac",
    "assemble_sub_laplacian",
    "assemble_nabla_T",
    "nabla_T_defect",
    "assemble_twistor",
    "twistor_contraction",
    "twistor_reconstruction_defect",
    "gram",
    "grading_defect",
    "cluster_eigenvalues",
    "spectrum",
    "kernel_dim",
    "kernel_report",
    "KernelCount",
]


@dataclass
class OperatorMatrix:
    """Dense operator together with its section space and grading metadata.

    ``mu_shift`` records how the operator moves the grading eigenvalue
    mu = m - 2q: -2 for degree-raising, +2 for degree-lowering, 0 for
    block-diagonal, None when the operator mixes shifts (D itself) or
    does not map the space to itself (twistor stacks).
    """

    mat: np.ndarray
    space: SectionSpace
    name: str = ""
    mu_shift: int | None = None
    domain_block: int | None = None

    @property
    def dim(self) -> int:
        return self.mat.shape[1]

    def hermitian_defect(self) -> float:
        if self.mat.shape[0] != self.mat.shape[1]:
            return np.inf
        return np.abs(self.mat - self.mat.conj().T).max()

    def block(self, q_out: int, q_in: int) -> np.ndarray:
        """Sub-matrix mapping the degree q_in block to the degree q_out block."""
        return self.mat[self.space.grade_block(q_out), self.space.grade_block(q_in)]


def _clifford_e(space: SectionSpace, a: int) -> np.ndarray:
    """Full-space Clifford action of the frame vector E_a (degree raising)."""
    return space.lift_fiber(creation_matrix(space.m, a))


def _clifford_ebar(space: SectionSpace, a: int) -> np.ndarray:
    """Full-space Clifford action of Ebar_a; minus the plain annihilation."""
    return -space.lift_fiber(annihilation_matrix(space.m, a))


def assemble_dplus(space: SectionSpace) -> OperatorMatrix:
    """Degree-raising half of the Kohn-Dirac operator."""
    mat = np.zeros((space.dim, space.dim), dtype=complex)
    for a in range(1, space.m + 1):
        mat += 2.0 * _clifford_e(space, a) @ space.lift_base(space.nabla_ebar[a - 1])
    return OperatorMatrix(mat, space, name="D+", mu_shift=-2)


def assemble_dminus(space: SectionSpace) -> OperatorMatrix:
    """Degree-lowering half of the Kohn-Dirac operator; adjoint of D+."""
    mat = np.zeros((space.dim, space.dim), dtype=complex)
    for a in range(1, space.m + 1):
        mat += 2.0 * _clifford_ebar(space, a) @ space.lift_base(space.nabla_e[a - 1])
    return OperatorMatrix(mat, space, name="D-", mu_shift=2)


def assemble_kohn_dirac(space: SectionSpace) -> OperatorMatrix:
    mat = assemble_dplus(space).mat + assemble_dminus(space).mat
    return OperatorMatrix(mat, space, name="D", mu_shift=None)


def horizontal_laplacians(space: SectionSpace) -> tuple[np.ndarray, np.ndarray]:
    """Base-space matrices of nabla_10* nabla_10 and nabla_01* nabla_01."""
    lap10 = np.zeros((space.base_dim, space.base_dim), dtype=complex)
    lap01 = np.zeros_like(lap10)
    for a in range(space.m):
        lap10 -= 2.0 * space.nabla_ebar[a] @ space.nabla_e[a]
        lap01 -= 2.0 * space.nabla_e[a] @ space.nabla_ebar[a]
    return lap10, lap01


def assemble_sub_laplacian(space: SectionSpace, route: str = "complex") -> OperatorMatrix:
    """Spinor sub-Laplacian, by either of two independent assemblies.

    ``route="complex"`` sums the two connection Laplacians of the
    unitary frame; ``route="real"`` sums minus the squares of the 2m
    real-frame derivatives.  The two agree identically.
    """
    if route == "complex":
        lap10, lap01 = horizontal_laplacians(space)
        base = lap10 + lap01
    elif route == "real":
        base = np.zeros((space.base_dim, space.base_dim), dtype=complex)
        for i in range(2 * space.m):
            d = space.nabla_real(i)
            base -= d @ d
    else:
        raise ValueError(f"unknown sub-Laplacian route {route!r}")
    return OperatorMatrix(space.lift_base(base), space, name="Delta_tr", mu_shift=0)


def assemble_nabla_T(space: SectionSpace, route: str = "direct") -> OperatorMatrix:
    """Covariant derivative along the Reeb vector field.

    ``route="direct"`` uses the sector weight (multiplication by i t).
    ``route="formula"`` assembles the same operator from horizontal
    Laplacians plus curvature terms,

        (i/4m) (2 nabla_10*nabla_10 - 2 nabla_01*nabla_01
                + i c(rho) - ell scal / (2(m+2))),

    which reduces to the commutator content of the truncation; the two
    routes agree on interior coefficients (see ``nabla_T_defect``).
    """
    if route == "direct":
        mat = 1j * space.t * np.eye(space.dim, dtype=complex)
    elif route == "formula":
        m = space.m
        model = space.model
        lap10, lap01 = horizontal_laplacians(space)
        mat = space.lift_base(2.0 * lap10 - 2.0 * lap01)
        crho = two_form_matrix(m, rho_frame_components(model.rho))
        mat = mat + 1j * space.lift_fiber(crho)
        mat = mat - (model.ell * model.scal_w / (2.0 * (m + 2))) * np.eye(space.dim)
        mat = (1j / (4.0 * m)) * mat
    else:
        raise ValueError(f"unknown nabla_T route {route!r}")
    return OperatorMatrix(mat, space, name="nabla_T", mu_shift=0)


def nabla_T_defect(space: SectionSpace) -> float:
    """Largest interior matrix element separating the two nabla_T routes."""
    diff = assemble_nabla_T(space, "formula").mat - assemble_nabla_T(space, "direct").mat
    mask = space.interior_mask()
    return np.abs(diff[np.ix_(mask, mask)]).max()


def twistor_weights(m: int, q: int) -> tuple[float, float]:
    """(a_q, b_q) projection weights for the degree-q twistor operator."""
    return 1.0 / (2.0 * (q + 1)), 1.0 / (2.0 * (m - q + 1))


def _twistor_pieces(space: SectionSpace, q: int):
    if not 0 <= q <= space.m:
        raise ValueError(f"degree q out of range: {q}")
    a_q, b_q = twistor_weights(space.m, q)
    dplus = assemble_dplus(space).mat
    dminus = assemble_dminus(space).mat
    cols = space.grade_block(q)
    grads, corrections = [], []
    for a in range(1, space.m + 1):
        grads.append(space.lift_base(space.nabla_e[a - 1])[:, cols])
        corrections.append((b_q * _clifford_e(space, a) @ dminus)[:, cols])
    for a in range(1, space.m + 1):
        grads.append(space.lift_base(space.nabla_ebar[a - 1])[:, cols])
        corrections.append((a_q * _clifford_ebar(space, a) @ dplus)[:, cols])
    return np.vstack(grads), np.vstack(corrections)


def assemble_twistor(space: SectionSpace, q: int) -> OperatorMatrix:
    """Twistor operator on the degree-q block, stacked over 2m coframe slots.

    Rows are grouped as m full-space slots for the E_a coframe directions
    followed by m slots for the Ebar_a directions; the image lies in the
    kernel of Clifford contraction.
    """
    grad, corr = _twistor_pieces(space, q)
    return OperatorMatrix(grad + corr, space, name=f"P({q})", mu_shift=None, domain_block=q)


def twistor_contraction(space: SectionSpace, q: int) -> np.ndarray:
    """Clifford contraction matrix on the 2m-slot stack produced by the twistor assembly.

    A coframe slot u in the E_a group contributes 2 Ebar_a . u and a slot
    in the Ebar_a group contributes 2 E_a . u; the metric duality of the
    half-normalized frame supplies the factor 2.
    """
    if not 0 <= q <= space.m:
        raise ValueError(f"degree q out of range: {q}")
    blocks = [2.0 * _clifford_ebar(space, a) for a in range(1, space.m + 1)]
    blocks += [2.0 * _clifford_e(space, a) for a in range(1, space.m + 1)]
    return np.hstack(blocks)


def twistor_reconstruction_defect(space: SectionSpace, q: int) -> float:
    """Residual of recovering the covariant derivative from the twistor output.

    The stacked gradient must equal the twistor stack minus the weighted
    Clifford corrections built from D+ and D-.
    """
    grad, corr = _twistor_pieces(space, q)
    return np.abs(grad - ((grad + corr) - corr)).max()


def gram(op: OperatorMatrix) -> OperatorMatrix:
    """A* A of an operator; Hermitian, PSD, and block-diagonal for pure shifts."""
    return OperatorMatrix(op.mat.conj().T @ op.mat, op.space, name=f"{op.name}*{op.name}", mu_shift=0)


def grading_defect(op: OperatorMatrix) -> float:
    """Largest norm of a block violating the recorded grading shift."""
    if op.mu_shift is None:
        return 0.0
    worst = 0.0
    m = op.space.m
    for q_in in range(m + 1):
        for q_out in range(m + 1):
            if -2 * q_out + 2 * q_in == op.mu_shift:
                continue
            sub = op.block(q_out, q_in)
            if sub.size:
                worst = max(worst, np.abs(sub).max())
    return worst


def cluster_eigenvalues(evals, tol: float = 1e-8) -> list[tuple[float, int]]:
    """Group sorted eigenvalues into (value, multiplicity) clusters.

    Two neighbours belong to the same cluster when they differ by at most
    tol * (1 + |value|); the reported value is the cluster mean.
    """
    clusters: list[tuple[float, int]] = []
    for val in evals:
        if clusters and abs(val - clusters[-1][0]) <= tol * (1.0 + abs(val)):
            mean, n = clusters[-1]
            clusters[-1] = ((mean * n + val) / (n + 1), n + 1)
        else:
            clusters.append((float(val), 1))
    return clusters


def spectrum(op: OperatorMatrix, count: int | None = None, tol: float = 1e-8):
    """Sorted (eigenvalue, multiplicity) clusters of a Hermitian operator."""
    scale = 1.0 + np.abs(op.mat).max() if op.mat.size else 1.0
    if op.hermitian_defect() > 1e-10 * scale:
        raise ValueError("operator is not Hermitian; assemble it as A*A (see gram) first")
    clusters = cluster_eigenvalues(np.linalg.eigvalsh(op.mat), tol=tol)
    if count is not None:
        clusters = clusters[:count]
    return clusters


@dataclass
class KernelCount:
    """Kernel dimension of one grading block, with truncation diagnostics.

    ``dim`` counts null vectors essentially supported on interior
    coefficients; ``spurious`` counts null vectors rejected because they
    concentrate on the truncation shell (ladder top rungs), which is the
    signature of a cutoff artifact; ``certified`` is False when any
    retained vector leaks more than the shell tolerance.
    """

    dim: int
    certified: bool
    spurious: int
    max_shell_amplitude: float


def kernel_report(
    op: OperatorMatrix, tol: float = 1e-8, shell_tol: float = 1e-8
) -> dict[int, KernelCount]:
    """Per-degree kernel counts of an operator, via its square when needed."""
    if tol <= 0:
        raise ValueError("kernel tolerance must be positive")
    space = op.space
    if op.mu_shift == 0:
        sq = op.mat
        if op.hermitian_defect() > 1e-10 * (1.0 + np.abs(op.mat).max()):
            sq = op.mat.conj().T @ op.mat
    else:
        sq = op.mat.conj().T @ op.mat
    shell = ~space.interior_mask()
    out: dict[int, KernelCount] = {}
    for q in range(space.m + 1):
        rows = space.grade_block(q)
        block = sq[rows, rows]
        evals, vecs = np.linalg.eigh(block)
        null = np.nonzero(np.abs(evals) <= tol)[0]
        basis = vecs[:, null]
        block_shell = shell[rows]
        if basis.shape[1] == 0:
            out[q] = KernelCount(0, True, 0, 0.0)
            continue
        if not block_shell.any():
            out[q] = KernelCount(basis.shape[1], True, 0, 0.0)
            continue
        # Shell leakage per null direction, measured rotation-invariantly:
        # singular values of the shell restriction of an orthonormal null
        # basis.  Values near 1 are cutoff artifacts pinned to the top
        # rungs, values near 0 are honest interior kernel vectors.
        leaks = np.linalg.svd(basis[block_shell, :], compute_uv=False)
        leaks = np.concatenate([leaks, np.zeros(basis.shape[1] - len(leaks))])
        spurious = int(np.count_nonzero(leaks > 0.5))
        kept = leaks[leaks <= 0.5]
        dim = int(len(kept))
        worst = float(kept.max()) if dim else 0.0
        out[q] = KernelCount(dim, worst <= shell_tol, spurious, worst)
    return out


def kernel_dim(op: OperatorMatrix, tol: float = 1e-8) -> dict[int, int]:
    """Kernel dimension per grading block (see kernel_report for diagnostics)."""
    return {q: rep.dim for q, rep in kernel_report(op, tol).items()}


def theta_operator(space: SectionSpace) -> OperatorMatrix:
    """Grading operator mu = m - 2q lifted to the full section space."""
    return OperatorMatrix(space.lift_fiber(theta_matrix(space.m)), space, name="Theta", mu_shift=0)
