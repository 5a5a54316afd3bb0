"""Twisted Kohn-Rossi cohomology of the flat model geometries.

The (0,q)-form side of the story.  Antiholomorphic multi-indices of
degree q are identified with the degree-q subsets spanning the spinor
fiber, so the tangential Cauchy-Riemann complex reuses the fiber
creation/annihilation matrices:

    dbar  = sqrt(2) sum_a w_a (x) nabla_{Ebar_a},
    dbar* = honest matrix adjoint,

where w_a wedges the a-th antiholomorphic coframe element.  In this
orthonormal form basis the degree-raising half of the Kohn-Dirac
operator is exactly sqrt(2) dbar, so the Dirac square equals twice the
Kohn Laplacian matrix for matrix.

On a weight sector with commutator scalar t the Kohn Laplacian differs
from the holomorphic connection Laplacian by a multiple of the fiber
weight operator N = -2t:

    box - box_bar = (m - q) N       (on degree-q forms),

which is the circle-bundle shift mechanism: positive-weight sectors of a
positively polarized bundle have no cohomology below the top degree.
Analytic dimensions come from the classical line-bundle counts on the
base torus; every analytic value is cross-checked against the spectral
kernel of the assembled Laplacian.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .clifford import creation_matrix
from .models import PseudoHermitianModel, TorusBundleModel, TorusLattice
from .operators import OperatorMatrix, kernel_report
from .sections import SectionSpace

__all__ = [
    "CohomologyTable",
    "TableRow",
    "assemble_dbar",
    "kohn_laplacian",
    "holomorphic_laplacian",
    "fiber_weight_operator",
    "sector_identity_residual",
    "torus_line_bundle_cohomology",
    "shift_table",
    "harmonic_spinor_table",
    "spinor_form_basis_map",
]

MODEL_LEVEL_NOTE = (
    "m=1 rows are model-level spectral counts; no harmonic-theory "
    "identification is claimed in one CR dimension"
)


def assemble_dbar(space: SectionSpace) -> OperatorMatrix:
    """Tangential CR operator on bundle-valued (0,*)-forms."""
    mat = np.zeros((space.dim, space.dim), dtype=complex)
    for a in range(1, space.m + 1):
        wedge = space.lift_fiber(creation_matrix(space.m, a))
        mat += np.sqrt(2.0) * wedge @ space.lift_base(space.nabla_ebar[a - 1])
    return OperatorMatrix(mat, space, name="dbar", mu_shift=-2)


def kohn_laplacian(space: SectionSpace) -> OperatorMatrix:
    """dbar* dbar + dbar dbar*; Hermitian, PSD, degree preserving."""
    dbar = assemble_dbar(space).mat
    dbar_star = dbar.conj().T
    mat = dbar_star @ dbar + dbar @ dbar_star
    return OperatorMatrix(mat, space, name="box", mu_shift=0)


def holomorphic_laplacian(space: SectionSpace) -> OperatorMatrix:
    """Gram matrix of the stacked (1,0)-derivatives, -2 sum nabla_Ebar nabla_E.

    The fiber is untouched, so this is the connection Laplacian of the
    underlying base bundle; on the weight-zero sector it coincides with
    the pulled-back base Dolbeault Laplacian.
    """
    base = np.zeros((space.base_dim, space.base_dim), dtype=complex)
    for a in range(space.m):
        base -= 2.0 * space.nabla_ebar[a] @ space.nabla_e[a]
    return OperatorMatrix(space.lift_base(base), space, name="box_bar", mu_shift=0)


def fiber_weight_operator(space: SectionSpace) -> OperatorMatrix:
    """i nabla along the fiber generator; s Id on the weight-s torus sector.

    The contact form is twice the connection form, so the fiber generator
    is twice the Reeb field and the operator equals -2t Id.
    """
    mat = -2.0 * space.t * np.eye(space.dim, dtype=complex)
    return OperatorMatrix(mat, space, name="N", mu_shift=0)


def sector_identity_residual(space: SectionSpace) -> dict[int, float]:
    """Interior defect of box - box_bar = (m - q) N, per degree q."""
    box = kohn_laplacian(space).mat
    box_bar = holomorphic_laplacian(space).mat
    weight = -2.0 * space.t
    mask = space.interior_mask()
    out: dict[int, float] = {}
    for q in range(space.m + 1):
        rows = space.grade_block(q)
        diff = box[rows, rows] - box_bar[rows, rows]
        diff = diff - (space.m - q) * weight * np.eye(diff.shape[0])
        sub_mask = mask[rows]
        out[q] = float(np.abs(diff[np.ix_(sub_mask, sub_mask)]).max())
    return out


def torus_line_bundle_cohomology(lattice: TorusLattice, c: int, s: int, q: int) -> int:
    """h^q of the s-th power of a degree-c polarizing line bundle on the torus.

    Positive total degree concentrates in degree zero with dimension
    (s c)^m, negative total degree in the top degree with |s c|^m, and the
    trivial power contributes the constant forms C(m, q).  These counts
    are validated against truncated spectral kernels in the test suite
    before being used anywhere.
    """
    if not isinstance(lattice, TorusLattice):
        raise ValueError("analytic cohomology needs a flat torus base")
    if not isinstance(c, int) or c == 0:
        raise ValueError(f"polarization degree must be a nonzero integer, got {c!r}")
    if not isinstance(s, int):
        raise ValueError(f"power must be an integer, got {s!r}")
    m = lattice.m
    if not 0 <= q <= m:
        raise ValueError(f"form degree out of range: {q}")
    degree = s * c
    if degree > 0:
        return degree**m if q == 0 else 0
    if degree < 0:
        return (-degree) ** m if q == m else 0
    return comb(m, q)


@dataclass
class TableRow:
    q: int
    s: int
    dim: int
    method: str  # "analytic" | "spectral"
    status: str  # "certified" | "lower-bound"


@dataclass
class CohomologyTable:
    """Per-(degree, sector) dimension table with emission helpers."""

    model_name: str
    rows: list[TableRow] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def sorted_rows(self) -> list[TableRow]:
        return sorted(self.rows, key=lambda r: (r.s, r.q, r.method))

    def dims(self, method: str | None = None) -> dict[tuple[int, int], int]:
        out: dict[tuple[int, int], int] = {}
        for row in self.sorted_rows():
            if method is None or row.method == method:
                out[(row.q, row.s)] = row.dim
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["q", "s", "dim", "method", "status"])
        for row in self.sorted_rows():
            writer.writerow([row.q, row.s, row.dim, row.method, row.status])
        return buf.getvalue()

    def to_json(self) -> str:
        payload = {
            "model": self.model_name,
            "notes": sorted(self.notes),
            "rows": [
                {"q": r.q, "s": r.s, "dim": r.dim, "method": r.method, "status": r.status}
                for r in self.sorted_rows()
            ],
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _row_status(m: int, q: int) -> str:
    # extremal degrees are infinite dimensional in general; per-sector
    # counts there are reported as truncation lower bounds
    return "lower-bound" if q in (0, m) else "certified"


def _spectral_rows(space: SectionSpace, tol: float) -> list[TableRow]:
    report = kernel_report(kohn_laplacian(space), tol=tol)
    rows = []
    for q, count in sorted(report.items()):
        status = _row_status(space.m, q)
        if status == "certified" and not count.certified:
            raise RuntimeError(
                f"uncertified interior kernel at q={q}, sector {space.sector}: "
                f"shell amplitude {count.max_shell_amplitude:.2e}; enlarge the truncation"
            )
        rows.append(TableRow(q, space.sector, count.dim * space.multiplicity, "spectral", status))
    return rows


def shift_table(model: TorusBundleModel, q_range=None, s_range=(0,)) -> CohomologyTable:
    """Analytic and spectral Kohn-Rossi dimensions per fiber-weight sector.

    The analytic route identifies the weight-s sector with forms valued
    in the degree -(s c) power bundle on the base torus (the sign is the
    pinned sector convention: raising the fiber weight lowers the bundle
    degree).  The spectral route counts certified kernel vectors of the
    assembled Kohn Laplacian.  The circle-bundle shift identity is
    asserted sector by sector before any dimensions are reported.
    """
    if not isinstance(model, TorusBundleModel):
        raise ValueError("the shift isomorphism table needs a torus circle bundle")
    qs = list(q_range) if q_range is not None else list(range(model.m + 1))
    table = CohomologyTable(model_name=model.describe())
    if model.m == 1:
        table.notes.append(MODEL_LEVEL_NOTE)
    for s in s_range:
        space = SectionSpace(model, sector=int(s))
        residuals = sector_identity_residual(space)
        worst = max(residuals.values())
        if worst > 1e-10:
            raise RuntimeError(
                f"shift identity fails on sector {s}: interior defect {worst:.2e}"
            )
        spectral = {row.q: row for row in _spectral_rows(space, tol=1e-8)}
        for q in qs:
            analytic = torus_line_bundle_cohomology(model.lattice, model.flux, -int(s), q)
            table.rows.append(TableRow(q, int(s), analytic, "analytic", _row_status(model.m, q)))
            table.rows.append(spectral[q])
    return table


def harmonic_spinor_table(space: SectionSpace, tol: float = 1e-8) -> CohomologyTable:
    """Kernel dimensions of the Kohn-Dirac operator, reported per degree.

    Computed on the spinor side (kernel of D per grading block) and
    required by the tests to match the form-side table entry for entry;
    the two sides share their basis through ``spinor_form_basis_map``.
    """
    from .operators import assemble_kohn_dirac

    report = kernel_report(assemble_kohn_dirac(space), tol=tol)
    table = CohomologyTable(model_name=space.model.describe())
    if space.m == 1:
        table.notes.append(MODEL_LEVEL_NOTE)
    for q, count in sorted(report.items()):
        status = _row_status(space.m, q)
        if status == "certified" and not count.certified:
            raise RuntimeError(
                f"uncertified interior kernel at q={q}: enlarge the truncation"
            )
        table.rows.append(
            TableRow(q, space.sector, count.dim * space.multiplicity, "spectral", status)
        )
    return table


def spinor_form_basis_map(space: SectionSpace, q: int):
    """Pairs (spinor subset, antiholomorphic multi-index) realizing the degree-q bijection.

    The spinor fiber basis of degree q and the (0,q) coframe monomials
    are indexed by the same q-element subsets, so the bijection is the
    identity on coefficients; it is returned explicitly so tests can
    conjugate operators through it.
    """
    if not 0 <= q <= space.m:
        raise ValueError(f"degree out of range: {q}")
    pairs = []
    for subset in space.module.subsets:
        if len(subset) == q:
            pairs.append((subset, tuple(sorted(subset))))
    return pairs
