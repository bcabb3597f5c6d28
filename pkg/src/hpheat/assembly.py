"""Global DOF numbering, assembly of the semi-discrete system, boundary data.

The coefficient vector is ordered element-interleaved: the DOFs shared at a
mesh vertex come first, then the interior DOFs of the element to its right,
then the next vertex, and so on.  All DOFs of one element therefore live
within a fixed index distance of each other and the assembled matrices are
banded with a half-bandwidth independent of the element count, which is what
the banded factorization in the time integrator relies on.

Boundary conditions split by field regularity.  Prescribed temperatures are
always essential.  Prescribed fluxes are natural data in the energy-balance
row (they load the boundary T vertex) and, when the flux field is continuous
(the nonlocal model), additionally essential on the boundary q vertex.
Essential constraints are eliminated: constrained columns of A and B move to
the load together with the analytic time derivative of the prescribed value.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field as dataclass_field
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .basis import MAX_DEGREE, ElementMap, ShapeSet, gauss_rule
from .elemmat import element_matrices
from .materials import MaterialParams, ModelKind
from .timefun import TimeFunction


class Field(enum.Enum):
    TEMPERATURE = "temperature"
    HEAT_FLUX = "heat_flux"


class Continuity(enum.Enum):
    C0 = "c0"
    DISCONTINUOUS = "discontinuous"


@dataclass(frozen=True)
class SpaceSpec:
    field: Field
    continuity: Continuity
    degree: int


def approximation_spaces(model: ModelKind, p: int) -> tuple[SpaceSpec, SpaceSpec]:
    """Per-model spaces for (temperature, heat flux) at degree parameter p.

    Temperature is continuous of degree p+1 in every model.  The flux is
    discontinuous of degree p for the local models and continuous of degree
    p+1 for the nonlocal one, whose weak form differentiates q.
    """
    model = ModelKind(model)
    if p < 1:
        raise ValueError(f"degree parameter must be >= 1, got {p}")
    if p + 1 > MAX_DEGREE:
        raise ValueError(
            f"degree parameter {p} needs temperature degree {p + 1}, "
            f"above the basis cap {MAX_DEGREE}"
        )
    t_space = SpaceSpec(Field.TEMPERATURE, Continuity.C0, p + 1)
    if model is ModelKind.GK:
        q_space = SpaceSpec(Field.HEAT_FLUX, Continuity.C0, p + 1)
    else:
        q_space = SpaceSpec(Field.HEAT_FLUX, Continuity.DISCONTINUOUS, p)
    return t_space, q_space


@dataclass(frozen=True)
class Mesh:
    """Strictly increasing node coordinates; n_elements = len(nodes) - 1."""

    nodes: np.ndarray

    def __post_init__(self) -> None:
        nodes = np.asarray(self.nodes, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        if nodes.ndim != 1 or nodes.size < 2:
            raise ValueError("mesh needs at least two nodes")
        if not np.all(np.diff(nodes) > 0):
            raise ValueError("mesh nodes must be strictly increasing")

    @classmethod
    def uniform(cls, n_elements: int, length: float, start: float = 0.0) -> "Mesh":
        if n_elements < 1:
            raise ValueError(f"need at least one element, got {n_elements}")
        if length <= 0:
            raise ValueError(f"domain length must be positive, got {length}")
        return cls(np.linspace(start, start + length, n_elements + 1))

    @property
    def n_elements(self) -> int:
        return self.nodes.size - 1

    @property
    def length(self) -> float:
        return float(self.nodes[-1] - self.nodes[0])

    def element_map(self, e: int) -> ElementMap:
        return ElementMap(float(self.nodes[e]), float(self.nodes[e + 1]))


@dataclass(frozen=True)
class DirichletTemperature:
    """Prescribed boundary temperature, essential on the T vertex."""

    value: TimeFunction


@dataclass(frozen=True)
class PrescribedFlux:
    """Prescribed boundary heat flux (positive in +x).

    essential=None applies the model rule: essential on the q vertex for the
    nonlocal model, natural only for the local ones.  An explicit value must
    agree with the space regularity, otherwise the dofmap build rejects it.
    """

    value: TimeFunction
    essential: bool | None = None


BoundaryCondition = DirichletTemperature | PrescribedFlux


@dataclass(frozen=True)
class BoundarySpec:
    left: BoundaryCondition
    right: BoundaryCondition


@dataclass(frozen=True)
class ConstrainedDof:
    dof: int
    field: Field
    value: TimeFunction


@dataclass(frozen=True)
class NaturalFluxTerm:
    """Boundary term of the energy-balance row: sign * q_data(t) at a T vertex."""

    dof: int
    sign: float
    value: TimeFunction


@dataclass
class DofMap:
    mesh: Mesh
    model: ModelKind
    p: int
    spaces: tuple[SpaceSpec, SpaceSpec]
    element_dofs: dict[Field, list[np.ndarray]]
    vertex_dofs: dict[Field, np.ndarray | None]
    full_dim: int
    constrained: tuple[ConstrainedDof, ...]
    natural_terms: tuple[NaturalFluxTerm, ...]
    full_to_free: np.ndarray = dataclass_field(init=False)
    free_to_full: np.ndarray = dataclass_field(init=False)

    def __post_init__(self) -> None:
        constrained_set = {c.dof for c in self.constrained}
        if len(constrained_set) != len(self.constrained):
            raise ValueError("a DOF is constrained twice")
        full_to_free = np.full(self.full_dim, -1, dtype=int)
        free = [d for d in range(self.full_dim) if d not in constrained_set]
        full_to_free[free] = np.arange(len(free))
        self.full_to_free = full_to_free
        self.free_to_full = np.asarray(free, dtype=int)

    @property
    def total_dofs(self) -> int:
        """Unknown coefficients after constraint elimination."""
        return self.free_to_full.size

    def space(self, field: Field) -> SpaceSpec:
        return self.spaces[0] if field is Field.TEMPERATURE else self.spaces[1]

    def field_dofs(self, field: Field) -> np.ndarray:
        """All full-numbering DOFs of one field, sorted."""
        dofs = np.unique(np.concatenate(self.element_dofs[field]))
        return dofs


def _effective_essential(bc: PrescribedFlux, q_space: SpaceSpec) -> bool:
    continuous = q_space.continuity is Continuity.C0
    if bc.essential is None:
        return continuous
    if bc.essential and not continuous:
        raise ValueError(
            "essential flux constraint requires a continuous flux space; "
            "the local models impose flux data through the natural boundary term"
        )
    if not bc.essential and continuous:
        raise ValueError(
            "the nonlocal model must impose flux data essentially; "
            "its weak form carries no natural flux term"
        )
    return bc.essential


def build_dofmap(mesh: Mesh, model: ModelKind, p: int, bcs: BoundarySpec) -> DofMap:
    """Number both fields element-interleaved and record boundary bookkeeping."""
    t_space, q_space = approximation_spaces(model, p)
    degT, degQ = t_space.degree, q_space.degree
    q_c0 = q_space.continuity is Continuity.C0
    n = mesh.n_elements

    vertex_t = np.empty(n + 1, dtype=int)
    vertex_q = np.empty(n + 1, dtype=int) if q_c0 else None
    bubbles_t: list[np.ndarray] = []
    interior_q: list[np.ndarray] = []

    counter = 0

    def take(count: int) -> np.ndarray:
        nonlocal counter
        block = np.arange(counter, counter + count)
        counter += count
        return block

    vertex_t[0] = take(1)[0]
    if q_c0:
        vertex_q[0] = take(1)[0]
    for e in range(n):
        bubbles_t.append(take(degT - 1))
        if q_c0:
            interior_q.append(take(degQ - 1))
        else:
            interior_q.append(take(degQ + 1))
        vertex_t[e + 1] = take(1)[0]
        if q_c0:
            vertex_q[e + 1] = take(1)[0]

    elem_t = [
        np.concatenate(([vertex_t[e], vertex_t[e + 1]], bubbles_t[e]))
        for e in range(n)
    ]
    if q_c0:
        elem_q = [
            np.concatenate(([vertex_q[e], vertex_q[e + 1]], interior_q[e]))
            for e in range(n)
        ]
    else:
        elem_q = list(interior_q)

    constrained: list[ConstrainedDof] = []
    natural: list[NaturalFluxTerm] = []
    for end, bc, t_vertex, q_vertex in (
        ("left", bcs.left, vertex_t[0], vertex_q[0] if q_c0 else None),
        ("right", bcs.right, vertex_t[n], vertex_q[n] if q_c0 else None),
    ):
        if isinstance(bc, DirichletTemperature):
            constrained.append(ConstrainedDof(int(t_vertex), Field.TEMPERATURE, bc.value))
        elif isinstance(bc, PrescribedFlux):
            sign = 1.0 if end == "left" else -1.0
            natural.append(NaturalFluxTerm(int(t_vertex), sign, bc.value))
            if _effective_essential(bc, q_space):
                constrained.append(ConstrainedDof(int(q_vertex), Field.HEAT_FLUX, bc.value))
        else:
            raise TypeError(f"unsupported boundary condition {bc!r}")

    return DofMap(
        mesh=mesh,
        model=model,
        p=p,
        spaces=(t_space, q_space),
        element_dofs={Field.TEMPERATURE: elem_t, Field.HEAT_FLUX: elem_q},
        vertex_dofs={Field.TEMPERATURE: vertex_t, Field.HEAT_FLUX: vertex_q},
        full_dim=counter,
        constrained=tuple(constrained),
        natural_terms=tuple(natural),
    )


@dataclass
class SemiDiscreteSystem:
    """A alpha' + B alpha = f(t) on the free DOFs, plus elimination data.

    A and B are the free-DOF blocks; A_full and B_full keep the unconstrained
    assembly for structure checks and for reconstructing constrained fields.
    A_fc and B_fc are the free-rows-by-constrained-columns couplings whose
    products with the prescribed values (and their rates) enter the load.
    """

    dofmap: DofMap
    material: MaterialParams
    A: sp.csr_matrix
    B: sp.csr_matrix
    A_full: sp.csr_matrix
    B_full: sp.csr_matrix
    A_fc: np.ndarray
    B_fc: np.ndarray
    half_bandwidth: int

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    @property
    def mesh(self) -> Mesh:
        return self.dofmap.mesh

    @property
    def model(self) -> ModelKind:
        return self.dofmap.model

    def constrained_values(self, t: float) -> np.ndarray:
        return np.array([c.value.value(t) for c in self.dofmap.constrained])

    def _natural_free(self) -> list[tuple[int, float, TimeFunction]]:
        terms = []
        for term in self.dofmap.natural_terms:
            free = self.dofmap.full_to_free[term.dof]
            if free >= 0:
                terms.append((int(free), term.sign, term.value))
        return terms

    def load(self, t: float) -> np.ndarray:
        """Pointwise load vector f(t)."""
        f = np.zeros(self.dim)
        for idx, sign, fn in self._natural_free():
            f[idx] += sign * fn.value(t)
        if self.dofmap.constrained:
            g = np.array([c.value.value(t) for c in self.dofmap.constrained])
            g_rate = np.array([c.value.derivative(t) for c in self.dofmap.constrained])
            f -= self.A_fc @ g_rate + self.B_fc @ g
        return f

    def constraint_averages(self, t0: float, t1: float) -> np.ndarray:
        return np.array([c.value.average(t0, t1) for c in self.dofmap.constrained])

    def load_average(
        self, t0: float, t1: float, prev_average: np.ndarray | None = None
    ) -> np.ndarray:
        """Exact mean of f over [t0, t1] via the running integrals of the data.

        Using these averages in the time stepper makes the discrete energy
        balance telescope to machine precision regardless of how fast the
        boundary data varies within a step.

        Prescribed values are treated as a piecewise-constant trajectory at
        their per-step averages, so the rate term is driven by the change
        between consecutive averages; callers stepping through time pass the
        previous step's averages to keep that sequence consistent.  Without
        one, the value at t0 stands in, which is exact at the initial
        instant.  Mixing the pointwise increment with averaged loads instead
        injects a spurious boundary-layer kick whenever the data moves fast
        within a step.
        """
        f = np.zeros(self.dim)
        for idx, sign, fn in self._natural_free():
            f[idx] += sign * fn.average(t0, t1)
        if self.dofmap.constrained:
            g_avg = self.constraint_averages(t0, t1)
            if prev_average is None:
                prev_average = self.constrained_values(t0)
            f -= self.A_fc @ ((g_avg - prev_average) / (t1 - t0)) + self.B_fc @ g_avg
        return f

    def full_state(self, alpha: np.ndarray, t: float) -> np.ndarray:
        """Scatter a free vector to full numbering, filling prescribed values."""
        full = np.empty(self.dofmap.full_dim)
        full[self.dofmap.free_to_full] = alpha
        for c in self.dofmap.constrained:
            full[c.dof] = c.value.value(t)
        return full


def assemble(
    mesh: Mesh,
    mat: MaterialParams,
    model: ModelKind,
    p: int,
    bcs: BoundarySpec,
) -> SemiDiscreteSystem:
    """Assemble A, B from element blocks and eliminate essential constraints.

    Block layout in field terms, with G the unweighted coupling integral:

        A = [[C, 0], [0, T]],   B = [[0, -G^T], [lam G, K]]

    The minus sign on the T-row coupling comes from integrating the flux
    divergence by parts; together with the lam-weighted lower block it makes
    the homogeneous system dissipative in the norm lam t'C t + q'T q.
    """
    mat.require_kind(model)
    dofmap = build_dofmap(mesh, model, p, bcs)
    degT, degQ = dofmap.spaces[0].degree, dofmap.spaces[1].degree

    rows_a: list[np.ndarray] = []
    cols_a: list[np.ndarray] = []
    vals_a: list[np.ndarray] = []
    rows_b: list[np.ndarray] = []
    cols_b: list[np.ndarray] = []
    vals_b: list[np.ndarray] = []

    def scatter(rows, cols, vals, r_dofs, c_dofs, block):
        rr, cc = np.meshgrid(r_dofs, c_dofs, indexing="ij")
        rows.append(rr.ravel())
        cols.append(cc.ravel())
        vals.append(block.ravel())

    for e in range(mesh.n_elements):
        blocks = element_matrices(mesh.element_map(e), mat, model, degT, degQ)
        t_dofs = dofmap.element_dofs[Field.TEMPERATURE][e]
        q_dofs = dofmap.element_dofs[Field.HEAT_FLUX][e]
        scatter(rows_a, cols_a, vals_a, t_dofs, t_dofs, blocks.C)
        scatter(rows_a, cols_a, vals_a, q_dofs, q_dofs, blocks.T)
        scatter(rows_b, cols_b, vals_b, q_dofs, q_dofs, blocks.K)
        scatter(rows_b, cols_b, vals_b, q_dofs, t_dofs, blocks.Q)
        scatter(rows_b, cols_b, vals_b, t_dofs, q_dofs, -blocks.Qt)

    full = dofmap.full_dim
    a_full = sp.coo_matrix(
        (np.concatenate(vals_a), (np.concatenate(rows_a), np.concatenate(cols_a))),
        shape=(full, full),
    ).tocsr()
    b_full = sp.coo_matrix(
        (np.concatenate(vals_b), (np.concatenate(rows_b), np.concatenate(cols_b))),
        shape=(full, full),
    ).tocsr()

    free = dofmap.free_to_full
    cons = np.array([c.dof for c in dofmap.constrained], dtype=int)
    a_ff = a_full[free][:, free].tocsr()
    b_ff = b_full[free][:, free].tocsr()
    if cons.size:
        a_fc = np.asarray(a_full[free][:, cons].todense())
        b_fc = np.asarray(b_full[free][:, cons].todense())
    else:
        a_fc = np.zeros((free.size, 0))
        b_fc = np.zeros((free.size, 0))

    pattern = (abs(a_ff) + abs(b_ff)).tocoo()
    half_bw = int(np.max(np.abs(pattern.row - pattern.col))) if pattern.nnz else 0

    return SemiDiscreteSystem(
        dofmap=dofmap,
        material=mat,
        A=a_ff,
        B=b_ff,
        A_full=a_full,
        B_full=b_full,
        A_fc=a_fc,
        B_fc=b_fc,
        half_bandwidth=half_bw,
    )


def _as_function(f) -> Callable[[float], float]:
    if callable(f):
        return f
    value = float(f)
    return lambda x: value


def apply_initial_conditions(sys: SemiDiscreteSystem, T0, q0) -> np.ndarray:
    """Free coefficient vector matching the initial fields.

    Vertex coefficients take point values (one-sided for the discontinuous
    flux space).  Bubble coefficients come from the element-wise L2 projection
    of the residual left after the vertex part, so any field inside the local
    polynomial span is reproduced exactly and constants produce exact zeros.
    """
    dofmap = sys.dofmap
    mesh = dofmap.mesh
    full = np.zeros(dofmap.full_dim)
    for fld, fun in ((Field.TEMPERATURE, T0), (Field.HEAT_FLUX, q0)):
        fun = _as_function(fun)
        deg = dofmap.space(fld).degree
        shapes = ShapeSet(deg)
        rule = gauss_rule(deg + 2)
        values = shapes.values(rule.points)
        for e in range(mesh.n_elements):
            emap = mesh.element_map(e)
            dofs = dofmap.element_dofs[fld][e]
            left = float(fun(emap.x_left))
            right = float(fun(emap.x_right))
            full[dofs[0]] = left
            full[dofs[1]] = right
            if deg >= 2:
                x_g = emap.map_to_physical(rule.points)
                f_g = np.array([float(fun(x)) for x in np.atleast_1d(x_g)])
                resid = f_g - left * values[0] - right * values[1]
                bub = values[2:]
                mass = emap.jacobian * ((bub * rule.weights) @ bub.T)
                rhs = emap.jacobian * (bub @ (rule.weights * resid))
                full[dofs[2:]] = np.linalg.solve(mass, rhs)
    return full[dofmap.free_to_full]


@dataclass(frozen=True)
class ProbeRow:
    """Sparse evaluation functional: value = w_free . alpha + w_cons . g(t)."""

    x: float
    field: Field
    free_idx: np.ndarray
    free_w: np.ndarray
    cons_idx: np.ndarray
    cons_w: np.ndarray

    def evaluate(self, sys: SemiDiscreteSystem, alpha: np.ndarray, t: float) -> float:
        value = float(self.free_w @ alpha[self.free_idx])
        for pos, w in zip(self.cons_idx, self.cons_w):
            value += w * sys.dofmap.constrained[pos].value.value(t)
        return value


def probe_row(dofmap: DofMap, x: float, field: Field) -> ProbeRow:
    """Evaluation weights for a field at a point.

    At an interior mesh node of the discontinuous flux space the value is the
    average of the two one-sided limits; everywhere else it is the ordinary
    element evaluation.
    """
    mesh = dofmap.mesh
    nodes = mesh.nodes
    tol = 1e-12 * mesh.length
    if x < nodes[0] - tol or x > nodes[-1] + tol:
        raise ValueError(f"probe point {x} outside the domain [{nodes[0]}, {nodes[-1]}]")

    space = dofmap.space(field)
    nearest = int(np.argmin(np.abs(nodes - x)))
    pieces: list[tuple[int, float, float]] = []
    if abs(nodes[nearest] - x) <= tol:
        if (
            0 < nearest < mesh.n_elements
            and space.continuity is Continuity.DISCONTINUOUS
        ):
            pieces = [(nearest - 1, 1.0, 0.5), (nearest, -1.0, 0.5)]
        elif nearest == mesh.n_elements:
            pieces = [(nearest - 1, 1.0, 1.0)]
        else:
            pieces = [(nearest, -1.0, 1.0)]
    else:
        e = int(np.searchsorted(nodes, x) - 1)
        e = min(max(e, 0), mesh.n_elements - 1)
        eta = float(mesh.element_map(e).map_to_master(x))
        pieces = [(e, eta, 1.0)]

    shapes = ShapeSet(space.degree)
    weights: dict[int, float] = {}
    for e, eta, wt in pieces:
        vals = shapes.values(np.array([eta]))[:, 0]
        for dof, v in zip(dofmap.element_dofs[field][e], vals):
            weights[int(dof)] = weights.get(int(dof), 0.0) + wt * float(v)

    cons_pos = {c.dof: i for i, c in enumerate(dofmap.constrained)}
    free_idx, free_w, cons_idx, cons_w = [], [], [], []
    for dof, w in sorted(weights.items()):
        if dof in cons_pos:
            cons_idx.append(cons_pos[dof])
            cons_w.append(w)
        else:
            free_idx.append(int(dofmap.full_to_free[dof]))
            free_w.append(w)
    return ProbeRow(
        x=float(x),
        field=field,
        free_idx=np.asarray(free_idx, dtype=int),
        free_w=np.asarray(free_w),
        cons_idx=np.asarray(cons_idx, dtype=int),
        cons_w=np.asarray(cons_w),
    )


def field_integral_weights(dofmap: DofMap, field: Field) -> np.ndarray:
    """Full-numbering weights w with w . alpha_full = integral of the field."""
    space = dofmap.space(field)
    shapes = ShapeSet(space.degree)
    rule = gauss_rule(space.degree + 1)
    shape_integrals = shapes.values(rule.points) @ rule.weights
    w = np.zeros(dofmap.full_dim)
    for e in range(dofmap.mesh.n_elements):
        emap = dofmap.mesh.element_map(e)
        np.add.at(w, dofmap.element_dofs[field][e], emap.jacobian * shape_integrals)
    return w
