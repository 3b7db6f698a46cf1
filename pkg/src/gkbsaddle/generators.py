"""Deterministic synthetic saddle-point problem families.

Three families at desk scale, all satisfying the well-posedness condition
ker(W) intersect ker(A') = {0} by construction:

* ``constrained-grid`` -- 2D 5-point Laplacian (Dirichlet) with chain
  constraints tying an interior patch of nodes to a common value; mesh
  refinable, so iteration counts can be compared across grid sizes.
* ``semidefinite-coupled`` -- the same Laplacian padded with slave
  degrees of freedom whose W rows are identically zero; each slave is
  constrained to a convex combination of grid nodes, with coefficient 1
  on itself.
* ``random`` -- W with a prescribed-spread spectrum rotated by random
  Givens rotations (cond_target = 1 gives exactly the identity), and A
  full column rank via an identity submatrix on anchor rows.

Generation is deterministic given a ProblemSpec (seeded numpy
Generators; no global RNG state).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidGrid, InvalidSpec
from .saddle import SaddleSystem
from .sparse import SparseMatrix, SparseSymMatrix

__all__ = [
    "ProblemSpec",
    "grid_laplacian",
    "grid_patch_nodes",
    "gen_constrained_grid",
    "gen_semidefinite_coupled",
    "gen_random",
    "generate",
]

FAMILIES = ("constrained-grid", "semidefinite-coupled", "random")


@dataclass
class ProblemSpec:
    """Serializable description of one generated problem.

    ``n_grid`` sizes the two grid-based families (plus ``n_slave`` for
    the semidefinite one); ``m``/``n``/``cond_target`` size the random
    family.  ``inhomogeneous_r`` replaces the grid family's r = 0 with a
    small seeded random right-hand side.
    """

    family: str
    n_grid: int = 0
    n_slave: int = 0
    m: int = 0
    n: int = 0
    seed: int = 0
    cond_target: float = 10.0
    constraint: str = ""
    inhomogeneous_r: bool = False

    _DEFAULT_CONSTRAINT = {
        "constrained-grid": "rigid-patch",
        "semidefinite-coupled": "linear-coupling",
        "random": "none",
    }

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidSpec(
                f"unknown family {self.family!r}; expected one of {FAMILIES}"
            )
        if not self.constraint:
            self.constraint = self._DEFAULT_CONSTRAINT[self.family]
        elif self.constraint != self._DEFAULT_CONSTRAINT[self.family]:
            raise InvalidSpec(
                f"family {self.family!r} does not support constraint "
                f"style {self.constraint!r}"
            )


def grid_laplacian(n_grid) -> SparseSymMatrix:
    """5-point Laplacian on an n_grid x n_grid interior grid.

    Dirichlet boundary nodes are eliminated: every node keeps diagonal 4
    and off-diagonal -1 per in-grid neighbor, so rows of nodes away from
    the boundary sum to zero and the matrix is positive definite.
    """
    ng = int(n_grid)
    rows, cols, vals = [], [], []
    for i in range(ng):
        for j in range(ng):
            k = i * ng + j
            rows.append(k)
            cols.append(k)
            vals.append(4.0)
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                ii, jj = i + di, j + dj
                if 0 <= ii < ng and 0 <= jj < ng:
                    rows.append(k)
                    cols.append(ii * ng + jj)
                    vals.append(-1.0)
    return SparseSymMatrix.from_coo(ng * ng, rows, cols, vals)


def grid_patch_nodes(n_grid):
    """Row-major node indices of the central constrained patch.

    The patch is a centered square of side max(2, n_grid // 2); the
    chain constraints of ``gen_constrained_grid`` run along this list.
    """
    ng = int(n_grid)
    side = max(2, ng // 2)
    i0 = (ng - side) // 2
    return [
        (i0 + a) * ng + (i0 + b) for a in range(side) for b in range(side)
    ]


def gen_constrained_grid(n_grid, constraint="rigid-patch") -> SaddleSystem:
    """Laplacian grid with an interior patch tied to a common value.

    The n constraint rows encode u_i - u_j = 0 chains over the patch
    (full column rank by construction), scaled by a weight equal to n so
    the constraint block keeps pace with the stiffness block under mesh
    refinement.  Load g is the constant h^2; r = 0.

    Raises
    ------
    InvalidGrid
        n_grid < 4 (the patch would not fit).
    """
    ng = int(n_grid)
    if ng < 4:
        raise InvalidGrid(f"n_grid must be >= 4, got {ng}")
    if constraint != "rigid-patch":
        raise InvalidSpec(f"unsupported constraint style {constraint!r}")
    m = ng * ng
    w = grid_laplacian(ng)
    nodes = grid_patch_nodes(ng)
    n = len(nodes) - 1
    omega = float(n)
    rows, cols, vals = [], [], []
    for c in range(n):
        rows.extend((nodes[c], nodes[c + 1]))
        cols.extend((c, c))
        vals.extend((omega, -omega))
    a = SparseMatrix.from_coo(m, n, rows, cols, vals)
    h = 1.0 / (ng + 1)
    g = np.full(m, h * h)
    r = np.zeros(n)
    return SaddleSystem(w=w, a=a, g=g, r=r)


def gen_semidefinite_coupled(n_grid, n_slave, seed=0) -> SaddleSystem:
    """Grid Laplacian padded with zero-row slave degrees of freedom.

    W is positive *semi*definite with exactly n_slave zero rows (the
    slaves).  Constraint column c reads
    u_slave_c - sum_j w_j u_master_j = 0 with three distinct master
    nodes and convex weights w_j; the unit coefficient on the slave keeps
    ker(W) intersect ker(A') = {0}.  Loads are 1 everywhere and r is a
    small seeded random vector, so the shift solve is exercised.

    Raises
    ------
    InvalidGrid, InvalidSpec
    """
    ng = int(n_grid)
    n_slave = int(n_slave)
    if ng < 2:
        raise InvalidGrid(f"n_grid must be >= 2, got {ng}")
    if n_slave < 1:
        raise InvalidSpec(f"n_slave must be >= 1, got {n_slave}")
    mg = ng * ng
    m = mg + n_slave
    lap = grid_laplacian(ng)
    li, lj, lv = lap.triplets()
    w = SparseSymMatrix.from_coo(m, li, lj, lv)
    rng = np.random.default_rng(seed)
    rows, cols, vals = [], [], []
    for c in range(n_slave):
        masters = rng.choice(mg, size=3, replace=False)
        wts = rng.random(3)
        wts /= wts.sum()
        rows.append(mg + c)
        cols.append(c)
        vals.append(1.0)
        for node, wt in zip(masters, wts):
            rows.append(int(node))
            cols.append(c)
            vals.append(-wt)
    a = SparseMatrix.from_coo(m, n_slave, rows, cols, vals)
    g = np.ones(m)
    r = 0.1 * rng.standard_normal(n_slave)
    return SaddleSystem(w=w, a=a, g=g, r=r)


def gen_random(m, n, seed=0, cond_target=10.0) -> SaddleSystem:
    """Random well-posed system with controlled W conditioning.

    W starts as diag(logspace(0, log10(cond_target))) and is conjugated
    by m random Givens rotations (orthogonal, so the spectrum -- and
    positive definiteness -- survive up to roundoff).  cond_target = 1
    skips the rotations and returns exactly the identity.  A carries an
    identity submatrix on n randomly chosen anchor rows; extra entries
    go only to non-anchor rows, so full column rank is structural.

    Raises
    ------
    InvalidSpec
    """
    m = int(m)
    n = int(n)
    if not 1 <= n <= m:
        raise InvalidSpec(f"need 1 <= n <= m, got m={m}, n={n}")
    if not cond_target >= 1.0:
        raise InvalidSpec(f"cond_target must be >= 1, got {cond_target}")
    rng = np.random.default_rng(seed)
    if cond_target == 1.0:
        w = SparseSymMatrix.from_coo(m, range(m), range(m), np.ones(m))
    else:
        wd = np.diag(np.logspace(0.0, np.log10(cond_target), m))
        for _ in range(m):
            i, j = rng.choice(m, size=2, replace=False)
            th = rng.uniform(0.0, 2.0 * np.pi)
            c, s = np.cos(th), np.sin(th)
            ri, rj = wd[i].copy(), wd[j].copy()
            wd[i] = c * ri - s * rj
            wd[j] = s * ri + c * rj
            ci, cj = wd[:, i].copy(), wd[:, j].copy()
            wd[:, i] = c * ci - s * cj
            wd[:, j] = s * ci + c * cj
        w = SparseSymMatrix.from_dense(0.5 * (wd + wd.T))
    anchors = rng.choice(m, size=n, replace=False)
    rows = list(anchors)
    cols = list(range(n))
    vals = [1.0] * n
    free = np.setdiff1d(np.arange(m), anchors)
    if free.size:
        for c in range(n):
            extra = rng.choice(free, size=min(2, free.size), replace=False)
            for rr in extra:
                rows.append(int(rr))
                cols.append(c)
                vals.append(float(rng.uniform(-1.0, 1.0)))
    a = SparseMatrix.from_coo(m, n, rows, cols, vals)
    g = rng.standard_normal(m)
    r = rng.standard_normal(n)
    return SaddleSystem(w=w, a=a, g=g, r=r)


def generate(spec: ProblemSpec) -> SaddleSystem:
    """Build the SaddleSystem a ProblemSpec describes."""
    if spec.family == "constrained-grid":
        sys = gen_constrained_grid(spec.n_grid, constraint=spec.constraint)
        if spec.inhomogeneous_r:
            rng = np.random.default_rng(spec.seed)
            sys = SaddleSystem(
                w=sys.w, a=sys.a, g=sys.g,
                r=0.1 * rng.standard_normal(sys.n),
            )
        return sys
    if spec.family == "semidefinite-coupled":
        return gen_semidefinite_coupled(spec.n_grid, spec.n_slave, spec.seed)
    return gen_random(spec.m, spec.n, spec.seed, spec.cond_target)
