"""GNS representation of (B(H), omega) for a faithful state, with the
modular machinery built on top of it.

The representation space is B(H) itself under the Hilbert-Schmidt inner
product (a, b) = Tr a^dagger b, with cyclic vector Omega = rho^{1/2}.  All
vectors are stored in matricized form.  The basis-dependent operators (the
conjugation J, the flip unitary U, the transposition on B(H)) are defined
in the eigenbasis of rho, which is fixed deterministically by
``linalg.herm_eig``; everything reduces to the kernel

    K = X X^T   (X = eigenvector matrix of rho),

because transposition in that basis acts as  a -> K a^T K^dagger  and the
basis conjugation as  f -> K conj(f).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import ConditioningError, ContractError, FaithfulnessError
from .linalg import EPS_FAITHFUL, require_density, require_square
from .rand import complex_gaussian, generator

CONDITION_RATIO_WARN = 1e-6


@dataclass(frozen=True, eq=False)
class AntilinearOp:
    """Antilinear map  xi -> left @ core(conj(xi)) @ right  on matricized vectors.

    ``core`` is the transpose when ``transpose_first`` is set (so that
    conj + transpose = adjoint); the left/right factors carry the basis
    kernel.  Applying an op twice must give the identity.
    """

    name: str
    left: np.ndarray
    right: np.ndarray
    transpose_first: bool = False

    def apply_mat(self, mat: np.ndarray) -> np.ndarray:
        core = mat.conj().T if self.transpose_first else mat.conj()
        return self.left @ core @ self.right


@dataclass(frozen=True, eq=False)
class GnsVector:
    """Element of the GNS space, stored as its n x n matrix."""

    mat: np.ndarray
    ctx: "GnsContext"

    def norm(self) -> float:
        return float(np.linalg.norm(self.mat))


def inner(x: GnsVector, y: GnsVector) -> complex:
    if x.ctx is not y.ctx:
        raise ContractError("inner product of vectors from different GNS contexts")
    return complex(np.trace(x.mat.conj().T @ y.mat))


@dataclass(frozen=True, eq=False)
class GnsContext:
    """Immutable eigen-data and operator kernels for one faithful state."""

    rho: np.ndarray
    eigvals: np.ndarray          # descending
    eigvecs: np.ndarray          # columns, phase-fixed
    sqrt_rho: np.ndarray
    inv_sqrt_rho: np.ndarray
    kernel: np.ndarray           # K = X X^T
    log_ratio: np.ndarray        # log(lambda_i / lambda_j) table
    jm_op: AntilinearOp = field(repr=False, default=None)
    j_op: AntilinearOp = field(repr=False, default=None)
    jc_op: AntilinearOp = field(repr=False, default=None)

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    @property
    def omega(self) -> GnsVector:
        return GnsVector(self.sqrt_rho, self)

    @property
    def condition_ratio(self) -> float:
        return float(self.eigvals[-1] / self.eigvals[0])

    def vector(self, mat) -> GnsVector:
        mat = require_square(np.asarray(mat, dtype=complex))
        if mat.shape[0] != self.dim:
            raise ContractError(f"vector dim {mat.shape[0]} != context dim {self.dim}")
        return GnsVector(mat, self)

    def vector_for_operator(self, a) -> GnsVector:
        """pi(a) Omega = a rho^{1/2}."""
        return self.vector(np.asarray(a, dtype=complex) @ self.sqrt_rho)

    def operator_of(self, xi: GnsVector) -> np.ndarray:
        """The a with xi = a Omega (well defined since rho is invertible)."""
        return xi.mat @ self.inv_sqrt_rho

    def to_eigbasis(self, mat: np.ndarray) -> np.ndarray:
        return self.eigvecs.conj().T @ mat @ self.eigvecs

    def from_eigbasis(self, coords: np.ndarray) -> np.ndarray:
        return self.eigvecs @ coords @ self.eigvecs.conj().T


def build_gns(rho, eps_faithful: float = EPS_FAITHFUL) -> GnsContext:
    """GNS context for the state a -> Tr(rho a); rho must be faithful."""
    rho = require_density(rho, faithful=True, eps_faithful=eps_faithful)
    vals, vecs = linalg.herm_eig(rho)
    if vals[-1] < eps_faithful:
        raise FaithfulnessError(
            f"state is not faithful: eigenvalue {vals[-1]:.3e} < {eps_faithful:.1e}"
        )
    root = np.sqrt(vals)
    sqrt_rho = (vecs * root) @ vecs.conj().T
    inv_sqrt_rho = (vecs * (1.0 / root)) @ vecs.conj().T
    kernel = vecs @ vecs.T
    logs = np.log(vals)
    log_ratio = logs[:, None] - logs[None, :]
    n = rho.shape[0]
    eye = np.eye(n)
    jm = AntilinearOp("J_m", eye, eye, transpose_first=True)
    j = AntilinearOp("J", kernel, kernel.conj().T, transpose_first=False)
    jc = AntilinearOp("J_c", kernel, np.eye(1), transpose_first=False)
    return GnsContext(
        rho=rho, eigvals=vals, eigvecs=vecs, sqrt_rho=sqrt_rho,
        inv_sqrt_rho=inv_sqrt_rho, kernel=kernel, log_ratio=log_ratio,
        jm_op=jm, j_op=j, jc_op=jc,
    )


def state_value(ctx: GnsContext, a) -> complex:
    """omega(a) computed in the representation, (Omega, pi(a) Omega)."""
    return inner(ctx.omega, ctx.vector_for_operator(a))


def apply_delta_power(ctx: GnsContext, beta: float, xi: GnsVector) -> GnsVector:
    """Delta^beta: scales the (i, j) eigenbasis coordinate by (l_i/l_j)^beta."""
    if xi.ctx is not ctx:
        raise ContractError("vector does not belong to this GNS context")
    if beta == 0.0:
        return xi
    exponents = beta * ctx.log_ratio
    peak = float(np.max(np.abs(exponents)))
    if peak > 700.0:
        raise ConditioningError(
            f"Delta power overflow: |beta * log eigenvalue ratio| = {peak:.1f} > 700"
        )
    coords = ctx.to_eigbasis(xi.mat) * np.exp(exponents)
    return GnsVector(ctx.from_eigbasis(coords), ctx)


def apply_conjugation(op: AntilinearOp, xi: GnsVector) -> GnsVector:
    return GnsVector(op.apply_mat(xi.mat), xi.ctx)


def apply_jm(ctx: GnsContext, xi: GnsVector) -> GnsVector:
    """Modular conjugation: a rho^{1/2} -> rho^{1/2} a^dagger, i.e. the adjoint."""
    if xi.ctx is not ctx:
        raise ContractError("vector does not belong to this GNS context")
    return apply_conjugation(ctx.jm_op, xi)


def apply_j(ctx: GnsContext, xi: GnsVector) -> GnsVector:
    """Coordinate conjugation in the eigen matrix-unit basis."""
    if xi.ctx is not ctx:
        raise ContractError("vector does not belong to this GNS context")
    return apply_conjugation(ctx.j_op, xi)


def apply_u(ctx: GnsContext, xi: GnsVector) -> GnsVector:
    """The flip unitary, E_ij -> E_ji on eigen matrix units."""
    if xi.ctx is not ctx:
        raise ContractError("vector does not belong to this GNS context")
    return GnsVector(ctx.kernel @ xi.mat.T @ ctx.kernel.conj().T, ctx)


def conjugate_h_vector(ctx: GnsContext, f: np.ndarray) -> np.ndarray:
    """J_c on the base space: conjugation of coefficients in rho's eigenbasis."""
    return ctx.kernel @ np.asarray(f, dtype=complex).conj()


def transpose_operator(ctx: GnsContext, a) -> np.ndarray:
    """a -> J_c a^* J_c; the matrix transpose in rho's eigenbasis."""
    a = require_square(np.asarray(a, dtype=complex))
    if a.shape[0] != ctx.dim:
        raise ContractError(f"operator dim {a.shape[0]} != context dim {ctx.dim}")
    return ctx.kernel @ a.T @ ctx.kernel.conj().T


def apply_tau(ctx: GnsContext, xi: GnsVector) -> GnsVector:
    """Transposition lifted to the GNS space: a Omega -> a^t Omega."""
    if xi.ctx is not ctx:
        raise ContractError("vector does not belong to this GNS context")
    a_t = transpose_operator(ctx, ctx.operator_of(xi))
    return GnsVector(a_t @ ctx.sqrt_rho, ctx)


def _sample_vectors(ctx: GnsContext, rng: np.random.Generator, count: int) -> list[GnsVector]:
    out = []
    for _ in range(count):
        g = complex_gaussian(rng, ctx.dim, ctx.dim)
        out.append(ctx.vector(g / np.linalg.norm(g)))
    return out


def verify_modular_identities(ctx: GnsContext, samples: int = 50, seed: int = 0) -> dict:
    """Residuals of the operator identities tying U, J, J_m and Delta together.

    Includes the commutant property of  alpha(x) = U x U  against left
    multiplications; all residuals should sit at 1e-10 for well-conditioned
    states.
    """
    if samples < 1:
        raise ContractError("samples must be >= 1")
    rng = generator(seed)
    vecs = _sample_vectors(ctx, rng, samples)
    res = {key: 0.0 for key in (
        "u_squared", "u_selfadjoint", "j_eq_u_jm",
        "commute_j_jm", "commute_j_u", "commute_jm_u",
        "delta_half_j", "u_delta_flip", "commutant",
    )}

    def bump(key: str, value: float):
        res[key] = max(res[key], float(value))

    def gap(x: GnsVector, y: GnsVector) -> float:
        return float(np.max(np.abs(x.mat - y.mat)))

    for xi in vecs:
        u_xi = apply_u(ctx, xi)
        bump("u_squared", gap(apply_u(ctx, u_xi), xi))
        bump("j_eq_u_jm", gap(apply_j(ctx, xi), apply_u(ctx, apply_jm(ctx, xi))))
        bump("commute_j_jm", gap(apply_j(ctx, apply_jm(ctx, xi)), apply_jm(ctx, apply_j(ctx, xi))))
        bump("commute_j_u", gap(apply_j(ctx, u_xi), apply_u(ctx, apply_j(ctx, xi))))
        bump("commute_jm_u", gap(apply_jm(ctx, u_xi), apply_u(ctx, apply_jm(ctx, xi))))
        d_half = apply_delta_power(ctx, 0.5, xi)
        bump("delta_half_j", gap(apply_j(ctx, d_half), apply_delta_power(ctx, 0.5, apply_j(ctx, xi))))
        bump("u_delta_flip", gap(apply_u(ctx, apply_delta_power(ctx, 1.0, xi)),
                                 apply_delta_power(ctx, -1.0, u_xi)))

    for xi, eta in zip(vecs, vecs[1:] + vecs[:1]):
        bump("u_selfadjoint", abs(inner(xi, apply_u(ctx, eta)) - inner(apply_u(ctx, xi), eta)))

    for k in range(min(samples, len(vecs))):
        a = rng.standard_normal((ctx.dim, ctx.dim)) + 1j * rng.standard_normal((ctx.dim, ctx.dim))
        b = rng.standard_normal((ctx.dim, ctx.dim)) + 1j * rng.standard_normal((ctx.dim, ctx.dim))
        a /= np.linalg.norm(a)
        b /= np.linalg.norm(b)
        xi = vecs[k]

        def alpha_a(v: GnsVector) -> GnsVector:
            return apply_u(ctx, ctx.vector(a @ apply_u(ctx, v).mat))

        lhs = alpha_a(ctx.vector(b @ xi.mat))
        rhs = ctx.vector(b @ alpha_a(xi).mat)
        bump("commutant", gap(lhs, rhs))

    res["max_residual"] = max(res.values())
    res["condition_warning"] = ctx.condition_ratio < CONDITION_RATIO_WARN
    res["passed"] = res["max_residual"] <= 1e-10
    return res
