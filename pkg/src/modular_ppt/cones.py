"""Cone geometry on the GNS space.

The interpolating cones V_beta = closure{Delta^beta a Omega : a >= 0} for
beta in [0, 1/2] satisfy the duality V_beta^d = V_{1/2-beta}; V_{1/4} is
the natural (self-dual) cone P, whose elements are exactly the PSD
matrices in matricized form because Delta^{1/4}(a Omega) =
rho^{1/4} a rho^{1/4}.  The flip unitary U maps V_beta onto V_{1/2-beta}
and realizes transposition at the state level.

On a composite system the PPT states correspond to the cone intersection
P_n  ∩  (1 (x) U_B) P_n, which this module tests by two independent
routes: once through cone membership on the joint GNS space, once through
a PSD + partial-transpose check on the reconstructed operator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls

from . import gns as gns_mod
from .errors import ConsistencyError, ContractError
from .gns import GnsContext, GnsVector, apply_delta_power, apply_jm, apply_u, build_gns, inner
from .linalg import (
    BipartiteShape,
    herm_defect,
    hermitize,
    kron,
    mat_sqrt_psd,
    partial_transpose,
    require_density,
)
from .rand import complex_gaussian, generator, random_psd

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class ConeQuery:
    """Which V_beta to test, and the PSD certificate tolerance."""

    beta: float
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if not 0.0 <= self.beta <= 0.5:
            raise ContractError(f"beta must lie in [0, 1/2], got {self.beta}")


@dataclass(frozen=True)
class MembershipVerdict:
    inside: bool
    certificate: float       # min eigenvalue of the witnessing matrix
    route: str
    herm_defect: float = 0.0
    detail: dict = field(default_factory=dict)


def v_beta_membership(ctx: GnsContext, q: ConeQuery, xi: GnsVector) -> MembershipVerdict:
    """xi in V_beta  iff  a = mat(Delta^{-beta} xi) rho^{-1/2} is PSD."""
    a = apply_delta_power(ctx, -q.beta, xi).mat @ ctx.inv_sqrt_rho
    defect = herm_defect(a)
    cert = float(np.linalg.eigvalsh(hermitize(a))[0])
    return MembershipVerdict(
        inside=cert >= -q.tol,
        certificate=cert,
        route=f"v_beta({q.beta})",
        herm_defect=defect,
    )


def natural_cone_membership(ctx: GnsContext, xi: GnsVector, tol: float = DEFAULT_TOL) -> MembershipVerdict:
    """Membership in P = V_{1/4}, decided by two independent routes.

    Route one runs the generic V_beta test at beta = 1/4; route two checks
    mat(xi) directly for positivity (the two are congruent via rho^{1/4}).
    A sign disagreement with both certificates clear of the boundary is an
    internal error.
    """
    via_beta = v_beta_membership(ctx, ConeQuery(0.25, tol), xi)
    spectral_cert = float(np.linalg.eigvalsh(hermitize(xi.mat))[0])
    spectral_inside = spectral_cert >= -tol
    if via_beta.inside != spectral_inside and min(abs(via_beta.certificate), abs(spectral_cert)) > 10 * tol:
        raise ConsistencyError(
            f"natural-cone routes disagree: v_beta cert {via_beta.certificate:.3e}, "
            f"spectral cert {spectral_cert:.3e}"
        )
    return MembershipVerdict(
        inside=via_beta.inside,
        certificate=via_beta.certificate,
        route="natural(v_beta+spectral)",
        herm_defect=max(via_beta.herm_defect, herm_defect(xi.mat)),
        detail={"spectral_certificate": spectral_cert, "vbeta_certificate": via_beta.certificate},
    )


def sample_cone_element(ctx: GnsContext, beta: float, rng: np.random.Generator) -> GnsVector:
    """Constructive V_beta sample Delta^beta a Omega with a random PSD a."""
    a = random_psd(rng, ctx.dim)
    xi = apply_delta_power(ctx, beta, ctx.vector_for_operator(a))
    return ctx.vector(xi.mat / xi.norm())


def _separating_eta(ctx: GnsContext, beta: float, xi: GnsVector) -> tuple[GnsVector, float]:
    """For xi outside V_beta, an eta in V_{1/2-beta} pairing negatively with xi.

    Built from the most negative eigenvector of rho^{1/2} a rho^{1/2},
    where a is the membership witness of xi.
    """
    a = apply_delta_power(ctx, -beta, xi).mat @ ctx.inv_sqrt_rho
    w = hermitize(ctx.sqrt_rho @ a @ ctx.sqrt_rho)
    vals, vecs = np.linalg.eigh(w)
    v = vecs[:, 0]
    eta = apply_delta_power(ctx, 0.5 - beta, ctx.vector_for_operator(np.outer(v, v.conj())))
    return eta, float(vals[0])


def duality_check(ctx: GnsContext, beta: float, samples: int = 100, seed: int = 0,
                  tol: float = DEFAULT_TOL) -> dict:
    """Numerical probe of V_beta = dual(V_{1/2-beta}).

    Pairings of constructive members of the two cones must be nonnegative;
    for random vectors failing the beta membership test a separating
    element of V_{1/2-beta} is produced from the witness eigenvector.
    """
    q = ConeQuery(beta, tol)
    rng = generator(seed)
    min_pairing = np.inf
    for _ in range(samples):
        xi = sample_cone_element(ctx, beta, rng)
        eta = sample_cone_element(ctx, 0.5 - beta, rng)
        min_pairing = min(min_pairing, inner(eta, xi).real)
    separated = 0
    missed = 0
    outside_seen = 0
    for _ in range(samples):
        g = complex_gaussian(rng, ctx.dim, ctx.dim)
        xi = ctx.vector(g / np.linalg.norm(g))
        verdict = v_beta_membership(ctx, q, xi)
        if verdict.inside:
            continue
        outside_seen += 1
        eta, _ = _separating_eta(ctx, beta, xi)
        if inner(eta, xi).real < -tol:
            separated += 1
        else:
            missed += 1
    passed = min_pairing >= -tol and missed == 0
    return {
        "beta": beta,
        "min_member_pairing": float(min_pairing),
        "outside_samples": outside_seen,
        "outside_separated": separated,
        "outside_missed": missed,
        "passed": bool(passed),
    }


def u_maps_cones(ctx: GnsContext, beta: float, samples: int = 100, seed: int = 0,
                 tol: float = DEFAULT_TOL) -> dict:
    """U carries V_beta into V_{1/2-beta}; U Delta^{1/2} fixes V_0."""
    rng = generator(seed)
    worst_flip = np.inf
    worst_v0 = np.inf
    for _ in range(samples):
        xi = sample_cone_element(ctx, beta, rng)
        flipped = v_beta_membership(ctx, ConeQuery(0.5 - beta, tol), apply_u(ctx, xi))
        worst_flip = min(worst_flip, flipped.certificate)
        zero = sample_cone_element(ctx, 0.0, rng)
        back = apply_u(ctx, apply_delta_power(ctx, 0.5, zero))
        worst_v0 = min(worst_v0, v_beta_membership(ctx, ConeQuery(0.0, tol), back).certificate)
    return {
        "beta": beta,
        "min_flip_certificate": float(worst_flip),
        "min_v0_certificate": float(worst_v0),
        "passed": bool(worst_flip >= -tol and worst_v0 >= -tol),
    }


def density_of(xi: GnsVector) -> np.ndarray:
    """The density matrix of the vector state omega_xi: mat(xi) mat(xi)^dagger."""
    return xi.mat @ xi.mat.conj().T


def state_to_cone_vector(ctx: GnsContext, sigma) -> GnsVector:
    """The unique natural-cone vector inducing the state sigma: its PSD root."""
    sigma = require_density(sigma)
    if sigma.shape[0] != ctx.dim:
        raise ContractError(f"state dim {sigma.shape[0]} != context dim {ctx.dim}")
    return ctx.vector(mat_sqrt_psd(sigma))


def transpose_state_vector(ctx: GnsContext, xi: GnsVector,
                           tol: float = DEFAULT_TOL) -> tuple[GnsVector, dict]:
    """The natural-cone vector of the transposed state is U xi."""
    verdict = natural_cone_membership(ctx, xi, tol)
    if not verdict.inside:
        raise ContractError(
            f"vector is not in the natural cone (certificate {verdict.certificate:.3e})"
        )
    out = apply_u(ctx, xi)
    residual = float(np.max(np.abs(
        density_of(out) - gns_mod.transpose_operator(ctx, density_of(xi))
    )))
    return out, {"density_transpose_residual": residual, "passed": residual <= 1e-10}


@dataclass(frozen=True, eq=False)
class CompositeGnsContext:
    """GNS data of a product state, kept alongside its factors."""

    ctx_a: GnsContext
    ctx_b: GnsContext
    joint: GnsContext
    shape: BipartiteShape


def build_composite(ctx_a: GnsContext, ctx_b: GnsContext, check_samples: int = 50,
                    seed: int = 0) -> CompositeGnsContext:
    """Joint GNS context of rho_A (x) rho_B, with factorization checks.

    The modular conjugation and modular operator of the joint context must
    factor as J_A (x) J_B and Delta_A (x) Delta_B on sampled product
    vectors; a violation indicates a kernel bug and raises.
    """
    joint = build_gns(kron(ctx_a.rho, ctx_b.rho))
    comp = CompositeGnsContext(
        ctx_a=ctx_a, ctx_b=ctx_b, joint=joint,
        shape=BipartiteShape(ctx_a.dim, ctx_b.dim),
    )
    rng = generator(seed)
    worst = 0.0
    for _ in range(check_samples):
        ma = complex_gaussian(rng, ctx_a.dim, ctx_a.dim)
        mb = complex_gaussian(rng, ctx_b.dim, ctx_b.dim)
        xi = joint.vector(kron(ma, mb))
        jm_joint = apply_jm(joint, xi).mat
        jm_factored = kron(apply_jm(ctx_a, ctx_a.vector(ma)).mat, apply_jm(ctx_b, ctx_b.vector(mb)).mat)
        worst = max(worst, float(np.max(np.abs(jm_joint - jm_factored))))
        d_joint = apply_delta_power(joint, 1.0, xi).mat
        d_factored = kron(apply_delta_power(ctx_a, 1.0, ctx_a.vector(ma)).mat,
                          apply_delta_power(ctx_b, 1.0, ctx_b.vector(mb)).mat)
        worst = max(worst, float(np.max(np.abs(d_joint - d_factored))))
    if worst > 1e-10:
        raise ConsistencyError(f"composite factorization residual {worst:.3e} > 1e-10")
    return comp


def apply_factor_maps(comp: CompositeGnsContext, mat: np.ndarray,
                      op_a=None, op_b=None) -> np.ndarray:
    """Apply operators acting on the factor GNS spaces slotwise.

    ``op_a`` / ``op_b`` take and return factor-sized matrices (the
    matricized form of vectors in H_pi_A / H_pi_B).
    """
    na, nb = comp.ctx_a.dim, comp.ctx_b.dim
    t = mat.reshape(na, nb, na, nb)
    if op_b is not None:
        out = np.empty_like(t)
        for p in range(na):
            for q in range(na):
                out[p, :, q, :] = op_b(t[p, :, q, :])
        t = out
    if op_a is not None:
        out = np.empty_like(t)
        for r in range(nb):
            for s in range(nb):
                out[:, r, :, s] = op_a(t[:, r, :, s])
        t = out
    return t.reshape(na * nb, na * nb)


def one_otimes_ub(comp: CompositeGnsContext, xi: GnsVector) -> GnsVector:
    """(1 (x) U_B) on the joint GNS space, blockwise on the B slot."""
    if xi.ctx is not comp.joint:
        raise ContractError("vector does not belong to the joint GNS context")
    kb = comp.ctx_b.kernel
    out = apply_factor_maps(comp, xi.mat, op_b=lambda m: kb @ m.T @ kb.conj().T)
    return comp.joint.vector(out)


def pn_intersection_membership(comp: CompositeGnsContext, xi: GnsVector,
                               tol: float = DEFAULT_TOL) -> MembershipVerdict:
    """Membership in P_n ∩ P_n^tau, the cone of PPT states.

    Route one: xi and (1 (x) U_B) xi both lie in the natural cone of the
    joint context.  Route two: a = rho^{-1/4} mat(xi) rho^{-1/4} and its
    partial transpose are both PSD.  The two certificate pairs coincide up
    to rounding; verdict disagreement away from the boundary raises.
    """
    joint = comp.joint
    if xi.ctx is not joint:
        raise ContractError("vector does not belong to the joint GNS context")
    m1 = natural_cone_membership(joint, xi, tol)
    m2 = natural_cone_membership(joint, one_otimes_ub(comp, xi), tol)
    cert_route1 = min(m1.certificate, m2.certificate)

    quarter = apply_delta_power(joint, -0.25, xi)
    a = quarter.mat @ joint.inv_sqrt_rho
    a_gamma = partial_transpose(a, comp.shape, "B")
    cert_a = float(np.linalg.eigvalsh(hermitize(a))[0])
    cert_gamma = float(np.linalg.eigvalsh(hermitize(a_gamma))[0])
    cert_route2 = min(cert_a, cert_gamma)

    inside1 = cert_route1 >= -tol
    inside2 = cert_route2 >= -tol
    if inside1 != inside2 and min(abs(cert_route1), abs(cert_route2)) > 10 * tol:
        raise ConsistencyError(
            f"PPT-cone routes disagree: cone route {cert_route1:.3e}, matrix route {cert_route2:.3e}"
        )
    return MembershipVerdict(
        inside=inside2,
        certificate=cert_route2,
        route="pn_intersection",
        herm_defect=max(herm_defect(a), m1.herm_defect),
        detail={
            "cone_certificates": (m1.certificate, m2.certificate),
            "matrix_certificates": (cert_a, cert_gamma),
            "certificate_gap": float(max(abs(m1.certificate - cert_a), abs(m2.certificate - cert_gamma))),
        },
    )


def _natural_cone_generator(comp: CompositeGnsContext, ops_a, ops_b) -> np.ndarray:
    """(sum a_k (x) b_k) j_m(sum a_l (x) b_l) Omega  =  T rho^{1/2} T^dagger."""
    t_op = sum(kron(a, b) for a, b in zip(ops_a, ops_b))
    return t_op @ comp.joint.sqrt_rho @ t_op.conj().T


def _commutant_cone_generator(comp: CompositeGnsContext, ops_a, ops_b) -> np.ndarray:
    """Same expression with each b_k replaced by alpha(b_k) = U_B b_k U_B."""
    ctx_b = comp.ctx_b

    def alpha(b):
        def act(m: np.ndarray) -> np.ndarray:
            inner_u = apply_u(ctx_b, ctx_b.vector(m)).mat
            return apply_u(ctx_b, ctx_b.vector(b @ inner_u)).mat
        return act

    def j_b(m: np.ndarray) -> np.ndarray:
        return ctx_b.jm_op.apply_mat(m)

    def j_a(m: np.ndarray) -> np.ndarray:
        return comp.ctx_a.jm_op.apply_mat(m)

    omega = comp.joint.sqrt_rho
    total = np.zeros_like(omega)
    for a_k, b_k in zip(ops_a, ops_b):
        for a_l, b_l in zip(ops_a, ops_b):
            # j_m(a_l (x) alpha(b_l)) Omega, factor by factor
            vec = apply_factor_maps(
                comp, omega,
                op_a=lambda m, al=a_l: j_a(al @ j_a(m)),
                op_b=lambda m, bl=b_l: j_b(alpha(bl)(j_b(m))),
            )
            vec = apply_factor_maps(
                comp, vec,
                op_a=lambda m, ak=a_k: ak @ m,
                op_b=alpha(b_k),
            )
            total = total + vec
    return total


def commutant_cone_check(comp: CompositeGnsContext, samples: int = 20, seed: int = 0,
                         terms: int = 2, tol: float = DEFAULT_TOL) -> dict:
    """(1 (x) U_B) P equals the natural cone of the commutant pair.

    Verifies the generator identity
    (1 (x) U_B)[(Σ a_k (x) b_k) j_m(Σ a_l (x) b_l) Ω]
        = (Σ a_k (x) α(b_k)) j_m(Σ a_l (x) α(b_l)) Ω,
    then cross-pairs samples of the two cones, which must be nonnegative
    by self-duality.
    """
    if samples < 1:
        raise ContractError("samples must be >= 1")
    rng = generator(seed)
    na, nb = comp.ctx_a.dim, comp.ctx_b.dim
    worst_residual = 0.0
    flipped_p: list[np.ndarray] = []
    commutant_gen: list[np.ndarray] = []
    for _ in range(samples):
        ops_a = [complex_gaussian(rng, na, na) / np.sqrt(na) for _ in range(terms)]
        ops_b = [complex_gaussian(rng, nb, nb) / np.sqrt(nb) for _ in range(terms)]
        plain = _natural_cone_generator(comp, ops_a, ops_b)
        lhs = one_otimes_ub(comp, comp.joint.vector(plain)).mat
        rhs = _commutant_cone_generator(comp, ops_a, ops_b)
        worst_residual = max(worst_residual, float(np.max(np.abs(lhs - rhs))))
        flipped_p.append(lhs / np.linalg.norm(lhs))
        commutant_gen.append(rhs / np.linalg.norm(rhs))
    min_pairing = np.inf
    for x in flipped_p:
        for y in commutant_gen:
            min_pairing = min(min_pairing, np.trace(x.conj().T @ y).real)
    return {
        "generator_identity_residual": worst_residual,
        "min_cross_pairing": float(min_pairing),
        "passed": bool(worst_residual <= 1e-10 and min_pairing >= -tol),
    }


def _lmo_product_atom(residual: np.ndarray, na: int, nb: int,
                      rng: np.random.Generator, rounds: int = 25,
                      starts: int = 3) -> tuple[np.ndarray, np.ndarray]:
    """Best pure (x) pure atom for Re<u u* (x) v v*, residual>, by alternation."""
    t = residual.reshape(na, nb, na, nb)
    best = None
    best_val = -np.inf
    for _ in range(starts):
        v = rng.standard_normal(nb) + 1j * rng.standard_normal(nb)
        v /= np.linalg.norm(v)
        u = np.zeros(na, dtype=complex)
        for _ in range(rounds):
            q = np.outer(v, v.conj())
            m_a = hermitize(np.einsum("prqs,rs->pq", t, q.conj()))
            vals, vecs = np.linalg.eigh(m_a)
            u = vecs[:, -1]
            p = np.outer(u, u.conj())
            m_b = hermitize(np.einsum("prqs,pq->rs", t, p.conj()))
            vals_b, vecs_b = np.linalg.eigh(m_b)
            v_new = vecs_b[:, -1]
            if np.linalg.norm(np.outer(v_new, v_new.conj()) - np.outer(v, v.conj())) < 1e-13:
                v = v_new
                break
            v = v_new
        val = float(vals_b[-1])
        if val > best_val:
            best_val = val
            best = (u, v)
    return best


def separable_cone_distance(comp: CompositeGnsContext, xi: GnsVector, iters: int = 200,
                            seed: int = 0, restarts: int = 10,
                            max_terms: int | None = None) -> tuple[float, GnsVector, dict]:
    """Certified upper bound on the distance from xi to the cone of
    products of factor-cone elements (Gilbert-style greedy fit).

    Atoms are pure (x) pure PSD products; after each linear-maximization
    step all nonnegative coefficients are refit by NNLS, so the best bound
    is monotone nonincreasing.  The returned value is always the distance
    to an exhibited feasible point, never a claim about the true distance.
    """
    joint = comp.joint
    if xi.ctx is not joint:
        raise ContractError("vector does not belong to the joint GNS context")
    na, nb = comp.ctx_a.dim, comp.ctx_b.dim
    dim = na * nb
    cap = max_terms or dim * dim
    target = xi.mat
    target_vec = np.concatenate([target.real.ravel(), target.imag.ravel()])
    rng = generator(seed)

    best_bound = float(np.linalg.norm(target))
    best_mat = np.zeros_like(target)
    history: list[float] = []
    for _ in range(restarts):
        atoms: list[np.ndarray] = []
        approx = np.zeros_like(target)
        for _ in range(max(1, iters // restarts)):
            resid = target - approx
            u, v = _lmo_product_atom(resid, na, nb, rng)
            atom = kron(np.outer(u, u.conj()), np.outer(v, v.conj()))
            if atoms and np.trace(atom.conj().T @ resid).real <= 1e-15:
                break
            atoms.append(atom)
            if len(atoms) > cap:
                atoms = atoms[-cap:]
            basis = np.stack([np.concatenate([a.real.ravel(), a.imag.ravel()]) for a in atoms], axis=1)
            coeff, _ = nnls(basis, target_vec)
            approx = sum(c * a for c, a in zip(coeff, atoms))
            atoms = [a for c, a in zip(coeff, atoms) if c > 1e-14]
            bound = float(np.linalg.norm(target - approx))
            if bound < best_bound:
                best_bound = bound
                best_mat = approx
            history.append(best_bound)
            if best_bound <= 1e-9:
                break
        if best_bound <= 1e-9:
            break
    info = {"history": history, "terms": len(atoms), "converged": best_bound <= 1e-9}
    return best_bound, joint.vector(best_mat), info
