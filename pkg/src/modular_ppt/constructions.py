"""Constructive recipes and exploratory experiments.

Three things live here: the dim-2 anticommutator criterion (vanishing of
<f (x) y, {A (x) 1, rho} f (x) y> for all y forces the block transpose of
rho to stay positive), the recipe that manufactures PPT states from
cone-intersection vectors, and an exploratory harness probing how PPT-ness
of a state relates to PPT-ness of its square root.  The harness tallies
and reports; it never asserts an answer to the open correspondence.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import cones as cones_mod
from .cones import CompositeGnsContext, build_composite, density_of, one_otimes_ub, state_to_cone_vector
from .errors import ContractError, ShapeError
from .gns import apply_delta_power, apply_u, build_gns, transpose_operator
from .linalg import (
    BipartiteShape,
    hermitize,
    mat_sqrt_psd,
    partial_transpose,
    project_psd,
    require_density,
)
from .optim import PptSetSpec, sample_ppt_density
from .rand import complex_gaussian, generator, random_faithful_density

SOLUTION_SV_THRESHOLD = 1e-9
RESIDUAL_TOL = 1e-9


@dataclass(frozen=True)
class AnticommutatorInstance:
    rho: np.ndarray        # density on 2 (x) m
    f: np.ndarray          # unit vector in C^2
    a_op: np.ndarray       # Hermitian 2x2, nonzero
    residual: float        # max |compressed anticommutator block|


@dataclass
class ExperimentReport:
    samples: int
    dims: BipartiteShape
    counts: dict = field(default_factory=dict)
    counterexamples: list = field(default_factory=list)
    seed: int = 0
    control_failures: int = 0
    max_control_residual: float = 0.0
    partial_transpose_probe: dict = field(default_factory=dict)


def _adapted_hermitian_basis(f: np.ndarray) -> list[np.ndarray]:
    """Hermitian 2x2 basis of the operators acting nontrivially on f.

    In the orthonormal basis {f, g} these are ff*, (fg* + gf*)/sqrt2 and
    i(fg* - gf*)/sqrt2.  The missing fourth direction gg* annihilates f,
    which makes the anticommutator condition vacuous; solutions along it
    say nothing about rho, so the solver excludes it.
    """
    g = np.array([-f[1].conjugate(), f[0].conjugate()], dtype=complex)
    ff = np.outer(f, f.conj())
    fg = np.outer(f, g.conj())
    return [ff, (fg + fg.conj().T) / np.sqrt(2), 1j * (fg - fg.conj().T) / np.sqrt(2)]


def _compressed_block(rho: np.ndarray, f: np.ndarray, a_op: np.ndarray, m: int) -> np.ndarray:
    """V_f^* {A (x) 1, rho} V_f as an m x m matrix (V_f y = f (x) y)."""
    a_big = np.kron(a_op, np.eye(m))
    anti = a_big @ rho + rho @ a_big
    blocks = anti.reshape(2, m, 2, m)
    return np.einsum("i,irjs,j->rs", f.conj(), blocks, f)


def _compressed_block_loop(rho: np.ndarray, f: np.ndarray, a_op: np.ndarray, m: int) -> np.ndarray:
    """Same block entrywise, by explicit matrix-vector products (cross-check)."""
    out = np.zeros((m, m), dtype=complex)
    for q in range(m):
        v = np.zeros((2, m), dtype=complex)
        v[:, q] = f
        vec = v.ravel()
        av = (a_op @ (rho @ vec).reshape(2, m)).ravel() + (rho @ (a_op @ vec.reshape(2, m)).ravel())
        for p in range(m):
            w = np.zeros((2, m), dtype=complex)
            w[:, p] = f
            out[p, q] = w.ravel().conj() @ av
    return out


def find_anticommutator_solution(rho, f, sv_threshold: float = SOLUTION_SV_THRESHOLD) -> np.ndarray | None:
    """Hermitian A on C^2, acting nontrivially on f, with
    <f (x) y, {A (x) 1, rho} f (x) y> = 0 for all y.

    The condition is the vanishing of one m x m Hermitian block, linear in
    A; with the vacuous f-annihilating direction removed it is a
    homogeneous real system in three parameters.  Returns None when that
    system's nullspace is trivial (smallest singular value >= threshold),
    which is the generic situation.
    """
    rho = require_density(rho)
    if rho.shape[0] % 2 != 0:
        raise ContractError(f"state must live on 2 (x) m, got dim {rho.shape[0]}")
    m = rho.shape[0] // 2
    f = np.asarray(f, dtype=complex).ravel()
    if f.size != 2:
        raise ContractError(f"f must live in C^2, got dim {f.size}")
    f = f / np.linalg.norm(f)
    basis = _adapted_hermitian_basis(f)
    columns = []
    for basis_a in basis:
        block = _compressed_block(rho, f, basis_a, m)
        columns.append(np.concatenate([block.real.ravel(), block.imag.ravel()]))
    system = np.stack(columns, axis=1)
    svals = np.linalg.svd(system, compute_uv=False)
    if svals[-1] >= sv_threshold:
        return None
    _, _, vt = np.linalg.svd(system)
    coeffs = vt[-1]
    a_op = sum(c * b for c, b in zip(coeffs, basis))
    a_op = a_op / np.linalg.norm(a_op)
    return a_op


def instance_residual(rho, f, a_op, loop: bool = False) -> float:
    m = rho.shape[0] // 2
    f = np.asarray(f, dtype=complex).ravel()
    f = f / np.linalg.norm(f)
    block = _compressed_block_loop(rho, f, a_op, m) if loop else _compressed_block(rho, f, a_op, m)
    return float(np.max(np.abs(block)))


def make_instance(rho, f) -> AnticommutatorInstance | None:
    a_op = find_anticommutator_solution(rho, f)
    if a_op is None:
        return None
    return AnticommutatorInstance(
        rho=np.asarray(rho, dtype=complex),
        f=np.asarray(f, dtype=complex).ravel() / np.linalg.norm(f),
        a_op=a_op,
        residual=instance_residual(rho, f, a_op),
    )


def random_anticommutator_instance(rng: np.random.Generator, m: int,
                                   kind: str = "herm_offdiag") -> AnticommutatorInstance | None:
    """Sample a state family known to satisfy the hypothesis, then solve.

    Kinds: 'product' (rho_A (x) rho_B, random f), 'block_diag' (vanishing
    off-diagonal block, f = e_1), 'herm_offdiag' / 'antiherm_offdiag'
    (structured off-diagonal block, f = e_1).
    """
    e1 = np.array([1.0, 0.0], dtype=complex)
    if kind == "product":
        rho = np.kron(random_faithful_density(rng, 2), random_faithful_density(rng, m))
        g = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        f = g / np.linalg.norm(g)
    elif kind == "block_diag":
        rho = np.zeros((2 * m, 2 * m), dtype=complex)
        p = rng.uniform(0.25, 0.75)
        rho[:m, :m] = p * random_faithful_density(rng, m)
        rho[m:, m:] = (1 - p) * random_faithful_density(rng, m)
        f = e1
    elif kind in ("herm_offdiag", "antiherm_offdiag"):
        g = complex_gaussian(rng, m, m)
        s = (g + g.conj().T) / 2 if kind == "herm_offdiag" else (g - g.conj().T) / 2
        big = np.zeros((2 * m, 2 * m), dtype=complex)
        big[:m, :m] = (lambda x: (x + x.conj().T) / 2)(complex_gaussian(rng, m, m))
        big[m:, m:] = (lambda x: (x + x.conj().T) / 2)(complex_gaussian(rng, m, m))
        big[:m, m:] = s
        big[m:, :m] = s.conj().T
        shift = -float(np.linalg.eigvalsh(big)[0]) + 0.2
        rho = big + shift * np.eye(2 * m)
        rho = rho / np.trace(rho).real
        f = e1
    else:
        raise ContractError(f"unknown instance kind {kind!r}")
    return make_instance(rho, f)


def verify_anticommutator_ppt(inst: AnticommutatorInstance, tol: float = RESIDUAL_TOL) -> dict:
    """The criterion's conclusion: the block transpose of rho stays positive.

    Any violation beyond tolerance is a falsification event and ships the
    serialized instance in the report.
    """
    if inst.residual > tol:
        raise ContractError(f"instance residual {inst.residual:.3e} exceeds {tol:.1e}")
    m = inst.rho.shape[0] // 2
    shape = BipartiteShape(2, m)
    gamma = hermitize(partial_transpose(inst.rho, shape, "A"))
    min_eig = float(np.linalg.eigvalsh(gamma)[0])
    falsified = min_eig < -tol
    report = {"min_gamma_eig": min_eig, "falsified": bool(falsified)}
    if falsified:
        report["instance"] = {
            "rho_re": inst.rho.real.tolist(),
            "rho_im": inst.rho.imag.tolist(),
            "f_re": inst.f.real.tolist(),
            "f_im": inst.f.imag.tolist(),
            "a_re": inst.a_op.real.tolist(),
            "a_im": inst.a_op.imag.tolist(),
        }
    return report


def construct_ppt_from_cone(comp: CompositeGnsContext, seed: int = 0,
                            distance_iters: int = 120,
                            candidate_threshold: float = 0.05) -> tuple[np.ndarray, dict]:
    """State construction from a vector in the PPT cone intersection.

    Projects a random Hermitian onto the PPT set, forms xi = Delta^{1/4} a
    Omega, and reports (i) the cone membership certificates of xi, (ii)
    the PPT verdict of the induced state mat(xi)^2 / Tr -- which need not
    be PPT; that relation is exactly what the square-root experiment
    probes -- and (iii) an upper bound on the distance from xi to the
    product cone.  A large bound flags the vector as a candidate for
    PPT-but-not-separable; nothing stronger is claimed.
    """
    joint = comp.joint
    if joint.dim > 81:
        raise ShapeError(f"joint dimension {joint.dim} exceeds the construction cap 81")
    rng = generator(seed)
    spec = PptSetSpec(comp.shape)
    a = sample_ppt_density(rng, spec)
    xi = apply_delta_power(joint, 0.25, joint.vector_for_operator(project_psd(a)))
    xi = joint.vector(xi.mat / xi.norm())
    # certificates inherit the sampler's feasibility slack, so test at 10x that
    verdict = cones_mod.pn_intersection_membership(comp, xi, tol=10 * spec.tol_feas)
    dens = density_of(xi)
    dens = dens / np.trace(dens).real
    gamma_min = float(np.linalg.eigvalsh(hermitize(partial_transpose(dens, comp.shape, "B")))[0])
    bound, _, info = cones_mod.separable_cone_distance(comp, xi, iters=distance_iters, seed=seed)
    report = {
        "xi_certificate": verdict.certificate,
        "xi_inside": verdict.inside,
        "certificate_gap": verdict.detail["certificate_gap"],
        "state_gamma_min_eig": gamma_min,
        "state_is_ppt": bool(gamma_min >= -1e-9),
        "separable_bound": float(bound),
        "separable_terms": info["terms"],
        "candidate_ppt_not_separable": bool(verdict.inside and bound > candidate_threshold),
    }
    return dens, report


def sqrt_ppt_experiment(shape: BipartiteShape, samples: int = 100, seed: int = 0) -> ExperimentReport:
    """Probe: does PPT-ness of a state transfer to its square root?

    For Dykstra-sampled PPT states D the harness tallies the PPT verdict
    of D^{1/2}, runs the always-true control (the flip unitary realizes
    the full transpose at the state level), and measures how far
    (1 (x) U_B) acts like a partial transpose on the state of the cone
    vector of D.  Only tallies and residuals are reported.
    """
    if samples < 1:
        raise ContractError("samples must be >= 1")
    rng = generator(seed)
    ctx_a = build_gns(random_faithful_density(rng, shape.dim_a))
    ctx_b = build_gns(random_faithful_density(rng, shape.dim_b))
    comp = build_composite(ctx_a, ctx_b)
    joint = comp.joint
    kb = comp.ctx_b.kernel
    eye_a = np.eye(shape.dim_a)

    counts = {"ppt_and_sqrt_ppt": 0, "ppt_and_sqrt_npt": 0, "input_not_ppt": 0}
    report = ExperimentReport(samples=samples, dims=shape, counts=counts, seed=seed)
    spec = PptSetSpec(shape)
    pt_probe_max = 0.0
    pt_probe_min = np.inf
    pt_matches = 0
    for _ in range(samples):
        d_raw = sample_ppt_density(rng, spec)
        d = project_psd(d_raw)
        d = d / np.trace(d).real
        gamma_min = float(np.linalg.eigvalsh(hermitize(partial_transpose(d, shape, "B")))[0])
        if gamma_min < -1e-7:
            counts["input_not_ppt"] += 1
            continue
        root = mat_sqrt_psd(d)
        root_gamma_min = float(np.linalg.eigvalsh(hermitize(partial_transpose(root, shape, "B")))[0])
        if root_gamma_min >= -RESIDUAL_TOL:
            counts["ppt_and_sqrt_ppt"] += 1
        else:
            counts["ppt_and_sqrt_npt"] += 1
            if len(report.counterexamples) < 10:
                report.counterexamples.append({
                    "d_re": d.real.tolist(),
                    "d_im": d.imag.tolist(),
                    "sqrt_gamma_min_eig": root_gamma_min,
                })
        xi = state_to_cone_vector(joint, d)
        control = float(np.max(np.abs(
            density_of(apply_u(joint, xi)) - transpose_operator(joint, d)
        )))
        report.max_control_residual = max(report.max_control_residual, control)
        if control > 1e-10:
            report.control_failures += 1
        zeta = one_otimes_ub(comp, xi)
        eigen_pt = np.kron(eye_a, kb) @ partial_transpose(d, shape, "B") @ np.kron(eye_a, kb).conj().T
        probe = float(np.max(np.abs(density_of(zeta) - eigen_pt)))
        pt_probe_max = max(pt_probe_max, probe)
        pt_probe_min = min(pt_probe_min, probe)
        if probe <= 1e-9:
            pt_matches += 1
    report.partial_transpose_probe = {
        "max_residual": pt_probe_max,
        "min_residual": float(pt_probe_min if pt_probe_min < np.inf else 0.0),
        "matches_at_1e-9": pt_matches,
    }
    return report


def reverify_counterexample(entry: dict, shape: BipartiteShape) -> float:
    """Recompute a serialized counterexample's sqrt-PT eigenvalue from scratch."""
    d = np.array(entry["d_re"]) + 1j * np.array(entry["d_im"])
    root = mat_sqrt_psd(require_density(d, tol_psd=1e-8))
    return float(np.linalg.eigvalsh(hermitize(partial_transpose(root, shape, "B")))[0])
