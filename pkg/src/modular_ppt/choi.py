"""Correspondence between operators H on H (x) K and linear maps
S_H : B(H) -> B(K), via S_H(E_xy) = V_x^* H V_y (V_x z = x (x) z).

The block table {B_ij = S_H(E_ij)} and H = sum_ij E_ij (x) B_ij are exact
inverses (pure reindexing, bit-exact).  A map is decomposable (CP + CP
composed with transposition) exactly when its operator pairs nonnegatively
with every PPT state; the pairing is made executable through the solvers
in ``optim``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, ShapeError
from .linalg import (
    BipartiteShape,
    herm_defect,
    hermitize,
    partial_transpose,
    require_bipartite,
    require_hermitian,
    require_square,
)
from .optim import PptSetSpec, min_trace_over_ppt, sample_ppt_density
from .rand import generator, random_product_density, random_psd


@dataclass(frozen=True)
class MapTable:
    """Block representation of a linear map B(H) -> B(K).

    blocks[i, j] is the m x m image of the matrix unit E_ij; linearity
    gives S(a) = sum_ij a_ij blocks[i, j].
    """

    dim_in: int
    dim_out: int
    blocks: np.ndarray  # shape (n, n, m, m)

    def __post_init__(self):
        n, m = self.dim_in, self.dim_out
        if self.blocks.shape != (n, n, m, m):
            raise ShapeError(f"blocks shape {self.blocks.shape} != {(n, n, m, m)}")


@dataclass(frozen=True)
class DecomposableWitness:
    """h = h1 + (h2 partial-transposed on A), with h1, h2 PSD.

    The associated map S_h is CP + CP∘transpose by construction, so h must
    pair nonnegatively with every PPT state.
    """

    h1: np.ndarray
    h2: np.ndarray
    shape: BipartiteShape

    def __post_init__(self):
        for name, part in (("h1", self.h1), ("h2", self.h2)):
            w = np.linalg.eigvalsh(hermitize(require_bipartite(part, self.shape)))
            if w[0] < -1e-10:
                raise ContractError(f"{name} must be PSD, min eigenvalue {w[0]:.3e}")

    @property
    def h(self) -> np.ndarray:
        return self.h1 + partial_transpose(self.h2, self.shape, "A")


def map_from_choi(h, shape: BipartiteShape) -> MapTable:
    """Blocks B_ij[k, l] = h[(i m + k), (j m + l)] -- a pure reshape."""
    h = require_bipartite(h, shape)
    n, m = shape.dim_a, shape.dim_b
    blocks = h.reshape(n, m, n, m).transpose(0, 2, 1, 3).copy()
    return MapTable(dim_in=n, dim_out=m, blocks=blocks)


def choi_from_map(t: MapTable) -> np.ndarray:
    """h = sum_ij E_ij (x) B_ij; exact inverse of ``map_from_choi``."""
    n, m = t.dim_in, t.dim_out
    return t.blocks.transpose(0, 2, 1, 3).reshape(n * m, n * m).copy()


def apply_map(t: MapTable, a) -> np.ndarray:
    a = require_square(a)
    if a.shape[0] != t.dim_in:
        raise ShapeError(f"input dim {a.shape[0]} != map input dim {t.dim_in}")
    return np.einsum("ij,ijkl->kl", a, t.blocks)


def identity_map_table(n: int) -> MapTable:
    blocks = np.zeros((n, n, n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            blocks[i, j, i, j] = 1.0
    return MapTable(n, n, blocks)


def transposition_map_table(n: int) -> MapTable:
    blocks = np.zeros((n, n, n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            blocks[i, j, j, i] = 1.0
    return MapTable(n, n, blocks)


def random_decomposable(shape: BipartiteShape, seed: int = 0) -> DecomposableWitness:
    """Random CP + CP∘transpose witness, h_i = G_i G_i^dagger normalized."""
    rng = generator(seed)
    h1 = random_psd(rng, shape.dim)
    h2 = random_psd(rng, shape.dim)
    return DecomposableWitness(h1=h1, h2=h2, shape=shape)


def dual_pairing_test(h, shape: BipartiteShape, samples: int = 100, seed: int = 0,
                      optimizer: bool = False, opt_iters: int = 300,
                      opt_restarts: int = 2) -> dict:
    """min Tr(D h) over sampled PPT states, optionally over the solver.

    A certified negative minimum proves h is outside the dual cone of the
    PPT states, hence that S_h is not decomposable; decomposable inputs
    must stay >= -1e-8.
    """
    h = require_hermitian(require_bipartite(h, shape))
    rng = generator(seed)
    spec = PptSetSpec(shape)
    best = np.inf
    for _ in range(samples):
        d = sample_ppt_density(rng, spec)
        best = min(best, float(np.trace(d @ h).real))
    report = {"min_sampled_pairing": best, "samples": samples, "optimizer_used": optimizer}
    if optimizer:
        value, _, trace = min_trace_over_ppt(h, spec, iters=opt_iters, restarts=opt_restarts, seed=seed)
        report["optimizer_value"] = float(value)
        report["optimizer_spread"] = trace.restart_spread
        best = min(best, float(value))
    report["min_pairing"] = float(best)
    return report


def stormer_block_test(t: MapTable, k: int = 2, samples: int = 50, seed: int = 0) -> dict:
    """Apply id_{M_k} (x) S_H blockwise to PPT inputs on the k (x) n system.

    For decomposable maps the output must be PSD whenever both A and its
    k-side partial transpose are PSD; the minimum output eigenvalue over
    all samples is reported.
    """
    if k < 1:
        raise ContractError("k must be >= 1")
    rng = generator(seed)
    n, m = t.dim_in, t.dim_out
    # inputs sampled one decade tighter than the -1e-8 output verdict
    in_spec = PptSetSpec(BipartiteShape(k, n), tol_feas=1e-9)
    min_eig = np.inf
    for _ in range(samples):
        a = sample_ppt_density(rng, in_spec)
        blocks_in = a.reshape(k, n, k, n)
        out = np.zeros((k, m, k, m), dtype=complex)
        for s in range(k):
            for r in range(k):
                out[s, :, r, :] = apply_map(t, blocks_in[s, :, r, :])
        w = np.linalg.eigvalsh(hermitize(out.reshape(k * m, k * m)))
        min_eig = min(min_eig, float(w[0]))
    return {"k": k, "samples": samples, "min_output_eigenvalue": float(min_eig),
            "passed": bool(min_eig >= -1e-8)}


def lemma_fi_functional(a, k: int, n: int, xs: list, hs: list,
                        check_samples: int = 100, seed: int = 0) -> tuple[np.ndarray, dict]:
    """The PPT-representing kernel of the functional
    psi(C) = sum <h_i (x) e_p, A h_j (x) e_r> <e_p (x) x_i, C e_r (x) x_j>.

    Requires A and its k-side partial transpose PSD on the k (x) n split.
    Returns the operator Psi on H (x) K with psi(C) = Tr(Psi C), plus a
    report checking psi >= 0 on random PSD C and after composing with
    transposition on the H factor.
    """
    a = require_hermitian(require_bipartite(a, BipartiteShape(k, n)))
    w = np.linalg.eigvalsh(hermitize(a))
    a_pt = partial_transpose(a, BipartiteShape(k, n), "A")
    w_pt = np.linalg.eigvalsh(hermitize(a_pt))
    if w[0] < -1e-9 or w_pt[0] < -1e-9:
        raise ContractError(
            f"A must be PPT on the k x n split: min eigs {w[0]:.3e}, {w_pt[0]:.3e}"
        )
    xs = [np.asarray(x, dtype=complex).ravel() for x in xs]
    hs = [np.asarray(h, dtype=complex).ravel() for h in hs]
    if len(xs) != k or len(hs) != k:
        raise ContractError(f"need k={k} vectors in both xs and hs")
    if any(h.size != k for h in hs):
        raise ShapeError("each h_i must live in C^k")
    m = xs[0].size
    if any(x.size != m for x in xs):
        raise ShapeError("all x_i must have equal dimension")

    a4 = a.reshape(k, n, k, n)
    # psi[(r,u),(p,v)] = sum_ij <h_i (x) e_p, A h_j (x) e_r> x_j[u] conj(x_i[v])
    psi = np.zeros((n * m, n * m), dtype=complex)
    for i in range(k):
        for j in range(k):
            weight_ij = np.einsum("s,sptr,t->pr", hs[i].conj(), a4, hs[j])
            psi += np.einsum("pr,u,v->rupv", weight_ij, xs[j], xs[i].conj()).reshape(n * m, n * m)
    report = _check_functional_positivity(psi, BipartiteShape(n, m), check_samples, seed)
    return psi, report


def _check_functional_positivity(psi: np.ndarray, shape: BipartiteShape,
                                 samples: int, seed: int) -> dict:
    rng = generator(seed)
    worst = np.inf
    worst_tau = np.inf
    for _ in range(samples):
        c = random_psd(rng, shape.dim)
        worst = min(worst, float(np.trace(psi @ c).real))
        c_tau = partial_transpose(c, shape, "A")
        worst_tau = min(worst_tau, float(np.trace(psi @ c_tau).real))
    defect = herm_defect(psi)
    return {
        "min_functional_value": float(worst),
        "min_functional_value_after_transpose": float(worst_tau),
        "kernel_herm_defect": defect,
        "passed": bool(worst >= -1e-9 and worst_tau >= -1e-9),
    }


def hierarchy_report(shape: BipartiteShape, seed: int = 0, separable_samples: int = 200) -> dict:
    """Numerical evidence for the strict map-class and state-class chains.

    (a) transposition has non-PSD operator (positive but not CP);
    (b) random CP maps pass the block-positivity test on PPT inputs;
    (c) separable states (product mixtures) are always PPT;
    (d) the singlet is not PPT.
    """
    rng = generator(seed)
    n = shape.dim_a
    swap_like = choi_from_map(transposition_map_table(n))
    swap_eigs = np.linalg.eigvalsh(hermitize(swap_like))
    cp_h = random_psd(rng, shape.dim)
    cp_table = map_from_choi(cp_h, shape)
    block = stormer_block_test(cp_table, k=2, samples=25, seed=seed + 1)
    min_sep_gamma = np.inf
    for _ in range(separable_samples):
        d = random_product_density(rng, shape.dim_a, shape.dim_b, terms=int(rng.integers(1, 11)))
        gamma = partial_transpose(d, shape, "B")
        min_sep_gamma = min(min_sep_gamma, float(np.linalg.eigvalsh(hermitize(gamma))[0]))
    psi = np.zeros(4, dtype=complex)
    psi[1], psi[2] = 1 / np.sqrt(2), -1 / np.sqrt(2)
    singlet = np.outer(psi, psi.conj())
    singlet_gamma_min = float(np.linalg.eigvalsh(
        hermitize(partial_transpose(singlet, BipartiteShape(2, 2), "B"))
    )[0])
    report = {
        "transposition_choi_min_eig": float(swap_eigs[0]),
        "cp_block_test_min_eig": block["min_output_eigenvalue"],
        "separable_min_gamma_eig": float(min_sep_gamma),
        "singlet_gamma_min_eig": singlet_gamma_min,
    }
    report["passed"] = bool(
        swap_eigs[0] < -0.5
        and block["min_output_eigenvalue"] >= -1e-8
        and min_sep_gamma >= -1e-10
        and singlet_gamma_min < -0.4
    )
    return report
