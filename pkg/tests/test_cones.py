import numpy as np
import pytest

from modular_ppt import cones, gns
from modular_ppt.cones import (
    ConeQuery,
    build_composite,
    commutant_cone_check,
    density_of,
    duality_check,
    natural_cone_membership,
    one_otimes_ub,
    pn_intersection_membership,
    sample_cone_element,
    separable_cone_distance,
    state_to_cone_vector,
    transpose_state_vector,
    u_maps_cones,
    v_beta_membership,
)
from modular_ppt.errors import ContractError
from modular_ppt.gns import apply_delta_power, apply_u, build_gns, inner, transpose_operator
from modular_ppt.linalg import hermitize, kron
from modular_ppt.optim import PptSetSpec, npt_witness, sample_ppt_density
from modular_ppt.rand import complex_gaussian, generator, random_faithful_density, random_psd


@pytest.fixture
def ctx3():
    return build_gns(random_faithful_density(generator(30), 3))


@pytest.fixture
def comp22():
    rng = generator(31)
    return build_composite(build_gns(random_faithful_density(rng, 2)),
                           build_gns(random_faithful_density(rng, 2)))


class TestVBeta:
    def test_omega_inside_any_beta(self, ctx3):
        for beta in (0.0, 0.2, 0.25, 0.5):
            verdict = v_beta_membership(ctx3, ConeQuery(beta), ctx3.omega)
            assert verdict.inside

    def test_negative_operator_outside(self, ctx3):
        verdict = v_beta_membership(ctx3, ConeQuery(0.25), ctx3.vector(-np.eye(3)))
        assert not verdict.inside
        assert verdict.certificate < -0.5

    def test_constructive_samples_inside(self, ctx3):
        rng = generator(32)
        for k in range(100):
            beta = (k % 5) / 8.0
            xi = sample_cone_element(ctx3, beta, rng)
            verdict = v_beta_membership(ctx3, ConeQuery(beta), xi)
            assert verdict.inside, (beta, verdict.certificate)

    def test_beta_out_of_range(self):
        with pytest.raises(ContractError):
            ConeQuery(0.7)


class TestNaturalCone:
    @pytest.mark.parametrize("dim", [2, 3, 4])
    def test_routes_agree_on_random_vectors(self, dim):
        rng = generator(40 + dim)
        ctx = build_gns(random_faithful_density(rng, dim))
        for _ in range(500):
            xi = ctx.vector(complex_gaussian(rng, dim, dim))
            verdict = natural_cone_membership(ctx, xi, tol=1e-8)
            spectral = verdict.detail["spectral_certificate"]
            vbeta = verdict.detail["vbeta_certificate"]
            assert (spectral >= -1e-8) == (vbeta >= -1e-8) or \
                min(abs(spectral), abs(vbeta)) <= 1e-7

    def test_psd_matrix_inside_both_routes(self, ctx3):
        rng = generator(44)
        xi = ctx3.vector(random_psd(rng, 3))
        verdict = natural_cone_membership(ctx3, xi)
        assert verdict.inside
        assert verdict.detail["spectral_certificate"] >= -1e-12

    def test_negative_eigenvalue_outside(self, ctx3):
        xi = ctx3.vector(np.diag([1.0, 1.0, -0.5]))
        verdict = natural_cone_membership(ctx3, xi)
        assert not verdict.inside


class TestDuality:
    @pytest.mark.parametrize("beta", [0.0, 0.125, 0.25, 0.375, 0.5])
    def test_duality_grid(self, ctx3, beta):
        report = duality_check(ctx3, beta, samples=100, seed=50)
        assert report["passed"]
        assert report["min_member_pairing"] >= -1e-10
        assert report["outside_missed"] == 0

    def test_v0_v_half_pairing_form(self, ctx3):
        # (b Omega, Delta^{1/2} a Omega) = Tr(rho^{1/2} b rho^{1/2} a) >= 0
        rng = generator(51)
        for _ in range(100):
            a, b = random_psd(rng, 3), random_psd(rng, 3)
            lhs = inner(ctx3.vector_for_operator(b),
                        apply_delta_power(ctx3, 0.5, ctx3.vector_for_operator(a))).real
            direct = np.trace(ctx3.sqrt_rho @ b @ ctx3.sqrt_rho @ a).real
            assert lhs == pytest.approx(direct, abs=1e-10)
            assert lhs >= -1e-10

    def test_separating_vector_for_outsider(self, ctx3):
        xi = ctx3.vector(np.diag([1.0, -2.0, 1.0]))
        eta, _ = cones._separating_eta(ctx3, 0.25, xi)
        assert inner(eta, xi).real < -1e-3
        verdict = v_beta_membership(ctx3, ConeQuery(0.25), eta)
        assert verdict.inside


class TestUMapsCones:
    @pytest.mark.parametrize("beta", [0.0, 0.125, 0.25])
    def test_flip(self, ctx3, beta):
        report = u_maps_cones(ctx3, beta, samples=60, seed=52)
        assert report["passed"]

    def test_transpose_fixes_v0(self, ctx3):
        # U Delta^{1/2} (a Omega) = a^t Omega, PSD transpose stays PSD
        rng = generator(53)
        a = random_psd(rng, 3)
        xi = ctx3.vector_for_operator(a)
        out = apply_u(ctx3, apply_delta_power(ctx3, 0.5, xi))
        recovered = out.mat @ ctx3.inv_sqrt_rho
        assert np.max(np.abs(recovered - transpose_operator(ctx3, a))) <= 1e-10


class TestStateCorrespondence:
    def test_reference_state_gives_omega(self, ctx3):
        xi = state_to_cone_vector(ctx3, ctx3.rho)
        assert np.max(np.abs(xi.mat - ctx3.omega.mat)) <= 1e-10

    def test_diagonal_closed_form(self, ctx3):
        eps = 0.01
        sigma = np.diag([1.0 - 2 * eps, eps, eps])
        ctx = build_gns(np.diag([0.5, 0.3, 0.2]))
        xi = state_to_cone_vector(ctx, sigma)
        assert np.allclose(xi.mat, np.diag(np.sqrt(np.diag(sigma).real)))

    def test_pure_state_projector(self, ctx3):
        v = np.array([1, 1j, 0]) / np.sqrt(2)
        sigma = np.outer(v, v.conj())
        xi = state_to_cone_vector(ctx3, sigma)
        assert np.max(np.abs(xi.mat - sigma)) <= 1e-9

    def test_state_values_match(self, ctx3):
        rng = generator(54)
        sigma = random_psd(rng, 3)
        xi = state_to_cone_vector(ctx3, sigma)
        for _ in range(50):
            a = complex_gaussian(rng, 3, 3)
            lhs = inner(xi, ctx3.vector(a @ xi.mat))
            assert abs(lhs - np.trace(sigma @ a)) <= 1e-9

    def test_transpose_state_vector(self, ctx3):
        rng = generator(55)
        v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        v /= np.linalg.norm(v)
        sigma = np.outer(v, v.conj())
        xi = state_to_cone_vector(ctx3, sigma)
        out, report = transpose_state_vector(ctx3, xi)
        assert report["passed"]
        assert np.max(np.abs(density_of(out) - transpose_operator(ctx3, sigma))) <= 1e-10
        # genuinely complex pure state: transpose differs from the state
        assert np.max(np.abs(transpose_operator(ctx3, sigma) - sigma)) > 1e-3

    def test_transpose_batch(self):
        rng = generator(56)
        ctx = build_gns(random_faithful_density(rng, 4))
        worst = 0.0
        for _ in range(100):
            sigma = random_psd(rng, 4)
            xi = state_to_cone_vector(ctx, sigma)
            out, report = transpose_state_vector(ctx, xi)
            worst = max(worst, report["density_transpose_residual"])
        assert worst <= 1e-10

    def test_non_member_rejected(self, ctx3):
        with pytest.raises(ContractError):
            transpose_state_vector(ctx3, ctx3.vector(np.diag([1.0, -1.0, 0.0])))


class TestComposite:
    def test_tracial_composite(self):
        ca = build_gns(np.eye(2) / 2)
        cb = build_gns(np.eye(2) / 2)
        comp = build_composite(ca, cb)
        assert np.allclose(comp.joint.rho, np.eye(4) / 4)

    def test_delta_ratio_outer_product(self):
        ca = build_gns(np.diag([2 / 3, 1 / 3]))
        cb = build_gns(np.diag([3 / 4, 1 / 4]))
        comp = build_composite(ca, cb)
        joint_vals = np.sort(comp.joint.eigvals)[::-1]
        expected = np.sort(np.outer([2 / 3, 1 / 3], [3 / 4, 1 / 4]).ravel())[::-1]
        assert np.allclose(joint_vals, expected)

    def test_jm_factorizes_on_samples(self, comp22):
        rng = generator(57)
        for _ in range(50):
            ma, mb = complex_gaussian(rng, 2, 2), complex_gaussian(rng, 2, 2)
            xi = comp22.joint.vector(kron(ma, mb))
            lhs = gns.apply_jm(comp22.joint, xi).mat
            rhs = kron(ma.conj().T, mb.conj().T)
            assert np.max(np.abs(lhs - rhs)) <= 1e-10

    def test_one_otimes_ub_involution(self, comp22):
        rng = generator(58)
        xi = comp22.joint.vector(complex_gaussian(rng, 4, 4))
        twice = one_otimes_ub(comp22, one_otimes_ub(comp22, xi))
        assert np.max(np.abs(twice.mat - xi.mat)) <= 1e-12


class TestPnIntersection:
    def test_omega_inside(self, comp22):
        verdict = pn_intersection_membership(comp22, comp22.joint.omega)
        assert verdict.inside

    def test_constructive_ppt_inside(self, comp22):
        rng = generator(59)
        spec = PptSetSpec(comp22.shape)
        for _ in range(10):
            a = sample_ppt_density(rng, spec)
            xi = apply_delta_power(comp22.joint, 0.25, comp22.joint.vector_for_operator(a))
            verdict = pn_intersection_membership(comp22, xi, tol=1e-7)
            assert verdict.inside, verdict.certificate

    def test_phi_plus_outside_with_known_certificate(self, comp22, phi_plus):
        xi = apply_delta_power(comp22.joint, 0.25, comp22.joint.vector_for_operator(phi_plus))
        verdict = pn_intersection_membership(comp22, xi)
        assert not verdict.inside
        assert verdict.certificate == pytest.approx(-0.5, abs=1e-9)

    @pytest.mark.parametrize("dims", [(2, 2), (2, 3), (3, 3)])
    def test_routes_agree_on_random_vectors(self, dims):
        rng = generator(60 + dims[0] * 10 + dims[1])
        comp = build_composite(build_gns(random_faithful_density(rng, dims[0])),
                               build_gns(random_faithful_density(rng, dims[1])))
        dim = dims[0] * dims[1]
        for _ in range(100):
            xi = comp.joint.vector(complex_gaussian(rng, dim, dim))
            verdict = pn_intersection_membership(comp, xi, tol=1e-8)
            assert verdict.detail["certificate_gap"] <= 1e-8

    def test_flip_preserves_intersection(self, comp22):
        rng = generator(61)
        spec = PptSetSpec(comp22.shape)
        a = sample_ppt_density(rng, spec)
        xi = apply_delta_power(comp22.joint, 0.25, comp22.joint.vector_for_operator(a))
        flipped = one_otimes_ub(comp22, xi)
        verdict = pn_intersection_membership(comp22, flipped, tol=1e-7)
        assert verdict.inside


class TestCommutantCone:
    def test_single_term_trivial(self, comp22):
        rng = generator(62)
        a1 = complex_gaussian(rng, 2, 2)
        plain = cones._natural_cone_generator(comp22, [a1], [np.eye(2, dtype=complex)])
        lhs = one_otimes_ub(comp22, comp22.joint.vector(plain)).mat
        rhs = cones._commutant_cone_generator(comp22, [a1], [np.eye(2, dtype=complex)])
        assert np.max(np.abs(lhs - rhs)) <= 1e-12

    def test_generator_identity_and_pairings(self, comp22):
        report = commutant_cone_check(comp22, samples=12, seed=63)
        assert report["passed"]
        assert report["generator_identity_residual"] <= 1e-10
        assert report["min_cross_pairing"] >= -1e-10

    def test_intersection_matches_commutant_characterization(self, comp22):
        # members of P ∩ P^tau pair nonnegatively with commutant-cone
        # generators; a vector in P but outside P^tau is separated by an
        # exhibited element of the flipped cone
        rng = generator(64)
        gens = []
        for _ in range(12):
            ops_a = [complex_gaussian(rng, 2, 2) for _ in range(2)]
            ops_b = [complex_gaussian(rng, 2, 2) for _ in range(2)]
            gens.append(cones._commutant_cone_generator(comp22, ops_a, ops_b))
        spec = PptSetSpec(comp22.shape)
        joint = comp22.joint
        for _ in range(5):
            a = sample_ppt_density(rng, spec)
            xi = apply_delta_power(joint, 0.25, joint.vector_for_operator(a))
            for g in gens:
                assert np.trace(xi.mat.conj().T @ g).real >= -1e-8
        # singlet-based vector: in P, not in P^tau
        psi = np.zeros(4, dtype=complex)
        psi[1], psi[2] = 1 / np.sqrt(2), -1 / np.sqrt(2)
        singlet = np.outer(psi, psi.conj())
        xi_bad = apply_delta_power(joint, 0.25, joint.vector_for_operator(singlet))
        assert natural_cone_membership(joint, xi_bad).inside
        assert not pn_intersection_membership(comp22, xi_bad).inside
        flipped = one_otimes_ub(comp22, xi_bad)
        w = hermitize(joint.sqrt_rho @ (apply_delta_power(joint, -0.25, flipped).mat
                                        @ joint.inv_sqrt_rho) @ joint.sqrt_rho)
        vals, vecs = np.linalg.eigh(w)
        eta = apply_delta_power(joint, 0.25, joint.vector_for_operator(
            np.outer(vecs[:, 0], vecs[:, 0].conj())))
        separator = one_otimes_ub(comp22, eta)
        assert inner(separator, xi_bad).real < -1e-6


class TestSeparableDistance:
    def test_product_vector_reached(self, comp22):
        rng = generator(65)
        target = kron(random_psd(rng, 2), random_psd(rng, 2))
        xi = comp22.joint.vector(target / np.linalg.norm(target))
        bound, approx, info = separable_cone_distance(comp22, xi, iters=50, seed=66)
        assert bound <= 1e-8

    def test_singlet_stays_far(self, comp22, singlet):
        xi = state_to_cone_vector(comp22.joint, singlet)
        bound, _, _ = separable_cone_distance(comp22, xi, iters=500, seed=67)
        assert bound > 0.1
        # cross-check: the singlet is certified entangled by its witness
        assert npt_witness(singlet, comp22.shape) is not None

    def test_three_product_mixture(self, comp22):
        rng = generator(68)
        mats = [kron(random_psd(rng, 2), random_psd(rng, 2)) for _ in range(3)]
        mix = sum(mats)
        xi = comp22.joint.vector(mix / np.linalg.norm(mix))
        bound, _, _ = separable_cone_distance(comp22, xi, iters=200, seed=69)
        assert bound <= 1e-6

    def test_bound_history_monotone(self, comp22):
        rng = generator(70)
        xi = comp22.joint.vector(complex_gaussian(rng, 4, 4))
        xi = comp22.joint.vector(xi.mat / xi.norm())
        _, _, info = separable_cone_distance(comp22, xi, iters=60, seed=71)
        hist = info["history"]
        assert all(b2 <= b1 + 1e-15 for b1, b2 in zip(hist, hist[1:]))
