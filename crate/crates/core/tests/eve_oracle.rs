//! Brute-force check of the closed-form bound on S(a|E) for Ext-B92.
//!
//! The depolarizing channel is dilated with Weyl operators X^a Z^b into an
//! explicit environment held by Eve. Alice sends |m⟩ (a = 0) or |ψ⟩ (a = 1),
//! Bob keeps the conclusive outcomes I − |ψ⟩⟨ψ| and I − |m⟩⟨m|, and the
//! conditional entropy S(a|E) = S(ρ_aE) − S(ρ_E) is computed from eigenvalues.

use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use satqkd_core::ext_b92::{
    depolarizing_stats, eve_bound_terms, joint_distribution, von_neumann_lower_bound,
};

type C = Complex<f64>;

fn entropy_bits(rho: &DMatrix<C>) -> f64 {
    rho.clone()
        .symmetric_eigenvalues()
        .iter()
        .filter(|&&w| w > 1e-15)
        .map(|&w| -w * w.log2())
        .sum()
}

/// Returns `(S(a|E), normalization M)`.
fn exact_conditional_entropy(d: usize, q: f64) -> (f64, f64) {
    let lambda = q * d as f64 / (d as f64 - 1.0);
    let omega = C::from_polar(1.0, 2.0 * std::f64::consts::PI / d as f64);
    // Kraus operators sqrt(p_ab) X^a Z^b.
    let mut kraus = Vec::new();
    for a in 0..d {
        for b in 0..d {
            let p = if a == 0 && b == 0 { 1.0 - lambda } else { 0.0 } + lambda / (d * d) as f64;
            let op = DMatrix::from_fn(d, d, |i, j| {
                if i == (j + a) % d {
                    omega.powu((j * b) as u32) * p.sqrt()
                } else {
                    C::new(0.0, 0.0)
                }
            });
            kraus.push(op);
        }
    }
    let n_env = d * d;
    let basis = |k: usize| DVector::from_fn(d, |i, _| C::new(if i == k { 1.0 } else { 0.0 }, 0.0));
    let m = basis(0);
    let psi = (basis(0) + basis(1)) * C::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let id = DMatrix::<C>::identity(d, d);
    let outcomes = [&id - &psi * psi.adjoint(), &id - &m * m.adjoint()];

    let mut rho = DMatrix::<C>::zeros(2 * n_env, 2 * n_env);
    for (a, state) in [&m, &psi].into_iter().enumerate() {
        // Column k is K_k |state⟩, so row c is Bob's component c of Eve's vector.
        let out = DMatrix::from_fn(d, n_env, |c, k| (&kraus[k] * state)[c]);
        for op in &outcomes {
            let v = op * &out;
            for c in 0..d {
                let row = v.row(c).transpose();
                let block = &row * row.adjoint() * C::new(0.5, 0.0);
                let mut view = rho.view_mut((a * n_env, a * n_env), (n_env, n_env));
                view += block;
            }
        }
    }
    let norm = rho.trace().re;
    rho /= C::new(norm, 0.0);
    let rho_e = rho.view((0, 0), (n_env, n_env)) + rho.view((n_env, n_env), (n_env, n_env));
    (entropy_bits(&rho) - entropy_bits(&rho_e), norm)
}

#[test]
fn normalization_matches_closed_form() {
    for d in [2u32, 3] {
        for q in [0.0, 0.02, 0.05, 0.1] {
            let (_, m) = exact_conditional_entropy(d as usize, q);
            let joint = joint_distribution(&depolarizing_stats(d, q).unwrap()).unwrap();
            assert!(
                (m - joint.m).abs() < 1e-12,
                "d = {d}, q = {q}: {m} vs {}",
                joint.m
            );
        }
    }
}

#[test]
fn closed_form_bound_is_below_exact_entropy() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for d in [2u32, 3] {
        for _ in 0..100 {
            let q = rng.random_range(0.0..0.11);
            let (exact, _) = exact_conditional_entropy(d as usize, q);
            let bound =
                von_neumann_lower_bound(&eve_bound_terms(&depolarizing_stats(d, q).unwrap()))
                    .unwrap();
            assert!(
                bound <= exact + 1e-9,
                "d = {d}, q = {q}: bound {bound} > exact {exact}"
            );
        }
    }
}

#[test]
fn noiseless_channel_decouples_eve() {
    for d in [2u32, 3] {
        let (exact, _) = exact_conditional_entropy(d as usize, 0.0);
        assert!((exact - 1.0).abs() < 1e-9, "d = {d}: {exact}");
        let bound = von_neumann_lower_bound(&eve_bound_terms(&depolarizing_stats(d, 0.0).unwrap()))
            .unwrap();
        assert!((bound - 0.688_721_875_540_867_1).abs() < 1e-12);
    }
}
