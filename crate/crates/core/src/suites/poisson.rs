use rand::Rng;
use serde_json::json;

use super::Context;
use crate::charlier::checks::{adjointness_check, QUADRATURE_BUDGET};
use crate::charlier::{
    charlier_eval, charlier_orthogonality_mc, coherent_vector, mecke_check, rn_check, CreationOperator, CylinderFunction,
    FockVector, MeckeIntegrand,
};
use crate::configuration::AtomicMeasure;
use crate::error::Result;
use crate::measures::levy::gamma_truncation_loss;
use crate::measures::{laplace, sample_compound_poisson, sample_poisson, LaplaceKind, LevyMeasure, TestFunction};
use crate::report::{IdentityCheck, Report};

/// Relative slack on the Fock bounds, for rounding in the permanents.
const FOCK_SLACK: f64 = 1e-12;
const FOCK_VECTORS: u64 = 1_000;
const FOCK_MAX_LEVEL: usize = 5;
const CREATION_MAX_N: usize = 5;
const CREATION_TOL: f64 = 1e-8;

fn poisson_family() -> Vec<TestFunction> {
    vec![TestFunction::poly([0.5, -1.0]), TestFunction::bump(0.5, 0.3, 0.8), TestFunction::indicator(0.2, 0.7, -0.6)]
}

// exp⟨ω, φ⟩ has finite variance under Gamma noise only for sup φ < 1/2.
fn gamma_family() -> Vec<TestFunction> {
    vec![TestFunction::constant(-0.4), TestFunction::poly([0.3, -0.4]), TestFunction::bump(0.5, 0.3, 0.45)]
}

pub(super) fn laplace_check(cx: &Context) -> Result<Report> {
    let mut r = cx.report();
    let sigma = &cx.sigma;
    let (pf, gf) = match &cx.spec.phi {
        Some(p) => (vec![p.clone()], vec![p.clone()]),
        None => (poisson_family(), gamma_family()),
    };
    let cp = match &cx.rho {
        LevyMeasure::FiniteDiscrete { .. } => cx.rho.clone(),
        LevyMeasure::Gamma(_) => LevyMeasure::telegraph(),
    };
    let eps = cx.epsilon();
    let gamma = LevyMeasure::gamma(eps)?;
    let mut stream = 0;
    let mut next = || {
        stream += 1;
        stream - 1
    };

    for (i, phi) in pf.iter().enumerate() {
        let target = laplace(LaplaceKind::Poisson, phi, sigma, None)?;
        let est = cx.plan(next()).estimate_one(|rng| sample_poisson(sigma, rng).pairing(phi).exp());
        r.push(IdentityCheck::mc_vs_value(format!("laplace_poisson_{i}"), est, target, QUADRATURE_BUDGET * target));
    }
    for (i, phi) in pf.iter().enumerate() {
        let target = laplace(LaplaceKind::Compound, phi, sigma, Some(&cp))?;
        let est = cx.plan(next()).estimate_one(|rng| sample_compound_poisson(&cp, sigma, rng).pairing(phi).exp());
        r.push(IdentityCheck::mc_vs_value(format!("laplace_compound_{i}"), est, target, QUADRATURE_BUDGET * target));
    }
    for (i, phi) in gf.iter().enumerate() {
        let target = laplace(LaplaceKind::Gamma, phi, sigma, None)?;
        // the sampler drops jumps below ε, which scales the transform by
        // exp(-∫ D_ε(φ) dσ)
        let loss = sigma.integrate_with(&[phi], |x| gamma_truncation_loss(eps, phi.eval(x)));
        let bias = target * (-loss).exp_m1();
        let est = cx.plan(next()).estimate_one(|rng| sample_compound_poisson(&gamma, sigma, rng).pairing(phi).exp());
        r.push(IdentityCheck::mc_vs_value(format!("laplace_gamma_{i}"), est, target, bias.abs() + QUADRATURE_BUDGET * target));
        let cap = phi.range(sigma.window()).mag() * sigma.mass() * eps;
        r.push(IdentityCheck::absolute(format!("gamma_truncation_budget_{i}"), loss.abs(), 0.0, cap));
        let truncated = laplace(LaplaceKind::Compound, phi, sigma, Some(&gamma))?;
        r.push(IdentityCheck::relative(format!("gamma_truncated_transform_{i}"), truncated, target + bias, 1e-9));
    }
    // the mean of ⟨ω, φ⟩ moves by at most sup|φ| σ(W) ε between ε and ε/10
    let phi = &gf[0];
    let cap = phi.range(sigma.window()).mag() * sigma.mass() * eps;
    let fine = LevyMeasure::gamma(eps / 10.0)?;
    let k = next();
    let a = cx.plan(k).with_key(cx.key(k).substream(0)).estimate_one(|rng| sample_compound_poisson(&gamma, sigma, rng).pairing(phi));
    let b = cx.plan(k).with_key(cx.key(k).substream(1)).estimate_one(|rng| sample_compound_poisson(&fine, sigma, rng).pairing(phi));
    r.push(IdentityCheck::mc_vs_mc("gamma_truncation_eps_vs_eps_over_10", a, b, cap));
    r.measure("epsilon", json!(eps));
    Ok(r)
}

pub(super) fn mecke(cx: &Context) -> Result<Report> {
    let mut r = cx.report();
    let phi = cx.phi_or(TestFunction::poly([0.5, 1.0]));
    let hs = [
        ("constant", CylinderFunction::constant(1.0)),
        ("pairing", CylinderFunction::pairing(cx.psi_or(TestFunction::poly([0.2, 0.8])))),
        ("exponential", CylinderFunction::exp_affine(vec![TestFunction::bump(0.5, 0.3, 1.0)], 0.0, vec![0.5])),
    ];
    for (k, (name, h)) in hs.iter().enumerate() {
        let mut c = mecke_check(&MeckeIntegrand { phi: &phi, h }, &cx.sigma, &cx.plan(k as u64));
        c.identity = format!("mecke_{name}");
        r.push(c);
    }
    Ok(r)
}

pub(super) fn rn(cx: &Context) -> Result<Report> {
    let mut r = cx.report();
    let etas = match &cx.spec.phi {
        Some(p) => vec![p.clone()],
        None => vec![TestFunction::poly([0.3, -0.5]), TestFunction::bump(0.5, 0.3, 0.8)],
    };
    let fs = [
        ("constant", CylinderFunction::constant(1.0)),
        ("pairing", CylinderFunction::pairing(cx.psi_or(TestFunction::poly([1.0, 1.0])))),
        ("exponential", CylinderFunction::exp_affine(vec![TestFunction::indicator(0.0, 0.5, 1.0)], 0.0, vec![-0.7])),
    ];
    let mut k = 0;
    for (i, eta) in etas.iter().enumerate() {
        for (name, f) in &fs {
            let mut c = rn_check(eta, f, &cx.sigma, &cx.plan(k))?;
            c.identity = format!("radon_nikodym_eta{i}_{name}");
            r.push(c);
            k += 1;
        }
    }
    Ok(r)
}

pub(super) fn charlier_orth(cx: &Context) -> Result<Report> {
    let mut r = cx.report();
    let pairs = match (&cx.spec.phi, &cx.spec.psi) {
        (None, None) => vec![
            (TestFunction::poly([0.5, -0.4]), TestFunction::poly([0.2, 0.6])),
            (TestFunction::bump(0.5, 0.3, 0.8), TestFunction::indicator(0.2, 0.7, 1.0)),
        ],
        _ => vec![(cx.phi_or(TestFunction::poly([0.5, -0.4])), cx.psi_or(TestFunction::poly([0.2, 0.6])))],
    };
    let mut k = 0;
    for (p, (phi, psi)) in pairs.iter().enumerate() {
        for (n, m) in cx.grid(3) {
            let mut c = charlier_orthogonality_mc(phi, psi, n, m, &cx.sigma, &cx.plan(k))?;
            c.identity = format!("pair{p}_{}", c.identity);
            r.push(c);
            k += 1;
        }
    }
    Ok(r)
}

pub(super) fn creation_iterate(cx: &Context) -> Result<Report> {
    let mut r = cx.report();
    let sigma = &cx.sigma;
    let top = cx.spec.n.unwrap_or(CREATION_MAX_N);
    let phis = match &cx.spec.phi {
        Some(p) => vec![p.clone()],
        None => vec![TestFunction::poly([0.5, -0.4]), TestFunction::bump(0.4, 0.35, 1.2)],
    };
    for (i, phi) in phis.iter().enumerate() {
        let op = CreationOperator::new(phi.clone(), sigma);
        // (violations, worst relative error) per configuration
        let per = cx.plan(i as u64).collect(|rng| -> Result<(usize, f64)> {
            let g = sample_poisson(sigma, rng);
            let mut bad = 0;
            let mut worst = 0.0f64;
            for n in 0..=top {
                let a = op.iterate_on_one(n, &g)?;
                let b = charlier_eval(&g, phi, n, sigma)?;
                let e = (a - b).abs() / a.abs().max(b.abs()).max(1.0);
                worst = worst.max(e);
                bad += usize::from(!(e <= CREATION_TOL));
            }
            Ok((bad, worst))
        });
        let per = per.into_iter().collect::<Result<Vec<_>>>()?;
        let bad = per.iter().map(|p| p.0).sum();
        let worst = per.iter().map(|p| p.1).fold(0.0, f64::max);
        r.push(IdentityCheck::no_violations(format!("creation_iterate_vs_series_phi{i}"), bad, per.len() * (top + 1), worst));
        r.measure(format!("worst_relative_error_phi{i}"), json!(worst));
    }
    r.measure("relative_tolerance", json!(CREATION_TOL));
    Ok(r)
}

fn random_poly<R: Rng>(rng: &mut R) -> TestFunction {
    TestFunction::poly([rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
}

pub(super) fn fock_bounds(cx: &Context) -> Result<Report> {
    let mut r = cx.report();
    let sigma = &cx.sigma;

    let phi = cx.phi_or(TestFunction::poly([0.5, 0.5]));
    let f = CylinderFunction::polynomial(vec![TestFunction::poly([0.0, 1.0])], vec![(1.0, vec![2]), (-0.5, vec![1])]);
    let g = CylinderFunction::pairing(cx.psi_or(TestFunction::indicator(0.0, 0.5, 1.0)));
    r.push(adjointness_check(&f, &g, &phi, sigma, &cx.plan(0)));

    // random factorized vectors: one generator per vector, derived from the seed
    let key = cx.key(1);
    let results = crate::mc::map_indexed(cx.exec, FOCK_VECTORS as usize, |i| -> Result<[f64; 2]> {
        let mut rng = key.batch_rng(i as u64);
        let n = rng.random_range(0..=FOCK_MAX_LEVEL);
        let coeff = rng.random_range(-2.0..2.0);
        let factors: Vec<TestFunction> = (0..n).map(|_| random_poly(&mut rng)).collect();
        let dir = random_poly(&mut rng);
        let v = FockVector::factorized(coeff, factors)?;
        let (vn, dn) = (v.norm(sigma), sigma.norm(&dir));
        let down = v.annihilate(&dir, sigma).norm(sigma) / ((n as f64).sqrt() * dn * vn).max(f64::MIN_POSITIVE);
        let up = v.create(&dir)?.norm(sigma) / (((n + 1) as f64).sqrt() * dn * vn).max(f64::MIN_POSITIVE);
        Ok([if n == 0 { 0.0 } else { down }, up])
    });
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    for (j, name) in ["fock_bound_annihilation", "fock_bound_creation"].iter().enumerate() {
        let ratios: Vec<f64> = results.iter().map(|x| x[j]).collect();
        let bad = ratios.iter().filter(|&&q| !(q <= 1.0 + FOCK_SLACK)).count();
        let worst = ratios.iter().copied().fold(0.0, f64::max);
        r.push(IdentityCheck::no_violations(*name, bad, ratios.len(), worst));
        r.measure(format!("{name}_worst_ratio"), json!(worst));
    }

    // a⁻(φ) on a coherent vector of depth N is (φ, ψ) times the one of depth N-1
    let psi = TestFunction::poly([0.3, -0.6]);
    let depth = 6;
    let lhs = coherent_vector(&psi, depth)?.annihilate(&phi, sigma);
    let rhs = coherent_vector(&psi, depth - 1)?.scale(sigma.inner(&phi, &psi));
    let diff = lhs.add(&rhs.scale(-1.0)).norm(sigma);
    r.push(IdentityCheck::absolute("coherent_eigenvector", diff, 0.0, 1e-12 * rhs.norm(sigma).max(1.0)));

    // (a⁺)ⁿ applied to the vacuum maps to the n-th Charlier kernel
    let mut v = FockVector::scalar(1.0);
    let mut powers = vec![v.clone()];
    for _ in 0..CREATION_MAX_N {
        v = v.create(&phi)?;
        powers.push(v.clone());
    }
    let gammas = cx.plan_with(2, 200).collect(|rng| sample_poisson(sigma, rng));
    let mut bad = 0;
    let mut worst = 0.0f64;
    for g in &gammas {
        for (n, p) in powers.iter().enumerate() {
            let (a, b) = (p.image(g, sigma), charlier_eval(g, &phi, n, sigma)?);
            let e = (a - b).abs() / a.abs().max(b.abs()).max(1.0);
            worst = worst.max(e);
            bad += usize::from(!(e <= 1e-12));
        }
    }
    r.push(IdentityCheck::no_violations("creation_power_image", bad, gammas.len() * powers.len(), worst));
    // norm of the level-n tensor power: n! |φ|^{2n}
    let n = CREATION_MAX_N;
    let sq = powers[n].inner(&powers[n], sigma);
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    r.push(IdentityCheck::relative("tensor_power_norm", sq, fact * sigma.inner(&phi, &phi).powi(n as i32), 1e-12));
    Ok(r)
}
