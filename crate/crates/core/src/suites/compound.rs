use serde_json::json;

use super::Context;
use crate::charlier::checks::QUADRATURE_BUDGET;
use crate::charlier::{charlier_eval, creation_apply, directional_gradient, CylinderFunction, Functional};
use crate::compound::{
    add_atom_nudged, cp_annihilation, cp_charlier_all, cp_charlier_eval, cp_creation, eval_on_marked, exponential_example,
    lagrange_constant, marked_inner, rho_integral, MarkedDirection, MarkedExponential, USigma,
};
use crate::configuration::{AtomicMeasure, Configuration, DiscreteMeasure};
use crate::error::{Error, Result};
use crate::gamma::{gamma_annihilation, gamma_annihilation_truncated};
use crate::measures::{
    sample_compound_poisson, sample_compound_poisson_superposed, sample_marked_poisson, sample_poisson, Extended, LevyMeasure,
    Point, TestFunction,
};
use crate::report::{IdentityCheck, Report};

const ROUND_TRIPS: usize = 1_000;

fn cylinder_family() -> Vec<(&'static str, CylinderFunction)> {
    vec![
        ("pairing", CylinderFunction::pairing(TestFunction::poly([0.5, 1.0]))),
        (
            "polynomial",
            CylinderFunction::polynomial(
                vec![TestFunction::poly([0.0, 1.0]), TestFunction::bump(0.5, 0.3, 1.0)],
                vec![(1.0, vec![1, 1]), (-0.5, vec![0, 2]), (0.25, vec![0, 0])],
            ),
        ),
        ("exponential", CylinderFunction::exp_affine(vec![TestFunction::indicator(0.0, 0.6, 1.0)], -0.2, vec![0.3])),
    ]
}

fn positions(w: &DiscreteMeasure) -> Configuration {
    Configuration::new(*w.window(), w.atoms().iter().map(|a| a.0).collect()).expect("atoms are distinct")
}

pub(super) fn usigma_isometry(cx: &Context) -> Result<Report> {
    let mut r = cx.report();
    let (sigma, rho) = (&cx.sigma, &cx.rho);
    if !matches!(rho, LevyMeasure::FiniteDiscrete { .. }) {
        return Err(Error::invalid("usigma-isometry compares against the superposition sampler, which needs a discrete Lévy measure"));
    }

    // E[(U_Σ h)²] under the marked Poisson law against E[h²] under the
    // superposition construction
    for (k, (name, h)) in cylinder_family().into_iter().enumerate() {
        let plan = cx.plan(k as u64);
        let uh = USigma(h.clone());
        let marked = plan.with_key(plan.key.substream(0)).estimate_one(|rng| {
            let v = uh.eval(&sample_marked_poisson(rho, sigma, rng));
            v * v
        });
        let direct = plan.with_key(plan.key.substream(1)).estimate_one(|rng| {
            let v = h.eval(&sample_compound_poisson_superposed(rho, sigma, rng).expect("discrete ρ"));
            v * v
        });
        r.push(IdentityCheck::mc_vs_mc(format!("usigma_second_moment_{name}"), marked, direct, QUADRATURE_BUDGET));
    }

    let family = cylinder_family();
    let omegas = cx.plan_with(10, ROUND_TRIPS).collect(|rng| sample_compound_poisson(rho, sigma, rng));
    let mut bad = 0;
    for w in &omegas {
        let m = w.sigma_inverse();
        bad += usize::from(m.sigma_map() != *w);
        bad += family.iter().filter(|(_, h)| eval_on_marked(h, &m).to_bits() != h.eval(w).to_bits()).count();
    }
    r.push(IdentityCheck::no_violations("usigma_round_trip", bad, omegas.len() * (1 + family.len()), bad as f64));

    // with ρ = ε₁ every compound operator collapses to its Poisson twin
    let unit = LevyMeasure::unit_jump();
    let phi = cx.phi_or(TestFunction::poly([0.3, -0.8, 0.4]));
    let dir = MarkedDirection::flat(phi.clone());
    let h = CylinderFunction::exp_affine(vec![TestFunction::poly([0.0, 0.5])], 0.1, vec![0.7]);
    let key = cx.key(11);
    let per = crate::mc::map_indexed(cx.exec, 200, |i| -> Result<(usize, usize)> {
        let w = sample_compound_poisson(&unit, sigma, &mut key.batch_rng(i as u64));
        let g = positions(&w);
        let same_stream = sample_poisson(sigma, &mut key.batch_rng(i as u64)) == g;
        let mut bad = usize::from(!same_stream);
        bad += usize::from(cp_annihilation(&h, &dir, &w, &unit, sigma)?.to_bits() != directional_gradient(&h, &phi, &g, sigma).to_bits());
        bad += usize::from(cp_creation(&h, &dir, &w, &unit, sigma) != Extended::Finite(creation_apply(&h, &phi, &g, sigma)));
        for n in 0..=5 {
            let a = cp_charlier_eval(&w, &dir, n, &unit, sigma)?;
            bad += usize::from(a != Extended::Finite(charlier_eval(&g, &phi, n, sigma)?));
        }
        Ok((bad, 9))
    });
    let per = per.into_iter().collect::<Result<Vec<_>>>()?;
    let bad: usize = per.iter().map(|p| p.0).sum();
    let total: usize = per.iter().map(|p| p.1).sum();
    r.push(IdentityCheck::no_violations("unit_jump_reduction_bitwise", bad, total, bad as f64));
    Ok(r)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

pub(super) fn cp_operators(cx: &Context) -> Result<Report> {
    let mut r = cx.report();
    let sigma = &cx.sigma;
    let phi = cx.phi_or(TestFunction::poly([0.4, 0.6]));
    let psi = cx.psi_or(TestFunction::poly([1.0, -0.5]));

    match &cx.rho {
        LevyMeasure::FiniteDiscrete { .. } => discrete_mc(cx, &mut r, &phi, &psi)?,
        LevyMeasure::Gamma(_) => {
            r.measure("monte_carlo", json!("skipped: needs a discrete Lévy measure"));
        }
    }

    // discrete exponential: ∇ h = ∫ ∫ ((1 + η)^s - 1) dρ(s) φ dσ · h
    let rho = LevyMeasure::discrete(vec![(0.8, 0.5), (2.5, 1.5), (-1.2, 0.25)])?;
    let eta = TestFunction::poly([0.2, 0.3]);
    let h = exponential_example(&eta, &rho, sigma)?;
    let omegas = cx.plan_with(20, 50).collect(|rng| sample_compound_poisson(&rho, sigma, rng));
    let factor = sigma.integrate_with(&[&eta, &phi], |x| {
        let a = 1.0 + eta.eval(x);
        rho_integral(&rho, |t| a.powf(t) - 1.0) * phi.eval(x)
    });
    let worst = worst_relative(&omegas, |w| Ok((cp_annihilation(&h, &MarkedDirection::flat(phi.clone()), w, &rho, sigma)?, factor * h.eval(w))))?;
    r.push(IdentityCheck::absolute("exponential_example_discrete", worst, 0.0, 1e-10));

    // Gamma, mark factor p(s) = s: ∫ (e^{s u} - 1) e^{-s} ds = 1/(1-u) - 1
    let eps = cx.epsilon();
    let gamma = LevyMeasure::gamma(eps)?;
    let h = exponential_example(&eta, &gamma, sigma)?;
    let gdir = MarkedDirection::new(vec![0.0, 1.0], phi.clone());
    let gomegas = cx.plan_with(21, 20).collect(|rng| sample_compound_poisson(&gamma, sigma, rng));
    let factor = sigma.integrate_with(&[&eta, &phi], |x| {
        let u = eta.eval(x).ln_1p();
        (1.0 / (1.0 - u) - 1.0) * phi.eval(x)
    });
    let worst = worst_relative(&gomegas, |w| Ok((cp_annihilation(&h, &gdir, w, &gamma, sigma)?, factor * h.eval(w))))?;
    r.push(IdentityCheck::absolute("exponential_example_gamma", worst, 0.0, 1e-9));

    // the marked exponential is an eigenfunction with eigenvalue ⟨pq⟩_ρ (φ, ψ)_σ
    let mrho = LevyMeasure::discrete(vec![(1.0, 0.5), (-2.0, 0.75)])?;
    let dphi = MarkedDirection::new(vec![0.2, 0.3], TestFunction::poly([0.1, 0.4]));
    let dpsi = MarkedDirection::new(vec![1.0, -0.5], psi.clone());
    let e = MarkedExponential::new(dphi.clone(), &mrho, sigma)?;
    let lam = marked_inner(&dphi, &dpsi, &mrho, sigma).finite().expect("discrete ρ");
    let momegas = cx.plan_with(22, 50).collect(|rng| sample_compound_poisson(&mrho, sigma, rng));
    let worst = worst_relative(&momegas, |w| Ok((cp_annihilation(&e, &dpsi, w, &mrho, sigma)?, lam * e.eval(w))))?;
    r.push(IdentityCheck::absolute("marked_exponential_eigenvalue", worst, 0.0, 1e-12));
    r.measure("marked_exponential_eigenvalue", json!(lam));

    // Lagrange bound |h(ω + s ε_x) - h(ω)| ≤ C s on a grid, and the
    // truncated Gamma gradient within C ε ∫|φ| of the full one
    let hs = cylinder_family();
    let mut bad = 0;
    let mut total = 0;
    let win = sigma.window();
    for w in &gomegas {
        for (_, h) in &hs {
            let c = lagrange_constant(h, w);
            let base = h.eval(w);
            for i in 1..=20 {
                let t = i as f64 / 20.0;
                for j in 0..=10 {
                    let x = Point::d1(win.lo[0] + (win.hi[0] - win.lo[0]) * (j as f64 / 10.0 * (1.0 - 2e-9) + 1e-9));
                    let d = (h.eval(&add_atom_nudged(w, x, t)) - base).abs();
                    bad += usize::from(!(d <= c * t * (1.0 + 1e-12) + 1e-14));
                    total += 1;
                }
            }
        }
    }
    r.push(IdentityCheck::no_violations("lagrange_bound_grid", bad, total, bad as f64));
    let abs_phi = sigma.integrate_with(&[&phi], |x| phi.eval(x).abs());
    let mut bad = 0;
    let mut worst = 0.0f64;
    for w in gomegas.iter().take(5) {
        for (_, h) in &hs {
            let full = gamma_annihilation(h, &phi, w, sigma);
            let trunc = gamma_annihilation_truncated(h, &phi, w, sigma, eps)?;
            let cap = lagrange_constant(h, w) * eps * abs_phi + QUADRATURE_BUDGET;
            worst = worst.max((full - trunc).abs() / cap);
            bad += usize::from(!((full - trunc).abs() <= cap));
        }
    }
    r.push(IdentityCheck::no_violations("gamma_truncated_gradient_budget", bad, 5 * hs.len(), worst));
    Ok(r)
}

fn worst_relative(omegas: &[DiscreteMeasure], f: impl Fn(&DiscreteMeasure) -> Result<(f64, f64)>) -> Result<f64> {
    let mut worst = 0.0f64;
    for w in omegas {
        let (a, b) = f(w)?;
        worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(1.0));
    }
    Ok(worst)
}

fn discrete_mc(cx: &Context, r: &mut Report, phi: &TestFunction, psi: &TestFunction) -> Result<()> {
    let (sigma, rho) = (&cx.sigma, &cx.rho);
    let dir = MarkedDirection::new(vec![0.5, 1.0], phi.clone());
    let f = CylinderFunction::polynomial(vec![TestFunction::poly([0.0, 1.0])], vec![(1.0, vec![2])]);
    let g = CylinderFunction::pairing(TestFunction::indicator(0.0, 0.5, 1.0));
    let plan = cx.plan(0);
    let left = plan.with_key(plan.key.substream(0)).estimate_one(|rng| {
        let w = sample_compound_poisson(rho, sigma, rng);
        cp_annihilation(&f, &dir, &w, rho, sigma).expect("discrete ρ") * g.eval(&w)
    });
    let right = plan.with_key(plan.key.substream(1)).estimate_one(|rng| {
        let w = sample_compound_poisson(rho, sigma, rng);
        f.eval(&w) * cp_creation(&g, &dir, &w, rho, sigma).finite().expect("discrete ρ")
    });
    r.push(IdentityCheck::mc_vs_mc("cp_gradient_adjointness", left, right, QUADRATURE_BUDGET));

    let dphi = MarkedDirection::new(vec![0.0, 1.0], phi.clone());
    let dpsi = MarkedDirection::new(vec![1.0, 0.5], psi.clone());
    let mp = dphi.mean(rho, sigma).finite().expect("discrete ρ");
    let mq = dpsi.mean(rho, sigma).finite().expect("discrete ρ");
    let inner = marked_inner(&dphi, &dpsi, rho, sigma).finite().expect("discrete ρ");
    let top = 2;
    let grid: Vec<(usize, usize)> = (0..=top).flat_map(|n| (0..=top).map(move |m| (n, m))).collect();
    let est = cx.plan(1).estimate(grid.len(), |rng, out| {
        let w = sample_compound_poisson(rho, sigma, rng);
        let a = cp_charlier_all(&w, &dphi, top, mp).expect("order ≤ 2");
        let b = cp_charlier_all(&w, &dpsi, top, mq).expect("order ≤ 2");
        for (slot, &(n, m)) in out.iter_mut().zip(&grid) {
            *slot = a[n] * b[m];
        }
    });
    for (e, &(n, m)) in est.into_iter().zip(&grid) {
        let target = if n == m { factorial(n) * inner.powi(n as i32) } else { 0.0 };
        r.push(IdentityCheck::mc_vs_value(
            format!("cp_charlier_orthogonality_n{n}_m{m}"),
            e,
            target,
            QUADRATURE_BUDGET * target.abs().max(1.0),
        ));
    }
    Ok(())
}
