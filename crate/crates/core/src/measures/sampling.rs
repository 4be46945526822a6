//! Samplers for Poisson, marked Poisson and compound Poisson noise.
//!
//! Positions are drawn by rejection from the uniform law on the window
//! against the density's upper bound. A position that collides exactly with
//! an existing one is redrawn, which keeps positions distinct.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::{IntensityMeasure, LevyMeasure, Point};
use crate::configuration::{Configuration, DiscreteMeasure, MarkedConfiguration};

fn poisson_count<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("finite positive Poisson mean").sample(rng) as usize
}

fn draw_position<R: Rng + ?Sized>(rng: &mut R, sigma: &IntensityMeasure) -> Point {
    let w = sigma.window();
    let bound = sigma.density_bound();
    loop {
        let mut c = [0.0; 2];
        for (i, slot) in c.iter_mut().enumerate().take(w.dim) {
            *slot = w.lo[i] + (w.hi[i] - w.lo[i]) * rng.random::<f64>();
        }
        let p = Point(c);
        if rng.random::<f64>() * bound <= sigma.density().eval(&p) {
            return p;
        }
    }
}

/// Draws `n` distinct positions i.i.d. from `σ / σ(W)`, in draw order.
fn draw_positions<R: Rng + ?Sized>(rng: &mut R, sigma: &IntensityMeasure, n: usize) -> Vec<Point> {
    let mut seen: Vec<Point> = Vec::with_capacity(n);
    let mut sorted: Vec<Point> = Vec::with_capacity(n);
    while seen.len() < n {
        let p = draw_position(rng, sigma);
        if let Err(i) = sorted.binary_search_by(|q| q.cmp_lex(&p)) {
            sorted.insert(i, p);
            seen.push(p);
        }
    }
    seen
}

/// A Poisson configuration with intensity σ.
pub fn sample_poisson<R: Rng + ?Sized>(sigma: &IntensityMeasure, rng: &mut R) -> Configuration {
    let n = poisson_count(rng, sigma.mass());
    let points = draw_positions(rng, sigma, n);
    Configuration::new(*sigma.window(), points).expect("sampled positions are distinct and inside the window")
}

/// A Poisson configuration on `ℝ × W` with intensity `ρ ⊗ σ`. For Gamma ρ
/// the truncated measure is used.
///
/// With a single-atom ρ of unit weight the random stream is consumed exactly
/// as by [`sample_poisson`], so the projected positions coincide.
pub fn sample_marked_poisson<R: Rng + ?Sized>(
    rho: &LevyMeasure,
    sigma: &IntensityMeasure,
    rng: &mut R,
) -> MarkedConfiguration {
    let n = poisson_count(rng, rho.sampling_mass() * sigma.mass());
    let mut atoms = Vec::with_capacity(n);
    let mut sorted: Vec<Point> = Vec::with_capacity(n);
    while atoms.len() < n {
        let p = draw_position(rng, sigma);
        if let Err(i) = sorted.binary_search_by(|q| q.cmp_lex(&p)) {
            sorted.insert(i, p);
            atoms.push((rho.sample_mark(rng), p));
        }
    }
    MarkedConfiguration::new(*sigma.window(), atoms).expect("sampled atoms are valid")
}

/// `Σ` applied to a marked Poisson sample.
pub fn sample_compound_poisson<R: Rng + ?Sized>(rho: &LevyMeasure, sigma: &IntensityMeasure, rng: &mut R) -> DiscreteMeasure {
    sample_marked_poisson(rho, sigma, rng).sigma_map()
}

/// A second construction of compound Poisson noise for discrete ρ: one
/// independent Poisson configuration with intensity `w_i σ` per atom
/// `(s_i, w_i)`, superposed. Returns `None` for non-discrete ρ.
pub fn sample_compound_poisson_superposed<R: Rng + ?Sized>(
    rho: &LevyMeasure,
    sigma: &IntensityMeasure,
    rng: &mut R,
) -> Option<DiscreteMeasure> {
    let LevyMeasure::FiniteDiscrete { atoms } = rho else {
        return None;
    };
    let mut out: Vec<(Point, f64)> = Vec::new();
    let mut sorted: Vec<Point> = Vec::new();
    for &(s, w) in atoms {
        let n = poisson_count(rng, w * sigma.mass());
        let mut placed = 0;
        while placed < n {
            let p = draw_position(rng, sigma);
            if let Err(i) = sorted.binary_search_by(|q| q.cmp_lex(&p)) {
                sorted.insert(i, p);
                out.push((p, s));
                placed += 1;
            }
        }
    }
    Some(DiscreteMeasure::new(*sigma.window(), out).expect("superposed atoms are distinct"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::configuration::AtomicMeasure;
    use crate::measures::{special::exp_integral_e1, TestFunction, Window};
    use crate::rng::StreamKey;
    use crate::stats::{ks_two_sample, MeanVar};
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    fn lebesgue(a: f64, b: f64) -> IntensityMeasure {
        IntensityMeasure::lebesgue(Window::interval(a, b).unwrap())
    }

    #[test]
    fn count_mean_and_variance() {
        let sigma = lebesgue(0.0, 10.0);
        let mut rng = StreamKey::new(11, 0).rng();
        let counts: Vec<f64> = (0..10_000).map(|_| sample_poisson(&sigma, &mut rng).len() as f64).collect();
        let mut mv = MeanVar::new();
        counts.iter().for_each(|&c| mv.push(c));
        assert!((mv.mean() - 10.0).abs() < 3.0 * mv.std_err());
        // s.e. of the sample variance for Poisson(λ): sqrt((μ4 - σ⁴)/n) with μ4 = λ + 3λ²
        let var_se = ((10.0 + 3.0 * 100.0 - 100.0) / 10_000f64).sqrt();
        assert!((mv.variance() - 10.0).abs() < 3.0 * var_se);
    }

    #[test]
    fn exponential_moment() {
        let sigma = lebesgue(0.0, 2.0);
        let phi = TestFunction::constant(2f64.ln());
        let mut rng = StreamKey::new(12, 0).rng();
        let mut mv = MeanVar::new();
        for _ in 0..100_000 {
            mv.push(sample_poisson(&sigma, &mut rng).pairing(&phi).exp());
        }
        assert!((mv.mean() - 2f64.exp()).abs() < 3.0 * mv.std_err());
    }

    #[test]
    fn restriction_is_poisson_chi_square() {
        let sigma = lebesgue(0.0, 3.0);
        let b = Window::interval(1.0, 2.0).unwrap();
        let mut rng = StreamKey::new(13, 0).rng();
        let n = 20_000;
        let mut hist = [0usize; 10];
        for _ in 0..n {
            let k = sample_poisson(&sigma, &mut rng).count_in_region(&b);
            hist[k.min(9)] += 1;
        }
        let mut pmf = [0.0; 10];
        let mut p = (-1f64).exp();
        for (k, slot) in pmf.iter_mut().enumerate().take(9) {
            *slot = p;
            p /= (k + 1) as f64;
        }
        pmf[9] = 1.0 - pmf[..9].iter().sum::<f64>();
        let chi2: f64 = hist.iter().zip(&pmf).map(|(&o, &e)| (o as f64 - n as f64 * e).powi(2) / (n as f64 * e)).sum();
        let pval = 1.0 - ChiSquared::new(9.0).unwrap().cdf(chi2);
        assert!(pval > 0.001, "chi2 = {chi2}");
    }

    #[test]
    fn nonuniform_density_positions() {
        let sigma = IntensityMeasure::new(Window::interval(0.0, 1.0).unwrap(), TestFunction::poly([0.0001, 2.0]), 32).unwrap();
        let mut rng = StreamKey::new(14, 0).rng();
        let mut mv = MeanVar::new();
        for _ in 0..5_000 {
            sample_poisson(&sigma, &mut rng).points().for_each(|p| mv.push(p.x()));
        }
        let want = sigma.integrate(&TestFunction::poly([0.0, 1.0])) / sigma.mass();
        assert!((mv.mean() - want).abs() < 3.0 * mv.std_err());
    }

    #[test]
    fn unit_jump_projection_is_poisson() {
        let sigma = lebesgue(0.0, 2.0);
        let rho = LevyMeasure::unit_jump();
        let key = StreamKey::new(15, 0);
        let (mut r1, mut r2) = (key.rng(), key.rng());
        for _ in 0..200 {
            let a = sample_poisson(&sigma, &mut r1);
            let m = sample_marked_poisson(&rho, &sigma, &mut r2);
            assert!(m.atoms().all(|(s, _)| s == 1.0));
            assert_eq!(m.positions(), a);
        }
        // distributional check on independent streams
        let (mut ra, mut rb) = (StreamKey::new(16, 0).rng(), StreamKey::new(16, 1).rng());
        let (mut na, mut nb, mut xa, mut xb) = (vec![], vec![], vec![], vec![]);
        for _ in 0..4_000 {
            let a = sample_poisson(&sigma, &mut ra);
            let b = sample_marked_poisson(&rho, &sigma, &mut rb).positions();
            na.push(a.len() as f64);
            nb.push(b.len() as f64);
            xa.extend(a.points().next().map(|p| p.x()));
            xb.extend(b.points().next().map(|p| p.x()));
        }
        assert!(ks_two_sample(&xa, &xb).1 > 0.01);
        assert!((na.iter().sum::<f64>() - nb.iter().sum::<f64>()).abs() / 4_000.0 < 3.0 * (4.0f64 / 2_000.0).sqrt());
    }

    #[test]
    fn telegraph_mark_frequencies() {
        let sigma = lebesgue(0.0, 5.0);
        let rho = LevyMeasure::telegraph();
        let mut rng = StreamKey::new(17, 0).rng();
        let (mut up, mut total) = (0usize, 0usize);
        for _ in 0..2_000 {
            for (s, _) in sample_marked_poisson(&rho, &sigma, &mut rng).atoms() {
                total += 1;
                up += usize::from(s == 1.0);
            }
        }
        let p = up as f64 / total as f64;
        assert!((p - 0.5).abs() < 3.0 * (0.25 / total as f64).sqrt());
    }

    #[test]
    fn gamma_atom_count() {
        let sigma = lebesgue(0.0, 1.0);
        let rho = LevyMeasure::gamma(1e-3).unwrap();
        let mut rng = StreamKey::new(18, 0).rng();
        let mut mv = MeanVar::new();
        for _ in 0..1_000 {
            mv.push(sample_marked_poisson(&rho, &sigma, &mut rng).len() as f64);
        }
        assert!((mv.mean() - exp_integral_e1(1e-3)).abs() < 3.0 * mv.std_err());
    }

    #[test]
    fn compound_unit_jump_has_unit_weights() {
        let sigma = lebesgue(0.0, 2.0);
        let mut rng = StreamKey::new(19, 0).rng();
        let w = sample_compound_poisson(&LevyMeasure::unit_jump(), &sigma, &mut rng);
        assert!(w.atoms().iter().all(|a| a.1 == 1.0));
    }

    #[test]
    fn superposition_matches_marked_route() {
        let sigma = lebesgue(0.0, 1.0);
        let rho = LevyMeasure::discrete(vec![(-0.5, 1.0), (2.0, 0.5)]).unwrap();
        let phi = TestFunction::poly([0.1, 0.6]);
        let (mut ra, mut rb) = (StreamKey::new(20, 0).rng(), StreamKey::new(20, 1).rng());
        let (mut a, mut b) = (MeanVar::new(), MeanVar::new());
        for _ in 0..20_000 {
            a.push(sample_compound_poisson(&rho, &sigma, &mut ra).pairing(&phi).exp());
            b.push(sample_compound_poisson_superposed(&rho, &sigma, &mut rb).unwrap().pairing(&phi).exp());
        }
        let se = (a.std_err().powi(2) + b.std_err().powi(2)).sqrt();
        assert!((a.mean() - b.mean()).abs() < 3.0 * se);
    }
}
