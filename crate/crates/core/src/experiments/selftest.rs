//! Seeded invariant checks run by the `selftest` command.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::encoders::{instant_generator, integral_samples, InstantScenario};
use crate::error::Result;
use crate::kernels::{gram_matrix, GramRoute, KernelFamily, KernelKind};
use crate::operators::{SampleSequence, SamplingOperator};
use crate::recon::{pocs_discrete_trajectory, pocs_run, ReconRun, Relaxation};
use crate::signal::{random_bandlimited, Signal};
use crate::special::FKernel;

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed deviation.
    pub worst: f64,
    pub tolerance: f64,
}

struct Case {
    x: Signal,
    op: SamplingOperator,
    s: SampleSequence,
}

fn case(period: f64, kind: KernelKind, gap: (f64, f64), seed: u64) -> Result<Case> {
    let t = instant_generator(&InstantScenario::UniformGap { lo: gap.0, hi: gap.1 }, seed, period)?;
    let fam = KernelFamily::new(kind, t, period)?;
    let x = random_bandlimited(period, 1.0, seed ^ 0x5eed)?;
    let s = integral_samples(&x, &fam)?;
    Ok(Case { x, op: SamplingOperator::new(fam)?, s })
}

fn check(name: &'static str, tolerance: f64, worst: impl IntoIterator<Item = f64>) -> CheckResult {
    let worst = worst.into_iter().fold(0.0, f64::max);
    CheckResult { name, passed: worst <= tolerance, worst, tolerance }
}

/// Runs every check over `rounds` seeded instances.
pub fn run_selftest(seed: u64, rounds: usize) -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..rounds).map(|_| rng.random()).collect();
    let period = 31.0;
    let cases = seeds
        .iter()
        .map(|&s| case(period, KernelKind::Indicator, (0.2, 0.9), s))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();

    let mut dev = Vec::new();
    for c in &cases {
        let x_coords = c.op.coords_of(&c.x)?;
        let back = c.op.pseudo_inverse_coords(&c.op.apply_coords(&x_coords));
        dev.push((back - c.op.project_f_coords(&x_coords)).norm() / x_coords.norm());
    }
    out.push(check("pseudo_inverse_left_identity", 1e-8, dev));

    let mut dev = Vec::new();
    for c in &cases {
        let u0 = random_bandlimited(period, 0.5, 99)?;
        let run = ReconRun::new(u0.clone()).lambda(1.0).max_iters(2000).tol(1e-14);
        let est = pocs_run(&c.op, &c.s, &run)?.estimate;
        let lim = c.op.consistent_limit(&c.s, &u0)?;
        dev.push(est.axpy(-1.0, &lim).norm_l2() / c.x.norm_l2());
    }
    out.push(check("pocs_limit_matches_oracle", 1e-6, dev));

    let mut dev = Vec::new();
    for c in &cases {
        for lambda in [0.5, 1.0, 1.5, 1.9] {
            let run = ReconRun::new(Signal::zero(period)).lambda(lambda).max_iters(40).tol(0.0).truth(c.x.clone());
            let h = pocs_run(&c.op, &c.s, &run)?.history;
            dev.extend(h.windows(2).map(|w| (w[1].err_l2_rel - w[0].err_l2_rel).max(0.0)));
        }
    }
    out.push(check("error_is_non_increasing", 1e-12, dev));

    let mut dev = Vec::new();
    for c in &cases {
        let rel = Relaxation::Constant(1.2);
        let run = ReconRun::new(Signal::zero(period)).relaxation(rel.clone()).max_iters(30).tol(0.0).record_iterates(true);
        let cont = pocs_run(&c.op, &c.s, &run)?.iterates;
        let disc = pocs_discrete_trajectory(&c.op, &c.s, &Signal::zero(period), &rel, 30)?;
        dev.extend(cont.iter().zip(&disc).map(|(a, b)| a.axpy(-1.0, b).norm_l2() / c.x.norm_l2()));
    }
    out.push(check("discrete_and_continuous_paths_agree", 1e-8, dev));

    let mut dev = Vec::new();
    for &s in &seeds {
        for kind in [KernelKind::Indicator, KernelKind::Ramp] {
            let t = instant_generator(&InstantScenario::UniformGap { lo: 0.5, hi: 2.0 }, s, period)?;
            let fam = KernelFamily::new(kind, t, period)?;
            let a = gram_matrix(&fam, &GramRoute::Spectral)?;
            let b = gram_matrix(&fam, &GramRoute::ClosedForm(FKernel::Periodic(period)))?;
            dev.push((a.entries() - b.entries()).amax());
        }
    }
    out.push(check("closed_form_gram_matches_spectral", 1e-8, dev));

    let mut dev = Vec::new();
    for c in &cases {
        let b = c.op.spectral_bounds();
        for _ in 0..5 {
            let u = random_bandlimited(period, 1.0, rng.random())?;
            let a = c.op.coords_of(&u)?;
            let su = c.op.samples(c.op.apply_coords(&a)).d_norm();
            let pf = c.op.project_f_coords(&a).norm();
            dev.push((b.gamma * pf - su).max(0.0));
            dev.push((su - b.norm * a.norm()).max(0.0));
        }
    }
    out.push(check("frame_inequalities", 1e-9, dev));

    let mut dev = Vec::new();
    for c in &cases {
        let mut r = ChaCha8Rng::seed_from_u64(7);
        let noise: Vec<f64> = (0..c.s.len()).map(|_| r.random_range(-1.0..1.0)).collect();
        let e = c.s.with_values(noise)?;
        let proj = c.op.project_range(&e)?;
        dev.push((proj.d_norm() - e.d_norm()).max(0.0));
        let again = c.op.project_range(&proj)?;
        dev.push(again.sub(&proj)?.d_norm());
    }
    out.push(check("range_projection_is_contractive_and_idempotent", 1e-10, dev));

    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selftest_passes() {
        for r in run_selftest(11, 3).unwrap() {
            assert!(r.passed, "{} worst {} > {}", r.name, r.worst, r.tolerance);
        }
    }
}
