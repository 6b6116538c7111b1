use rayon::prelude::*;
use std::time::Instant;
use wiener_optomech::corpus::{corpus, selftest};
use wiener_optomech::estimation::bias_identity;
use wiener_optomech::params::derive;

#[test]
fn full_corpus() {
    let t = Instant::now();
    let report = selftest().unwrap();
    eprintln!(
        "selftest: {} points, {} failures in {:.2?}",
        report.points,
        report.failures.len(),
        t.elapsed()
    );
    for msg in &report.failures {
        eprintln!("  FAIL {msg}");
    }

    let pts = corpus().unwrap();
    let mut stats: Vec<(usize, String, f64, f64)> = pts
        .par_iter()
        .enumerate()
        .filter_map(|(i, p)| {
            let d = derive(&p.sys).ok()?;
            if d.Gamma == 0.0 {
                return None;
            }
            let id = bias_identity(&d).ok()?;
            let ra =
                (id.alpha_closed - id.alpha_integral).abs() / id.alpha_closed.abs().max(1e-30);
            let rb = (id.beta_closed - id.beta_integral).abs() / id.beta_closed.abs().max(1e-30);
            Some((i, p.label.clone(), ra, rb))
        })
        .collect();
    stats.sort_by(|a, b| (a.2.max(a.3)).partial_cmp(&(b.2.max(b.3))).unwrap());
    eprintln!("worst bias-identity points (strict rel):");
    for (i, label, ra, rb) in stats.iter().rev().take(8) {
        eprintln!("  [{i}] {label}: alpha {ra:.3e}  beta {rb:.3e}");
    }
    assert!(report.passed(), "selftest failures");
}
