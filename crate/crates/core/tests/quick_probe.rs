use std::time::Instant;
use wiener_optomech::corpus::{check_point, corpus, generic_path_feasible};
use wiener_optomech::estimation::{bias_identity, causal_variances, kernel_moment_table};
use wiener_optomech::params::derive;

#[test]
fn probe_stage_timings() {
    let pts = corpus().unwrap();
    let only: Option<usize> = std::env::var("PROBE_ONLY").ok().and_then(|s| s.parse().ok());
    let stage = std::env::var("PROBE_STAGE").unwrap_or_default();
    for idx in [0usize, 4, 8, 61, 108, 123, 145, 149, 153, 158, 159] {
        if let Some(o) = only {
            if idx != o {
                continue;
            }
        }
        let p = &pts[idx];
        let d = derive(&p.sys).unwrap();
        let q = d.omega_m / d.Gamma;
        eprintln!(
            "=== [{idx}] {}  (Q = {q:.3e}, generic checks: {})",
            p.label,
            generic_path_feasible(q)
        );
        if stage.is_empty() || stage == "causal" {
            let t = Instant::now();
            let cv = causal_variances(&d);
            eprintln!("  causal_var   {:>10.2?}  err={:?}", t.elapsed(), cv.as_ref().err());
        }
        if stage.is_empty() || stage == "bias" {
            let t = Instant::now();
            let bi = bias_identity(&d);
            eprintln!("  bias_id      {:>10.2?}  err={:?}", t.elapsed(), bi.as_ref().err());
            if let Ok(id) = bi {
                let eps = 64.0 * f64::EPSILON;
                let ra = (id.alpha_closed - id.alpha_integral).abs() / id.alpha_closed.abs();
                let rb = (id.beta_closed - id.beta_integral).abs() / id.beta_closed.abs();
                eprintln!(
                    "    alpha rel={ra:.3e} floor_rel={:.3e}   beta rel={rb:.3e} floor_rel={:.3e}",
                    eps * id.alpha_noise / id.alpha_closed.abs(),
                    eps * id.beta_noise / id.beta_closed.abs()
                );
            }
        }
        if stage.is_empty() || stage == "kernel" {
            let t = Instant::now();
            let km = kernel_moment_table(&d);
            eprintln!("  kernel       {:>10.2?}  err={:?}", t.elapsed(), km.as_ref().err());
        }
        if stage.is_empty() || stage == "check" {
            let t = Instant::now();
            let r = check_point(&p.sys);
            eprintln!("  check_point  {:>10.2?}  err={:?}", t.elapsed(), r.err());
        }
    }
}
