use wiener_optomech::corpus::corpus;
use wiener_optomech::params::derive;

#[test]
fn dump_params() {
    let pts = corpus().unwrap();
    for idx in [108usize, 123, 145, 149, 153, 158] {
        let d = derive(&pts[idx].sys).unwrap();
        eprintln!("=== [{idx}] {}", pts[idx].label);
        eprintln!("  omega_m     = {:.17e}", d.omega_m);
        eprintln!("  Gamma       = {:.17e}", d.Gamma);
        eprintln!("  omega_theta = {:.17e}", d.omega_theta);
        eprintln!("  gamma_theta = {:.17e}", d.gamma_theta);
        eprintln!("  c_theta     = {:.17e}", d.c_theta);
        eprintln!("  L_theta     = {:.17e}", d.L_theta);
        eprintln!("  M_theta     = {:.17e}", d.M_theta);
        eprintln!("  n_bar       = {:.17e}", d.n_bar);
        eprintln!("  lambda      = {:.17e}", d.lambda_theta);
    }
}
