use mds_core::kernels::{kernel_g, KernelConfig};

#[test]
fn probe_g_values() {
    let cfg = KernelConfig::for_ordinates(0.0, 25.0);
    for xi in [5.0, 10.0, 15.0, 20.0, 40.0, 80.0] {
        let g = kernel_g(25.0, xi, 1, &cfg).unwrap();
        let env = (1.0 + xi / 26.0f64.sqrt()).powi(-8);
        println!("t=25 xi={xi}: |G| = {:.6e}  env = {:.3e}  ratio = {:.3}", g.norm(), env, g.norm() / env);
    }
    let cfg0 = KernelConfig::for_ordinates(0.0, 0.0);
    for xi in [1.0, 2.0, 4.0, 8.0, 16.0, 32.0] {
        let g = kernel_g(0.0, xi, 0, &cfg0).unwrap();
        let env = (1.0 + xi).powi(-8);
        println!("t=0  xi={xi}: |G| = {:.6e}  env = {:.3e}  ratio = {:.3}", g.norm(), env, g.norm() / env);
    }
}
