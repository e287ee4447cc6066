//! Scale functions of the insurance jump-diffusion: roots of psi = q, the
//! exponential-mixture weights, and W, W', Z on a small grid.

use parisian::{ModelParams, ScaleFamily, ScaleRep};

fn main() -> parisian::Result<()> {
    let model = ModelParams::new(0.075, 0.2, 0.5, 9.0)?;
    let q = 0.05;
    let w = ScaleRep::new(&model, q)?;
    println!("Phi({q}) = {:.12}", w.phi());
    println!("W = sum of w_i e^(r_i x):");
    for (r, c) in w.terms() {
        println!("  r = {r:>16.10}  w = {c:>16.10}");
    }
    println!("{:>6} {:>18} {:>18} {:>18}", "x", "W(x)", "W'(x)", "Z(x)");
    for x in [0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
        println!("{x:>6.2} {:>18.10e} {:>18.10e} {:>18.10e}", w.w(x), w.w_prime(x), w.z(x));
    }
    // very large arguments stay finite in log space
    let e = w.eval(2000.0);
    println!("ln W(2000) = {:.6}", e.w.ln());
    Ok(())
}
