//! Finite-difference check of every parameter gradient of the full loss
//! (h = d = 8, six context tokens, supervision on, dropout masks frozen).
//!
//! cargo run --release --example grad_check

use memchain::training::full_loss_grad_check;

fn main() -> memchain::Result<()> {
    let (names, report) = full_loss_grad_check(8, 6, 3)?;
    for (name, check) in names.iter().zip(&report.params) {
        println!(
            "{name:<16} max rel err {:.2e}  (analytic {:+.6e}, numeric {:+.6e})",
            check.max_rel_err, check.analytic, check.numeric
        );
    }
    println!("overall max rel err {:.2e}", report.max_rel_err());
    Ok(())
}
