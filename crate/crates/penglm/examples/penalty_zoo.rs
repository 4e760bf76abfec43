//! Tour of the four penalty kinds: values, derivatives, scalar prox maps,
//! and the regularity-condition report each kind carries.
//!
//! Run with `cargo run --release --example penalty_zoo`.

use penglm::{PenaltyKind, PenaltySpec};

fn main() -> penglm::Result<()> {
    let kinds = [
        PenaltyKind::Scad { a: 3.7 },
        PenaltyKind::Mcp { a: 3.0 },
        PenaltyKind::Lasso,
        PenaltyKind::Bridge { gamma: 0.5 },
    ];

    let n = 100;
    for kind in kinds {
        let spec = PenaltySpec::new(kind, 1.0, 1.0, n)?;
        println!(
            "{} (effective level {:.4})",
            kind.name(),
            spec.lambda_n()
        );

        print!("  value      ");
        for b in [0.05, 0.2, 0.5, 1.0] {
            print!("p({b:.2}) = {:.5}  ", spec.value(b));
        }
        println!();

        // The derivative is a Result because the bridge has none at zero.
        print!("  derivative ");
        for b in [0.05, 0.2, 0.5, 1.0] {
            print!("p'({b:.2}) = {:.5}  ", spec.derivative(b)?);
        }
        println!();

        // The prox map is what the coordinate solver applies; step 1 at the
        // effective level. SCAD and MCP stop shrinking past their flat
        // threshold, lasso never does, bridge jumps to zero.
        print!("  prox       ");
        for w in [0.05, 0.2, 0.5, 1.0] {
            print!("prox({w:.2}) = {:.5}  ", spec.prox(w, 1.0));
        }
        println!();

        println!(
            "  derivative flat beyond |b| = {}",
            spec.flat_threshold()
                .map(|a| format!("{:.4}", a * spec.lambda_n()))
                .unwrap_or_else(|| "never".to_string()),
        );
        for line in spec.check_conditions().to_string().lines() {
            println!("  {line}");
        }
        println!();
    }
    Ok(())
}
