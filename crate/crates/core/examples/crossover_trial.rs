//! One simulated crossover trial: ANOVA table, backward elimination and
//! the treatment interval, followed by a small null calibration.
//!
//! ```text
//! cargo run --release --example crossover_trial
//! ```

use tutorweb::trial_sim::{calibrate, run_trial, SimParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = SimParams::default();
    let outcome = run_trial(&params)?;
    let (a, b) = outcome.assignment.group_sizes();
    println!("{} students in groups of {a} and {b}, {} scores\n", params.n_students, outcome.records.len());
    println!("{}", outcome.table.render());
    for step in &outcome.elimination.trace {
        println!("removed {} (p = {:.4})", step.term, step.p);
    }
    println!("final model: {}\n", outcome.elimination.spec.names().join(" + "));
    if let Some(ci) = &outcome.treatment_ci {
        println!("{} {:.3} [{:.3}, {:.3}] on {} df", ci.contrast, ci.estimate, ci.lo, ci.hi, ci.df);
    }

    let cal = calibrate(&params, 50, 0.05)?;
    println!("\nnull calibration over {} reps:", cal.reps);
    for (term, rate) in &cal.rejection_rates {
        println!("  {term:<15} rejected {rate:.2}");
    }
    Ok(())
}
