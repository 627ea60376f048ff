//! A hand-sized one-way and two-way ANOVA with treatment contrasts.
//!
//! ```text
//! cargo run --example anova_oneway
//! ```

use tutorweb::anova::{sequential_anova, Anova, Dataset, ModelSpec, Term};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut d = Dataset::new(vec![1.0, 2.0, 3.0, 3.0, 4.0, 5.0]);
    d.add_factor("group", &["a", "a", "a", "b", "b", "b"], &[])?;
    println!("{}", sequential_anova(&d, &ModelSpec::new(vec![Term::main("group")]))?.render());

    let y = vec![12.0, 14.0, 11.0, 15.0, 18.0, 17.0, 13.0, 16.0, 20.0, 22.0, 19.0, 24.0];
    let mut d = Dataset::new(y);
    d.add_factor("dose", &["lo", "lo", "lo", "hi", "hi", "hi", "lo", "lo", "lo", "hi", "hi", "hi"], &["lo"])?;
    d.add_factor("site", &["x", "x", "x", "x", "x", "x", "y", "y", "y", "y", "y", "y"], &[])?;
    let spec = ModelSpec::new(vec![Term::main("dose"), Term::main("site"), Term::interaction(&["dose", "site"])]);
    let fit = Anova::fit(&d, &spec)?;
    println!("{}", fit.table.render());
    let ci = fit.contrast_confint("dose", 0.95)?;
    println!("{}: {:.3} [{:.3}, {:.3}]", ci.contrast, ci.estimate, ci.lo, ci.hi);
    Ok(())
}
