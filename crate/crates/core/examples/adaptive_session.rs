//! Two simulated students, one strong and one weak, work through the same
//! calibrated 100-item lecture. The strong student drifts toward harder
//! items.
//!
//! ```text
//! cargo run --example adaptive_session
//! ```

use tutorweb::anova::MathBackground;
use tutorweb::trial_sim::{calibrated_lecture, simulate_quiz_session, SimStudent};
use tutorweb::{AllocationPolicy, Engine};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (_, bank, lecture) = calibrated_lecture(100);
    for (id, theta) in [("strong", 3.0), ("average", 0.0), ("weak", -3.0)] {
        let mut engine = Engine::new(bank.clone(), AllocationPolicy::default());
        let student = SimStudent { id: id.into(), theta, math: MathBackground::Strong };
        let trace = simulate_quiz_session(&student, &lecture, 300, &mut engine, 7)?;
        let last = trace.steps.last().unwrap();
        println!(
            "{id:<8} theta {theta:+.1}: mean rank 1-50 {:5.1}, 251-300 {:5.1}, final grade {:+.1} (bucket {})",
            trace.mean_rank(0..50),
            trace.mean_rank(250..300),
            last.grade,
            last.bucket
        );
    }
    Ok(())
}
