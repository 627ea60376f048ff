//! Drives an engine, records its events in a file-backed log, tears the
//! final line as a crash would and rebuilds state from what survived.
//!
//! ```text
//! cargo run --example replay_log
//! ```

use std::io::Write;

use chrono::Utc;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tutorweb::log::{replay_log, AnswerLog, LogEntry};
use tutorweb::trial_sim::calibrated_lecture;
use tutorweb::{AllocationPolicy, Engine, StudentId};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (_, bank, lecture) = calibrated_lecture(20);
    let path = std::env::temp_dir().join(format!("tutorweb-replay-{}.log", std::process::id()));
    let _ = std::fs::remove_file(&path);

    let mut engine = Engine::new(bank.clone(), AllocationPolicy::default());
    let mut log = AnswerLog::open(&path)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let student = StudentId::from("ann");
    for _ in 0..30 {
        let alloc = engine.plan_next(&student, &lecture, rng.random())?;
        log.append(LogEntry::from_event(&alloc.event, Utc::now()))?;
        engine.apply(&alloc.event)?;
        let n = engine.bank().render(alloc.question(), alloc.presentation_seed())?.answers.len();
        let answer = engine.plan_answer(&student, &lecture, alloc.question(), rng.random_range(0..n))?;
        log.append(LogEntry::from_event(&answer, Utc::now()))?;
        engine.apply(&answer)?;
    }
    println!("live: {} events, grade {:+.1}", log.len(), engine.report(&student, &lecture).grade);
    drop(log);

    std::fs::OpenOptions::new().append(true).open(&path)?.write_all(br#"{"seq":61,"time":"2026-"#)?;
    let recovered = AnswerLog::open(&path)?;
    let rebuilt = replay_log(recovered.entries(), bank, AllocationPolicy::default())?;
    println!("after torn write: {} events recovered", recovered.len());
    println!("state identical: {}", rebuilt.snapshot() == engine.snapshot());
    std::fs::remove_file(&path)?;
    Ok(())
}
