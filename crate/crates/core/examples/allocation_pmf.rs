//! The nine allocation curves over a 100-item lecture, one per grade
//! bucket, as a coarse text plot plus summary moments.
//!
//! ```text
//! cargo run --example allocation_pmf
//! ```

use tutorweb::engine::allocation_pmf;
use tutorweb::AllocationPolicy;

fn main() {
    let m = 100;
    let policy = AllocationPolicy::default();
    println!("bucket  mean rank  P(rank<=10)  P(rank>90)  profile (deciles)");
    for g in 0..=8u8 {
        let p = allocation_pmf(m, g, &policy).unwrap();
        let mean: f64 = p.iter().enumerate().map(|(i, x)| (i + 1) as f64 * x).sum();
        let low: f64 = p[..10].iter().sum();
        let high: f64 = p[90..].iter().sum();
        let bars: String = p
            .chunks(10)
            .map(|c| {
                let mass: f64 = c.iter().sum();
                [' ', '.', ':', '-', '=', '+', '*', '#', '%', '@'][((mass * 30.0) as usize).min(9)]
            })
            .collect();
        println!("{g:>6}  {mean:>9.2}  {low:>11.4}  {high:>10.4}  |{bars}|");
    }
}
