//! Pass/fail bookkeeping for the acceptance runner.

use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    pub fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, detail: detail.into() }
    }
}

#[derive(Default)]
pub struct Suite {
    failed: Vec<String>,
    ran: usize,
}

impl Suite {
    /// Runs one check and prints a single PASS/FAIL line. A panic counts as
    /// a failure.
    pub fn check(&mut self, id: &str, name: &str, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Outcome::new(false, format!("panicked: {msg}"))
        });
        self.ran += 1;
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        println!(
            "{verdict} {id:<3} {name} ({:.1}s): {}",
            start.elapsed().as_secs_f64(),
            outcome.detail
        );
        if !outcome.pass {
            self.failed.push(id.to_owned());
        }
    }

    /// Prints the summary and returns the process exit code.
    pub fn finish(self) -> i32 {
        println!(
            "\n{} of {} checks passed{}",
            self.ran - self.failed.len(),
            self.ran,
            if self.failed.is_empty() { String::new() } else { format!("; failed: {}", self.failed.join(", ")) }
        );
        i32::from(!self.failed.is_empty())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panics_count_as_failures() {
        let mut s = Suite::default();
        s.check("a", "ok", || Outcome::new(true, ""));
        s.check("b", "boom", || panic!("boom"));
        assert_eq!(s.finish(), 1);
    }
}
