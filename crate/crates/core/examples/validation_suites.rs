//! Runs the synthetic validation suites in both tolerance profiles.

use arrow_pratt::validate::{run_all, ToleranceProfile};

fn main() {
    for profile in [ToleranceProfile::Default, ToleranceProfile::Strict] {
        println!("[{profile}]");
        for report in run_all(profile) {
            println!("  {report}");
        }
    }
}
