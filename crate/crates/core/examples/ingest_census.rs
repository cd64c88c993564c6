// Builds `p_X`, `p_Y` and the joint from census records.
//
// Pass a path to an adult `.data` file, or run without arguments to use a
// few inline records.

use syncnoise::ingest::{load_adult, load_adult_from, problem_from_summary, AttributeEncoding};
use syncnoise::probmodel::LogBase;

const SAMPLE: &str = "\
39, State-gov, 77516, Bachelors, 13, Never-married, Adm-clerical, Not-in-family, White, Male, 2174, 0, 40, United-States, <=50K
50, Self-emp-not-inc, 83311, Bachelors, 13, Married-civ-spouse, Exec-managerial, Husband, White, Male, 0, 0, 13, United-States, <=50K
38, Private, 215646, HS-grad, 9, Divorced, Handlers-cleaners, Not-in-family, White, Female, 0, 0, 40, United-States, <=50K
53, Private, 234721, 11th, 7, Married-civ-spouse, Handlers-cleaners, Husband, Black, Male, 0, 0, 40, United-States, <=50K
28, Private, 338409, Bachelors, 13, Married-civ-spouse, Prof-specialty, Wife, Black, Female, 0, 0, 40, Cuba, <=50K
37, ?, 284582, Masters, 14, Married-civ-spouse, Exec-managerial, Wife, Asian-Pac-Islander, Female, 0, 0, 40, India, >50K
";

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let encoding = AttributeEncoding::default();
    let summary = match std::env::args().nth(1) {
        Some(path) => load_adult(path.as_ref(), &encoding)?,
        None => load_adult_from(SAMPLE.as_bytes(), &encoding)?,
    };
    println!("{} rows, {} dropped", summary.row_count, summary.dropped_rows);
    for (x, p) in summary.p_x.alphabet().points().iter().zip(summary.p_x.probs()) {
        if *p > 0.0 {
            println!("  p_X({x:?}) = {p:.4}");
        }
    }
    for (y, p) in summary.p_y.alphabet().points().iter().zip(summary.p_y.probs()) {
        if *p > 0.0 {
            println!("  p_Y({}) = {p:.4}", y[0]);
        }
    }
    let problem = problem_from_summary(&summary, LogBase::Two)?;
    println!("I[X;Y] = {:.4} bits", problem.undistorted_information());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
