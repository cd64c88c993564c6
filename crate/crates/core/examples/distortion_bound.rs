// Worst-case squared error when synchronization errors move the recovered
// query by at most one level.

use syncnoise::channel::{distortion_bound, one_level_band, transition_matrix};
use syncnoise::probmodel::{Alphabet, Pmf};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let two = Pmf::uniform(Alphabet::integers(1, 2)?);
    let full = [(0, 0), (0, 1), (1, 0), (1, 1)];
    println!("uniform on {{1, 2}}, full band: {}", distortion_bound(&two, &full)?);

    let p_y = Pmf::from_weights(
        Alphabet::integers(1, 9)?,
        vec![0.6870, 0.0766, 0.0364, 0.0292, 0.0658, 0.0386, 0.0002, 0.0001, 0.0662],
    )?;
    let band = one_level_band(9);
    println!("census query, one-level band: {:.4}", distortion_bound(&p_y, &band)?);

    let pairs: Vec<(usize, usize)> = (0..2000usize).map(|k| (k % 9, if k % 17 == 0 { (k % 9).saturating_sub(1) } else { k % 9 })).collect();
    let t = transition_matrix(9, &pairs, &band)?;
    println!("transition matrix banded: {}, identity: {}", t.respects_band(), t.is_identity());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
