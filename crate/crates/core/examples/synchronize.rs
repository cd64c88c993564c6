// Two responders driven by one Lorenz signal forget their initial states.

use syncnoise::chaossim::sync::DEFAULT_THRESHOLDS;
use syncnoise::chaossim::{convergence_certificate, integrate, sync_report, AffineResponder, LorenzDriver};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dt = 1e-3;
    let t_end = 20.0;
    let u = integrate(&LorenzDriver::default(), &[1.0, 1.0, 1.0], None, dt, t_end)?;
    let responder = AffineResponder::standard();

    let cert = convergence_certificate(&responder, &[vec![1.0, 0.0], vec![0.0, 1.0]])?;
    println!("eig Q = {:?}, guaranteed rate {}", cert.q_eigenvalues, cert.decay_rate);

    let r = sync_report(&responder, &u, &[150.0, 150.0], &[-150.0, -150.0], dt, t_end)?;
    println!("fitted log-error slope {:.4}", r.fitted_rate);
    for eps in DEFAULT_THRESHOLDS {
        println!("  |s1 - s2| <= {eps:e} from t = {:?}", r.time_to(eps));
    }
    for t in [0.0, 1.0, 2.0, 5.0, 10.0, 15.0] {
        println!("  t = {t:>4}: error {:.3e}", r.error_series[(t / dt) as usize]);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
