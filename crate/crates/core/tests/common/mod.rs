#![allow(dead_code)]

use qcat::nqd::*;
use qcat::nuclear::{DvrAxis, DvrGrid, DvrSystem};
use qcat::qmd::Direction;

pub const ECKART_MASS: f64 = 1.0;
pub const ECKART_HEIGHT: f64 = 2.0;
pub const ECKART_RANGE: f64 = 0.5;

/// Transmission through `V0 sech^2(x/a)` at energy `e`.
pub fn eckart_transmission(e: f64, m: f64, v0: f64, a: f64) -> f64 {
    let k = (2.0 * m * e).sqrt();
    let s = 8.0 * m * v0 * a * a - 1.0;
    let num = (std::f64::consts::PI * k * a).sinh().powi(2);
    let barrier = if s > 0.0 {
        (std::f64::consts::FRAC_PI_2 * s.sqrt()).cosh().powi(2)
    } else {
        (std::f64::consts::FRAC_PI_2 * (-s).sqrt()).cos().powi(2)
    };
    num / (num + barrier)
}

pub fn eckart_system(dx: f64) -> DvrSystem {
    let points = (160.0 / dx).round() as usize + 1;
    let ax = DvrAxis::new(points, -80.0, dx, ECKART_MASS).unwrap();
    DvrSystem::from_fn(DvrGrid::new(vec![ax]).unwrap(), 1, |_, x| {
        ECKART_HEIGHT / (x[0] / ECKART_RANGE).cosh().powi(2)
    })
    .unwrap()
}

pub fn eckart_config(steps: usize) -> NqdConfig {
    NqdConfig {
        initial: InitialPacket::Gaussian { surface: 0, center: vec![-35.0], widths: vec![8.0], momenta: vec![2.0] },
        dividing_surface: DividingSurface { axis: 0, threshold: 0.0, product_side: Direction::Above },
        dt: 35.0 / steps as f64,
        steps,
        method: PropagationMethod::ExactKrylov,
        flux: FluxScheme::KineticCut,
        leak_threshold: Some(DEFAULT_LEAK_THRESHOLD),
        strict: true,
    }
}

/// Relative error of the long-time product probability against the analytic
/// coefficient at the packet's mean energy.
pub fn eckart_error(run: &NqdRun) -> f64 {
    let t = eckart_transmission(run.summary.energy_initial, ECKART_MASS, ECKART_HEIGHT, ECKART_RANGE);
    (run.summary.q_final - t).abs() / t
}
