//! Random step valuations for checking compiled requirements.

use ghasmt_core::oracle::{add_clock_values, StepValuation};
use ghasmt_core::props::{clocks_used, PropertyFile};
use ghasmt_core::unroll::{ConstraintSystem, StepVar};
use rand_chacha::ChaCha8Rng;
use rand_core::RngCore;

fn draw(rng: &mut ChaCha8Rng, grid: &[f64]) -> f64 {
    grid[(rng.next_u64() % grid.len() as u64) as usize]
}

/// A random valuation of every step variable of `cs`, with monitor clocks
/// following their update rules. Values come from a grid that contains the
/// thresholds used by the properties.
pub fn random_valuation(rng: &mut ChaCha8Rng, cs: &ConstraintSystem, file: &PropertyFile, req_name: &str) -> StepValuation {
    let grid = [-1.0, 0.0, 0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.5, 0.8, 1.0, 49.2, 49.5, 50.0, 51.0];
    let mut val = StepValuation::default();
    let mut tau = 0.0;
    val.set(StepVar::Clock(0), 0.0);
    for i in 1..=cs.k + 1 {
        val.set(StepVar::Mode(i), (rng.next_u64() % cs.modes.len() as u64) as f64);
        for v in &cs.tracked {
            val.set(StepVar::Begin(v.clone(), i), draw(rng, &grid));
            if i <= cs.k {
                val.set(StepVar::End(v.clone(), i), draw(rng, &grid));
            }
        }
        if i <= cs.k {
            let d = draw(rng, &[0.0, 0.02, 0.025, 0.03, 0.04, 0.05, 0.06, 0.5, 1.0]);
            tau += d;
            val.set(StepVar::Dwell(i), d);
            val.set(StepVar::Clock(i), tau);
        }
    }
    for name in cs.constants.keys() {
        val.set(StepVar::Const(name.clone()), draw(rng, &grid));
    }
    let req = file.requirement(req_name).unwrap();
    for c in clocks_used(file, req) {
        add_clock_values(&mut val, cs, &c).unwrap();
    }
    val
}

pub const SHAPES: &str = "\
clock gps_t elapsed
clock busy since v > 0.5
clock last on hError <= 0.01
Reach: reach mode=Stop (50 - x <= 0.8) && (50 - y <= 0.8) within 1
ReachAny: reach x >= 49.5 || busy > 0.04
Respond: respond hError > 0.01 -> dec == 1 within 0.05
Periodic: periodic gps_t in [0.02, 0.05]
PeriodicEvent: periodic last in [0, 0.5]
Never: never respond v > 0.5 -> x == 50 within 0.06
";

