//! Expected compiled forms of the vessel requirements at k = 20, with modes
//! numbered in name order: Accelerate 0, Cruise 1, Stop 2, TurnAdjust 3.

pub const REACH_ROW: &str =
    "(and (= s_20 2) (<= (- 50.0 x_20_t) 0.8) (<= (- 50.0 y_20_t) 0.8) (<= tau_20 20.0))";

/// Consecutive clock values at least `min` and at most `max` apart.
pub fn periodic_row(clock: &str, k: usize, min: &str, max: &str) -> String {
    let mut parts = Vec::new();
    for i in 1..=k {
        let gap = format!("(- {clock}_{}_0 {clock}_{i}_0)", i + 1);
        parts.push(format!("(>= {gap} {min})"));
        parts.push(format!("(<= {gap} {max})"));
    }
    format!("(and {})", parts.join(" "))
}
