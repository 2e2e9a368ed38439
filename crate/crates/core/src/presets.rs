//! Shipped treatments, acceptance-logit coefficient columns and rejection
//! payoff rows.

use serde::Serialize;

use crate::game::{GameSpec, InfoProtocol, Player, RecognitionModel};
use crate::rational::{q, zero, Q};
use crate::sim::LogitModel;

pub const TREATMENTS: [&str; 5] = ["1-perfect", "2-perfect", "3-perfect", "3-partial", "3-none"];

/// Per-round budget shrinkage used in the laboratory sessions.
pub fn experiment_shrink() -> Q {
    q(228, 240)
}

fn outside_defaults() -> [Q; 3] {
    [q(1, 20), q(1, 20), q(9, 10)]
}

/// One of the five laboratory treatments, with no budget shrinkage.
pub fn treatment(name: &str) -> Option<GameSpec> {
    let zeros = [zero(), zero(), zero()];
    let spec = match name {
        "1-perfect" => GameSpec::new(name, 1, InfoProtocol::Perfect, outside_defaults())
            .with_recognition(RecognitionModel::FixedOrder(vec![Player::A])),
        "2-perfect" => GameSpec::new(name, 2, InfoProtocol::Perfect, outside_defaults())
            .with_recognition(RecognitionModel::FixedOrder(vec![Player::A, Player::B])),
        "3-perfect" => GameSpec::new(name, 3, InfoProtocol::Perfect, zeros),
        "3-partial" => GameSpec::new(name, 3, InfoProtocol::Partial, zeros),
        "3-none" => GameSpec::new(name, 3, InfoProtocol::None, zeros),
        _ => return experiment_variant(name),
    };
    Some(spec)
}

/// `"<treatment>-shrink"` names the treatment with the laboratory budget
/// shrinkage.
fn experiment_variant(name: &str) -> Option<GameSpec> {
    let base = name.strip_suffix("-shrink")?;
    if base.ends_with("-shrink") {
        return None;
    }
    let spec = treatment(base)?;
    Some(GameSpec { id: name.to_string(), ..spec }.with_shrink_factor(experiment_shrink()))
}

pub fn all_treatments() -> Vec<GameSpec> {
    TREATMENTS.iter().map(|n| treatment(n).expect("shipped preset")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogitColumn {
    pub column: usize,
    pub location: &'static str,
    pub treatment: &'static str,
    pub model: LogitModel,
    /// Session-clustered standard errors as published, in model order.
    pub std_errors: [f64; 4],
    pub pseudo_r2: f64,
    pub observations: usize,
}

macro_rules! column {
    ($c:expr, $loc:expr, $t:expr, [$b0:expr, $b1:expr, $b2:expr, $b3:expr], [$s0:expr, $s1:expr, $s2:expr, $s3:expr], $r2:expr, $n:expr) => {
        LogitColumn {
            column: $c,
            location: $loc,
            treatment: $t,
            model: LogitModel { constant: $b0, strong: $b1, own_share: $b2, gini: $b3 },
            std_errors: [$s0, $s1, $s2, $s3],
            pseudo_r2: $r2,
            observations: $n,
        }
    };
}

pub const LOGIT_COLUMNS: [LogitColumn; 7] = [
    column!(1, "Caltech", "1-Perfect", [-0.420, -2.472, 8.271, -0.040], [1.506, 0.647, 2.968, 2.022], 0.48, 176),
    column!(2, "Caltech", "2-Perfect", [-0.895, -2.800, 9.211, -1.628], [0.717, 0.707, 1.883, 1.293], 0.51, 176),
    column!(3, "Caltech", "3-Perfect-Excl", [-2.428, -1.358, 10.851, -4.519], [1.345, 0.501, 3.434, 1.903], 0.46, 156),
    column!(4, "UCI", "1-Perfect", [-1.596, -2.183, 12.561, 0.514], [1.328, 0.641, 2.662, 1.884], 0.58, 304),
    column!(5, "UCI", "2-Perfect", [-2.435, -1.028, 9.522, -1.626], [0.515, 0.382, 1.241, 1.348], 0.36, 304),
    column!(6, "UCI", "3-Partial-Incl", [-2.239, -0.074, 9.224, -3.542], [0.622, 0.386, 1.963, 1.363], 0.35, 210),
    column!(7, "UCI", "3-Perfect-Excl", [-3.707, -0.195, 15.478, -8.610], [1.546, 0.403, 4.560, 2.800], 0.46, 218),
];

pub fn logit_column(column: usize) -> Option<&'static LogitColumn> {
    LOGIT_COLUMNS.iter().find(|c| c.column == column)
}

/// Observed first-offer rejection rate, rejection payoff and optimal
/// payoff of one location and treatment, all in percent of the prize.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MrpRow {
    pub location: &'static str,
    pub treatment: &'static str,
    pub rejection_rate_pct: f64,
    pub mrp_pct: f64,
    pub optimal_payoff_pct: f64,
    /// Matching coefficient column, when one was estimated.
    pub logit_column: Option<usize>,
}

impl MrpRow {
    pub fn mrp(&self) -> f64 {
        self.mrp_pct / 100.0
    }

    pub fn optimal_payoff(&self) -> f64 {
        self.optimal_payoff_pct / 100.0
    }

    pub fn name(&self) -> String {
        format!("{} {}", self.location, self.treatment)
    }
}

const fn row(
    location: &'static str,
    treatment: &'static str,
    rejection_rate_pct: f64,
    mrp_pct: f64,
    optimal_payoff_pct: f64,
    logit_column: Option<usize>,
) -> MrpRow {
    MrpRow { location, treatment, rejection_rate_pct, mrp_pct, optimal_payoff_pct, logit_column }
}

pub const MRP_ROWS: [MrpRow; 11] = [
    row("Caltech", "1-Perfect", 22.73, 5.00, 64.0, Some(1)),
    row("Caltech", "2-Perfect", 27.27, 27.24, 60.0, Some(2)),
    row("Caltech", "3-Perfect-Excl", 29.49, 26.09, 46.0, Some(3)),
    row("Caltech", "3-Perfect-Incl", 38.46, 43.00, 55.0, None),
    row("UCI", "1-Perfect", 15.79, 5.00, 65.0, Some(4)),
    row("UCI", "2-Perfect", 31.58, 26.28, 49.0, Some(5)),
    row("UCI", "3-Perfect-Excl", 21.10, 26.96, 44.0, Some(7)),
    row("UCI", "3-Perfect-Incl", 21.57, 25.76, 47.0, None),
    row("UCI", "3-None", 20.71, 24.52, 45.0, None),
    row("UCI", "3-Partial-Excl", 18.18, 12.22, 41.0, None),
    row("UCI", "3-Partial-Incl", 23.81, 15.47, 42.0, Some(6)),
];

pub fn mrp_row(location: &str, treatment: &str) -> Option<&'static MrpRow> {
    MRP_ROWS.iter().find(|r| r.location.eq_ignore_ascii_case(location) && r.treatment.eq_ignore_ascii_case(treatment))
}

/// Strong indicators of the weak and strong slot for a coefficient
/// column: conditions with a strict weak/strong split mark the strong
/// slot, symmetric conditions mark neither.
pub fn strong_flags(column: &LogitColumn) -> [bool; 2] {
    if column.treatment.ends_with("-Incl") && column.treatment.starts_with("3-Perfect") {
        [false, false]
    } else {
        [false, true]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for spec in all_treatments() {
            spec.clone().validate().unwrap();
        }
        let shrink = treatment("3-partial-shrink").unwrap();
        assert_eq!(shrink.shrink_factor, q(19, 20));
        assert!(treatment("3-partial-shrink-shrink").is_none());
        assert!(treatment("4-perfect").is_none());
    }

    #[test]
    fn tables_are_complete() {
        assert_eq!(LOGIT_COLUMNS.len(), 7);
        assert_eq!(MRP_ROWS.len(), 11);
        for r in &MRP_ROWS {
            if let Some(c) = r.logit_column {
                let col = logit_column(c).unwrap();
                assert_eq!((col.location, col.treatment), (r.location, r.treatment));
            }
        }
        assert_eq!(mrp_row("caltech", "3-perfect-excl").unwrap().mrp_pct, 26.09);
    }
}
