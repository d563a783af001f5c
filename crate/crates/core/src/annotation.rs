//! Closed-form error of extrapolating ground truth from finite-difference
//! velocities, under constant jerk.
//!
//! With annotations every `δt` and inference latency `Δt`, the position
//! error of `x_t + v̂·Δt` is
//!
//! ```text
//! E_x = (a_prev·δt + j·δt²)/2 · Δt + (a_prev + j·δt)/2 · Δt² + j/6 · Δt³
//! ```
//!
//! and the velocity error is
//!
//! ```text
//! E_v = (2·a_prev·δt + j·δt²)/4 + a_now·Δt + j/2 · Δt²
//! ```
//!
//! Both take `v_t - v̂ ≈ a_t·δt/2`, which is exact only for `j = 0`; the
//! exact cubic motion gives a position residual smaller by `j·δt²·Δt/6`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reference dynamics: typical driving.
pub const NORMAL: Dynamics = Dynamics {
    accel: 0.2,
    jerk: 1.0,
};
/// Reference dynamics: emergency manoeuvre.
pub const EMERGENCY: Dynamics = Dynamics {
    accel: 0.6,
    jerk: 3.0,
};

/// Iso-levels drawn for position error (m).
pub const POSITION_ISO_LEVELS: [f64; 4] = [0.05, 0.1, 0.2, 0.5];
/// Iso-levels drawn for velocity error (m/s).
pub const VELOCITY_ISO_LEVELS: [f64; 4] = [0.2, 0.5, 1.0, 2.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dynamics {
    /// m/s²
    pub accel: f64,
    /// m/s³
    pub jerk: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinematicScenario {
    /// Acceleration at the previous annotation, `t - δt` (m/s²).
    pub a_prev: f64,
    /// Acceleration at `t` (m/s²).
    pub a_now: f64,
    /// Constant jerk (m/s³).
    pub jerk: f64,
    /// Annotation interval `δt` (s).
    pub delta_small: f64,
    /// Inference latency `Δt` (s).
    pub delta_big: f64,
}

impl KinematicScenario {
    /// A scenario with `a_now = a_prev`.
    pub fn new(a_prev: f64, jerk: f64, delta_small: f64, delta_big: f64) -> Result<Self> {
        let s = KinematicScenario {
            a_prev,
            a_now: a_prev,
            jerk,
            delta_small,
            delta_big,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn from_dynamics(d: Dynamics, delta_small: f64, delta_big: f64) -> Result<Self> {
        KinematicScenario::new(d.accel, d.jerk, delta_small, delta_big)
    }

    pub fn with_a_now(self, a_now: f64) -> Self {
        KinematicScenario { a_now, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.a_prev, self.a_now, self.jerk, self.delta_small, self.delta_big]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::InvalidInput("scenario values must be finite".into()));
        }
        if self.delta_small <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "annotation interval must be > 0, got {}",
                self.delta_small
            )));
        }
        if self.delta_big < 0.0 {
            return Err(Error::InvalidInput(format!(
                "inference time must be >= 0, got {}",
                self.delta_big
            )));
        }
        Ok(())
    }
}

/// `E_x` in meters.
pub fn position_error(s: &KinematicScenario) -> f64 {
    let (a, j, ds, db) = (s.a_prev, s.jerk, s.delta_small, s.delta_big);
    (a * ds + j * ds * ds) / 2.0 * db + (a + j * ds) / 2.0 * db * db + j / 6.0 * db * db * db
}

/// `E_v` in m/s.
pub fn velocity_error(s: &KinematicScenario) -> f64 {
    let (j, ds, db) = (s.jerk, s.delta_small, s.delta_big);
    (2.0 * s.a_prev * ds + j * ds * ds) / 4.0 + s.a_now * db + j / 2.0 * db * db
}

/// Velocity error induced by a position error in the annotations themselves.
pub fn annotation_velocity_error(position_error: f64, interval: f64) -> Result<f64> {
    if interval.is_nan() || interval <= 0.0 {
        return Err(Error::InvalidInput(format!("interval must be > 0, got {interval}")));
    }
    Ok(position_error / interval)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Position,
    Velocity,
}

impl Quantity {
    pub fn default_iso_levels(self) -> &'static [f64] {
        match self {
            Quantity::Position => &POSITION_ISO_LEVELS,
            Quantity::Velocity => &VELOCITY_ISO_LEVELS,
        }
    }

    pub fn eval(self, s: &KinematicScenario) -> f64 {
        match self {
            Quantity::Position => position_error(s),
            Quantity::Velocity => velocity_error(s),
        }
    }
}

impl std::str::FromStr for Quantity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "position" => Ok(Quantity::Position),
            "velocity" => Ok(Quantity::Velocity),
            other => Err(Error::InvalidInput(format!("unknown quantity `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridRequest {
    pub delta_small_values: Vec<f64>,
    pub delta_big: f64,
    /// Inclusive `(lo, hi)` acceleration range; `lo == hi` collapses the axis.
    pub accel_range: (f64, f64),
    pub jerk_range: (f64, f64),
    pub iso_levels: Vec<f64>,
    pub quantity: Quantity,
    /// Samples per axis.
    pub resolution: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPoint {
    /// Empty for grid samples; `normal` or `emergency` for reference markers.
    pub marker: String,
    pub delta_small: f64,
    pub delta_big: f64,
    pub accel: f64,
    pub jerk: f64,
    pub error: f64,
    /// One flag per iso level: `error >= level`.
    pub at_or_above: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorGrid {
    pub quantity: Quantity,
    pub iso_levels: Vec<f64>,
    pub points: Vec<GridPoint>,
}

fn axis(name: &str, (lo, hi): (f64, f64), n: usize) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::InvalidInput(format!("{name} range ({lo}, {hi}) is invalid")));
    }
    if lo == hi {
        return Ok(vec![lo]);
    }
    Ok((0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect())
}

/// Samples the chosen error over an (acceleration, jerk) grid for each
/// annotation interval, plus the two reference scenarios per interval.
pub fn error_grid(req: &GridRequest) -> Result<ErrorGrid> {
    if req.resolution < 2 {
        return Err(Error::InvalidInput("resolution must be at least 2".into()));
    }
    if req.delta_small_values.is_empty() {
        return Err(Error::InvalidInput("no annotation intervals given".into()));
    }
    let accels = axis("acceleration", req.accel_range, req.resolution)?;
    let jerks = axis("jerk", req.jerk_range, req.resolution)?;

    let flags = |e: f64| req.iso_levels.iter().map(|&l| e >= l).collect::<Vec<_>>();
    let mut points = Vec::new();
    for &ds in &req.delta_small_values {
        for &a in &accels {
            for &j in &jerks {
                let e = req.quantity.eval(&KinematicScenario::new(a, j, ds, req.delta_big)?);
                points.push(GridPoint {
                    marker: String::new(),
                    delta_small: ds,
                    delta_big: req.delta_big,
                    accel: a,
                    jerk: j,
                    error: e,
                    at_or_above: flags(e),
                });
            }
        }
        for (label, d) in [("normal", NORMAL), ("emergency", EMERGENCY)] {
            let e = req
                .quantity
                .eval(&KinematicScenario::from_dynamics(d, ds, req.delta_big)?);
            points.push(GridPoint {
                marker: label.into(),
                delta_small: ds,
                delta_big: req.delta_big,
                accel: d.accel,
                jerk: d.jerk,
                error: e,
                at_or_above: flags(e),
            });
        }
    }
    Ok(ErrorGrid {
        quantity: req.quantity,
        iso_levels: req.iso_levels.clone(),
        points,
    })
}

impl ErrorGrid {
    /// Long-format CSV: one row per sample.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![
            "marker".to_string(),
            "dt_annotation".into(),
            "dt_inference".into(),
            "a".into(),
            "j".into(),
            "quantity".into(),
            "error".into(),
        ];
        header.extend(self.iso_levels.iter().map(|l| format!("ge_{l}")));
        w.write_record(&header)?;
        let quantity = match self.quantity {
            Quantity::Position => "position",
            Quantity::Velocity => "velocity",
        };
        for p in &self.points {
            let mut row = vec![
                p.marker.clone(),
                p.delta_small.to_string(),
                p.delta_big.to_string(),
                p.accel.to_string(),
                p.jerk.to_string(),
                quantity.to_string(),
                format!("{:.6}", p.error),
            ];
            row.extend(p.at_or_above.iter().map(|b| b.to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sc(d: Dynamics, ds: f64, db: f64) -> KinematicScenario {
        KinematicScenario::from_dynamics(d, ds, db).unwrap()
    }

    #[test]
    fn position_error_reference_values() {
        assert_abs_diff_eq!(position_error(&sc(NORMAL, 0.5, 0.2)), 0.0503333333, epsilon = 1e-9);
        assert_abs_diff_eq!(position_error(&sc(NORMAL, 0.5, 0.5)), 0.1958333333, epsilon = 1e-9);
        assert_abs_diff_eq!(position_error(&sc(EMERGENCY, 0.5, 0.5)), 0.5875, epsilon = 1e-12);
    }

    #[test]
    fn velocity_error_reference_values() {
        let zero = KinematicScenario::new(0.0, 0.0, 0.5, 0.5).unwrap();
        assert_eq!(velocity_error(&zero), 0.0);
        assert_abs_diff_eq!(velocity_error(&sc(EMERGENCY, 0.5, 0.5)), 1.0125, epsilon = 1e-12);
        assert_abs_diff_eq!(velocity_error(&sc(NORMAL, 0.5, 0.2)), 0.1725, epsilon = 1e-12);
        // reading a_t as a_prev + j·δt
        let shifted = sc(NORMAL, 0.5, 0.2).with_a_now(0.2 + 1.0 * 0.5);
        assert_abs_diff_eq!(velocity_error(&shifted), 0.2725, epsilon = 1e-12);
    }

    #[test]
    fn no_latency_no_position_error() {
        assert_eq!(position_error(&sc(EMERGENCY, 0.5, 0.0)), 0.0);
    }

    #[test]
    fn annotation_velocity_error_examples() {
        assert_eq!(annotation_velocity_error(0.5, 0.5).unwrap(), 1.0);
        assert_eq!(annotation_velocity_error(0.0, 0.5).unwrap(), 0.0);
        assert_abs_diff_eq!(annotation_velocity_error(0.1, 0.1).unwrap(), 1.0);
        assert!(annotation_velocity_error(0.1, 0.0).is_err());
    }

    #[test]
    fn scenario_validation() {
        assert!(KinematicScenario::new(0.2, 1.0, 0.0, 0.2).is_err());
        assert!(KinematicScenario::new(0.2, 1.0, 0.5, -0.1).is_err());
        assert!(KinematicScenario::new(f64::NAN, 1.0, 0.5, 0.1).is_err());
    }

    fn request(q: Quantity) -> GridRequest {
        GridRequest {
            delta_small_values: vec![1.0, 0.5, 0.2, 0.1],
            delta_big: 0.5,
            accel_range: (0.0, 1.0),
            jerk_range: (0.0, 4.0),
            iso_levels: q.default_iso_levels().to_vec(),
            quantity: q,
            resolution: 11,
        }
    }

    #[test]
    fn single_point_grid() {
        let req = GridRequest {
            delta_small_values: vec![0.5],
            delta_big: 0.2,
            accel_range: (0.2, 0.2),
            jerk_range: (1.0, 1.0),
            iso_levels: POSITION_ISO_LEVELS.to_vec(),
            quantity: Quantity::Position,
            resolution: 2,
        };
        let g = error_grid(&req).unwrap();
        assert_eq!(g.points.len(), 3);
        assert_abs_diff_eq!(g.points[0].error, 0.0503333333, epsilon = 1e-9);
        assert_eq!(g.points[0].at_or_above, vec![true, false, false, false]);
    }

    #[test]
    fn grid_is_monotone_in_accel_and_jerk() {
        for q in [Quantity::Position, Quantity::Velocity] {
            let g = error_grid(&request(q)).unwrap();
            let n = 11;
            for block in g.points.chunks(n * n + 2) {
                let grid = &block[..n * n];
                for ia in 0..n {
                    for ij in 0..n {
                        let e = grid[ia * n + ij].error;
                        if ia + 1 < n {
                            assert!(grid[(ia + 1) * n + ij].error >= e);
                        }
                        if ij + 1 < n {
                            assert!(grid[ia * n + ij + 1].error >= e);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn half_meter_level_separates_reference_scenarios() {
        let mut req = request(Quantity::Position);
        req.delta_small_values = vec![0.5];
        let g = error_grid(&req).unwrap();
        let normal = g.points.iter().find(|p| p.marker == "normal").unwrap();
        let emergency = g.points.iter().find(|p| p.marker == "emergency").unwrap();
        assert!(!normal.at_or_above[3]);
        assert!(emergency.at_or_above[3]);
    }

    #[test]
    fn grid_errors() {
        let mut req = request(Quantity::Position);
        req.resolution = 1;
        assert!(error_grid(&req).is_err());
        let mut req = request(Quantity::Position);
        req.accel_range = (1.0, 0.0);
        assert!(error_grid(&req).is_err());
        let mut req = request(Quantity::Position);
        req.delta_small_values = vec![0.0];
        assert!(error_grid(&req).is_err());
    }

    #[test]
    fn csv_has_one_row_per_point() {
        let g = error_grid(&request(Quantity::Velocity)).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), g.points.len() + 1);
        assert!(text.starts_with("marker,dt_annotation,dt_inference,a,j,quantity,error,ge_0.2,ge_0.5,ge_1,ge_2"));
    }
}
