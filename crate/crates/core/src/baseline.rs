//! Fixed-route transit and private-auto reference points.
//!
//! Transit routes form a square grid of spacing `S` over the unit region with
//! the fleet spread evenly across routes. Door-to-door time is walking
//! `S / w` (for walking speed `w`), waiting half a headway `2 / (m S)`, and
//! riding the mean trip `2/3`. The spacing is an EOQ variable; at its optimum
//! walking and waiting times are equal. Time ratios are taken against the
//! mean drive time `2/3`.

use crate::error::{domain, Result};

/// Vehicle speed over walking speed.
pub const DEFAULT_WALK_SLOWDOWN: f64 = 10.0;

/// Mean L1 trip length between uniform points of the unit square.
pub const MEAN_TRIP: f64 = 2.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineMode {
    Transit,
    Auto,
}

impl BaselineMode {
    pub fn name(self) -> &'static str {
        match self {
            BaselineMode::Transit => "transit",
            BaselineMode::Auto => "auto",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselinePoint {
    pub mode: BaselineMode,
    pub m: f64,
    pub f: f64,
    /// Optimal route spacing, transit only.
    pub spacing: Option<f64>,
}

/// Conventional transit on a square route grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transit {
    pub walk_slowdown: f64,
}

impl Default for Transit {
    fn default() -> Self {
        Self { walk_slowdown: DEFAULT_WALK_SLOWDOWN }
    }
}

impl Transit {
    fn check(m: f64) -> Result<()> {
        if !(m > 0.0) {
            return Err(domain(format!("transit fleet must be positive, got {m}")));
        }
        Ok(())
    }

    /// Door-to-door time for spacing `s`: `s w_r + 2/(m s) + 2/3`.
    pub fn door_to_door(&self, m: f64, s: f64) -> f64 {
        s * self.walk_slowdown + 2.0 / (m * s) + MEAN_TRIP
    }

    /// EOQ optimum of the spacing, `(2 / (w_r m))^{1/2}`.
    pub fn optimal_spacing(&self, m: f64) -> Result<f64> {
        Self::check(m)?;
        Ok((2.0 / (self.walk_slowdown * m)).sqrt())
    }

    /// `1 + 3 (2 w_r / m)^{1/2}`; with `w_r = 10` this is `1 + 6 (5/m)^{1/2}`.
    pub fn time_ratio(&self, m: f64) -> Result<f64> {
        Self::check(m)?;
        Ok(1.0 + (18.0 * self.walk_slowdown / m).sqrt())
    }

    pub fn point(&self, m: f64) -> Result<BaselinePoint> {
        Ok(BaselinePoint {
            mode: BaselineMode::Transit,
            m,
            f: self.time_ratio(m)?,
            spacing: Some(self.optimal_spacing(m)?),
        })
    }
}

/// Transit time ratio with the default walking speed.
pub fn transit_time_ratio(m: f64) -> Result<f64> {
    Transit::default().time_ratio(m)
}

/// Optimal route spacing with the default walking speed, `(1 / (5m))^{1/2}`.
pub fn transit_optimal_spacing(m: f64) -> Result<f64> {
    Transit::default().optimal_spacing(m)
}

/// Cars in circulation when everyone drives: `(2/3) pi`, at ratio 1.
pub fn auto_point(pi: f64) -> Result<BaselinePoint> {
    if !(pi >= 0.0) {
        return Err(domain(format!("demand must be nonnegative, got {pi}")));
    }
    Ok(BaselinePoint { mode: BaselineMode::Auto, m: MEAN_TRIP * pi, f: 1.0, spacing: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transit_examples() {
        assert_eq!(transit_time_ratio(180.0).unwrap(), 2.0);
        assert_eq!(transit_time_ratio(20.0).unwrap(), 4.0);
        assert_eq!(transit_time_ratio(5.0).unwrap(), 7.0);
        assert!(transit_time_ratio(0.0).is_err());
        assert!(transit_time_ratio(-1.0).is_err());
    }

    #[test]
    fn matches_published_form() {
        for m in [1.0, 7.5, 64.0, 333.0, 1e5] {
            let published = 1.0 + 6.0 * (5.0 / m as f64).sqrt();
            assert!((transit_time_ratio(m).unwrap() - published).abs() < 1e-12);
        }
    }

    #[test]
    fn spacing_examples() {
        assert!((transit_optimal_spacing(5.0).unwrap() - 0.2).abs() < 1e-15);
        assert!((transit_optimal_spacing(20.0).unwrap() - 0.1).abs() < 1e-15);
        let s = transit_optimal_spacing(180.0).unwrap();
        assert!((s - 1.0 / 30.0).abs() < 1e-15);
        assert!(transit_optimal_spacing(0.0).is_err());
    }

    #[test]
    fn eoq_identity() {
        let t = Transit::default();
        for m in [5.0, 20.0, 180.0, 1234.5] {
            let s = t.optimal_spacing(m).unwrap();
            // walking equals waiting at the optimum
            assert!((10.0 * s - 2.0 / (m * s)).abs() < 1e-12);
            let min = MEAN_TRIP + 4.0 * (5.0 / m).sqrt();
            assert!((t.door_to_door(m, s) - min).abs() < 1e-12);
            assert!((t.door_to_door(m, s) / MEAN_TRIP - t.time_ratio(m).unwrap()).abs() < 1e-12);
            assert!(t.door_to_door(m, 1.1 * s) > min && t.door_to_door(m, 0.9 * s) > min);
        }
    }

    #[test]
    fn transit_decreases_towards_auto() {
        let mut prev = f64::INFINITY;
        for m in [1.0, 10.0, 100.0, 1e3, 1e6, 1e10] {
            let f = transit_time_ratio(m).unwrap();
            assert!(f < prev && f > 1.0);
            prev = f;
        }
        assert!(transit_time_ratio(1e12).unwrap() - 1.0 < 1e-4);
    }

    #[test]
    fn doubling_fleet_scales_excess_time() {
        for m in [3.0, 50.0, 700.0] {
            let a = transit_time_ratio(m).unwrap() - 1.0;
            let b = transit_time_ratio(2.0 * m).unwrap() - 1.0;
            assert!((a / b - 2f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn auto_examples() {
        let p = auto_point(100.0).unwrap();
        assert!((p.m - 66.67).abs() < 0.01);
        assert_eq!(p.f, 1.0);
        assert_eq!(auto_point(0.0).unwrap().m, 0.0);
        assert!((auto_point(10000.0).unwrap().m - 6666.7).abs() < 0.1);
        assert!(auto_point(-1.0).is_err());
    }
}
