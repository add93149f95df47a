//! Intrinsic units, the nearest-point distance law and scenario records.
//!
//! Choosing the region area and vehicle speed as units leaves two degrees of
//! freedom: the fleet size and the demand `pi`, the number of calls arriving
//! while a vehicle crosses the region. Times computed in these units convert
//! back to hours with [`rescale_time`]; fleet sizes and time ratios carry over
//! unchanged ([`rescale_count`]).

use crate::error::{domain, ModelError, Result};
use crate::policy::Policy;

/// Distance constant for street networks resembling rectangular grids.
pub const DEFAULT_K: f64 = 0.63;

/// Demand and speed in physical units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawUnits {
    /// Trip origination rate, pax/hr per km².
    pub lambda: f64,
    /// Region area, km².
    pub area: f64,
    /// Vehicle speed, km/hr.
    pub speed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub pi: f64,
    pub k: f64,
    pub c: usize,
    pub policy: Policy,
    pub raw: Option<RawUnits>,
}

impl Scenario {
    pub fn new(policy: Policy, pi: f64, k: f64, c: usize) -> Result<Self> {
        if !(pi > 0.0 && pi.is_finite()) {
            return Err(domain(format!("demand pi must be positive, got {pi}")));
        }
        if !(k > 0.0 && k.is_finite()) {
            return Err(domain(format!("distance constant k must be positive, got {k}")));
        }
        policy.check_capacity(c)?;
        Ok(Self { pi, k, c, policy, raw: None })
    }

    /// Scenario with the policy's default capacity (1 for taxi, 2 otherwise).
    pub fn with_default_capacity(policy: Policy, pi: f64, k: f64) -> Result<Self> {
        Self::new(policy, pi, k, policy.default_capacity())
    }

    /// Builds the scenario from physical demand, area and speed.
    pub fn from_raw(policy: Policy, raw: RawUnits, k: f64, c: usize) -> Result<Self> {
        let pi = intrinsic_demand(raw.lambda, raw.area, raw.speed)?;
        let mut s = Self::new(policy, pi, k, c)?;
        s.raw = Some(raw);
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let s = Self::new(self.policy, self.pi, self.k, self.c)?;
        if let Some(raw) = self.raw {
            let pi = intrinsic_demand(raw.lambda, raw.area, raw.speed)?;
            if ((pi - s.pi) / pi).abs() > 1e-12 {
                return Err(ModelError::Config(format!(
                    "pi = {} does not match raw units (expected {pi})",
                    s.pi
                )));
            }
        }
        Ok(())
    }

    /// Direct drive time of an average trip, `delta(1) = k`.
    pub fn drive_time(&self) -> f64 {
        self.k
    }
}

/// `pi = lambda * R^{3/2} / v`.
pub fn intrinsic_demand(lambda: f64, area: f64, speed: f64) -> Result<f64> {
    if !(lambda > 0.0 && area > 0.0 && speed > 0.0) {
        return Err(domain(format!(
            "intrinsic demand needs positive inputs, got lambda={lambda}, R={area}, v={speed}"
        )));
    }
    Ok(lambda * area.powf(1.5) / speed)
}

/// Converts an intrinsic time to hours: `t * R^{1/2} / v`.
pub fn rescale_time(t: f64, area: f64, speed: f64) -> Result<f64> {
    if !(area > 0.0 && speed > 0.0) {
        return Err(domain(format!("rescaling needs positive R and v, got R={area}, v={speed}")));
    }
    Ok(t * area.sqrt() / speed)
}

/// Inverse of [`rescale_time`].
pub fn intrinsic_time(hours: f64, area: f64, speed: f64) -> Result<f64> {
    if !(area > 0.0 && speed > 0.0) {
        return Err(domain(format!("rescaling needs positive R and v, got R={area}, v={speed}")));
    }
    Ok(hours * speed / area.sqrt())
}

/// Fleet sizes and time ratios are dimensionless and survive rescaling as-is.
pub fn rescale_count(x: f64) -> f64 {
    x
}

/// Expected distance from a random point to the nearest of `r` random points,
/// `k * r^{-1/2}`. `r` may be any positive real.
pub fn nearest_distance(r: f64, k: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(domain(format!("nearest distance diverges for r = {r}")));
    }
    if !(k > 0.0) {
        return Err(domain(format!("distance constant k must be positive, got {k}")));
    }
    Ok(k / r.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn intrinsic_demand_examples() {
        assert_eq!(intrinsic_demand(1.0, 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(intrinsic_demand(10.0, 4.0, 2.0).unwrap(), 40.0);
        assert_eq!(intrinsic_demand(100.0, 1.0, 1.0).unwrap(), 100.0);
        assert!(matches!(intrinsic_demand(0.0, 1.0, 1.0), Err(ModelError::Domain(_))));
        assert!(intrinsic_demand(1.0, -1.0, 1.0).is_err());
        assert!(intrinsic_demand(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn rescale_time_examples() {
        assert_eq!(rescale_time(1.0, 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(rescale_time(2.0, 4.0, 1.0).unwrap(), 4.0);
        let drive = nearest_distance(1.0, DEFAULT_K).unwrap();
        assert_eq!(rescale_time(drive, 1.0, 1.0).unwrap(), 0.63);
        assert!(rescale_time(1.0, 0.0, 1.0).is_err());
        assert!(rescale_time(1.0, 1.0, -2.0).is_err());
        assert_eq!(rescale_count(92.5), 92.5);
    }

    #[test]
    fn nearest_distance_examples() {
        assert_eq!(nearest_distance(1.0, 0.63).unwrap(), 0.63);
        assert_eq!(nearest_distance(4.0, 0.63).unwrap(), 0.315);
        assert!((nearest_distance(100.0, 1.0).unwrap() - 0.1).abs() < 1e-15);
        assert!(nearest_distance(0.0, 0.63).is_err());
        assert!(nearest_distance(-3.0, 0.63).is_err());
    }

    #[test]
    fn scenario_invariants() {
        assert!(Scenario::new(Policy::Taxi, 100.0, 0.63, 1).is_ok());
        assert!(Scenario::new(Policy::Taxi, 100.0, 0.63, 2).is_err());
        assert!(Scenario::new(Policy::SharedA, 100.0, 0.63, 3).is_err());
        assert!(Scenario::new(Policy::SharedB, 100.0, 0.63, 2).is_ok());
        assert!(Scenario::new(Policy::Dar, 100.0, 0.63, 1).is_err());
        assert!(Scenario::new(Policy::Dar, 100.0, 0.63, 5).is_ok());
        assert!(Scenario::new(Policy::Dar, 0.0, 0.63, 5).is_err());
        assert!(Scenario::new(Policy::Dar, 1.0, -0.63, 5).is_err());

        let raw = RawUnits { lambda: 10.0, area: 4.0, speed: 2.0 };
        let s = Scenario::from_raw(Policy::Taxi, raw, DEFAULT_K, 1).unwrap();
        assert_eq!(s.pi, 40.0);
        s.validate().unwrap();
        let bad = Scenario { pi: 41.0, ..s };
        assert!(matches!(bad.validate(), Err(ModelError::Config(_))));
    }

    proptest! {
        #[test]
        fn demand_is_homogeneous(lambda in 1e-3f64..1e4, area in 1e-2f64..1e3,
                                 speed in 1e-1f64..1e2, alpha in 1e-3f64..1e3) {
            let base = intrinsic_demand(lambda, area, speed).unwrap();
            let scaled = intrinsic_demand(alpha * lambda, area, speed).unwrap();
            prop_assert!((scaled - alpha * base).abs() <= 1e-12 * scaled.abs());
        }

        #[test]
        fn nearest_distance_square_root_law(r in 1e-6f64..1e8, k in 1e-3f64..10.0) {
            let d = nearest_distance(r, k).unwrap();
            prop_assert!((d * r.sqrt() - k).abs() <= 4.0 * f64::EPSILON * k);
            let further = nearest_distance(r * 1.5, k).unwrap();
            prop_assert!(further < d);
        }

        #[test]
        fn time_round_trip(t in 1e-6f64..1e6, area in 1e-3f64..1e4, speed in 1e-2f64..1e3) {
            let hours = rescale_time(t, area, speed).unwrap();
            let back = intrinsic_time(hours, area, speed).unwrap();
            prop_assert!(((back - t) / t).abs() <= 1e-12);
        }
    }
}
