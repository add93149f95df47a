//! Pareto frontier of transit modes in the (fleet size, time ratio) plane and
//! the niche each mode occupies on it.

use crate::baseline::{auto_point, Transit};
use crate::error::{ModelError, Result};
use crate::optimize::lin_space;
use crate::steady::PerformanceCurve;

/// Default number of common fleet-size samples.
pub const DEFAULT_SAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct FrontierPoint {
    pub m: f64,
    pub f: f64,
    pub mode: String,
}

impl FrontierPoint {
    pub fn new(m: f64, f: f64, mode: impl Into<String>) -> Self {
        Self { m, f, mode: mode.into() }
    }

    /// No larger in both coordinates and smaller in one.
    pub fn dominates(&self, other: &FrontierPoint) -> bool {
        self.m <= other.m && self.f <= other.f && (self.m < other.m || self.f < other.f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Niche {
    pub mode: String,
    pub m_lo: f64,
    pub m_hi: f64,
}

impl Niche {
    pub fn width(&self) -> f64 {
        self.m_hi - self.m_lo
    }
}

/// One input to the frontier.
#[derive(Debug, Clone)]
pub enum ModeInput {
    /// A flexible-mode curve; its efficient branch is interpolated in `m`.
    Curve(PerformanceCurve),
    /// Conventional transit, evaluated at every sample.
    Transit(Transit),
    /// The private-auto point for demand `pi`.
    Auto { pi: f64 },
    /// Raw points taken as given.
    Points { label: String, points: Vec<(f64, f64)> },
}

impl ModeInput {
    pub fn label(&self) -> String {
        match self {
            ModeInput::Curve(c) => c.label(),
            ModeInput::Transit(_) => "transit".into(),
            ModeInput::Auto { .. } => "auto".into(),
            ModeInput::Points { label, .. } => label.clone(),
        }
    }

    fn sample(&self, ms: &[f64], range: (f64, f64)) -> Result<Vec<FrontierPoint>> {
        let label = self.label();
        let inside = |m: f64| m >= range.0 && m <= range.1;
        Ok(match self {
            ModeInput::Curve(curve) => {
                let mut pts: Vec<(f64, f64)> = curve.efficient().map(|p| (p.m, p.f_t)).collect();
                pts.sort_by(|a, b| a.0.total_cmp(&b.0));
                ms.iter()
                    .filter_map(|&m| interpolate(&pts, m).map(|f| FrontierPoint::new(m, f, &label)))
                    .collect()
            }
            ModeInput::Transit(t) => ms
                .iter()
                .filter(|&&m| m > 0.0)
                .map(|&m| Ok(FrontierPoint::new(m, t.time_ratio(m)?, &label)))
                .collect::<Result<_>>()?,
            ModeInput::Auto { pi } => {
                let p = auto_point(*pi)?;
                if inside(p.m) {
                    vec![FrontierPoint::new(p.m, p.f, &label)]
                } else {
                    vec![]
                }
            }
            ModeInput::Points { points, .. } => points
                .iter()
                .filter(|(m, _)| inside(*m))
                .map(|&(m, f)| FrontierPoint::new(m, f, &label))
                .collect(),
        })
    }
}

/// Linear interpolation in a table sorted by `x`; `None` outside its span.
pub(crate) fn interpolate(table: &[(f64, f64)], x: f64) -> Option<f64> {
    let first = table.first()?;
    let last = table.last()?;
    if x < first.0 || x > last.0 {
        return None;
    }
    let hi = table.partition_point(|p| p.0 < x);
    if hi == 0 {
        return Some(first.1);
    }
    let (x0, y0) = table[hi - 1];
    let (x1, y1) = table[hi.min(table.len() - 1)];
    if x1 == x0 {
        return Some(y0.min(y1));
    }
    Some(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
}

/// Non-dominated subset of `points`, sorted by ascending `m`.
///
/// Of several identical points only the first in input order survives.
pub fn pareto_points(points: Vec<FrontierPoint>) -> Vec<FrontierPoint> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    // stable: equal (m, f) keep input order
    order.sort_by(|&a, &b| points[a].m.total_cmp(&points[b].m).then(points[a].f.total_cmp(&points[b].f)));
    let mut best = f64::INFINITY;
    let mut out = Vec::new();
    for idx in order {
        let p = &points[idx];
        if p.f < best {
            best = p.f;
            out.push(p.clone());
        }
    }
    out
}

/// Default fleet range for demand `pi`: `[1, 4 pi]`.
pub fn default_m_range(pi: f64) -> (f64, f64) {
    (1.0, 4.0 * pi)
}

/// Samples every input on a common grid of `samples` fleet sizes over
/// `m_range` and returns the non-dominated points.
pub fn pareto_frontier(
    inputs: &[ModeInput],
    m_range: (f64, f64),
    samples: usize,
) -> Result<Vec<FrontierPoint>> {
    if inputs.is_empty() {
        return Err(ModelError::Config("pareto frontier needs at least one input".into()));
    }
    if !(m_range.0 > 0.0 && m_range.1 > m_range.0) || samples < 2 {
        return Err(ModelError::Domain(format!(
            "bad fleet range {m_range:?} or sample count {samples}"
        )));
    }
    let ms = lin_space(m_range.0, m_range.1, samples);
    let mut all = Vec::new();
    for input in inputs {
        all.extend(input.sample(&ms, m_range)?);
    }
    Ok(pareto_points(all))
}

/// Maximal runs of one mode along a frontier sorted by `m`. Each niche ends
/// where the next one starts; the last ends at the frontier's largest `m`.
pub fn mode_niches(frontier: &[FrontierPoint]) -> Vec<Niche> {
    let mut niches: Vec<Niche> = Vec::new();
    for p in frontier {
        match niches.last_mut() {
            Some(n) if n.mode == p.mode => n.m_hi = p.m,
            _ => {
                if let Some(prev) = niches.last_mut() {
                    prev.m_hi = p.m;
                }
                niches.push(Niche { mode: p.mode.clone(), m_lo: p.m, m_hi: p.m });
            }
        }
    }
    niches
}

/// Total width of the niches held by `mode`.
pub fn niche_width(niches: &[Niche], mode: &str) -> f64 {
    niches.iter().filter(|n| n.mode == mode).map(Niche::width).sum()
}
