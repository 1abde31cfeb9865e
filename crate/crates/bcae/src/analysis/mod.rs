//! Interpretation of trained models: constellation geometry, per-user power
//! decomposition, labeling verdicts, Monte-Carlo error rates, and the
//! classical superposition-coding baseline with its analytic oracle.

pub mod baseline;
pub mod report;
pub mod ser;
pub mod sweep;

pub use baseline::{baseline_ser_monte_carlo, baseline_ser_oracle, baseline_superposition};
pub use report::{constellation_from_csv, constellation_to_csv, AnalysisReport};
pub use ser::{estimate_ser, SerEstimate};
pub use sweep::{power_inversion_sweep, SweepConfig, SweepPoint, SweepTable};

use crate::autoencoder::{forward_system, TrainedModel};
use crate::error::{Error, Result};

/// Gap threshold when counting visually distinct points of a unit-power
/// constellation.
pub const DISTINCT_POINT_TOL: f64 = 0.05;

/// Deterministic map from every message pair to its transmitted symbol,
/// extracted noiselessly with normalization taken over the full uniform
/// message ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    m1: usize,
    m2: usize,
    /// Symbol for `(s1, s2)` at index `s1 * m2 + s2`.
    points: Vec<f64>,
}

impl Constellation {
    pub fn new(m1: usize, m2: usize, points: Vec<f64>) -> Result<Self> {
        if m1 < 1 || m2 < 1 || points.len() != m1 * m2 {
            return Err(Error::Input(format!(
                "expected {m1} x {m2} = {} points, got {}",
                m1 * m2,
                points.len()
            )));
        }
        if !points.iter().all(|v| v.is_finite()) {
            return Err(Error::Input("constellation points must be finite".into()));
        }
        Ok(Constellation { m1, m2, points })
    }

    #[inline]
    pub fn m1(&self) -> usize {
        self.m1
    }

    #[inline]
    pub fn m2(&self) -> usize {
        self.m2
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn x(&self, s1: usize, s2: usize) -> f64 {
        self.points[s1 * self.m2 + s2]
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Iterates `(s1, s2, x)` in message order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.points
            .iter()
            .enumerate()
            .map(|(i, &x)| (i / self.m2, i % self.m2, x))
    }

    pub fn mean_square(&self) -> f64 {
        self.points.iter().map(|v| v * v).sum::<f64>() / self.points.len() as f64
    }

    /// Points sorted by position with labels attached, ties broken by
    /// message order so verdicts are deterministic.
    fn sorted_points(&self) -> Vec<(f64, usize, usize)> {
        let mut pts: Vec<(f64, usize, usize)> = self.iter().map(|(a, b, x)| (x, a, b)).collect();
        pts.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)).then(p.2.cmp(&q.2)));
        pts
    }

    /// Number of clusters separated by gaps larger than `tol`.
    pub fn distinct_points(&self, tol: f64) -> usize {
        let pts = self.sorted_points();
        let mut count = 1;
        for w in pts.windows(2) {
            if w[1].0 - w[0].0 > tol {
                count += 1;
            }
        }
        count
    }
}

/// Orthogonal power decomposition of a constellation.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSplit {
    /// Power of the user-1 component (per-`s1` means, DC removed).
    pub p1: f64,
    /// Power of the user-2 residual component.
    pub p2: f64,
    /// Global mean of the constellation (carries no user information).
    pub dc_offset: f64,
    /// `10 log10(p1 / p2)`, with signed infinities for one-sided splits and
    /// an explicit degenerate marker when both components vanish.
    pub ratio_db: RatioDb,
}

impl PowerSplit {
    /// Fraction of the informative power assigned to user 1.
    pub fn fraction_user1(&self) -> f64 {
        self.p1 / (self.p1 + self.p2)
    }
}

/// Power ratio in dB, closed under the degenerate cases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RatioDb {
    Finite(f64),
    PosInf,
    NegInf,
    /// Both components are zero (all points identical).
    Undefined,
}

impl RatioDb {
    /// Collapses to f64 for arithmetic; `Undefined` maps to NaN.
    pub fn as_f64(self) -> f64 {
        match self {
            RatioDb::Finite(v) => v,
            RatioDb::PosInf => f64::INFINITY,
            RatioDb::NegInf => f64::NEG_INFINITY,
            RatioDb::Undefined => f64::NAN,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, RatioDb::Finite(_))
    }
}

impl std::fmt::Display for RatioDb {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RatioDb::Finite(v) => write!(f, "{v}"),
            RatioDb::PosInf => write!(f, "inf"),
            RatioDb::NegInf => write!(f, "-inf"),
            RatioDb::Undefined => write!(f, "undefined"),
        }
    }
}

/// Evaluates the encoder on all `M` one-hot messages in a single batch (so
/// the normalizer sees the uniform-ensemble power), noise disabled.
pub fn extract_constellation(model: &TrainedModel) -> Result<Constellation> {
    let m1 = model.arch.m1();
    let m2 = model.arch.m2();
    let mut s1 = Vec::with_capacity(m1 * m2);
    let mut s2 = Vec::with_capacity(m1 * m2);
    for a in 0..m1 {
        for b in 0..m2 {
            s1.push(a);
            s2.push(b);
        }
    }
    let out = forward_system(model, &s1, &s2, None)?;
    Constellation::new(m1, m2, out.x.row(0).to_vec())
}

/// Splits the constellation power into a user-1 part (per-`s1` conditional
/// means, DC removed), a user-2 residual, and the DC offset:
///
/// - `u1(s1) = mean_{s2} x(s1, s2) - mean x`
/// - `u2(s1, s2) = x(s1, s2) - mean x - u1(s1)`
/// - `p1 = mean u1^2`, `p2 = mean u2^2`
///
/// The components are orthogonal by construction, so
/// `p1 + p2 + dc^2 = mean x^2` holds as an algebraic identity. On an exact
/// superposition constellation `(p1, p2)` coincide with the constituent
/// powers.
pub fn power_decomposition(c: &Constellation) -> PowerSplit {
    let m1 = c.m1();
    let m2 = c.m2();
    let total = (m1 * m2) as f64;
    let dc = c.points().iter().sum::<f64>() / total;

    let mut u1 = vec![0.0; m1];
    for a in 0..m1 {
        let row_mean = (0..m2).map(|b| c.x(a, b)).sum::<f64>() / m2 as f64;
        u1[a] = row_mean - dc;
    }
    let p1 = u1.iter().map(|v| v * v).sum::<f64>() / m1 as f64;

    let mut p2 = 0.0;
    for a in 0..m1 {
        for b in 0..m2 {
            let r = c.x(a, b) - dc - u1[a];
            p2 += r * r;
        }
    }
    p2 /= total;

    let ratio_db = if p1 == 0.0 && p2 == 0.0 {
        RatioDb::Undefined
    } else if p2 < 1e-12 * p1 {
        RatioDb::PosInf
    } else if p1 < 1e-12 * p2 {
        RatioDb::NegInf
    } else {
        RatioDb::Finite(10.0 * (p1 / p2).log10())
    };

    PowerSplit {
        p1,
        p2,
        dc_offset: dc,
        ratio_db,
    }
}

/// True when one axis threshold set separates the user-1 messages: sorted by
/// position, the `s1` labels form one contiguous block per label. This
/// generalizes sign coding and is invariant to label permutation.
pub fn user1_label_separable(c: &Constellation) -> bool {
    let pts = c.sorted_points();
    let mut seen = vec![false; c.m1()];
    let mut runs = 0;
    let mut prev = usize::MAX;
    for &(_, s1, _) in &pts {
        if s1 != prev {
            if seen[s1] {
                return false; // label reappears after a different label
            }
            seen[s1] = true;
            runs += 1;
            prev = s1;
        }
    }
    runs == c.m1()
}

/// True when, sorted by position, every adjacent pair of points carries
/// user-2 labels within Hamming distance 1 (identical labels allowed, which
/// covers the mirrored center pair of learned constellations).
pub fn detect_gray_user2(c: &Constellation) -> bool {
    let pts = c.sorted_points();
    pts.windows(2)
        .all(|w| (w[0].2 ^ w[1].2).count_ones() <= 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constellation(m1: usize, m2: usize, pts: &[f64]) -> Constellation {
        Constellation::new(m1, m2, pts.to_vec()).unwrap()
    }

    #[test]
    fn equal_spacing_decomposes_to_six_db() {
        let c_amp = 0.8f64.sqrt();
        let pts = [-1.5 * c_amp, -0.5 * c_amp, 0.5 * c_amp, 1.5 * c_amp];
        let c = constellation(2, 2, &pts);
        assert!((c.mean_square() - 1.0).abs() < 1e-12);
        let split = power_decomposition(&c);
        match split.ratio_db {
            RatioDb::Finite(db) => assert!((db - 6.020599913279624).abs() < 1e-9),
            other => panic!("expected finite ratio, got {other:?}"),
        }
        assert!((split.p1 - 0.8).abs() < 1e-12);
        assert!((split.p2 - 0.2).abs() < 1e-12);
        assert!(split.dc_offset.abs() < 1e-15);
    }

    #[test]
    fn identical_points_are_degenerate() {
        let c = constellation(2, 2, &[0.3, 0.3, 0.3, 0.3]);
        let split = power_decomposition(&c);
        assert_eq!(split.p1, 0.0);
        assert_eq!(split.p2, 0.0);
        assert_eq!(split.ratio_db, RatioDb::Undefined);
        assert!((split.dc_offset - 0.3).abs() < 1e-15);
    }

    #[test]
    fn user2_independent_points_put_all_power_on_user1() {
        // x depends only on s1.
        let c = constellation(2, 2, &[-1.0, -1.0, 1.0, 1.0]);
        let split = power_decomposition(&c);
        assert_eq!(split.p2, 0.0);
        assert_eq!(split.ratio_db, RatioDb::PosInf);
        assert_eq!(split.fraction_user1(), 1.0);
    }

    #[test]
    fn decomposition_identity_holds() {
        // p1 + p2 + dc^2 == mean square, to rounding.
        let pts = [0.7, -1.1, 0.25, 2.0, -0.4, 0.9];
        let c = constellation(2, 3, &pts);
        let split = power_decomposition(&c);
        let identity = split.p1 + split.p2 + split.dc_offset * split.dc_offset;
        assert!((identity - c.mean_square()).abs() < 1e-12);
    }

    #[test]
    fn separability_verdicts() {
        // Sorted s1 labels [0, 0, 1, 1].
        let c = constellation(2, 2, &[-1.0, -0.5, 0.5, 1.0]);
        assert!(user1_label_separable(&c));

        // Sorted s1 labels [0, 1, 0, 1].
        let c = constellation(2, 2, &[-1.0, 0.5, -0.5, 1.0]);
        assert!(!user1_label_separable(&c));
    }

    #[test]
    fn gray_verdicts() {
        // Sorted s2 labels [1, 0, 0, 1]: mirrored center pair, still Gray.
        let c = constellation(2, 2, &[-0.5, -1.5, 1.5, 0.5]);
        assert!(detect_gray_user2(&c));

        // k2 = 2: sorted s2 labels [0, 1, 3, 2] (00, 01, 11, 10).
        let c = constellation(1, 4, &[-1.5, -0.5, 1.5, 0.5]);
        assert!(detect_gray_user2(&c));

        // Natural binary [0, 1, 2, 3] has the two-bit step 01 -> 10.
        let c = constellation(1, 4, &[-1.5, -0.5, 0.5, 1.5]);
        assert!(!detect_gray_user2(&c));
    }

    #[test]
    fn distinct_point_counting() {
        let c = constellation(2, 2, &[-1.0, -0.99, 0.5, 1.0]);
        assert_eq!(c.distinct_points(0.05), 3);
        assert_eq!(c.distinct_points(0.001), 4);
    }

    #[test]
    fn verdicts_invariant_under_sign_flip() {
        let pts = [-1.3, -0.4, 0.4, 1.3];
        let c = constellation(2, 2, &pts);
        let flipped = constellation(2, 2, &pts.map(|v| -v));
        assert_eq!(user1_label_separable(&c), user1_label_separable(&flipped));
        assert_eq!(detect_gray_user2(&c), detect_gray_user2(&flipped));
        let a = power_decomposition(&c);
        let b = power_decomposition(&flipped);
        assert!((a.p1 - b.p1).abs() < 1e-15);
        assert!((a.p2 - b.p2).abs() < 1e-15);
    }
}
