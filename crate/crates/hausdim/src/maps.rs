//! Contraction families and problem descriptions.
//!
//! Two one-dimensional families act on the unit interval: Möbius digit maps
//! `x -> 1/(x + m)` for a positive integer digit `m`, and a two-branch
//! nonlinear perturbation of the middle-thirds Cantor construction. The
//! two-dimensional family consists of complex Möbius maps `z -> 1/(z + b)`
//! with a Gaussian-integer digit `b`, `Re b >= 1`, acting on the half-disk
//! `|z - 1/2| <= 1/2`.
//!
//! All map values are plain `Copy` data and evaluation is pure, so maps can
//! be shared across assembly threads without synchronization.

use num_complex::Complex64;
use thiserror::Error;

/// Exponent of the nonlinear term in the perturbed Cantor family.
const PERTURBATION_EXPONENT: f64 = 3.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MapError {
    #[error("point x = {x} is outside the unit interval")]
    OutsideUnitInterval { x: f64 },
    #[error("continued-fraction digit must be a positive integer")]
    ZeroDigit,
    #[error("branch index {branch} is invalid; the perturbed family has branches 1 and 2")]
    InvalidBranch { branch: u8 },
    #[error("perturbation parameter lambda = {lambda} is outside [0, 1]")]
    LambdaOutOfRange { lambda: f64 },
    #[error("weight exponent s = {s} must be nonnegative")]
    NegativeExponent { s: f64 },
    #[error("digit {m}{n:+}i has real part below 1")]
    RealPartBelowOne { m: i64, n: i64 },
    #[error("digit {m}{n:+}i appears more than once")]
    DuplicateDigit { m: i64, n: i64 },
    #[error("digit set is empty")]
    EmptyDigitSet,
    #[error("truncation radius {radius} cannot cover an infinite digit set; a radius above 2 is required")]
    TruncationRadiusTooSmall { radius: f64 },
    #[error("truncation radius {radius} must be positive and finite")]
    InvalidTruncationRadius { radius: f64 },
    #[error("continued-fraction digit list must be nonempty with distinct positive entries")]
    InvalidDigitList,
}

/// One branch of a contraction family on `[0, 1]`.
///
/// Every branch maps the unit interval strictly into itself and has a
/// derivative of constant sign, so `|theta'|^s` is well defined for any
/// `s >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContractionMap1D {
    /// `x -> 1/(x + m)` for a positive integer digit `m`.
    MoebiusDigit { m: u32 },
    /// Branch of the perturbed Cantor family with parameter `lambda`.
    ///
    /// Branch 1 is `x -> (x + lambda x^{7/2}) / (3 + 2 lambda)`; branch 2 is
    /// branch 1 shifted right by `(2 + lambda) / (3 + 2 lambda)`. At
    /// `lambda = 0` the pair generates the middle-thirds Cantor set.
    PerturbedCantor { branch: u8, lambda: f64 },
}

impl ContractionMap1D {
    pub fn moebius(m: u32) -> Result<Self, MapError> {
        if m == 0 {
            return Err(MapError::ZeroDigit);
        }
        Ok(ContractionMap1D::MoebiusDigit { m })
    }

    pub fn perturbed(branch: u8, lambda: f64) -> Result<Self, MapError> {
        if branch != 1 && branch != 2 {
            return Err(MapError::InvalidBranch { branch });
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(MapError::LambdaOutOfRange { lambda });
        }
        Ok(ContractionMap1D::PerturbedCantor { branch, lambda })
    }

    fn check_params(&self) -> Result<(), MapError> {
        match *self {
            ContractionMap1D::MoebiusDigit { m } => {
                if m == 0 {
                    return Err(MapError::ZeroDigit);
                }
            }
            ContractionMap1D::PerturbedCantor { branch, lambda } => {
                if branch != 1 && branch != 2 {
                    return Err(MapError::InvalidBranch { branch });
                }
                if !(0.0..=1.0).contains(&lambda) {
                    return Err(MapError::LambdaOutOfRange { lambda });
                }
            }
        }
        Ok(())
    }

    fn check_point(x: f64) -> Result<(), MapError> {
        // The negated comparison also rejects NaN.
        if !(0.0..=1.0).contains(&x) {
            return Err(MapError::OutsideUnitInterval { x });
        }
        Ok(())
    }

    /// Evaluates the branch at `x` in `[0, 1]`.
    pub fn eval(&self, x: f64) -> Result<f64, MapError> {
        self.check_params()?;
        Self::check_point(x)?;
        Ok(match *self {
            ContractionMap1D::MoebiusDigit { m } => 1.0 / (x + f64::from(m)),
            ContractionMap1D::PerturbedCantor { branch, lambda } => {
                let base = (x + lambda * x.powf(PERTURBATION_EXPONENT)) / (3.0 + 2.0 * lambda);
                if branch == 1 {
                    base
                } else {
                    base + (2.0 + lambda) / (3.0 + 2.0 * lambda)
                }
            }
        })
    }

    /// Absolute value of the branch derivative at `x`.
    pub fn derivative_magnitude(&self, x: f64) -> Result<f64, MapError> {
        self.check_params()?;
        Self::check_point(x)?;
        Ok(match *self {
            ContractionMap1D::MoebiusDigit { m } => {
                let d = x + f64::from(m);
                1.0 / (d * d)
            }
            ContractionMap1D::PerturbedCantor { lambda, .. } => {
                (1.0 + PERTURBATION_EXPONENT * lambda * x.powf(PERTURBATION_EXPONENT - 1.0))
                    / (3.0 + 2.0 * lambda)
            }
        })
    }

    /// Transfer-operator weight `|theta'(x)|^s`.
    pub fn weight(&self, x: f64, s: f64) -> Result<f64, MapError> {
        self.check_params()?;
        Self::check_point(x)?;
        if !(s >= 0.0) {
            return Err(MapError::NegativeExponent { s });
        }
        Ok(match *self {
            ContractionMap1D::MoebiusDigit { m } => (x + f64::from(m)).powf(-2.0 * s),
            ContractionMap1D::PerturbedCantor { lambda, .. } => ((1.0
                + PERTURBATION_EXPONENT * lambda * x.powf(PERTURBATION_EXPONENT - 1.0))
                / (3.0 + 2.0 * lambda))
                .powf(s),
        })
    }
}

/// Complex Möbius digit map `z -> 1/(z + b)` with `Re b >= 1`.
///
/// For such digits the closed half-disk `|z - 1/2| <= 1/2` is mapped into
/// the full disk `|z - 1/2| <= 1/2` reflected images included, so the
/// half-disk absorbs every orbit after folding across the real axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoebiusMap2D {
    b: Complex64,
}

impl MoebiusMap2D {
    pub fn new(b: Complex64) -> Result<Self, MapError> {
        if !(b.re >= 1.0) || !b.im.is_finite() {
            return Err(MapError::RealPartBelowOne {
                m: b.re as i64,
                n: b.im as i64,
            });
        }
        Ok(MoebiusMap2D { b })
    }

    pub fn from_lattice(m: i64, n: i64) -> Result<Self, MapError> {
        if m < 1 {
            return Err(MapError::RealPartBelowOne { m, n });
        }
        Ok(MoebiusMap2D {
            b: Complex64::new(m as f64, n as f64),
        })
    }

    pub fn digit(&self) -> Complex64 {
        self.b
    }

    /// Evaluates `1/(z + b)`.
    ///
    /// `z + b` cannot vanish for `z` in the half-disk because `Re b >= 1`;
    /// a zero denominator therefore indicates a corrupted digit and aborts.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let d = z + self.b;
        assert!(
            d.norm_sqr() > 0.0,
            "map denominator vanished at z = {z}, b = {}",
            self.b
        );
        d.inv()
    }

    /// Conformal weight `|z + b|^{-2s} = |theta'(z)|^s`.
    pub fn weight(&self, z: Complex64, s: f64) -> f64 {
        (z + self.b).norm_sqr().powf(-s)
    }
}

/// Digit alphabet for complex continued fractions.
#[derive(Debug, Clone, PartialEq)]
pub enum DigitSetKind {
    /// A finite, explicitly listed set of Gaussian integers `(m, n) = m + ni`.
    Explicit(Vec<(i64, i64)>),
    /// All Gaussian integers with `m >= 1`.
    I1,
    /// Gaussian integers with `m >= 1`, `n >= 0`.
    I2,
    /// The ten digits `{1, 2} + {-2..2}i`.
    I3,
}

/// Digit alphabet together with the truncation radius used for infinite
/// alphabets. Finite alphabets ignore the radius.
#[derive(Debug, Clone, PartialEq)]
pub struct DigitSetSpec {
    pub kind: DigitSetKind,
    pub truncation_radius: f64,
}

impl DigitSetSpec {
    pub fn new(kind: DigitSetKind, truncation_radius: f64) -> Result<Self, MapError> {
        let spec = DigitSetSpec {
            kind,
            truncation_radius,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<(), MapError> {
        if !self.truncation_radius.is_finite() || self.truncation_radius <= 0.0 {
            return Err(MapError::InvalidTruncationRadius {
                radius: self.truncation_radius,
            });
        }
        if self.is_infinite() && self.truncation_radius <= 2.0 {
            return Err(MapError::TruncationRadiusTooSmall {
                radius: self.truncation_radius,
            });
        }
        if let DigitSetKind::Explicit(digits) = &self.kind {
            if digits.is_empty() {
                return Err(MapError::EmptyDigitSet);
            }
            let mut seen = digits.clone();
            seen.sort_unstable();
            for pair in seen.windows(2) {
                if pair[0] == pair[1] {
                    return Err(MapError::DuplicateDigit {
                        m: pair[0].0,
                        n: pair[0].1,
                    });
                }
            }
            for &(m, n) in digits {
                if m < 1 {
                    return Err(MapError::RealPartBelowOne { m, n });
                }
            }
        }
        Ok(())
    }

    /// Whether the alphabet has infinitely many digits before truncation.
    pub fn is_infinite(&self) -> bool {
        matches!(self.kind, DigitSetKind::I1 | DigitSetKind::I2)
    }

    /// Lists the digits inside the truncation disk `|b| <= radius`, sorted
    /// lexicographically by `(m, n)`. Finite alphabets are returned in full.
    pub fn enumerate(&self) -> Result<Vec<(i64, i64)>, MapError> {
        self.validate()?;
        let digits = match &self.kind {
            DigitSetKind::Explicit(list) => {
                let mut out = list.clone();
                out.sort_unstable();
                out
            }
            DigitSetKind::I3 => {
                let mut out = Vec::with_capacity(10);
                for m in 1..=2 {
                    for n in -2..=2 {
                        out.push((m, n));
                    }
                }
                out
            }
            DigitSetKind::I1 | DigitSetKind::I2 => {
                let r = self.truncation_radius;
                let r_sq = r * r;
                let m_max = r.floor() as i64;
                let mut out = Vec::new();
                for m in 1..=m_max {
                    let n_max = (r_sq - (m * m) as f64).max(0.0).sqrt().floor() as i64;
                    let n_min = if matches!(self.kind, DigitSetKind::I2) {
                        0
                    } else {
                        -n_max
                    };
                    for n in n_min..=n_max {
                        if ((m * m + n * n) as f64) <= r_sq {
                            out.push((m, n));
                        }
                    }
                }
                out
            }
        };
        if digits.is_empty() {
            return Err(MapError::EmptyDigitSet);
        }
        Ok(digits)
    }
}

/// A dimension problem the solver can bracket.
///
/// The variants fix the ambient dimension, the contraction family, and the
/// contraction parameter `gamma` (the minimum digit, or the lower bound on
/// `Re b`). `s_domain_hint` seeds the root search and carries no
/// correctness weight; the solver verifies and, if needed, expands it.
#[derive(Debug, Clone, PartialEq)]
pub enum IfsProblem {
    Interval {
        maps: Vec<ContractionMap1D>,
        gamma: f64,
        domain: Vec<(f64, f64)>,
        s_domain_hint: (f64, f64),
    },
    HalfDisk {
        digits: DigitSetSpec,
        s_domain_hint: (f64, f64),
    },
}

impl IfsProblem {
    /// Continued-fraction set with the given finite digit alphabet.
    pub fn continued_fraction(digits: &[u32]) -> Result<Self, MapError> {
        if digits.is_empty() {
            return Err(MapError::InvalidDigitList);
        }
        let mut sorted = digits.to_vec();
        sorted.sort_unstable();
        if sorted[0] == 0 || sorted.windows(2).any(|p| p[0] == p[1]) {
            return Err(MapError::InvalidDigitList);
        }
        let maps = digits
            .iter()
            .map(|&m| ContractionMap1D::moebius(m))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(IfsProblem::Interval {
            maps,
            gamma: f64::from(sorted[0]),
            domain: vec![(0.0, 1.0)],
            s_domain_hint: (0.02, 0.98),
        })
    }

    /// Two-branch perturbed Cantor problem with parameter `lambda`.
    pub fn perturbed(lambda: f64) -> Result<Self, MapError> {
        let maps = vec![
            ContractionMap1D::perturbed(1, lambda)?,
            ContractionMap1D::perturbed(2, lambda)?,
        ];
        Ok(IfsProblem::Interval {
            maps,
            gamma: 1.0,
            domain: vec![(0.0, 1.0)],
            s_domain_hint: (0.5, 0.9),
        })
    }

    /// Complex continued-fraction problem over the given digit alphabet.
    pub fn complex_set(digits: DigitSetSpec) -> Result<Self, MapError> {
        digits.validate()?;
        let s_domain_hint = match digits.kind {
            DigitSetKind::I1 => (1.6, 2.1),
            DigitSetKind::I2 => (1.4, 1.9),
            DigitSetKind::I3 => (1.3, 1.7),
            DigitSetKind::Explicit(_) => (1.2, 2.0),
        };
        Ok(IfsProblem::HalfDisk {
            digits,
            s_domain_hint,
        })
    }

    pub fn dimension(&self) -> usize {
        match self {
            IfsProblem::Interval { .. } => 1,
            IfsProblem::HalfDisk { .. } => 2,
        }
    }

    pub fn gamma(&self) -> f64 {
        match self {
            IfsProblem::Interval { gamma, .. } => *gamma,
            IfsProblem::HalfDisk { .. } => 1.0,
        }
    }

    pub fn s_domain_hint(&self) -> (f64, f64) {
        match self {
            IfsProblem::Interval { s_domain_hint, .. } => *s_domain_hint,
            IfsProblem::HalfDisk { s_domain_hint, .. } => *s_domain_hint,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moebius_eval_matches_closed_form() {
        let map = ContractionMap1D::moebius(1).unwrap();
        assert_eq!(map.eval(0.0).unwrap(), 1.0);
        assert_eq!(map.eval(1.0).unwrap(), 0.5);
        let map = ContractionMap1D::moebius(3).unwrap();
        assert!((map.eval(0.5).unwrap() - 2.0 / 7.0).abs() < 1e-16);
    }

    #[test]
    fn perturbed_eval_matches_closed_form() {
        let b1 = ContractionMap1D::perturbed(1, 0.0).unwrap();
        assert!((b1.eval(0.6).unwrap() - 0.2).abs() < 1e-16);
        let b2 = ContractionMap1D::perturbed(2, 1.0).unwrap();
        assert!((b2.eval(0.0).unwrap() - 3.0 / 5.0).abs() < 1e-16);
    }

    #[test]
    fn weights_match_closed_form() {
        let m1 = ContractionMap1D::moebius(1).unwrap();
        assert_eq!(m1.weight(0.0, 1.0).unwrap(), 1.0);
        let m2 = ContractionMap1D::moebius(2).unwrap();
        assert!((m2.weight(0.0, 0.5).unwrap() - 0.5).abs() < 1e-16);
        let p = ContractionMap1D::perturbed(1, 0.0).unwrap();
        assert!((p.weight(0.37, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn eval_rejects_points_outside_unit_interval() {
        let map = ContractionMap1D::moebius(1).unwrap();
        assert!(matches!(
            map.eval(-0.1),
            Err(MapError::OutsideUnitInterval { .. })
        ));
        assert!(matches!(
            map.eval(1.5),
            Err(MapError::OutsideUnitInterval { .. })
        ));
        assert!(map.eval(f64::NAN).is_err());
    }

    #[test]
    fn constructor_validation() {
        assert!(matches!(
            ContractionMap1D::moebius(0),
            Err(MapError::ZeroDigit)
        ));
        assert!(matches!(
            ContractionMap1D::perturbed(3, 0.5),
            Err(MapError::InvalidBranch { branch: 3 })
        ));
        assert!(matches!(
            ContractionMap1D::perturbed(1, 1.5),
            Err(MapError::LambdaOutOfRange { .. })
        ));
    }

    #[test]
    fn complex_eval_matches_closed_form() {
        let unit = MoebiusMap2D::from_lattice(1, 0).unwrap();
        assert_eq!(
            unit.eval(Complex64::new(0.0, 0.0)),
            Complex64::new(1.0, 0.0)
        );

        let diag = MoebiusMap2D::from_lattice(1, 1).unwrap();
        let w = diag.eval(Complex64::new(0.0, 0.0));
        assert!((w - Complex64::new(0.5, -0.5)).norm() < 1e-16);

        let two = MoebiusMap2D::from_lattice(2, 0).unwrap();
        let w = two.eval(Complex64::new(1.0, 0.0));
        assert!((w.re - 1.0 / 3.0).abs() < 1e-16 && w.im == 0.0);
    }

    #[test]
    fn complex_digit_must_have_real_part_at_least_one() {
        assert!(MoebiusMap2D::from_lattice(0, 3).is_err());
        assert!(MoebiusMap2D::new(Complex64::new(0.5, 0.0)).is_err());
    }

    #[test]
    fn enumerate_infinite_sets_at_small_radius() {
        // Radius 2 is legal only through a direct literal; the constructor
        // rejects it for infinite alphabets.
        let spec = DigitSetSpec {
            kind: DigitSetKind::I1,
            truncation_radius: 2.0,
        };
        assert!(matches!(
            spec.enumerate(),
            Err(MapError::TruncationRadiusTooSmall { .. })
        ));
        assert!(DigitSetSpec::new(DigitSetKind::I1, 2.0).is_err());
    }

    #[test]
    fn enumerate_counts_on_small_disks() {
        // Membership uses |b| <= R with the boundary included, so radius
        // 2 + eps picks up (2, 0) and the diagonal digits.
        let spec = DigitSetSpec::new(DigitSetKind::I1, 2.000001).unwrap();
        let digits = spec.enumerate().unwrap();
        assert_eq!(digits, vec![(1, -1), (1, 0), (1, 1), (2, 0)]);

        let spec = DigitSetSpec::new(DigitSetKind::I2, 2.000001).unwrap();
        let digits = spec.enumerate().unwrap();
        assert_eq!(digits, vec![(1, 0), (1, 1), (2, 0)]);
    }

    #[test]
    fn enumerate_i3_ignores_radius() {
        for radius in [0.5, 2.0, 300.0] {
            let spec = DigitSetSpec {
                kind: DigitSetKind::I3,
                truncation_radius: radius,
            };
            let digits = spec.enumerate().unwrap();
            assert_eq!(digits.len(), 10);
            assert_eq!(digits[0], (1, -2));
            assert_eq!(digits[9], (2, 2));
            let mut sorted = digits.clone();
            sorted.sort_unstable();
            assert_eq!(sorted, digits);
        }
    }

    #[test]
    fn enumerate_is_lexicographic_and_duplicate_free() {
        let spec = DigitSetSpec::new(DigitSetKind::I1, 10.0).unwrap();
        let digits = spec.enumerate().unwrap();
        let mut sorted = digits.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted, digits);
        assert!(digits.iter().all(|&(m, n)| m >= 1 && m * m + n * n <= 100));
    }

    #[test]
    fn problem_constructors_validate_digit_lists() {
        assert!(IfsProblem::continued_fraction(&[]).is_err());
        assert!(IfsProblem::continued_fraction(&[1, 1]).is_err());
        assert!(IfsProblem::continued_fraction(&[0, 2]).is_err());
        let p = IfsProblem::continued_fraction(&[2, 5, 3]).unwrap();
        assert_eq!(p.gamma(), 2.0);
        assert_eq!(p.dimension(), 1);
    }
}
