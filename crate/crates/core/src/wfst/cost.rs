use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

/// A tropical-semiring weight: a negative natural-log probability.
///
/// Along a path costs add; among alternative paths the minimum wins.
/// `Cost::INFINITY` is the semiring zero (an impossible event) and
/// `Cost::ZERO` is the semiring one (a certain event).
///
/// Individual arc costs may be negative inside compiled models (see
/// [`crate::morphology`]); complete path costs never are.
#[derive(Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Cost(f64);

impl Cost {
    pub const ZERO: Cost = Cost(0.0);
    pub const INFINITY: Cost = Cost(f64::INFINITY);

    /// Wraps a raw cost value. Panics on NaN.
    pub fn new(value: f64) -> Cost {
        assert!(!value.is_nan(), "cost must not be NaN");
        Cost(value)
    }

    /// `-ln(p)`; probability zero maps to infinity.
    pub fn from_probability(p: f64) -> Cost {
        assert!(
            (0.0..=1.0).contains(&p) || (p > 1.0 && p - 1.0 < 1e-12),
            "probability out of range: {p}"
        );
        if p <= 0.0 {
            Cost::INFINITY
        } else {
            Cost::new(-p.ln())
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn probability(self) -> f64 {
        (-self.0).exp()
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn is_infinite(self) -> bool {
        self.0 == f64::INFINITY
    }

    /// Semiring addition: the cheaper alternative.
    pub fn plus(self, other: Cost) -> Cost {
        if other.0 < self.0 {
            other
        } else {
            self
        }
    }

    /// Semiring multiplication: cost of the concatenated path.
    pub fn times(self, other: Cost) -> Cost {
        if self.is_infinite() || other.is_infinite() {
            Cost::INFINITY
        } else {
            Cost(self.0 + other.0)
        }
    }

    pub fn total_cmp(&self, other: &Cost) -> Ordering {
        self.0.total_cmp(&other.0)
    }

    pub fn approx_eq(self, other: Cost, tolerance: f64) -> bool {
        if self.is_infinite() || other.is_infinite() {
            return self.is_infinite() && other.is_infinite();
        }
        (self.0 - other.0).abs() <= tolerance
    }
}

impl Add for Cost {
    type Output = Cost;

    fn add(self, rhs: Cost) -> Cost {
        self.times(rhs)
    }
}

impl std::iter::Sum for Cost {
    fn sum<I: Iterator<Item = Cost>>(iter: I) -> Cost {
        iter.fold(Cost::ZERO, Cost::times)
    }
}

impl From<f64> for Cost {
    fn from(v: f64) -> Cost {
        Cost::new(v)
    }
}

impl fmt::Debug for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cost({})", self.0)
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else if let Some(p) = f.precision() {
            write!(f, "{:.*}", p, self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identities() {
        let c = Cost::new(3.5);
        assert_eq!(c.plus(Cost::INFINITY), c);
        assert_eq!(Cost::INFINITY.plus(c), c);
        assert_eq!(c.times(Cost::ZERO), c);
        assert!(c.times(Cost::INFINITY).is_infinite());
        assert!(Cost::new(-2.0).times(Cost::INFINITY).is_infinite());
    }

    #[test]
    fn probability_round_trip() {
        assert_eq!(Cost::from_probability(1.0), Cost::ZERO);
        assert!(Cost::from_probability(0.0).is_infinite());
        assert!((Cost::from_probability(0.001).value() - 6.907755278982137).abs() < 1e-12);
        assert!((Cost::new(5.98).probability() - 2.528826e-3).abs() < 1e-9);
    }

    #[test]
    #[should_panic]
    fn nan_rejected() {
        let _ = Cost::new(f64::NAN);
    }
}
