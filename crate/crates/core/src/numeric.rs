/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    pub const ZERO: Self = Self { sum: 0.0, carry: 0.0 };

    pub fn new(value: f64) -> Self {
        Self { sum: value, carry: 0.0 }
    }

    #[inline]
    pub fn add(mut self, value: f64) -> Self {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.carry += (self.sum - t) + value;
        } else {
            self.carry += (value - t) + self.sum;
        }
        self.sum = t;
        self
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.sum + self.carry
    }
}

impl std::iter::Sum<f64> for Compensated {
    fn sum<I: Iterator<Item = f64>>(iter: I) -> Self {
        iter.fold(Self::ZERO, Self::add)
    }
}

pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().sum::<Compensated>().value()
}

/// `|a − b| ≤ tol·max(1, |a|, |b|)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}
