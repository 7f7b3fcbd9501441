//! Compactly supported C^2 test functions with analytic derivatives.

use serde::{Deserialize, Serialize};

/// Quintic smoothstep 6s^5 - 15s^4 + 10s^3 and its first two derivatives.
fn smoothstep(s: f64) -> (f64, f64, f64) {
    if s <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if s >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let s2 = s * s;
    (
        s2 * s * (10.0 - 15.0 * s + 6.0 * s2),
        30.0 * s2 * (1.0 - s) * (1.0 - s),
        60.0 * s * (1.0 - s) * (1.0 - 2.0 * s),
    )
}

/// Even cutoff equal to 1 on |y| <= inner and 0 on |y| >= outer, with
/// derivatives in y.
fn cutoff(y: f64, inner: f64, outer: f64) -> (f64, f64, f64) {
    let w = outer - inner;
    let (s, ds, dds) = smoothstep((y.abs() - inner) / w);
    let sign = if y < 0.0 { -1.0 } else { 1.0 };
    (1.0 - s, -sign * ds / w, -dds / (w * w))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TestFunction {
    /// exp(-(x-c)^2 / 2w^2), cut off smoothly between 4w and 5w.
    GaussianBump { center: f64, width: f64 },
    /// x - c on |x - c| <= l, tapered to zero on [l, 2l].
    TruncatedLinear { center: f64, half_width: f64 },
    Constant { value: f64 },
}

impl TestFunction {
    pub fn bump(center: f64, width: f64) -> Self {
        Self::GaussianBump { center, width }
    }

    /// phi, phi', phi''.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        match *self {
            Self::GaussianBump { center, width } => {
                let y = (x - center) / width;
                if y.abs() >= 5.0 {
                    return (0.0, 0.0, 0.0);
                }
                let e = (-0.5 * y * y).exp();
                let (c, dc, ddc) = cutoff(y, 4.0, 5.0);
                let v = e * c;
                let d1 = e * (dc - y * c);
                let d2 = e * ((y * y - 1.0) * c - 2.0 * y * dc + ddc);
                (v, d1 / width, d2 / (width * width))
            }
            Self::TruncatedLinear { center, half_width } => {
                let y = x - center;
                let (c, dc, ddc) = cutoff(y / half_width, 1.0, 2.0);
                let dc = dc / half_width;
                let ddc = ddc / (half_width * half_width);
                (y * c, c + y * dc, 2.0 * dc + y * ddc)
            }
            Self::Constant { value } => (value, 0.0, 0.0),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval(x).0
    }

    /// Closed support interval, `None` for the constant.
    pub fn support(&self) -> Option<(f64, f64)> {
        match *self {
            Self::GaussianBump { center, width } => Some((center - 5.0 * width, center + 5.0 * width)),
            Self::TruncatedLinear { center, half_width } => {
                Some((center - 2.0 * half_width, center + 2.0 * half_width))
            }
            Self::Constant { .. } => None,
        }
    }

    /// Points where the second derivative has kinks.
    pub fn breakpoints(&self) -> Vec<f64> {
        match *self {
            Self::GaussianBump { center, width } => vec![
                center - 5.0 * width,
                center - 4.0 * width,
                center + 4.0 * width,
                center + 5.0 * width,
            ],
            Self::TruncatedLinear { center, half_width } => vec![
                center - 2.0 * half_width,
                center - half_width,
                center + half_width,
                center + 2.0 * half_width,
            ],
            Self::Constant { .. } => Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_derivatives(f: TestFunction, xs: &[f64]) {
        let h = 1e-5;
        for &x in xs {
            let (_, d1, d2) = f.eval(x);
            let fd1 = (f.value(x + h) - f.value(x - h)) / (2.0 * h);
            let fd2 = (f.eval(x + h).1 - f.eval(x - h).1) / (2.0 * h);
            assert!((d1 - fd1).abs() < 1e-7, "{f:?} at {x}: {d1} vs {fd1}");
            assert!((d2 - fd2).abs() < 1e-6, "{f:?} at {x}: {d2} vs {fd2}");
        }
    }

    #[test]
    fn derivatives_match_differences() {
        let xs: Vec<f64> = (0..200).map(|i| -3.0 + 0.0311 * i as f64).collect();
        check_derivatives(TestFunction::bump(0.2, 0.5), &xs);
        check_derivatives(TestFunction::TruncatedLinear { center: 0.1, half_width: 1.0 }, &xs);
    }

    #[test]
    fn compact_support_and_continuity() {
        let f = TestFunction::bump(0.0, 1.0);
        assert_eq!(f.eval(5.0), (0.0, 0.0, 0.0));
        let (v, d1, d2) = f.eval(4.999_999);
        assert!(v.abs() < 1e-12 && d1.abs() < 1e-9 && d2.abs() < 1e-4);
        let g = TestFunction::TruncatedLinear { center: 0.0, half_width: 2.0 };
        assert_eq!(g.value(1.5), 1.5);
        assert_eq!(g.value(4.0), 0.0);
    }
}
