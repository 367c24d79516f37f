use std::f64::consts::LN_2;

use super::scalar::Scalar;

/// `sign · exp(log_mag)`, optionally with the logarithmic derivative
/// `f′(E)/f(E)`.
///
/// For real inputs `sign ∈ {−1, 0, 1}`; for complex inputs it is a unit
/// phase. A zero determinant has `sign = 0` and `log_mag = −∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet<T> {
    pub sign: T,
    pub log_mag: f64,
    pub dlog: Option<T>,
}

impl<T: Scalar> LogDet<T> {
    pub fn one() -> Self {
        LogDet {
            sign: T::one(),
            log_mag: 0.0,
            dlog: Some(T::zero()),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.log_mag == f64::NEG_INFINITY
    }

    /// The represented value; overflows to infinity or underflows to zero
    /// outside the `f64` range.
    pub fn value(&self) -> T {
        self.sign.scale(self.log_mag.exp())
    }

    /// `f′(E)` (not logarithmic).
    pub fn derivative(&self) -> Option<T> {
        self.dlog.map(|d| d * self.value())
    }
}

const UPPER: f64 = 1.3407807929942597e154; // 2^512
const LOWER: f64 = 7.458340731200207e-155; // 2^-512

/// Sturm recurrence `f_n = (v_n − E) f_{n−1} − f_{n−2}` with `f_0 = 1`,
/// `f_{−1} = 0`, renormalized by exact powers of two whenever the pair
/// `(f_n, f_{n−1})` leaves `[2^-512, 2^512]`.
///
/// The derivative runs alongside as
/// `f′_n = (v_n − E) f′_{n−1} − f′_{n−2} − f_{n−1}`.
pub fn det_recurrence<T: Scalar>(diag: &[T], energy: T, with_derivative: bool) -> LogDet<T> {
    let (mut f1, mut f0) = (T::one(), T::zero());
    let (mut g1, mut g0) = (T::zero(), T::zero());
    let mut log = 0.0;
    for &v in diag {
        let t = v - energy;
        let f2 = t * f1 - f0;
        if with_derivative {
            let g2 = t * g1 - g0 - f1;
            g0 = g1;
            g1 = g2;
        }
        f0 = f1;
        f1 = f2;
        let m = f1.modulus().max(f0.modulus());
        if !(LOWER..=UPPER).contains(&m) {
            let e = m.log2().round() as i32;
            let s = 2f64.powi(-e);
            f1 = f1.scale(s);
            f0 = f0.scale(s);
            g1 = g1.scale(s);
            g0 = g0.scale(s);
            log += e as f64 * LN_2;
        }
    }
    let mag = f1.modulus();
    if mag == 0.0 {
        return LogDet {
            sign: T::zero(),
            log_mag: f64::NEG_INFINITY,
            dlog: None,
        };
    }
    LogDet {
        sign: f1.unit(),
        log_mag: log + mag.ln(),
        dlog: with_derivative.then(|| g1 / f1),
    }
}
