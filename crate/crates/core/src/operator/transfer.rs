use std::f64::consts::LN_2;

use super::scalar::Scalar;

/// `exp(log_scale) · unit` with `‖unit‖_F = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferProduct<T> {
    pub unit: [[T; 2]; 2],
    pub log_scale: f64,
}

fn frob<T: Scalar>(m: &[[T; 2]; 2]) -> f64 {
    let s: f64 = m.iter().flatten().map(|v| v.modulus().powi(2)).sum();
    s.sqrt()
}

fn max_entry<T: Scalar>(m: &[[T; 2]; 2]) -> f64 {
    m.iter().flatten().map(|v| v.modulus()).fold(0.0, f64::max)
}

impl<T: Scalar> TransferProduct<T> {
    pub fn identity() -> Self {
        Self::from_matrix([[T::one(), T::zero()], [T::zero(), T::one()]])
    }

    /// Wraps a plain matrix; a zero matrix gets `log_scale = −∞`.
    pub fn from_matrix(m: [[T; 2]; 2]) -> Self {
        let n = frob(&m);
        if n == 0.0 {
            return TransferProduct {
                unit: m,
                log_scale: f64::NEG_INFINITY,
            };
        }
        TransferProduct {
            unit: m.map(|row| row.map(|v| v.scale(1.0 / n))),
            log_scale: n.ln(),
        }
    }

    /// `Π_{n=b}^{a} [[v_n − E, −1], [1, 0]]` for `diag = (v_a, …, v_b)`.
    pub fn from_steps(diag: &[T], energy: T) -> Self {
        let mut m = [[T::one(), T::zero()], [T::zero(), T::one()]];
        let mut log = 0.0;
        for &v in diag {
            let t = v - energy;
            m = [
                [t * m[0][0] - m[1][0], t * m[0][1] - m[1][1]],
                [m[0][0], m[0][1]],
            ];
            let big = max_entry(&m);
            if big > 1.8446744073709552e19 {
                let e = big.log2().round() as i32;
                let s = 2f64.powi(-e);
                m = m.map(|row| row.map(|v| v.scale(s)));
                log += e as f64 * LN_2;
            }
        }
        let n = frob(&m);
        TransferProduct {
            unit: m.map(|row| row.map(|v| v.scale(1.0 / n))),
            log_scale: log + n.ln(),
        }
    }

    /// `self · rhs`.
    pub fn mul(&self, rhs: &Self) -> Self {
        let (a, b) = (&self.unit, &rhs.unit);
        let m = [
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ];
        let p = Self::from_matrix(m);
        TransferProduct {
            unit: p.unit,
            log_scale: p.log_scale + self.log_scale + rhs.log_scale,
        }
    }

    /// `log ‖M‖_F`.
    pub fn log_norm(&self) -> f64 {
        self.log_scale
    }

    /// `log ‖M‖` for the operator (spectral) norm.
    pub fn log_op_norm(&self) -> f64 {
        let d = self.unit_det().modulus();
        let disc = (1.0 - 4.0 * d * d).max(0.0).sqrt();
        self.log_scale + 0.5 * ((1.0 + disc) / 2.0).ln()
    }

    /// `|det M − 1| / ‖M‖_F²`.
    ///
    /// The absolute defect `|det M − 1|` of a long product is dominated by
    /// rounding at the level `ε‖M‖²`, so unimodularity is measured on the
    /// normalized factor.
    pub fn det_defect(&self) -> f64 {
        (self.unit_det() - T::from_f64((-2.0 * self.log_scale).exp())).modulus()
    }

    /// `det(unit) = det M · exp(−2·log_scale)`.
    pub fn unit_det(&self) -> T {
        let u = &self.unit;
        u[0][0] * u[1][1] - u[0][1] * u[1][0]
    }

    pub fn det(&self) -> T {
        self.unit_det().scale((2.0 * self.log_scale).exp())
    }

    /// Entry `(i, j)` as `(phase, log |entry|)`.
    pub fn entry_log(&self, i: usize, j: usize) -> (T, f64) {
        let v = self.unit[i][j];
        (v.unit(), v.modulus().ln() + self.log_scale)
    }

    /// The represented matrix (may overflow for long products).
    pub fn matrix(&self) -> [[T; 2]; 2] {
        let s = self.log_scale.exp();
        self.unit.map(|row| row.map(|v| v.scale(s)))
    }
}
