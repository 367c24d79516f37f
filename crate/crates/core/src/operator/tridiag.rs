/// A real symmetric tridiagonal matrix.
///
/// `off[i]` couples sites `i` and `i + 1`. Zero couplings are allowed, which
/// is how principal submatrices with deleted sites are represented.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
    off2: Vec<f64>,
    pivmin: f64,
}

/// Sorted eigenvalues with (optionally) matching orthonormal eigenvectors.
///
/// Each vector has its first non-negligible entry positive.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

impl EigenSystem {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn has_vectors(&self) -> bool {
        !self.vectors.is_empty()
    }

    /// `dist(E, spec)`; `+∞` for an empty system.
    pub fn dist(&self, energy: f64) -> f64 {
        let i = self.values.partition_point(|&v| v < energy);
        let mut d = f64::INFINITY;
        if i < self.values.len() {
            d = d.min(self.values[i] - energy);
        }
        if i > 0 {
            d = d.min(energy - self.values[i - 1]);
        }
        d
    }

    /// Index of the eigenvalue closest to `energy`.
    pub fn nearest(&self, energy: f64) -> Option<usize> {
        let i = self.values.partition_point(|&v| v < energy);
        match (i.checked_sub(1), self.values.get(i)) {
            (None, None) => None,
            (None, Some(_)) => Some(i),
            (Some(j), None) => Some(j),
            (Some(j), Some(&hi)) => Some(if hi - energy < energy - self.values[j] { i } else { j }),
        }
    }

    /// Distance from eigenvalue `j` to the rest of the spectrum.
    pub fn gap(&self, j: usize) -> f64 {
        let mut g = f64::INFINITY;
        if j > 0 {
            g = g.min(self.values[j] - self.values[j - 1]);
        }
        if j + 1 < self.values.len() {
            g = g.min(self.values[j + 1] - self.values[j]);
        }
        g
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = norm(v);
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

fn fix_sign(v: &mut [f64]) {
    let big = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-12 * big) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert!(
            off.len() + 1 == diag.len() || (diag.is_empty() && off.is_empty()),
            "tridiagonal shape mismatch: {} diagonal, {} off-diagonal",
            diag.len(),
            off.len()
        );
        Self::build(diag, off)
    }

    fn build(diag: Vec<f64>, off: Vec<f64>) -> Self {
        let off2: Vec<f64> = off.iter().map(|b| b * b).collect();
        let pivmin = f64::MIN_POSITIVE * off2.iter().fold(1.0f64, |m, &b| m.max(b)) / f64::EPSILON;
        SymTridiagonal { diag, off, off2, pivmin }
    }

    /// Diagonal `diag`, off-diagonal `−1`.
    pub fn schrodinger(diag: Vec<f64>) -> Self {
        let off = vec![-1.0; diag.len().saturating_sub(1)];
        Self::build(diag, off)
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    /// `‖T‖_∞` (maximum absolute row sum), an upper bound for `‖T‖₂`.
    pub fn norm_inf(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                let l = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
                let r = if i + 1 < n { self.off[i].abs() } else { 0.0 };
                self.diag[i].abs() + l + r
            })
            .fold(0.0, f64::max)
    }

    /// `T v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * v[i];
                if i > 0 {
                    s += self.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * v[i + 1];
                }
                s
            })
            .collect()
    }

    /// Keeps the sites in `keep` (strictly increasing indices).
    pub fn principal_submatrix(&self, keep: &[usize]) -> SymTridiagonal {
        let diag = keep.iter().map(|&i| self.diag[i]).collect();
        let off = keep
            .windows(2)
            .map(|w| {
                assert!(w[0] < w[1], "indices must increase");
                if w[1] == w[0] + 1 {
                    self.off[w[0]]
                } else {
                    0.0
                }
            })
            .collect();
        Self::build(diag, off)
    }

    /// Number of eigenvalues strictly below `energy` (negative pivots of
    /// `T − E = LDLᵀ`).
    pub fn sturm_count(&self, energy: f64) -> usize {
        let pivmin = self.pivmin;
        let Some(&d0) = self.diag.first() else { return 0 };
        let fix = |d: f64| if d.abs() < pivmin { -pivmin } else { d };
        let mut d = fix(d0 - energy);
        let mut count = (d < 0.0) as usize;
        for (a, b2) in self.diag[1..].iter().zip(&self.off2) {
            d = fix(a - energy - b2 / d);
            count += (d < 0.0) as usize;
        }
        count
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let l = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let r = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - l - r);
            hi = hi.max(self.diag[i] + l + r);
        }
        (lo, hi)
    }

    /// Absolute bisection tolerance `4ε·(1 + ‖T‖_∞)`.
    pub fn tolerance(&self) -> f64 {
        4.0 * f64::EPSILON * (1.0 + self.norm_inf())
    }

    /// Sturm counts at several shifts in one interleaved pass.
    fn sturm_counts<const K: usize>(&self, energies: [f64; K]) -> [usize; K] {
        let pivmin = self.pivmin;
        let fix = |d: f64| if d.abs() < pivmin { -pivmin } else { d };
        let mut count = [0usize; K];
        let Some(&d0) = self.diag.first() else { return count };
        let mut d = energies.map(|e| fix(d0 - e));
        for k in 0..K {
            count[k] += (d[k] < 0.0) as usize;
        }
        for (a, b2) in self.diag[1..].iter().zip(&self.off2) {
            for k in 0..K {
                d[k] = fix(a - energies[k] - b2 / d[k]);
                count[k] += (d[k] < 0.0) as usize;
            }
        }
        count
    }

    /// Quadrisection: three interleaved counts split `[lo, hi]` into
    /// quarters.
    fn bisect(&self, lo: f64, hi: f64, clo: usize, chi: usize, tol: f64, out: &mut Vec<f64>) {
        if chi <= clo {
            return;
        }
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            out.extend(std::iter::repeat(mid).take(chi - clo));
            return;
        }
        let (q1, q3) = (0.5 * (lo + mid), 0.5 * (mid + hi));
        if !(lo < q1 && q1 < mid && mid < q3 && q3 < hi) {
            let cm = self.sturm_count(mid).clamp(clo, chi);
            self.bisect(lo, mid, clo, cm, tol, out);
            self.bisect(mid, hi, cm, chi, tol, out);
            return;
        }
        let [c1, c2, c3] = self.sturm_counts([q1, mid, q3]);
        let c2 = c2.clamp(clo, chi);
        let c1 = c1.clamp(clo, c2);
        let c3 = c3.clamp(c2, chi);
        self.bisect(lo, q1, clo, c1, tol, out);
        self.bisect(q1, mid, c1, c2, tol, out);
        self.bisect(mid, q3, c2, c3, tol, out);
        self.bisect(q3, hi, c3, chi, tol, out);
    }

    /// Eigenvalues in `[lo, hi)`, ascending.
    pub fn eigenvalues_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        if self.is_empty() || hi <= lo {
            return Vec::new();
        }
        let (glo, ghi) = self.gershgorin();
        let pad = 2.0 * self.tolerance();
        let lo = lo.max(glo - pad);
        let hi = hi.min(ghi + pad);
        if hi <= lo {
            return Vec::new();
        }
        let mut out = Vec::new();
        let (clo, chi) = (self.sturm_count(lo), self.sturm_count(hi));
        self.bisect(lo, hi, clo, chi, self.tolerance(), &mut out);
        out
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.is_empty() {
            return Vec::new();
        }
        let (glo, ghi) = self.gershgorin();
        let pad = 2.0 * self.tolerance();
        let mut out = Vec::with_capacity(self.len());
        self.bisect(glo - pad, ghi + pad, 0, self.len(), self.tolerance(), &mut out);
        out
    }

    /// The `k`-th smallest eigenvalue (zero-based).
    pub fn kth_eigenvalue(&self, k: usize) -> f64 {
        assert!(k < self.len(), "eigenvalue index {k} out of range");
        let (glo, ghi) = self.gershgorin();
        let pad = 2.0 * self.tolerance();
        let (mut lo, mut hi) = (glo - pad, ghi + pad);
        let tol = self.tolerance();
        loop {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= tol || mid <= lo || mid >= hi {
                return mid;
            }
            if self.sturm_count(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }

    /// Eigenvector for an (accurate) eigenvalue by twisted factorization.
    ///
    /// Starting from the site `r` where the twisted pivot is smallest, the
    /// vector is built outward by exact recurrences, so exponentially small
    /// tails keep full relative accuracy.
    fn twisted_vector(&self, lambda: f64) -> Option<Vec<f64>> {
        let n = self.len();
        if n == 1 {
            return Some(vec![1.0]);
        }
        let pivmin = self.pivmin;
        let guard = |d: f64| if d.abs() < pivmin { -pivmin } else { d };
        let mut dp = vec![0.0; n];
        let mut dm = vec![0.0; n];
        dp[0] = guard(self.diag[0] - lambda);
        for i in 1..n {
            dp[i] = guard(self.diag[i] - lambda - self.off[i - 1].powi(2) / dp[i - 1]);
        }
        dm[n - 1] = guard(self.diag[n - 1] - lambda);
        for i in (0..n - 1).rev() {
            dm[i] = guard(self.diag[i] - lambda - self.off[i].powi(2) / dm[i + 1]);
        }
        let r = (0..n)
            .min_by(|&i, &j| {
                let gi = (dp[i] + dm[i] - (self.diag[i] - lambda)).abs();
                let gj = (dp[j] + dm[j] - (self.diag[j] - lambda)).abs();
                gi.total_cmp(&gj)
            })
            .unwrap_or(0);
        let mut z = vec![0.0; n];
        z[r] = 1.0;
        for i in (0..r).rev() {
            z[i] = -self.off[i] * z[i + 1] / dp[i];
        }
        for i in r + 1..n {
            z[i] = -self.off[i - 1] * z[i - 1] / dm[i];
        }
        if z.iter().any(|v| !v.is_finite()) {
            return None;
        }
        normalize(&mut z);
        Some(z)
    }

    /// Solves `(T − σ) x = rhs` by Gaussian elimination with partial
    /// pivoting; exactly singular pivots are nudged to `ε‖T‖`.
    pub fn solve_shifted(&self, sigma: f64, rhs: &[f64]) -> Vec<f64> {
        let n = self.len();
        assert_eq!(rhs.len(), n);
        if n == 0 {
            return Vec::new();
        }
        let tiny = f64::EPSILON * self.norm_inf().max(1.0);
        // Rows hold (sub, diag, sup, sup2) after elimination.
        let mut d: Vec<f64> = self.diag.iter().map(|v| v - sigma).collect();
        let mut du: Vec<f64> = self.off.clone();
        let mut dl: Vec<f64> = self.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut b = rhs.to_vec();
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let f = dl[i] / d[i];
                d[i + 1] -= f * du[i];
                b[i + 1] -= f * b[i];
                dl[i] = 0.0;
            } else {
                let f = d[i] / dl[i];
                d[i] = dl[i];
                let t = d[i + 1];
                d[i + 1] = du[i] - f * t;
                du[i] = t;
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -f;
                }
                b.swap(i, i + 1);
                b[i + 1] -= f * b[i];
            }
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = b[i];
            if i + 1 < n {
                s -= du[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= du2[i] * x[i + 2];
            }
            x[i] = s / d[i];
        }
        x
    }

    fn inverse_iteration(&self, lambda: f64, seed: usize, against: &[Vec<f64>]) -> Vec<f64> {
        let n = self.len();
        let mut v: Vec<f64> = (0..n)
            .map(|i| {
                let h = (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (seed as u64 + 7);
                ((h >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            })
            .collect();
        for _ in 0..4 {
            for u in against {
                let c = dot(&v, u);
                v.iter_mut().zip(u).for_each(|(a, b)| *a -= c * b);
            }
            normalize(&mut v);
            v = self.solve_shifted(lambda, &v);
            normalize(&mut v);
        }
        for u in against {
            let c = dot(&v, u);
            v.iter_mut().zip(u).for_each(|(a, b)| *a -= c * b);
        }
        normalize(&mut v);
        v
    }

    /// Eigenvalues and, when `want_vectors`, eigenvectors.
    pub fn eigen(&self, want_vectors: bool) -> EigenSystem {
        let values = self.eigenvalues();
        let vectors = if want_vectors {
            self.eigenvectors(&values)
        } else {
            Vec::new()
        };
        EigenSystem { values, vectors }
    }

    /// Eigenvectors for sorted eigenvalues computed from this matrix.
    pub fn eigenvectors(&self, values: &[f64]) -> Vec<Vec<f64>> {
        let scale = self.norm_inf().max(1.0);
        let cluster_gap = 1e-10 * scale;
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(values.len());
        let mut start = 0;
        while start < values.len() {
            let mut end = start + 1;
            while end < values.len() && values[end] - values[end - 1] < cluster_gap {
                end += 1;
            }
            let mut cluster: Vec<Vec<f64>> = Vec::new();
            for (j, &lambda) in values.iter().enumerate().take(end).skip(start) {
                let mut v = self.twisted_vector(lambda);
                if let Some(z) = v.as_mut() {
                    for u in &cluster {
                        let c = dot(z, u);
                        z.iter_mut().zip(u).for_each(|(a, b)| *a -= c * b);
                    }
                    if normalize(z) < 1e-3 {
                        v = None;
                    }
                }
                let v = v.unwrap_or_else(|| self.inverse_iteration(lambda, j, &cluster));
                cluster.push(v);
            }
            vectors.extend(cluster);
            start = end;
        }
        let near = 1e-3 * scale;
        for j in 1..vectors.len() {
            let mut changed = false;
            for i in (0..j).rev() {
                if values[j] - values[i] > near {
                    break;
                }
                let c = dot(&vectors[j], &vectors[i]);
                if c.abs() > 1e-10 {
                    let (head, tail) = vectors.split_at_mut(j);
                    tail[0].iter_mut().zip(&head[i]).for_each(|(a, b)| *a -= c * b);
                    changed = true;
                }
            }
            if changed {
                normalize(&mut vectors[j]);
            }
        }
        vectors.iter_mut().for_each(|v| fix_sign(v));
        vectors
    }
}

/// Cauchy interlacing `E_k(H) ≤ E_k(H_r) ≤ E_{k+n−r}(H)` for every `k`,
/// with slack `10⁻⁹`.
pub fn interlace_check(h: &EigenSystem, hr: &EigenSystem) -> bool {
    const TOL: f64 = 1e-9;
    let (n, r) = (h.len(), hr.len());
    if r > n {
        return false;
    }
    (0..r).all(|k| h.values[k] <= hr.values[k] + TOL && hr.values[k] <= h.values[k + n - r] + TOL)
}
