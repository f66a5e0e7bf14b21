//! Complex band matrices and LU factorization with partial pivoting.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Square band matrix with `kl` sub- and `ku` super-diagonals. Rows keep
/// `kl` extra super-diagonals of room for the fill-in of pivoting.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<C64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![C64::new(0.0, 0.0); n * width],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let off = j as isize - i as isize;
        if off < -(self.kl as isize) || off > self.ku as isize || i >= self.n || j >= self.n {
            None
        } else {
            Some(i * self.width + (off + self.kl as isize) as usize)
        }
    }

    /// Adds `v` at `(i, j)`; panics outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: C64) {
        let s = self
            .slot(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) outside the band"));
        self.data[s] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.slot(i, j).map_or(C64::new(0.0, 0.0), |s| self.data[s])
    }

    fn row_range(&self, i: usize) -> std::ops::Range<usize> {
        i.saturating_sub(self.kl)..(i + self.ku + 1).min(self.n)
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        (0..self.n)
            .map(|i| self.row_range(i).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    /// `x^T A y` without conjugation.
    pub fn bilinear(&self, x: &[C64], y: &[C64]) -> C64 {
        let ay = self.matvec(y);
        x.iter().zip(&ay).map(|(a, b)| a * b).sum()
    }

    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row_range(i).map(|j| self.get(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Bit-wise comparison of `A` and `A^T` over the band.
    pub fn is_bitwise_symmetric(&self) -> bool {
        self.kl == self.ku
            && (0..self.n).all(|i| {
                self.row_range(i).all(|j| {
                    let (a, b) = (self.get(i, j), self.get(j, i));
                    a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits()
                })
            })
    }

    pub fn factor(&self) -> Result<BandLu> {
        let (n, kl, w) = (self.n, self.kl, self.width);
        let mut a = self.data.clone();
        let mut mult = vec![C64::new(0.0, 0.0); n * kl.max(1)];
        let mut piv = vec![0usize; n];
        let scale = self.norm_inf();
        let mut min_pivot = f64::INFINITY;
        // row i stores columns i - kl ..= i + kl + ku at offsets 0 .. w
        let idx = |i: usize, j: usize| i * w + (j + kl - i);
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = a[idx(k, k)].norm();
            for r in k + 1..=last {
                let v = a[idx(r, k)].norm();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            piv[k] = p;
            min_pivot = min_pivot.min(best);
            if !(best > 1e-14 * scale) {
                return Err(Error::SingularSystem {
                    smallest_pivot: best,
                });
            }
            let jmax = (k + w - kl - 1).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    a.swap(idx(k, j), idx(p, j));
                }
            }
            let inv = 1.0 / a[idx(k, k)];
            for r in k + 1..=last {
                let m = a[idx(r, k)] * inv;
                mult[k * kl + (r - k - 1)] = m;
                a[idx(r, k)] = C64::new(0.0, 0.0);
                if m != C64::new(0.0, 0.0) {
                    for j in k + 1..=jmax {
                        let u = a[idx(k, j)];
                        a[idx(r, j)] -= m * u;
                    }
                }
            }
        }
        Ok(BandLu {
            n,
            kl,
            w,
            data: a,
            mult,
            piv,
            min_pivot,
            original: self.clone(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    w: usize,
    data: Vec<C64>,
    mult: Vec<C64>,
    piv: Vec<usize>,
    min_pivot: f64,
    original: BandMatrix,
}

impl BandLu {
    pub fn smallest_pivot(&self) -> f64 {
        self.min_pivot
    }

    pub fn matrix(&self) -> &BandMatrix {
        &self.original
    }

    fn substitute(&self, b: &[C64]) -> Vec<C64> {
        let (n, kl, w) = (self.n, self.kl, self.w);
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            for r in k + 1..=(k + kl).min(n - 1) {
                x[r] -= self.mult[k * kl + (r - k - 1)] * xk;
            }
        }
        for k in (0..n).rev() {
            let jmax = (k + w - kl - 1).min(n - 1);
            let row = k * w;
            let mut s = x[k];
            for j in k + 1..=jmax {
                s -= self.data[row + j + kl - k] * x[j];
            }
            x[k] = s / self.data[row + kl];
        }
        x
    }

    /// Solves `A x = b` with iterative refinement to relative residual
    /// `1e-10`.
    pub fn solve(&self, b: &[C64]) -> Result<Vec<C64>> {
        let mut x = self.substitute(b);
        let a_norm = self.original.norm_inf();
        let b_norm = b.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for step in 0..4 {
            let ax = self.original.matvec(&x);
            let r: Vec<C64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
            let r_norm = r.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let x_norm = x.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let denom = a_norm * x_norm + b_norm;
            if denom == 0.0 || r_norm <= 1e-14 * denom {
                return Ok(x);
            }
            if step == 3 {
                if r_norm <= 1e-10 * denom {
                    return Ok(x);
                }
                return Err(Error::SingularSystem {
                    smallest_pivot: self.min_pivot,
                });
            }
            let d = self.substitute(&r);
            for (xi, di) in x.iter_mut().zip(d) {
                *xi += di;
            }
        }
        Ok(x)
    }

    /// Estimate of the smallest singular value of `A` by inverse iteration
    /// from a fixed start vector, with the corresponding unit vector.
    pub fn smallest_singular_estimate(&self, steps: usize) -> (f64, Vec<C64>) {
        let n = self.n;
        let mut v: Vec<C64> = (0..n)
            .map(|i| C64::new(1.0 + (i as f64 * 0.618_033_988_749_895).fract(), 0.0))
            .collect();
        normalize(&mut v);
        for _ in 0..steps.max(1) {
            v = self.substitute(&v);
            normalize(&mut v);
        }
        let av = self.original.matvec(&v);
        let s = av.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        (s, v)
    }
}

fn normalize(v: &mut [C64]) {
    let s = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if s > 0.0 {
        for z in v {
            *z /= s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_band(n: usize, kl: usize, ku: usize, seed: u64, diag: f64) -> BandMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = BandMatrix::zeros(n, kl, ku);
        for i in 0..n {
            for j in i.saturating_sub(kl)..(i + ku + 1).min(n) {
                let v = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                a.add(i, j, v);
            }
            a.add(i, i, C64::new(diag, 0.0));
        }
        a
    }

    fn dense(a: &BandMatrix) -> DMatrix<C64> {
        DMatrix::from_fn(a.n(), a.n(), |i, j| a.get(i, j))
    }

    #[test]
    fn matches_dense_lu() {
        for (n, kl, ku, seed) in [(30, 3, 3, 1), (50, 1, 4, 2), (40, 5, 2, 3), (1, 0, 0, 4)] {
            // zero diagonal shift forces pivoting
            let a = random_band(n, kl, ku, seed, 0.0);
            let b: Vec<C64> = (0..n).map(|i| C64::new(i as f64, 1.0 - i as f64)).collect();
            let x = a.factor().unwrap().solve(&b).unwrap();
            let xd = dense(&a).lu().solve(&nalgebra::DVector::from_vec(b.clone())).unwrap();
            for i in 0..n {
                assert!((x[i] - xd[i]).norm() < 1e-9 * (1.0 + xd[i].norm()), "{n} {i}");
            }
        }
    }

    #[test]
    fn singular_detected() {
        let mut a = BandMatrix::zeros(3, 1, 1);
        a.add(0, 0, C64::new(1.0, 0.0));
        a.add(0, 1, C64::new(1.0, 0.0));
        a.add(1, 0, C64::new(1.0, 0.0));
        a.add(1, 1, C64::new(1.0, 0.0));
        a.add(2, 2, C64::new(1.0, 0.0));
        assert!(matches!(a.factor(), Err(Error::SingularSystem { .. })));
    }

    #[test]
    fn smallest_singular_value() {
        let mut a = BandMatrix::zeros(4, 1, 1);
        for (i, d) in [5.0, 3.0, 0.01, 7.0].into_iter().enumerate() {
            a.add(i, i, C64::new(d, 0.0));
        }
        let (s, v) = a.factor().unwrap().smallest_singular_estimate(8);
        assert!((s - 0.01).abs() < 1e-12);
        assert!((v[2].norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    #[should_panic]
    fn outside_band_panics() {
        BandMatrix::zeros(4, 1, 1).add(0, 3, C64::new(1.0, 0.0));
    }
}
