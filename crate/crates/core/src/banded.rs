//! Complex banded LU with partial pivoting (the unblocked LAPACK `gbtf2`
//! scheme) and inverse iteration for the smallest singular value.
//!
//! Used where dense SVD of a truncation would be too large, e.g. 2D boxes
//! with ~10^4 sites. The residual `‖A v‖` of the returned unit vector is an
//! upper bound on `σ_min(A)` regardless of how well the iteration converged.

use crate::linalg::{c, LinalgError, C64};

/// Square banded matrix in LAPACK band storage with room for pivot fill-in.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    ab: Vec<C64>,
}

impl BandMatrix {
    /// Assembles from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, C64)]) -> Self {
        let mut kl = 0;
        let mut ku = 0;
        for &(i, j, _) in triplets {
            if i > j {
                kl = kl.max(i - j);
            } else {
                ku = ku.max(j - i);
            }
        }
        let ldab = 2 * kl + ku + 1;
        let mut m = Self {
            n,
            kl,
            ku,
            ldab,
            ab: vec![c(0.0, 0.0); ldab * n],
        };
        for &(i, j, v) in triplets {
            let k = m.pos(i, j);
            m.ab[k] += v;
        }
        m
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    #[inline]
    fn pos(&self, i: usize, j: usize) -> usize {
        j * self.ldab + (self.kl + self.ku + i - j)
    }

    /// Adds `s` to every diagonal entry.
    pub fn shift_diagonal(&mut self, s: C64) {
        for i in 0..self.n {
            let k = self.pos(i, i);
            self.ab[k] += s;
        }
    }

    /// `y = A x` using the original (unfactored) band.
    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![c(0.0, 0.0); self.n];
        for j in 0..self.n {
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            for (i, yi) in y.iter_mut().enumerate().take(hi + 1).skip(lo) {
                *yi += self.ab[self.pos(i, j)] * x[j];
            }
        }
        y
    }

    /// Factors in place of a copy.
    pub fn lu(&self) -> Result<BandLu, LinalgError> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let kv = kl + ku;
        let mut ab = self.ab.clone();
        let at = |i: usize, j: usize| j * self.ldab + (kv + i - j);
        let mut ipiv = vec![0usize; n];
        let mut ju = 0usize;
        let mut max_pivot: f64 = 0.0;
        let mut min_pivot = f64::INFINITY;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut jp = 0;
            let mut best = -1.0;
            for i in 0..=km {
                let v = ab[at(j + i, j)].norm();
                if v > best {
                    best = v;
                    jp = i;
                }
            }
            ipiv[j] = j + jp;
            if best == 0.0 {
                return Err(LinalgError::Singular { rcond: 0.0 });
            }
            max_pivot = max_pivot.max(best);
            min_pivot = min_pivot.min(best);
            ju = ju.max((j + ku + jp).min(n - 1));
            if jp != 0 {
                for col in j..=ju {
                    ab.swap(at(j + jp, col), at(j, col));
                }
            }
            let inv = c(1.0, 0.0) / ab[at(j, j)];
            for i in 1..=km {
                ab[at(j + i, j)] *= inv;
            }
            for col in j + 1..=ju {
                let t = ab[at(j, col)];
                if t == c(0.0, 0.0) {
                    continue;
                }
                for i in 1..=km {
                    let l = ab[at(j + i, j)];
                    ab[at(j + i, col)] -= l * t;
                }
            }
        }
        Ok(BandLu {
            n,
            kl,
            kv,
            ldab: self.ldab,
            ab,
            ipiv,
            pivot_ratio: min_pivot / max_pivot,
        })
    }
}

/// `P L U` factors in band storage.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    kv: usize,
    ldab: usize,
    ab: Vec<C64>,
    ipiv: Vec<usize>,
    /// `min |u_jj| / max |u_jj|`, a crude conditioning indicator.
    pub pivot_ratio: f64,
}

impl BandLu {
    #[inline]
    fn get(&self, i: usize, j: usize) -> C64 {
        self.ab[j * self.ldab + (self.kv + i - j)]
    }

    /// Solves `A x = b` in place.
    pub fn solve(&self, b: &mut [C64]) {
        let n = self.n;
        for j in 0..n {
            let l = self.ipiv[j];
            if l != j {
                b.swap(l, j);
            }
            let bj = b[j];
            for i in 1..=self.kl.min(n - 1 - j) {
                b[j + i] -= self.get(j + i, j) * bj;
            }
        }
        for j in (0..n).rev() {
            b[j] /= self.get(j, j);
            let bj = b[j];
            for i in j.saturating_sub(self.kv)..j {
                b[i] -= self.get(i, j) * bj;
            }
        }
    }

    /// Solves `A^H x = b` in place.
    pub fn solve_adjoint(&self, b: &mut [C64]) {
        let n = self.n;
        for j in 0..n {
            let mut acc = b[j];
            for i in j.saturating_sub(self.kv)..j {
                acc -= self.get(i, j).conj() * b[i];
            }
            b[j] = acc / self.get(j, j).conj();
        }
        for j in (0..n.saturating_sub(1)).rev() {
            let mut acc = b[j];
            for i in 1..=self.kl.min(n - 1 - j) {
                acc -= self.get(j + i, j).conj() * b[j + i];
            }
            b[j] = acc;
            let l = self.ipiv[j];
            if l != j {
                b.swap(l, j);
            }
        }
    }
}

fn normalize(v: &mut [C64]) -> f64 {
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    norm
}

/// Result of inverse iteration on `A^H A`.
#[derive(Debug, Clone)]
pub struct MinSingular {
    /// `‖A v‖` for the returned unit vector: an upper bound on `σ_min`.
    pub upper: f64,
    pub vector: Vec<C64>,
    pub iterations: usize,
}

/// Inverse iteration `v ← (A^H A)^{-1} v` from a fixed deterministic start.
///
/// Stops when the residual changes by less than `rel_tol` relatively or
/// after `max_iter` steps. A singular factorization yields `upper = 0`
/// with the pivot column's null direction left unresolved.
pub fn min_singular(a: &BandMatrix, max_iter: usize, rel_tol: f64) -> Result<MinSingular, LinalgError> {
    let n = a.len();
    let lu = match a.lu() {
        Ok(lu) => lu,
        Err(LinalgError::Singular { .. }) => {
            return Ok(MinSingular {
                upper: 0.0,
                vector: vec![c(0.0, 0.0); n],
                iterations: 0,
            })
        }
        Err(e) => return Err(e),
    };
    let mut v: Vec<C64> = (0..n)
        .map(|i| {
            let t = i as f64;
            c(1.0 + 0.5 * (0.7 * t).sin(), 0.25 * (1.3 * t).cos())
        })
        .collect();
    normalize(&mut v);
    let mut upper = f64::INFINITY;
    let mut iterations = 0;
    for it in 1..=max_iter {
        lu.solve_adjoint(&mut v);
        lu.solve(&mut v);
        if normalize(&mut v) == 0.0 || v.iter().any(|x| !x.is_finite()) {
            return Err(LinalgError::NoConvergence(n));
        }
        let r = a.mul_vec(&v).iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        iterations = it;
        let done = (upper - r).abs() <= rel_tol * r.max(f64::MIN_POSITIVE);
        upper = upper.min(r);
        if done {
            break;
        }
    }
    Ok(MinSingular {
        upper,
        vector: v,
        iterations,
    })
}
