#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use specdecomp_core::lattice_ops::{CoefficientField, FieldKind, Hop, LatticeOperator, MaskClause, Side};
use specdecomp_core::linalg::{c, CMatrix, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cplx(r: &mut ChaCha8Rng) -> C64 {
    c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))
}

pub fn random_matrix(r: &mut ChaCha8Rng, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| cplx(r))
}

pub fn random_hermitian(r: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let m = random_matrix(r, n);
    (&m + m.adjoint()) * c(0.5, 0.0)
}

fn random_mask(r: &mut ChaCha8Rng, dim: usize) -> Vec<MaskClause> {
    match r.random_range(0..4) {
        0 => vec![MaskClause::HalfSpace {
            axis: r.random_range(0..dim),
            side: if r.random_bool(0.5) { Side::Upper } else { Side::Lower },
            cut: r.random_range(-2..=2),
        }],
        1 => vec![MaskClause::Strip {
            axis: r.random_range(0..dim),
            center: r.random_range(-2..=2),
            half_width: r.random_range(0..3),
        }],
        _ => vec![],
    }
}

/// Random field mixing constant, periodic and compact terms with masks.
pub fn random_field(r: &mut ChaCha8Rng, dim: usize) -> CoefficientField {
    let mut field = CoefficientField::zero(dim);
    for _ in 0..r.random_range(1..=2) {
        let kind = match r.random_range(0..3) {
            0 => FieldKind::Constant(cplx(r)),
            1 => {
                let periods: Vec<usize> = (0..dim).map(|_| r.random_range(1..=3)).collect();
                let size = periods.iter().product();
                FieldKind::Periodic {
                    periods,
                    table: (0..size).map(|_| cplx(r)).collect(),
                }
            }
            _ => {
                let lo: Vec<i64> = (0..dim).map(|_| r.random_range(-3..=1)).collect();
                let hi: Vec<i64> = lo.iter().map(|l| l + r.random_range(0..=3)).collect();
                let size = lo.iter().zip(&hi).map(|(l, h)| (h - l + 1) as usize).product();
                FieldKind::Compact {
                    lo,
                    hi,
                    table: (0..size).map(|_| cplx(r)).collect(),
                }
            }
        };
        let mask = random_mask(r, dim);
        field = field.sum(&CoefficientField::masked(dim, kind, mask));
    }
    field
}

/// Random operator with hops in `[-range, range]^dim`.
pub fn random_operator(r: &mut ChaCha8Rng, dim: usize, range: i64, terms: usize) -> LatticeOperator {
    let hops = (0..terms)
        .map(|_| {
            let mut offset = [0, 0];
            for o in offset.iter_mut().take(dim) {
                *o = r.random_range(-range..=range);
            }
            Hop {
                offset,
                field: random_field(r, dim),
            }
        })
        .collect();
    LatticeOperator::new(dim, hops).unwrap()
}

/// Fully periodic random operator (no masks, no compact terms).
pub fn random_periodic(r: &mut ChaCha8Rng, dim: usize, period: usize) -> LatticeOperator {
    let mut hops = Vec::new();
    let offsets: Vec<[i64; 2]> = if dim == 1 {
        vec![[0, 0], [1, 0], [-1, 0]]
    } else {
        vec![[0, 0], [1, 0], [-1, 0], [0, 1], [0, -1]]
    };
    for offset in offsets {
        let periods = vec![period; dim];
        let size = period.pow(dim as u32);
        hops.push(Hop {
            offset,
            field: CoefficientField::masked(
                dim,
                FieldKind::Periodic {
                    periods,
                    table: (0..size).map(|_| cplx(r)).collect(),
                },
                vec![],
            ),
        });
    }
    LatticeOperator::new(dim, hops).unwrap()
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}
