//! Farey series and primitive lattice directions.
//!
//! A direction is the canonical primitive representative of a line through
//! the origin: components with gcd 1 and first nonzero component positive.
//! The direction set of order `N̄` holds one representative for every line
//! through 0 and another point of `[-N̄, N̄]^d`.

use crate::error::{DvmError, Result};

/// `ζ(3)`, Apéry's constant.
pub const ZETA3: f64 = 1.202_056_903_159_594_3;

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Greatest common divisor of a list, with `gcd(0, x) = x`.
pub fn gcd_many(xs: &[u64]) -> Result<u64> {
    let g = xs.iter().fold(0, |acc, &x| gcd(acc, x));
    if g == 0 {
        Err(DvmError::GcdAllZero)
    } else {
        Ok(g)
    }
}

/// gcd of the absolute values of an integer vector (0 for the zero vector).
pub fn gcd_abs(v: &[i64]) -> u64 {
    v.iter().fold(0, |acc, &x| gcd(acc, x.unsigned_abs()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FareySeries {
    pub dim: usize,
    pub order: usize,
    /// Nondecreasing coprime tuples, sorted lexicographically.
    pub elements: Vec<Vec<u64>>,
}

impl FareySeries {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

fn check_args(dim: usize, order: usize) -> Result<()> {
    if dim != 2 && dim != 3 {
        return Err(DvmError::InvalidDimension(dim));
    }
    if order < 1 {
        return Err(DvmError::InvalidParameter("order must be >= 1".into()));
    }
    Ok(())
}

/// Enumerates the series straight from its definition:
/// `0 <= p <= q <= N̄, q >= 1, gcd = 1` (and the triple analogue for `d = 3`).
pub fn farey_series(dim: usize, order: usize) -> Result<FareySeries> {
    check_args(dim, order)?;
    let top = order as u64;
    let mut elements = Vec::new();
    if dim == 2 {
        for p in 0..=top {
            for q in p.max(1)..=top {
                if gcd(p, q) == 1 {
                    elements.push(vec![p, q]);
                }
            }
        }
    } else {
        for p in 0..=top {
            for q in p..=top {
                for r in q.max(1)..=top {
                    if gcd(gcd(p, q), r) == 1 {
                        elements.push(vec![p, q, r]);
                    }
                }
            }
        }
    }
    elements.sort();
    Ok(FareySeries {
        dim,
        order,
        elements,
    })
}

/// Closed-form line counts built from the Farey cardinals:
/// `4(|F¹| - 1)` in 2D and `24(|F²| - |F¹|) - 2·A¹` in 3D.
///
/// Diagnostic only: in 3D the closed form does not agree with the
/// enumerated count (16 against 13 at order 1).
pub fn count_lines_formula(dim: usize, order: usize) -> Result<i64> {
    check_args(dim, order)?;
    let f1 = farey_series(2, order)?.len() as i64;
    let a1 = 4 * (f1 - 1);
    if dim == 2 {
        Ok(a1)
    } else {
        let f2 = farey_series(3, order)?.len() as i64;
        Ok(24 * (f2 - f1) - 2 * a1)
    }
}

/// Leading asymptotic term of `|F^{d-1}_N̄|`: `3N̄²/π²` or `N̄³/(6 ζ(3))`.
pub fn farey_leading_term(dim: usize, order: usize) -> Result<f64> {
    check_args(dim, order)?;
    let n = order as f64;
    Ok(if dim == 2 {
        3.0 * n * n / (std::f64::consts::PI * std::f64::consts::PI)
    } else {
        n * n * n / (6.0 * ZETA3)
    })
}

/// Canonical primitive lattice vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Direction {
    comps: [i64; 3],
    dim: usize,
}

impl Direction {
    /// Canonical primitive representative of the line through `v` (nonzero).
    pub fn of_vector(v: &[i64]) -> Option<Direction> {
        let g = gcd_abs(v) as i64;
        if g == 0 || v.len() > 3 {
            return None;
        }
        let first = v.iter().copied().find(|&x| x != 0)?;
        let sign = first.signum();
        let mut comps = [0i64; 3];
        for (c, &x) in comps.iter_mut().zip(v) {
            *c = sign * x / g;
        }
        Some(Direction {
            comps,
            dim: v.len(),
        })
    }

    pub fn components(&self) -> &[i64] {
        &self.comps[..self.dim]
    }

    pub fn max_norm(&self) -> i64 {
        self.components().iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn dot(&self, v: &[i64]) -> i64 {
        self.components().iter().zip(v).map(|(a, b)| a * b).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectionSet {
    pub dim: usize,
    pub order: usize,
    pub dirs: Vec<Direction>,
}

impl DirectionSet {
    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Direction> {
        self.dirs.iter()
    }

    /// Position of the direction of `v` and the multiplier `m` with `v = m e`.
    pub fn locate(&self, v: &[i64]) -> Option<(usize, i64)> {
        let e = Direction::of_vector(v)?;
        let pos = self.dirs.binary_search(&e).ok()?;
        let (axis, &c) = e
            .components()
            .iter()
            .enumerate()
            .find(|(_, &c)| c != 0)
            .expect("nonzero direction");
        Some((pos, v[axis] / c))
    }
}

/// All canonical primitive vectors of max-norm `<= N̄`, by brute force over the box.
pub fn enumerate_directions(dim: usize, order: usize) -> Result<DirectionSet> {
    check_args(dim, order)?;
    let r = order as i64;
    let mut dirs = Vec::new();
    let mut push = |v: &[i64]| {
        if gcd_abs(v) == 1 {
            let first = v.iter().copied().find(|&x| x != 0).unwrap_or(0);
            if first > 0 {
                dirs.push(Direction::of_vector(v).expect("primitive"));
            }
        }
    };
    for a in -r..=r {
        for b in -r..=r {
            if dim == 2 {
                push(&[a, b]);
            } else {
                for c in -r..=r {
                    push(&[a, b, c]);
                }
            }
        }
    }
    dirs.sort();
    Ok(DirectionSet { dim, order, dirs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn totients(n: usize) -> Vec<u64> {
        let mut phi: Vec<u64> = (0..=n as u64).collect();
        for p in 2..=n {
            if phi[p] == p as u64 {
                for m in (p..=n).step_by(p) {
                    phi[m] -= phi[m] / p as u64;
                }
            }
        }
        phi
    }

    #[test]
    fn gcd_examples() {
        assert_eq!(gcd_many(&[6, 10, 15]), Ok(1));
        assert_eq!(gcd_many(&[4, 8, 12]), Ok(4));
        assert_eq!(gcd_many(&[0, 5]), Ok(5));
        assert_eq!(gcd_many(&[0, 0]), Err(DvmError::GcdAllZero));
        assert_eq!(gcd_many(&[]), Err(DvmError::GcdAllZero));
    }

    #[test]
    fn small_farey_series() {
        let f = farey_series(2, 1).unwrap();
        assert_eq!(f.elements, vec![vec![0, 1], vec![1, 1]]);
        assert_eq!(farey_series(2, 3).unwrap().len(), 5);
        assert_eq!(farey_series(2, 7).unwrap().len(), 19);
        let f = farey_series(3, 1).unwrap();
        assert_eq!(f.elements, vec![vec![0, 0, 1], vec![0, 1, 1], vec![1, 1, 1]]);
    }

    #[test]
    fn farey_elements_satisfy_definition() {
        for d in [2, 3] {
            let s = farey_series(d, 9).unwrap();
            for e in &s.elements {
                assert!(e.windows(2).all(|w| w[0] <= w[1]));
                assert!(*e.last().unwrap() >= 1 && *e.last().unwrap() <= 9);
                assert_eq!(gcd_many(e), Ok(1));
            }
            assert!(s.elements.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn totient_identity() {
        let phi = totients(1000);
        // 0/1 plus one reduced fraction p/q for each totative p of q
        let mut acc = 1u64;
        for order in 1..=1000usize {
            acc += phi[order];
            if order <= 60 || order % 97 == 0 || order == 1000 {
                assert_eq!(farey_series(2, order).unwrap().len() as u64, acc, "order {order}");
            }
        }
    }

    #[test]
    fn line_formula_examples() {
        assert_eq!(count_lines_formula(2, 3), Ok(16));
        assert_eq!(count_lines_formula(2, 7), Ok(72));
        assert_eq!(count_lines_formula(3, 1), Ok(16));
    }

    #[test]
    fn small_direction_sets() {
        let s = enumerate_directions(2, 1).unwrap();
        let got: HashSet<Vec<i64>> = s.iter().map(|d| d.components().to_vec()).collect();
        let want: HashSet<Vec<i64>> = [[0, 1], [1, 0], [1, 1], [1, -1]]
            .iter()
            .map(|v| v.to_vec())
            .collect();
        assert_eq!(got, want);
        assert_eq!(enumerate_directions(2, 2).unwrap().len(), 8);
        assert_eq!(enumerate_directions(3, 1).unwrap().len(), 13);
    }

    /// Lines through 0 counted by collecting normalized rays of every nonzero point.
    fn brute_line_count(dim: usize, order: i64) -> usize {
        let mut lines = HashSet::new();
        let pts: Vec<Vec<i64>> = if dim == 2 {
            (-order..=order)
                .flat_map(|a| (-order..=order).map(move |b| vec![a, b]))
                .collect()
        } else {
            (-order..=order)
                .flat_map(|a| {
                    (-order..=order).flat_map(move |b| (-order..=order).map(move |c| vec![a, b, c]))
                })
                .collect()
        };
        for p in pts {
            if p.iter().all(|&x| x == 0) {
                continue;
            }
            // lines are identified by the set {p/|p|, -p/|p|}; compare via reduced form
            let g = gcd_abs(&p) as i64;
            let r: Vec<i64> = p.iter().map(|x| x / g).collect();
            let neg: Vec<i64> = r.iter().map(|x| -x).collect();
            lines.insert(if r > neg { r } else { neg });
        }
        lines.len()
    }

    #[test]
    fn direction_count_matches_formula_in_2d() {
        for order in 1..=50 {
            let n = enumerate_directions(2, order).unwrap().len() as i64;
            assert_eq!(n, count_lines_formula(2, order).unwrap(), "order {order}");
            if order <= 12 {
                assert_eq!(n as usize, brute_line_count(2, order as i64));
            }
        }
        for order in 1..=5 {
            assert_eq!(
                enumerate_directions(3, order).unwrap().len(),
                brute_line_count(3, order as i64)
            );
        }
    }

    #[test]
    fn partition_property() {
        for (dim, order) in [(2usize, 10i64), (3, 5)] {
            let set = enumerate_directions(dim, order as usize).unwrap();
            let vs: Vec<Vec<i64>> = if dim == 2 {
                (-order..=order)
                    .flat_map(|a| (-order..=order).map(move |b| vec![a, b]))
                    .collect()
            } else {
                (-order..=order)
                    .flat_map(|a| {
                        (-order..=order)
                            .flat_map(move |b| (-order..=order).map(move |c| vec![a, b, c]))
                    })
                    .collect()
            };
            for k in vs {
                if k.iter().all(|&x| x == 0) {
                    continue;
                }
                let hits: Vec<(usize, i64)> = set
                    .iter()
                    .enumerate()
                    .filter_map(|(p, e)| {
                        let c = e.components();
                        let ax = c.iter().position(|&x| x != 0).unwrap();
                        let m = k[ax] / c[ax];
                        (m != 0 && c.iter().zip(&k).all(|(ci, ki)| m * ci == *ki)).then_some((p, m))
                    })
                    .collect();
                assert_eq!(hits.len(), 1, "{k:?}");
                assert_eq!(set.locate(&k), Some(hits[0]));
            }
        }
    }

    #[test]
    fn direction_invariants() {
        let set = enumerate_directions(3, 4).unwrap();
        assert!(set.dirs.windows(2).all(|w| w[0] < w[1]));
        for e in set.iter() {
            let c = e.components();
            assert_eq!(gcd_abs(c), 1);
            assert!(*c.iter().find(|&&x| x != 0).unwrap() > 0);
            assert!(e.max_norm() <= 4);
        }
    }

    #[test]
    fn asymptotic_ratios() {
        let f1 = farey_series(2, 200).unwrap().len() as f64;
        let r1 = f1 / farey_leading_term(2, 200).unwrap();
        assert!((0.9..=1.1).contains(&r1), "{r1}");
        let f2 = farey_series(3, 100).unwrap().len() as f64;
        let r2 = f2 / farey_leading_term(3, 100).unwrap();
        assert!((0.85..=1.15).contains(&r2), "{r2}");
    }
}
