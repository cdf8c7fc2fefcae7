//! Finite multisets of complex points.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points closer than this are one point of a multiset.
pub const TAU_CLUSTER: f64 = 1e-7;

/// Complex points with positive multiplicities, kept sorted by `(re, im)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64, usize)>", into = "Vec<(f64, f64, usize)>")]
pub struct PointMultiset {
    entries: Vec<(Complex64, usize)>,
}

fn lex_cmp(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

impl PointMultiset {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a multiset from `(point, multiplicity)` pairs, merging points
    /// closer than `tau` (single linkage, multiplicity-weighted centroid).
    pub fn from_entries(entries: Vec<(Complex64, usize)>, tau: f64) -> Result<Self> {
        for (p, m) in &entries {
            if *m == 0 {
                return Err(Error::Precondition(format!(
                    "multiplicity of {p} must be positive"
                )));
            }
            if !p.re.is_finite() || !p.im.is_finite() {
                return Err(Error::Precondition(format!("non-finite point {p}")));
            }
        }
        Ok(Self {
            entries: merge_close(entries, tau),
        })
    }

    /// Each point with multiplicity one, merged at `tau`.
    pub fn from_points(points: &[Complex64], tau: f64) -> Result<Self> {
        Self::from_entries(points.iter().map(|&p| (p, 1)).collect(), tau)
    }

    /// Groups bit-identical points only.
    pub fn from_points_exact(points: &[Complex64]) -> Result<Self> {
        Self::from_points(points, 0.0)
    }

    pub fn singleton(p: Complex64, multiplicity: usize) -> Self {
        Self {
            entries: vec![(p, multiplicity.max(1))],
        }
    }

    /// Total multiplicity.
    pub fn cardinality(&self) -> usize {
        self.entries.iter().map(|(_, m)| m).sum()
    }

    pub fn distinct_len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(Complex64, usize)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (Complex64, usize)> + '_ {
        self.entries.iter().copied()
    }

    /// Every point repeated by its multiplicity.
    pub fn expanded(&self) -> Vec<Complex64> {
        self.entries
            .iter()
            .flat_map(|&(p, m)| std::iter::repeat(p).take(m))
            .collect()
    }

    /// Multiplicity-weighted `sum (1 - |p|)`.
    pub fn blaschke_sum(&self) -> f64 {
        self.entries
            .iter()
            .map(|(p, m)| *m as f64 * (1.0 - p.norm()))
            .sum()
    }

    /// `prod |p|` over points farther than `tau` from the origin (empty
    /// product is 1).
    pub fn modulus_product_excluding_origin(&self, tau: f64) -> f64 {
        self.entries
            .iter()
            .filter(|(p, _)| p.norm() >= tau)
            .map(|(p, m)| p.norm().powi(*m as i32))
            .product()
    }

    /// Multiplicity of the cluster containing `p` (within `tau`).
    pub fn multiplicity_near(&self, p: Complex64, tau: f64) -> usize {
        self.entries
            .iter()
            .filter(|(q, _)| (q - p).norm() <= tau)
            .map(|(_, m)| m)
            .sum()
    }

    /// Distance from `z` to the nearest point, `+inf` for the empty set.
    pub fn distance_to(&self, z: Complex64) -> f64 {
        self.entries
            .iter()
            .map(|(p, _)| (p - z).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// True when `other` is contained in `self`: every point of `other`
    /// is matched within `tau` by points of `self` carrying at least the
    /// same multiplicity.
    pub fn contains_multiset(&self, other: &PointMultiset, tau: f64) -> bool {
        let mut remaining: Vec<usize> = self.entries.iter().map(|(_, m)| *m).collect();
        for &(p, mut need) in &other.entries {
            let mut order: Vec<usize> = (0..self.entries.len())
                .filter(|&i| remaining[i] > 0 && (self.entries[i].0 - p).norm() <= tau)
                .collect();
            order.sort_by(|&i, &j| {
                let di = (self.entries[i].0 - p).norm();
                let dj = (self.entries[j].0 - p).norm();
                di.total_cmp(&dj)
            });
            for i in order {
                let take = need.min(remaining[i]);
                remaining[i] -= take;
                need -= take;
                if need == 0 {
                    break;
                }
            }
            if need > 0 {
                return false;
            }
        }
        true
    }

    /// Multiset equality up to `tau`.
    pub fn approx_eq(&self, other: &PointMultiset, tau: f64) -> bool {
        self.cardinality() == other.cardinality()
            && self.contains_multiset(other, tau)
            && other.contains_multiset(self, tau)
    }

    /// Multiset sum (multiplicities add), merging at `tau`.
    pub fn union(&self, other: &PointMultiset, tau: f64) -> PointMultiset {
        let mut all = self.entries.clone();
        all.extend_from_slice(&other.entries);
        PointMultiset {
            entries: merge_close(all, tau),
        }
    }

    /// Removes the `k` points (with multiplicity) nearest to the origin.
    pub fn without_nearest_to_origin(&self, k: usize) -> Vec<Complex64> {
        let mut pts = self.expanded();
        pts.sort_by(|a, b| a.norm().total_cmp(&b.norm()).then(lex_cmp(a, b)));
        pts.into_iter().skip(k).collect()
    }
}

impl TryFrom<Vec<(f64, f64, usize)>> for PointMultiset {
    type Error = Error;
    fn try_from(v: Vec<(f64, f64, usize)>) -> Result<Self> {
        PointMultiset::from_entries(
            v.into_iter()
                .map(|(re, im, m)| (Complex64::new(re, im), m))
                .collect(),
            0.0,
        )
    }
}

impl From<PointMultiset> for Vec<(f64, f64, usize)> {
    fn from(s: PointMultiset) -> Self {
        s.entries.into_iter().map(|(p, m)| (p.re, p.im, m)).collect()
    }
}

/// Single-linkage group labels at radius `tau` for `points` (labels are
/// dense, in order of first appearance). With `tau == 0` only bit-identical
/// points link.
pub(crate) fn link_groups(points: &[Complex64], tau: f64) -> Vec<usize> {
    let n = points.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| lex_cmp(&points[a], &points[b]));
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for (oi, &i) in order.iter().enumerate() {
        for &j in &order[oi + 1..] {
            // sorted by re: once the real gap exceeds tau nothing further links
            if points[j].re - points[i].re > tau {
                break;
            }
            let close = if tau == 0.0 {
                points[i] == points[j]
            } else {
                (points[i] - points[j]).norm() <= tau
            };
            if close {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    let mut out = vec![0; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if label[r] == usize::MAX {
            label[r] = next;
            next += 1;
        }
        out[i] = label[r];
    }
    out
}

/// Single-linkage merge at `tau`; merged points sit at the
/// multiplicity-weighted centroid. Output is sorted by `(re, im)`.
pub(crate) fn merge_close(entries: Vec<(Complex64, usize)>, tau: f64) -> Vec<(Complex64, usize)> {
    let points: Vec<Complex64> = entries.iter().map(|e| e.0).collect();
    let labels = link_groups(&points, tau);
    let groups = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut acc = vec![(Complex64::new(0.0, 0.0), 0usize); groups];
    for (&(p, m), &g) in entries.iter().zip(&labels) {
        acc[g].0 += p * m as f64;
        acc[g].1 += m;
    }
    let mut out: Vec<(Complex64, usize)> = acc
        .into_iter()
        .map(|(s, m)| (s / m as f64, m))
        .collect();
    out.sort_by(|a, b| lex_cmp(&a.0, &b.0));
    out
}
