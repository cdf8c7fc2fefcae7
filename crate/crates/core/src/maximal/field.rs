//! Sampled conformal densities and their curvature.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::hyperbolic::{density, EvaluableMap, MAX_MODULUS};
use crate::multiset::PointMultiset;
use crate::par;

/// Default radius of the closed subdisk a disk grid covers.
pub const DEFAULT_R_MAX: f64 = 0.8;

/// Values at or below this are treated as zeros of the density.
pub const MIN_DENSITY: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GridSpec {
    /// Square lattice of spacing `h` through the origin, clipped to `|z| ≤ r_max`.
    Disk { h: f64, r_max: f64 },
    /// `(2 half + 1)^2` lattice points of spacing `h` around `center`.
    Patch { center: [f64; 2], h: f64, half: usize },
}

impl GridSpec {
    pub fn disk(h: f64) -> Self {
        GridSpec::Disk {
            h,
            r_max: DEFAULT_R_MAX,
        }
    }

    /// 5×5 patch, enough for the extrapolated stencil at `center`.
    pub fn probe(center: Complex64, h: f64) -> Self {
        GridSpec::Patch {
            center: [center.re, center.im],
            h,
            half: 2,
        }
    }

    /// The lattice points the grid samples, row by row.
    pub fn points(&self) -> Vec<Complex64> {
        let (center, h, half, r_max) = self.layout();
        let side = 2 * half + 1;
        (0..side * side)
            .map(|idx| lattice_point(center, h, half, idx % side, idx / side))
            .filter(|z| z.norm() <= r_max)
            .collect()
    }

    fn layout(&self) -> (Complex64, f64, usize, f64) {
        match *self {
            GridSpec::Disk { h, r_max } => (
                Complex64::new(0.0, 0.0),
                h,
                (r_max / h).floor() as usize,
                r_max.min(MAX_MODULUS),
            ),
            GridSpec::Patch { center, h, half } => {
                (Complex64::new(center[0], center[1]), h, half, MAX_MODULUS)
            }
        }
    }
}

/// Density samples `λ(z)` on a square lattice; `None` marks lattice points
/// outside the sampled region.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudometricField {
    center: Complex64,
    h: f64,
    half: usize,
    values: Vec<Option<f64>>,
    zero_set: PointMultiset,
}

impl PseudometricField {
    pub fn from_density<F>(spec: GridSpec, zero_set: PointMultiset, lambda: F) -> Self
    where
        F: Fn(Complex64) -> f64 + Sync + Send,
    {
        let (center, h, half, r_max) = spec.layout();
        assert!(h > 0.0, "grid spacing must be positive");
        let side = 2 * half + 1;
        let values = par::map_indexed(side * side, |idx| {
            let z = lattice_point(center, h, half, idx % side, idx / side);
            if z.norm() > r_max {
                return None;
            }
            let v = lambda(z);
            (v.is_finite() && v >= 0.0).then_some(v)
        });
        PseudometricField {
            center,
            h,
            half,
            values,
            zero_set,
        }
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn zero_set(&self) -> &PointMultiset {
        &self.zero_set
    }

    fn side(&self) -> usize {
        2 * self.half + 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn point(&self, ix: usize, iy: usize) -> Complex64 {
        lattice_point(self.center, self.h, self.half, ix, iy)
    }

    fn value_at(&self, ix: isize, iy: isize) -> Option<f64> {
        let side = self.side() as isize;
        if ix < 0 || iy < 0 || ix >= side || iy >= side {
            return None;
        }
        self.values[(iy * side + ix) as usize]
    }

    /// Sampled points and values, row by row.
    pub fn samples(&self) -> impl Iterator<Item = (Complex64, f64)> + '_ {
        let side = self.side();
        self.values
            .iter()
            .enumerate()
            .filter_map(move |(idx, v)| v.map(|v| (self.point(idx % side, idx / side), v)))
    }

    /// The value at the lattice point nearest the center of a patch.
    pub fn center_value(&self) -> Option<f64> {
        self.value_at(self.half as isize, self.half as isize)
    }

    /// Pointwise map of the values (e.g. scaling by a constant).
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        PseudometricField {
            values: self.values.iter().map(|v| v.map(&f)).collect(),
            ..self.clone()
        }
    }
}

fn lattice_point(center: Complex64, h: f64, half: usize, ix: usize, iy: usize) -> Complex64 {
    center
        + Complex64::new(
            h * (ix as f64 - half as f64),
            h * (iy as f64 - half as f64),
        )
}

/// `λ_f(z) = |f'(z)| / (1 - |f(z)|^2)` sampled on `spec`, with the given
/// zero set (the critical set of `f`).
pub fn lambda_field<M: EvaluableMap + ?Sized>(
    f: &M,
    spec: GridSpec,
    zero_set: PointMultiset,
) -> PseudometricField {
    PseudometricField::from_density(spec, zero_set, |z| density(f, z))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stencil {
    /// Plain five-point Laplacian, error `O(h^2)`.
    FivePoint,
    /// Five-point Laplacians at `h` and `2h` combined as `(4 L_h - L_2h)/3`,
    /// error `O(h^4)`.
    #[default]
    Richardson,
}

impl Stencil {
    fn reach(self) -> isize {
        match self {
            Stencil::FivePoint => 1,
            Stencil::Richardson => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureSample {
    pub z: Complex64,
    pub lambda: f64,
    /// `None` where the stencil leaves the field, meets a vanishing value,
    /// or comes within `3h` of the zero set.
    pub kappa: Option<f64>,
}

impl CurvatureSample {
    pub fn excluded(&self) -> bool {
        self.kappa.is_none()
    }
}

/// `κ = -Δ(log λ) / λ^2` at every sampled point.
pub fn curvature(field: &PseudometricField, stencil: Stencil) -> Vec<CurvatureSample> {
    let side = field.side();
    let h = field.h;
    let reach = stencil.reach();
    let margin = 3.0 * h;
    let log_at = |ix: isize, iy: isize| -> Option<f64> {
        field
            .value_at(ix, iy)
            .filter(|&v| v > MIN_DENSITY)
            .map(f64::ln)
    };
    let laplacian = |ix: isize, iy: isize, s: isize, center: f64| -> Option<f64> {
        let sum = log_at(ix + s, iy)? + log_at(ix - s, iy)? + log_at(ix, iy + s)? + log_at(ix, iy - s)?;
        let hs = h * s as f64;
        Some((sum - 4.0 * center) / (hs * hs))
    };
    let rows = par::map_indexed(side * side, |idx| {
        let (ix, iy) = ((idx % side) as isize, (idx / side) as isize);
        let lambda = field.value_at(ix, iy)?;
        let z = field.point(ix as usize, iy as usize);
        let kappa = (|| {
            if field.zero_set.distance_to(z) < margin {
                return None;
            }
            let c = log_at(ix, iy)?;
            let lap = match stencil {
                Stencil::FivePoint => laplacian(ix, iy, 1, c)?,
                Stencil::Richardson => {
                    (4.0 * laplacian(ix, iy, 1, c)? - laplacian(ix, iy, reach, c)?) / 3.0
                }
            };
            Some(-lap / (lambda * lambda))
        })();
        Some(CurvatureSample { z, lambda, kappa })
    });
    rows.into_iter().flatten().collect()
}

/// Curvature at the center of a 5×5 probe patch of spacing `h`.
pub fn curvature_at<F>(lambda: F, zero_set: &PointMultiset, z: Complex64, h: f64) -> Option<f64>
where
    F: Fn(Complex64) -> f64 + Sync + Send,
{
    let field = PseudometricField::from_density(GridSpec::probe(z, h), zero_set.clone(), lambda);
    curvature(&field, Stencil::Richardson)[12].kappa
}
