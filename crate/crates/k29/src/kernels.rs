//! Admissible kernels on (forecast, datum) pairs — the K29 parameter.
//!
//! A kernel `K((f,x),(f',x'))` is admissible when it is continuous in the
//! forecast argument; every built-in family is. Kernels are evaluated on the
//! concatenated coordinates of the pair, and compositions assign coordinate
//! blocks to factors (products) or share the full space (sums). `C_Φ`, the
//! supremum of the feature norm `√K(z,z)`, feeds every √n bound; it is exact
//! for the families whose diagonal is constant and a flagged upper bound
//! otherwise.

use serde::{Deserialize, Serialize};

use crate::geometry::{ConvexDomain, Vector};
use crate::{Error, Result};

/// A (forecast, datum) pair. The datum may be empty (`datum_dim = 0`) for
/// protocols that carry no side information.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub forecast: Vector,
    pub datum: Vector,
}

impl Point {
    pub fn new(forecast: Vector, datum: Vector) -> Self {
        Self { forecast, datum }
    }

    pub fn without_datum(forecast: Vector) -> Self {
        Self { forecast, datum: Vector::zeros(0) }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Family {
    /// `K ≡ c`.
    Constant(f64),
    /// `exp(−‖z−z'‖² / 2σ²)` over the concatenated coordinates.
    GaussianRbf { bandwidth: f64 },
    /// Product over coordinates of `½·exp(−|z_i − z_i'|)`.
    SobolevExp,
    /// `⟨z, z'⟩` over the concatenated coordinates.
    Linear,
    /// Product of factors over disjoint coordinate blocks, in order.
    Product(Vec<Kernel>),
    /// Weighted sum of kernels on the same coordinate space.
    Sum(Vec<(f64, Kernel)>),
}

/// A symmetric positive-semidefinite kernel with fixed forecast and datum
/// dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    family: Family,
    forecast_dim: usize,
    datum_dim: usize,
}

/// Upper bound on `C_Φ = sup √K(z,z)`, with a flag telling whether the
/// bound is attained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CphiBound {
    pub value: f64,
    pub exact: bool,
}

impl Kernel {
    pub fn constant(value: f64, forecast_dim: usize, datum_dim: usize) -> Result<Self> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::Invalid(format!(
                "constant kernel requires value >= 0, got {value}"
            )));
        }
        Self::leaf(Family::Constant(value), forecast_dim, datum_dim)
    }

    pub fn gaussian_rbf(bandwidth: f64, forecast_dim: usize, datum_dim: usize) -> Result<Self> {
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(Error::Invalid(format!(
                "gaussian rbf kernel requires bandwidth > 0, got {bandwidth}"
            )));
        }
        Self::leaf(Family::GaussianRbf { bandwidth }, forecast_dim, datum_dim)
    }

    pub fn sobolev_exp(forecast_dim: usize, datum_dim: usize) -> Result<Self> {
        Self::leaf(Family::SobolevExp, forecast_dim, datum_dim)
    }

    pub fn linear(forecast_dim: usize, datum_dim: usize) -> Result<Self> {
        Self::leaf(Family::Linear, forecast_dim, datum_dim)
    }

    fn leaf(family: Family, forecast_dim: usize, datum_dim: usize) -> Result<Self> {
        if forecast_dim == 0 {
            return Err(Error::Invalid("kernel forecast_dim must be positive".into()));
        }
        Ok(Self { family, forecast_dim, datum_dim })
    }

    /// Coordinate-block product: factor `i` sees the `i`-th block of
    /// forecast coordinates and the `i`-th block of datum coordinates.
    pub fn product(factors: Vec<Kernel>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Invalid("product kernel requires factors".into()));
        }
        let forecast_dim = factors.iter().map(|k| k.forecast_dim).sum();
        let datum_dim = factors.iter().map(|k| k.datum_dim).sum();
        Ok(Self { family: Family::Product(factors), forecast_dim, datum_dim })
    }

    /// Weighted sum of kernels over one shared coordinate space.
    pub fn sum(terms: Vec<(f64, Kernel)>) -> Result<Self> {
        let Some((_, first)) = terms.first() else {
            return Err(Error::Invalid("sum kernel requires terms".into()));
        };
        let (fd, dd) = (first.forecast_dim, first.datum_dim);
        for (w, k) in &terms {
            if !(w.is_finite() && *w >= 0.0) {
                return Err(Error::Invalid(format!("sum kernel weight must be >= 0, got {w}")));
            }
            if k.forecast_dim != fd || k.datum_dim != dd {
                return Err(Error::Invalid(
                    "sum kernel terms must share forecast and datum dims".into(),
                ));
            }
        }
        Ok(Self { family: Family::Sum(terms), forecast_dim: fd, datum_dim: dd })
    }

    pub fn forecast_dim(&self) -> usize {
        self.forecast_dim
    }

    pub fn datum_dim(&self) -> usize {
        self.datum_dim
    }

    fn check_point(&self, p: &Point) -> Result<()> {
        if p.forecast.dim() != self.forecast_dim {
            return Err(Error::DimensionMismatch {
                expected: self.forecast_dim,
                got: p.forecast.dim(),
            });
        }
        if p.datum.dim() != self.datum_dim {
            return Err(Error::DimensionMismatch {
                expected: self.datum_dim,
                got: p.datum.dim(),
            });
        }
        Ok(())
    }

    /// `K(a, b)`.
    pub fn eval(&self, a: &Point, b: &Point) -> Result<f64> {
        self.check_point(a)?;
        self.check_point(b)?;
        Ok(self.eval_unchecked(
            a.forecast.coords(),
            a.datum.coords(),
            b.forecast.coords(),
            b.datum.coords(),
        ))
    }

    /// Evaluation on pre-validated coordinate slices. This is the hot path
    /// of the field solver and the Gram accumulator.
    pub(crate) fn eval_unchecked(&self, af: &[f64], ax: &[f64], bf: &[f64], bx: &[f64]) -> f64 {
        match &self.family {
            Family::Constant(c) => *c,
            Family::GaussianRbf { bandwidth } => {
                let mut dist_sq = 0.0;
                for (a, b) in af.iter().zip(bf).chain(ax.iter().zip(bx)) {
                    let d = a - b;
                    dist_sq += d * d;
                }
                (-dist_sq / (2.0 * bandwidth * bandwidth)).exp()
            }
            Family::SobolevExp => {
                let mut l1 = 0.0;
                for (a, b) in af.iter().zip(bf).chain(ax.iter().zip(bx)) {
                    l1 += (a - b).abs();
                }
                let d = (af.len() + ax.len()) as i32;
                0.5f64.powi(d) * (-l1).exp()
            }
            Family::Linear => {
                let mut dot = 0.0;
                for (a, b) in af.iter().zip(bf).chain(ax.iter().zip(bx)) {
                    dot += a * b;
                }
                dot
            }
            Family::Product(factors) => {
                let mut out = 1.0;
                let (mut fo, mut xo) = (0, 0);
                for k in factors {
                    let (fd, dd) = (k.forecast_dim, k.datum_dim);
                    out *= k.eval_unchecked(
                        &af[fo..fo + fd],
                        &ax[xo..xo + dd],
                        &bf[fo..fo + fd],
                        &bx[xo..xo + dd],
                    );
                    fo += fd;
                    xo += dd;
                }
                out
            }
            Family::Sum(terms) => terms
                .iter()
                .map(|(w, k)| w * k.eval_unchecked(af, ax, bf, bx))
                .sum(),
        }
    }

    /// `C_Φ = sup √K(z,z)` over `domain × datum_box`. Exact for the
    /// constant-diagonal families and their products; flagged as an upper
    /// bound otherwise. `datum_box` may be omitted when the diagonal does
    /// not depend on the datum.
    pub fn c_phi(
        &self,
        domain: &ConvexDomain,
        datum_box: Option<&[(f64, f64)]>,
    ) -> Result<CphiBound> {
        if domain.dim() != self.forecast_dim {
            return Err(Error::DimensionMismatch {
                expected: self.forecast_dim,
                got: domain.dim(),
            });
        }
        if let Some(bounds) = datum_box {
            if bounds.len() != self.datum_dim {
                return Err(Error::DimensionMismatch {
                    expected: self.datum_dim,
                    got: bounds.len(),
                });
            }
        }
        match &self.family {
            Family::Constant(c) => Ok(CphiBound { value: c.sqrt(), exact: true }),
            Family::GaussianRbf { .. } => Ok(CphiBound { value: 1.0, exact: true }),
            Family::SobolevExp => {
                let d = (self.forecast_dim + self.datum_dim) as f64;
                Ok(CphiBound { value: 0.5f64.powf(0.5 * d), exact: true })
            }
            Family::Linear => {
                let datum_norm_sq = if self.datum_dim == 0 {
                    0.0
                } else {
                    let bounds = datum_box.ok_or_else(|| {
                        Error::CphiUnavailable(
                            "linear kernel with a datum block needs datum bounds".into(),
                        )
                    })?;
                    bounds
                        .iter()
                        .map(|(lo, hi)| (lo * lo).max(hi * hi))
                        .sum::<f64>()
                };
                Ok(CphiBound {
                    value: (domain.max_norm_sq() + datum_norm_sq).sqrt(),
                    exact: true,
                })
            }
            Family::Product(factors) => {
                // Each factor owns a coordinate block; with constant
                // diagonals the product of per-block suprema is attained.
                let mut value = 1.0;
                for k in factors {
                    let c = k.diag_sup().ok_or_else(|| {
                        Error::CphiUnavailable(
                            "product factor has no domain-free feature bound".into(),
                        )
                    })?;
                    value *= c;
                }
                Ok(CphiBound { value, exact: self.has_constant_diag() })
            }
            Family::Sum(terms) => {
                let mut total = 0.0;
                let mut exact = true;
                for (w, k) in terms {
                    let b = k.c_phi(domain, datum_box)?;
                    total += w * b.value * b.value;
                    exact &= b.exact && k.has_constant_diag();
                }
                Ok(CphiBound { value: total.sqrt(), exact })
            }
        }
    }

    /// Whether `K(z,z)` is the same for every `z`. Those families attain
    /// their `C_Φ` everywhere, which makes composition bounds exact.
    fn has_constant_diag(&self) -> bool {
        match &self.family {
            Family::Constant(_) | Family::GaussianRbf { .. } | Family::SobolevExp => true,
            Family::Linear => false,
            Family::Product(factors) => factors.iter().all(Kernel::has_constant_diag),
            Family::Sum(terms) => terms.iter().all(|(_, k)| k.has_constant_diag()),
        }
    }

    /// `sup_z √K(z,z)` independent of any particular domain, when the
    /// family admits one. Used to normalize solver tolerances.
    pub(crate) fn diag_sup(&self) -> Option<f64> {
        match &self.family {
            Family::Constant(c) => Some(c.sqrt()),
            Family::GaussianRbf { .. } => Some(1.0),
            Family::SobolevExp => {
                Some(0.5f64.powf(0.5 * (self.forecast_dim + self.datum_dim) as f64))
            }
            Family::Linear => None,
            Family::Product(factors) => {
                factors.iter().try_fold(1.0, |acc, k| Some(acc * k.diag_sup()?))
            }
            Family::Sum(terms) => terms
                .iter()
                .try_fold(0.0, |acc, (w, k)| {
                    let c = k.diag_sup()?;
                    Some(acc + w * c * c)
                })
                .map(f64::sqrt),
        }
    }

    pub fn spec(&self) -> KernelSpec {
        match &self.family {
            Family::Constant(c) => KernelSpec::Constant {
                value: *c,
                forecast_dim: self.forecast_dim,
                datum_dim: self.datum_dim,
            },
            Family::GaussianRbf { bandwidth } => KernelSpec::GaussianRbf {
                bandwidth: *bandwidth,
                forecast_dim: self.forecast_dim,
                datum_dim: self.datum_dim,
            },
            Family::SobolevExp => KernelSpec::SobolevExp {
                forecast_dim: self.forecast_dim,
                datum_dim: self.datum_dim,
            },
            Family::Linear => KernelSpec::Linear {
                forecast_dim: self.forecast_dim,
                datum_dim: self.datum_dim,
            },
            Family::Product(factors) => KernelSpec::Product {
                factors: factors.iter().map(Kernel::spec).collect(),
            },
            Family::Sum(terms) => KernelSpec::Sum {
                terms: terms
                    .iter()
                    .map(|(w, k)| WeightedKernelSpec { weight: *w, kernel: k.spec() })
                    .collect(),
            },
        }
    }

    pub fn from_spec(spec: &KernelSpec) -> Result<Self> {
        match spec {
            KernelSpec::Constant { value, forecast_dim, datum_dim } => {
                Kernel::constant(*value, *forecast_dim, *datum_dim)
            }
            KernelSpec::GaussianRbf { bandwidth, forecast_dim, datum_dim } => {
                Kernel::gaussian_rbf(*bandwidth, *forecast_dim, *datum_dim)
            }
            KernelSpec::SobolevExp { forecast_dim, datum_dim } => {
                Kernel::sobolev_exp(*forecast_dim, *datum_dim)
            }
            KernelSpec::Linear { forecast_dim, datum_dim } => {
                Kernel::linear(*forecast_dim, *datum_dim)
            }
            KernelSpec::Product { factors } => {
                Kernel::product(factors.iter().map(Kernel::from_spec).collect::<Result<_>>()?)
            }
            KernelSpec::Sum { terms } => Kernel::sum(
                terms
                    .iter()
                    .map(|t| Ok((t.weight, Kernel::from_spec(&t.kernel)?)))
                    .collect::<Result<_>>()?,
            ),
        }
    }
}

/// Serializable kernel description: family name, parameters and the
/// coordinate-block assignment. Used in run configs and transcripts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelSpec {
    Constant {
        value: f64,
        forecast_dim: usize,
        #[serde(default)]
        datum_dim: usize,
    },
    GaussianRbf {
        bandwidth: f64,
        forecast_dim: usize,
        #[serde(default)]
        datum_dim: usize,
    },
    SobolevExp {
        forecast_dim: usize,
        #[serde(default)]
        datum_dim: usize,
    },
    Linear {
        forecast_dim: usize,
        #[serde(default)]
        datum_dim: usize,
    },
    Product { factors: Vec<KernelSpec> },
    Sum { terms: Vec<WeightedKernelSpec> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedKernelSpec {
    pub weight: f64,
    pub kernel: KernelSpec,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn pt(f: &[f64], x: &[f64]) -> Point {
        Point::new(Vector::new(f.to_vec()).unwrap(), Vector::new(x.to_vec()).unwrap())
    }

    #[test]
    fn sobolev_exp_values() {
        let k = Kernel::sobolev_exp(1, 0).unwrap();
        let a = pt(&[0.0], &[]);
        let b = pt(&[1.0], &[]);
        assert!((k.eval(&a, &a).unwrap() - 0.5).abs() < 1e-15);
        assert!((k.eval(&a, &b).unwrap() - 0.5 * (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn constant_kernel_value() {
        let k = Kernel::constant(1.0, 1, 0).unwrap();
        assert_eq!(k.eval(&pt(&[0.2], &[]), &pt(&[0.9], &[])).unwrap(), 1.0);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let k = Kernel::sobolev_exp(1, 1).unwrap();
        assert!(k.eval(&pt(&[0.0], &[]), &pt(&[0.0], &[])).is_err());
    }

    #[test]
    fn c_phi_values() {
        let domain = ConvexDomain::interval(0.0, 1.0).unwrap();

        let sobolev = Kernel::sobolev_exp(1, 0).unwrap();
        let b = sobolev.c_phi(&domain, None).unwrap();
        assert!((b.value - 1.0 / 2.0f64.sqrt()).abs() < 1e-15);
        assert!(b.exact);

        let rbf = Kernel::gaussian_rbf(1.0, 1, 0).unwrap();
        assert_eq!(rbf.c_phi(&domain, None).unwrap().value, 1.0);

        // Two-coordinate Sobolev: grid oracle maximizing √K(z,z) over a box.
        let sob2 = Kernel::sobolev_exp(1, 1).unwrap();
        let mut oracle = 0.0f64;
        let mut f = 0.0;
        while f <= 1.0 {
            let mut x = 0.0;
            while x <= 1.0 {
                let p = pt(&[f], &[x]);
                oracle = oracle.max(sob2.eval(&p, &p).unwrap().sqrt());
                x += 1e-3;
            }
            f += 1e-3;
        }
        let b2 = sob2.c_phi(&domain, Some(&[(0.0, 1.0)])).unwrap();
        assert!((b2.value - oracle).abs() < 1e-12);
        assert!((b2.value - 0.5).abs() < 1e-15);
    }

    #[test]
    fn c_phi_linear_needs_datum_bounds() {
        let domain = ConvexDomain::interval(0.0, 1.0).unwrap();
        let k = Kernel::linear(1, 1).unwrap();
        assert!(matches!(k.c_phi(&domain, None), Err(Error::CphiUnavailable(_))));
        let b = k.c_phi(&domain, Some(&[(-2.0, 1.0)])).unwrap();
        assert!((b.value - 5.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn composition_bounds() {
        // Product of two 1-coordinate Sobolev blocks equals the
        // 2-coordinate Sobolev kernel, including its C_Φ.
        let prod = Kernel::product(vec![
            Kernel::sobolev_exp(1, 0).unwrap(),
            Kernel::sobolev_exp(1, 1).unwrap(),
        ])
        .unwrap();
        assert_eq!(prod.forecast_dim(), 2);
        assert_eq!(prod.datum_dim(), 1);
        let domain = ConvexDomain::boxed(vec![(0.0, 1.0), (0.0, 1.0)]).unwrap();
        let b = prod.c_phi(&domain, Some(&[(0.0, 1.0)])).unwrap();
        assert!((b.value - 0.5f64.powf(1.5)).abs() < 1e-15);
        assert!(b.exact);

        let sum = Kernel::sum(vec![
            (0.5, Kernel::constant(1.0, 1, 0).unwrap()),
            (2.0, Kernel::sobolev_exp(1, 0).unwrap()),
        ])
        .unwrap();
        let domain1 = ConvexDomain::interval(0.0, 1.0).unwrap();
        let b = sum.c_phi(&domain1, None).unwrap();
        assert!((b.value - (0.5f64 + 2.0 * 0.5).sqrt()).abs() < 1e-12);
    }

    fn sample_kernels() -> Vec<Kernel> {
        vec![
            Kernel::constant(1.0, 1, 0).unwrap(),
            Kernel::gaussian_rbf(1.0, 2, 1).unwrap(),
            Kernel::sobolev_exp(1, 1).unwrap(),
            Kernel::linear(2, 0).unwrap(),
            Kernel::product(vec![
                Kernel::sobolev_exp(1, 0).unwrap(),
                Kernel::gaussian_rbf(0.7, 1, 1).unwrap(),
            ])
            .unwrap(),
            Kernel::sum(vec![
                (1.0, Kernel::constant(0.5, 1, 1).unwrap()),
                (0.3, Kernel::sobolev_exp(1, 1).unwrap()),
            ])
            .unwrap(),
        ]
    }

    fn random_point(rng: &mut ChaCha12Rng, k: &Kernel) -> Point {
        let f: Vec<f64> = (0..k.forecast_dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x: Vec<f64> = (0..k.datum_dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        pt(&f, &x)
    }

    #[test]
    fn symmetry_and_cauchy_schwarz() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for k in sample_kernels() {
            for _ in 0..50 {
                let a = random_point(&mut rng, &k);
                let b = random_point(&mut rng, &k);
                let kab = k.eval(&a, &b).unwrap();
                let kba = k.eval(&b, &a).unwrap();
                assert!((kab - kba).abs() <= 1e-15 * (1.0 + kab.abs()));
                let kaa = k.eval(&a, &a).unwrap();
                let kbb = k.eval(&b, &b).unwrap();
                assert!(kab * kab <= kaa * kbb + 1e-12);
            }
        }
    }

    #[test]
    fn diagonal_below_c_phi() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for k in sample_kernels() {
            let domain = if k.forecast_dim() == 1 {
                ConvexDomain::interval(-1.0, 1.0).unwrap()
            } else {
                ConvexDomain::boxed(vec![(-1.0, 1.0); k.forecast_dim()]).unwrap()
            };
            let datum_box = vec![(-1.0, 1.0); k.datum_dim()];
            let bound = k.c_phi(&domain, Some(&datum_box)).unwrap();
            for _ in 0..50 {
                let a = random_point(&mut rng, &k);
                assert!(k.eval(&a, &a).unwrap() <= bound.value * bound.value + 1e-12);
            }
        }
    }

    /// Jacobi eigenvalue sweeps for small symmetric matrices; test-only.
    #[allow(clippy::needless_range_loop)]
    fn min_eigenvalue(mut m: Vec<Vec<f64>>) -> f64 {
        let n = m.len();
        for _ in 0..100 {
            let mut off = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    off += m[i][j] * m[i][j];
                }
            }
            if off < 1e-24 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if m[p][q].abs() < 1e-18 {
                        continue;
                    }
                    let theta = 0.5 * (m[q][q] - m[p][p]) / m[p][q];
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for i in 0..n {
                        let (mip, miq) = (m[i][p], m[i][q]);
                        m[i][p] = c * mip - s * miq;
                        m[i][q] = s * mip + c * miq;
                    }
                    for i in 0..n {
                        let (mpi, mqi) = (m[p][i], m[q][i]);
                        m[p][i] = c * mpi - s * mqi;
                        m[q][i] = s * mpi + c * mqi;
                    }
                }
            }
        }
        (0..n).map(|i| m[i][i]).fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn gram_matrices_are_psd() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        for k in sample_kernels() {
            for _ in 0..5 {
                let n = rng.random_range(2..=20);
                let points: Vec<Point> = (0..n).map(|_| random_point(&mut rng, &k)).collect();
                let mut gram = vec![vec![0.0; n]; n];
                let mut trace = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        gram[i][j] = k.eval(&points[i], &points[j]).unwrap();
                    }
                    trace += gram[i][i];
                }
                let min_eig = min_eigenvalue(gram);
                assert!(
                    min_eig >= -1e-8 * trace,
                    "min eigenvalue {min_eig} below PSD tolerance for {k:?}"
                );
            }
        }
    }

    #[test]
    fn continuity_in_forecast_argument() {
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        for k in sample_kernels() {
            let a = random_point(&mut rng, &k);
            let b = random_point(&mut rng, &k);
            let base = k.eval(&a, &b).unwrap();
            let mut delta = 0.1;
            let mut prev_diff = f64::INFINITY;
            for _ in 0..6 {
                let mut f = a.forecast.coords().to_vec();
                f[0] += delta;
                let shifted = Point::new(Vector::new(f).unwrap(), a.datum.clone());
                let diff = (k.eval(&shifted, &b).unwrap() - base).abs();
                // Halving the perturbation must (at least) roughly halve the
                // difference for these Lipschitz families.
                assert!(diff <= 0.75 * prev_diff + 1e-12, "kernel {k:?} not continuous");
                prev_diff = diff.max(1e-300);
                delta *= 0.5;
            }
        }
    }

    #[test]
    fn spec_round_trip() {
        for k in sample_kernels() {
            let spec = k.spec();
            let back = Kernel::from_spec(&spec).unwrap();
            assert_eq!(k, back);
        }
    }
}
