//! Linear theory of the preconditioned DR iteration for monotone matrices.
//!
//! For linear `A`, `B` and a positive diagonal `Δ` the iteration is
//! `w⁺ = F_Δ w` with `F_Δ = I + J_{ΔB}(2J_{ΔA} − I) − J_{ΔA}`, similar to
//! `H_Δ = J_{ΔA}(ΔA + J_{ΔB}(I − ΔA))`. Every eigenvalue of `H_Δ` lies in the
//! disc of radius ½ centred at ½, and an eigenvalue `λ ≠ 1` with eigenvector
//! `z` satisfies the sharper `|λ − ½|² ≤ ¼ − c/(1 + 2c)` with
//! `c = Re⟨Az, z⟩ / (‖z‖²_{Δ⁻¹} + ‖Az‖²_Δ)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    block_diag, eig_all, eig_pairs, lu_solve_matrix, ComplexScalar, ComplexVector, DenseMatrix, Vector,
};

/// Relative tolerance of the `H_Δ` product-form consistency check.
pub const H_IDENTITY_TOL: f64 = 1e-10;
/// Slack used by the disc checks.
pub const DISC_TOL: f64 = 1e-8;
/// Eigenvalues this close to 1 are exempt from the `c`-bound.
pub const UNIT_EIGENVALUE_TOL: f64 = 1e-8;

/// `A = diag(A₁, A₂⁻¹)` and `B = [[0, Kᵀ], [−K, 0]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMonotonePair {
    pub a: DenseMatrix,
    pub b: DenseMatrix,
    pub n: usize,
    pub m: usize,
}

impl LinearMonotonePair {
    /// `a1` is `n × n`, `a2_inv` is `m × m` and `k` is `m × n`.
    pub fn from_blocks(a1: &DenseMatrix, a2_inv: &DenseMatrix, k: &DenseMatrix) -> Result<Self> {
        let (n, m) = (a1.nrows(), a2_inv.nrows());
        if a1.ncols() != n || a2_inv.ncols() != m {
            return Err(Error::NotSquare { rows: a1.nrows(), cols: a1.ncols() });
        }
        if k.nrows() != m || k.ncols() != n {
            return Err(Error::DimensionMismatch { expected: m * n, got: k.nrows() * k.ncols() });
        }
        let a = block_diag(a1, a2_inv);
        let mut b = DenseMatrix::zeros(n + m, n + m);
        b.view_mut((0, n), (n, m)).copy_from(&k.transpose());
        b.view_mut((n, 0), (m, n)).copy_from(&(-k));
        Ok(Self { a, b, n, m })
    }

    /// Arbitrary square `A`, `B` of equal size (no block structure).
    pub fn general(a: DenseMatrix, b: DenseMatrix) -> Result<Self> {
        if a.nrows() != a.ncols() || b.shape() != a.shape() {
            return Err(Error::NotSquare { rows: b.nrows(), cols: b.ncols() });
        }
        let n = a.nrows();
        Ok(Self { a, b, n, m: 0 })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn a1(&self) -> DenseMatrix {
        self.a.view((0, 0), (self.n, self.n)).into_owned()
    }

    pub fn a2_inv(&self) -> DenseMatrix {
        self.a.view((self.n, self.n), (self.m, self.m)).into_owned()
    }

    /// `Δ = diag(t I_n, s I_m)`.
    pub fn block_delta(&self, t: f64, s: f64) -> Vector {
        Vector::from_fn(self.dim(), |i, _| if i < self.n { t } else { s })
    }

    /// Smallest `⟨Mv, v⟩/‖v‖²` over the probes, for `M = A` and `M = B`.
    pub fn monotonicity_margins(&self, probes: &[Vector]) -> (f64, f64) {
        let margin = |m: &DenseMatrix| {
            probes
                .iter()
                .map(|v| (m * v).dot(v) / v.norm_squared())
                .fold(f64::INFINITY, f64::min)
        };
        (margin(&self.a), margin(&self.b))
    }

    /// `max |B + Bᵀ|`.
    pub fn skew_defect(&self) -> f64 {
        (&self.b + self.b.transpose()).amax()
    }
}

fn check_delta(pair: &LinearMonotonePair, delta: &Vector) -> Result<()> {
    if delta.len() != pair.dim() {
        return Err(Error::DimensionMismatch { expected: pair.dim(), got: delta.len() });
    }
    if let Some(bad) = delta.iter().find(|d| !(**d > 0.0)) {
        return Err(crate::error::invalid("delta", format!("entries must be positive, got {bad}")));
    }
    Ok(())
}

fn scale_rows(delta: &Vector, m: &DenseMatrix) -> DenseMatrix {
    DenseMatrix::from_fn(m.nrows(), m.ncols(), |i, j| delta[i] * m[(i, j)])
}

/// `H_Δ = (I + ΔA)⁻¹(ΔA + (I + ΔB)⁻¹(I − ΔA))`, cross-checked against
/// `(I + Ã + B̃ + B̃Ã)⁻¹(I + B̃Ã)` with `Ã = ΔA`, `B̃ = ΔB`.
pub fn build_h(pair: &LinearMonotonePair, delta: &Vector) -> Result<DenseMatrix> {
    check_delta(pair, delta)?;
    let n = pair.dim();
    let id = DenseMatrix::identity(n, n);
    let at = scale_rows(delta, &pair.a);
    let bt = scale_rows(delta, &pair.b);

    let inner = lu_solve_matrix(&(&id + &bt), &(&id - &at), "I + ΔB")?;
    let h = lu_solve_matrix(&(&id + &at), &(&at + inner), "I + ΔA")?;

    let bta = &bt * &at;
    let h_alt = lu_solve_matrix(&(&id + &at + &bt + &bta), &(&id + &bta), "I + Ã + B̃ + B̃Ã")?;
    let gap = (&h - &h_alt).norm() / h.norm().max(1.0);
    if gap > H_IDENTITY_TOL {
        return Err(Error::Inconsistent { context: "H_Δ product form", gap });
    }
    Ok(h)
}

/// `F_Δ = I + J_{ΔB}(2J_{ΔA} − I) − J_{ΔA}`.
pub fn build_f(pair: &LinearMonotonePair, delta: &Vector) -> Result<DenseMatrix> {
    check_delta(pair, delta)?;
    let n = pair.dim();
    let id = DenseMatrix::identity(n, n);
    let ja = lu_solve_matrix(&(&id + scale_rows(delta, &pair.a)), &id, "I + ΔA")?;
    let jb = lu_solve_matrix(&(&id + scale_rows(delta, &pair.b)), &id, "I + ΔB")?;
    Ok(&id + &jb * (&ja * 2.0 - &id) - ja)
}

/// `Re⟨Az, z⟩ / (‖z‖²_{Δ⁻¹} + ‖Az‖²_Δ)` for complex `z`, with the
/// conjugate-bilinear pairing `⟨u, v⟩ = Σ uᵢ v̄ᵢ`.
///
/// Negative values down to `−1e-12` are rounded up to zero; anything more
/// negative is returned as is and means `A` is not monotone.
pub fn c_value(a: &DenseMatrix, delta: &Vector, z: &ComplexVector) -> Result<f64> {
    if z.iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
        return Err(Error::ZeroVector);
    }
    if a.nrows() != z.len() || delta.len() != z.len() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: z.len() });
    }
    let ac = a.map(|v| Complex64::new(v, 0.0));
    let az = &ac * z;
    let num: f64 = az.iter().zip(z.iter()).map(|(u, v)| (u * v.conj()).re).sum();
    let den: f64 = (0..z.len())
        .map(|i| z[i].norm_sqr() / delta[i] + delta[i] * az[i].norm_sqr())
        .sum();
    let c = num / den;
    Ok(if (-1e-12..0.0).contains(&c) { 0.0 } else { c })
}

/// `sqrt(max(0, ¼ − c/(1 + 2c)))`.
pub fn disc_radius(c: f64) -> f64 {
    (0.25 - c / (1.0 + 2.0 * c)).max(0.0).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenRecord {
    pub lambda: ComplexScalar,
    pub c: f64,
    pub disc_bound: f64,
    /// `|λ − ½|`.
    pub distance: f64,
    /// `|λ − 1| ≤ 1e-8`: reported but not held to the `c`-bound.
    pub exempt: bool,
    pub contained: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    pub records: Vec<EigenRecord>,
    pub spectral_radius: f64,
}

impl SpectralReport {
    pub fn eigenvalues(&self) -> Vec<ComplexScalar> {
        self.records.iter().map(|r| r.lambda).collect()
    }

    pub fn all_contained(&self) -> bool {
        self.records.iter().all(|r| r.contained)
    }
}

/// Checks every eigenpair of `H_Δ` against the outer disc and the `c`-bound.
pub fn check_disc(pair: &LinearMonotonePair, delta: &Vector) -> Result<SpectralReport> {
    let h = build_h(pair, delta)?;
    let pairs = eig_pairs(&h)?;
    let half = Complex64::new(0.5, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let mut records = Vec::with_capacity(pairs.len());
    for ep in pairs {
        let c = c_value(&pair.a, delta, &ep.vector)?;
        let disc_bound = disc_radius(c);
        let distance = (ep.value - half).norm();
        let exempt = (ep.value - one).norm() <= UNIT_EIGENVALUE_TOL;
        let outer = distance <= 0.5 + DISC_TOL;
        let inner = exempt || (c >= 0.0 && distance <= disc_bound + DISC_TOL);
        records.push(EigenRecord {
            lambda: ep.value,
            c,
            disc_bound,
            distance,
            exempt,
            contained: outer && inner,
        });
    }
    let spectral_radius = records.iter().map(|r| r.lambda.norm()).fold(0.0, f64::max);
    Ok(SpectralReport { records, spectral_radius })
}

/// `t* = ‖z₁‖/‖A₁z₁‖`, `s* = ‖z₂‖/‖A₂⁻¹z₂‖`: the minimizers of
/// `‖z₁‖²/t + t‖A₁z₁‖²` and its dual counterpart.
pub fn optimal_local_stepsizes(
    z1: &Vector,
    z2: &Vector,
    a1: &DenseMatrix,
    a2_inv: &DenseMatrix,
) -> Result<(f64, f64)> {
    let d1 = (a1 * z1).norm();
    let d2 = (a2_inv * z2).norm();
    if d1 == 0.0 {
        return Err(Error::UnboundedStepsize("A₁z₁ = 0"));
    }
    if d2 == 0.0 {
        return Err(Error::UnboundedStepsize("A₂⁻¹z₂ = 0"));
    }
    Ok((z1.norm() / d1, z2.norm() / d2))
}

pub fn spectral_radius(m: &DenseMatrix) -> Result<f64> {
    Ok(eig_all(m)?.iter().map(|l| l.norm()).fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub t: f64,
    pub s: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadiusScan {
    pub rows: Vec<ScanRow>,
    pub best: ScanRow,
}

/// `ρ(H_Δ)` for `Δ = diag(t I_n, s I_m)` over the grid, row-major in `t`.
/// Ties for the minimum go to the smallest `(t, s)`.
pub fn radius_scan(pair: &LinearMonotonePair, t_grid: &[f64], s_grid: &[f64]) -> Result<RadiusScan> {
    if t_grid.is_empty() || s_grid.is_empty() {
        return Err(crate::error::invalid("grid", "grids must be nonempty"));
    }
    let cells: Vec<(f64, f64)> = t_grid
        .iter()
        .flat_map(|&t| s_grid.iter().map(move |&s| (t, s)))
        .collect();
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(cells.len());
    let chunk = cells.len().div_ceil(workers);
    let rows: Result<Vec<ScanRow>> = std::thread::scope(|scope| {
        let handles: Vec<_> = cells
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    part.iter()
                        .map(|&(t, s)| {
                            let h = build_h(pair, &pair.block_delta(t, s))?;
                            Ok(ScanRow { t, s, rho: spectral_radius(&h)? })
                        })
                        .collect::<Result<Vec<_>>>()
                })
            })
            .collect();
        let mut all = Vec::with_capacity(cells.len());
        for h in handles {
            all.extend(h.join().expect("scan worker panicked")?);
        }
        Ok(all)
    });
    let rows = rows?;
    let best = *rows
        .iter()
        .min_by(|a, b| {
            a.rho
                .total_cmp(&b.rho)
                .then(a.t.total_cmp(&b.t))
                .then(a.s.total_cmp(&b.s))
        })
        .expect("nonempty grid");
    Ok(RadiusScan { rows, best })
}

/// `n` points spaced evenly in log scale on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..n)
                .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
                .collect()
        }
    }
}

/// Largest distance between two spectra after greedy nearest-neighbour
/// pairing in `(modulus, argument)` order. `∞` if the lengths differ.
pub fn spectrum_distance(a: &[ComplexScalar], b: &[ComplexScalar]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut sorted: Vec<ComplexScalar> = a.to_vec();
    sorted.sort_by(|x, y| x.norm().total_cmp(&y.norm()).then(x.arg().total_cmp(&y.arg())));
    let mut used = vec![false; b.len()];
    let mut worst = 0.0_f64;
    for x in sorted {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("equal lengths");
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_pair(a: f64, b: f64) -> LinearMonotonePair {
        LinearMonotonePair::general(
            DenseMatrix::from_element(1, 1, a),
            DenseMatrix::from_element(1, 1, b),
        )
        .unwrap()
    }

    #[test]
    fn zero_operators_give_identity() {
        let pair = LinearMonotonePair::from_blocks(
            &DenseMatrix::zeros(2, 2),
            &DenseMatrix::zeros(3, 3),
            &DenseMatrix::zeros(3, 2),
        )
        .unwrap();
        let delta = pair.block_delta(0.3, 4.0);
        assert_eq!(build_h(&pair, &delta).unwrap(), DenseMatrix::identity(5, 5));
        assert_eq!(build_f(&pair, &delta).unwrap(), DenseMatrix::identity(5, 5));
        let rep = check_disc(&pair, &delta).unwrap();
        assert!(rep.records.iter().all(|r| r.exempt && r.contained));
        let scan = radius_scan(&pair, &[0.1, 1.0], &[1.0, 10.0]).unwrap();
        assert!(scan.rows.iter().all(|r| (r.rho - 1.0).abs() < 1e-14));
    }

    #[test]
    fn scalar_closed_form() {
        let (a, b) = (0.8, 1.7);
        for t in [0.1, 1.0, 3.0] {
            let pair = scalar_pair(a, b);
            let h = build_h(&pair, &Vector::from_element(1, t)).unwrap();
            let f = build_f(&pair, &Vector::from_element(1, t)).unwrap();
            let expected = (1.0 + t * t * a * b) / ((1.0 + t * a) * (1.0 + t * b));
            assert!((h[(0, 0)] - expected).abs() < 1e-15);
            assert!((f[(0, 0)] - expected).abs() < 1e-15);
        }
        let pair = scalar_pair(1.0, 1.0);
        let rep = check_disc(&pair, &Vector::from_element(1, 1.0)).unwrap();
        assert!((rep.records[0].lambda.re - 0.5).abs() < 1e-15);
        // c = 1 / (1 + 1) for A = Δ = 1
        assert!((rep.records[0].c - 0.5).abs() < 1e-15);
        assert!(rep.all_contained());
    }

    #[test]
    fn c_value_cases() {
        let z = ComplexVector::from_vec(vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]);
        let c = c_value(&DenseMatrix::identity(2, 2), &Vector::from_element(2, 1.0), &z).unwrap();
        assert!((c - 0.5).abs() < 1e-15);
        let skew = DenseMatrix::from_row_slice(2, 2, &[0.0, 2.0, -2.0, 0.0]);
        let zr = ComplexVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(-3.0, 0.0)]);
        assert_eq!(c_value(&skew, &Vector::from_element(2, 0.7), &zr).unwrap(), 0.0);
        assert_eq!(
            c_value(&skew, &Vector::from_element(2, 1.0), &ComplexVector::zeros(2)),
            Err(Error::ZeroVector)
        );
    }

    #[test]
    fn optimal_stepsizes_cases() {
        let z = Vector::from_row_slice(&[1.0, -2.0]);
        let (t, s) = optimal_local_stepsizes(
            &z,
            &z,
            &(DenseMatrix::identity(2, 2) * 2.0),
            &DenseMatrix::identity(2, 2),
        )
        .unwrap();
        assert_eq!((t, s), (0.5, 1.0));
        assert!(optimal_local_stepsizes(&z, &z, &DenseMatrix::zeros(2, 2), &DenseMatrix::identity(2, 2)).is_err());
    }

    #[test]
    fn scalar_scan_minimum() {
        let grid = log_grid(0.1, 10.0, 21);
        let scalar = scalar_pair(1.0, 1.0);
        let mut best = (f64::INFINITY, 0.0);
        for &t in &grid {
            let rho = spectral_radius(&build_h(&scalar, &Vector::from_element(1, t)).unwrap()).unwrap();
            let expected = (1.0 + t * t) / ((1.0 + t) * (1.0 + t));
            assert!((rho - expected).abs() < 1e-14);
            if rho < best.0 {
                best = (rho, t);
            }
        }
        assert!((best.1 - 1.0).abs() < 1e-12);
        assert!((best.0 - 0.5).abs() < 1e-14);
    }

    #[test]
    fn spectrum_distance_pairs_greedily() {
        let a = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)];
        let b = [Complex64::new(0.0, -1.0), Complex64::new(1.0, 1e-9), Complex64::new(0.0, 1.0)];
        assert!(spectrum_distance(&a, &b) < 2e-9);
        assert_eq!(spectrum_distance(&a, &b[..2]), f64::INFINITY);
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-3, 1e3, 10);
        assert_eq!(g.len(), 10);
        assert!((g[0] - 1e-3).abs() < 1e-18);
        assert!((g[9] - 1e3).abs() < 1e-9);
    }
}
