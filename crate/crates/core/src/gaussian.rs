//! Vacuum propagation through the quadratic Hamiltonian and all
//! covariance-matrix algebra: reduction, Schur complements, symplectic
//! spectra, photon numbers.
//!
//! Quadrature ordering is ξ = (X₁..X₅, Y₁..Y₅) with Ω = [0, I; −I, 0] and
//! vacuum covariance I/2. The Heisenberg equations dξ/dt = diag[G, −G]ξ are
//! solved by orthogonal diagonalization of the symmetric G, so the propagator
//! S = blkdiag(e^{Gt}, e^{−Gt}) is symplectic to machine precision.

use nalgebra::{DMatrix, Matrix5, SMatrix};

use crate::coupling::CouplingMatrix;
use crate::error::{Error, Result};

type Matrix10 = SMatrix<f64, 10, 10>;

/// The symplectic solution map ξ(t) = S ξ(0).
#[derive(Clone, Debug)]
pub struct Propagator {
    s: Matrix10,
    t: f64,
}

impl Propagator {
    pub fn matrix(&self) -> &Matrix10 {
        &self.s
    }

    pub fn t(&self) -> f64 {
        self.t
    }
}

/// S = blkdiag(Q e^{Dt} Qᵀ, Q e^{−Dt} Qᵀ) from the eigensystem G = Q D Qᵀ.
pub fn propagate(g: &CouplingMatrix, t: f64) -> Result<Propagator> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "interaction time must be non-negative and finite (got {t})"
        )));
    }
    let eig = nalgebra::SymmetricEigen::try_new(*g.matrix(), f64::EPSILON, 200)
        .ok_or(Error::EigenNotConverged)?;
    let q = eig.eigenvectors;
    let exp_block = |sign: f64| -> Matrix5<f64> {
        let d = Matrix5::from_diagonal(&eig.eigenvalues.map(|l| (sign * l * t).exp()));
        q * d * q.transpose()
    };
    let mut s = Matrix10::zeros();
    s.fixed_view_mut::<5, 5>(0, 0).copy_from(&exp_block(1.0));
    s.fixed_view_mut::<5, 5>(5, 5).copy_from(&exp_block(-1.0));
    if s.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalDomain(format!(
            "propagator overflow at t = {t}; coupling too strong for this interaction time"
        )));
    }
    Ok(Propagator { s, t })
}

/// A covariance matrix over the X/Y block ordering together with the global
/// mode indices its rows refer to.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceMatrix {
    sigma: DMatrix<f64>,
    modes: Vec<usize>,
}

/// σ = S (I/2) Sᵀ over all five modes.
pub fn covariance(s: &Propagator) -> CovarianceMatrix {
    let m = 0.5 * s.s * s.s.transpose();
    let sigma = DMatrix::from_fn(10, 10, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
    CovarianceMatrix {
        sigma,
        modes: (1..=5).collect(),
    }
}

impl CovarianceMatrix {
    /// Wraps an existing matrix; the shape must be 2k×2k for k modes and the
    /// matrix symmetric (it is symmetrized to kill roundoff).
    pub fn from_parts(sigma: DMatrix<f64>, modes: Vec<usize>) -> Result<Self> {
        let n = sigma.nrows();
        if sigma.ncols() != n || n != 2 * modes.len() || modes.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "covariance shape {}x{} does not match {} modes",
                sigma.nrows(),
                sigma.ncols(),
                modes.len()
            )));
        }
        let mut seen = [false; 6];
        for &m in &modes {
            if m == 0 || m > 5 || seen[m] {
                return Err(Error::UnknownMode(m));
            }
            seen[m] = true;
        }
        let asym = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (sigma[(i, j)] - sigma[(j, i)]).abs())
            .fold(0.0, f64::max);
        if asym > 1e-9 {
            return Err(Error::NumericalDomain(format!(
                "matrix is not symmetric (max asymmetry {asym:e})"
            )));
        }
        let sigma = DMatrix::from_fn(n, n, |i, j| 0.5 * (sigma[(i, j)] + sigma[(j, i)]));
        Ok(Self { sigma, modes })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    fn position(&self, mode: usize) -> Result<usize> {
        self.modes
            .iter()
            .position(|&m| m == mode)
            .ok_or(Error::UnknownMode(mode))
    }

    /// Rows for the given party: X positions then Y positions.
    fn party_rows(&self, party: &[usize]) -> Result<Vec<usize>> {
        let k = self.n_modes();
        let mut rows = Vec::with_capacity(2 * party.len());
        for &m in party {
            rows.push(self.position(m)?);
        }
        for i in 0..party.len() {
            rows.push(k + rows[i]);
        }
        Ok(rows)
    }

    /// Partial trace down to the given modes (row/column selection),
    /// preserving the X/Y block ordering.
    pub fn reduce(&self, modes: &[usize]) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidParameter("cannot reduce to zero modes".into()));
        }
        let mut uniq = modes.to_vec();
        uniq.sort_unstable();
        uniq.dedup();
        if uniq.len() != modes.len() {
            return Err(Error::InvalidParameter(format!("duplicate mode in {modes:?}")));
        }
        let rows = self.party_rows(modes)?;
        let sigma = pick(&self.sigma, &rows, &rows);
        Ok(Self {
            sigma,
            modes: modes.to_vec(),
        })
    }

    /// Mean photon number per mode, N = (σ_XX + σ_YY − 1)/2.
    pub fn mean_photons(&self) -> Vec<f64> {
        let k = self.n_modes();
        (0..k)
            .map(|i| 0.5 * (self.sigma[(i, i)] + self.sigma[(k + i, k + i)] - 1.0))
            .collect()
    }

    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        symplectic_eigenvalues(&self.sigma)
    }

    /// All symplectic eigenvalues must sit at or above the vacuum value 1/2.
    /// Returns them on success.
    pub fn check_bona_fide(&self) -> Result<Vec<f64>> {
        let nu = self.symplectic_eigenvalues()?;
        if let Some(&low) = nu.iter().find(|&&v| v < 0.5 - 1e-9) {
            return Err(Error::NumericalDomain(format!(
                "symplectic eigenvalue {low} below the vacuum value 1/2"
            )));
        }
        Ok(nu)
    }
}

fn pick(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// A split of a covariance matrix's modes into two disjoint parties.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bipartition {
    a: Vec<usize>,
    b: Vec<usize>,
}

impl Bipartition {
    pub fn new(a: Vec<usize>, b: Vec<usize>) -> Result<Self> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::InvalidParameter("both parties must be non-empty".into()));
        }
        if a.iter().any(|m| b.contains(m)) {
            return Err(Error::InvalidParameter(format!(
                "parties must be disjoint (A = {a:?}, B = {b:?})"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> &[usize] {
        &self.a
    }

    pub fn b(&self) -> &[usize] {
        &self.b
    }

    /// Compact name like "3->12" used in legends and reports.
    pub fn name(&self) -> String {
        let join = |m: &[usize]| m.iter().map(|v| v.to_string()).collect::<String>();
        format!("{}->{}", join(&self.a), join(&self.b))
    }
}

/// Which party is measured (conditioned on) in a Schur complement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Conditioned {
    OnA,
    OnB,
}

/// The blocks 𝒜, ℬ, 𝒞 of σ_AB in party-local (X, Y) ordering.
pub(crate) fn partition_blocks(
    cm: &CovarianceMatrix,
    part: &Bipartition,
) -> Result<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)> {
    let rows_a = cm.party_rows(part.a())?;
    let rows_b = cm.party_rows(part.b())?;
    Ok((
        pick(&cm.sigma, &rows_a, &rows_a),
        pick(&cm.sigma, &rows_b, &rows_b),
        pick(&cm.sigma, &rows_a, &rows_b),
    ))
}

/// Conditional covariance of the steered party: ℬ − 𝒞ᵀ𝒜⁻¹𝒞 (conditioned on
/// A) or 𝒜 − 𝒞ℬ⁻¹𝒞ᵀ, via a positive-definite factorization of the
/// conditioning block.
pub fn schur_complement(
    cm: &CovarianceMatrix,
    part: &Bipartition,
    conditioned: Conditioned,
) -> Result<DMatrix<f64>> {
    let (a, b, c) = partition_blocks(cm, part)?;
    let (p, q, cross) = match conditioned {
        Conditioned::OnA => (a, b, c),
        Conditioned::OnB => (b, a, c.transpose()),
    };
    let eig = nalgebra::SymmetricEigen::try_new(p.clone(), f64::EPSILON, 500)
        .ok_or(Error::EigenNotConverged)?;
    let min = eig.eigenvalues.min();
    let max = eig.eigenvalues.max();
    if min <= 0.0 {
        return Err(Error::IllConditioned(f64::INFINITY));
    }
    let cond = max / min;
    if cond > 1e12 {
        return Err(Error::IllConditioned(cond));
    }
    let chol = nalgebra::Cholesky::new(p).ok_or(Error::IllConditioned(cond))?;
    let solved = chol.solve(&cross);
    let m = q - cross.transpose() * solved;
    Ok(DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
        0.5 * (m[(i, j)] + m[(j, i)])
    }))
}

/// Symplectic spectrum of a 2k×2k symmetric positive definite matrix.
///
/// Forms A = σ^{1/2} Ω σ^{1/2} (antisymmetric) and takes the square roots of
/// the eigenvalues of −A² = AAᵀ, which come in pairs; each eigenvalue is
/// returned once, ascending.
pub fn symplectic_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = m.nrows();
    if n % 2 != 0 || m.ncols() != n || n == 0 {
        return Err(Error::InvalidParameter(format!(
            "symplectic spectrum needs a 2k x 2k matrix (got {}x{})",
            n,
            m.ncols()
        )));
    }
    let k = n / 2;
    let eig = nalgebra::SymmetricEigen::try_new(m.clone(), f64::EPSILON, 500)
        .ok_or(Error::EigenNotConverged)?;
    if eig.eigenvalues.min() <= 0.0 {
        return Err(Error::NumericalDomain(format!(
            "matrix not positive definite (min eigenvalue {})",
            eig.eigenvalues.min()
        )));
    }
    let v = &eig.eigenvectors;
    let half = v * DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt)) * v.transpose();
    let mut omega = DMatrix::zeros(n, n);
    for i in 0..k {
        omega[(i, k + i)] = 1.0;
        omega[(k + i, i)] = -1.0;
    }
    let a = &half * omega * &half;
    let m2 = &a * a.transpose();
    let eig2 = nalgebra::SymmetricEigen::try_new(m2, f64::EPSILON, 500)
        .ok_or(Error::EigenNotConverged)?;
    let mut nus: Vec<f64> = eig2.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).collect();
    nus.sort_by(f64::total_cmp);
    let mut out = Vec::with_capacity(k);
    for pair in nus.chunks(2) {
        let (lo, hi) = (pair[0], pair[1]);
        if (hi - lo).abs() > 1e-8 * hi.max(1.0) {
            return Err(Error::PairingFailure(lo, hi));
        }
        out.push(0.5 * (lo + hi));
    }
    Ok(out)
}
