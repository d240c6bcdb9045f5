//! Labeled Fisher information matrices.

use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Equilibrated condition number above which a matrix is reported as
/// ill-conditioned.
pub const ILL_CONDITIONED: f64 = 1e12;

/// Relative eigenvalue floor below which an equilibrated matrix counts as
/// singular.
const SINGULAR_RTOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Param {
    Amplitude,
    Phase,
    Doppler,
    Delay,
    Doa,
    X,
    Y,
    Vx,
    Vy,
    Speed,
    Heading,
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Param::Amplitude => "alpha",
            Param::Phase => "phi",
            Param::Doppler => "f_d",
            Param::Delay => "tau",
            Param::Doa => "theta_r",
            Param::X => "x",
            Param::Y => "y",
            Param::Vx => "v_x",
            Param::Vy => "v_y",
            Param::Speed => "speed",
            Param::Heading => "heading",
        };
        f.write_str(s)
    }
}

/// Ordered channel parameters of a single link.
pub const LINK_PARAMS: [Param; 5] = [
    Param::Amplitude,
    Param::Phase,
    Param::Doppler,
    Param::Delay,
    Param::Doa,
];

/// Square symmetric information matrix over an ordered parameter list.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherMatrix {
    labels: Vec<Param>,
    values: DMatrix<f64>,
}

impl FisherMatrix {
    pub fn new(labels: Vec<Param>, values: DMatrix<f64>) -> Result<Self> {
        let n = labels.len();
        if values.nrows() != n || values.ncols() != n {
            return Err(Error::invalid(
                "fisher matrix",
                format!("{}x{} values for {n} labels", values.nrows(), values.ncols()),
            ));
        }
        let scale = values.amax();
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (values[(i, j)], values[(j, i)]);
                if (a - b).abs() > 1e-10 * scale.max(f64::MIN_POSITIVE) {
                    return Err(Error::invalid(
                        "fisher matrix",
                        format!("asymmetric at ({i}, {j}): {a} vs {b}"),
                    ));
                }
            }
        }
        Ok(Self { labels, values })
    }

    /// Builds without the symmetry check, symmetrizing the input.
    pub(crate) fn from_parts(labels: Vec<Param>, values: DMatrix<f64>) -> Self {
        let values = (&values + values.transpose()) * 0.5;
        Self { labels, values }
    }

    pub fn zeros(labels: Vec<Param>) -> Self {
        let n = labels.len();
        Self {
            labels,
            values: DMatrix::zeros(n, n),
        }
    }

    pub fn labels(&self) -> &[Param] {
        &self.labels
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_values(self) -> DMatrix<f64> {
        self.values
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn index_of(&self, p: Param) -> Option<usize> {
        self.labels.iter().position(|&l| l == p)
    }

    /// Adds another matrix over the same labels.
    pub fn accumulate(&mut self, other: &FisherMatrix) -> Result<()> {
        if self.labels != other.labels {
            return Err(Error::invalid("fisher matrix", "label mismatch in sum"));
        }
        self.values += &other.values;
        Ok(())
    }

    /// Reparameterizes with `Jᵀ·I·J`, where `jac` has one row per current
    /// parameter and one column per new parameter.
    pub fn reparameterize(&self, jac: &DMatrix<f64>, labels: Vec<Param>) -> Result<Self> {
        if jac.nrows() != self.dim() || jac.ncols() != labels.len() {
            return Err(Error::invalid("jacobian", "shape does not match parameters"));
        }
        Ok(Self::from_parts(labels, jac.transpose() * &self.values * jac))
    }

    fn equilibration(&self) -> Option<DMatrix<f64>> {
        let n = self.dim();
        let mut d = DMatrix::zeros(n, n);
        for i in 0..n {
            let v = self.values[(i, i)];
            if !(v > 0.0 && v.is_finite()) {
                return None;
            }
            d[(i, i)] = v.sqrt().recip();
        }
        Some(d)
    }

    /// Condition number of the diagonally equilibrated matrix, `D·I·D` with
    /// `D = diag(I_ii)^(-1/2)`. Infinite when a diagonal entry vanishes.
    pub fn condition_number(&self) -> f64 {
        let Some(d) = self.equilibration() else {
            return f64::INFINITY;
        };
        let g = &d * &self.values * &d;
        let eig = SymmetricEigen::new(g).eigenvalues;
        let max = eig.max();
        let min = eig.min();
        if min <= 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    pub fn is_ill_conditioned(&self) -> bool {
        self.condition_number() > ILL_CONDITIONED
    }

    /// Inverse through a fully pivoted LU solve on the equilibrated matrix.
    pub fn inverse(&self) -> Result<DMatrix<f64>> {
        let d = self.equilibration().ok_or(Error::SingularMatrix)?;
        let g = &d * &self.values * &d;
        let eig = SymmetricEigen::new(g.clone()).eigenvalues;
        if eig.min() <= SINGULAR_RTOL * eig.max() {
            return Err(Error::SingularMatrix);
        }
        let ginv = g.full_piv_lu().try_inverse().ok_or(Error::SingularMatrix)?;
        let inv = &d * ginv * &d;
        Ok((&inv + inv.transpose()) * 0.5)
    }

    /// CRLB diagonal: `[I⁻¹]_ii` for every parameter.
    pub fn crlb(&self) -> Result<Vec<f64>> {
        let inv = self.inverse()?;
        Ok((0..self.dim()).map(|i| inv[(i, i)]).collect())
    }

    pub fn submatrix(&self, idx: &[usize]) -> Self {
        let labels = idx.iter().map(|&i| self.labels[i]).collect();
        let values = DMatrix::from_fn(idx.len(), idx.len(), |r, c| self.values[(idx[r], idx[c])]);
        Self { labels, values }
    }

    pub fn schur_complement(&self, keep: &[usize]) -> Result<Self> {
        schur_complement(self, keep)
    }
}

/// Effective information for the `keep` parameters: `C − Bᵀ·A⁻¹·B` where `A`
/// is the block of the discarded (nuisance) parameters.
pub fn schur_complement(m: &FisherMatrix, keep: &[usize]) -> Result<FisherMatrix> {
    let n = m.dim();
    if keep.iter().any(|&i| i >= n) {
        return Err(Error::invalid("keep", "index out of range"));
    }
    let mut seen = vec![false; n];
    for &i in keep {
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::invalid("keep", "duplicate index"));
        }
    }
    let drop: Vec<usize> = (0..n).filter(|i| !seen[*i]).collect();
    let c = m.submatrix(keep);
    if drop.is_empty() {
        return Ok(c);
    }
    let a = m.submatrix(&drop);
    let a_inv = a.inverse().map_err(|_| Error::NuisanceBlockSingular)?;
    let b = DMatrix::from_fn(drop.len(), keep.len(), |r, col| m.values[(drop[r], keep[col])]);
    let values = &c.values - b.transpose() * a_inv * &b;
    Ok(FisherMatrix::from_parts(c.labels, values))
}
