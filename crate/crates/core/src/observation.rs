use crate::error::{RcrtError, Result};
use crate::modular::{project_common, ModulusSet};

/// Unordered residue sets, one column per modulus.
///
/// `columns[l][k]` is the `k`-th observation for modulus `l`. The order within
/// a column carries no information about which number produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationMatrix {
    columns: Vec<Vec<f64>>,
}

impl ObservationMatrix {
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let n = columns.first().ok_or(RcrtError::Empty("observation columns"))?.len();
        if n == 0 {
            return Err(RcrtError::Empty("observation column"));
        }
        for col in &columns {
            if col.len() != n {
                return Err(RcrtError::LengthMismatch {
                    what: "observation column",
                    expected: n,
                    got: col.len(),
                });
            }
            if col.iter().any(|x| !x.is_finite()) {
                return Err(RcrtError::invalid("observation", "must be finite"));
            }
        }
        Ok(ObservationMatrix { columns })
    }

    /// Checks the shape against `ms` and that every residue lies in `[0, m_l)`.
    pub fn validate(&self, ms: &ModulusSet) -> Result<()> {
        if self.columns.len() != ms.len() {
            return Err(RcrtError::LengthMismatch {
                what: "observation columns",
                expected: ms.len(),
                got: self.columns.len(),
            });
        }
        for (l, col) in self.columns.iter().enumerate() {
            let m = ms.modulus(l);
            if let Some(x) = col.iter().find(|&&x| !(0.0..m).contains(&x)) {
                return Err(RcrtError::invalid(
                    "observation",
                    format!("{x} outside [0, {m}) for modulus {l}"),
                ));
            }
        }
        Ok(())
    }

    /// Number of estimands `N`.
    pub fn n(&self) -> usize {
        self.columns[0].len()
    }

    /// Number of moduli `L`.
    pub fn l(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, l: usize) -> &[f64] {
        &self.columns[l]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    /// Columns at `indices`, in that order.
    pub fn select_columns(&self, indices: &[usize]) -> ObservationMatrix {
        ObservationMatrix {
            columns: indices.iter().map(|&l| self.columns[l].clone()).collect(),
        }
    }

    /// Common residues `r_kl = ⟨R_kl⟩_Γ`, column-major like the observations.
    pub fn commons(&self, gamma: f64) -> Vec<Vec<f64>> {
        self.columns
            .iter()
            .map(|col| col.iter().map(|&x| project_common(x, gamma)).collect())
            .collect()
    }
}

/// One permutation per modulus: `perms[l][i]` is the row of column `l`
/// assigned to estimand `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clustering {
    perms: Vec<Vec<usize>>,
}

impl Clustering {
    pub fn new(perms: Vec<Vec<usize>>) -> Result<Self> {
        let n = perms.first().ok_or(RcrtError::Empty("clustering"))?.len();
        for p in &perms {
            if p.len() != n {
                return Err(RcrtError::LengthMismatch {
                    what: "permutation",
                    expected: n,
                    got: p.len(),
                });
            }
            let mut seen = vec![false; n];
            for &k in p {
                if k >= n || std::mem::replace(&mut seen[k], true) {
                    return Err(RcrtError::invalid("permutation", format!("{p:?} is not a bijection")));
                }
            }
        }
        Ok(Clustering { perms })
    }

    pub fn identity(n: usize, l: usize) -> Self {
        Clustering {
            perms: vec![(0..n).collect(); l],
        }
    }

    pub fn perms(&self) -> &[Vec<usize>] {
        &self.perms
    }

    pub fn n(&self) -> usize {
        self.perms[0].len()
    }

    pub fn l(&self) -> usize {
        self.perms.len()
    }

    /// Row of column `l` assigned to estimand `i`.
    pub fn row(&self, i: usize, l: usize) -> usize {
        self.perms[l][i]
    }

    /// Values of `columns` gathered for estimand `i`, one per modulus.
    pub fn gather(&self, columns: &[Vec<f64>], i: usize) -> Vec<f64> {
        (0..self.l()).map(|l| columns[l][self.perms[l][i]]).collect()
    }

    /// Relabels estimands so that the first permutation is the identity.
    ///
    /// Two clusterings describe the same partition of observations exactly
    /// when their canonical forms are equal.
    pub fn canonical(&self) -> Clustering {
        let n = self.n();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| self.perms[0][i]);
        Clustering {
            perms: self
                .perms
                .iter()
                .map(|p| order.iter().map(|&i| p[i]).collect())
                .collect(),
        }
    }

    pub fn restrict(&self, moduli: &[usize]) -> Clustering {
        Clustering {
            perms: moduli.iter().map(|&l| self.perms[l].clone()).collect(),
        }
    }
}

/// A reconstructed number: `y_hat = quotient·Γ + mu_hat`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub y_hat: f64,
    pub quotient: u128,
    pub mu_hat: f64,
}
