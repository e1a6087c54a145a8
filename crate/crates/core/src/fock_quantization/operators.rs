//! Sparse operators on the truncated two-mode space `|m_A, m_Ã⟩`,
//! `0 ≤ m_A, m_Ã ≤ cutoff`, flattened as `m_A·(cutoff+1) + m_Ã`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatorLabel {
    A,
    ADagger,
    ATilde,
    ATildeDagger,
    NumberA,
    NumberTilde,
    H0,
    H0Prime,
    HI1,
    HI2,
    K2,
    Composite,
}

/// Row-compressed complex matrix over the two-mode basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorMatrix {
    label: OperatorLabel,
    cutoff: usize,
    /// Scalar prefactor the operator was built with (1 for bare operators).
    coupling: f64,
    rows: Vec<Vec<(usize, Complex64)>>,
}

impl OperatorMatrix {
    fn from_rows(label: OperatorLabel, cutoff: usize, coupling: f64, rows: Vec<Vec<(usize, Complex64)>>) -> Self {
        Self { label, cutoff, coupling, rows }
    }

    pub fn zero(cutoff: usize) -> Self {
        let dim = (cutoff + 1) * (cutoff + 1);
        Self::from_rows(OperatorLabel::Composite, cutoff, 1.0, vec![Vec::new(); dim])
    }

    pub fn label(&self) -> OperatorLabel {
        self.label
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn dimension(&self) -> usize {
        self.rows.len()
    }

    pub fn index(&self, a: usize, b: usize) -> usize {
        a * (self.cutoff + 1) + b
    }

    pub fn occupations(&self, i: usize) -> (usize, usize) {
        (i / (self.cutoff + 1), i % (self.cutoff + 1))
    }

    pub fn row(&self, i: usize) -> &[(usize, Complex64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.rows[i].iter().find(|e| e.0 == j).map_or(ZERO, |e| e.1)
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn with_label(mut self, label: OperatorLabel, coupling: f64) -> Self {
        self.label = label;
        self.coupling = coupling;
        self
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dimension(), "vector length does not match operator dimension");
        self.rows.iter().map(|r| r.iter().map(|&(j, x)| x * v[j]).sum()).collect()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let rows =
            self.rows.iter().map(|r| r.iter().map(|&(j, x)| (j, x * s)).filter(|e| e.1 != ZERO).collect()).collect();
        Self::from_rows(OperatorLabel::Composite, self.cutoff, 1.0, rows)
    }

    pub fn adjoint(&self) -> Self {
        let mut rows = vec![Vec::new(); self.dimension()];
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, x) in r {
                rows[j].push((i, x.conj()));
            }
        }
        rows.iter_mut().for_each(|r: &mut Vec<(usize, Complex64)>| r.sort_by_key(|e| e.0));
        Self::from_rows(OperatorLabel::Composite, self.cutoff, 1.0, rows)
    }

    fn check_same_space(&self, other: &Self) {
        assert_eq!(self.cutoff, other.cutoff, "operators live on different truncations");
    }

    /// `self + s·other`.
    pub fn add_scaled(&self, other: &Self, s: Complex64) -> Self {
        self.check_same_space(other);
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(r1, r2)| merge(r1.iter().copied().chain(r2.iter().map(|&(j, x)| (j, x * s)))))
            .collect();
        Self::from_rows(OperatorLabel::Composite, self.cutoff, 1.0, rows)
    }

    pub fn matmul(&self, other: &Self) -> Self {
        self.check_same_space(other);
        let rows = self
            .rows
            .iter()
            .map(|r| merge(r.iter().flat_map(|&(k, x)| other.rows[k].iter().map(move |&(j, y)| (j, x * y)))))
            .collect();
        Self::from_rows(OperatorLabel::Composite, self.cutoff, 1.0, rows)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other).add_scaled(&other.matmul(self), Complex64::new(-1.0, 0.0))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.rows.iter().flatten().map(|e| e.1.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.rows.iter().flatten().map(|e| e.1.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus between basis states whose occupations are all
    /// at most `window`.
    pub fn max_abs_within(&self, window: usize) -> f64 {
        let mut worst = 0.0f64;
        for (i, r) in self.rows.iter().enumerate() {
            let (a, b) = self.occupations(i);
            if a > window || b > window {
                continue;
            }
            for &(j, x) in r {
                let (c, d) = self.occupations(j);
                if c <= window && d <= window {
                    worst = worst.max(x.norm());
                }
            }
        }
        worst
    }

    /// Largest `|M_ij − conj(M_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.add_scaled(&self.adjoint(), Complex64::new(-1.0, 0.0)).max_abs()
    }

    /// True when every entry is real, so `e^{s·M}` for real `s` stays real.
    pub fn is_real(&self) -> bool {
        self.rows.iter().flatten().all(|e| e.1.im == 0.0)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dimension()).map(|i| self.get(i, i)).sum()
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<Complex64> {
        let dim = self.dimension();
        let mut m = nalgebra::DMatrix::zeros(dim, dim);
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, x) in r {
                m[(i, j)] = x;
            }
        }
        m
    }
}

fn merge(entries: impl Iterator<Item = (usize, Complex64)>) -> Vec<(usize, Complex64)> {
    let mut v: Vec<(usize, Complex64)> = entries.collect();
    v.sort_by_key(|e| e.0);
    let mut out: Vec<(usize, Complex64)> = Vec::with_capacity(v.len());
    for (j, x) in v {
        match out.last_mut() {
            Some(last) if last.0 == j => last.1 += x,
            _ => out.push((j, x)),
        }
    }
    out.retain(|e| e.1 != ZERO);
    out
}

/// Which factor of the tensor product a ladder operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    System,
    Tilde,
}

/// Annihilation operator `A = a ⊗ 1` or `Ã = 1 ⊗ a`, with `a|m⟩ = √m |m−1⟩`.
pub fn annihilation(factor: Factor, cutoff: usize) -> OperatorMatrix {
    let side = cutoff + 1;
    let rows = (0..side * side)
        .map(|i| {
            let (a, b) = (i / side, i % side);
            let target = match factor {
                Factor::System if a < cutoff => Some((a + 1, b, a + 1)),
                Factor::Tilde if b < cutoff => Some((a, b + 1, b + 1)),
                _ => None,
            };
            target.map_or_else(Vec::new, |(c, d, m)| vec![(c * side + d, Complex64::new((m as f64).sqrt(), 0.0))])
        })
        .collect();
    let label = match factor {
        Factor::System => OperatorLabel::A,
        Factor::Tilde => OperatorLabel::ATilde,
    };
    OperatorMatrix::from_rows(label, cutoff, 1.0, rows)
}

pub fn creation(factor: Factor, cutoff: usize) -> OperatorMatrix {
    let label = match factor {
        Factor::System => OperatorLabel::ADagger,
        Factor::Tilde => OperatorLabel::ATildeDagger,
    };
    annihilation(factor, cutoff).adjoint().with_label(label, 1.0)
}

pub fn number(factor: Factor, cutoff: usize) -> OperatorMatrix {
    let label = match factor {
        Factor::System => OperatorLabel::NumberA,
        Factor::Tilde => OperatorLabel::NumberTilde,
    };
    creation(factor, cutoff).matmul(&annihilation(factor, cutoff)).with_label(label, 1.0)
}

/// The four ladder matrices `(A, A†, Ã, Ã†)`.
pub struct Ladders {
    pub a: OperatorMatrix,
    pub a_dag: OperatorMatrix,
    pub at: OperatorMatrix,
    pub at_dag: OperatorMatrix,
}

impl Ladders {
    pub fn new(cutoff: usize) -> Self {
        Self {
            a: annihilation(Factor::System, cutoff),
            a_dag: creation(Factor::System, cutoff),
            at: annihilation(Factor::Tilde, cutoff),
            at_dag: creation(Factor::Tilde, cutoff),
        }
    }

    /// `A†A − Ã†Ã`.
    pub fn number_difference(&self) -> OperatorMatrix {
        self.a_dag.matmul(&self.a).add_scaled(&self.at_dag.matmul(&self.at), Complex64::new(-1.0, 0.0))
    }

    /// `(A² + A†²) − (Ã² + Ã†²)`.
    pub fn quadrature_difference(&self) -> OperatorMatrix {
        let m1 = Complex64::new(-1.0, 0.0);
        self.a
            .matmul(&self.a)
            .add_scaled(&self.a_dag.matmul(&self.a_dag), Complex64::ONE)
            .add_scaled(&self.at.matmul(&self.at), m1)
            .add_scaled(&self.at_dag.matmul(&self.at_dag), m1)
    }

    /// `A†Ã† − AÃ`.
    pub fn pair_difference(&self) -> OperatorMatrix {
        self.a_dag.matmul(&self.at_dag).add_scaled(&self.a.matmul(&self.at), Complex64::new(-1.0, 0.0))
    }

    /// `(A² − A†²) + (Ã² − Ã†²)`.
    pub fn squeeze_sum(&self) -> OperatorMatrix {
        let m1 = Complex64::new(-1.0, 0.0);
        self.a
            .matmul(&self.a)
            .add_scaled(&self.a_dag.matmul(&self.a_dag), m1)
            .add_scaled(&self.at.matmul(&self.at), Complex64::ONE)
            .add_scaled(&self.at_dag.matmul(&self.at_dag), m1)
    }
}
