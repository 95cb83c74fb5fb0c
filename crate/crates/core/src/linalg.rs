//! Dense exact rational matrices with sparse-aware products, and
//! fraction-free elimination for rank, nullspace and linear solves.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::rational::{fmt_rat, Rat};

#[derive(Clone, PartialEq, Eq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl fmt::Debug for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "QMatrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| fmt_rat(self.get(i, j))).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rat::one());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Rat>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, v) in row.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        m
    }

    /// Builds a matrix whose `j`-th column is `cols[j]`.
    pub fn from_columns(n_rows: usize, cols: &[Vec<Rat>]) -> Self {
        let mut m = Self::zeros(n_rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), n_rows, "column length");
            for (i, v) in col.iter().enumerate() {
                if !v.is_zero() {
                    m.set(i, j, v.clone());
                }
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<Rat> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn nonzero_count(&self) -> usize {
        self.data.iter().filter(|v| !v.is_zero()).count()
    }

    /// Sum of absolute values of the entries.
    pub fn l1_norm(&self) -> Rat {
        self.data
            .iter()
            .map(|v| v.abs())
            .fold(Rat::zero(), |a, b| a + b)
    }

    pub fn mul(&self, other: &QMatrix) -> QMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = QMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let idx = i * out.cols + j;
                        out.data[idx] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .map(|(a, b)| a * b)
                    .fold(Rat::zero(), |s, t| s + t)
            })
            .collect()
    }

    pub fn add(&self, other: &QMatrix) -> QMatrix {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &QMatrix) -> QMatrix {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &QMatrix, f: impl Fn(&Rat, &Rat) -> Rat) -> QMatrix {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "shape mismatch"
        );
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, c: &Rat) -> QMatrix {
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    pub fn transpose(&self) -> QMatrix {
        let mut t = QMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn trace(&self) -> Rat {
        (0..self.rows.min(self.cols))
            .map(|i| self.get(i, i).clone())
            .fold(Rat::zero(), |a, b| a + b)
    }

    /// Nonzero entries of each column as `(row, value)`.
    pub fn sparse_columns(&self) -> Vec<Vec<(usize, Rat)>> {
        let mut cols = vec![Vec::new(); self.cols];
        for i in 0..self.rows {
            for (j, v) in self.row(i).iter().enumerate() {
                if !v.is_zero() {
                    cols[j].push((i, v.clone()));
                }
            }
        }
        cols
    }

    /// Entries flattened row by row.
    pub fn entries(&self) -> &[Rat] {
        &self.data
    }

    pub fn rank(&self) -> usize {
        rank_of_rows(&self.rows_vec())
    }

    /// Basis of `{v : self · v = 0}`.
    pub fn nullspace(&self) -> Vec<Vec<Rat>> {
        nullspace_of_rows(&self.rows_vec(), self.cols)
    }

    fn rows_vec(&self) -> Vec<Vec<Rat>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }
}

fn to_integer_row(row: &[Rat]) -> Vec<BigInt> {
    let l = row
        .iter()
        .filter(|v| !v.is_zero())
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    row.iter()
        .map(|v| (v * Rat::from_integer(l.clone())).to_integer())
        .collect()
}

fn make_primitive(row: &mut [BigInt]) {
    let g = row
        .iter()
        .filter(|v| !v.is_zero())
        .fold(BigInt::zero(), |g, v| g.gcd(v));
    if !g.is_zero() && !g.is_one() {
        for v in row.iter_mut() {
            *v /= &g;
        }
    }
}

/// Fraction-free reduced echelon form over the integers.
/// Returns the nonzero rows and, for each, its pivot column.
pub fn integer_echelon(rows: &[Vec<Rat>], ncols: usize) -> (Vec<Vec<BigInt>>, Vec<usize>) {
    let mut work: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| to_integer_row(r))
        .filter(|r| r.iter().any(|v| !v.is_zero()))
        .collect();
    for r in work.iter_mut() {
        make_primitive(r);
    }
    let mut pivots = Vec::new();
    let mut top = 0;
    for col in 0..ncols {
        if top == work.len() {
            break;
        }
        // smallest nonzero entry as pivot keeps numbers small
        let Some(p) = (top..work.len())
            .filter(|&r| !work[r][col].is_zero())
            .min_by_key(|&r| work[r][col].abs())
        else {
            continue;
        };
        work.swap(top, p);
        let pivot_row = work[top].clone();
        let pv = pivot_row[col].clone();
        for r in 0..work.len() {
            if r == top || work[r][col].is_zero() {
                continue;
            }
            let f = work[r][col].clone();
            let g = pv.gcd(&f);
            let (mp, mf) = (&pv / &g, &f / &g);
            for (x, y) in work[r].iter_mut().zip(&pivot_row) {
                if y.is_zero() {
                    *x *= &mp;
                } else {
                    *x = &*x * &mp - y * &mf;
                }
            }
            make_primitive(&mut work[r]);
        }
        pivots.push(col);
        top += 1;
    }
    work.truncate(top);
    (work, pivots)
}

pub fn rank_of_rows(rows: &[Vec<Rat>]) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    integer_echelon(rows, ncols).1.len()
}

pub fn nullspace_of_rows(rows: &[Vec<Rat>], ncols: usize) -> Vec<Vec<Rat>> {
    let (ech, pivots) = integer_echelon(rows, ncols);
    let mut is_pivot = vec![None; ncols];
    for (r, &c) in pivots.iter().enumerate() {
        is_pivot[c] = Some(r);
    }
    (0..ncols)
        .filter(|&f| is_pivot[f].is_none())
        .map(|f| {
            let mut v = vec![Rat::zero(); ncols];
            v[f] = Rat::one();
            for (r, &c) in pivots.iter().enumerate() {
                let num = &ech[r][f];
                if !num.is_zero() {
                    v[c] = -Rat::new(num.clone(), ech[r][c].clone());
                }
            }
            v
        })
        .collect()
}

/// Solves `Σ_j x_j cols[j] = target` exactly; `None` if the target is outside the span
/// or the columns are dependent.
pub fn solve_combination(cols: &[Vec<Rat>], target: &[Rat]) -> Option<Vec<Rat>> {
    let n = cols.len();
    let len = target.len();
    // rows of the augmented system [cols | target]
    let rows: Vec<Vec<Rat>> = (0..len)
        .map(|i| {
            let mut r: Vec<Rat> = cols.iter().map(|c| c[i].clone()).collect();
            r.push(target[i].clone());
            r
        })
        .filter(|r| r.iter().any(|v| !v.is_zero()))
        .collect();
    let (ech, pivots) = integer_echelon(&rows, n + 1);
    if pivots.contains(&n) || pivots.len() < n {
        return None;
    }
    let mut x = vec![Rat::zero(); n];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = Rat::new(ech[r][n].clone(), ech[r][c].clone());
    }
    Some(x)
}

/// Echelon basis grown one vector at a time.
#[derive(Debug, Clone, Default)]
pub struct IncrementalSpan {
    rows: Vec<(usize, Vec<Rat>)>,
}

impl IncrementalSpan {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Adds `v` if it is independent of the vectors already inserted; reports whether it was.
    pub fn insert(&mut self, mut v: Vec<Rat>) -> bool {
        for (p, row) in &self.rows {
            if v[*p].is_zero() {
                continue;
            }
            let f = v[*p].clone();
            for (x, y) in v.iter_mut().zip(row) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        let Some(p) = v.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = Rat::one() / &v[p];
        for x in v.iter_mut() {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        for (_, row) in self.rows.iter_mut() {
            if !row[p].is_zero() {
                let f = row[p].clone();
                for (x, y) in row.iter_mut().zip(&v) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        self.rows.push((p, v));
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn m(rows: &[&[i64]]) -> QMatrix {
        QMatrix::from_rows(
            &rows
                .iter()
                .map(|r| r.iter().map(|&v| int(v)).collect())
                .collect::<Vec<_>>(),
        )
    }

    #[test]
    fn rank_and_nullspace() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(a.rank(), 2);
        let ns = a.nullspace();
        assert_eq!(ns.len(), 1);
        assert!(a.mul_vec(&ns[0]).iter().all(Zero::is_zero));
        assert_eq!(QMatrix::zeros(3, 4).nullspace().len(), 4);
        assert_eq!(QMatrix::identity(5).rank(), 5);
    }

    #[test]
    fn rational_entries() {
        let a = QMatrix::from_rows(&[vec![rat(1, 2), rat(1, 3)], vec![rat(3, 2), int(1)]]);
        assert_eq!(a.rank(), 1);
    }

    #[test]
    fn products_and_solves() {
        let a = m(&[&[1, 1], &[0, 1]]);
        assert_eq!(a.mul(&a), m(&[&[1, 2], &[0, 1]]));
        let x = solve_combination(
            &[vec![int(1), int(0)], vec![int(1), int(1)]],
            &[int(3), int(5)],
        )
        .unwrap();
        assert_eq!(x, vec![int(-2), int(5)]);
        assert!(solve_combination(&[vec![int(1), int(0)]], &[int(0), int(1)]).is_none());
    }

    #[test]
    fn incremental_span() {
        let mut s = IncrementalSpan::new();
        assert!(s.insert(vec![int(1), int(2), int(0)]));
        assert!(s.insert(vec![int(0), int(1), int(1)]));
        assert!(!s.insert(vec![int(2), int(5), int(1)]));
        assert!(!s.insert(vec![int(0), int(0), int(0)]));
        assert!(s.insert(vec![int(0), int(0), rat(1, 2)]));
        assert_eq!(s.rank(), 3);
    }
}
