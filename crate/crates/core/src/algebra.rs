//! Finite-dimensional associative algebras given by structure constants,
//! the matrix models `R^n`, `a`, `t2`, `b`, and identification by invariants.

use std::fmt;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::SymmetryMap;
use crate::error::{Error, Result};
use crate::linalg::{integer_echelon, nullspace_of_rows, rank_of_rows, solve_combination, QMatrix};
use crate::rational::{fmt_rat, int, rat, Rat};

/// Structure constants `c[i][j][m]`: `e_i e_j = Σ_m c[i][j][m] e_m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteAlgebra {
    pub basis_names: Vec<String>,
    pub structure: Vec<Vec<Vec<Rat>>>,
}

fn unit_vector(n: usize, i: usize) -> Vec<Rat> {
    (0..n)
        .map(|j| if i == j { Rat::one() } else { Rat::zero() })
        .collect()
}

impl FiniteAlgebra {
    pub fn dim(&self) -> usize {
        self.basis_names.len()
    }

    /// Algebra spanned by linearly independent matrices closed under products.
    pub fn from_matrices(names: Vec<String>, mats: &[QMatrix]) -> Result<Self> {
        let flat: Vec<Vec<Rat>> = mats.iter().map(|m| m.entries().to_vec()).collect();
        let (_, pivots) = integer_echelon(&flat, flat.first().map_or(0, Vec::len));
        if pivots.len() != flat.len() {
            return Err(Error::SpanMismatch(
                "spanning maps are linearly dependent".into(),
            ));
        }
        // coordinates are read off the pivot entries, then checked on every entry
        let at_pivots = |v: &[Rat]| pivots.iter().map(|&p| v[p].clone()).collect::<Vec<_>>();
        let reduced: Vec<Vec<Rat>> = flat.iter().map(|v| at_pivots(v)).collect();
        let sparse: Vec<Vec<(usize, &Rat)>> = flat
            .iter()
            .map(|v| v.iter().enumerate().filter(|(_, x)| !x.is_zero()).collect())
            .collect();
        let n = mats.len();
        let structure = (0..n)
            .into_par_iter()
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let p = mats[i].mul(&mats[j]);
                        let leaves = || {
                            Error::SpanNotClosed(format!(
                                "{} * {} leaves the span",
                                names[i], names[j]
                            ))
                        };
                        let c = solve_combination(&reduced, &at_pivots(p.entries()))
                            .ok_or_else(leaves)?;
                        let mut back = vec![Rat::zero(); p.entries().len()];
                        for (ci, m) in c.iter().zip(&sparse) {
                            if !ci.is_zero() {
                                for (idx, x) in m {
                                    back[*idx] += ci * *x;
                                }
                            }
                        }
                        if back != p.entries() {
                            return Err(leaves());
                        }
                        Ok(c)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FiniteAlgebra {
            basis_names: names,
            structure,
        })
    }

    pub fn product(&self, x: &[Rat], y: &[Rat]) -> Vec<Rat> {
        let n = self.dim();
        let mut out = vec![Rat::zero(); n];
        for i in 0..n {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if y[j].is_zero() {
                    continue;
                }
                let s = &x[i] * &y[j];
                for (o, c) in out.iter_mut().zip(&self.structure[i][j]) {
                    if !c.is_zero() {
                        *o += &s * c;
                    }
                }
            }
        }
        out
    }

    pub fn basis_product(&self, i: usize, j: usize) -> &[Rat] {
        &self.structure[i][j]
    }

    pub fn is_associative(&self) -> bool {
        let n = self.dim();
        let e: Vec<_> = (0..n).map(|i| unit_vector(n, i)).collect();
        (0..n).all(|i| {
            (0..n).all(|j| {
                (0..n).all(|k| {
                    let l = self.product(&self.product(&e[i], &e[j]), &e[k]);
                    let r = self.product(&e[i], &self.product(&e[j], &e[k]));
                    l == r
                })
            })
        })
    }

    pub fn is_commutative(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| self.structure[i][j] == self.structure[j][i]))
    }

    /// The two-sided unit, if any.
    pub fn unit(&self) -> Option<Vec<Rat>> {
        let n = self.dim();
        // u e_j = e_j and e_j u = e_j, linear in u
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for j in 0..n {
            for m in 0..n {
                rows.push(
                    (0..n)
                        .map(|i| self.structure[i][j][m].clone())
                        .collect::<Vec<_>>(),
                );
                rhs.push(if m == j { Rat::one() } else { Rat::zero() });
                rows.push(
                    (0..n)
                        .map(|i| self.structure[j][i][m].clone())
                        .collect::<Vec<_>>(),
                );
                rhs.push(if m == j { Rat::one() } else { Rat::zero() });
            }
        }
        let cols: Vec<Vec<Rat>> = (0..n)
            .map(|i| rows.iter().map(|r| r[i].clone()).collect())
            .collect();
        solve_combination(&cols, &rhs)
    }

    pub fn center_dim(&self) -> usize {
        let n = self.dim();
        let mut rows = Vec::new();
        for j in 0..n {
            for m in 0..n {
                rows.push(
                    (0..n)
                        .map(|i| &self.structure[i][j][m] - &self.structure[j][i][m])
                        .collect::<Vec<_>>(),
                );
            }
        }
        nullspace_of_rows(&rows, n).len()
    }

    /// Trace of left multiplication by `x`.
    fn left_trace(&self, x: &[Rat]) -> Rat {
        let n = self.dim();
        (0..n)
            .map(|j| self.product(x, &unit_vector(n, j))[j].clone())
            .fold(Rat::zero(), |a, b| a + b)
    }

    /// Radical as the kernel of the trace form `(x, y) ↦ tr L_{xy}`, valid in characteristic 0.
    pub fn radical_dim(&self) -> usize {
        let n = self.dim();
        let gram: Vec<Vec<Rat>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| self.left_trace(&self.structure[i][j]))
                    .collect()
            })
            .collect();
        n - rank_of_rows(&gram)
    }

    pub fn fingerprint(&self) -> Fingerprint {
        Fingerprint {
            dim: self.dim(),
            radical: self.radical_dim(),
            center: self.center_dim(),
            commutative: self.is_commutative(),
            unital: self.unit().is_some(),
        }
    }

    /// Structure constants in a new basis given by coordinate vectors in the old one.
    pub fn change_basis(&self, names: Vec<String>, vectors: &[Vec<Rat>]) -> Result<FiniteAlgebra> {
        if rank_of_rows(vectors) != vectors.len() || vectors.len() != self.dim() {
            return Err(Error::SpanMismatch("new basis is not a basis".into()));
        }
        let n = self.dim();
        let mut structure = vec![vec![Vec::new(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let p = self.product(&vectors[i], &vectors[j]);
                structure[i][j] = solve_combination(vectors, &p).expect("basis spans");
            }
        }
        Ok(FiniteAlgebra {
            basis_names: names,
            structure,
        })
    }

    /// Rows `i,j,k,c_{ij}^k` for nonzero constants.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("i,j,k,c\n");
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                for m in 0..n {
                    let c = &self.structure[i][j][m];
                    if !c.is_zero() {
                        s.push_str(&format!(
                            "{},{},{},{}\n",
                            self.basis_names[i],
                            self.basis_names[j],
                            self.basis_names[m],
                            fmt_rat(c)
                        ));
                    }
                }
            }
        }
        s
    }
}

/// Algebra spanned by realized symmetries on a common basis.
pub fn span_algebra(maps: &[SymmetryMap]) -> Result<FiniteAlgebra> {
    if let Some(first) = maps.first() {
        if maps.iter().any(|m| m.basis != first.basis) {
            return Err(Error::SpanMismatch(
                "maps live on different truncated bases".into(),
            ));
        }
    }
    let names = maps.iter().map(|m| m.name.clone()).collect();
    let mats: Vec<QMatrix> = maps.iter().map(|m| m.matrix.clone()).collect();
    FiniteAlgebra::from_matrices(names, &mats)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Fingerprint {
    pub dim: usize,
    pub radical: usize,
    pub center: usize,
    pub commutative: bool,
    pub unital: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    B,
    T2,
    A,
}

/// A direct sum `atoms ⊕ R^r`, printed in the canonical order `b, t2, a, R^r`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AlgebraKind {
    pub atoms: Vec<Atom>,
    pub reals: usize,
}

impl AlgebraKind {
    pub fn new(mut atoms: Vec<Atom>, reals: usize) -> Self {
        atoms.sort();
        AlgebraKind { atoms, reals }
    }

    pub fn reals(n: usize) -> Self {
        Self::new(Vec::new(), n)
    }

    pub fn dim(&self) -> usize {
        self.reals
            + self
                .atoms
                .iter()
                .map(|a| match a {
                    Atom::B => 4,
                    Atom::T2 => 3,
                    Atom::A => 2,
                })
                .sum::<usize>()
    }

    /// Kinds with at most one non-real summand, up to the given dimension.
    pub fn catalog(max_dim: usize) -> Vec<AlgebraKind> {
        let mut out = Vec::new();
        for atom in [None, Some(Atom::B), Some(Atom::T2), Some(Atom::A)] {
            for r in 0..=max_dim {
                let k = AlgebraKind::new(atom.into_iter().collect(), r);
                if k.dim() >= 1 && k.dim() <= max_dim {
                    out.push(k);
                }
            }
        }
        out
    }

    /// Matrix model as an algebra with named basis.
    pub fn model(&self) -> FiniteAlgebra {
        let mut blocks: Vec<Vec<QMatrix>> = self.atoms.iter().map(|a| atom_model(*a)).collect();
        for _ in 0..self.reals {
            blocks.push(vec![QMatrix::identity(1)]);
        }
        let size: usize = blocks.iter().map(|b| b[0].rows()).sum();
        let mut mats = Vec::new();
        let mut offset = 0;
        for b in &blocks {
            for m in b {
                let mut big = QMatrix::zeros(size, size);
                for i in 0..m.rows() {
                    for j in 0..m.cols() {
                        big.set(offset + i, offset + j, m.get(i, j).clone());
                    }
                }
                mats.push(big);
            }
            offset += b[0].rows();
        }
        let names = (0..mats.len()).map(|i| format!("e{i}")).collect();
        FiniteAlgebra::from_matrices(names, &mats).expect("model matrices are a closed basis")
    }
}

fn matrix(n: usize, entries: &[(usize, usize)]) -> QMatrix {
    let mut m = QMatrix::zeros(n, n);
    for &(i, j) in entries {
        m.set(i, j, Rat::one());
    }
    m
}

fn atom_model(a: Atom) -> Vec<QMatrix> {
    match a {
        Atom::A => vec![QMatrix::identity(2), matrix(2, &[(1, 0)])],
        Atom::T2 => vec![
            matrix(2, &[(0, 0)]),
            matrix(2, &[(1, 1)]),
            matrix(2, &[(1, 0)]),
        ],
        Atom::B => b_generators().to_vec(),
    }
}

/// `ā, b̄, c̄, d̄` as 4×4 matrices.
pub fn b_generators() -> [QMatrix; 4] {
    [
        matrix(4, &[(0, 0), (1, 1)]),
        matrix(4, &[(2, 2), (3, 3)]),
        matrix(4, &[(2, 1)]),
        matrix(4, &[(0, 3)]),
    ]
}

/// Structure constants of `b` in the basis `ā, b̄, c̄, d̄`.
pub fn b_table() -> FiniteAlgebra {
    let names = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
    FiniteAlgebra::from_matrices(names, &b_generators()).expect("closed")
}

impl fmt::Display for AlgebraKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .atoms
            .iter()
            .map(|a| {
                match a {
                    Atom::B => "b",
                    Atom::T2 => "t2",
                    Atom::A => "a",
                }
                .to_string()
            })
            .collect();
        match self.reals {
            0 => {}
            1 => parts.push("R".into()),
            r => parts.push(format!("R^{r}")),
        }
        f.write_str(&parts.join("+"))
    }
}

/// Outcome of identification; `kind` is `None` when nothing matches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Identification {
    pub kind: Option<AlgebraKind>,
    pub fingerprint: Fingerprint,
}

impl Identification {
    pub fn label(&self) -> String {
        self.kind
            .as_ref()
            .map_or_else(|| "unidentified".to_string(), ToString::to_string)
    }
}

/// Matches the fingerprint against the models of every catalog kind of equal dimension.
/// Within the catalog the fingerprint separates all kinds, so a match is an isomorphism.
pub fn identify(alg: &FiniteAlgebra) -> Identification {
    let fingerprint = alg.fingerprint();
    let kind = if fingerprint.unital && alg.is_associative() {
        let matches: Vec<AlgebraKind> = AlgebraKind::catalog(alg.dim())
            .into_iter()
            .filter(|k| k.dim() == alg.dim() && k.model().fingerprint() == fingerprint)
            .collect();
        if matches.len() == 1 {
            matches.into_iter().next()
        } else {
            None
        }
    } else {
        None
    };
    Identification { kind, fingerprint }
}

/// Result of the explicit basis change on the span of `Id, C, P0, P0*, P1, L`.
#[derive(Debug, Clone)]
pub struct BChange {
    /// Structure constants of `ā, b̄, c̄, d̄` inside the span.
    pub b_part: FiniteAlgebra,
    pub matches_b: bool,
    /// Number of linearly independent nonzero central elements among `z1, z2`.
    pub central_rank: usize,
    pub z_central: bool,
    pub z_nonzero: [bool; 2],
    pub kind: Option<AlgebraKind>,
}

/// Applies `ā = ½(2P1+P0−P0*)`, `b̄ = ½(P0+P0*)`, `c̄ = ½(P0−P0*)`, `d̄ = L`,
/// `z1 = Id+C−P0−P0*`, `z2 = Id−C−P0+P0*−2P1` to realized maps in the order
/// `[Id, C, P0, P0*, P1, L]`.
pub fn b_basis_change(maps: &[SymmetryMap; 6]) -> Result<BChange> {
    let [id, c, p0, p0s, p1, l] = maps;
    let half = rat(1, 2);
    let combo = |terms: &[(Rat, &SymmetryMap)]| SymmetryMap::combination(terms);
    let a = combo(&[(int(1), p1), (half.clone(), p0), (-half.clone(), p0s)]);
    let b = combo(&[(half.clone(), p0), (half.clone(), p0s)]);
    let cc = combo(&[(half.clone(), p0), (-half.clone(), p0s)]);
    let d = l.clone();
    let z1 = combo(&[(int(1), id), (int(1), c), (int(-1), p0), (int(-1), p0s)]);
    let z2 = combo(&[
        (int(1), id),
        (int(-1), c),
        (int(-1), p0),
        (int(1), p0s),
        (int(-2), p1),
    ]);
    let names: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
    let b_part = FiniteAlgebra::from_matrices(
        names,
        &[
            a.matrix.clone(),
            b.matrix.clone(),
            cc.matrix.clone(),
            d.matrix.clone(),
        ],
    )?;
    let matches_b = b_part.structure == b_table().structure;
    let generators = [&a, &b, &cc, &d, id, c, p0, p0s, p1, l];
    let z_central = [&z1, &z2].iter().all(|z| {
        generators
            .iter()
            .all(|g| z.matrix.mul(&g.matrix) == g.matrix.mul(&z.matrix))
    });
    let z_nonzero = [!z1.is_zero(), !z2.is_zero()];
    let zs: Vec<Vec<Rat>> = [&z1, &z2]
        .iter()
        .map(|z| z.matrix.entries().to_vec())
        .collect();
    let central_rank = rank_of_rows(&zs);
    let kind = (matches_b && z_central).then(|| AlgebraKind::new(vec![Atom::B], central_rank));
    Ok(BChange {
        b_part,
        matches_b,
        central_rank,
        z_central,
        z_nonzero,
        kind,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn b_table_matches_model() {
        let t = b_table();
        let e = |i: usize| unit_vector(4, i);
        let z = vec![Rat::zero(); 4];
        // rows ā, b̄, c̄, d̄ against columns ā, b̄, c̄, d̄
        let expected = [
            [e(0), z.clone(), z.clone(), e(3)],
            [z.clone(), e(1), e(2), z.clone()],
            [e(2), z.clone(), z.clone(), z.clone()],
            [z.clone(), e(3), z.clone(), z.clone()],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(t.basis_product(i, j), expected[i][j].as_slice(), "{i}{j}");
            }
        }
    }

    #[test]
    fn model_fingerprints_are_distinct() {
        let kinds = AlgebraKind::catalog(8);
        let prints: Vec<_> = kinds.iter().map(|k| k.model().fingerprint()).collect();
        for i in 0..prints.len() {
            for j in 0..i {
                assert_ne!(prints[i], prints[j], "{} vs {}", kinds[i], kinds[j]);
            }
        }
        assert_eq!(
            AlgebraKind::new(vec![Atom::B], 2).model().fingerprint(),
            Fingerprint {
                dim: 6,
                radical: 2,
                center: 3,
                commutative: false,
                unital: true
            }
        );
    }

    #[test]
    fn kind_names() {
        assert_eq!(AlgebraKind::reals(1).to_string(), "R");
        assert_eq!(AlgebraKind::reals(3).to_string(), "R^3");
        assert_eq!(AlgebraKind::new(vec![Atom::B], 1).to_string(), "b+R");
        assert_eq!(AlgebraKind::new(vec![Atom::T2], 2).to_string(), "t2+R^2");
        assert_eq!(AlgebraKind::new(vec![Atom::A], 0).to_string(), "a");
    }

    #[test]
    fn identify_models_and_reject_non_unital() {
        for k in AlgebraKind::catalog(7) {
            assert_eq!(identify(&k.model()).kind, Some(k.clone()));
        }
        let nil = FiniteAlgebra {
            basis_names: vec!["n".into()],
            structure: vec![vec![vec![Rat::zero()]]],
        };
        assert_eq!(identify(&nil).kind, None);
        assert_eq!(identify(&nil).label(), "unidentified");
    }

    #[test]
    fn csv_export() {
        let csv = AlgebraKind::new(vec![Atom::A], 0).model().to_csv();
        assert!(csv.starts_with("i,j,k,c\n"));
        assert!(csv.contains("e0,e1,e1,1"));
    }
}
