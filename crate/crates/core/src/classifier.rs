//! Recurrence-based dimension count, generator assembly and the parameter sweep.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{b_basis_change, identify, span_algebra, AlgebraKind};
use crate::engine::{
    ansatz_index, ansatz_size, realize, DefectChecker, GeneratorFamily, SymmetryMap, TruncatedBasis,
};
use crate::error::{Error, Result};
use crate::invariant::{candidate_generators, SymmetryOp};
use crate::linalg::{integer_echelon, nullspace_of_rows, IncrementalSpan};
use crate::loci::{is_generic_on, Curve};
use crate::rational::{falling, fmt_rat, int, rat, Rat};
use crate::ring::Space;

/// Linear conditions on the unknowns `T_{r,ℓ}` (indexed by [`ansatz_index`]).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecurrenceSystem {
    pub k: usize,
    pub lambda: Rat,
    pub mu: Rat,
    /// Sparse rows `(unknown, coefficient)`.
    pub equations: Vec<Vec<(usize, Rat)>>,
}

impl RecurrenceSystem {
    pub fn unknowns(&self) -> usize {
        ansatz_size(self.k)
    }

    pub fn dense_rows(&self) -> Vec<Vec<Rat>> {
        self.equations
            .iter()
            .map(|eq| {
                let mut row = vec![Rat::zero(); self.unknowns()];
                for (i, c) in eq {
                    row[*i] += c;
                }
                row
            })
            .collect()
    }
}

fn push_equation(eqs: &mut Vec<Vec<(usize, Rat)>>, terms: Vec<(usize, Rat)>) {
    let terms: Vec<_> = terms.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    if !terms.is_empty() {
        eqs.push(terms);
    }
}

/// Conditions from commuting with `x² d/dx` (for `1 ≤ ℓ ≤ r ≤ k`) and `x³ d/dx`
/// (for `2 ≤ ℓ ≤ r ≤ k`) on translation- and dilation-invariant maps.
pub fn build_system(k: usize, lambda: &Rat, mu: &Rat) -> RecurrenceSystem {
    let d = mu - lambda;
    let ix = ansatz_index;
    let mut equations = Vec::new();
    for r in 1..=k {
        let rr = int(r as i64);
        for l in 1..=r {
            let ll = int(l as i64);
            push_equation(
                &mut equations,
                vec![
                    (ix(r - 1, l - 1), &rr + int(2) * lambda - int(1)),
                    (ix(r, l - 1), -(&rr + int(2) * lambda - &ll)),
                    (
                        ix(r, l),
                        -(&ll * (int(2) * &d - int(2) * &rr + &ll - int(1))),
                    ),
                ],
            );
            if l >= 2 {
                push_equation(
                    &mut equations,
                    vec![
                        (
                            ix(r, l),
                            &ll * (&ll - int(1)) * (&ll - int(2) + int(3) * &d - int(3) * &rr),
                        ),
                        (
                            ix(r - 1, l - 1),
                            -(int(3) * (&ll - int(1)) * (&rr - int(1) + int(2) * lambda)),
                        ),
                        (ix(r - 2, l - 2), -(&rr - int(2) + int(3) * lambda)),
                        (ix(r, l - 2), &rr - &ll + int(3) * lambda),
                    ],
                );
            }
        }
    }
    RecurrenceSystem {
        k,
        lambda: lambda.clone(),
        mu: mu.clone(),
        equations,
    }
}

pub fn local_dimension(sys: &RecurrenceSystem) -> usize {
    let n = sys.unknowns();
    n - integer_echelon(&sys.dense_rows(), n).1.len()
}

/// Nullspace basis in the `T_{r,ℓ}` coordinates.
pub fn solutions(sys: &RecurrenceSystem) -> Vec<Vec<Rat>> {
    nullspace_of_rows(&sys.dense_rows(), sys.unknowns())
}

/// `t_{r,ℓ} = r!/(r−ℓ)! · T_{r,ℓ}`, the coefficient of `a_r d^r ↦ a_r^{(ℓ)} d^{r−ℓ}`.
pub fn to_ansatz_coordinates(k: usize, big_t: &[Rat]) -> Vec<Rat> {
    let mut t = vec![Rat::zero(); ansatz_size(k)];
    for r in 0..=k {
        for l in 0..=r {
            t[ansatz_index(r, l)] = &big_t[ansatz_index(r, l)] * falling(r, l);
        }
    }
    t
}

pub fn local_dim(k: usize, lambda: &Rat, mu: &Rat) -> usize {
    local_dimension(&build_system(k, lambda, mu))
}

pub fn nonlocal_dim(k: usize, lambda: &Rat, mu: &Rat, space: Space) -> usize {
    usize::from(space == Space::Circle && k >= 1 && lambda.is_zero() && mu.is_one())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub k: usize,
    pub lambda: String,
    pub mu: String,
    pub space: Space,
    pub local_dim: usize,
    pub nonlocal_dim: usize,
    pub total: usize,
    pub algebra: String,
    pub generators: Vec<String>,
}

/// The selected generators realized on a truncated basis, plus the identified algebra.
#[derive(Debug, Clone)]
pub struct Classification {
    pub report: ClassificationReport,
    pub basis: TruncatedBasis,
    pub generators: Vec<SymmetryOp>,
    pub maps: Vec<SymmetryMap>,
    pub kind: Option<AlgebraKind>,
}

/// Candidates kept in order whenever they enlarge the span of those already kept.
pub fn select_generators(
    candidates: &[SymmetryOp],
    basis: &TruncatedBasis,
) -> Result<(Vec<SymmetryOp>, Vec<SymmetryMap>)> {
    let realized = candidates
        .par_iter()
        .map(|c| realize(c, basis))
        .collect::<Result<Vec<_>>>()?;
    // only positions where some candidate is nonzero matter for independence
    let support: Vec<usize> = (0..basis.dim() * basis.dim())
        .filter(|&i| realized.iter().any(|m| !m.matrix.entries()[i].is_zero()))
        .collect();
    let mut span = IncrementalSpan::new();
    let mut ops = Vec::new();
    let mut maps = Vec::new();
    for (c, m) in candidates.iter().zip(realized) {
        if span.insert(
            support
                .iter()
                .map(|&i| m.matrix.entries()[i].clone())
                .collect(),
        ) {
            ops.push(c.clone());
            maps.push(m);
        }
    }
    Ok((ops, maps))
}

fn realize_named(names: &[&str], basis: &TruncatedBasis) -> Result<Vec<SymmetryMap>> {
    names
        .iter()
        .map(|n| realize(&SymmetryOp::catalog(n)?, basis))
        .collect()
}

/// Classifies `I^k_{λ,μ}` on a truncation `m` (default `k + 6`).
pub fn classify(
    k: usize,
    lambda: &Rat,
    mu: &Rat,
    space: Space,
    m: Option<usize>,
) -> Result<Classification> {
    let m = m.unwrap_or(k + 6);
    let local = local_dim(k, lambda, mu);
    let nonlocal = nonlocal_dim(k, lambda, mu, space);
    let total = local + nonlocal;
    let basis = TruncatedBasis::new(k, m, space, lambda.clone(), mu.clone());
    let candidates = candidate_generators(k, lambda, mu, space);
    let (generators, maps) = select_generators(&candidates, &basis)?;
    let at = format!("k={k}, ({}, {}), {space}", fmt_rat(lambda), fmt_rat(mu));
    if maps.len() != total {
        return Err(Error::SpanMismatch(format!(
            "{at}: generators span {} dimensions, expected {total}",
            maps.len()
        )));
    }
    let checker = DefectChecker::new(&basis, &GeneratorFamily::default_for(space))?;
    for t in &maps {
        if checker.defect(t) != 0 {
            return Err(Error::OracleDisagreement(format!(
                "{at}: generator {} is not equivariant",
                t.name
            )));
        }
    }
    let algebra = span_algebra(&maps)?;
    let by_fingerprint = identify(&algebra).kind;
    let kind = if nonlocal == 1 {
        let six = realize_named(&["Id", "C", "P0", "P0star", "P1", "L"], &basis)?;
        let six: [SymmetryMap; 6] = six.try_into().expect("six maps");
        let change = b_basis_change(&six)?;
        if change.kind != by_fingerprint {
            return Err(Error::OracleDisagreement(format!(
                "{at}: basis change gives {:?}, fingerprints give {:?}",
                change.kind.map(|k| k.to_string()),
                by_fingerprint.map(|k| k.to_string())
            )));
        }
        change.kind
    } else {
        by_fingerprint
    };
    let report = ClassificationReport {
        k,
        lambda: fmt_rat(lambda),
        mu: fmt_rat(mu),
        space,
        local_dim: local,
        nonlocal_dim: nonlocal,
        total,
        algebra: kind
            .as_ref()
            .map_or_else(|| "unidentified".into(), ToString::to_string),
        generators: generators.iter().map(SymmetryOp::name).collect(),
    };
    Ok(Classification {
        report,
        basis,
        generators,
        maps,
        kind,
    })
}

/// A row of the dimension table and its representative parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowSpec {
    pub label: String,
    pub points: Vec<(Rat, Rat)>,
}

fn sample_rat(rng: &mut ChaCha8Rng) -> Rat {
    let num: i64 = rng.gen_range(-97..=97);
    let den: i64 = loop {
        let d = rng.gen_range(-97..=97);
        if d != 0 {
            break d;
        }
    };
    rat(num, den)
}

/// Random points generic on `on` (or in the plane), avoiding everything exceptional up to `max_k`.
pub fn sample_points(
    on: Option<Curve>,
    count: usize,
    max_k: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<(Rat, Rat)> {
    let mut out: Vec<(Rat, Rat)> = Vec::new();
    while out.len() < count {
        let p = match on {
            None => Some((sample_rat(rng), sample_rat(rng))),
            Some(c) => c.point(&sample_rat(rng)),
        };
        if let Some((l, m)) = p {
            if is_generic_on(on, &l, &m, max_k) && !out.contains(&(l.clone(), m.clone())) {
                out.push((l, m));
            }
        }
    }
    out
}

fn fixed(points: &[(i64, i64, i64, i64)]) -> Vec<(Rat, Rat)> {
    points
        .iter()
        .map(|&(a, b, c, d)| (rat(a, b), rat(c, d)))
        .collect()
}

/// The nine rows: generic, the lines, the curves and the isolated points.
pub fn row_specs(samples: usize, seed: u64, max_k: usize) -> Vec<RowSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut on = |curves: &[Curve]| -> Vec<(Rat, Rat)> {
        curves
            .iter()
            .flat_map(|c| sample_points(Some(*c), samples, max_k, &mut rng))
            .collect()
    };
    let lines01 = on(&[Curve::LambdaZero, Curve::MuOne]);
    let sum = on(&[Curve::SumOne]);
    let hyper = on(&[Curve::Hyperbola, Curve::ShiftTwo]);
    let generic = sample_points(None, samples, max_k, &mut rng);
    let row = |label: &str, points| RowSpec {
        label: label.into(),
        points,
    };
    vec![
        row("generic", generic),
        row("lambda=0 or mu=1", lines01),
        row("lambda+mu=1", sum),
        row("hyperbola or mu-lambda=2", hyper),
        row(
            "(0,5/4) (-1/4,1) (0,3) (-2,1)",
            fixed(&[(0, 1, 5, 4), (-1, 4, 1, 1), (0, 1, 3, 1), (-2, 1, 1, 1)]),
        ),
        row("(0,0) (1,1)", fixed(&[(0, 1, 0, 1), (1, 1, 1, 1)])),
        row("(-2/3,5/3)", fixed(&[(-2, 3, 5, 3)])),
        row("(-1/2,3/2)", fixed(&[(-1, 2, 3, 2)])),
        row("(0,1) local", fixed(&[(0, 1, 1, 1)])),
    ]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub k: usize,
    pub dim: usize,
    /// Distinct algebra kinds over the row's points, joined by `|`.
    pub algebra: Option<String>,
}

/// Local dimension of each row at order `k`; points of one row must agree.
pub fn sweep(k: usize, space: Space, rows: &[RowSpec], with_kinds: bool) -> Result<Vec<Cell>> {
    rows.par_iter()
        .map(|row| {
            let dims: Vec<usize> = row.points.iter().map(|(l, m)| local_dim(k, l, m)).collect();
            if dims.iter().any(|d| *d != dims[0]) {
                let pts: Vec<String> = row
                    .points
                    .iter()
                    .zip(&dims)
                    .map(|((l, m), d)| format!("({}, {}) → {d}", fmt_rat(l), fmt_rat(m)))
                    .collect();
                return Err(Error::OracleDisagreement(format!(
                    "row {:?} at k={k}: {}",
                    row.label,
                    pts.join(", ")
                )));
            }
            let algebra = if with_kinds {
                let mut kinds: Vec<String> = Vec::new();
                for (l, m) in &row.points {
                    let label = classify(k, l, m, space, None)?.report.algebra;
                    if !kinds.contains(&label) {
                        kinds.push(label);
                    }
                }
                Some(kinds.join("|"))
            } else {
                None
            };
            Ok(Cell {
                k,
                dim: dims[0],
                algebra,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub label: String,
    pub points: Vec<(String, String)>,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionTable {
    pub space: Space,
    pub max_k: usize,
    pub rows: Vec<TableRow>,
}

pub fn dimension_table(
    max_k: usize,
    space: Space,
    samples: usize,
    seed: u64,
    with_kinds: bool,
) -> Result<DimensionTable> {
    let specs = row_specs(samples, seed, max_k);
    let columns = (0..=max_k)
        .into_par_iter()
        .map(|k| sweep(k, space, &specs, with_kinds))
        .collect::<Result<Vec<_>>>()?;
    let rows = specs
        .iter()
        .enumerate()
        .map(|(i, s)| TableRow {
            label: s.label.clone(),
            points: s
                .points
                .iter()
                .map(|(l, m)| (fmt_rat(l), fmt_rat(m)))
                .collect(),
            cells: columns.iter().map(|col| col[i].clone()).collect(),
        })
        .collect();
    Ok(DimensionTable { space, max_k, rows })
}

impl DimensionTable {
    pub fn dims(&self, row: usize) -> Vec<usize> {
        self.rows[row].cells.iter().map(|c| c.dim).collect()
    }

    /// One line per row: label, then `dim` or `dim:algebra` per order.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("row");
        for k in 0..=self.max_k {
            s.push_str(&format!(",k={k}"));
        }
        s.push('\n');
        for r in &self.rows {
            s.push_str(&format!("\"{}\"", r.label));
            for c in &r.cells {
                match &c.algebra {
                    Some(a) => s.push_str(&format!(",{}:{a}", c.dim)),
                    None => s.push_str(&format!(",{}", c.dim)),
                }
            }
            s.push('\n');
        }
        s
    }
}

/// `true` when the two sides have equal dimension for `(λ, μ)` and `(1−μ, 1−λ)`.
pub fn conjugation_symmetric(k: usize, lambda: &Rat, mu: &Rat) -> bool {
    local_dim(k, lambda, mu) == local_dim(k, &(Rat::one() - mu), &(Rat::one() - lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{ansatz_apply, is_equivariant};
    use crate::loci::isolated_points;

    #[test]
    fn small_systems() {
        let s = build_system(0, &rat(1, 3), &rat(1, 5));
        assert!(s.equations.is_empty());
        assert_eq!(local_dimension(&s), 1);
        assert_eq!(local_dim(1, &rat(1, 3), &rat(1, 5)), 2);
        assert_eq!(local_dim(3, &int(0), &int(1)), 5);
        assert_eq!(local_dim(4, &rat(-2, 3), &rat(5, 3)), 3);
        assert_eq!(local_dim(6, &int(0), &int(0)), 3);
        assert_eq!(local_dim(4, &rat(1, 3), &rat(1, 5)), 1);
    }

    #[test]
    fn solutions_are_equivariant_maps() {
        for (k, l, m) in [
            (2, rat(-1, 2), rat(3, 2)),
            (3, int(0), int(1)),
            (4, int(0), rat(5, 4)),
        ] {
            let sys = build_system(k, &l, &m);
            let basis = TruncatedBasis::new(k, k + 6, Space::Line, l.clone(), m.clone());
            for big_t in solutions(&sys) {
                let t = to_ansatz_coordinates(k, &big_t);
                let cols = (0..basis.dim())
                    .map(|j| {
                        basis
                            .coordinates(&ansatz_apply(&t, k, &basis.element(j)).unwrap())
                            .unwrap()
                    })
                    .collect::<Vec<_>>();
                let map = SymmetryMap {
                    basis: basis.clone(),
                    matrix: crate::linalg::QMatrix::from_columns(basis.dim(), &cols),
                    nonlocal: false,
                    name: "solution".into(),
                };
                assert!(is_equivariant(&map, &GeneratorFamily::line(3)).unwrap());
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_and_generic() {
        let a = row_specs(3, 7, 6);
        assert_eq!(a, row_specs(3, 7, 6));
        assert_eq!(a.len(), 9);
        for (l, m) in &a[0].points {
            assert!(is_generic_on(None, l, m, 6));
        }
        assert!(a[1].points.iter().all(|(l, m)| l.is_zero() || m.is_one()));
        assert_eq!(isolated_points().len(), 11);
    }

    #[test]
    fn classify_reports() {
        let c = classify(3, &rat(-1, 2), &rat(3, 2), Space::Circle, None).unwrap();
        assert_eq!((c.report.total, c.report.algebra.as_str()), (3, "t2"));
        let c = classify(2, &int(0), &int(1), Space::Line, None).unwrap();
        assert_eq!((c.report.total, c.report.algebra.as_str()), (4, "t2+R"));
        let json = serde_json::to_value(&c.report).unwrap();
        assert_eq!(json["space"], "line");
        assert_eq!(json["lambda"], "0");
    }
}
