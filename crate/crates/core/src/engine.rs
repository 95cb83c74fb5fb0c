//! Finite realizations of operator modules, matrices of symmetries,
//! equivariance defects and the brute-force classifier of local symmetries.

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::density::{lie_derivative_density, Density, DensityOperator, VectorField};
use crate::error::{Error, Result};
use crate::invariant::SymmetryOp;
use crate::linalg::{integer_echelon, nullspace_of_rows, rank_of_rows, QMatrix};
use crate::rational::{fmt_rat, int, Rat};
use crate::ring::{CoefficientFunction, Space};

/// Operators `b · d^i` with `i ≤ k` and `b` a monomial `x^m` (`m ≤ M`) on the line
/// or one of `1, cos x, sin x, …, cos Mx, sin Mx` on the circle.
/// Index order: `i` ascending, then the function slot ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedBasis {
    pub k: usize,
    pub m: usize,
    pub space: Space,
    pub lambda: Rat,
    pub mu: Rat,
}

impl TruncatedBasis {
    pub fn new(k: usize, m: usize, space: Space, lambda: Rat, mu: Rat) -> Self {
        TruncatedBasis {
            k,
            m,
            space,
            lambda,
            mu,
        }
    }

    /// Number of coefficient functions per order.
    pub fn slots(&self) -> usize {
        match self.space {
            Space::Line => self.m + 1,
            Space::Circle => 2 * self.m + 1,
        }
    }

    pub fn dim(&self) -> usize {
        (self.k + 1) * self.slots()
    }

    /// Same module, larger truncation.
    pub fn enlarged(&self, extra: usize) -> TruncatedBasis {
        TruncatedBasis {
            m: self.m + extra,
            ..self.clone()
        }
    }

    pub fn slot_function(&self, s: usize) -> CoefficientFunction {
        match self.space {
            Space::Line => CoefficientFunction::monomial(Rat::one(), s),
            Space::Circle if s == 0 => CoefficientFunction::one(Space::Circle),
            Space::Circle if s % 2 == 1 => CoefficientFunction::cos(s.div_ceil(2) as u32),
            Space::Circle => CoefficientFunction::sin((s / 2) as u32),
        }
    }

    /// Degree (line) or frequency (circle) of the coefficient of element `idx`.
    pub fn size_of(&self, idx: usize) -> usize {
        let s = idx % self.slots();
        match self.space {
            Space::Line => s,
            Space::Circle => s.div_ceil(2),
        }
    }

    pub fn order_of(&self, idx: usize) -> usize {
        idx / self.slots()
    }

    pub fn element(&self, idx: usize) -> DensityOperator {
        DensityOperator::monomial(
            self.lambda.clone(),
            self.mu.clone(),
            self.slot_function(idx % self.slots()),
            self.order_of(idx),
        )
    }

    pub fn elements(&self) -> Vec<DensityOperator> {
        (0..self.dim()).map(|i| self.element(i)).collect()
    }

    fn function_coords(&self, f: &CoefficientFunction, out: &mut [Rat]) -> Result<()> {
        let overflow = || Error::Overflow(format!("{f} does not fit in truncation M={}", self.m));
        if f.space() != self.space {
            return Err(Error::RingMismatch);
        }
        if f.is_zero() {
            return Ok(());
        }
        if f.size() > self.m {
            return Err(overflow());
        }
        match (f.as_poly(), f.as_trig()) {
            (Some(p), _) => {
                for (d, c) in p.coeffs().iter().enumerate() {
                    out[d] = c.clone();
                }
            }
            (_, Some(t)) => {
                out[0] = t.mean().clone();
                for n in 1..=t.max_frequency() {
                    out[2 * n as usize - 1] = t.cos_coeff(n);
                    out[2 * n as usize] = t.sin_coeff(n);
                }
            }
            _ => unreachable!(),
        }
        Ok(())
    }

    /// Coordinates of `a`; an error if `a` is not inside the truncation.
    pub fn coordinates(&self, a: &DensityOperator) -> Result<Vec<Rat>> {
        crate::density::check_weight(&self.lambda, a.lambda())?;
        crate::density::check_weight(&self.mu, a.mu())?;
        if a.space() != self.space {
            return Err(Error::RingMismatch);
        }
        if !a.is_zero() && a.order() > self.k {
            return Err(Error::Overflow(format!(
                "order {} exceeds k={}",
                a.order(),
                self.k
            )));
        }
        let n = self.slots();
        let mut out = vec![Rat::zero(); self.dim()];
        for (i, c) in a.coeffs().iter().enumerate() {
            if i <= self.k {
                self.function_coords(c, &mut out[i * n..(i + 1) * n])?;
            }
        }
        Ok(out)
    }

    pub fn operator(&self, coords: &[Rat]) -> DensityOperator {
        let n = self.slots();
        let coeffs = (0..=self.k)
            .map(|i| {
                let mut acc = CoefficientFunction::zero(self.space);
                for s in 0..n {
                    let c = &coords[i * n + s];
                    if !c.is_zero() {
                        acc = &acc + &self.slot_function(s).scale(c);
                    }
                }
                acc
            })
            .collect();
        DensityOperator::new(self.lambda.clone(), self.mu.clone(), self.space, coeffs)
            .expect("basis functions share the space")
    }
}

/// A linear endomorphism of a truncated module; column `j` is the image of element `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetryMap {
    pub basis: TruncatedBasis,
    pub matrix: QMatrix,
    /// Set for maps built from the trace `A ↦ mean(a_0)`.
    pub nonlocal: bool,
    pub name: String,
}

impl SymmetryMap {
    pub fn identity(basis: &TruncatedBasis) -> Self {
        SymmetryMap {
            basis: basis.clone(),
            matrix: QMatrix::identity(basis.dim()),
            nonlocal: false,
            name: "Id".into(),
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &SymmetryMap) -> SymmetryMap {
        assert_eq!(self.basis, other.basis, "maps on different bases");
        SymmetryMap {
            basis: self.basis.clone(),
            matrix: self.matrix.mul(&other.matrix),
            nonlocal: self.nonlocal || other.nonlocal,
            name: format!("{}*{}", self.name, other.name),
        }
    }

    /// `Σ c_i T_i` over maps on one basis.
    pub fn combination(terms: &[(Rat, &SymmetryMap)]) -> SymmetryMap {
        let basis = terms[0].1.basis.clone();
        let mut m = QMatrix::zeros(basis.dim(), basis.dim());
        let mut nonlocal = false;
        let mut names = Vec::new();
        for (c, t) in terms {
            assert_eq!(t.basis, basis, "maps on different bases");
            if !c.is_zero() {
                m = m.add(&t.matrix.scale(c));
                nonlocal |= t.nonlocal;
                names.push(format!("{}*{}", fmt_rat(c), t.name));
            }
        }
        SymmetryMap {
            basis,
            matrix: m,
            nonlocal,
            name: names.join(" + "),
        }
    }

    pub fn scale(&self, c: &Rat) -> SymmetryMap {
        SymmetryMap {
            matrix: self.matrix.scale(c),
            ..self.clone()
        }
    }

    pub fn apply(&self, a: &DensityOperator) -> Result<DensityOperator> {
        let v = self.basis.coordinates(a)?;
        Ok(self.basis.operator(&self.matrix.mul_vec(&v)))
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.is_zero()
    }
}

/// Exact matrix of a named symmetry on `basis`.
pub fn realize(op: &SymmetryOp, basis: &TruncatedBasis) -> Result<SymmetryMap> {
    let k = basis.k;
    realize_with(&op.name(), op.is_nonlocal(), basis, |a| op.apply(k, a))
}

/// Exact matrix of an arbitrary linear map given on operators.
pub fn realize_with<F>(
    name: &str,
    nonlocal: bool,
    basis: &TruncatedBasis,
    f: F,
) -> Result<SymmetryMap>
where
    F: Fn(&DensityOperator) -> Result<DensityOperator> + Sync,
{
    let cols = (0..basis.dim())
        .into_par_iter()
        .map(|j| basis.coordinates(&f(&basis.element(j))?))
        .collect::<Result<Vec<_>>>()?;
    Ok(SymmetryMap {
        basis: basis.clone(),
        matrix: QMatrix::from_columns(basis.dim(), &cols),
        nonlocal,
        name: name.into(),
    })
}

/// How much a field raises the truncation index of a coefficient.
fn field_shift(x: &VectorField) -> usize {
    match x.space() {
        Space::Line => x.value.size().saturating_sub(1),
        Space::Circle => x.value.size(),
    }
}

/// Index of basis element `idx` inside a larger truncation of the same module.
fn embed_index(basis: &TruncatedBasis, big: &TruncatedBasis, idx: usize) -> usize {
    basis.order_of(idx) * big.slots() + idx % basis.slots()
}

/// `A ↦ ℒ_X A` from a truncated basis into its enlargement by the shift of `X`.
#[derive(Debug, Clone)]
pub struct LieMatrix {
    pub basis: TruncatedBasis,
    pub big: TruncatedBasis,
    pub matrix: QMatrix,
    /// Elements whose image under `ℒ_X` stays inside `basis`.
    pub safe: Vec<usize>,
}

impl LieMatrix {
    pub fn new(basis: &TruncatedBasis, x: &VectorField) -> Result<Self> {
        if x.space() != basis.space {
            return Err(Error::RingMismatch);
        }
        let shift = field_shift(x);
        let safe: Vec<usize> = (0..basis.dim())
            .filter(|&j| basis.size_of(j) + shift <= basis.m)
            .collect();
        if safe.is_empty() {
            return Err(Error::TruncationTooSmall(format!(
                "no basis element of M={} stays inside under a field of size {}",
                basis.m,
                x.value.size()
            )));
        }
        let big = basis.enlarged(shift);
        let cols = (0..basis.dim())
            .into_par_iter()
            .map(|j| big.coordinates(&basis.element(j).lie_derivative(x)?))
            .collect::<Result<Vec<_>>>()?;
        let matrix = QMatrix::from_columns(big.dim(), &cols);
        Ok(LieMatrix {
            basis: basis.clone(),
            big,
            matrix,
            safe,
        })
    }

    /// Matrix of `T ∘ ℒ_X − ℒ_X ∘ T` on the safe elements, rows in the enlarged basis.
    pub fn defect(&self, t: &SymmetryMap) -> QMatrix {
        assert_eq!(
            t.basis, self.basis,
            "map and field matrix on different bases"
        );
        let n = self.basis.dim();
        let lie = self.matrix.sparse_columns();
        let tcols = t.matrix.sparse_columns();
        // big index → basis index, for entries that lie inside the basis
        let mut shrink = vec![None; self.big.dim()];
        for i in 0..n {
            shrink[embed_index(&self.basis, &self.big, i)] = Some(i);
        }
        let cols: Vec<Vec<Rat>> = self
            .safe
            .par_iter()
            .map(|&j| {
                let mut out = vec![Rat::zero(); self.big.dim()];
                for (bi, v) in &lie[j] {
                    let i = shrink[*bi].expect("safe element stays inside");
                    for (r, c) in &tcols[i] {
                        out[embed_index(&self.basis, &self.big, *r)] += v * c;
                    }
                }
                for (i, c) in &tcols[j] {
                    for (r, v) in &lie[*i] {
                        out[*r] -= v * c;
                    }
                }
                out
            })
            .collect();
        QMatrix::from_columns(self.big.dim(), &cols)
    }
}

/// Matrix of `T ∘ ℒ_X − ℒ_X ∘ T` on the sub-basis whose image under `ℒ_X` stays
/// inside the truncation; rows are coordinates in the basis enlarged to hold `ℒ_X ∘ T`.
pub fn equivariance_defect(t: &SymmetryMap, x: &VectorField) -> Result<QMatrix> {
    Ok(LieMatrix::new(&t.basis, x)?.defect(t))
}

/// Vector fields against which equivariance is tested.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorFamily {
    pub space: Space,
    pub fields: Vec<VectorField>,
}

impl GeneratorFamily {
    /// `x^j d/dx` for `j ≤ max_degree`; the default family uses `max_degree = 3`.
    pub fn line(max_degree: usize) -> Self {
        let fields = (0..=max_degree)
            .map(|j| VectorField::new(CoefficientFunction::monomial(Rat::one(), j)))
            .collect();
        GeneratorFamily {
            space: Space::Line,
            fields,
        }
    }

    /// `d/dx, cos nx d/dx, sin nx d/dx` for `1 ≤ n ≤ n_max`.
    pub fn circle(n_max: u32) -> Self {
        let mut fields = vec![VectorField::new(CoefficientFunction::one(Space::Circle))];
        for n in 1..=n_max {
            fields.push(VectorField::new(CoefficientFunction::cos(n)));
            fields.push(VectorField::new(CoefficientFunction::sin(n)));
        }
        GeneratorFamily {
            space: Space::Circle,
            fields,
        }
    }

    pub fn default_for(space: Space) -> Self {
        match space {
            Space::Line => Self::line(3),
            Space::Circle => Self::circle(2),
        }
    }
}

/// Field matrices of a family on one basis, reusable across many maps.
#[derive(Debug, Clone)]
pub struct DefectChecker {
    pub fields: Vec<LieMatrix>,
}

impl DefectChecker {
    pub fn new(basis: &TruncatedBasis, family: &GeneratorFamily) -> Result<Self> {
        let fields = family
            .fields
            .iter()
            .map(|x| LieMatrix::new(basis, x))
            .collect::<Result<_>>()?;
        Ok(DefectChecker { fields })
    }

    /// Largest defect entry count over the family.
    pub fn defect(&self, t: &SymmetryMap) -> usize {
        self.fields
            .iter()
            .map(|l| l.defect(t).nonzero_count())
            .max()
            .unwrap_or(0)
    }
}

/// Largest defect entry count over the family; zero means equivariant at this truncation.
pub fn family_defect(t: &SymmetryMap, family: &GeneratorFamily) -> Result<usize> {
    Ok(DefectChecker::new(&t.basis, family)?.defect(t))
}

pub fn is_equivariant(t: &SymmetryMap, family: &GeneratorFamily) -> Result<bool> {
    Ok(family_defect(t, family)? == 0)
}

/// Unknown `t_{r,ℓ}` of the translation-invariant ansatz `a_r d^r ↦ a_r^{(ℓ)} d^{r−ℓ}`.
pub fn ansatz_index(r: usize, l: usize) -> usize {
    r * (r + 1) / 2 + l
}

pub fn ansatz_size(k: usize) -> usize {
    (k + 1) * (k + 2) / 2
}

fn ansatz_term(r: usize, l: usize, a: &DensityOperator) -> DensityOperator {
    let c = a.coeff(r).ring_diff(l);
    DensityOperator::monomial(a.lambda().clone(), a.mu().clone(), c, r - l)
}

/// The map `Σ t_{r,ℓ} (a_r d^r ↦ a_r^{(ℓ)} d^{r−ℓ})` as a symmetry-like operator.
pub fn ansatz_apply(t: &[Rat], k: usize, a: &DensityOperator) -> Result<DensityOperator> {
    let mut acc = DensityOperator::zero(a.lambda().clone(), a.mu().clone(), a.space());
    for r in 0..=k {
        for l in 0..=r {
            let c = &t[ansatz_index(r, l)];
            if !c.is_zero() {
                acc = acc.try_add(&ansatz_term(r, l, a).scale(c))?;
            }
        }
    }
    Ok(acc)
}

/// Result of the brute-force classification.
#[derive(Debug, Clone)]
pub struct LocalSymmetries {
    pub dimension: usize,
    /// Null vectors in the `t_{r,ℓ}` coordinates (see [`ansatz_index`]).
    pub vectors: Vec<Vec<Rat>>,
    pub maps: Vec<SymmetryMap>,
}

fn operator_entries(a: &DensityOperator, big: &TruncatedBasis) -> Result<Vec<Rat>> {
    big.coordinates(a)
}

/// Finds every map of the ansatz form commuting with the non-affine fields of the
/// family (`x² d/dx, x³ d/dx` on the line; `cos x, sin x, cos 2x, sin 2x` on the circle),
/// exactly on all basis elements of truncation `m`.
pub fn brute_force_local_symmetries(
    k: usize,
    lambda: &Rat,
    mu: &Rat,
    space: Space,
    m: usize,
) -> Result<LocalSymmetries> {
    let fields = match space {
        Space::Line => vec![
            VectorField::new(CoefficientFunction::monomial(Rat::one(), 2)),
            VectorField::new(CoefficientFunction::monomial(Rat::one(), 3)),
        ],
        Space::Circle => GeneratorFamily::circle(2)
            .fields
            .into_iter()
            .skip(1)
            .collect(),
    };
    brute_force_with_fields(k, lambda, mu, space, m, &fields)
}

pub fn brute_force_with_fields(
    k: usize,
    lambda: &Rat,
    mu: &Rat,
    space: Space,
    m: usize,
    fields: &[VectorField],
) -> Result<LocalSymmetries> {
    if m < k + 4 {
        return Err(Error::TruncationTooSmall(format!(
            "need M ≥ k+4 = {}, got {m}",
            k + 4
        )));
    }
    let basis = TruncatedBasis::new(k, m, space, lambda.clone(), mu.clone());
    let shift = fields.iter().map(field_shift).max().unwrap_or(0);
    let big = basis.enlarged(shift);
    let n = ansatz_size(k);
    let mut reduced: Vec<Vec<Rat>> = Vec::new();
    for j in 0..basis.dim() {
        let b = basis.element(j);
        let i = basis.order_of(j);
        let mut rows: Vec<Vec<Rat>> = reduced.clone();
        for x in fields {
            let moved = b.lie_derivative(x)?;
            // one column per unknown, rows indexed by the coordinates of the defect
            let cols = (0..=k)
                .flat_map(|r| (0..=r).map(move |l| (r, l)))
                .map(|(r, l)| {
                    let mut e = ansatz_term(r, l, &moved);
                    if r == i {
                        e = e.try_sub(&ansatz_term(r, l, &b).lie_derivative(x)?)?;
                    }
                    operator_entries(&e, &big)
                })
                .collect::<Result<Vec<_>>>()?;
            for row in 0..big.dim() {
                let v: Vec<Rat> = cols.iter().map(|c| c[row].clone()).collect();
                if v.iter().any(|e| !e.is_zero()) {
                    rows.push(v);
                }
            }
        }
        let (ech, _) = integer_echelon(&rows, n);
        reduced = ech
            .into_iter()
            .map(|r| r.into_iter().map(Rat::from_integer).collect())
            .collect();
    }
    let vectors = nullspace_of_rows(&reduced, n);
    let maps = vectors
        .iter()
        .map(|t| {
            let cols = (0..basis.dim())
                .map(|j| basis.coordinates(&ansatz_apply(t, k, &basis.element(j))?))
                .collect::<Result<Vec<_>>>()?;
            Ok(SymmetryMap {
                basis: basis.clone(),
                matrix: QMatrix::from_columns(basis.dim(), &cols),
                nonlocal: false,
                name: "ansatz".into(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LocalSymmetries {
        dimension: vectors.len(),
        vectors,
        maps,
    })
}

/// Dimension of the space of linear functionals on circle `λ`-densities of frequency
/// `≤ n` that vanish on every `L_X φ` computable inside that window.
pub fn invariant_functionals_dimension(lambda: &Rat, n: usize) -> usize {
    let slots = 2 * n + 1;
    let basis = TruncatedBasis::new(0, n, Space::Circle, int(0), int(0));
    let mut rows = Vec::new();
    for xs in 0..slots {
        let x = VectorField::new(basis.slot_function(xs));
        for ps in 0..slots {
            if basis.size_of(xs) + basis.size_of(ps) > n {
                continue;
            }
            let phi = Density::new(lambda.clone(), basis.slot_function(ps));
            let out = lie_derivative_density(&x, &phi).expect("same space");
            let mut v = vec![Rat::zero(); slots];
            basis
                .function_coords(&out.value, &mut v)
                .expect("inside the window");
            rows.push(v);
        }
    }
    slots - rank_of_rows(&rows)
}
