//! Named identities checked as exact matrix equalities on truncated bases.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::b_basis_change;
use crate::density::{lie_derivative_density, pairing, Density, DensityOperator, VectorField};
use crate::engine::{
    invariant_functionals_dimension, realize, realize_with, DefectChecker, GeneratorFamily,
    SymmetryMap, TruncatedBasis,
};
use crate::error::{Error, Result};
use crate::invariant::{
    bilinear_apply, conjugate, hk_holds, w_coefficients, w_map, BilinearKind, BilinearOp,
    ProjectionKind, ProjectionSpec, SymmetryOp,
};
use crate::loci::Curve;
use crate::rational::{fmt_rat, int, rat, Rat};
use crate::ring::{CoefficientFunction, Space};

pub const IDENTITY_NAMES: [&str; 20] = [
    "conj_involution",
    "mult_table_01",
    "b_isomorphism",
    "adjoint_pairing",
    "p0_s_relations",
    "w_squared",
    "v_squared",
    "v_conjugation",
    "v_explicit_form",
    "jv_nilpotent",
    "gv_relations",
    "gsigma_decomposition",
    "jv_conjugation",
    "jw_relations",
    "jw_explicit_form",
    "w_sharpness",
    "v_wilmod",
    "grozman_equivariance",
    "invariant_functionals",
    "relation_suite",
];

/// Members of `relation_suite`.
pub const RELATION_SUITE: [&str; 14] = [
    "conj_involution",
    "mult_table_01",
    "b_isomorphism",
    "adjoint_pairing",
    "p0_s_relations",
    "w_squared",
    "v_squared",
    "v_conjugation",
    "v_explicit_form",
    "jv_nilpotent",
    "gv_relations",
    "gsigma_decomposition",
    "jv_conjugation",
    "jw_relations",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Order of the module where the identity allows a choice.
    pub k: Option<usize>,
    /// Truncation; defaults to `k + 6`.
    pub m: Option<usize>,
    pub space: Space,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            k: None,
            m: None,
            space: Space::Circle,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Sum of absolute values of all residual entries; zero for a pass.
    pub defect: String,
    pub basis_size: usize,
    pub checks: usize,
    pub failures: Vec<String>,
}

/// Accumulates residuals of individual equalities.
struct Tally {
    name: String,
    defect: Rat,
    basis_size: usize,
    checks: usize,
    failures: Vec<String>,
}

impl Tally {
    fn new(name: &str) -> Self {
        Tally {
            name: name.into(),
            defect: Rat::zero(),
            basis_size: 0,
            checks: 0,
            failures: Vec::new(),
        }
    }

    fn basis(&mut self, b: &TruncatedBasis) {
        self.basis_size = self.basis_size.max(b.dim());
    }

    fn equal(&mut self, label: &str, lhs: &SymmetryMap, rhs: &SymmetryMap) {
        self.basis(&lhs.basis);
        let r = lhs.matrix.sub(&rhs.matrix).l1_norm();
        self.residual(label, r);
    }

    fn residual(&mut self, label: &str, r: Rat) {
        self.checks += 1;
        if !r.is_zero() {
            self.failures
                .push(format!("{label}: residual {}", fmt_rat(&r)));
            self.defect += r;
        }
    }

    fn holds(&mut self, label: &str, ok: bool) {
        self.residual(label, if ok { Rat::zero() } else { Rat::one() });
    }

    fn finish(self) -> CheckResult {
        CheckResult {
            name: self.name,
            passed: self.failures.is_empty(),
            defect: fmt_rat(&self.defect),
            basis_size: self.basis_size,
            checks: self.checks,
            failures: self.failures,
        }
    }
}

struct Module {
    basis: TruncatedBasis,
}

impl Module {
    fn new(k: usize, lambda: Rat, mu: Rat, opts: &VerifyOptions) -> Self {
        let m = opts.m.unwrap_or(k + 6);
        Module {
            basis: TruncatedBasis::new(k, m, opts.space, lambda, mu),
        }
    }

    fn get(&self, name: &str) -> Result<SymmetryMap> {
        realize(&SymmetryOp::catalog(name)?, &self.basis)
    }

    fn id(&self) -> SymmetryMap {
        SymmetryMap::identity(&self.basis)
    }

    fn zero(&self) -> SymmetryMap {
        self.id().scale(&Rat::zero())
    }
}

fn at(l: &Rat, m: &Rat) -> String {
    format!("({}, {})", fmt_rat(l), fmt_rat(m))
}

pub fn verify(name: &str, opts: &VerifyOptions) -> Result<CheckResult> {
    let mut t = Tally::new(name);
    match name {
        "conj_involution" => conj_involution(&mut t, opts)?,
        "mult_table_01" => mult_table_01(&mut t, opts.k.unwrap_or(4), opts)?,
        "b_isomorphism" => b_isomorphism(&mut t, opts.k.unwrap_or(4), opts)?,
        "adjoint_pairing" => adjoint_pairing(&mut t, opts)?,
        "p0_s_relations" => p0_s_relations(&mut t, opts)?,
        "w_squared" => w_squared(&mut t, opts)?,
        "v_squared" => v_squared(&mut t, opts)?,
        "v_conjugation" => v_conjugation(&mut t, opts)?,
        "v_explicit_form" => v_explicit_form(&mut t, opts)?,
        "jv_nilpotent" => jv_nilpotent(&mut t, opts)?,
        "gv_relations" => gv_relations(&mut t, opts)?,
        "gsigma_decomposition" => gsigma_decomposition(&mut t, opts)?,
        "jv_conjugation" => jv_conjugation(&mut t, opts)?,
        "jw_relations" => jw_relations(&mut t, opts)?,
        "jw_explicit_form" => jw_explicit_form(&mut t, opts)?,
        "w_sharpness" => w_sharpness(&mut t, opts)?,
        "v_wilmod" => v_wilmod(&mut t, opts)?,
        "grozman_equivariance" => grozman_equivariance(&mut t, opts)?,
        "invariant_functionals" => invariant_functionals(&mut t),
        "relation_suite" => {
            for sub in RELATION_SUITE {
                let r = verify(sub, opts)?;
                t.basis_size = t.basis_size.max(r.basis_size);
                t.checks += r.checks;
                for f in r.failures {
                    t.failures.push(format!("{sub}: {f}"));
                }
                t.defect += crate::rational::parse_rat(&r.defect)?;
            }
        }
        other => return Err(Error::Parse(format!("unknown identity {other:?}"))),
    }
    Ok(t.finish())
}

fn conj_involution(t: &mut Tally, opts: &VerifyOptions) -> Result<()> {
    let k = opts.k.unwrap_or(3);
    for l in [rat(1, 3), rat(-5, 2), int(0)] {
        let md = Module::new(k, l.clone(), Rat::one() - &l, opts);
        let c = md.get("C")?;
        t.equal(
            &format!("C^2 = Id at {}", at(&l, &(Rat::one() - &l))),
            &c.compose(&c),
            &md.id(),
        );
    }
    // between different modules, as an identity on operators
    let b = TruncatedBasis::new(k, 4, opts.space, rat(2, 7), rat(3, 5));
    t.basis(&b);
    for a in b.elements() {
        t.holds("conj(conj(A)) = A", conjugate(&conjugate(&a)) == a);
    }
    Ok(())
}

/// Products of `Id, P0, C, P0*, P1, L` at `(0, 1)`; entry `(X, Y)` is `X∘Y`.
pub fn expected_mult_table() -> Vec<Vec<Vec<(i64, &'static str)>>> {
    let e = |s: &'static str| vec![(1, s)];
    let zero = Vec::new();
    vec![
        vec![e("Id"), e("P0"), e("C"), e("P0star"), e("P1"), e("L")],
        vec![
            e("P0"),
            e("P0"),
            e("P0star"),
            e("P0star"),
            zero.clone(),
            zero.clone(),
        ],
        vec![
            e("C"),
            e("P0"),
            e("Id"),
            e("P0star"),
            vec![(1, "P0star"), (-1, "P1"), (-1, "P0")],
            vec![(-1, "L")],
        ],
        vec![
            e("P0star"),
            e("P0"),
            e("P0"),
            e("P0star"),
            vec![(1, "P0star"), (-1, "P0")],
            zero.clone(),
        ],
        vec![
            e("P1"),
            zero.clone(),
            vec![(-1, "P1")],
            zero.clone(),
            e("P1"),
            e("L"),
        ],
        vec![e("L"), e("L"), e("L"), e("L"), zero.clone(), zero],
    ]
}

pub const MULT_TABLE_NAMES: [&str; 6] = ["Id", "P0", "C", "P0star", "P1", "L"];

fn mult_table_01(t: &mut Tally, k: usize, opts: &VerifyOptions) -> Result<()> {
    if k == 0 {
        return Err(Error::Inapplicable("the table needs k ≥ 1".into()));
    }
    let opts = VerifyOptions {
        space: Space::Circle,
        ..opts.clone()
    };
    let md = Module::new(k, int(0), int(1), &opts);
    let maps: Vec<SymmetryMap> = MULT_TABLE_NAMES
        .iter()
        .map(|n| md.get(n))
        .collect::<Result<_>>()?;
    let lookup = |n: &str| &maps[MULT_TABLE_NAMES.iter().position(|m| *m == n).expect("name")];
    let table = expected_mult_table();
    for (i, x) in maps.iter().enumerate() {
        for (j, y) in maps.iter().enumerate() {
            let terms: Vec<(Rat, &SymmetryMap)> = table[i][j]
                .iter()
                .map(|(c, n)| (int(*c), lookup(n)))
                .collect();
            let rhs = if terms.is_empty() {
                md.zero()
            } else {
                SymmetryMap::combination(&terms)
            };
            t.equal(
                &format!("{}*{}", MULT_TABLE_NAMES[i], MULT_TABLE_NAMES[j]),
                &x.compose(y),
                &rhs,
            );
        }
    }
    Ok(())
}

fn b_isomorphism(t: &mut Tally, k: usize, opts: &VerifyOptions) -> Result<()> {
    if k == 0 {
        return Err(Error::Inapplicable("the basis change needs k ≥ 1".into()));
    }
    let opts = VerifyOptions {
        space: Space::Circle,
        ..opts.clone()
    };
    let md = Module::new(k, int(0), int(1), &opts);
    t.basis(&md.basis);
    let maps: Vec<SymmetryMap> = MULT_TABLE_NAMES
        .iter()
        .map(|n| md.get(n))
        .collect::<Result<_>>()?;
    let six = [
        maps[0].clone(),
        maps[2].clone(),
        maps[1].clone(),
        maps[3].clone(),
        maps[4].clone(),
        maps[5].clone(),
    ];
    let change = b_basis_change(&six)?;
    t.holds("structure constants of b", change.matches_b);
    t.holds("z1, z2 central", change.z_central);
    let expected = match k {
        1 => [false, false],
        2 => [true, false],
        _ => [true, true],
    };
    t.holds(
        &format!(
            "z nonzero pattern {:?}, expected {:?}",
            change.z_nonzero, expected
        ),
        change.z_nonzero == expected,
    );
    Ok(())
}

fn random_trig(rng: &mut ChaCha8Rng, n: u32) -> CoefficientFunction {
    let mut f = CoefficientFunction::constant(Space::Circle, int(rng.gen_range(-5..=5)));
    for j in 1..=n {
        let c =
            CoefficientFunction::cos(j).scale(&rat(rng.gen_range(-9..=9), rng.gen_range(1..=4)));
        let s =
            CoefficientFunction::sin(j).scale(&rat(rng.gen_range(-9..=9), rng.gen_range(1..=4)));
        f = f
            .try_add(&c)
            .and_then(|g| g.try_add(&s))
            .expect("circle functions");
    }
    f
}

/// `⟨A φ, ψ⟩ = ⟨φ, A* ψ⟩` for random operators and densities on the circle.
fn adjoint_pairing(t: &mut Tally, opts: &VerifyOptions) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for i in 0..20 {
        let lambda = rat(rng.gen_range(-9..=9), rng.gen_range(1..=6));
        let mu = rat(rng.gen_range(-9..=9), rng.gen_range(1..=6));
        let k = rng.gen_range(0..=3);
        let coeffs = (0..=k).map(|_| random_trig(&mut rng, 2)).collect();
        let a = DensityOperator::new(lambda.clone(), mu.clone(), Space::Circle, coeffs)?;
        let phi = Density::new(lambda.clone(), random_trig(&mut rng, 3));
        let psi = Density::new(Rat::one() - &mu, random_trig(&mut rng, 3));
        let lhs = pairing(&a.apply(&phi)?, &psi)?;
        let rhs = pairing(&phi, &conjugate(&a).apply(&psi)?)?;
        t.residual(
            &format!("instance {i} at {}", at(&lambda, &mu)),
            crate::rational::abs(&(lhs - rhs)),
        );
    }
    Ok(())
}

fn p0_s_relations(t: &mut Tally, opts: &VerifyOptions) -> Result<()> {
    let md = Module::new(opts.k.unwrap_or(5), int(0), int(0), opts);
    let (p0, s) = (md.get("P0")?, md.get("S")?);
    t.equal("P0*S = P0", &p0.compose(&s), &p0);
    t.equal("S*P0 = P0", &s.compose(&p0), &p0);
    t.equal("P0^2 = P0", &p0.compose(&p0), &p0);
    t.equal("S^2 = Id", &s.compose(&s), &md.id());
    Ok(())
}

fn w_squared(t: &mut Tally, opts: &VerifyOptions) -> Result<()> {
    for p in [rat(1, 5), rat(-3, 7), int(2)] {
        let (l, m) = Curve::Hyperbola.point(&p).expect("regular point");
        let md = Module::new(3, l.clone(), m.clone(), opts);
        let w = md.get("calW")?;
        let alpha0 = int(3) * &l * &l + int(3) * &l + int(1);
        let c = alpha0 * (&m - &l - int(1));
        t.equal(
            &format!("W^2 at {}", at(&l, &m)),
            &w.compose(&w),
            &w.scale(&c),
        );
    }
    Ok(())
}

fn v_squared(t: &mut Tally, opts: &VerifyOptions) -> Result<()> {
    let points = [
        (rat(1, 3), rat(1, 5)),
        (rat(2, 7), int(3)),
        (int(-4), rat(1, 2)),
        (rat(5, 6), rat(-1, 9)),
        (int(1), int(4)),
    ];
    for (l, m) in points {
        let md = Module::new(2, l.clone(), m.clone(), opts);
        let v = md.get("calV")?;
        let d = &m - &l;
        let c = (&d - int(1)) * (&d - int(2));
        t.equal(
            &format!("V^2 at {}", at(&l, &m)),
            &v.compose(&v),
            &v.scale(&c),
        );
    }
    Ok(())
}

/// On `λ + μ = 1`, `𝒱 = λ(2λ+1)(Id − C)`; the opposite sign contradicts `𝒱² = (μ−λ−1)(μ−λ−2)𝒱`.
fn v_conjugation(t: &mut Tally, opts: &VerifyOptions) -> Result<()> {
    for l in [rat(1, 3), rat(-5, 2), rat(7, 4)] {
        let m = Rat::one() - &l;
        let md = Module::new(2, l.clone(), m.clone(), opts);
        let (v, c) = (md.get("calV")?, md.get("C")?);
        let f = &l * (int(2) * &l + int(1));
        let rhs = SymmetryMap::combination(&[(f.clone(), &md.id()), (-f, &c)]);
        t.equal(&format!("V = l(2l+1)(Id-C) at {}", at(&l, &m)), &v, &rhs);
    }
    Ok(())
}

/// `𝒱(A) = (δ−1)((2λ+1)a₂' + (δ−2)a₁) d − λ((2λ+1)a₂'' + (δ−2)a₁')` with `δ = μ − λ`.
pub fn v_closed_form(basis: &TruncatedBasis) -> Result<SymmetryMap> {
    let (l, m) = (basis.lambda.clone(), basis.mu.clone());
    let d = &m - &l;
    realize_with("closed form", false, basis, |a| {
        let f = a
            .coeff(2)
            .diff()
            .scale(&(int(2) * &l + int(1)))
            .try_add(&a.coeff(1).scale(&(&d - int(2))))?;
        let c1 = f.scale(&(&d - int(1)));
        let c0 = f.diff().scale(&-l.clone());
        DensityOperator::new(l.clone(), m.clone(), a.space(), vec![c0, c1])
    })
}

fn v_explicit_form(t: &mut Tally, opts: &VerifyOptions) -> Result<()> {
    for (l, m) in [
        (rat(1, 3), rat(1, 5)),
        (rat(1, 3), rat(2, 3)),
        (int(-4), rat(1, 2)),
    ] {
        let md = Module::new(2, l.clone(), m.clone(), opts);
        t.equal(
            &format!("V explicit at {}", at(&l, &m)),
            &md.get("calV")?,
            &v_closed_form(&md.basis)?,
        );
    }
    Ok(())
}

fn jv_nilpotent(t: &mut Tally, opts: &VerifyOptions) -> Result<()> {
    for l in [rat(1, 3), rat(-7, 5), int(2)] {
        let m = &l + int(2);
        let md = Module::new(3, l.clone(), m.clone(), opts);
        let jv = md.get("JV")?;
        t.equal(
            &format!("(JV)^2 = 0 at {}", at(&l, &m)),
            &jv.compose(&jv),
            &md.zero(),
        );
    }
    Ok(())
}

fn gv_relations(t: &mut Tally, opts: &VerifyOptions) -> Result<()> {
    let md = Module::new(opts.k.unwrap_or(4).max(4), rat(-2, 3), rat(5, 3), opts);
    let (gv, c) = (md.get("GV")?, md.get("C")?);
    let minus = gv.scale(&int(-1));
    t.equal("GV*C = -GV", &gv.compose(&c), &minus);
    t.equal("C*GV = -GV", &c.compose(&gv), &minus);
    t.equal("GV^2 = GV", &gv.compose(&gv), &gv);
    Ok(())
}

fn gsigma_decomposition(t: &mut Tally, opts: &VerifyOptions) -> Result<()> {
    let md = Module::new(3, rat(-2, 3), rat(5, 3), opts);
    let (gs, c, w) = (md.get("Gsigma")?, md.get("C")?, md.get("calW")?);
    let id = md.id();
    let rhs = SymmetryMap::combination(&[(rat(1, 2), &id), (rat(-1, 2), &c), (rat(-9, 4), &w)]);
    t.equal("G*sigma = (Id - C)/2 - 9/4 W", &gs, &rhs);
    Ok(())
}

fn jv_conjugation(t: &mut Tally, opts: &VerifyOptions) -> Result<()> {
    let md = Module::new(3, rat(-1, 2), rat(3, 2), opts);
    let (jv, c) = (md.get("JV")?, md.get("C")?);
    t.equal("JV*C = JV", &jv.compose(&c), &jv);
    t.equal("C*JV = -JV", &c.compose(&jv), &jv.scale(&int(-1)));
    Ok(())
}

fn jw_relations(t: &mut Tally, opts: &VerifyOptions) -> Result<()> {
    let md = Module::new(4, int(0), rat(5, 4), opts);
    let (jw, p0) = (md.get("JW")?, md.get("P0")?);
    t.equal("JW^2 = JW", &jw.compose(&jw), &jw);
    t.equal("JW*P0 = 0", &jw.compose(&p0), &md.zero());
    t.equal("P0*JW = 0", &p0.compose(&jw), &md.zero());
    Ok(())
}

/// `w̃ d² + c w̃' d` with `w̃ = W/14` on `D^4_{0,5/4}`.
pub fn jw_closed_form(basis: &TruncatedBasis, c: Rat) -> Result<SymmetryMap> {
    realize_with("closed form", false, basis, |a| {
        let w = w_map(a, 4)?.value.scale(&rat(1, 14));
        let zero = CoefficientFunction::zero(a.space());
        DensityOperator::new(
            a.lambda().clone(),
            a.mu().clone(),
            a.space(),
            vec![zero, w.diff().scale(&c), w],
        )
    })
}

fn jw_explicit_form(t: &mut Tally, opts: &VerifyOptions) -> Result<()> {
    let md = Module::new(4, int(0), rat(5, 4), opts);
    let closed = jw_closed_form(&md.basis, rat(4, 3))?;
    t.equal("JW = w d^2 + 4/3 w' d", &md.get("JW")?, &closed);
    let checker = DefectChecker::new(&md.basis, &GeneratorFamily::default_for(opts.space))?;
    t.residual(
        "closed form is equivariant",
        int(checker.defect(&closed) as i64),
    );
    Ok(())
}

/// `W` with the coefficient formula applied at any weights, ignoring `(hk)`.
pub fn w_projection_unchecked(k: usize, lambda: &Rat, mu: &Rat) -> ProjectionSpec {
    ProjectionSpec {
        kind: ProjectionKind::WMap,
        k,
        lambda: lambda.clone(),
        mu: mu.clone(),
        coefficients: w_coefficients(k, lambda),
    }
}

/// Number of pairs (element, field) with `π(ℒ_X A) ≠ L_X π(A)`.
pub fn projection_defect(
    spec: &ProjectionSpec,
    basis: &TruncatedBasis,
    family: &GeneratorFamily,
) -> Result<usize> {
    let counts = (0..basis.dim())
        .into_par_iter()
        .map(|j| {
            let a = basis.element(j);
            let pa = spec.apply(&a)?;
            let mut bad = 0;
            for x in &family.fields {
                let lhs = spec.apply(&a.lie_derivative(x)?)?;
                let rhs = lie_derivative_density(x, &pa)?;
                if lhs.value != rhs.value {
                    bad += 1;
                }
            }
            Ok(bad)
        })
        .collect::<Result<Vec<usize>>>()?;
    Ok(counts.into_iter().sum())
}

/// Operators accepted by [`verify_op`].
pub const OPERATOR_NAMES: [&str; 24] = [
    "Id", "C", "P0", "P0star", "P1", "L", "S", "Sstar", "sigma", "V", "W", "wilmodA", "wilmodB",
    "piDelta", "poisson", "grozman", "JW", "JV", "Jsigma", "GV", "Gsigma", "calW", "calV", "PV",
];

fn projection_kind(name: &str) -> Option<ProjectionKind> {
    Some(match name {
        "sigma" => ProjectionKind::PrincipalSymbol,
        "V" => ProjectionKind::VMap,
        "W" => ProjectionKind::WMap,
        "wilmodA" => ProjectionKind::WilmodA,
        "wilmodB" => ProjectionKind::WilmodB,
        "piDelta" => ProjectionKind::PiDelta,
        _ => return None,
    })
}

/// Equivariance of one cataloged operator at `(k, λ, μ)`.
///
/// Symmetries act on `D^k_{λ,μ}`, projections map it to densities, and
/// bilinear operators take `F_λ ⊗ F_μ`.
pub fn verify_op(
    name: &str,
    k: usize,
    lambda: &Rat,
    mu: &Rat,
    opts: &VerifyOptions,
) -> Result<CheckResult> {
    let mut t = Tally::new(name);
    let family = GeneratorFamily::default_for(opts.space);
    let m = opts.m.unwrap_or(k + 6);
    let label = format!("{name} at k={k} {}", at(lambda, mu));
    if let Some(kind) = BilinearKind::ALL.into_iter().find(|b| b.name() == name) {
        let j = BilinearOp::new(kind, lambda.clone(), mu.clone())?;
        t.basis_size = TruncatedBasis::new(0, m, opts.space, int(0), int(0)).slots();
        let d = bilinear_defect(&j, opts.space, m, &family.fields)?;
        t.residual(&label, int(d as i64));
    } else if let Some(kind) = projection_kind(name) {
        let spec = ProjectionSpec::new(kind, k, lambda.clone(), mu.clone())?;
        let b = TruncatedBasis::new(k, m, opts.space, lambda.clone(), mu.clone());
        t.basis(&b);
        let d = projection_defect(&spec, &b, &family)?;
        t.residual(&label, int(d as i64));
    } else {
        let op = SymmetryOp::catalog(name)?;
        let b = TruncatedBasis::new(k, m, opts.space, lambda.clone(), mu.clone());
        t.basis(&b);
        let map = realize(&op, &b)?;
        let d = DefectChecker::new(&b, &family)?.defect(&map);
        t.residual(&label, int(d as i64));
    }
    Ok(t.finish())
}

fn w_sharpness(t: &mut Tally, opts: &VerifyOptions) -> Result<()> {
    let family = GeneratorFamily::default_for(opts.space);
    let on: Vec<(usize, Rat, Rat)> = vec![
        (3, Curve::Hyperbola.point(&rat(2, 5)).expect("point")),
        (4, Curve::Hk(4).point(&rat(1, 7)).expect("point")),
        (5, Curve::Hk(5).point(&rat(-3, 2)).expect("point")),
    ]
    .into_iter()
    .map(|(k, (l, m))| (k, l, m))
    .collect();
    let off = [
        (3, rat(2, 5), rat(1, 3)),
        (4, rat(1, 7), int(2)),
        (5, rat(-3, 2), rat(1, 2)),
    ];
    for (k, l, m) in &on {
        let b = TruncatedBasis::new(
            *k,
            opts.m.unwrap_or(k + 4),
            opts.space,
            l.clone(),
            m.clone(),
        );
        t.basis(&b);
        let d = projection_defect(&w_projection_unchecked(*k, l, m), &b, &family)?;
        t.residual(
            &format!("W equivariant at k={k} {}", at(l, m)),
            int(d as i64),
        );
    }
    for (k, l, m) in &off {
        debug_assert!(!hk_holds(*k, l, m));
        let b = TruncatedBasis::new(
            *k,
            opts.m.unwrap_or(k + 4),
            opts.space,
            l.clone(),
            m.clone(),
        );
        let d = projection_defect(&w_projection_unchecked(*k, l, m), &b, &family)?;
        t.holds(&format!("W not equivariant at k={k} {}", at(l, m)), d > 0);
    }
    Ok(())
}

fn v_wilmod(t: &mut Tally, opts: &VerifyOptions) -> Result<()> {
    for k in 1..=5usize {
        let kk = int(k as i64);
        let (l, m) = ((int(1) - &kk) / int(2), (int(1) + &kk) / int(2));
        let b = TruncatedBasis::new(k, opts.m.unwrap_or(k + 4), opts.space, l.clone(), m.clone());
        t.basis(&b);
        let v = ProjectionSpec::new(ProjectionKind::VMap, k, l.clone(), m.clone())?;
        let zero = b
            .elements()
            .iter()
            .map(|a| v.apply(a))
            .collect::<Result<Vec<_>>>()?
            .iter()
            .all(Density::is_zero);
        t.holds(&format!("V = 0 at k={k} {}", at(&l, &m)), zero);
        for (dl, dm) in [
            (rat(1, 10), int(0)),
            (int(0), rat(1, 7)),
            (rat(-1, 3), rat(1, 3)),
        ] {
            let (l2, m2) = (&l + dl, &m + dm);
            let b2 = TruncatedBasis::new(k, b.m, opts.space, l2.clone(), m2.clone());
            let v2 = ProjectionSpec::new(ProjectionKind::VMap, k, l2.clone(), m2.clone())?;
            let nonzero = b2
                .elements()
                .iter()
                .map(|a| v2.apply(a))
                .collect::<Result<Vec<_>>>()?
                .iter()
                .any(|d| !d.is_zero());
            t.holds(&format!("V ≠ 0 at k={k} {}", at(&l2, &m2)), nonzero);
        }
    }
    Ok(())
}

fn density_basis(space: Space, m: usize) -> Vec<CoefficientFunction> {
    let b = TruncatedBasis::new(0, m, space, int(0), int(0));
    (0..b.slots()).map(|s| b.slot_function(s)).collect()
}

/// `G(L_X φ, ψ) + G(φ, L_X ψ) − L_X G(φ, ψ)` over density bases up to truncation `m`.
pub fn bilinear_defect(
    j: &BilinearOp,
    space: Space,
    m: usize,
    fields: &[VectorField],
) -> Result<usize> {
    let fs = density_basis(space, m);
    let pairs: Vec<(usize, usize)> = (0..fs.len())
        .flat_map(|a| (0..fs.len()).map(move |b| (a, b)))
        .collect();
    let counts = pairs
        .par_iter()
        .map(|&(a, b)| {
            let phi = Density::new(j.nu.clone(), fs[a].clone());
            let psi = Density::new(j.lambda.clone(), fs[b].clone());
            let g = bilinear_apply(j, &phi, &psi)?;
            let mut bad = 0;
            for x in fields {
                let r1 = bilinear_apply(j, &lie_derivative_density(x, &phi)?, &psi)?;
                let r2 = bilinear_apply(j, &phi, &lie_derivative_density(x, &psi)?)?;
                let lhs = lie_derivative_density(x, &g)?;
                if lhs.value != r1.value.try_add(&r2.value)? {
                    bad += 1;
                }
            }
            Ok(bad)
        })
        .collect::<Result<Vec<usize>>>()?;
    Ok(counts.into_iter().sum())
}

fn grozman_equivariance(t: &mut Tally, opts: &VerifyOptions) -> Result<()> {
    let m = opts.m.unwrap_or(8);
    let g = BilinearOp::new(BilinearKind::Grozman, rat(-2, 3), rat(-2, 3))?;
    let circle = GeneratorFamily::circle(3);
    let line = GeneratorFamily::line(5);
    t.basis_size = 2 * m + 1;
    t.residual(
        "circle fields n ≤ 3",
        int(bilinear_defect(&g, Space::Circle, m, &circle.fields)? as i64),
    );
    t.residual(
        "line fields up to x^5",
        int(bilinear_defect(&g, Space::Line, m, &line.fields)? as i64),
    );
    Ok(())
}

fn invariant_functionals(t: &mut Tally) {
    for n in [3usize, 5] {
        t.holds(
            &format!("dim = 1 at lambda = 1, N = {n}"),
            invariant_functionals_dimension(&int(1), n) == 1,
        );
        for l in [int(0), rat(1, 2), rat(-2, 3), int(2)] {
            let d = invariant_functionals_dimension(&l, n);
            t.holds(
                &format!("dim = 0 at lambda = {}, N = {n}", fmt_rat(&l)),
                d == 0,
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn operators_by_name() {
        let o = VerifyOptions::default();
        for (name, k, l, m) in [
            ("C", 3, int(0), int(1)),
            ("JW", 4, int(0), rat(5, 4)),
            ("W", 3, rat(-2, 3), rat(5, 3)),
            ("V", 2, int(0), int(3)),
            ("grozman", 0, rat(-2, 3), rat(-2, 3)),
            ("poisson", 0, rat(1, 2), int(-3)),
        ] {
            let r = verify_op(name, k, &l, &m, &o).unwrap();
            assert!(r.passed, "{name}: {:?}", r.failures);
            assert!(r.basis_size > 0);
        }
        assert!(matches!(
            verify_op("W", 3, &int(1), &int(0), &o),
            Err(Error::Inapplicable(_))
        ));
        assert!(matches!(
            verify_op("grozman", 0, &int(0), &int(0), &o),
            Err(Error::WeightMismatch { .. })
        ));
        assert!(matches!(
            verify_op("nope", 1, &int(0), &int(0), &o),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn unknown_identity() {
        assert!(matches!(
            verify("nope", &VerifyOptions::default()),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn quick_identities_pass() {
        for name in [
            "conj_involution",
            "p0_s_relations",
            "gsigma_decomposition",
            "jv_conjugation",
        ] {
            let r = verify(name, &VerifyOptions::default()).unwrap();
            assert!(r.passed, "{name}: {:?}", r.failures);
            assert_eq!(r.defect, "0");
        }
    }

    #[test]
    fn mult_table_has_36_entries() {
        let r = verify(
            "mult_table_01",
            &VerifyOptions {
                k: Some(3),
                ..Default::default()
            },
        )
        .unwrap();
        assert!(r.passed, "{:?}", r.failures);
        assert_eq!(r.checks, 36);
    }

    #[test]
    fn wrong_relation_is_caught() {
        let md = Module::new(3, rat(-1, 2), rat(3, 2), &VerifyOptions::default());
        let (jv, c) = (md.get("JV").unwrap(), md.get("C").unwrap());
        let mut t = Tally::new("flipped");
        t.equal("C*JV = JV", &c.compose(&jv), &jv);
        let r = t.finish();
        assert!(!r.passed);
        assert_ne!(r.defect, "0");
    }
}
