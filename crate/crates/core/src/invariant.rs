//! Invariant maps on the modules `D^k_{λ,μ}`: conjugation, the projections to
//! densities, bilinear operators on densities, and the symmetries `J∘π` built
//! from them.

use std::fmt;

use num_traits::{One, Zero};

use crate::density::{check_weight, Density, DensityOperator};
use crate::error::{Error, Result};
use crate::rational::{binomial, fmt_rat, int, rat, Rat};
use crate::ring::{CoefficientFunction, Space};

fn weights_err(what: &str, a: &DensityOperator) -> Error {
    Error::Inapplicable(format!(
        "{what} is not defined on D_{{{},{}}}",
        fmt_rat(a.lambda()),
        fmt_rat(a.mu())
    ))
}

fn require(cond: bool, what: &str, a: &DensityOperator) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(weights_err(what, a))
    }
}

/// `Σ (−1)^i (d/dx)^i ∘ b_i` expanded by Leibniz.
fn alternating_expansion(b: &[CoefficientFunction], space: Space) -> Vec<CoefficientFunction> {
    (0..b.len())
        .map(|j| {
            let mut acc = CoefficientFunction::zero(space);
            for (i, bi) in b.iter().enumerate().skip(j) {
                if bi.is_zero() {
                    continue;
                }
                let mut c = binomial(i, j);
                if i % 2 == 1 {
                    c = -c;
                }
                acc = &acc + &bi.ring_diff(i - j).scale(&c);
            }
            acc
        })
        .collect()
}

/// The adjoint `A* = Σ (−1)^i (d/dx)^i ∘ a_i : F_{1−μ} → F_{1−λ}`.
pub fn conjugate(a: &DensityOperator) -> DensityOperator {
    let one = Rat::one();
    DensityOperator::from_parts(
        &one - a.mu(),
        &one - a.lambda(),
        a.space(),
        alternating_expansion(a.coeffs(), a.space()),
    )
}

/// `Σ (−1)^i a_i^{(i)}`.
fn alternating_trace(a: &DensityOperator) -> CoefficientFunction {
    let mut acc = CoefficientFunction::zero(a.space());
    for (i, ai) in a.coeffs().iter().enumerate() {
        let t = ai.ring_diff(i);
        acc = if i % 2 == 0 { &acc + &t } else { &acc - &t };
    }
    acc
}

/// `A ↦ A(1)`, as a multiplication operator.
pub fn p0(a: &DensityOperator) -> Result<DensityOperator> {
    require(a.lambda().is_zero(), "P0", a)?;
    Ok(DensityOperator::multiplication(
        a.lambda().clone(),
        a.mu().clone(),
        a.coeff(0),
    ))
}

pub fn p0_star(a: &DensityOperator) -> Result<DensityOperator> {
    require(a.mu().is_one(), "P0*", a)?;
    Ok(DensityOperator::multiplication(
        a.lambda().clone(),
        a.mu().clone(),
        alternating_trace(a),
    ))
}

fn is_01(a: &DensityOperator) -> bool {
    a.lambda().is_zero() && a.mu().is_one()
}

/// `(Σ_{i≥1} (−1)^{i−1} a_i^{(i−1)}) ∘ d`.
pub fn p1(a: &DensityOperator) -> Result<DensityOperator> {
    require(is_01(a), "P1", a)?;
    let b = pi_delta(a)?.value;
    Ok(DensityOperator::monomial(Rat::zero(), Rat::one(), b, 1))
}

/// `mean(a_0) · d`, defined only on the circle.
pub fn nonlocal_l(a: &DensityOperator) -> Result<DensityOperator> {
    if a.space() != Space::Circle {
        return Err(Error::UnsupportedFunctional(
            "the trace map L needs the circle".into(),
        ));
    }
    require(is_01(a), "L", a)?;
    let m = a.coeff(0).circle_mean()?;
    Ok(DensityOperator::monomial(
        Rat::zero(),
        Rat::one(),
        CoefficientFunction::constant(Space::Circle, m),
        1,
    ))
}

/// `Σ_i (−1)^i (d/dx)^i ∘ (a_i + a_{i+1}')` on `D^k_{0,0}`.
pub fn s_map(a: &DensityOperator) -> Result<DensityOperator> {
    require(a.lambda().is_zero() && a.mu().is_zero(), "S", a)?;
    let n = a.coeffs().len();
    let b: Vec<_> = (0..n)
        .map(|i| &a.coeff(i) + &a.coeff(i + 1).diff())
        .collect();
    Ok(DensityOperator::from_parts(
        Rat::zero(),
        Rat::zero(),
        a.space(),
        alternating_expansion(&b, a.space()),
    ))
}

/// `C ∘ S ∘ C` on `D^k_{1,1}`.
pub fn s_star(a: &DensityOperator) -> Result<DensityOperator> {
    require(a.lambda().is_one() && a.mu().is_one(), "S*", a)?;
    Ok(conjugate(&s_map(&conjugate(a))?))
}

/// `δ(A) = A ∘ d : D^k_{1,μ} → D^{k+1}_{0,μ}`.
pub fn delta_compose(a: &DensityOperator) -> Result<DensityOperator> {
    require(a.lambda().is_one(), "δ", a)?;
    a.compose(&DensityOperator::de_rham(a.space()))
}

pub fn delta_inverse(a: &DensityOperator) -> Result<DensityOperator> {
    require(a.lambda().is_zero(), "δ⁻¹", a)?;
    if !a.coeff(0).is_zero() {
        return Err(Error::NotInKernel);
    }
    let v = a.coeffs().iter().skip(1).cloned().collect();
    Ok(DensityOperator::from_parts(
        Rat::one(),
        a.mu().clone(),
        a.space(),
        v,
    ))
}

/// `P0 ∘ C ∘ δ⁻¹ ∘ (Id − P0)` on `D^k_{0,1}`, a 0-density.
pub fn pi_delta(a: &DensityOperator) -> Result<Density> {
    require(is_01(a), "π_δ", a)?;
    let shifted: Vec<_> = a.coeffs().iter().skip(1).cloned().collect();
    let b = DensityOperator::from_parts(Rat::one(), Rat::one(), a.space(), shifted);
    Ok(Density::new(Rat::zero(), alternating_trace(&b)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProjectionKind {
    PrincipalSymbol,
    VMap,
    WMap,
    WilmodA,
    WilmodB,
    P0,
    PiDelta,
}

impl ProjectionKind {
    pub fn name(self) -> &'static str {
        match self {
            ProjectionKind::PrincipalSymbol => "sigma",
            ProjectionKind::VMap => "V",
            ProjectionKind::WMap => "W",
            ProjectionKind::WilmodA => "wilmodA",
            ProjectionKind::WilmodB => "wilmodB",
            ProjectionKind::P0 => "P0",
            ProjectionKind::PiDelta => "piDelta",
        }
    }
}

/// `(λ + (k−2)/3)(μ − (k+1)/3) + (k+1)(k−2)/36 = 0`.
pub fn hk_holds(k: usize, lambda: &Rat, mu: &Rat) -> bool {
    let k = int(k as i64);
    let a = lambda + (&k - int(2)) / int(3);
    let b = mu - (&k + int(1)) / int(3);
    (a * b + (&k + int(1)) * (&k - int(2)) / int(36)).is_zero()
}

pub fn is_wilmod(k: usize, lambda: &Rat, mu: &Rat) -> bool {
    let k = int(k as i64);
    *lambda == (int(1) - &k) / int(2) && *mu == (int(1) + &k) / int(2)
}

/// `[α₂, α₁, α₀]` of the map `W`, as polynomials in `(k, λ)`.
pub fn w_coefficients(k: usize, lambda: &Rat) -> Vec<Rat> {
    let kk = int(k as i64);
    let l = lambda;
    let s = &kk + int(3) * l - int(2);
    let a2 = rat(2, 3) * &kk * (&kk - int(1)) * &s * &s;
    let a1 = int(2) * (&kk - int(1)) * &s * (int(2) - int(2) * l - &kk);
    let a0 = int(3) * &kk * &kk + int(12) * l * &kk + int(12) * l * l - int(11) * &kk - int(24) * l
        + int(10);
    vec![a2, a1, a0]
}

/// A projection `D^k_{λ,μ} → F_ν` with its coefficients recomputed from `(k, λ, μ)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectionSpec {
    pub kind: ProjectionKind,
    pub k: usize,
    pub lambda: Rat,
    pub mu: Rat,
    pub coefficients: Vec<Rat>,
}

impl ProjectionSpec {
    pub fn new(kind: ProjectionKind, k: usize, lambda: Rat, mu: Rat) -> Result<Self> {
        let kk = int(k as i64);
        let at = || format!("k={k}, (λ,μ)=({},{})", fmt_rat(&lambda), fmt_rat(&mu));
        let coefficients = match kind {
            ProjectionKind::PrincipalSymbol => vec![Rat::one()],
            ProjectionKind::VMap => {
                if k == 0 {
                    return Err(Error::Inapplicable("V needs k ≥ 1".into()));
                }
                let alpha = &lambda * &kk + &kk * (&kk - int(1)) / int(2);
                let beta = &mu - &lambda - &kk;
                vec![alpha, beta]
            }
            ProjectionKind::WMap => {
                if k < 3 || !hk_holds(k, &lambda, &mu) {
                    return Err(Error::Inapplicable(format!(
                        "W needs k ≥ 3 and (hk): {}",
                        at()
                    )));
                }
                w_coefficients(k, &lambda)
            }
            ProjectionKind::WilmodA | ProjectionKind::WilmodB => {
                if k == 0 || !is_wilmod(k, &lambda, &mu) {
                    return Err(Error::Inapplicable(format!(
                        "wilmod projections need λ=(1−k)/2, μ=(1+k)/2: {}",
                        at()
                    )));
                }
                vec![Rat::one()]
            }
            ProjectionKind::P0 => {
                if !lambda.is_zero() {
                    return Err(Error::Inapplicable(format!("P0 needs λ=0: {}", at())));
                }
                vec![Rat::one()]
            }
            ProjectionKind::PiDelta => {
                if !(lambda.is_zero() && mu.is_one()) {
                    return Err(Error::Inapplicable(format!(
                        "π_δ needs (λ,μ)=(0,1): {}",
                        at()
                    )));
                }
                vec![Rat::one()]
            }
        };
        Ok(ProjectionSpec {
            kind,
            k,
            lambda,
            mu,
            coefficients,
        })
    }

    pub fn target_weight(&self) -> Rat {
        let d = &self.mu - &self.lambda - int(self.k as i64);
        match self.kind {
            ProjectionKind::PrincipalSymbol => d,
            ProjectionKind::VMap => d + int(1),
            ProjectionKind::WMap => d + int(2),
            ProjectionKind::WilmodA | ProjectionKind::WilmodB => Rat::one(),
            ProjectionKind::P0 => self.mu.clone(),
            ProjectionKind::PiDelta => Rat::zero(),
        }
    }

    pub fn apply(&self, a: &DensityOperator) -> Result<Density> {
        check_weight(&self.lambda, a.lambda())?;
        check_weight(&self.mu, a.mu())?;
        let k = self.k;
        if !a.is_zero() && a.order() > k {
            return Err(Error::Inapplicable(format!(
                "operator of order {} in a module of order {k}",
                a.order()
            )));
        }
        let c = &self.coefficients;
        let top = |j: usize| {
            if j <= k {
                a.coeff(k - j)
            } else {
                CoefficientFunction::zero(a.space())
            }
        };
        let value = match self.kind {
            ProjectionKind::PrincipalSymbol => top(0),
            ProjectionKind::VMap => &top(0).diff().scale(&c[0]) + &top(1).scale(&c[1]),
            ProjectionKind::WMap => {
                let s = &top(0).ring_diff(2).scale(&c[0]) + &top(1).diff().scale(&c[1]);
                &s + &top(2).scale(&c[2])
            }
            ProjectionKind::WilmodA => top(0).diff(),
            ProjectionKind::WilmodB => top(1),
            ProjectionKind::P0 => a.coeff(0),
            ProjectionKind::PiDelta => return pi_delta(a),
        };
        Ok(Density::new(self.target_weight(), value))
    }
}

fn module_projection(kind: ProjectionKind, a: &DensityOperator, k: usize) -> Result<Density> {
    ProjectionSpec::new(kind, k, a.lambda().clone(), a.mu().clone())?.apply(a)
}

pub fn principal_symbol(a: &DensityOperator, k: usize) -> Result<Density> {
    module_projection(ProjectionKind::PrincipalSymbol, a, k)
}

pub fn v_map(a: &DensityOperator, k: usize) -> Result<Density> {
    module_projection(ProjectionKind::VMap, a, k)
}

pub fn w_map(a: &DensityOperator, k: usize) -> Result<Density> {
    module_projection(ProjectionKind::WMap, a, k)
}

pub fn wilmod_projections(a: &DensityOperator, k: usize) -> Result<(Density, Density)> {
    Ok((
        module_projection(ProjectionKind::WilmodA, a, k)?,
        module_projection(ProjectionKind::WilmodB, a, k)?,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BilinearKind {
    Product,
    Poisson,
    DLeft,
    DRight,
    DOuter,
    DdInner,
    DDLeft,
    DDRight,
    Grozman,
}

impl BilinearKind {
    pub const ALL: [BilinearKind; 9] = [
        BilinearKind::Product,
        BilinearKind::Poisson,
        BilinearKind::DLeft,
        BilinearKind::DRight,
        BilinearKind::DOuter,
        BilinearKind::DdInner,
        BilinearKind::DDLeft,
        BilinearKind::DDRight,
        BilinearKind::Grozman,
    ];

    pub fn order(self) -> usize {
        match self {
            BilinearKind::Product => 0,
            BilinearKind::Poisson => 1,
            BilinearKind::DLeft | BilinearKind::DRight | BilinearKind::DOuter => 2,
            _ => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BilinearKind::Product => "product",
            BilinearKind::Poisson => "poisson",
            BilinearKind::DLeft => "d_left",
            BilinearKind::DRight => "d_right",
            BilinearKind::DOuter => "d_outer",
            BilinearKind::DdInner => "dd_inner",
            BilinearKind::DDLeft => "d_d_left",
            BilinearKind::DDRight => "d_d_right",
            BilinearKind::Grozman => "grozman",
        }
    }

    fn admits(self, nu: &Rat, lambda: &Rat) -> bool {
        match self {
            BilinearKind::Product | BilinearKind::Poisson => true,
            BilinearKind::DLeft => nu.is_zero(),
            BilinearKind::DRight => lambda.is_zero(),
            BilinearKind::DOuter => (nu + lambda) == int(-1),
            BilinearKind::DdInner => nu.is_zero() && lambda.is_zero(),
            BilinearKind::DDLeft => nu.is_zero() && *lambda == int(-2),
            BilinearKind::DDRight => *nu == int(-2) && lambda.is_zero(),
            BilinearKind::Grozman => *nu == rat(-2, 3) && *lambda == rat(-2, 3),
        }
    }
}

impl fmt::Display for BilinearKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An invariant bilinear operator `F_ν ⊗ F_λ → F_{ν+λ+order}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BilinearOp {
    pub kind: BilinearKind,
    pub nu: Rat,
    pub lambda: Rat,
}

impl BilinearOp {
    pub fn new(kind: BilinearKind, nu: Rat, lambda: Rat) -> Result<Self> {
        if !kind.admits(&nu, &lambda) {
            return Err(Error::WeightMismatch {
                expected: format!("weights admitted by {kind}"),
                found: format!("({}, {})", fmt_rat(&nu), fmt_rat(&lambda)),
            });
        }
        Ok(BilinearOp { kind, nu, lambda })
    }

    /// First admissible kind of the given order, in a fixed preference order.
    pub fn select(order: usize, nu: Rat, lambda: Rat) -> Result<Self> {
        let kind = BilinearKind::ALL
            .into_iter()
            .find(|k| k.order() == order && k.admits(&nu, &lambda))
            .ok_or_else(|| {
                Error::Inapplicable(format!(
                    "no invariant bilinear operator of order {order} on F_{} ⊗ F_{}",
                    fmt_rat(&nu),
                    fmt_rat(&lambda)
                ))
            })?;
        Ok(BilinearOp { kind, nu, lambda })
    }

    pub fn target_weight(&self) -> Rat {
        &self.nu + &self.lambda + int(self.kind.order() as i64)
    }

    /// Terms `(p, q, κ)` of `Σ κ φ^{(p)} ψ^{(q)}`.
    pub fn terms(&self) -> Vec<(usize, usize, Rat)> {
        let (nu, l) = (self.nu.clone(), self.lambda.clone());
        let raw: Vec<(usize, usize, Rat)> = match self.kind {
            BilinearKind::Product => vec![(0, 0, int(1))],
            BilinearKind::Poisson => vec![(0, 1, nu), (1, 0, -l)],
            BilinearKind::DLeft => vec![(1, 1, int(1)), (2, 0, -l)],
            BilinearKind::DRight => vec![(0, 2, nu), (1, 1, int(-1))],
            BilinearKind::DOuter => vec![(1, 1, &nu - &l), (0, 2, nu), (2, 0, -l)],
            BilinearKind::DdInner => vec![(1, 2, int(1)), (2, 1, int(-1))],
            BilinearKind::DDLeft => vec![(2, 1, int(3)), (1, 2, int(1)), (3, 0, int(2))],
            BilinearKind::DDRight => vec![(1, 2, int(-3)), (0, 3, int(-2)), (2, 1, int(-1))],
            BilinearKind::Grozman => vec![
                (0, 3, int(2)),
                (3, 0, int(-2)),
                (1, 2, int(3)),
                (2, 1, int(-3)),
            ],
        };
        raw.into_iter().filter(|t| !t.2.is_zero()).collect()
    }

    /// The linear operator `ψ ↦ J(φ, ψ)` in `D_{λ, target}`.
    pub fn as_operator(&self, phi: &Density) -> Result<DensityOperator> {
        check_weight(&self.nu, &phi.weight)?;
        let space = phi.space();
        let mut coeffs = vec![CoefficientFunction::zero(space); 4];
        for (p, q, c) in self.terms() {
            coeffs[q] = &coeffs[q] + &phi.value.ring_diff(p).scale(&c);
        }
        Ok(DensityOperator::from_parts(
            self.lambda.clone(),
            self.target_weight(),
            space,
            coeffs,
        ))
    }
}

pub fn bilinear_apply(j: &BilinearOp, phi: &Density, psi: &Density) -> Result<Density> {
    check_weight(&j.lambda, &psi.weight)?;
    j.as_operator(phi)?.apply(psi)
}

/// A symmetry of `D^k_{λ,μ}` given as an executable map on operators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SymmetryOp {
    Id,
    C,
    P0,
    P0Star,
    P1,
    L,
    S,
    SStar,
    /// `scale · J(π(A), ·)` with `J` chosen by weights.
    JPi {
        proj: ProjectionKind,
        scale: Rat,
        grozman: bool,
    },
    /// `δ ∘ T ∘ δ⁻¹ ∘ (Id − P0)` for `T` acting on `D^{k−1}_{1,μ}`.
    Lift(Box<SymmetryOp>),
    /// `C ∘ T ∘ C` for `T` acting on `D^k_{1−μ,1−λ}`.
    Conj(Box<SymmetryOp>),
    Combination(Vec<(Rat, SymmetryOp)>),
    Named(String, Box<SymmetryOp>),
}

/// Names of the symmetries that `SymmetryOp::catalog` accepts.
pub const SYMMETRY_NAMES: [&str; 17] = [
    "Id", "C", "P0", "P0star", "P1", "L", "S", "Sstar", "JW", "JV", "Jsigma", "GV", "Gsigma",
    "calW", "calV", "PV", "Jwilmod",
];

impl SymmetryOp {
    pub fn catalog(name: &str) -> Result<SymmetryOp> {
        use ProjectionKind::*;
        let named = |op| SymmetryOp::Named(name.into(), Box::new(op));
        let jpi = |proj, scale: Rat| {
            named(SymmetryOp::JPi {
                proj,
                scale,
                grozman: false,
            })
        };
        let gpi = |proj, scale: Rat| {
            named(SymmetryOp::JPi {
                proj,
                scale,
                grozman: true,
            })
        };
        Ok(match name {
            "Id" => SymmetryOp::Id,
            "C" => SymmetryOp::C,
            "P0" => SymmetryOp::P0,
            "P0star" => SymmetryOp::P0Star,
            "P1" => SymmetryOp::P1,
            "L" => SymmetryOp::L,
            "S" => SymmetryOp::S,
            "Sstar" => SymmetryOp::SStar,
            // J∘W rescaled so that the d² coefficient is W/14 at (0, 5/4)
            "JW" => jpi(WMap, rat(-2, 21)),
            "JV" => jpi(VMap, int(1)),
            "Jsigma" => jpi(PrincipalSymbol, int(1)),
            // G∘V with V rewritten through a_{k−1} − 2a_k'
            "GV" => gpi(VMap, rat(-3, 10)),
            "Gsigma" => gpi(PrincipalSymbol, rat(1, 2)),
            "calW" => jpi(WMap, rat(1, 4)),
            "calV" => jpi(VMap, int(1)),
            "PV" => jpi(VMap, int(1)),
            "Jwilmod" => jpi(WilmodA, int(1)),
            _ => return Err(Error::Parse(format!("unknown symmetry {name:?}"))),
        })
    }

    pub fn name(&self) -> String {
        match self {
            SymmetryOp::Id => "Id".into(),
            SymmetryOp::C => "C".into(),
            SymmetryOp::P0 => "P0".into(),
            SymmetryOp::P0Star => "P0star".into(),
            SymmetryOp::P1 => "P1".into(),
            SymmetryOp::L => "L".into(),
            SymmetryOp::S => "S".into(),
            SymmetryOp::SStar => "Sstar".into(),
            SymmetryOp::JPi {
                proj,
                scale,
                grozman,
            } => {
                let j = if *grozman { "G" } else { "J" };
                format!("{}*{j}({})", fmt_rat(scale), proj.name())
            }
            SymmetryOp::Lift(t) => format!("lift({})", t.name()),
            SymmetryOp::Conj(t) => format!("conj({})", t.name()),
            SymmetryOp::Combination(terms) => {
                let parts: Vec<String> = terms
                    .iter()
                    .map(|(c, t)| format!("{}*{}", fmt_rat(c), t.name()))
                    .collect();
                parts.join(" + ")
            }
            SymmetryOp::Named(n, _) => n.clone(),
        }
    }

    pub fn is_nonlocal(&self) -> bool {
        match self {
            SymmetryOp::L => true,
            SymmetryOp::Lift(t) | SymmetryOp::Conj(t) | SymmetryOp::Named(_, t) => t.is_nonlocal(),
            SymmetryOp::Combination(v) => v.iter().any(|(_, t)| t.is_nonlocal()),
            _ => false,
        }
    }

    /// Applies the symmetry of `D^k_{λ,μ}`, with `(λ, μ)` read from `a`.
    pub fn apply(&self, k: usize, a: &DensityOperator) -> Result<DensityOperator> {
        match self {
            SymmetryOp::Id => Ok(a.clone()),
            SymmetryOp::C => {
                require(a.lambda() + a.mu() == Rat::one(), "C (as a symmetry)", a)?;
                Ok(conjugate(a))
            }
            SymmetryOp::P0 => p0(a),
            SymmetryOp::P0Star => p0_star(a),
            SymmetryOp::P1 => p1(a),
            SymmetryOp::L => {
                if k == 0 {
                    return Err(Error::Inapplicable("L needs k ≥ 1".into()));
                }
                nonlocal_l(a)
            }
            SymmetryOp::S => s_map(a),
            SymmetryOp::SStar => s_star(a),
            SymmetryOp::JPi {
                proj,
                scale,
                grozman,
            } => {
                let phi = module_projection(*proj, a, k)?;
                let order = a.mu() - &phi.weight - a.lambda();
                let order = if order.is_integer() && order >= Rat::zero() && order <= int(3) {
                    order.to_integer().try_into().unwrap_or(usize::MAX)
                } else {
                    usize::MAX
                };
                let j = BilinearOp::select(order, phi.weight.clone(), a.lambda().clone())?;
                if (j.kind == BilinearKind::Grozman) != *grozman {
                    return Err(Error::Inapplicable(format!(
                        "{} is not built from {}",
                        self.name(),
                        j.kind
                    )));
                }
                Ok(j.as_operator(&phi)?.scale(scale))
            }
            SymmetryOp::Lift(t) => {
                if k == 0 {
                    return Err(Error::Inapplicable("lift needs k ≥ 1".into()));
                }
                require(a.lambda().is_zero(), "lift", a)?;
                let kernel = a.try_sub(&p0(a)?)?;
                let b = delta_inverse(&kernel)?;
                delta_compose(&t.apply(k - 1, &b)?)
            }
            SymmetryOp::Conj(t) => Ok(conjugate(&t.apply(k, &conjugate(a))?)),
            SymmetryOp::Combination(terms) => {
                let mut acc = DensityOperator::zero(a.lambda().clone(), a.mu().clone(), a.space());
                for (c, t) in terms {
                    acc = acc.try_add(&t.apply(k, a)?.scale(c))?;
                }
                Ok(acc)
            }
            SymmetryOp::Named(_, t) => t.apply(k, a),
        }
    }

    /// Whether the map is defined on `D^k_{λ,μ}` over `space`; checked on a probe operator.
    pub fn applies(&self, k: usize, lambda: &Rat, mu: &Rat, space: Space) -> bool {
        let probe = DensityOperator::monomial(
            lambda.clone(),
            mu.clone(),
            CoefficientFunction::one(space),
            k,
        );
        self.apply(k, &probe).is_ok()
    }
}

impl fmt::Display for SymmetryOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

fn direct_candidates(k: usize, lambda: &Rat, mu: &Rat, space: Space) -> Vec<SymmetryOp> {
    let mut out = Vec::new();
    for name in SYMMETRY_NAMES {
        // PV is the order-one member of the J∘V family; calV covers order two
        let wanted = match name {
            "PV" => k == 1,
            "calV" => k == 2,
            "JV" => k >= 3,
            "calW" => k == 3,
            "JW" | "GV" => k >= 4,
            "Jsigma" | "Gsigma" => k >= 2,
            _ => true,
        };
        if !wanted {
            continue;
        }
        let op = SymmetryOp::catalog(name).expect("catalog name");
        if op.applies(k, lambda, mu, space) {
            out.push(op);
        }
    }
    out
}

fn lifted_candidates(k: usize, mu: &Rat, space: Space) -> Vec<SymmetryOp> {
    if k == 0 {
        return Vec::new();
    }
    direct_candidates(k - 1, &Rat::one(), mu, space)
        .into_iter()
        .filter(|t| *t != SymmetryOp::Id)
        .map(|t| SymmetryOp::Lift(Box::new(t)))
        .collect()
}

/// Every catalog symmetry defined on `D^k_{λ,μ}`, together with lifts from
/// `D^{k−1}_{1,μ}` when `λ = 0` and conjugates of those when `μ = 1`.
pub fn candidate_generators(k: usize, lambda: &Rat, mu: &Rat, space: Space) -> Vec<SymmetryOp> {
    let mut out = direct_candidates(k, lambda, mu, space);
    if lambda.is_zero() {
        out.extend(lifted_candidates(k, mu, space));
    }
    if mu.is_one() {
        let l2 = Rat::one() - lambda;
        let mut mirrored = direct_candidates(k, &Rat::zero(), &l2, space);
        mirrored.extend(lifted_candidates(k, &l2, space));
        for t in mirrored {
            if !matches!(t, SymmetryOp::Id | SymmetryOp::C) {
                out.push(SymmetryOp::Conj(Box::new(t)));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::VectorField;

    fn cf(s: &str) -> CoefficientFunction {
        s.parse().unwrap()
    }

    fn op(l: Rat, m: Rat, cs: &[&str]) -> DensityOperator {
        let v: Vec<_> = cs.iter().map(|s| cf(s)).collect();
        let space = v[0].space();
        DensityOperator::new(l, m, space, v).unwrap()
    }

    #[test]
    fn conjugate_examples() {
        let a = op(rat(1, 3), int(2), &["poly: 1 + x"]);
        let c = conjugate(&a);
        assert_eq!((c.lambda().clone(), c.mu().clone()), (int(-1), rat(2, 3)));
        assert_eq!(c.coeffs(), a.coeffs());
        let d = op(int(0), int(1), &["poly: 0", "poly: 1"]);
        assert_eq!(conjugate(&d).coeffs(), d.scale(&int(-1)).coeffs());
        let xd = op(int(0), int(1), &["poly: 0", "poly: x"]);
        assert_eq!(conjugate(&xd).coeffs(), &[cf("poly: -1"), cf("poly: -1*x")]);
        assert_eq!(conjugate(&conjugate(&xd)), xd);
    }

    #[test]
    fn p_maps() {
        let a = op(int(0), int(1), &["poly: 3*x", "poly: 0", "poly: 1"]);
        assert_eq!(p0(&a).unwrap().coeffs(), &[cf("poly: 3*x")]);
        assert!(p0(&op(int(1), int(1), &["poly: 1"])).is_err());
        let xd = op(int(0), int(1), &["poly: 0", "poly: x"]);
        assert_eq!(p0_star(&xd).unwrap().coeffs(), &[cf("poly: -1")]);
        let x2d2 = op(int(0), int(1), &["poly: 0", "poly: 0", "poly: x^2"]);
        assert_eq!(
            p1(&x2d2).unwrap().coeffs(),
            &[cf("poly: 0"), cf("poly: -2*x")]
        );
        let cd = op(int(0), int(1), &["poly: 0", "poly: 5"]);
        assert_eq!(p1(&cd).unwrap(), cd);
        assert!(p1(&op(int(0), int(1), &["poly: x"])).unwrap().is_zero());
    }

    #[test]
    fn nonlocal_trace() {
        let a = op(int(0), int(1), &["trig: 2 | 1:cos=1", "trig: 0 | 3:sin=1"]);
        assert_eq!(
            nonlocal_l(&a).unwrap().coeffs(),
            &[cf("trig: 0"), cf("trig: 2")]
        );
        let line = op(int(0), int(1), &["poly: 1"]);
        assert!(matches!(
            nonlocal_l(&line),
            Err(Error::UnsupportedFunctional(_))
        ));
        let l = nonlocal_l(&a).unwrap();
        assert!(nonlocal_l(&l).unwrap().is_zero());
    }

    #[test]
    fn s_map_matches_composition_chain() {
        let a = op(
            int(0),
            int(0),
            &["poly: x^2", "poly: 1 + x^3", "poly: x", "poly: 2*x^4"],
        );
        let direct = s_map(&a).unwrap();
        // −C ∘ δ⁻¹ ∘ (Id − P0) ∘ C ∘ δ ∘ C
        let step = delta_compose(&conjugate(&a)).unwrap();
        let step = conjugate(&step);
        let step = step.try_sub(&p0(&step).unwrap()).unwrap();
        let chain = conjugate(&delta_inverse(&step).unwrap()).scale(&int(-1));
        assert_eq!(direct, chain);
        assert_eq!(s_map(&direct).unwrap(), a);
        assert_eq!(
            s_map(&op(int(0), int(0), &["poly: x"])).unwrap().coeffs(),
            &[cf("poly: x")]
        );
    }

    #[test]
    fn delta_round_trip() {
        let a = op(int(1), rat(3, 2), &["poly: x", "poly: 1"]);
        let d = delta_compose(&a).unwrap();
        assert_eq!(d.coeffs(), &[cf("poly: 0"), cf("poly: x"), cf("poly: 1")]);
        assert_eq!(delta_inverse(&d).unwrap(), a);
        assert_eq!(
            delta_inverse(&op(int(0), int(1), &["poly: 1"])),
            Err(Error::NotInKernel)
        );
    }

    #[test]
    fn pi_delta_examples() {
        assert!(pi_delta(&op(int(0), int(1), &["poly: x"]))
            .unwrap()
            .is_zero());
        assert_eq!(
            pi_delta(&DensityOperator::de_rham(Space::Line))
                .unwrap()
                .value,
            cf("poly: 1")
        );
        assert_eq!(
            pi_delta(&op(int(0), int(1), &["poly: 0", "poly: x"]))
                .unwrap()
                .value,
            cf("poly: x")
        );
    }

    #[test]
    fn projections() {
        let a = op(int(0), int(1), &["poly: 0", "poly: 1", "poly: x^3"]);
        assert_eq!(principal_symbol(&a, 2).unwrap().value, cf("poly: x^3"));
        assert_eq!(principal_symbol(&a, 2).unwrap().weight, int(-1));
        assert!(
            principal_symbol(&op(int(0), int(1), &["poly: 0", "poly: 1"]), 2)
                .unwrap()
                .is_zero()
        );

        let b = op(int(0), int(0), &["poly: 0", "poly: x^2", "poly: x^3"]);
        assert_eq!(v_map(&b, 2).unwrap().value, cf("poly: x^2"));
        let w = op(
            rat(-1, 2),
            rat(3, 2),
            &["poly: x", "poly: x^4", "poly: x^2"],
        );
        assert!(v_map(&w, 2).unwrap().is_zero());

        let (pa, pb) = wilmod_projections(
            &op(rat(-1, 2), rat(3, 2), &["poly: 0", "poly: x", "poly: x^2"]),
            2,
        )
        .unwrap();
        assert_eq!((pa.value, pb.value), (cf("poly: 2*x"), cf("poly: x")));
        assert!(wilmod_projections(&op(int(0), int(1), &["poly: 1"]), 2).is_err());
    }

    #[test]
    fn w_coefficients() {
        let s = ProjectionSpec::new(ProjectionKind::WMap, 4, int(0), rat(5, 4)).unwrap();
        assert_eq!(s.coefficients, vec![int(32), int(-24), int(14)]);
        let s = ProjectionSpec::new(ProjectionKind::WMap, 3, int(0), int(1)).unwrap();
        assert_eq!(s.coefficients, vec![int(4), int(-4), int(4)]);
        assert!(ProjectionSpec::new(ProjectionKind::WMap, 3, int(0), int(2)).is_err());
        assert!(hk_holds(3, &rat(-2, 3), &rat(5, 3)));
    }

    #[test]
    fn bilinear_examples() {
        let j = BilinearOp::new(BilinearKind::Poisson, int(1), int(0)).unwrap();
        let x = |w: Rat| Density::new(w, cf("poly: x"));
        let out = bilinear_apply(&j, &x(int(1)), &x(int(0))).unwrap();
        assert_eq!((out.weight, out.value), (int(2), cf("poly: x")));
        let j = BilinearOp::new(BilinearKind::Poisson, rat(1, 3), rat(1, 3)).unwrap();
        let phi = Density::new(rat(1, 3), cf("trig: 1 | 2:sin=3"));
        assert!(bilinear_apply(&j, &phi, &phi).unwrap().is_zero());
        let g = BilinearOp::new(BilinearKind::Grozman, rat(-2, 3), rat(-2, 3)).unwrap();
        let out = bilinear_apply(
            &g,
            &Density::new(rat(-2, 3), cf("poly: 1")),
            &Density::new(rat(-2, 3), cf("poly: x^3")),
        )
        .unwrap();
        assert_eq!((out.weight, out.value), (rat(5, 3), cf("poly: 12")));
        assert!(BilinearOp::new(BilinearKind::DLeft, int(1), int(0)).is_err());
        assert!(BilinearOp::new(BilinearKind::DOuter, rat(-1, 3), rat(-2, 3)).is_ok());
    }

    #[test]
    fn bilinear_compositions_match_their_definitions() {
        // d_outer = d{φ,ψ}
        let (nu, l) = (rat(-1, 4), rat(-3, 4));
        let phi = Density::new(nu.clone(), cf("poly: 1 + x^3"));
        let psi = Density::new(l.clone(), cf("poly: x^2 + 2*x^4"));
        let p = BilinearOp::new(BilinearKind::Poisson, nu.clone(), l.clone()).unwrap();
        let outer = BilinearOp::new(BilinearKind::DOuter, nu, l).unwrap();
        let inner = bilinear_apply(&p, &phi, &psi).unwrap().value.diff();
        assert_eq!(bilinear_apply(&outer, &phi, &psi).unwrap().value, inner);
    }

    #[test]
    fn jsigma_explicit_form() {
        let a = op(
            int(0),
            int(3),
            &["poly: x", "poly: x^2", "poly: 1", "poly: x^4"],
        );
        let out = SymmetryOp::catalog("Jsigma").unwrap().apply(3, &a).unwrap();
        assert_eq!(
            out.coeffs(),
            &[cf("poly: 0"), cf("poly: -12*x^2"), cf("poly: 4*x^3")]
        );
    }

    #[test]
    fn lie_derivative_of_density_commutes_with_bilinear() {
        let g = BilinearOp::new(BilinearKind::Grozman, rat(-2, 3), rat(-2, 3)).unwrap();
        let x = VectorField::new(cf("poly: x^2 + x^4"));
        let phi = Density::new(rat(-2, 3), cf("poly: 1 + x^2"));
        let psi = Density::new(rat(-2, 3), cf("poly: x^3"));
        use crate::density::lie_derivative_density as ld;
        let lhs = ld(&x, &bilinear_apply(&g, &phi, &psi).unwrap()).unwrap();
        let r1 = bilinear_apply(&g, &ld(&x, &phi).unwrap(), &psi).unwrap();
        let r2 = bilinear_apply(&g, &phi, &ld(&x, &psi).unwrap()).unwrap();
        assert_eq!(lhs.value, &r1.value + &r2.value);
    }
}
