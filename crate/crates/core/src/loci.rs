//! Exceptional curves and points in the `(λ, μ)` plane, and their rendering as SVG/CSV.

use std::fmt::Write as _;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::invariant::hk_holds;
use crate::rational::{fmt_rat, int, rat, to_f64, Rat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Curve {
    LambdaZero,
    MuOne,
    SumOne,
    ShiftOne,
    ShiftTwo,
    /// `(3λ+1)(3μ−4) = −1`, which is also the relation `(hk)` for `k = 3`.
    Hyperbola,
    /// The relation `(hk)` for `k ≥ 4`.
    Hk(usize),
}

impl Curve {
    pub fn holds(&self, lambda: &Rat, mu: &Rat) -> bool {
        match self {
            Curve::LambdaZero => lambda.is_zero(),
            Curve::MuOne => mu.is_one(),
            Curve::SumOne => (lambda + mu).is_one(),
            Curve::ShiftOne => (mu - lambda).is_one(),
            Curve::ShiftTwo => mu - lambda == int(2),
            Curve::Hyperbola => hk_holds(3, lambda, mu),
            Curve::Hk(k) => hk_holds(*k, lambda, mu),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Curve::LambdaZero => "lambda=0".into(),
            Curve::MuOne => "mu=1".into(),
            Curve::SumOne => "lambda+mu=1".into(),
            Curve::ShiftOne => "mu-lambda=1".into(),
            Curve::ShiftTwo => "mu-lambda=2".into(),
            Curve::Hyperbola => "hyperbola".into(),
            Curve::Hk(k) => format!("h{k}"),
        }
    }

    pub fn equation(&self) -> String {
        match self {
            Curve::LambdaZero => "lambda = 0".into(),
            Curve::MuOne => "mu = 1".into(),
            Curve::SumOne => "lambda + mu = 1".into(),
            Curve::ShiftOne => "mu - lambda = 1".into(),
            Curve::ShiftTwo => "mu - lambda = 2".into(),
            Curve::Hyperbola => "(3*lambda + 1)*(3*mu - 4) = -1".into(),
            Curve::Hk(k) => {
                let k = *k as i64;
                format!(
                    "(lambda + {})*(mu - {}) + {} = 0",
                    fmt_rat(&rat(k - 2, 3)),
                    fmt_rat(&rat(k + 1, 3)),
                    fmt_rat(&rat((k + 1) * (k - 2), 36))
                )
            }
        }
    }

    /// The point of the curve with parameter `t` (`λ = t`, or `μ = t` on `λ = 0`).
    pub fn point(&self, t: &Rat) -> Option<(Rat, Rat)> {
        match self {
            Curve::LambdaZero => Some((Rat::zero(), t.clone())),
            Curve::MuOne => Some((t.clone(), Rat::one())),
            Curve::SumOne => Some((t.clone(), Rat::one() - t)),
            Curve::ShiftOne => Some((t.clone(), t + int(1))),
            Curve::ShiftTwo => Some((t.clone(), t + int(2))),
            Curve::Hyperbola => Curve::Hk(3).point(t),
            Curve::Hk(k) => {
                let k = *k as i64;
                let a = t + rat(k - 2, 3);
                if a.is_zero() {
                    return None;
                }
                Some((t.clone(), rat(k + 1, 3) - rat((k + 1) * (k - 2), 36) / a))
            }
        }
    }
}

/// Every isolated point where some order has a larger or different symmetry algebra.
pub fn isolated_points() -> Vec<(Rat, Rat)> {
    [
        (int(0), rat(5, 4)),
        (rat(-1, 4), int(1)),
        (int(0), int(3)),
        (int(-2), int(1)),
        (int(0), int(0)),
        (int(1), int(1)),
        (rat(-2, 3), rat(5, 3)),
        (rat(-1, 2), rat(3, 2)),
        (int(0), int(1)),
        (int(0), int(2)),
        (int(-1), int(1)),
    ]
    .into()
}

/// Curves checked when deciding that a sample is generic for orders up to `max_k`.
pub fn rejection_curves(max_k: usize) -> Vec<Curve> {
    let mut out = vec![
        Curve::LambdaZero,
        Curve::MuOne,
        Curve::SumOne,
        Curve::ShiftOne,
        Curve::ShiftTwo,
        Curve::Hyperbola,
    ];
    out.extend((4..=max_k).map(Curve::Hk));
    out
}

/// True if `(λ, μ)` lies on no rejection curve other than `on` and is not isolated.
pub fn is_generic_on(on: Option<Curve>, lambda: &Rat, mu: &Rat, max_k: usize) -> bool {
    let curves = rejection_curves(max_k);
    let isolated = isolated_points()
        .iter()
        .any(|(l, m)| l == lambda && m == mu);
    !isolated
        && curves
            .iter()
            .filter(|c| Some(**c) != on)
            .all(|c| !c.holds(lambda, mu))
}

/// Exceptional curves and points for a given order.
#[derive(Debug, Clone, PartialEq)]
pub struct LociFigure {
    pub k: usize,
    pub curves: Vec<Curve>,
    pub points: Vec<(Rat, Rat)>,
}

fn pts(list: &[(i64, i64, i64, i64)]) -> Vec<(Rat, Rat)> {
    list.iter()
        .map(|&(a, b, c, d)| (rat(a, b), rat(c, d)))
        .collect()
}

pub fn loci_for_order(k: usize) -> Result<LociFigure> {
    use Curve::*;
    let (curves, points) = match k {
        2 => (
            vec![ShiftOne, ShiftTwo, LambdaZero, MuOne],
            pts(&[(-1, 2, 3, 2), (0, 1, 2, 1), (-1, 1, 1, 1), (0, 1, 1, 1)]),
        ),
        3 => (
            vec![SumOne, Hyperbola, ShiftTwo, LambdaZero, MuOne],
            pts(&[
                (-1, 2, 3, 2),
                (-2, 3, 5, 3),
                (0, 1, 1, 1),
                (0, 1, 2, 1),
                (0, 1, 3, 1),
                (-1, 1, 1, 1),
                (-2, 1, 1, 1),
            ]),
        ),
        4 => (
            vec![SumOne, LambdaZero, MuOne],
            pts(&[
                (1, 1, 1, 1),
                (0, 1, 5, 4),
                (0, 1, 0, 1),
                (-1, 4, 1, 1),
                (-2, 3, 5, 3),
                (0, 1, 3, 1),
                (-2, 1, 1, 1),
                (0, 1, 1, 1),
            ]),
        ),
        5 => (
            vec![SumOne, LambdaZero, MuOne],
            pts(&[(0, 1, 0, 1), (1, 1, 1, 1), (0, 1, 1, 1)]),
        ),
        _ => {
            return Err(Error::Inapplicable(format!(
                "figures exist for k in 2..=5, got {k}"
            )))
        }
    };
    Ok(LociFigure { k, curves, points })
}

const VIEW: (f64, f64, f64, f64) = (-3.0, 2.0, -1.0, 4.0);
const SIZE: f64 = 500.0;

fn to_px(l: f64, m: f64) -> (f64, f64) {
    let (l0, l1, m0, m1) = VIEW;
    (
        (l - l0) / (l1 - l0) * SIZE,
        SIZE - (m - m0) / (m1 - m0) * SIZE,
    )
}

fn curve_path(c: Curve) -> String {
    let (l0, l1, m0, m1) = VIEW;
    let steps = 400;
    let mut d = String::new();
    let mut pen_down = false;
    for i in 0..=steps {
        let l = l0 + (l1 - l0) * i as f64 / steps as f64;
        let m = match c {
            Curve::LambdaZero => None,
            Curve::MuOne => Some(1.0),
            Curve::SumOne => Some(1.0 - l),
            Curve::ShiftOne => Some(l + 1.0),
            Curve::ShiftTwo => Some(l + 2.0),
            Curve::Hyperbola | Curve::Hk(_) => {
                let k = if let Curve::Hk(k) = c { k as f64 } else { 3.0 };
                let a = l + (k - 2.0) / 3.0;
                (a.abs() > 1e-3).then(|| (k + 1.0) / 3.0 - (k + 1.0) * (k - 2.0) / 36.0 / a)
            }
        };
        match m {
            Some(m) if (m0..=m1).contains(&m) => {
                let (x, y) = to_px(l, m);
                let _ = write!(d, "{}{x:.2},{y:.2} ", if pen_down { "L" } else { "M" });
                pen_down = true;
            }
            _ => pen_down = false,
        }
    }
    if c == Curve::LambdaZero {
        let (x0, y0) = to_px(0.0, m0);
        let (x1, y1) = to_px(0.0, m1);
        d = format!("M{x0:.2},{y0:.2} L{x1:.2},{y1:.2}");
    }
    d.trim_end().to_string()
}

const COLORS: [&str; 7] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf",
];

impl LociFigure {
    pub fn to_svg(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let (ax0, ay) = to_px(VIEW.0, 0.0);
        let (ax1, _) = to_px(VIEW.1, 0.0);
        let (ax, ay0) = to_px(0.0, VIEW.2);
        let (_, ay1) = to_px(0.0, VIEW.3);
        let _ = writeln!(
            s,
            r##"<path d="M{ax0:.2},{ay:.2} L{ax1:.2},{ay:.2} M{ax:.2},{ay0:.2} L{ax:.2},{ay1:.2}" stroke="#bbbbbb" stroke-width="1"/>"##
        );
        let _ = writeln!(
            s,
            r#"<text x="8" y="18" font-size="14">k = {}</text>"#,
            self.k
        );
        for (i, c) in self.curves.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let _ = writeln!(
                s,
                r#"<path d="{}" fill="none" stroke="{color}" stroke-width="2"><title>{}</title></path>"#,
                curve_path(*c),
                c.equation()
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" font-size="11" fill="{color}">{}</text>"#,
                SIZE - 110.0,
                18 + 14 * i,
                c.label()
            );
        }
        for (l, m) in &self.points {
            let (x, y) = to_px(to_f64(l), to_f64(m));
            let _ = writeln!(
                s,
                r#"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="black"><title>({}, {})</title></circle>"#,
                fmt_rat(l),
                fmt_rat(m)
            );
        }
        s.push_str("</svg>\n");
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,type,label,value\n");
        for c in &self.curves {
            let _ = writeln!(s, "{},curve,{},{}", self.k, c.label(), c.equation());
        }
        for (l, m) in &self.points {
            let _ = writeln!(s, "{},point,,({} {})", self.k, fmt_rat(l), fmt_rat(m));
        }
        s
    }
}
