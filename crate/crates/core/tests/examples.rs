use densym::algebra::{identify, span_algebra};
use densym::classifier::classify;
use densym::engine::{is_equivariant, realize, GeneratorFamily, SymmetryMap, TruncatedBasis};
use densym::invariant::SymmetryOp;
use densym::rational::{int, rat};
use densym::verify::{jw_closed_form, verify, VerifyOptions};
use densym::Space;

fn maps(names: &[&str], basis: &TruncatedBasis) -> Vec<SymmetryMap> {
    names
        .iter()
        .map(|n| realize(&SymmetryOp::catalog(n).unwrap(), basis).unwrap())
        .collect()
}

#[test]
fn shifted_weights_on_the_line_give_the_dual_numbers() {
    let c = classify(1, &rat(2, 7), &rat(9, 7), Space::Line, None).unwrap();
    assert_eq!(c.report.total, 2);
    assert_eq!(c.report.nonlocal_dim, 0);
    assert_eq!(c.report.algebra, "a");
}

#[test]
fn generic_weights_keep_only_scalars_from_order_three() {
    for k in 3..=5 {
        let c = classify(k, &rat(3, 7), &rat(-5, 11), Space::Circle, None).unwrap();
        assert_eq!(c.report.total, 1);
        assert_eq!(c.report.generators, ["Id"]);
        assert_eq!(c.report.algebra, "R");
    }
}

#[test]
fn origin_at_order_five_is_spanned_by_id_p0_s() {
    let c = classify(5, &int(0), &int(0), Space::Circle, None).unwrap();
    assert_eq!(c.report.total, 3);
    let basis = TruncatedBasis::new(5, 11, Space::Circle, int(0), int(0));
    let ms = maps(&["Id", "P0", "S"], &basis);
    let family = GeneratorFamily::default_for(Space::Circle);
    for m in &ms {
        assert!(is_equivariant(m, &family).unwrap(), "{}", m.name);
    }
    let alg = span_algebra(&ms).unwrap();
    assert!(alg.is_associative() && alg.is_commutative());
    assert_eq!(identify(&alg).label(), "R^3");
    assert_eq!(c.report.algebra, "R^3");
}

#[test]
fn rescaling_the_nonlocal_generator_keeps_the_algebra() {
    let basis = TruncatedBasis::new(3, 9, Space::Circle, int(0), int(1));
    let mut ms = maps(&["Id", "C", "P0", "P0star", "P1", "L"], &basis);
    let base = identify(&span_algebra(&ms).unwrap()).label();
    ms[5] = ms[5].scale(&int(7));
    let scaled = span_algebra(&ms).unwrap();
    assert_eq!(identify(&scaled).label(), base);
    assert_eq!(base, "b+R^2");
}

#[test]
fn jw_needs_four_thirds_on_the_first_order_term() {
    let (l, m) = (int(0), rat(5, 4));
    for space in [Space::Circle, Space::Line] {
        let basis = TruncatedBasis::new(4, 10, space, l.clone(), m.clone());
        let family = GeneratorFamily::default_for(space);
        let unit = jw_closed_form(&basis, int(1)).unwrap();
        assert!(!is_equivariant(&unit, &family).unwrap());
        let fixed = jw_closed_form(&basis, rat(4, 3)).unwrap();
        assert!(is_equivariant(&fixed, &family).unwrap());
        let jw = maps(&["JW"], &basis).pop().unwrap();
        assert_eq!(fixed.matrix, jw.matrix);
    }
}

#[test]
fn algebra_csv_lists_nonzero_constants() {
    let basis = TruncatedBasis::new(1, 7, Space::Circle, int(0), int(1));
    let alg = span_algebra(&maps(&["Id", "C", "P0", "L"], &basis)).unwrap();
    let csv = alg.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("i,j,k,c"));
    assert!(csv.contains("Id,Id,Id,1\n"));
    assert!(csv.contains("P0,P0,P0,1\n"));
    assert!(csv.contains("C,C,Id,1\n"));
    assert!(lines.all(|l| l.split(',').count() == 4 && !l.ends_with(",0")));
}

#[test]
fn verify_reports_basis_and_defect() {
    let r = verify("jv_nilpotent", &VerifyOptions::default()).unwrap();
    assert!(r.passed);
    assert_eq!(r.defect, "0");
    assert!(r.basis_size > 0);
}

#[test]
fn mult_table_is_independent_of_truncation() {
    for m in [7usize, 9, 11] {
        let r = verify(
            "mult_table_01",
            &VerifyOptions {
                k: Some(3),
                m: Some(m),
                ..Default::default()
            },
        )
        .unwrap();
        assert!(r.passed, "M={m}: {:?}", r.failures);
        assert_eq!(r.checks, 36);
    }
}
