use hexeq::catalog::{
    eval_face, eval_face_coeff, eval_quad, extract_p1, p1_by_difference, Domain, EquationSpec, Family, Shape,
};
use hexeq::hexsys::HexSystem;
use hexeq::scalar::{rat, EllipticContext, Par, Rat, C64};
use hexeq::Error;
use proptest::prelude::*;

fn families(shape: Shape) -> Vec<Family> {
    Family::all()
        .into_iter()
        .filter(|f| f.is_legal() && f.shape() == shape && f.domain() != Domain::Elliptic)
        .collect()
}

fn r() -> impl Strategy<Value = Rat> {
    (-9i64..=9, 1i64..=9).prop_map(|(p, q)| rat(p, q))
}

/// (numerator, denominator) usable both as θ and, when positive and ≠ 1, as e^θ
fn praw() -> impl Strategy<Value = (i64, i64)> {
    (1i64..=9, 1i64..=9).prop_filter("e^θ ≠ 1", |(p, q)| p != q)
}

fn par(d: Domain, (p, q): (i64, i64), sign: bool) -> Par<Rat> {
    match d {
        Domain::Hyperbolic => Par::Exp(rat(p, q)),
        _ => Par::Add(if sign { rat(-p, q) } else { rat(p, q) }),
    }
}

fn second_difference(f: impl Fn(Rat) -> Rat) -> Rat {
    f(rat(2, 1)) - f(rat(1, 1)) * rat(2, 1) + f(rat(0, 1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quad_equations_are_multilinear(
        fi in 0usize..32, x in prop::array::uniform4(r()), a in praw(), b in praw(), slot in 0usize..4,
    ) {
        let fams = families(Shape::Quad);
        let f = fams[fi % fams.len()];
        let (pa, pb) = (par(f.domain(), a, false), par(f.domain(), b, true));
        let d2 = second_difference(|t| {
            let mut y = x.clone();
            y[slot] = t;
            eval_quad(&EquationSpec::new(f), &y, &pa, &pb, None).unwrap()
        });
        prop_assert_eq!(d2, rat(0, 1), "{} slot {}", f.label(), slot);
    }

    #[test]
    fn face_equations_quadratic_in_x_multilinear_in_corners(
        fi in 0usize..32, x in r(), c in prop::array::uniform4(r()),
        p in prop::array::uniform3(praw()), slot in 0usize..4,
    ) {
        let fams = families(Shape::Face);
        let f = fams[fi % fams.len()];
        let d = f.domain();
        let ps = [par(d, p[0], false), par(d, p[1], true), par(d, p[2], false)];
        let spec = EquationSpec::new(f);
        let e = |x: &Rat, c: &[Rat; 4]| eval_face(&spec, x, c, &ps, None).unwrap();
        let third = e(&rat(3, 1), &c) - e(&rat(2, 1), &c) * rat(3, 1) + e(&rat(1, 1), &c) * rat(3, 1) - e(&rat(0, 1), &c);
        prop_assert_eq!(third, rat(0, 1), "{} degree in x", f.label());
        let d2 = second_difference(|t| {
            let mut y = c.clone();
            y[slot] = t;
            e(&x, &y)
        });
        prop_assert_eq!(d2, rat(0, 1), "{} corner {}", f.label(), slot);
    }

    #[test]
    fn coefficient_form_matches(
        fi in 0usize..32, x in r(), c in prop::array::uniform4(r()), p in prop::array::uniform3(praw()),
    ) {
        let fams = families(Shape::Face);
        let f = fams[fi % fams.len()];
        let d = f.domain();
        let ps = [par(d, p[0], true), par(d, p[1], false), par(d, p[2], false)];
        let spec = EquationSpec::new(f);
        prop_assert_eq!(
            eval_face(&spec, &x, &c, &ps, None).unwrap(),
            eval_face_coeff(&spec, &x, &c, &ps).unwrap(),
            "{}", f.label()
        );
    }

    #[test]
    fn p1_equals_linear_coefficient(
        fi in 0usize..32, c in prop::array::uniform4(r()), p in prop::array::uniform3(praw()),
    ) {
        let fams = families(Shape::Face);
        let f = fams[fi % fams.len()];
        let d = f.domain();
        let ps = [par(d, p[0], false), par(d, p[1], false), par(d, p[2], true)];
        let spec = EquationSpec::new(f);
        let diff = p1_by_difference(&spec, &c, &ps).unwrap();
        match extract_p1(&spec, &c, &ps) {
            Ok(v) => prop_assert_eq!(v, diff, "{}", f.label()),
            Err(Error::Degenerate(_)) => prop_assert_eq!(diff, rat(0, 1)),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }

    #[test]
    fn sinh_addition(a in praw(), b in praw()) {
        let (pa, pb) = (Par::Exp(rat(a.0, a.1)), Par::Exp(rat(b.0, b.1)));
        let lhs = (&pa + &pb).sh();
        prop_assert_eq!(lhs, pa.sh() * pb.ch() + pa.ch() * pb.sh());
        prop_assert_eq!((&pa - &pa).sh(), rat(0, 1));
    }

    #[test]
    fn weierstrass_ode_and_parity(re in 0.05f64..0.9, im in -0.4f64..0.4) {
        let ctx = EllipticContext::standard();
        let z = C64::new(re, im);
        let (p, dp) = ctx.wp(z).unwrap();
        let scale = dp.norm_sqr().max((4.0 * p * p * p).norm()).max(1.0);
        prop_assert!((dp * dp - ctx.xdot(p)).norm() / scale < 1e-8);
        let (pm, dpm) = ctx.wp(-z).unwrap();
        prop_assert!((pm - p).norm() <= 1e-8 * p.norm().max(1.0));
        prop_assert!((dpm + dp).norm() <= 1e-8 * dp.norm().max(1.0));
    }

    #[test]
    fn hex_pair_solve_satisfies_all_rows(
        fi in 0usize..32, i in 0usize..6, x in prop::array::uniform4(r()), p in prop::array::uniform3(praw()),
    ) {
        let fams: Vec<Family> = families(Shape::Face).into_iter().filter(|f| f.is_type_a()).collect();
        let sys = HexSystem::type_a(fams[fi % fams.len()]).unwrap();
        let d = sys.domain();
        let ps = [par(d, p[0], false), par(d, p[1], true), par(d, p[2], false)];
        let mut v: [Rat; 6] = std::array::from_fn(|_| rat(0, 1));
        for k in 0..4 {
            v[(i + k) % 6] = x[k].clone();
        }
        match sys.solve_pair(i, &v, &ps) {
            Ok((a, b)) => {
                v[(i + 4) % 6] = a;
                v[(i + 5) % 6] = b;
                prop_assert!(sys.all_rows_ok(&v, &ps).unwrap().0, "{}", sys.name());
            }
            Err(Error::SingularSolve(_)) => {}
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }
}
