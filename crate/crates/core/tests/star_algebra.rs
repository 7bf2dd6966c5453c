use proptest::prelude::*;
use starconfine::star::PolynomialSymbol;
use starconfine::C64;

fn poly(coeffs: &[(usize, usize, f64, f64)]) -> PolynomialSymbol {
    PolynomialSymbol::from_terms(coeffs.iter().map(|&(i, j, re, im)| ((i, j), C64::new(re, im))))
}

fn max_coeff(a: &PolynomialSymbol) -> f64 {
    a.coefficients().values().map(|c| c.norm()).fold(0.0, f64::max)
}

fn term() -> impl Strategy<Value = (usize, usize, f64, f64)> {
    (0usize..3, 0usize..3, -2.0f64..2.0, -2.0f64..2.0)
}

proptest! {
    #[test]
    fn associative(a in prop::collection::vec(term(), 1..4),
                   b in prop::collection::vec(term(), 1..4),
                   c in prop::collection::vec(term(), 1..4)) {
        let (a, b, c) = (poly(&a), poly(&b), poly(&c));
        let lhs = a.star(&b).star(&c);
        let rhs = a.star(&b.star(&c));
        prop_assert!(max_coeff(&lhs.sub(&rhs)) < 1e-10 * max_coeff(&lhs).max(1.0));
    }

    #[test]
    fn bracket_is_antisymmetric(a in prop::collection::vec(term(), 1..4), b in prop::collection::vec(term(), 1..4)) {
        let (a, b) = (poly(&a), poly(&b));
        let s = a.moyal_bracket(&b).add(&b.moyal_bracket(&a));
        prop_assert!(max_coeff(&s) < 1e-12);
    }

    #[test]
    fn conjugation_reverses_order(a in prop::collection::vec(term(), 1..4), b in prop::collection::vec(term(), 1..4)) {
        let (a, b) = (poly(&a), poly(&b));
        let lhs = a.star(&b).conj();
        let rhs = b.conj().star(&a.conj());
        prop_assert!(max_coeff(&lhs.sub(&rhs)) < 1e-12 * max_coeff(&lhs).max(1.0));
    }

    #[test]
    fn quadratic_bracket_is_poisson(a in prop::collection::vec(term(), 1..4), b in prop::collection::vec((0usize..2, 0usize..2, -2.0f64..2.0, -2.0f64..2.0), 1..4)) {
        // one factor of degree <= 2 total keeps the bracket classical
        let (a, b) = (poly(&a), poly(&b));
        let b = PolynomialSymbol::from_terms(b.coefficients().iter().filter(|((i, j), _)| i + j <= 2).map(|(k, c)| (*k, *c)));
        let d = a.moyal_bracket(&b).sub(&a.poisson_bracket(&b));
        prop_assert!(max_coeff(&d) < 1e-12 * max_coeff(&a.poisson_bracket(&b)).max(1.0));
    }
}

#[test]
fn heisenberg_relation() {
    let x = PolynomialSymbol::x();
    let p = PolynomialSymbol::p();
    let c = x.star(&p).sub(&p.star(&x));
    assert_eq!(c, PolynomialSymbol::constant(C64::new(0.0, 1.0)));
}

#[test]
fn star_square_of_p() {
    let p = PolynomialSymbol::p();
    assert_eq!(p.star(&p), PolynomialSymbol::p_squared());
    // x ⋆ x ⋆ p ⋆ p contains the ordering correction
    let x = PolynomialSymbol::x();
    let xxpp = x.star(&x).star(&p).star(&p);
    let expect = poly(&[(2, 2, 1.0, 0.0), (1, 1, 0.0, 2.0), (0, 0, -0.5, 0.0)]);
    assert!(max_coeff(&xxpp.sub(&expect)) < 1e-15);
}
