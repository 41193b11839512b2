//! Display/parse round-trips for ring elements and the on-disk file formats,
//! driven by proptest.

use proptest::prelude::*;

use hnslope_core::linalg::Matrix;
use hnslope_core::parse::{
    format_matrix_file, format_poset_file, parse_hahn, parse_matrix_file, parse_padic,
    parse_poset_file, parse_xi, ParsedMatrix,
};
use hnslope_core::rat::{rat, rat_int, Rat};
use hnslope_core::rings::{FiniteField, HahnSeries, PadicRational, XiSeries};

fn small_rat() -> impl Strategy<Value = Rat> {
    (-12i64..=12, 1i64..=4).prop_map(|(n, d)| rat(n, d))
}

fn field_shape() -> impl Strategy<Value = (u32, u32)> {
    prop_oneof![Just((2u32, 1u32)), Just((3, 1)), Just((5, 1)), Just((2, 2))]
}

type HahnTerm = ((i64, i64), Vec<i64>);

fn hahn_series(
    field: FiniteField,
    terms: Vec<HahnTerm>,
    prec: Option<i64>,
) -> HahnSeries {
    let terms = terms
        .into_iter()
        .map(|((n, d), coeffs)| (rat(n, d), field.from_coeffs(&coeffs)))
        .collect();
    HahnSeries::from_terms(&field, terms).truncated(prec.map(rat_int))
}

fn hahn_term(degree: u32) -> impl Strategy<Value = HahnTerm> {
    (
        (-4i64..=8, 1i64..=2),
        prop::collection::vec(0i64..=4, degree as usize),
    )
}

fn xi_series() -> impl Strategy<Value = XiSeries> {
    (
        prop::collection::vec(((-3i64..=4), small_rat()), 0..=3),
        prop::option::of(2i64..=6),
    )
        .prop_map(|(terms, prec)| XiSeries::from_terms(terms).truncated(prec))
}

proptest! {
    #[test]
    fn hahn_display_parses_back(
        shape in field_shape(),
        terms in prop::collection::vec(hahn_term(2), 0..=3),
        prec in prop::option::of(3i64..=9),
    ) {
        let field = FiniteField::extension(shape.0, shape.1).unwrap();
        let terms: Vec<HahnTerm> = terms
            .into_iter()
            .map(|((n, d), c)| ((n, d), c[..shape.1 as usize].to_vec()))
            .collect();
        let x = hahn_series(field.clone(), terms, prec);
        let reparsed = parse_hahn(&field, &x.to_string()).unwrap();
        prop_assert_eq!(reparsed, x);
    }

    #[test]
    fn xi_display_parses_back(x in xi_series()) {
        prop_assert_eq!(parse_xi(&x.to_string()).unwrap(), x);
    }

    #[test]
    fn padic_display_parses_back(p in prop_oneof![Just(2u64), Just(3), Just(7)], v in small_rat()) {
        let x = PadicRational::new(p, v);
        prop_assert_eq!(parse_padic(p, &x.to_string()).unwrap(), x);
    }

    #[test]
    fn padic_matrix_files_are_format_stable(
        p in prop_oneof![Just(2u64), Just(3), Just(5)],
        rows in 1usize..=3,
        cols in 1usize..=3,
        entries in prop::collection::vec(small_rat(), 9),
    ) {
        let data = entries[..rows * cols]
            .iter()
            .map(|v| PadicRational::new(p, v.clone()))
            .collect();
        let m = ParsedMatrix::Padic(Matrix::new(rows, cols, data).unwrap());
        let text = format_matrix_file(&m);
        let reparsed = parse_matrix_file(&text).unwrap();
        prop_assert_eq!(format_matrix_file(&reparsed), text);
    }

    #[test]
    fn xi_matrix_files_are_format_stable(
        rows in 1usize..=3,
        cols in 1usize..=3,
        entries in prop::collection::vec(xi_series(), 9),
    ) {
        let data = entries[..rows * cols].to_vec();
        let m = ParsedMatrix::Xi(Matrix::new(rows, cols, data).unwrap());
        let text = format_matrix_file(&m);
        let reparsed = parse_matrix_file(&text).unwrap();
        prop_assert_eq!(format_matrix_file(&reparsed), text);
    }

    #[test]
    fn hahn_matrix_files_are_format_stable(
        shape in field_shape(),
        rows in 1usize..=2,
        cols in 1usize..=2,
        cells in prop::collection::vec(prop::collection::vec(hahn_term(2), 0..=2), 4),
    ) {
        let field = FiniteField::extension(shape.0, shape.1).unwrap();
        let data = cells[..rows * cols]
            .iter()
            .map(|terms| {
                let terms = terms
                    .iter()
                    .map(|((n, d), c)| ((*n, *d), c[..shape.1 as usize].to_vec()))
                    .collect();
                hahn_series(field.clone(), terms, None)
            })
            .collect();
        let m = ParsedMatrix::Hahn(Matrix::new(rows, cols, data).unwrap());
        let text = format_matrix_file(&m);
        let reparsed = parse_matrix_file(&text).unwrap();
        prop_assert_eq!(format_matrix_file(&reparsed), text);
    }

    #[test]
    fn chain_poset_files_are_format_stable(
        degs in prop::collection::vec(small_rat(), 2..=5),
    ) {
        let elements: Vec<(String, u32, Rat)> = degs
            .iter()
            .enumerate()
            .map(|(i, d)| (format!("n{i}"), i as u32, d.clone()))
            .collect();
        let covers: Vec<(String, String)> = (1..degs.len())
            .map(|i| (format!("n{}", i - 1), format!("n{i}")))
            .collect();
        let poset = hnslope_core::hn::RankedPoset::new(elements, &covers, None).unwrap();
        let text = format_poset_file(&poset);
        let reparsed = parse_poset_file(&text).unwrap();
        prop_assert_eq!(format_poset_file(&reparsed), text);
    }

    #[test]
    fn diamond_poset_files_are_format_stable(degs in prop::collection::vec(small_rat(), 4)) {
        let ranks = [0u32, 1, 1, 2];
        let ids = ["b", "x", "y", "t"];
        let elements: Vec<(String, u32, Rat)> = ids
            .iter()
            .zip(&ranks)
            .zip(&degs)
            .map(|((id, r), d)| (id.to_string(), *r, d.clone()))
            .collect();
        let covers: Vec<(String, String)> = [("b", "x"), ("b", "y"), ("x", "t"), ("y", "t")]
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        let poset = hnslope_core::hn::RankedPoset::new(elements, &covers, None).unwrap();
        let text = format_poset_file(&poset);
        let reparsed = parse_poset_file(&text).unwrap();
        prop_assert_eq!(format_poset_file(&reparsed), text);
    }
}
