//! Tuples and polynomials shipped with the crate, addressable by file stem.

pub const FIXTURES: &[(&str, &str)] = &[
    ("circle_r0.5.poly", include_str!("../../fixtures/circle_r0.5.poly")),
    ("circle_tiny.poly", include_str!("../../fixtures/circle_tiny.poly")),
    ("cone.poly", include_str!("../../fixtures/cone.poly")),
    ("degenerate_pair.qt", include_str!("../../fixtures/degenerate_pair.qt")),
    ("good_d4.qt", include_str!("../../fixtures/good_d4.qt")),
    (
        "hyperbolic_tensor.qt",
        include_str!("../../fixtures/hyperbolic_tensor.qt"),
    ),
    ("maxcodim_d2.qt", include_str!("../../fixtures/maxcodim_d2.qt")),
    ("maxcodim_d3.qt", include_str!("../../fixtures/maxcodim_d3.qt")),
    ("mockenhaupt.qt", include_str!("../../fixtures/mockenhaupt.qt")),
    ("paraboloid_d1.qt", include_str!("../../fixtures/paraboloid_d1.qt")),
    ("paraboloid_d2.qt", include_str!("../../fixtures/paraboloid_d2.qt")),
    ("paraboloid_d3.qt", include_str!("../../fixtures/paraboloid_d3.qt")),
    ("paraboloid_d4.qt", include_str!("../../fixtures/paraboloid_d4.qt")),
    ("paraboloid_d5.qt", include_str!("../../fixtures/paraboloid_d5.qt")),
    ("paraboloid_d6.qt", include_str!("../../fixtures/paraboloid_d6.qt")),
];

/// Fixture text by file name, with or without its extension.
pub fn fixture(name: &str) -> Option<&'static str> {
    FIXTURES
        .iter()
        .find(|(file, _)| *file == name || file.rsplit_once('.').is_some_and(|(stem, _)| stem == name))
        .map(|(_, text)| *text)
}

pub fn names() -> impl Iterator<Item = &'static str> {
    FIXTURES.iter().map(|(file, _)| *file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_tuple;

    #[test]
    fn lookup_and_parse() {
        assert_eq!(fixture("mockenhaupt"), fixture("mockenhaupt.qt"));
        assert!(fixture("nope").is_none());
        for (file, text) in FIXTURES {
            if file.ends_with(".qt") {
                parse_tuple(text).unwrap();
            }
        }
        assert_eq!(parse_tuple(fixture("paraboloid_d4").unwrap()).unwrap().d(), 4);
    }
}
