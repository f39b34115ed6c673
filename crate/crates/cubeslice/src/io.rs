//! Plain-text construction format.
//!
//! One plane per line: `n` integer coefficients then the bias as a decimal
//! literal (`0.5` or `0`). Lines starting with `#` and blank lines are
//! ignored. The dimension is inferred from the token count unless an
//! explicit override is given.

use crate::cube::{Bias, Hyperplane, PlaneSet};
use crate::error::{Error, Result};

pub fn parse_construction(text: &str, dimension_override: Option<usize>) -> Result<PlaneSet> {
    let mut planes = Vec::new();
    let mut inferred: Option<usize> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let lineno = lineno + 1;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() < 2 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected coefficients and a bias, found {} token(s)", tokens.len()),
            });
        }
        let n = tokens.len() - 1;
        match (inferred, dimension_override) {
            (None, Some(want)) if n != want => {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected dimension {want}, line has {n} coefficients"),
                });
            }
            (Some(prev), _) if n != prev => {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("inconsistent dimension: previous lines had {prev} coefficients, this one has {n}"),
                });
            }
            _ => inferred = Some(n),
        }
        let mut coeffs = Vec::with_capacity(n);
        for tok in &tokens[..n] {
            let c: i64 = tok.parse().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("bad coefficient {tok:?}"),
            })?;
            coeffs.push(c);
        }
        let bias = Bias::parse_decimal(tokens[n]).ok_or_else(|| Error::Parse {
            line: lineno,
            msg: format!("bad bias {:?}: expected a half-integer decimal", tokens[n]),
        })?;
        let plane = Hyperplane::new(coeffs, bias).map_err(|e| Error::Parse {
            line: lineno,
            msg: e.to_string(),
        })?;
        planes.push(plane);
    }
    let dimension = match (inferred, dimension_override) {
        (Some(n), _) => n,
        (None, Some(n)) => n,
        (None, None) => {
            return Err(Error::Parse {
                line: 0,
                msg: "no planes and no dimension override".into(),
            })
        }
    };
    PlaneSet::new(dimension, planes)
}

/// Canonical text form: one plane per line, single-space separated, bias
/// last, trailing newline.
pub fn format_construction(set: &PlaneSet) -> String {
    let mut out = String::new();
    for plane in set.planes() {
        for &c in plane.coeffs() {
            out.push_str(&c.to_string());
            out.push(' ');
        }
        out.push_str(&plane.bias().to_string());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_blanks() {
        let text = "# heading\n\n1 0 0 0.5\n0 1 0 -2\n";
        let set = parse_construction(text, None).unwrap();
        assert_eq!(set.dimension(), 3);
        assert_eq!(set.len(), 2);
        assert_eq!(set.planes()[0].bias(), Bias::HALF);
        assert_eq!(set.planes()[1].bias(), Bias::from_twice(-4));
    }

    #[test]
    fn rejects_truncated_line_with_line_number() {
        let text = "1 0 0 0.5\n1 0\n";
        match parse_construction(text, None) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_bias() {
        let text = "1 0 0.25\n";
        assert!(matches!(
            parse_construction(text, None),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn dimension_override_must_match() {
        let text = "1 0 0 0.5\n";
        assert!(parse_construction(text, Some(3)).is_ok());
        assert!(parse_construction(text, Some(4)).is_err());
    }

    #[test]
    fn empty_needs_override() {
        assert!(parse_construction("# nothing\n", None).is_err());
        let set = parse_construction("# nothing\n", Some(5)).unwrap();
        assert_eq!(set.dimension(), 5);
        assert!(set.is_empty());
    }

    #[test]
    fn round_trip_is_identity_on_canonical_text() {
        let text = "1 2 -3 0.5\n-1 0 4 0\n";
        let set = parse_construction(text, None).unwrap();
        assert_eq!(format_construction(&set), text);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_plane_set() -> impl Strategy<Value = PlaneSet> {
            (1usize..8, 0usize..5).prop_flat_map(|(n, k)| {
                proptest::collection::vec(
                    (
                        proptest::collection::vec(-50i64..=50, n),
                        -7i64..=7,
                    ),
                    k,
                )
                .prop_map(move |rows| {
                    let planes = rows
                        .into_iter()
                        .map(|(coeffs, bias_twice)| {
                            Hyperplane::new(coeffs, Bias::from_twice(bias_twice)).unwrap()
                        })
                        .collect();
                    PlaneSet::new(n, planes).unwrap()
                })
            })
        }

        proptest! {
            #[test]
            fn format_then_parse_is_identity(set in arb_plane_set()) {
                let text = format_construction(&set);
                let parsed = parse_construction(&text, Some(set.dimension())).unwrap();
                prop_assert_eq!(parsed.planes(), set.planes());
                prop_assert_eq!(parsed.dimension(), set.dimension());
            }
        }
    }
}
