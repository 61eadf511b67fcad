use std::fmt;

use cone_spectra::spectra::CrossSection;

/// Syntax error in a cross-section descriptor, positioned by byte offset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DescriptorError {
    pub position: usize,
    pub expected: String,
    pub found: String,
}

impl fmt::Display for DescriptorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "at position {}: expected {}, found {}",
            self.position, self.expected, self.found
        )
    }
}

impl std::error::Error for DescriptorError {}

fn err(position: usize, expected: impl Into<String>, found: &str) -> DescriptorError {
    DescriptorError {
        position,
        expected: expected.into(),
        found: if found.is_empty() {
            "end of input".into()
        } else {
            format!("'{found}'")
        },
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Float,
    Int,
}

struct Param<'a> {
    key: &'a str,
    value: &'a str,
    key_at: usize,
    value_at: usize,
}

fn split_params(text: &str, start: usize) -> Result<Vec<Param<'_>>, DescriptorError> {
    let body = &text[start..];
    let mut out = Vec::new();
    let mut offset = start;
    for part in body.split(',') {
        match part.split_once('=') {
            Some((key, value)) => out.push(Param {
                key,
                value,
                key_at: offset,
                value_at: offset + key.len() + 1,
            }),
            None if part.is_empty() => return Err(err(offset, "a key", "")),
            None => return Err(err(offset + part.len(), "'='", &text[offset + part.len()..])),
        }
        offset += part.len() + 1;
    }
    Ok(out)
}

/// Parses `circle:L=<float>`, `sphere:m=<int>[,r=<float>]` or `football:q=<int>`.
pub fn parse_descriptor(text: &str) -> Result<CrossSection, DescriptorError> {
    let Some(colon) = text.find(':') else {
        let known = ["circle", "sphere", "football"].contains(&text);
        return Err(if known {
            err(text.len(), "':'", "")
        } else {
            err(0, "one of circle, sphere, football", text)
        });
    };
    let name = &text[..colon];
    let keys: &[(&str, Kind, bool)] = match name {
        "circle" => &[("L", Kind::Float, true)],
        "sphere" => &[("m", Kind::Int, true), ("r", Kind::Float, false)],
        "football" => &[("q", Kind::Int, true)],
        _ => return Err(err(0, "one of circle, sphere, football", name)),
    };
    let allowed = keys
        .iter()
        .map(|(k, _, _)| format!("'{k}'"))
        .collect::<Vec<_>>()
        .join(" or ");

    let mut values: Vec<Option<f64>> = vec![None; keys.len()];
    let mut ints: Vec<Option<u64>> = vec![None; keys.len()];
    for p in split_params(text, colon + 1)? {
        let Some(slot) = keys.iter().position(|(k, _, _)| *k == p.key) else {
            return Err(err(p.key_at, format!("key {allowed} for {name}"), p.key));
        };
        if values[slot].is_some() || ints[slot].is_some() {
            return Err(err(p.key_at, format!("each key at most once for {name}"), p.key));
        }
        match keys[slot].1 {
            Kind::Float => {
                let v = p
                    .value
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(p.value_at, "a finite number", p.value))?;
                values[slot] = Some(v);
            }
            Kind::Int => {
                let v = p
                    .value
                    .parse::<u64>()
                    .map_err(|_| err(p.value_at, "a nonnegative integer", p.value))?;
                ints[slot] = Some(v);
            }
        }
    }
    for (i, (k, _, required)) in keys.iter().enumerate() {
        if *required && values[i].is_none() && ints[i].is_none() {
            return Err(err(text.len(), format!("key '{k}' for {name}"), ""));
        }
    }
    Ok(match name {
        "circle" => CrossSection::Circle {
            circumference: values[0].expect("required"),
        },
        "sphere" => CrossSection::Sphere {
            m: ints[0].expect("required") as usize,
            radius: values[1].unwrap_or(1.0),
        },
        _ => CrossSection::Football {
            q: ints[0].expect("required"),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepted_forms() {
        assert_eq!(
            parse_descriptor("sphere:m=2").unwrap(),
            CrossSection::Sphere { m: 2, radius: 1.0 }
        );
        assert_eq!(
            parse_descriptor("sphere:m=3,r=0.5").unwrap(),
            CrossSection::Sphere { m: 3, radius: 0.5 }
        );
        assert_eq!(
            parse_descriptor("sphere:r=0.5,m=3").unwrap(),
            CrossSection::Sphere { m: 3, radius: 0.5 }
        );
        match parse_descriptor("circle:L=3.14159").unwrap() {
            CrossSection::Circle { circumference } => {
                assert!((circumference - std::f64::consts::PI).abs() < 1e-5)
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            parse_descriptor("football:q=3").unwrap(),
            CrossSection::Football { q: 3 }
        );
    }

    #[test]
    fn unknown_key_is_located() {
        let e = parse_descriptor("sphere:m=2,q=3").unwrap_err();
        assert_eq!(e.position, 11);
        assert!(e.expected.contains("'m' or 'r'"), "{e}");
        assert_eq!(e.found, "'q'");
    }

    #[test]
    fn malformed_inputs() {
        let cases = [
            ("", 0),
            ("torus:a=1", 0),
            ("circle", 6),
            ("circle:", 7),
            ("circle:L", 8),
            ("circle:L=abc", 9),
            ("circle:L=inf", 9),
            ("circle:L=1,", 11),
            ("circle:L=1,L=2", 11),
            ("sphere:r=2", 10),
            ("sphere:m=-1", 9),
            ("football:q=2.5", 11),
        ];
        for (text, pos) in cases {
            let e = parse_descriptor(text).unwrap_err();
            assert_eq!(e.position, pos, "{text}: {e}");
            assert!(!e.to_string().contains('\n'));
        }
    }

    #[test]
    fn display_round_trips() {
        for x in [
            CrossSection::Circle { circumference: 1.25 },
            CrossSection::Sphere { m: 4, radius: 0.75 },
            CrossSection::Football { q: 5 },
        ] {
            assert_eq!(parse_descriptor(&x.to_string()).unwrap(), x);
        }
    }
}
