use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{Eigenvalue, Spectrum, SpectrumEntry};
use crate::error::{Error, Result};

/// JSON metadata stored next to a spectrum CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSidecar {
    pub lambda_max: f64,
    pub dim: usize,
    pub total_measure: f64,
}

impl From<&Spectrum> for SpectrumSidecar {
    fn from(s: &Spectrum) -> Self {
        SpectrumSidecar {
            lambda_max: s.lambda_max(),
            dim: s.dim(),
            total_measure: s.total_measure(),
        }
    }
}

/// Writes `eigenvalue,multiplicity` rows. Exact eigenvalues are written as `p/q`.
pub fn write_csv<W: Write>(spectrum: &Spectrum, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["eigenvalue", "multiplicity"])?;
    for e in spectrum.entries() {
        w.write_record([e.eigenvalue.to_string(), e.multiplicity.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sidecar<W: Write>(spectrum: &Spectrum, out: W) -> Result<()> {
    serde_json::to_writer(out, &SpectrumSidecar::from(spectrum))?;
    Ok(())
}

pub fn read_sidecar<R: Read>(input: R) -> Result<SpectrumSidecar> {
    Ok(serde_json::from_reader(input)?)
}

/// Reads a spectrum CSV plus its sidecar metadata and validates the result.
pub fn read_csv<R: Read>(input: R, sidecar: &SpectrumSidecar) -> Result<Spectrum> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["eigenvalue", "multiplicity"] {
        return Err(Error::Format(format!(
            "expected header eigenvalue,multiplicity, found {}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut entries = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != 2 {
            return Err(Error::Format(format!("row {} has {} fields", line + 2, rec.len())));
        }
        let eigenvalue: Eigenvalue = rec[0].parse()?;
        let multiplicity: u64 = rec[1].trim().parse().map_err(|e| {
            Error::Format(format!("row {}: bad multiplicity {:?}: {e}", line + 2, &rec[1]))
        })?;
        entries.push(SpectrumEntry::new(eigenvalue, multiplicity));
    }
    Spectrum::new(
        entries,
        sidecar.lambda_max,
        sidecar.dim,
        sidecar.total_measure,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{circle_spectrum, sphere_spectrum};
    use proptest::prelude::*;

    fn round_trip(s: &Spectrum) -> (String, Spectrum) {
        let mut csv_buf = Vec::new();
        write_csv(s, &mut csv_buf).unwrap();
        let mut json_buf = Vec::new();
        write_sidecar(s, &mut json_buf).unwrap();
        let meta = read_sidecar(json_buf.as_slice()).unwrap();
        let back = read_csv(csv_buf.as_slice(), &meta).unwrap();
        (String::from_utf8(csv_buf).unwrap(), back)
    }

    #[test]
    fn exact_spectrum_text() {
        let s = sphere_spectrum(2, 1.0, 13.0).unwrap();
        let (text, back) = round_trip(&s);
        assert_eq!(text, "eigenvalue,multiplicity\n0,1\n2,3\n6,5\n12,7\n");
        assert_eq!(back, s);
    }

    #[test]
    fn rejects_bad_header_and_rows() {
        let meta = SpectrumSidecar {
            lambda_max: 5.0,
            dim: 1,
            total_measure: 1.0,
        };
        assert!(read_csv("a,b\n0,1\n".as_bytes(), &meta).is_err());
        assert!(read_csv("eigenvalue,multiplicity\n0,1\n1,x\n".as_bytes(), &meta).is_err());
        // duplicate row violates strict ordering
        assert!(read_csv("eigenvalue,multiplicity\n0,1\n1,2\n1,2\n".as_bytes(), &meta).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(frac in 0.05f64..=1.0, lambda_max in 0.0f64..500.0) {
            let s = circle_spectrum(std::f64::consts::TAU * frac, lambda_max).unwrap();
            let (_, back) = round_trip(&s);
            prop_assert_eq!(back, s);
        }

        #[test]
        fn rational_round_trip(num in 1i64..10_000, den in 1i64..500) {
            let v = Eigenvalue::Exact(num_rational::Ratio::new(num, den));
            let s = Spectrum::new(
                vec![SpectrumEntry::new(Eigenvalue::integer(0), 1), SpectrumEntry::new(v, 3)],
                v.to_f64() + 1.0, 2, 1.5,
            ).unwrap();
            let (_, back) = round_trip(&s);
            prop_assert_eq!(back, s);
        }
    }
}
