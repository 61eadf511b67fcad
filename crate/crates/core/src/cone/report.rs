use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{coverage_for_growth, h_d, unit_ball_volume, ConeGeometry, TIE_TOLERANCE};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountingRow {
    pub d: u64,
    pub h_d: u64,
    /// Dimension of the growth-`d` layer, `h_d - h_{d-1}`.
    pub k_d: u64,
    /// Partial sum `Σ_{j≤d} h_j`.
    pub s_d: u64,
    /// `S_d / d^n`.
    pub ratio_sum: f64,
    /// `h_d / d^{n-1}`.
    pub ratio_hd: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub n: usize,
    pub avr: f64,
    pub d_max: u64,
    /// `lim S_d / d^n = 2α / (n! ω_n)`.
    pub target_sum: f64,
    /// `h_d / d^{n-1}` tends to `2α / ((n-1)! ω_n)` whenever it converges.
    pub target_hd: f64,
    pub exact: bool,
    /// Relative tolerance used for `α_i ≤ d` ties; absent for exact spectra.
    pub tie_tolerance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CountingReport {
    pub rows: Vec<CountingRow>,
    pub metadata: ReportMetadata,
}

impl CountingReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(["d", "h_d", "k_d", "S_d", "ratio_sum", "ratio_hd"])?;
        for r in &self.rows {
            w.write_record([
                r.d.to_string(),
                r.h_d.to_string(),
                r.k_d.to_string(),
                r.s_d.to_string(),
                format!("{:?}", r.ratio_sum),
                format!("{:?}", r.ratio_hd),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_metadata<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, &self.metadata)?;
        Ok(())
    }

    pub fn ratio_sum_series(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.ratio_sum).collect()
    }

    pub fn ratio_hd_series(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.ratio_hd).collect()
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Rows `d = 1..=d_max` of `h_d`, layer dimensions and normalised ratios.
pub fn counting_report(cone: &ConeGeometry, d_max: u64) -> Result<CountingReport> {
    if d_max == 0 {
        return Err(Error::domain("d_max must be >= 1"));
    }
    let n = cone.n();
    let exact = cone.cross_section().is_exact();
    let needed = if exact {
        let d = d_max as f64;
        d * (d + n as f64 - 2.0)
    } else {
        coverage_for_growth(d_max as f64, n)
    };
    if needed > cone.cross_section().lambda_max() {
        return Err(Error::Coverage {
            needed,
            available: cone.cross_section().lambda_max(),
        });
    }

    let hs = (1..=d_max)
        .into_par_iter()
        .map(|d| h_d(cone, d as f64))
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(hs.len());
    let mut prev = 0u64;
    let mut sum = 0u64;
    for (i, &h) in hs.iter().enumerate() {
        let d = i as u64 + 1;
        sum += h;
        let df = d as f64;
        rows.push(CountingRow {
            d,
            h_d: h,
            k_d: h - prev,
            s_d: sum,
            ratio_sum: sum as f64 / df.powi(n as i32),
            ratio_hd: h as f64 / df.powi(n as i32 - 1),
        });
        prev = h;
    }

    let omega = unit_ball_volume(n);
    let metadata = ReportMetadata {
        n,
        avr: cone.avr(),
        d_max,
        target_sum: 2.0 * cone.avr() / (factorial(n) * omega),
        target_hd: 2.0 * cone.avr() / (factorial(n - 1) * omega),
        exact,
        tie_tolerance: (!exact).then_some(TIE_TOLERANCE),
    };
    Ok(CountingReport { rows, metadata })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{circle_spectrum, sphere_spectrum};
    use std::f64::consts::TAU;

    #[test]
    fn euclidean_plane_rows() {
        let c = ConeGeometry::new(circle_spectrum(TAU, 1e4).unwrap()).unwrap();
        let rep = counting_report(&c, 50).unwrap();
        for r in &rep.rows {
            assert_eq!(r.h_d, 2 * r.d);
            assert_eq!(r.k_d, 2);
            assert_eq!(r.s_d, r.d * (r.d + 1));
        }
        assert_eq!(rep.metadata.target_sum, 1.0);
        assert_eq!(rep.metadata.target_hd, 2.0);
        assert_eq!(rep.metadata.tie_tolerance, None);
    }

    #[test]
    fn euclidean_space_rows() {
        let c = ConeGeometry::new(sphere_spectrum(2, 1.0, 1e4).unwrap()).unwrap();
        let rep = counting_report(&c, 40).unwrap();
        for r in &rep.rows {
            // (d+1)^2 - 1 harmonic polynomials of degree 1..=d
            assert_eq!(r.h_d, (r.d + 1) * (r.d + 1) - 1);
            assert_eq!(r.k_d, 2 * r.d + 1);
        }
        assert!((rep.metadata.target_sum - 1.0 / 3.0).abs() < 1e-15);
        assert!((rep.metadata.target_hd - 1.0).abs() < 1e-15);
    }

    #[test]
    fn coverage_is_checked_up_front() {
        let c = ConeGeometry::new(circle_spectrum(TAU * 0.7, 5e3).unwrap()).unwrap();
        assert!(matches!(counting_report(&c, 100), Err(Error::Coverage { .. })));
        let c = ConeGeometry::new(circle_spectrum(TAU * 0.7, 1.01e4).unwrap()).unwrap();
        let rep = counting_report(&c, 100).unwrap();
        assert_eq!(rep.metadata.tie_tolerance, Some(TIE_TOLERANCE));
    }

    #[test]
    fn csv_header_and_shape() {
        let c = ConeGeometry::new(circle_spectrum(TAU, 100.0).unwrap()).unwrap();
        let rep = counting_report(&c, 3).unwrap();
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "d,h_d,k_d,S_d,ratio_sum,ratio_hd\n1,2,2,2,2.0,2.0\n2,4,2,6,1.5,2.0\n3,6,2,12,1.3333333333333333,2.0\n"
        );
    }
}
