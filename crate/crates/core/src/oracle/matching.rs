use serde::{Deserialize, Serialize};

use crate::spectra::Spectrum;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterMatch {
    /// Analytic eigenvalue, `None` when the numeric cluster has no partner.
    pub analytic: Option<f64>,
    pub multiplicity: u64,
    pub numeric: Vec<f64>,
    /// Largest relative deviation inside the cluster (absolute for λ = 0).
    pub rel_err: f64,
    /// The final cluster was cut off by the requested eigenvalue count.
    pub truncated: bool,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub rel_tol: f64,
    pub clusters: Vec<ClusterMatch>,
    pub pass: bool,
    /// Index of the first failing cluster.
    pub first_failure: Option<usize>,
}

impl MatchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Splits an ascending list where the relative gap exceeds `gap`.
fn clusters(values: &[f64], gap: f64) -> Vec<&[f64]> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..values.len() {
        let (a, b) = (values[i - 1], values[i]);
        if b - a > gap * b.abs().max(a.abs()) {
            out.push(&values[start..i]);
            start = i;
        }
    }
    if start < values.len() {
        out.push(&values[start..]);
    }
    out
}

/// Matches numeric eigenvalue clusters to analytic entries in order.
///
/// Clusters are formed by gap detection at `0.5 · rel_tol`. A cluster passes when
/// it has exactly the analytic multiplicity and every member lies within
/// `rel_tol` of the analytic value; only the last cluster may be short.
pub fn spectrum_match(analytic: &Spectrum, numeric: &[f64], rel_tol: f64) -> MatchReport {
    let groups = clusters(numeric, 0.5 * rel_tol);
    let last = groups.len().saturating_sub(1);
    let mut out = Vec::with_capacity(groups.len());
    for (g, vals) in groups.iter().enumerate() {
        let entry = analytic.entries().get(g);
        let m = match entry {
            None => ClusterMatch {
                analytic: None,
                multiplicity: 0,
                numeric: vals.to_vec(),
                rel_err: f64::INFINITY,
                truncated: false,
                ok: false,
            },
            Some(e) => {
                let lam = e.eigenvalue.to_f64();
                let rel_err = vals
                    .iter()
                    .map(|v| if lam == 0.0 { v.abs() } else { (v - lam).abs() / lam })
                    .fold(0.0, f64::max);
                let count = vals.len() as u64;
                let truncated = g == last && count < e.multiplicity;
                ClusterMatch {
                    analytic: Some(lam),
                    multiplicity: e.multiplicity,
                    numeric: vals.to_vec(),
                    rel_err,
                    truncated,
                    ok: rel_err <= rel_tol && (count == e.multiplicity || truncated),
                }
            }
        };
        out.push(m);
    }
    let first_failure = out.iter().position(|c| !c.ok);
    MatchReport {
        rel_tol,
        pass: first_failure.is_none(),
        first_failure,
        clusters: out,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{circle_spectrum, sphere_spectrum};
    use std::f64::consts::TAU;

    #[test]
    fn exact_match() {
        let s = sphere_spectrum(2, 1.0, 20.0).unwrap();
        let numeric = [0.0, 2.0, 2.0, 2.0, 6.0, 6.0, 6.0, 6.0, 6.0, 12.0];
        let rep = spectrum_match(&s, &numeric, 0.01);
        assert!(rep.pass);
        assert_eq!(rep.clusters.len(), 4);
        assert!(rep.clusters.iter().all(|c| c.rel_err == 0.0));
        assert!(rep.clusters[3].truncated && !rep.clusters[2].truncated);
    }

    #[test]
    fn perturbed_cluster_is_located() {
        let s = circle_spectrum(TAU, 30.0).unwrap();
        let numeric = [1e-13, 1.0, 1.0, 4.0, 4.3, 9.0, 9.0];
        let rep = spectrum_match(&s, &numeric, 0.01);
        assert!(!rep.pass);
        assert_eq!(rep.first_failure, Some(2));
        let numeric = [1e-13, 1.0, 1.0, 4.0, 4.0, 4.0];
        let rep = spectrum_match(&s, &numeric, 0.01);
        assert_eq!(rep.first_failure, Some(2), "{rep:?}");
        let json = rep.to_json();
        let back: MatchReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, rep);
    }

    #[test]
    fn split_cluster_within_gap_threshold_merges() {
        let s = sphere_spectrum(2, 1.0, 20.0).unwrap();
        let numeric = [0.0, 1.999, 2.0, 2.001, 5.99, 6.0, 6.0, 6.0, 6.01];
        assert!(spectrum_match(&s, &numeric, 0.02).pass);
    }
}
