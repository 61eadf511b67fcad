use std::f64::consts::TAU;

use cone_spectra::oracle::{build_circle, build_icosphere, lowest_eigenvalues, spectrum_match};
use cone_spectra::spectra::{circle_spectrum, football_spectrum, sphere_spectrum};

#[test]
fn circle_error_is_second_order() {
    let mut errs = Vec::new();
    for n in [64usize, 128, 256, 512, 1024, 2048] {
        let lap = build_circle(n, TAU).unwrap();
        let ev = lowest_eigenvalues(&lap, 3).unwrap();
        errs.push((ev[1] - 1.0).abs());
    }
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.6..=4.4).contains(&ratio), "ratio {ratio} from {errs:?}");
    }
}

#[test]
fn circle_matches_catalog() {
    for frac in [1.0, 0.7, 0.3] {
        let l = TAU * frac;
        let lap = build_circle(2048, l).unwrap();
        let ev = lowest_eigenvalues(&lap, 11).unwrap();
        let analytic = circle_spectrum(l, ev[10] * 1.1).unwrap();
        let rep = spectrum_match(&analytic, &ev, 0.01);
        assert!(rep.pass, "{}", rep.to_json());
        assert_eq!(rep.clusters.len(), 6);
        let rep = spectrum_match(&analytic, &ev, 1e-3);
        assert!(rep.pass, "{}", rep.to_json());
    }
}

#[test]
fn icosphere_clusters_and_multiplicities() {
    let lap = build_icosphere(4, 1).unwrap();
    let ev = lowest_eigenvalues(&lap, 16).unwrap();
    let analytic = sphere_spectrum(2, 1.0, 20.0).unwrap();
    let rep = spectrum_match(&analytic, &ev, 0.02);
    assert!(rep.pass, "{}", rep.to_json());
    let mults: Vec<usize> = rep.clusters.iter().map(|c| c.numeric.len()).collect();
    assert_eq!(mults, [1, 3, 5, 7]);

    let ev10 = lowest_eigenvalues(&lap, 10).unwrap();
    let rep = spectrum_match(&analytic, &ev10, 0.02);
    assert!(rep.pass);
    assert!(rep.clusters[3].truncated);

    let coarse = build_icosphere(0, 1).unwrap();
    let ev = lowest_eigenvalues(&coarse, 2).unwrap();
    assert!(ev[0].abs() < 1e-12 && ev[1] > 0.1);
}

#[test]
fn football_orbifolds() {
    let lap = build_icosphere(4, 2).unwrap();
    let ev = lowest_eigenvalues(&lap, 5).unwrap();
    let rep = spectrum_match(&football_spectrum(2, 20.0).unwrap(), &ev, 0.02);
    assert!(rep.pass, "{}", rep.to_json());
    assert_eq!(rep.clusters[1].numeric.len(), 1);
    assert_eq!(rep.clusters[2].numeric.len(), 3);

    for q in [3, 5] {
        let lap = build_icosphere(4, q).unwrap();
        let ev = lowest_eigenvalues(&lap, 3).unwrap();
        let rep = spectrum_match(&football_spectrum(q, 20.0).unwrap(), &ev, 0.02);
        assert!(rep.pass, "q={q}: {}", rep.to_json());
    }
}

#[test]
fn quotient_spectrum_is_sub_multiset() {
    let full = lowest_eigenvalues(&build_icosphere(3, 1).unwrap(), 36).unwrap();
    for q in [2, 3, 5] {
        let part = lowest_eigenvalues(&build_icosphere(3, q).unwrap(), 10).unwrap();
        let mut used = vec![false; full.len()];
        // ignore the top of the quotient list, whose partners may sit beyond the full list
        for &v in part.iter().filter(|&&v| v < full[full.len() - 1] * 0.9) {
            let j = (0..full.len())
                .filter(|&j| !used[j])
                .min_by(|&a, &b| (full[a] - v).abs().total_cmp(&(full[b] - v).abs()))
                .unwrap();
            assert!((full[j] - v).abs() <= 1e-8 * v.max(1.0), "q={q} value {v} nearest {}", full[j]);
            used[j] = true;
        }
    }
}

#[test]
fn zero_is_simple() {
    for lap in [
        build_circle(3, 1.0).unwrap(),
        build_circle(1000, TAU).unwrap(),
        build_icosphere(2, 1).unwrap(),
        build_icosphere(3, 5).unwrap(),
    ] {
        let ev = lowest_eigenvalues(&lap, 2).unwrap();
        assert!(ev[0].abs() < 1e-10 && ev[1] > 1e-3, "{:?}: {ev:?}", lap.shape());
    }
}
