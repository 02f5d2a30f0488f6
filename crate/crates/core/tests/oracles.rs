use deltamass::gram::GramFactorization;
use deltamass::network::{delta_inner_energy, dipole, energy_kernel};
use deltamass::sampling::{frame_lower_bound, pairings_from_expansion};
use deltamass::{
    assemble_gram, interpolate, l2_row_test, load_network, network_moments, parse_edge_list, validate_pd,
    BridgeKernel, Error, KernelSpec, MinKernel, PdVerdict, Point, PointConfiguration, SampleSet, ScanPolicy,
    DEFAULT_EPS_PD,
};
use nalgebra::{DMatrix, SymmetricEigen};

fn cfg(xs: &[f64]) -> PointConfiguration {
    PointConfiguration::from_reals(xs, true).unwrap()
}

/// Smallest `ε` of `A v = ε K v` through `K^{-1/2} A K^{-1/2}`.
fn dense_generalized_min(a: &DMatrix<f64>, k: &DMatrix<f64>) -> f64 {
    let eig = SymmetricEigen::new(k.clone());
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    let w = &eig.eigenvectors * inv_sqrt * eig.eigenvectors.transpose();
    SymmetricEigen::new(&w * a * &w).eigenvalues.min()
}

#[test]
fn frame_bound_matches_dense_oracle() {
    for xs in [[0.2, 0.9, 1.5, 3.0], [1.0, 2.0, 3.0, 4.0], [0.01, 0.02, 0.5, 0.51]] {
        let c = cfg(&xs);
        let s = SampleSet::prefix(4, &c).unwrap();
        let k = assemble_gram(&MinKernel, &c, 4).unwrap().entries().clone();
        let want = dense_generalized_min(&(&k * &k), &k);
        let got = frame_lower_bound(&MinKernel, &c, &s, 4, DEFAULT_EPS_PD).unwrap();
        assert!((got - want).abs() <= 1e-10 * want.max(1.0), "{got} vs {want}");
    }
    // one sample on two points: the sampled Gram has rank one
    let c = cfg(&[1.0, 2.0]);
    let s = SampleSet::new(vec![1], &c).unwrap();
    let k = assemble_gram(&MinKernel, &c, 2).unwrap().entries().clone();
    let row = k.rows(1, 1).into_owned();
    let want = dense_generalized_min(&(row.transpose() * row), &k);
    assert!(want.abs() < 1e-12);
    assert_eq!(frame_lower_bound(&MinKernel, &c, &s, 2, DEFAULT_EPS_PD).unwrap(), 0.0);
}

#[test]
fn inverse_entries_match_dense_inverse() {
    let xs = [0.1, 0.25, 0.4, 0.6, 0.65, 0.9];
    for k in [&MinKernel as &dyn deltamass::Kernel, &BridgeKernel] {
        let c = cfg(&xs);
        let gram = assemble_gram(k, &c, xs.len()).unwrap();
        let fact = GramFactorization::factorize(&gram, DEFAULT_EPS_PD).unwrap();
        let inv = gram.entries().clone().try_inverse().unwrap();
        for i in 0..xs.len() {
            for j in 0..xs.len() {
                let e = fact.inverse_entry(i, j).unwrap();
                assert!((e - inv[(i, j)]).abs() <= 1e-9 * inv[(i, j)].abs().max(1.0));
            }
        }
        let r = fact.reconstruct();
        assert!((&r - gram.entries()).amax() < 1e-12);
    }
}

#[test]
fn l2_row_matches_dense_inverse_row() {
    let xs: Vec<f64> = (1..=25).map(|i| 0.3 * i as f64).collect();
    let c = cfg(&xs);
    let row = l2_row_test(&MinKernel, &c, Point::Real(xs[4]), &ScanPolicy::default()).unwrap();
    let inv = assemble_gram(&MinKernel, &c, 25).unwrap().entries().clone().try_inverse().unwrap();
    let want: f64 = inv.row(4).iter().map(|v| v * v).sum();
    assert!(row.verdict.is_certified());
    assert!((row.limit().unwrap() - want).abs() <= 1e-9 * want);
}

#[test]
fn validate_pd_cases() {
    let c = cfg(&[1.0, 2.0, 3.0]);
    assert_eq!(validate_pd(&assemble_gram(&MinKernel, &c, 3).unwrap(), 1e-12), PdVerdict::StrictlyPositive);
    let spec = KernelSpec::from_json(r#"{"kernel": "matrix", "matrix": [[1, 1], [1, 1]]}"#).unwrap();
    let (k, c) = spec.load().unwrap();
    let c = c.unwrap();
    assert!(matches!(validate_pd(&assemble_gram(k.as_ref(), &c, 2).unwrap(), 1e-12), PdVerdict::Degenerate { .. }));
    let spec = KernelSpec::from_json(r#"{"kernel": "matrix", "matrix": [[1, 2], [2, 1]]}"#).unwrap();
    let (k, c) = spec.load().unwrap();
    let g = assemble_gram(k.as_ref(), &c.unwrap(), 2).unwrap();
    assert!(matches!(validate_pd(&g, 1e-12), PdVerdict::Indefinite { .. }));
    assert!(matches!(
        GramFactorization::factorize(&g, 1e-12),
        Err(Error::NotPositiveDefinite { pivot: 2, .. })
    ));
}

#[test]
fn networks_from_text() {
    let star = "# star\nc a 1\nc b 1\nc d 1\nc o 1\n";
    let g = load_network(&parse_edge_list(star).unwrap(), "o").unwrap();
    let m = network_moments(&g, g.vertex("c").unwrap()).unwrap();
    assert_eq!((m.m1, m.m2, m.covariance, m.bound_holds), (4.0, 20.0, 4.0, true));
    let path = "0 1 1\n1 2 1\n2 3 1\n3 4 1\n";
    let g = load_network(&parse_edge_list(path).unwrap(), "0").unwrap();
    let m = network_moments(&g, g.vertex("2").unwrap()).unwrap();
    assert_eq!((m.m1, m.m2, m.covariance), (2.0, 6.0, 2.0));
    // dipole columns are the Green's function
    let k = energy_kernel(&g).unwrap();
    let v = dipole(&g, 3, 0).unwrap();
    for y in 1..5 {
        assert!((v.0[y] - k.green()[(y, 3)]).abs() < 1e-12);
    }
    assert_eq!(delta_inner_energy(&g, 1, 2), -1.0);
    let broken = "a b 1\nc d 1\n";
    assert!(matches!(
        load_network(&parse_edge_list(broken).unwrap(), "a"),
        Err(Error::Disconnected { .. })
    ));
    assert!(parse_edge_list("a b\n").is_err());
    assert!(load_network(&parse_edge_list("a b -1\n").unwrap(), "a").is_err());
}

#[test]
fn interpolation_recovers_expansion() {
    // f = 1·k_1 + 0.5·k_2 − 0.25·k_3
    let c = cfg(&[1.0, 2.0, 3.0]);
    let s = SampleSet::prefix(3, &c).unwrap();
    let coeffs = [1.0, 0.5, -0.25];
    let p = pairings_from_expansion(&coeffs, &s).unwrap();
    let r = interpolate(&MinKernel, &c, &s, &p, &ScanPolicy::default()).unwrap();
    let k = assemble_gram(&MinKernel, &c, 3).unwrap().entries().clone();
    let values = &k * nalgebra::DVector::from_column_slice(&coeffs);
    for (i, x) in [1.0, 2.0, 3.0].iter().enumerate() {
        assert!((r.expansion.eval(&MinKernel, Point::Real(*x)) - values[i]).abs() < 1e-12);
    }
    let q = nalgebra::DVector::from_column_slice(&coeffs);
    let norm = (q.transpose() * &k * &q)[(0, 0)];
    assert!((r.norm_sq - norm).abs() < 1e-12);
    let huge = [1e7, 0.0, 0.0];
    assert!(matches!(
        interpolate(&MinKernel, &c, &s, &huge, &ScanPolicy::default()),
        Err(Error::NormDivergent { .. })
    ));
    // the cap also bounds the point-mass scans, which fail first
    let tight = ScanPolicy { divergence_cap: 0.1, ..ScanPolicy::default() };
    assert!(matches!(
        interpolate(&MinKernel, &c, &s, &p, &tight),
        Err(Error::SubsetMembershipUnverified { .. })
    ));
}
