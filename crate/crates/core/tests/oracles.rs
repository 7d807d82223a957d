use blockenc::linalg;
use blockenc::oracles::{self, OracleAccess};
use blockenc::random;

#[test]
fn jacobi_eig_matches_nalgebra() {
    let mut rng = random::rng(5);
    for n in [1, 3, 8, 20] {
        let h = random::hermitian_in(n, -1.0, 1.0, &mut rng);
        let (a, va) = oracles::eig_hermitian(&h).unwrap();
        let (b, _) = linalg::eigh(&h).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
        assert!(a.windows(2).all(|w| w[0] <= w[1]));
        let rebuilt = linalg::spectral_sum(&a, &va, linalg::c);
        assert!(linalg::max_abs_diff(&rebuilt, &h) < 1e-10);
    }
}

#[test]
fn expm_agrees_with_taylor() {
    let mut rng = random::rng(6);
    let h = random::hermitian_in(6, -1.0, 1.0, &mut rng);
    let u = oracles::expm_hermitian(&h, 0.7).unwrap();
    let t = oracles::expm_taylor(&h.map(|z| z * blockenc::C64::new(0.0, -0.7)));
    assert!(linalg::max_abs_diff(&u, &t) < 1e-10);
}

#[test]
fn solve_and_least_squares() {
    let mut rng = random::rng(7);
    let a = random::hermitian_in(7, 0.2, 1.0, &mut rng);
    let b = random::unit_vector(7, &mut rng);
    let x = oracles::solve(&a, &b).unwrap();
    assert!((&a * &x - &b).norm() < 1e-10);
    let f = random::gaussian_matrix(12, 4, &mut rng);
    let y = random::unit_vector(12, &mut rng);
    let l = oracles::solve_least_squares(&f, &y).unwrap();
    // normal equations
    let r = f.adjoint() * (&f * &l - &y);
    assert!(r.norm() < 1e-10);
}

#[test]
fn condition_number_of_diagonal() {
    let k = oracles::condition_number(&linalg::diag(&[0.8, -0.1, 0.4])).unwrap();
    assert!((k - 8.0).abs() < 1e-12);
    assert!(oracles::condition_number(&linalg::diag(&[1.0, 0.0])).is_err());
}

#[test]
fn access_logs_each_read() {
    let mut o = OracleAccess::quiet();
    let h = linalg::diag(&[0.1, 0.2]);
    o.eig(&h, "first").unwrap();
    o.expm(&h, 1.0, "second").unwrap();
    let calls: Vec<&str> = o.reads().iter().map(|r| r.call.as_str()).collect();
    assert_eq!(calls, ["eig_hermitian", "expm_hermitian"]);
    assert_eq!(o.reads()[0].purpose, "first");
}
