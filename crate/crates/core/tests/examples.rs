use toa_core::classical::{classical_toa_quadrature, ltoa_series, ArrivalStatus};
use toa_core::expectation::{free_toa_closed_form, free_toa_pv, GaussianState};
use toa_core::kernel::{tke_residual_grid, weyl_map_series, GradeTag, KernelGrid};
use toa_core::moyal::build_moyal_toa;
use toa_core::quartic::{quartic_classical, QuarticParams};
use toa_core::series::{rat, series_eval, Cutoffs, PhaseSeries, PolynomialPotential};

#[test]
fn free_series_evaluation() {
    let s = build_moyal_toa(&PolynomialPotential::free(), &rat(1, 1), Cutoffs::default()).unwrap();
    assert_eq!(series_eval(&s, -2.0, 1.0, 1.0).unwrap(), 2.0);
    assert_eq!(series_eval(&s, 0.0, 3.7, 1.0).unwrap(), 0.0);
    assert!(series_eval(&s, 1.0, 0.0, 1.0).is_err());
}

#[test]
fn truncated_quartic_series_matches_term_sum() {
    // At (N=1, K=3) only −μq/p and (4/5)μ²λq⁵/p³ survive.
    let (mu, lambda) = (rat(3, 2), rat(2, 7));
    let s = build_moyal_toa(
        &PolynomialPotential::monomial(lambda, 4),
        &mu,
        Cutoffs::new(1, 3),
    )
    .unwrap();
    assert_eq!(s.len(), 2);
    let (m, l) = (1.5_f64, 2.0 / 7.0);
    for (q, p, hbar) in [(0.7, -1.3, 1.0), (-1.1, 2.4, 0.2), (2.0, 5.0, 3.0)] {
        let oracle = -m * q / p + 0.8 * m * m * l * q.powi(5) / p.powi(3);
        let got = series_eval(&s, q, p, hbar).unwrap();
        assert!(
            ((got - oracle) / oracle).abs() < 1e-12,
            "({q},{p}): {got} vs {oracle}"
        );
    }
}

#[test]
fn quartic_quadrature_matches_closed_form() {
    let v = PolynomialPotential::monomial(rat(1, 1), 4);
    let quad = classical_toa_quadrature(&v, 1.0, -1.0, 3.0).unwrap();
    assert_eq!(quad.status, ArrivalStatus::Arrived);
    let params = QuarticParams::new(1.0, 1.0, 1.0).unwrap();
    let closed = quartic_classical(&params, -1.0, 3.0).unwrap();
    assert!(((quad.value - closed) / closed).abs() < 1e-8);
}

#[test]
fn bounded_particle_never_arrives() {
    // 2μ|λ|q⁴/p² = 8 > 1
    let v = PolynomialPotential::monomial(rat(-1, 1), 4);
    let r = classical_toa_quadrature(&v, 1.0, 2.0, -2.0).unwrap();
    assert_eq!(r.status, ArrivalStatus::NonClassicalRegion);
}

#[test]
fn linear_potential_series_matches_quadrature() {
    // V = bq: the local series in 1/p converges where |b(q − q′)| < p²/2μ.
    let v = PolynomialPotential::new(vec![rat(0, 1), rat(3, 4)]);
    let s = ltoa_series(&v, &rat(1, 1), 61).unwrap();
    for (q, p) in [(-1.0, 2.0), (0.5, -1.5), (1.2, -3.0), (-0.3, 0.9)] {
        let quad = classical_toa_quadrature(&v, 1.0, q, p).unwrap();
        let series = s.eval_grade(0, q, p).unwrap();
        assert!(
            ((series - quad.value) / quad.value).abs() < 1e-8,
            "({q},{p}): {series} vs {}",
            quad.value
        );
    }
}

#[test]
fn expectation_examples() {
    let state = GaussianState::new(-10.0, 5.0, 1.0, 1.0, 1.0).unwrap();
    let closed = free_toa_closed_form(&state).unwrap();
    let pv = free_toa_pv(&state).unwrap();
    assert!(((pv.value - closed.value) / closed.value).abs() < 1e-6);
    // Q → 1 for large k0σ: value → −μq0/p0 = 2
    assert!((closed.value / 2.0 - 1.0 - 0.01).abs() < 1e-3);

    let at_origin = GaussianState::new(0.0, 2.0, 1.0, 1.0, 1.0).unwrap();
    assert_eq!(free_toa_closed_form(&at_origin).unwrap().value, 0.0);
    assert!(free_toa_pv(&at_origin).unwrap().value.abs() < 1e-12);
}

fn uniform(n: usize, half_width: f64) -> Vec<f64> {
    (0..n)
        .map(|i| -half_width + 2.0 * half_width * i as f64 / (n - 1) as f64)
        .collect()
}

/// Kernel polynomials carry v = (q − q′)/ℏ to high powers, so the asymptotic
/// regime starts only on fine grids.
#[test]
fn kernel_grid_residual_is_second_order() {
    let v = PolynomialPotential::monomial(rat(1, 1), 4);
    let s: PhaseSeries = build_moyal_toa(&v, &rat(1, 1), Cutoffs::new(2, 25)).unwrap();
    let k = weyl_map_series(&s).unwrap();
    let hbar = 0.1;
    let mut residuals = Vec::new();
    for n in [65, 129, 257] {
        let nodes = uniform(n, 0.4);
        let grid = KernelGrid::from_series(&k, GradeTag::Sum(2), hbar, &nodes, &nodes);
        residuals.push(tke_residual_grid(&grid, &v, 1.0, hbar).unwrap());
    }
    for w in residuals.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(
            (order - 2.0).abs() < 0.15,
            "observed order {order} from {residuals:?}"
        );
    }
}
