use toa_core::kernel::{weyl_map_series, GradeTag, KernelGrid, KernelQuadrature};
use toa_core::moyal::build_moyal_toa;
use toa_core::series::{rat, Cutoffs, PolynomialPotential};

fn compare(v: &PolynomialPotential, hbar: f64, nodes: &[f64], tol: f64) {
    let s = build_moyal_toa(v, &rat(1, 1), Cutoffs::new(2, 25)).unwrap();
    let k = weyl_map_series(&s).unwrap();
    let quad = KernelQuadrature::new(v, 1.0, hbar)
        .unwrap()
        .grids(2, nodes, nodes)
        .unwrap();
    for (n, qg) in quad.iter().enumerate() {
        let sg = KernelGrid::from_series(&k, GradeTag::Single(n), hbar, nodes, nodes);
        let scale = sg
            .values
            .iter()
            .flatten()
            .fold(0.0_f64, |m, x| m.max(x.abs()));
        let diff = sg.max_abs_diff(qg);
        println!("grade {n}: max |series − quadrature| = {diff:e} (scale {scale:e})");
        assert!(diff <= tol * scale.max(1e-300), "grade {n}: {diff:e}");
    }
}

#[test]
fn quartic_routes_agree_on_grid() {
    let nodes = [-0.8, -0.4, 0.1, 0.5, 0.9];
    compare(
        &PolynomialPotential::monomial(rat(1, 1), 4),
        1.0,
        &nodes,
        1e-8,
    );
}

#[test]
fn sextic_routes_agree_on_grid() {
    let nodes = [-0.8, -0.4, 0.1, 0.5, 0.9];
    compare(
        &PolynomialPotential::monomial(rat(1, 1), 6),
        1.0,
        &nodes,
        1e-8,
    );
}

#[test]
fn mixed_cubic_quartic_routes_agree_on_grid() {
    let nodes = [-0.7, -0.3, 0.0, 0.4, 0.8];
    let v = PolynomialPotential::new(vec![rat(0, 1), rat(0, 1), rat(0, 1), rat(1, 2), rat(1, 1)]);
    compare(&v, 1.0, &nodes, 1e-8);
}
