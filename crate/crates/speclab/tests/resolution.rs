//! Second-order convergence of the cluster under grid refinement.

use speclab::{solve_torus, LanczosOptions, TorusSpec};

fn cluster(p: u32, n: usize) -> Vec<f64> {
    solve_torus(&TorusSpec::unit(p).with_grid(n), &LanczosOptions::default()).unwrap().cluster_values().to_vec()
}

fn change(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn refinement_is_second_order() {
    let p = 4;
    let c: Vec<Vec<f64>> = [24, 48, 96].iter().map(|&n| cluster(p, n)).collect();
    let (d1, d2) = (change(&c[0], &c[1]), change(&c[1], &c[2]));
    let rate = (d1 / d2).log2();
    assert!((rate - 2.0).abs() < 0.05, "{d1} {d2} {rate}");
}

#[test]
fn doubling_a_fine_grid_moves_the_cluster_by_less_than_1e4_p() {
    // the shift scales like (p/N)², so the bound needs N of a few hundred
    let p = 1;
    let d = change(&cluster(p, 240), &cluster(p, 480));
    assert!(d < 1e-4 * p as f64, "{d}");
}
