//! Deterministic reference: L1 trajectory, Richardson check and central
//! finite-difference sensitivities for a small heterogeneous-order system.
//!
//!     cargo run --release --example l1_reference -- [trajectory.csv]

use fracwalk::model::FodeProblem;
use fracwalk::reference::{fd_sensitivities, l1_solve, FdTargets, L1Config};

fn main() {
    let p = FodeProblem::from_dense(
        &[vec![-2.0, 1.0, 0.0], vec![0.5, -1.5, 0.5], vec![0.0, 1.0, -1.0]],
        vec![0.6, 0.8, 0.95],
        vec![1.0, 0.0, 0.5],
        1.0,
        0,
    );
    let u: Vec<f64> = [512, 1024, 2048, 4096]
        .iter()
        .map(|&nt| l1_solve(&p, &L1Config::new(nt)).unwrap().final_state()[0])
        .collect();
    println!("u_1(T) for N_t = 512..4096: {u:.8?}");
    println!("successive error ratios: {:.3} {:.3}", (u[0] - u[1]) / (u[1] - u[2]), (u[1] - u[2]) / (u[2] - u[3]));

    let fd = fd_sensitivities(&p, &L1Config::default(), FdTargets::all()).unwrap();
    println!("{} L1 solves", fd.solves);
    for j in 0..3 {
        let row: Vec<f64> = (0..3).map(|k| fd.d_a(0, j, k).unwrap()).collect();
        println!("du_1/da_{}k = {row:.6?}", j + 1);
    }
    println!("du_1/dalpha = {:.6?}", (0..3).map(|j| fd.d_alpha(0, j).unwrap()).collect::<Vec<_>>());
    println!("du_1/du0    = {:.6?}", (0..3).map(|j| fd.d_u0(0, j).unwrap()).collect::<Vec<_>>());
    println!("du_1/dT     = {:.6}", fd.d_t(0).unwrap());

    if let Some(path) = std::env::args().nth(1) {
        let tr = l1_solve(&p, &L1Config::new(256)).unwrap();
        tr.write_csv(std::fs::File::create(&path).unwrap()).unwrap();
        println!("trajectory written to {path}");
    }
}
