use elm_core::linalg::{self, RealMatrix, RealVector};
use std::time::Instant;

fn main() {
    // speed probe at experiment scale
    for &(m, n) in &[(100usize, 1000usize), (140, 1000), (70, 1000), (50, 50), (200, 2000)] {
        let a = RealMatrix::from_fn(m, n, |i, j| ((i * 31 + j * 17) % 97) as f64 / 97.0 - 0.5).unwrap();
        let t = Instant::now();
        let s = linalg::svd(&a).unwrap();
        let dt = t.elapsed();
        println!("svd {}x{}: {:?}  s0={:.3} s_last={:.3e}", m, n, dt, s.s.get(0), s.s.get(s.s.len()-1));
    }
    // correctness probe
    let a = RealMatrix::from_fn(6, 4, |i, j| ((i * 131 + j * 97) % 23) as f64 / 7.0 - 1.5).unwrap();
    let d = linalg::svd(&a).unwrap();
    let mut recon = vec![0.0; 24];
    for i in 0..6 { for j in 0..4 {
        let mut acc = 0.0;
        for k in 0..4 { acc += d.u.get(i,k) * d.s.get(k) * d.v.get(j,k); }
        recon[i*4+j] = acc - a.get(i,j);
    }}
    let err: f64 = recon.iter().map(|x| x*x).sum::<f64>().sqrt() / a.frobenius_norm();
    println!("recon rel err: {:.3e}", err);
    let sorted = (1..d.s.len()).all(|k| d.s.get(k-1) >= d.s.get(k));
    println!("sorted: {sorted}");

    let p = linalg::pseudoinverse(&a, 1e-12).unwrap();
    let apa = a.matmul(&p).unwrap().matmul(&a).unwrap();
    let mut diff = 0.0;
    for i in 0..6 { for j in 0..4 { let e = apa.get(i,j) - a.get(i,j); diff += e*e; } }
    println!("penrose1 rel: {:.3e}", diff.sqrt() / a.frobenius_norm());

    let h = RealMatrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
    let y = RealVector::from_slice(&[2.0]).unwrap();
    let beta = linalg::min_norm_lsq(&h, &y, 1e-12).unwrap();
    println!("min-norm lsq [[1,1]] y=2 -> {:?}", beta.as_slice());
}
