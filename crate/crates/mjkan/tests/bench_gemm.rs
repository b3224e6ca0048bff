// Temporary GEMM throughput probe; removed before delivery.

use std::time::Instant;

use mjkan::tensor::Matrix;

#[test]
#[ignore]
fn probe_gemm_throughput() {
    let m = 500;
    let k = 3200;
    let n = 64;
    let a = Matrix::<f64>::from_fn(m, k, |i, j| ((i * 7 + j) % 13) as f64 * 0.1);
    let b = Matrix::<f64>::from_fn(k, n, |i, j| ((i + j * 3) % 11) as f64 * 0.07);
    let flops = (2 * m * k * n) as f64;

    // warmup
    let _ = a.dot(&b).unwrap();
    let t0 = Instant::now();
    let reps = 20;
    for _ in 0..reps {
        std::hint::black_box(a.dot(&b).unwrap());
    }
    let dt = t0.elapsed().as_secs_f64() / reps as f64;
    println!("gemm_nn {m}x{k}x{n}: {:.1} ms, {:.1} GFLOP/s", dt * 1e3, flops / dt / 1e9);

    let c = Matrix::<f64>::from_fn(m, n, |i, j| (i + j) as f64 * 0.01);
    let t0 = Instant::now();
    for _ in 0..reps {
        std::hint::black_box(a.t_dot(&c).unwrap());
    }
    let dt = t0.elapsed().as_secs_f64() / reps as f64;
    println!("gemm_tn {k}x{m}x{n}: {:.1} ms, {:.1} GFLOP/s", dt * 1e3, flops / dt / 1e9);

    let g = Matrix::<f64>::from_fn(k, n, |i, j| (i * 3 + j) as f64 * 0.001);
    let t0 = Instant::now();
    for _ in 0..reps {
        std::hint::black_box(c.dot_t(&g).unwrap());
    }
    let dt = t0.elapsed().as_secs_f64() / reps as f64;
    println!("gemm_nt {m}x{n}x{k}: {:.1} ms, {:.1} GFLOP/s", dt * 1e3, flops / dt / 1e9);
}
