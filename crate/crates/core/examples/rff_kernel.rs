//! Random Fourier features against the exact Gaussian kernel as D grows.

use slicewatch::rff::{approx_kernel, gaussian_kernel, RffParams};

fn main() -> slicewatch::error::Result<()> {
    let pairs =
        [([0.1, 0.2, 0.3], [0.15, 0.25, 0.2]), ([0.0, 0.0, 0.0], [0.5, 0.5, 0.5]), ([0.9, 0.1, 0.4], [0.2, 0.8, 0.6])];
    println!("{:>6} {:>10} {:>10}", "D", "mean err", "max err");
    for d in [16, 64, 256, 1024, 4096] {
        let params = RffParams::sample(3, d, 1.0, 7)?;
        let mut errs = Vec::new();
        for (a, b) in &pairs {
            let approx = approx_kernel(&params.map(a)?, &params.map(b)?)?;
            errs.push((approx - gaussian_kernel(a, b, 1.0)).abs());
        }
        let mean = errs.iter().sum::<f64>() / errs.len() as f64;
        let max = errs.iter().cloned().fold(0.0, f64::max);
        println!("{d:>6} {mean:>10.5} {max:>10.5}");
    }
    Ok(())
}
