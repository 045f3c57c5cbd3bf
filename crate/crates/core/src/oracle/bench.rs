//! Wall-clock scaling of the two steady-state routes.
//!
//! The recurrence route costs O(N) in the cutoff order; the dense
//! Liouvillian factorization costs O(n_ph⁶). Both are timed single-threaded
//! and summarized by fitted log-log slopes.

use std::hint::black_box;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::params::SystemParams;
use crate::recurrence::{cd_scan, coeffs, estimate_i1, ladder_scan, SolveOptions};

#[derive(Clone, Debug)]
pub struct BenchSizes {
    /// Recurrence orders N to scan.
    pub recurrence: Vec<usize>,
    /// Photon cutoffs for the dense solve.
    pub dense_nph: Vec<usize>,
}

impl Default for BenchSizes {
    fn default() -> Self {
        BenchSizes {
            recurrence: vec![10_000, 100_000, 1_000_000, 10_000_000],
            dense_nph: vec![10, 14, 19, 26, 35],
        }
    }
}

/// Hard cap: dense factorization beyond this cutoff is skipped with a notice.
pub const DENSE_NPH_CAP: usize = 40;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchRow {
    pub solver: String,
    pub size: usize,
    pub wall_ns: u128,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub recurrence_slope: Option<f64>,
    pub dense_slope: Option<f64>,
    pub notices: Vec<String>,
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("solver,size,wall_ns,fitted_slope\n");
        for r in &self.rows {
            let slope = match r.solver.as_str() {
                "recurrence" => self.recurrence_slope,
                _ => self.dense_slope,
            };
            let slope = slope.map(|s| format!("{s:.4}")).unwrap_or_default();
            out.push_str(&format!("{},{},{},{}\n", r.solver, r.size, r.wall_ns, slope));
        }
        out
    }
}

/// Least-squares slope of ln(y) against ln(x).
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        if x <= 0.0 || y <= 0.0 {
            return None;
        }
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-30 {
        return None;
    }
    Some((n * sxy - sx * sy) / denom)
}

/// Time `f`, repeating until enough wall time accumulates for a stable mean.
fn time_ns<F: FnMut()>(mut f: F) -> u128 {
    f(); // warmup
    let t0 = Instant::now();
    f();
    let first = t0.elapsed();
    if first.as_millis() >= 25 {
        return first.as_nanos();
    }
    let reps = (25_000_000 / first.as_nanos().max(1)).clamp(1, 10_000) as u32;
    let t0 = Instant::now();
    for _ in 0..reps {
        f();
    }
    t0.elapsed().as_nanos() / reps as u128
}

/// Time both solver families at the requested sizes and fit their slopes.
///
/// Single solves run on one thread for reproducible numbers; infeasible
/// dense sizes are skipped with a notice.
pub fn benchmark(params: &SystemParams, sizes: &BenchSizes) -> Result<BenchReport> {
    super::pin_blas_single_thread();
    params.validate()?;
    let c = coeffs(params)?;
    let i1 = estimate_i1(&c, &SolveOptions::default())?.value;
    let mut rows = Vec::new();
    let mut notices = Vec::new();

    let mut rec_points = Vec::new();
    for &n in &sizes.recurrence {
        if n < 2 {
            notices.push(format!("recurrence size {n} too small, skipped"));
            continue;
        }
        let ns = time_ns(|| {
            black_box(cd_scan(&c, black_box(n)));
            black_box(ladder_scan(&c, black_box(i1), black_box(n)));
        });
        rows.push(BenchRow { solver: "recurrence".into(), size: n, wall_ns: ns });
        rec_points.push((n as f64, ns as f64));
    }

    let mut dense_points = Vec::new();
    for &n_ph in &sizes.dense_nph {
        if n_ph > DENSE_NPH_CAP {
            notices.push(format!("dense n_ph {n_ph} beyond cap {DENSE_NPH_CAP}, skipped"));
            continue;
        }
        if n_ph < 2 {
            notices.push(format!("dense n_ph {n_ph} too small, skipped"));
            continue;
        }
        let t0 = Instant::now();
        let liou = super::build_liouvillian(params, n_ph)?;
        let rho = super::steady_state(&liou)?;
        let ns = t0.elapsed().as_nanos();
        black_box(rho[(0, 0)]);
        rows.push(BenchRow { solver: "dense".into(), size: n_ph, wall_ns: ns });
        dense_points.push((n_ph as f64, ns as f64));
    }

    Ok(BenchReport {
        rows,
        recurrence_slope: fit_loglog_slope(&rec_points),
        dense_slope: fit_loglog_slope(&dense_points),
        notices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loglog_fit_recovers_power() {
        let pts: Vec<(f64, f64)> = (1..=6).map(|k| {
            let x = 10f64.powi(k);
            (x, 3.0 * x.powf(2.5))
        })
        .collect();
        let s = fit_loglog_slope(&pts).unwrap();
        assert!((s - 2.5).abs() < 1e-9);
        assert!(fit_loglog_slope(&pts[..1]).is_none());
        assert!(fit_loglog_slope(&[(1.0, 0.0), (2.0, 1.0)]).is_none());
    }

    #[test]
    fn small_benchmark_runs() {
        let report = benchmark(
            &SystemParams::set_a(1e11),
            &BenchSizes { recurrence: vec![1_000, 10_000], dense_nph: vec![4, 6] },
        )
        .unwrap();
        assert_eq!(report.rows.len(), 4);
        assert!(report.recurrence_slope.is_some());
        assert!(report.dense_slope.is_some());
        let csv = report.to_csv();
        assert!(csv.starts_with("solver,size,wall_ns,fitted_slope\n"));
    }

    #[test]
    fn infeasible_sizes_skipped_with_notice() {
        let report = benchmark(
            &SystemParams::set_a(1e11),
            &BenchSizes { recurrence: vec![1_000], dense_nph: vec![100] },
        )
        .unwrap();
        assert_eq!(report.rows.len(), 1);
        assert!(!report.notices.is_empty());
    }
}
