//! Brute-force reference: the truncated-Fock Liouvillian.
//!
//! The emitter–cavity master equation is represented exactly on the space of
//! at most `n_ph` photons (Hilbert dimension 2(n_ph+1)). The steady state is
//! the generator's null vector; moments extracted from it cross-validate the
//! recurrence method, and the dense solve's O(N⁶) cost is the benchmark
//! baseline the O(N) recurrence is measured against.
//!
//! Internally the generator is assembled from κ-normalized rates, which
//! keeps matrix entries O(1) regardless of the input units; every extracted
//! moment is dimensionless and unaffected.

mod bench;
mod eom;
mod sector;

pub use bench::{benchmark, fit_loglog_slope, BenchReport, BenchRow, BenchSizes};
pub use eom::{integrate_eom, seeded_derivative_norm, EomOptions, EomTrajectory};
pub use sector::{steady_state_reduced, ReducedSteadyState};

use ndarray::prelude::*;
use ndarray_linalg::{Factorize, Solve};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::params::SystemParams;

/// Serialize BLAS to one thread: timings must be reproducible and the heavy
/// lifting in this crate is elsewhere.
pub(crate) fn pin_blas_single_thread() {
    use std::sync::Once;
    static ONCE: Once = Once::new();
    ONCE.call_once(|| {
        std::env::set_var("OPENBLAS_NUM_THREADS", "1");
        std::env::set_var("OMP_NUM_THREADS", "1");
    });
}

/// State index: photon number ν and emitter level (0 = ground, 1 = excited).
#[inline]
pub(crate) fn state_index(nu: usize, t: usize) -> usize {
    2 * nu + t
}

/// Dense single-space operators for one (κ-normalized) parameter set.
pub(crate) struct Ops {
    pub dim: usize,
    pub n_ph: usize,
    pub h: Array2<C64>,
    pub a: Array2<C64>,
    pub a12: Array2<C64>,
    pub a21: Array2<C64>,
    pub a22: Array2<C64>,
    /// (rate/2, operator) pairs entering the Lindblad sum.
    pub norm: SystemParams,
}

impl Ops {
    pub fn new(params: &SystemParams, n_ph: usize) -> Result<Self> {
        params.validate()?;
        if n_ph < 2 {
            return Err(Error::CutoffTooSmall { n_ph, max_n: 0 });
        }
        let norm = params.normalize();
        let nf = n_ph + 1;
        let dim = 2 * nf;
        let mut h = Array2::<C64>::zeros((dim, dim));
        let mut a = Array2::<C64>::zeros((dim, dim));
        let mut a12 = Array2::<C64>::zeros((dim, dim));
        let mut a21 = Array2::<C64>::zeros((dim, dim));
        let mut a22 = Array2::<C64>::zeros((dim, dim));
        for nu in 0..nf {
            for t in 0..2 {
                if nu > 0 {
                    a[(state_index(nu - 1, t), state_index(nu, t))] =
                        C64::new((nu as f64).sqrt(), 0.0);
                }
                h[(state_index(nu, t), state_index(nu, t))] = C64::new(norm.delta * nu as f64, 0.0);
            }
            a12[(state_index(nu, 0), state_index(nu, 1))] = C64::new(1.0, 0.0);
            a21[(state_index(nu, 1), state_index(nu, 0))] = C64::new(1.0, 0.0);
            a22[(state_index(nu, 1), state_index(nu, 1))] = C64::new(1.0, 0.0);
            if nu > 0 {
                // g(a†A₁₂ + A₂₁a) couples |ν−1, e⟩ ↔ |ν, g⟩ with g√ν
                let c = C64::new(norm.g * (nu as f64).sqrt(), 0.0);
                h[(state_index(nu, 0), state_index(nu - 1, 1))] = c;
                h[(state_index(nu - 1, 1), state_index(nu, 0))] = c;
            }
        }
        Ok(Self { dim, n_ph, h, a, a12, a21, a22, norm })
    }

    fn lindblad_terms(&self) -> [(f64, &Array2<C64>); 4] {
        [
            (self.norm.gamma / 2.0, &self.a12),
            (self.norm.p / 2.0, &self.a21),
            (self.norm.kappa / 2.0, &self.a),
            (self.norm.gamma_d / 2.0, &self.a22),
        ]
    }

    /// Apply the generator to a density matrix in operator form.
    pub fn apply(&self, rho: &Array2<C64>) -> Array2<C64> {
        let mi = C64::new(0.0, -1.0);
        let mut out = (self.h.dot(rho) - rho.dot(&self.h)).mapv(|z| mi * z);
        for (r, x) in self.lindblad_terms() {
            if r == 0.0 {
                continue;
            }
            let xd = x.t().mapv(|z| z.conj());
            let xdx = xd.dot(x);
            let t1 = x.dot(rho).dot(&xd);
            let t2 = xdx.dot(rho);
            let t3 = rho.dot(&xdx);
            out.zip_mut_with(&(t1.mapv(|z| z * 2.0) - t2 - t3), |o, v| *o += C64::new(r, 0.0) * *v);
        }
        out
    }

    /// Crude generator magnitude for relative residuals.
    pub fn scale(&self) -> f64 {
        let n = self.norm;
        let nph = self.n_ph as f64;
        2.0 * (n.delta.abs() * nph + 2.0 * n.g * nph.sqrt())
            + n.kappa * 2.0 * nph
            + n.gamma
            + n.p
            + n.gamma_d
    }
}

/// Dense superoperator acting on column-stacked density matrices.
pub struct FockLiouvillian {
    pub n_ph: usize,
    /// Hilbert dimension 2(n_ph+1).
    pub dim: usize,
    /// dim² × dim² generator, κ-normalized units.
    pub generator: Array2<C64>,
    pub(crate) ops: Ops,
}

/// Assemble the dense generator. Deliberately naive: every superoperator
/// entry is materialized, which is exactly the O(N⁶)-solve baseline.
pub fn build_liouvillian(params: &SystemParams, n_ph: usize) -> Result<FockLiouvillian> {
    pin_blas_single_thread();
    let ops = Ops::new(params, n_ph)?;
    let d = ops.dim;
    let d2 = d * d;
    let mut l = Array2::<C64>::zeros((d2, d2));
    let triplets = |m: &Array2<C64>| -> Vec<(usize, usize, C64)> {
        let mut v = Vec::new();
        for ((i, j), &z) in m.indexed_iter() {
            if z != C64::new(0.0, 0.0) {
                v.push((i, j, z));
            }
        }
        v
    };
    let eye: Vec<(usize, usize, C64)> = (0..d).map(|i| (i, i, C64::new(1.0, 0.0))).collect();
    // vec(AρB) = (Bᵀ ⊗ A) vec(ρ) with column stacking: row index jB·d + iA
    let add_kron =
        |l: &mut Array2<C64>, f: C64, bt: &[(usize, usize, C64)], a: &[(usize, usize, C64)]| {
            for &(ib, jb, zb) in bt {
                for &(ia, ja, za) in a {
                    l[(ib * d + ia, jb * d + ja)] += f * zb * za;
                }
            }
        };
    let h_t = triplets(&ops.h); // symmetric, so Hᵀ shares the triplet list
    add_kron(&mut l, C64::new(0.0, -1.0), &eye, &h_t);
    add_kron(&mut l, C64::new(0.0, 1.0), &h_t, &eye);
    for (r, x) in ops.lindblad_terms() {
        if r == 0.0 {
            continue;
        }
        let x_t = triplets(x);
        let xdx = x.t().mapv(|z| z.conj()).dot(x);
        let xdx_t = triplets(&xdx);
        // all jump operators here are real, so conj(X) = X and (X†X)ᵀ = X†X
        add_kron(&mut l, C64::new(2.0 * r, 0.0), &x_t, &x_t);
        add_kron(&mut l, C64::new(-r, 0.0), &eye, &xdx_t);
        add_kron(&mut l, C64::new(-r, 0.0), &xdx_t, &eye);
    }
    Ok(FockLiouvillian { n_ph, dim: d, generator: l, ops })
}

impl FockLiouvillian {
    /// Largest column sum of the trace functional applied to the generator;
    /// zero for an exactly trace-preserving Lindblad structure.
    pub fn trace_preservation_residual(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for col in 0..d * d {
            let mut s = C64::new(0.0, 0.0);
            for i in 0..d {
                s += self.generator[(i * d + i, col)];
            }
            worst = worst.max(s.norm());
        }
        for row in 0..d * d {
            let mut s = 0.0;
            for col in 0..d * d {
                s += self.generator[(row, col)].norm();
            }
            scale = scale.max(s);
        }
        worst / scale.max(f64::MIN_POSITIVE)
    }
}

/// Null-space steady state of the dense generator.
///
/// One row of the singular system is replaced by the trace constraint and
/// the square system solved directly; the result is Hermitized, normalized,
/// and certified against the untouched generator.
pub fn steady_state(liou: &FockLiouvillian) -> Result<Array2<C64>> {
    pin_blas_single_thread();
    let d = liou.dim;
    let d2 = d * d;
    let mut m = liou.generator.clone();
    for col in 0..d2 {
        m[(0, col)] = C64::new(0.0, 0.0);
    }
    for i in 0..d {
        m[(0, i * d + i)] = C64::new(1.0, 0.0);
    }
    let mut b = Array1::<C64>::zeros(d2);
    b[0] = C64::new(1.0, 0.0);
    // LAPACK kernels want more stack than test threads provide
    let x = std::thread::Builder::new()
        .name("dense-solve".into())
        .stack_size(64 * 1024 * 1024)
        .spawn(move || -> std::result::Result<Array1<C64>, ndarray_linalg::error::LinalgError> {
            let f = m.factorize()?;
            f.solve_into(b)
        })
        .map_err(Error::Io)?
        .join()
        .map_err(|_| Error::LinAlg("dense solve thread panicked".into()))?
        .map_err(|e| Error::DegenerateSteadyState(format!("trace-constrained solve failed: {e}")))?;
    let mut rho = Array2::<C64>::zeros((d, d));
    for j in 0..d {
        for i in 0..d {
            rho[(i, j)] = x[j * d + i];
        }
    }
    // Hermitize and renormalize
    let rho_dag = rho.t().mapv(|z| z.conj());
    rho = (&rho + &rho_dag).mapv(|z| z * 0.5);
    let tr: C64 = (0..d).map(|i| rho[(i, i)]).sum();
    if tr.norm() < 1e-8 {
        return Err(Error::DegenerateSteadyState(format!("vanishing trace {tr}")));
    }
    rho.mapv_inplace(|z| z / tr);
    // residual against the full generator, relative to its magnitude
    let drho = liou.ops.apply(&rho);
    let num = drho.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let den = liou.ops.scale() * rho.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let residual = num / den.max(f64::MIN_POSITIVE);
    if residual > 1e-10 {
        return Err(Error::DegenerateSteadyState(format!(
            "steady-state residual {residual:e} above 1e-10"
        )));
    }
    Ok(rho)
}

/// The three moment families extracted from a state.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleMoments {
    pub i: Vec<f64>,
    pub b: Vec<f64>,
    pub r: Vec<C64>,
}

/// Falling factorial ν!/(ν−n)!.
pub(crate) fn falling(nu: usize, n: usize) -> f64 {
    let mut f = 1.0;
    for j in 0..n {
        f *= (nu - j) as f64;
    }
    f
}

/// Normally ordered moments I_n, B_n (n ≤ max_n) and R_n (n < max_n) from a
/// density matrix on the truncated space.
pub fn extract_moments(rho: &Array2<C64>, max_n: usize) -> Result<OracleMoments> {
    let d = rho.nrows();
    let nf = d / 2;
    let n_ph = nf - 1;
    if max_n + 2 > n_ph {
        return Err(Error::CutoffTooSmall { n_ph, max_n });
    }
    let mut i = vec![0.0; max_n + 1];
    let mut b = vec![0.0; max_n + 1];
    let mut r = vec![C64::new(0.0, 0.0); max_n];
    for n in 0..=max_n {
        for nu in n..nf {
            let w = falling(nu, n);
            let pg = rho[(state_index(nu, 0), state_index(nu, 0))].re;
            let pe = rho[(state_index(nu, 1), state_index(nu, 1))].re;
            i[n] += w * (pg + pe);
            b[n] += w * pe;
        }
    }
    // R_n = ⟨Â₂₁ â†ⁿâⁿ⁺¹⟩ = Σ_ν √ν (ν−1)!/(ν−n−1)! ρ[(ν,g),(ν−1,e)]
    for (n, rn) in r.iter_mut().enumerate() {
        for nu in (n + 1)..nf {
            let c = (nu as f64).sqrt() * falling(nu - 1, n);
            *rn += C64::new(c, 0.0) * rho[(state_index(nu, 0), state_index(nu - 1, 1))];
        }
    }
    Ok(OracleMoments { i, b, r })
}

/// General field moment ⟨â†ᵏâˡ⟩ = Tr[ρ â†ᵏâˡ]; vanishes for k ≠ l in the
/// steady state of incoherent pumping.
pub fn field_moment(rho: &Array2<C64>, k: usize, l: usize) -> C64 {
    let d = rho.nrows();
    let nf = d / 2;
    let mut out = C64::new(0.0, 0.0);
    // â†ᵏâˡ |ν⟩ = √(ν!/(ν−l)!) √((ν−l+k)!/(ν−l)!) |ν−l+k⟩
    for nu in l..nf {
        let target = nu - l + k;
        if target >= nf {
            continue;
        }
        let c = (falling(nu, l) * falling(target, k)).sqrt();
        for t in 0..2 {
            out += C64::new(c, 0.0) * rho[(state_index(nu, t), state_index(target, t))];
        }
    }
    out
}

/// Fock-truncation bias report: the difference between two cutoffs.
#[derive(Clone, Debug)]
pub struct BiasReport {
    pub n_ph: usize,
    pub n_ph_check: usize,
    /// Largest relative difference across all compared moments.
    pub max_rel: f64,
}

/// Steady-state moments with a truncation-bias estimate from re-running at
/// `n_ph + 10`. Errors if `bias_tol` is given and exceeded.
pub fn oracle_moments(
    params: &SystemParams,
    n_ph: usize,
    max_n: usize,
    precision: crate::scalar::Precision,
    bias_tol: Option<f64>,
) -> Result<(OracleMoments, BiasReport)> {
    let lo = steady_state_reduced(params, n_ph, precision)?;
    let hi = steady_state_reduced(params, n_ph + 10, precision)?;
    let m_lo = lo.moments(max_n)?;
    let m_hi = hi.moments(max_n)?;
    let mut max_rel = 0.0f64;
    for (a, b) in m_lo.i.iter().zip(&m_hi.i) {
        max_rel = max_rel.max((a - b).abs() / b.abs().max(f64::MIN_POSITIVE));
    }
    for (a, b) in m_lo.b.iter().zip(&m_hi.b) {
        max_rel = max_rel.max((a - b).abs() / b.abs().max(f64::MIN_POSITIVE));
    }
    for (a, b) in m_lo.r.iter().zip(&m_hi.r) {
        max_rel = max_rel.max((a - b).norm() / b.norm().max(f64::MIN_POSITIVE));
    }
    let report = BiasReport { n_ph, n_ph_check: n_ph + 10, max_rel };
    if let Some(tol) = bias_tol {
        if max_rel > tol {
            return Err(Error::TruncationBias { bias: max_rel, tol, n_ph });
        }
    }
    Ok((m_lo.clone(), report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SystemParams;
    use crate::scalar::Precision;
    use approx::assert_relative_eq;

    #[test]
    fn pure_decay_reaches_vacuum_ground() {
        let params = SystemParams::set_a(0.0);
        let liou = build_liouvillian(&params, 4).unwrap();
        let rho = steady_state(&liou).unwrap();
        assert_relative_eq!(rho[(0, 0)].re, 1.0, epsilon = 1e-10);
        for i in 1..liou.dim {
            assert!(rho[(i, i)].norm() < 1e-10);
        }
    }

    #[test]
    fn trace_preservation() {
        let liou = build_liouvillian(&SystemParams::set_a(1e11), 8).unwrap();
        assert!(liou.trace_preservation_residual() < 1e-12);
        let liou = build_liouvillian(
            &SystemParams::set_b(1e11).with_delta(4e10).with_dephasing(1e10),
            6,
        )
        .unwrap();
        assert!(liou.trace_preservation_residual() < 1e-12);
    }

    #[test]
    fn steady_state_physicality() {
        let liou = build_liouvillian(&SystemParams::set_b(1e11), 12).unwrap();
        let rho = steady_state(&liou).unwrap();
        let d = liou.dim;
        // Hermitian by construction; PSD diagonal and unit trace
        let tr: f64 = (0..d).map(|i| rho[(i, i)].re).sum();
        assert_relative_eq!(tr, 1.0, epsilon = 1e-12);
        for i in 0..d {
            assert!(rho[(i, i)].re > -1e-10);
        }
    }

    #[test]
    fn cutoff_guard() {
        let liou = build_liouvillian(&SystemParams::set_a(1e11), 6).unwrap();
        let rho = steady_state(&liou).unwrap();
        assert!(extract_moments(&rho, 5).is_err());
        assert!(extract_moments(&rho, 4).is_ok());
    }

    #[test]
    fn extract_on_manual_thermal_state() {
        // diagonal thermal-like state: I_n must equal n! n̄ⁿ
        let nf = 30;
        let d = 2 * nf;
        let nbar = 0.4f64;
        let mut rho = Array2::<C64>::zeros((d, d));
        let norm: f64 = (0..nf).map(|k| (nbar / (1.0 + nbar)).powi(k as i32)).sum();
        for nu in 0..nf {
            let p = (nbar / (1.0 + nbar)).powi(nu as i32) / norm;
            rho[(state_index(nu, 0), state_index(nu, 0))] = C64::new(p, 0.0);
        }
        let m = extract_moments(&rho, 4).unwrap();
        for n in 0..=4 {
            let fact: f64 = (1..=n).map(|k| k as f64).product();
            assert_relative_eq!(m.i[n], fact * nbar.powi(n as i32), max_relative = 1e-6);
            assert_eq!(m.b[n], 0.0);
        }
        assert_relative_eq!(field_moment(&rho, 2, 2).re, m.i[2], max_relative = 1e-12);
        assert!(field_moment(&rho, 2, 1).norm() < 1e-15);
    }

    #[test]
    fn population_completeness() {
        let liou = build_liouvillian(&SystemParams::set_a(1e11), 12).unwrap();
        let rho = steady_state(&liou).unwrap();
        let m = extract_moments(&rho, 2).unwrap();
        // B_0 + ⟨Â₁₁⟩ = 1
        let d = liou.dim;
        let a11_weight: f64 = (0..d / 2).map(|nu| rho[(state_index(nu, 0), state_index(nu, 0))].re).sum();
        assert_relative_eq!(m.b[0] + a11_weight, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn off_diagonal_moments_vanish() {
        let liou = build_liouvillian(&SystemParams::set_b(1e11), 14).unwrap();
        let rho = steady_state(&liou).unwrap();
        for (k, l) in [(1, 0), (0, 1), (2, 1), (3, 1)] {
            assert!(
                field_moment(&rho, k, l).norm() < 1e-10,
                "moment ({k},{l}) = {}",
                field_moment(&rho, k, l)
            );
        }
    }

    #[test]
    fn small_kappa_approaches_thermal_moments() {
        // κ → 0 limit: I_n → n!·I₁ⁿ (verified through the oracle only)
        let params =
            SystemParams { g: 1.0, kappa: 1e-6, gamma: 1.0, p: 0.4, delta: 0.0, gamma_d: 0.0 };
        let sol = steady_state_reduced(&params, 60, Precision::Big(192)).unwrap();
        let m = sol.moments(3).unwrap();
        for n in 2..=3 {
            let fact: f64 = (1..=n).map(|k| k as f64).product();
            let renorm = m.i[n] / (fact * m.i[1].powi(n as i32));
            assert!((renorm - 1.0).abs() < 0.05, "n={n}: renormalized {renorm}");
        }
    }

    #[test]
    fn bias_report_small_for_set_a() {
        let (m, bias) =
            oracle_moments(&SystemParams::set_a(1e11), 30, 4, Precision::Big(192), Some(1e-8))
                .unwrap();
        assert!(bias.max_rel <= 1e-8);
        assert!(m.i[1] > 0.1 && m.i[1] < 0.12);
    }
}
