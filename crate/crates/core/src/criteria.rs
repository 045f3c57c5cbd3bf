//! Moment-based nonclassicality and entanglement conditions.
//!
//! Three families of principal-minor conditions are evaluated:
//! field-only `I_{2n}/I_n² < 1`, joint emitter–field `B_{2n}/B_n² < 1`, and
//! the coherence condition in difference form `B_{2n+1} − |R_n|² < 0`
//! (at n = 0 a sufficient witness of emitter–field entanglement).
//!
//! Each condition is sufficient only: a negative flag never asserts
//! classicality, so results carry a tri-state.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::{back_substitute, FullMoments};
use crate::params::SystemParams;
use crate::recurrence::{coeffs, estimate_i1, solve_ladder, SolveOptions};
use crate::scalar::Precision;

/// Tri-state outcome of a sufficient criterion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flag {
    /// The witness fired.
    Nonclassical,
    /// The witness did not fire; higher orders may still.
    NotDetected,
    /// The defining moments vanish (vacuum).
    Undefined,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriterionId {
    /// I_{2n}/I_n²
    Field,
    /// B_{2n}/B_n²
    Joint,
    /// B_{2n+1} − |R_n|²
    Entanglement,
}

impl std::fmt::Display for CriterionId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CriterionId::Field => write!(f, "field"),
            CriterionId::Joint => write!(f, "joint"),
            CriterionId::Entanglement => write!(f, "entanglement"),
        }
    }
}

/// One evaluated condition.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Criterion {
    pub id: CriterionId,
    pub order: usize,
    /// Ratio (field/joint) or difference (entanglement); `None` if undefined.
    pub value: Option<f64>,
    pub flag: Flag,
}

/// 2×2 principal minor of the matrix of moments: `d1·d2 − |off|²`.
///
/// The three criterion families are sign conditions on such minors over
/// (I, B, R); this evaluator is exposed for ad-hoc combinations.
pub fn principal_minor_2x2(d1: f64, d2: f64, off: num_complex::Complex64) -> f64 {
    d1 * d2 - off.norm_sqr()
}

/// Field-only condition I_{2n}/I_n² < 1; n = 1 is g⁽²⁾(0) < 1
/// (sub-Poissonian photon statistics).
pub fn field_criterion(full: &FullMoments, n: usize) -> Result<Criterion> {
    if n == 0 {
        return Err(Error::Domain("criterion order must be >= 1"));
    }
    let have = full.ladder.i_moments.len();
    let i2n = full.i(2 * n).ok_or(Error::LadderTooShort { needed: 2 * n + 1, have })?;
    let i_n = full.i(n).expect("2n in range implies n in range");
    if i_n <= 0.0 {
        return Ok(Criterion { id: CriterionId::Field, order: n, value: None, flag: Flag::Undefined });
    }
    let value = i2n / (i_n * i_n);
    let flag = if value < 1.0 { Flag::Nonclassical } else { Flag::NotDetected };
    Ok(Criterion { id: CriterionId::Field, order: n, value: Some(value), flag })
}

/// Joint emitter–field condition B_{2n}/B_n² < 1.
pub fn joint_criterion(full: &FullMoments, n: usize) -> Result<Criterion> {
    if n == 0 {
        return Err(Error::Domain("criterion order must be >= 1"));
    }
    let have = full.b_moments.len();
    let b2n = full.b(2 * n).ok_or(Error::LadderTooShort { needed: 2 * n + 1, have })?;
    let b_n = full.b(n).expect("2n in range implies n in range");
    if b_n <= 0.0 {
        return Ok(Criterion { id: CriterionId::Joint, order: n, value: None, flag: Flag::Undefined });
    }
    let value = b2n / (b_n * b_n);
    let flag = if value < 1.0 { Flag::Nonclassical } else { Flag::NotDetected };
    Ok(Criterion { id: CriterionId::Joint, order: n, value: Some(value), flag })
}

/// Coherence condition in difference form, B_{2n+1} − |R_n|² < 0.
///
/// The ratio form B_{2n+1}/|R_n|² < 1 is singular at R_n = 0; the difference
/// has the same sign and stays defined. At n = 0 a negative value is a
/// sufficient witness of emitter–field entanglement; n ≥ 1 witnesses
/// nonclassicality only.
pub fn entanglement_criterion(full: &FullMoments, n: usize) -> Result<Criterion> {
    let have = full.b_moments.len();
    let b = full.b(2 * n + 1).ok_or(Error::LadderTooShort { needed: 2 * n + 2, have })?;
    let r = full
        .r(n)
        .ok_or(Error::LadderTooShort { needed: n + 1, have: full.r_moments.len() })?;
    let value = b - r.norm_sqr();
    let flag = if value < 0.0 { Flag::Nonclassical } else { Flag::NotDetected };
    Ok(Criterion { id: CriterionId::Entanglement, order: n, value: Some(value), flag })
}

/// One sweep point: every requested criterion at one pump strength.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepRow {
    pub p: f64,
    pub entries: Vec<Criterion>,
    /// Per-point failure; the sweep continues past failing points.
    pub error: Option<String>,
}

/// Sweep output with axis metadata.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CriteriaReport {
    pub template: SystemParams,
    pub orders: Vec<usize>,
    pub rows: Vec<SweepRow>,
}

/// Evaluate all three criterion families at `orders` for every pump value.
///
/// Rows are computed independently (in parallel) and returned in grid order.
/// High orders need moments up to 2n+2, where forward f64 iteration has long
/// lost the minimal solution, so sweep ladders run at 256-bit precision.
pub fn sweep(template: &SystemParams, p_grid: &[f64], orders: &[usize]) -> Result<CriteriaReport> {
    template.validate()?;
    if orders.is_empty() {
        return Err(Error::Domain("orders list must not be empty"));
    }
    if p_grid.is_empty() {
        return Err(Error::Domain("pump grid must not be empty"));
    }
    let max_order = *orders.iter().max().expect("nonempty");
    let ladder_len = 2 * max_order + 3;
    let rows: Vec<SweepRow> = p_grid
        .par_iter()
        .map(|&p| sweep_point(template, p, orders, ladder_len))
        .collect();
    Ok(CriteriaReport { template: *template, orders: orders.to_vec(), rows })
}

fn sweep_point(template: &SystemParams, p: f64, orders: &[usize], ladder_len: usize) -> SweepRow {
    let run = || -> Result<Vec<Criterion>> {
        let params = template.with_pump(p).validated()?;
        let c = coeffs(&params)?;
        let opts = SolveOptions::default().with_precision(Precision::Big(256));
        let est = estimate_i1(&c, &opts)?;
        let ladder = solve_ladder(&c, &est, ladder_len);
        let full = back_substitute(&ladder, &c)?;
        // a ladder truncated by forward instability below a requested order
        // leaves that criterion undefined rather than failing the point
        let undef = |id: CriterionId, order: usize| Criterion { id, order, value: None, flag: Flag::Undefined };
        let or_undef = |r: crate::error::Result<Criterion>, id: CriterionId, order: usize| match r {
            Ok(c) => Ok(c),
            Err(Error::LadderTooShort { .. }) => Ok(undef(id, order)),
            Err(e) => Err(e),
        };
        let mut entries = Vec::with_capacity(3 * orders.len());
        for &n in orders {
            if n >= 1 {
                entries.push(or_undef(field_criterion(&full, n), CriterionId::Field, n)?);
                entries.push(or_undef(joint_criterion(&full, n), CriterionId::Joint, n)?);
            }
            // same order for the coherence family; n = 0 is the
            // entanglement witness proper
            entries.push(or_undef(entanglement_criterion(&full, n), CriterionId::Entanglement, n)?);
        }
        Ok(entries)
    };
    match run() {
        Ok(entries) => SweepRow { p, entries, error: None },
        Err(e) => SweepRow { p, entries: Vec::new(), error: Some(e.to_string()) },
    }
}

impl CriteriaReport {
    /// Columnar CSV: p, order, criterion, value, flag.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("p,order,criterion,value,flag\n");
        for row in &self.rows {
            if let Some(err) = &row.error {
                out.push_str(&format!("{:e},,,,error: {}\n", row.p, err.replace(',', ";")));
                continue;
            }
            for e in &row.entries {
                let v = e.value.map(|v| format!("{v:e}")).unwrap_or_default();
                let flag = match e.flag {
                    Flag::Nonclassical => "nonclassical",
                    Flag::NotDetected => "not-detected",
                    Flag::Undefined => "undefined",
                };
                out.push_str(&format!("{:e},{},{},{},{}\n", row.p, e.order, e.id, v, flag));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::{coherent_reference, thermal_reference};
    use crate::recurrence::{I1Bracket, MomentLadder};
    use approx::assert_relative_eq;

    fn full_from(values: Vec<f64>, params: SystemParams) -> FullMoments {
        let c = coeffs(&params).unwrap();
        let ladder = MomentLadder {
            cutoff_n: values.len() - 1,
            i_moments: values,
            i1_bracket: I1Bracket { lower: 0.0, upper: 0.0 },
            epsilon: 0.1,
            first_negative: None,
            precision: Precision::F64,
        };
        back_substitute(&ladder, &c).unwrap()
    }

    fn solved(params: SystemParams, max_order: usize) -> FullMoments {
        let c = coeffs(&params).unwrap();
        let est =
            estimate_i1(&c, &SolveOptions::default().with_precision(Precision::Big(256))).unwrap();
        let ladder = solve_ladder(&c, &est, 2 * max_order + 3);
        back_substitute(&ladder, &c).unwrap()
    }

    #[test]
    fn thermal_reference_never_nonclassical() {
        // I_{2n}/I_n² = (2n)!/(n!)² >= 2 for a thermal ladder
        let full = full_from(thermal_reference(0.5, 22), SystemParams::set_a(1e11));
        for n in [1usize, 3, 5] {
            let c = field_criterion(&full, n).unwrap();
            assert_eq!(c.flag, Flag::NotDetected);
            let binom: f64 = (1..=2 * n).map(|k| k as f64).product::<f64>()
                / (1..=n).map(|k| k as f64).product::<f64>().powi(2);
            assert_relative_eq!(c.value.unwrap(), binom, max_relative = 1e-9);
            assert!(c.value.unwrap() >= 2.0);
        }
    }

    #[test]
    fn coherent_reference_boundary() {
        let full = full_from(coherent_reference(0.4, 12), SystemParams::set_a(1e11));
        let c = field_criterion(&full, 2).unwrap();
        assert_relative_eq!(c.value.unwrap(), 1.0, max_relative = 1e-9);
    }

    #[test]
    fn field_matches_g2_at_order_one() {
        let full = solved(SystemParams::set_a(1e10), 2);
        let c = field_criterion(&full, 1).unwrap();
        let g2 = crate::moments::g_n_zero(&full.ladder, 2).unwrap();
        assert_relative_eq!(c.value.unwrap(), g2, max_relative = 1e-12);
        let q = crate::moments::mandel_q(&full.ladder).unwrap();
        assert_eq!(c.flag == Flag::Nonclassical, q < 0.0);
    }

    #[test]
    fn vacuum_undefined() {
        let full = full_from(vec![1.0, 0.0, 0.0, 0.0, 0.0], SystemParams::set_a(1e11));
        assert_eq!(field_criterion(&full, 1).unwrap().flag, Flag::Undefined);
        assert_eq!(joint_criterion(&full, 1).unwrap().flag, Flag::Undefined);
    }

    #[test]
    fn short_ladder_names_required_length() {
        let full = full_from(coherent_reference(0.4, 4), SystemParams::set_a(1e11));
        match field_criterion(&full, 3) {
            Err(Error::LadderTooShort { needed, .. }) => assert_eq!(needed, 7),
            other => panic!("expected LadderTooShort, got {other:?}"),
        }
    }

    #[test]
    fn entanglement_difference_defined_at_zero_coherence() {
        // true vacuum (p = 0): R_0 = 0 and the difference form stays defined
        let full = full_from(vec![1.0, 0.0, 0.0, 0.0, 0.0], SystemParams::set_a(0.0));
        assert_eq!(full.r(0).unwrap(), num_complex::Complex64::new(0.0, 0.0));
        let c = entanglement_criterion(&full, 0).unwrap();
        assert_eq!(c.value.unwrap(), 0.0);
        assert_eq!(c.flag, Flag::NotDetected);
    }

    #[test]
    fn set_a_low_pump_entangled() {
        // negative B1 - |R0|^2 occurs for set A at very low pumping
        let full = solved(SystemParams::set_a(1e9), 1);
        let c = entanglement_criterion(&full, 0).unwrap();
        assert!(c.value.unwrap() < 0.0, "value = {:?}", c.value);
    }

    #[test]
    fn sweep_singleton_matches_direct_calls() {
        let template = SystemParams::set_a(0.0);
        let report = sweep(&template, &[1e10], &[1, 3]).unwrap();
        assert_eq!(report.rows.len(), 1);
        let row = &report.rows[0];
        assert!(row.error.is_none());
        let full = solved(SystemParams::set_a(1e10), 3);
        let direct = field_criterion(&full, 3).unwrap();
        let swept = row
            .entries
            .iter()
            .find(|e| e.id == CriterionId::Field && e.order == 3)
            .unwrap();
        assert_relative_eq!(swept.value.unwrap(), direct.value.unwrap(), max_relative = 1e-10);
    }

    #[test]
    fn sweep_rejects_empty_inputs() {
        let template = SystemParams::set_a(0.0);
        assert!(sweep(&template, &[1e10], &[]).is_err());
        assert!(sweep(&template, &[], &[1]).is_err());
    }

    #[test]
    fn sweep_survives_bad_point() {
        let template = SystemParams::set_a(0.0);
        let report = sweep(&template, &[f64::NAN, 1e10], &[1]).unwrap();
        assert!(report.rows[0].error.is_some());
        assert!(report.rows[1].error.is_none());
        let csv = report.to_csv();
        assert!(csv.starts_with("p,order,criterion,value,flag\n"));
        assert!(csv.contains("error:"));
    }

    #[test]
    fn minor_evaluator() {
        let m = principal_minor_2x2(2.0, 3.0, num_complex::Complex64::new(1.0, 2.0));
        assert_eq!(m, 6.0 - 5.0);
    }
}
