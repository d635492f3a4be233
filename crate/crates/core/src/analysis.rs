//! Parameter scans and extremum detection over the QFI landscape.
//!
//! The QFI surface is explored along rectangular grids in `tau`, `a` and
//! `theta`. [`scan`] produces dense tables for plotting, [`find_extrema`]
//! locates and refines the peak/valley structure of 1-D curves (transient
//! maxima, the optimal detection time, one- versus two-peak shapes), and
//! [`fmax_curve`] tracks the maximum of `F` over acceleration as a function
//! of time.
//!
//! Grid evaluations are independent and run in parallel; rows are assembled
//! in row-major axis order regardless of scheduling, so output is
//! deterministic.

use crate::error::{Error, Result};
use crate::metrology::qfi;
use crate::optimize::golden_max;
use crate::spectral::{Accel, FieldModel};
use rayon::prelude::*;
use serde::Serialize;

/// Hard cap on scan accelerations; far beyond anything the physics resolves.
pub const A_MAX: f64 = 1e3;
/// Hard cap on scan times; the dynamics is indistinguishable from its fixed
/// point long before this.
pub const TAU_MAX: f64 = 1e4;

/// Extrema with prominence below this fraction of the global maximum are
/// treated as floating-point ripple; QFI values span several orders of
/// magnitude across a window.
const PROMINENCE_FRAC: f64 = 1e-9;

/// Coarse grid size for the inner maximization of [`fmax_curve`].
const FMAX_COARSE: usize = 512;

/// Scannable coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisName {
    Tau,
    A,
    Theta,
}

impl AxisName {
    pub fn label(self) -> &'static str {
        match self {
            AxisName::Tau => "tau",
            AxisName::A => "a",
            AxisName::Theta => "theta",
        }
    }
}

/// One linearly spaced scan axis.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Axis {
    pub name: AxisName,
    pub min: f64,
    pub max: f64,
    pub n_points: usize,
}

impl Axis {
    fn validate(&self) -> Result<()> {
        if self.n_points < 2 {
            return Err(Error::Validation(format!(
                "axis {} needs at least 2 points",
                self.name.label()
            )));
        }
        if !self.min.is_finite() || !self.max.is_finite() || self.min >= self.max {
            return Err(Error::Validation(format!(
                "axis {}: need finite min < max, got [{}, {}]",
                self.name.label(),
                self.min,
                self.max
            )));
        }
        let ok = match self.name {
            AxisName::Theta => self.min >= 0.0 && self.max <= std::f64::consts::PI,
            AxisName::A => self.min > 0.0 && self.max <= A_MAX,
            AxisName::Tau => self.min >= 0.0 && self.max <= TAU_MAX,
        };
        if !ok {
            return Err(Error::Validation(format!(
                "axis {} out of range: [{}, {}]",
                self.name.label(),
                self.min,
                self.max
            )));
        }
        Ok(())
    }

    fn point(&self, i: usize) -> f64 {
        // exact endpoints, uniform interior
        if i == self.n_points - 1 {
            self.max
        } else {
            self.min + (self.max - self.min) * i as f64 / (self.n_points - 1) as f64
        }
    }
}

/// Rectangular scan description: one or two axes plus fixed values for the
/// remaining coordinates.
#[derive(Debug, Clone, Serialize)]
pub struct ScanGrid {
    pub axes: Vec<Axis>,
    pub tau: f64,
    pub a: f64,
    pub theta: f64,
    pub field: FieldModel,
}

impl ScanGrid {
    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(Error::Validation(format!(
                "scan needs 1 or 2 axes, got {}",
                self.axes.len()
            )));
        }
        if self.axes.len() == 2 && self.axes[0].name == self.axes[1].name {
            return Err(Error::Validation(format!(
                "duplicate scan axis {}",
                self.axes[0].name.label()
            )));
        }
        for axis in &self.axes {
            axis.validate()?;
        }
        Accel::new(self.a)?;
        if !self.tau.is_finite() || self.tau < 0.0 {
            return Err(Error::Validation(format!("fixed tau invalid: {}", self.tau)));
        }
        if !self.theta.is_finite() || !(0.0..=std::f64::consts::PI).contains(&self.theta) {
            return Err(Error::Validation(format!(
                "fixed theta invalid: {}",
                self.theta
            )));
        }
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.axes.iter().map(|ax| ax.n_points).product()
    }

    fn coords(&self, row: usize) -> Vec<f64> {
        match self.axes.len() {
            1 => vec![self.axes[0].point(row)],
            _ => {
                let inner = self.axes[1].n_points;
                vec![
                    self.axes[0].point(row / inner),
                    self.axes[1].point(row % inner),
                ]
            }
        }
    }

    /// QFI at a point of the scan, with axis values overriding the fixed ones.
    fn eval(&self, coords: &[f64]) -> Result<f64> {
        let (mut tau, mut a, mut theta) = (self.tau, self.a, self.theta);
        for (axis, &x) in self.axes.iter().zip(coords) {
            match axis.name {
                AxisName::Tau => tau = x,
                AxisName::A => a = x,
                AxisName::Theta => theta = x,
            }
        }
        Ok(qfi(Accel::new(a)?, tau, theta, self.field)?.value)
    }
}

/// One scan sample: axis coordinates in grid order, then the QFI.
#[derive(Debug, Clone, Serialize)]
pub struct ScanRow {
    pub coords: Vec<f64>,
    pub f: f64,
}

/// Dense scan output; rows are in row-major axis order.
#[derive(Debug, Clone, Serialize)]
pub struct ScanTable {
    pub grid: ScanGrid,
    pub rows: Vec<ScanRow>,
}

/// Evaluates the QFI over the grid.
pub fn scan(grid: &ScanGrid) -> Result<ScanTable> {
    grid.validate()?;
    let rows = (0..grid.n_rows())
        .into_par_iter()
        .map(|i| {
            let coords = grid.coords(i);
            let f = grid.eval(&coords)?;
            Ok(ScanRow { coords, f })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanTable {
        grid: grid.clone(),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremumKind {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Extremum {
    pub location: f64,
    pub value: f64,
    pub kind: ExtremumKind,
}

/// Extrema of a 1-D scan, refined on the continuous curve.
#[derive(Debug, Clone, Serialize)]
pub struct PeakReport {
    /// Interior extrema in axis order, alternating in kind.
    pub extrema: Vec<Extremum>,
    pub n_local_maxima: usize,
    /// Location and value of the global maximum of the curve (an interior
    /// peak when one dominates, otherwise a grid endpoint).
    pub global_max: (f64, f64),
}

/// Locates interior extrema of a 1-axis scan and sharpens each one by
/// golden-section search on the continuous QFI to location tolerance
/// `refine_tol`. Extrema whose discrete prominence falls below
/// `1e-9 x (global max)` are discarded as numerical ripple.
pub fn find_extrema(table: &ScanTable, refine_tol: f64) -> Result<PeakReport> {
    if table.grid.axes.len() != 1 {
        return Err(Error::Validation(
            "extremum detection needs a 1-axis scan".into(),
        ));
    }
    if table.rows.len() < 50 {
        return Err(Error::Validation(format!(
            "extremum detection needs at least 50 points, got {}",
            table.rows.len()
        )));
    }
    if !(1e-10..=1e-4).contains(&refine_tol) {
        return Err(Error::Validation(format!(
            "refine_tol must lie in [1e-10, 1e-4], got {refine_tol}"
        )));
    }
    let xs: Vec<f64> = table.rows.iter().map(|r| r.coords[0]).collect();
    let fs: Vec<f64> = table.rows.iter().map(|r| r.f).collect();
    let global = fs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let threshold = PROMINENCE_FRAC * global;

    let eval = |x: f64| table.grid.eval(&[x]).unwrap_or(f64::NEG_INFINITY);

    let mut extrema: Vec<Extremum> = Vec::new();
    for i in 1..fs.len() - 1 {
        let kind = if fs[i] > fs[i - 1] && fs[i] > fs[i + 1] {
            ExtremumKind::Max
        } else if fs[i] < fs[i - 1] && fs[i] < fs[i + 1] {
            ExtremumKind::Min
        } else {
            continue;
        };
        if prominence(&fs, i, kind) < threshold {
            continue;
        }
        let (location, value) = match kind {
            ExtremumKind::Max => golden_max(eval, xs[i - 1], xs[i + 1], refine_tol, 400),
            ExtremumKind::Min => {
                let (x, v) = golden_max(|x| -eval(x), xs[i - 1], xs[i + 1], refine_tol, 400);
                (x, -v)
            }
        };
        extrema.push(Extremum {
            location,
            value,
            kind,
        });
    }
    enforce_alternation(&mut extrema);

    let n_local_maxima = extrema
        .iter()
        .filter(|e| e.kind == ExtremumKind::Max)
        .count();
    let mut global_max = if fs[0] >= fs[fs.len() - 1] {
        (xs[0], fs[0])
    } else {
        (xs[xs.len() - 1], fs[fs.len() - 1])
    };
    for e in &extrema {
        if e.kind == ExtremumKind::Max && e.value > global_max.1 {
            global_max = (e.location, e.value);
        }
    }

    Ok(PeakReport {
        extrema,
        n_local_maxima,
        global_max,
    })
}

/// Discrete topographic prominence: height above the higher of the two
/// interval minima, where each interval runs to the nearest strictly higher
/// point or the curve edge (mirrored for minima).
fn prominence(fs: &[f64], i: usize, kind: ExtremumKind) -> f64 {
    let n = fs.len();
    match kind {
        ExtremumKind::Max => {
            let mut left = fs[i];
            let mut j = i;
            while j > 0 && fs[j - 1] <= fs[i] {
                j -= 1;
                left = left.min(fs[j]);
            }
            let mut right = fs[i];
            let mut j = i;
            while j + 1 < n && fs[j + 1] <= fs[i] {
                j += 1;
                right = right.min(fs[j]);
            }
            fs[i] - left.max(right)
        }
        ExtremumKind::Min => {
            let mut left = fs[i];
            let mut j = i;
            while j > 0 && fs[j - 1] >= fs[i] {
                j -= 1;
                left = left.max(fs[j]);
            }
            let mut right = fs[i];
            let mut j = i;
            while j + 1 < n && fs[j + 1] >= fs[i] {
                j += 1;
                right = right.max(fs[j]);
            }
            left.min(right) - fs[i]
        }
    }
}

/// Drops the weaker of adjacent same-kind extrema until kinds alternate;
/// prominence filtering can remove the extremum that separated them.
fn enforce_alternation(extrema: &mut Vec<Extremum>) {
    let mut i = 0;
    while i + 1 < extrema.len() {
        if extrema[i].kind != extrema[i + 1].kind {
            i += 1;
            continue;
        }
        let keep_first = match extrema[i].kind {
            ExtremumKind::Max => extrema[i].value >= extrema[i + 1].value,
            ExtremumKind::Min => extrema[i].value <= extrema[i + 1].value,
        };
        extrema.remove(if keep_first { i + 1 } else { i });
        if i > 0 {
            i -= 1;
        }
    }
}

/// One sample of the envelope `F_max(tau) = max_a F(a, tau)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FmaxPoint {
    pub tau: f64,
    pub f_max: f64,
    pub a_argmax: f64,
}

/// Maximum of the QFI over acceleration for each requested time.
///
/// Each maximization scans a coarse grid of [`FMAX_COARSE`] points over
/// `a_range` and refines the best bracket by golden-section search; the
/// returned value is never below the coarse maximum.
pub fn fmax_curve(
    tau_grid: &[f64],
    theta: f64,
    field: FieldModel,
    a_range: (f64, f64),
) -> Result<Vec<FmaxPoint>> {
    let (a_lo, a_hi) = a_range;
    if !(a_lo.is_finite() && a_hi.is_finite()) || a_lo <= 0.0 || a_lo >= a_hi || a_hi > A_MAX {
        return Err(Error::Validation(format!(
            "acceleration range invalid: ({a_lo}, {a_hi})"
        )));
    }
    if tau_grid.is_empty() {
        return Err(Error::Validation("empty tau grid".into()));
    }
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::Validation(format!("theta invalid: {theta}")));
    }
    for &tau in tau_grid {
        if !tau.is_finite() || tau < 0.0 || tau > TAU_MAX {
            return Err(Error::Validation(format!("tau invalid: {tau}")));
        }
    }

    tau_grid
        .par_iter()
        .map(|&tau| {
            let eval =
                |a: f64| qfi(Accel::new(a).unwrap(), tau, theta, field).map_or(0.0, |r| r.value);
            let step = (a_hi - a_lo) / (FMAX_COARSE - 1) as f64;
            let mut best = 0usize;
            let mut best_f = f64::NEG_INFINITY;
            let mut coarse = vec![0.0; FMAX_COARSE];
            for (i, slot) in coarse.iter_mut().enumerate() {
                let x = if i == FMAX_COARSE - 1 {
                    a_hi
                } else {
                    a_lo + step * i as f64
                };
                let f = eval(x);
                *slot = f;
                if f > best_f {
                    best_f = f;
                    best = i;
                }
            }
            let lo = a_lo + step * best.saturating_sub(1) as f64;
            let hi = (a_lo + step * (best + 1) as f64).min(a_hi);
            let (x, v) = golden_max(eval, lo, hi, 1e-10 * (a_hi - a_lo), 400);
            let (a_argmax, f_max) = if v >= best_f {
                (x, v)
            } else {
                (a_lo + step * best as f64, best_f)
            };
            Ok(FmaxPoint {
                tau,
                f_max,
                a_argmax,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrology::asymptotic_qfi;
    use std::f64::consts::PI;

    const EM: FieldModel = FieldModel::Electromagnetic;

    fn tau_scan(a: f64, theta: f64, n: usize, tau_max: f64) -> ScanTable {
        scan(&ScanGrid {
            axes: vec![Axis {
                name: AxisName::Tau,
                min: 0.0,
                max: tau_max,
                n_points: n,
            }],
            tau: 0.0,
            a,
            theta,
            field: EM,
        })
        .unwrap()
    }

    fn a_scan(tau: f64, theta: f64, n: usize) -> ScanTable {
        scan(&ScanGrid {
            axes: vec![Axis {
                name: AxisName::A,
                min: 1e-3,
                max: 6.0,
                n_points: n,
            }],
            tau,
            a: 1.0,
            theta,
            field: EM,
        })
        .unwrap()
    }

    #[test]
    fn grid_validation() {
        let bad_axis = ScanGrid {
            axes: vec![Axis {
                name: AxisName::A,
                min: 0.0, // a-axis must be strictly positive
                max: 6.0,
                n_points: 10,
            }],
            tau: 1.0,
            a: 1.0,
            theta: 0.0,
            field: EM,
        };
        assert!(scan(&bad_axis).is_err());

        let dup = ScanGrid {
            axes: vec![
                Axis {
                    name: AxisName::Tau,
                    min: 0.0,
                    max: 1.0,
                    n_points: 5,
                },
                Axis {
                    name: AxisName::Tau,
                    min: 0.0,
                    max: 1.0,
                    n_points: 5,
                },
            ],
            tau: 0.0,
            a: 1.0,
            theta: 0.0,
            field: EM,
        };
        assert!(scan(&dup).is_err());

        let bad_theta = ScanGrid {
            axes: vec![Axis {
                name: AxisName::Theta,
                min: 0.0,
                max: 4.0, // beyond pi
                n_points: 10,
            }],
            tau: 1.0,
            a: 1.0,
            theta: 0.0,
            field: EM,
        };
        assert!(scan(&bad_theta).is_err());
    }

    #[test]
    fn tau_scan_endpoints() {
        let table = tau_scan(1.0, PI / 2.0, 601, 15.0);
        assert_eq!(table.rows.len(), 601);
        assert_eq!(table.rows[0].f, 0.0);
        assert_eq!(table.rows[0].coords[0], 0.0);
        assert_eq!(table.rows[600].coords[0], 15.0);
        let asym = asymptotic_qfi(1.0, EM).unwrap();
        for row in &table.rows[560..] {
            assert!((row.f - asym).abs() < 1e-4, "tau={} f={}", row.coords[0], row.f);
        }
    }

    #[test]
    fn theta_scan_peaks_at_excited_state() {
        let table = scan(&ScanGrid {
            axes: vec![Axis {
                name: AxisName::Theta,
                min: 0.0,
                max: PI,
                n_points: 401,
            }],
            tau: 0.5,
            a: 1.0,
            theta: 0.0,
            field: EM,
        })
        .unwrap();
        let argmax = table
            .rows
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.f.total_cmp(&y.1.f))
            .unwrap()
            .0;
        assert_eq!(argmax, 0);
    }

    #[test]
    fn two_axis_scan_is_row_major() {
        let table = scan(&ScanGrid {
            axes: vec![
                Axis {
                    name: AxisName::Tau,
                    min: 0.0,
                    max: 1.0,
                    n_points: 3,
                },
                Axis {
                    name: AxisName::A,
                    min: 0.5,
                    max: 1.5,
                    n_points: 2,
                },
            ],
            tau: 0.0,
            a: 1.0,
            theta: PI,
            field: EM,
        })
        .unwrap();
        assert_eq!(table.rows.len(), 6);
        let expect = [
            (0.0, 0.5),
            (0.0, 1.5),
            (0.5, 0.5),
            (0.5, 1.5),
            (1.0, 0.5),
            (1.0, 1.5),
        ];
        for (row, (t, a)) in table.rows.iter().zip(expect) {
            assert_eq!(row.coords[0], t);
            assert_eq!(row.coords[1], a);
        }
    }

    #[test]
    fn scan_is_deterministic() {
        let g = ScanGrid {
            axes: vec![Axis {
                name: AxisName::Tau,
                min: 0.0,
                max: 10.0,
                n_points: 301,
            }],
            tau: 0.0,
            a: 0.9,
            theta: 1.0,
            field: EM,
        };
        let t1 = scan(&g).unwrap();
        let t2 = scan(&g).unwrap();
        for (r1, r2) in t1.rows.iter().zip(&t2.rows) {
            assert_eq!(r1.f.to_bits(), r2.f.to_bits());
        }
    }

    #[test]
    fn transient_max_then_min_for_excited_state() {
        let table = tau_scan(1.0, 0.0, 601, 15.0);
        let report = find_extrema(&table, 1e-8).unwrap();
        let kinds: Vec<ExtremumKind> = report.extrema.iter().map(|e| e.kind).collect();
        assert!(kinds.len() >= 2);
        assert_eq!(kinds[0], ExtremumKind::Max);
        assert_eq!(kinds[1], ExtremumKind::Min);
    }

    #[test]
    fn ground_state_has_single_peak_in_acceleration() {
        let report = find_extrema(&a_scan(4.0, PI, 600), 1e-8).unwrap();
        assert_eq!(report.n_local_maxima, 1);
        // location near the asymptotic optimum a* = 1.5211
        let peak = report
            .extrema
            .iter()
            .find(|e| e.kind == ExtremumKind::Max)
            .unwrap();
        assert!((peak.location - 1.52).abs() < 0.05, "at {}", peak.location);
    }

    #[test]
    fn excited_state_shows_two_peaks_in_acceleration() {
        let report = find_extrema(&a_scan(1.0, 0.0, 600), 1e-8).unwrap();
        assert_eq!(report.n_local_maxima, 2);
    }

    #[test]
    fn extrema_alternate() {
        for (tau, theta) in [(1.0, 0.0), (4.0, 0.0), (0.5, PI / 2.0)] {
            let report = find_extrema(&a_scan(tau, theta, 600), 1e-8).unwrap();
            for pair in report.extrema.windows(2) {
                assert_ne!(pair[0].kind, pair[1].kind);
                assert!(pair[0].location < pair[1].location);
            }
        }
    }

    #[test]
    fn refined_locations_stable_under_grid_halving() {
        let tol = 1e-8;
        let coarse = find_extrema(&a_scan(4.0, PI, 300), tol).unwrap();
        let fine = find_extrema(&a_scan(4.0, PI, 600), tol).unwrap();
        let c = coarse
            .extrema
            .iter()
            .find(|e| e.kind == ExtremumKind::Max)
            .unwrap();
        let f = fine
            .extrema
            .iter()
            .find(|e| e.kind == ExtremumKind::Max)
            .unwrap();
        assert!((c.location - f.location).abs() < 10.0 * tol);
    }

    #[test]
    fn find_extrema_validation() {
        let table = tau_scan(1.0, 0.0, 20, 5.0);
        assert!(find_extrema(&table, 1e-8).is_err()); // too few points
        let table = tau_scan(1.0, 0.0, 100, 5.0);
        assert!(find_extrema(&table, 1e-2).is_err()); // tol out of range
        assert!(find_extrema(&table, 1e-12).is_err());
    }

    #[test]
    fn fmax_never_below_coarse_scan() {
        let taus = [0.5, 1.0, 4.0, 20.0];
        let pts = fmax_curve(&taus, 0.0, EM, (1e-3, 6.0)).unwrap();
        for (pt, &tau) in pts.iter().zip(&taus) {
            assert_eq!(pt.tau, tau);
            let table = a_scan(tau, 0.0, 512);
            let coarse_max = table.rows.iter().map(|r| r.f).fold(f64::MIN, f64::max);
            assert!(pt.f_max >= coarse_max);
        }
    }

    #[test]
    fn fmax_validation() {
        assert!(fmax_curve(&[], 0.0, EM, (1e-3, 6.0)).is_err());
        assert!(fmax_curve(&[1.0], 0.0, EM, (0.0, 6.0)).is_err());
        assert!(fmax_curve(&[1.0], 0.0, EM, (2.0, 1.0)).is_err());
        assert!(fmax_curve(&[-1.0], 0.0, EM, (1e-3, 6.0)).is_err());
    }
}
