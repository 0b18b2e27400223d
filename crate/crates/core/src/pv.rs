//! Calibrated single-diode model of the PV array.
//!
//! The array obeys the ideal single-diode law
//!
//! ```text
//! I(V, G) = i_ph_ref * G / g_ref - i_0 * (exp(V / a) - 1)
//! ```
//!
//! with the photocurrent proportional to irradiance and no parasitic series
//! or shunt resistance. Three anchor points (short-circuit current, maximum
//! power point, open-circuit voltage) pin the three parameters exactly:
//! `i_ph_ref` equals the short-circuit current, `i_0` follows from the
//! open-circuit condition, and the modified ideality voltage `a` is found by
//! bisection on the zero-slope condition of the power curve at the MPP
//! voltage. Temperature is fixed at the reference value throughout.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PvError {
    #[error("invalid PV anchors: {0}")]
    InvalidAnchors(String),
    #[error("PV calibration infeasible: {0}")]
    CalibrationInfeasible(String),
}

/// Anchor points the single-diode parameters are calibrated against.
#[derive(Debug, Clone, PartialEq)]
pub struct PvAnchors {
    /// Short-circuit current at reference irradiance (A).
    pub isc: f64,
    /// Voltage at the maximum power point (V).
    pub vmp: f64,
    /// Power at the maximum power point (W).
    pub pmp: f64,
    /// Open-circuit voltage (V).
    pub voc: f64,
    /// Reference irradiance (W/m2).
    pub g_ref: f64,
    /// Reference cell temperature (degC).
    pub t_ref: f64,
}

impl Default for PvAnchors {
    /// 590 W array: Isc 5.83 A and MPP 108.4 V / 590 W at 1000 W/m2, 25 degC.
    /// The open-circuit voltage is the remaining degree of freedom of the
    /// ideal diode law; 129.3 V makes the calibrated model reproduce the
    /// 590 W MPP anchor (within 0.01%) while keeping vmp/voc at a typical
    /// silicon fill geometry of ~0.84.
    fn default() -> Self {
        Self {
            isc: 5.83,
            vmp: 108.4,
            pmp: 590.0,
            voc: 129.3,
            g_ref: 1000.0,
            t_ref: 25.0,
        }
    }
}

impl PvAnchors {
    pub fn validate(&self) -> Result<(), PvError> {
        let err = |msg: String| Err(PvError::InvalidAnchors(msg));
        if !(self.isc > 0.0 && self.isc.is_finite()) {
            return err(format!("isc must be positive, got {}", self.isc));
        }
        if !(self.vmp > 0.0 && self.vmp < self.voc) {
            return err(format!(
                "vmp must satisfy 0 < vmp < voc, got vmp = {}, voc = {}",
                self.vmp, self.voc
            ));
        }
        if !(self.pmp > 0.0 && self.pmp / self.vmp < self.isc) {
            return err(format!(
                "MPP current pmp/vmp must lie in (0, isc), got {} A with isc = {} A",
                self.pmp / self.vmp,
                self.isc
            ));
        }
        if !(self.g_ref > 0.0 && self.g_ref.is_finite()) {
            return err(format!("g_ref must be positive, got {}", self.g_ref));
        }
        Ok(())
    }
}

/// Calibrated single-diode parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PvParams {
    /// Photocurrent at reference irradiance (A); scales linearly with G.
    pub i_ph_ref: f64,
    /// Diode saturation current (A).
    pub i_0: f64,
    /// Modified ideality voltage n*Ns*Vt (V).
    pub a: f64,
    /// Reference irradiance the photocurrent is quoted at (W/m2).
    pub g_ref: f64,
}

/// Bisection bracket for the ideality voltage (V).
const A_BRACKET: (f64, f64) = (1.0, 50.0);
/// Maximum |d(V*I)/dV| at the MPP voltage after calibration (W/V).
const MPP_SLOPE_TOL: f64 = 1e-6;
/// Maximum |I(voc)| after calibration (A).
const VOC_CURRENT_TOL: f64 = 1e-9;
/// Relative tolerance on reproducing the MPP power anchor.
const PMP_REL_TOL: f64 = 0.005;

impl PvParams {
    /// Calibrate the diode law against the anchor points.
    ///
    /// `i_ph_ref = isc` enforces the short-circuit anchor exactly and
    /// `i_0 = isc / (exp(voc/a) - 1)` enforces zero current at `voc` by
    /// construction, leaving a 1-D root-find on `a` for the condition
    /// `d(V*I)/dV = 0` at `vmp`. The reproduced MPP power must land within
    /// 0.5% of the `pmp` anchor or calibration is rejected.
    pub fn calibrate(anchors: &PvAnchors) -> Result<Self, PvError> {
        anchors.validate()?;
        let (isc, vmp, voc) = (anchors.isc, anchors.vmp, anchors.voc);
        let i0_of = |a: f64| isc / ((voc / a).exp() - 1.0);
        // d(V*I)/dV at vmp = I(vmp) + vmp * I'(vmp)
        let power_slope = |a: f64| {
            let i_0 = i0_of(a);
            let e = (vmp / a).exp();
            isc - i_0 * (e - 1.0) - vmp / a * i_0 * e
        };

        let (mut lo, mut hi) = A_BRACKET;
        let f_lo = power_slope(lo);
        if f_lo * power_slope(hi) > 0.0 {
            return Err(PvError::CalibrationInfeasible(format!(
                "no ideality voltage in [{}, {}] V puts the power maximum at vmp = {} V",
                lo, hi, vmp
            )));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f_lo * power_slope(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let a = 0.5 * (lo + hi);
        if power_slope(a).abs() > MPP_SLOPE_TOL {
            return Err(PvError::CalibrationInfeasible(format!(
                "power slope at vmp = {} V did not converge below {} W/V",
                vmp, MPP_SLOPE_TOL
            )));
        }

        let params = Self {
            i_ph_ref: isc,
            i_0: i0_of(a),
            a,
            g_ref: anchors.g_ref,
        };
        debug_assert!(params.current(voc, anchors.g_ref).abs() <= VOC_CURRENT_TOL);
        let pmp_model = vmp * params.current(vmp, anchors.g_ref);
        if (pmp_model - anchors.pmp).abs() > PMP_REL_TOL * anchors.pmp {
            return Err(PvError::CalibrationInfeasible(format!(
                "calibrated MPP power {:.3} W misses the pmp anchor {} W by more than {}%; \
                 adjust voc (the free anchor)",
                pmp_model,
                anchors.pmp,
                PMP_REL_TOL * 100.0
            )));
        }
        Ok(params)
    }

    /// Array output current at bus voltage `v` and irradiance `g`.
    ///
    /// Total on v >= 0, g >= 0; goes negative past the effective
    /// open-circuit voltage (the blocking diode is applied downstream).
    pub fn current(&self, v: f64, g: f64) -> f64 {
        self.i_ph_ref * g / self.g_ref - self.i_0 * ((v / self.a).exp() - 1.0)
    }

    /// Voltage at which the array current crosses zero at irradiance `g`.
    pub fn open_circuit_voltage(&self, g: f64) -> f64 {
        let i_ph = self.i_ph_ref * g / self.g_ref;
        self.a * (i_ph / self.i_0 + 1.0).ln()
    }

    /// Maximum power point `(voltage, power)` at irradiance `g`, located by
    /// golden-section search to 1e-3 V. Reporting and verification only;
    /// the controller never sees this.
    pub fn mpp(&self, g: f64) -> (f64, f64) {
        let hi = self.open_circuit_voltage(g).max(0.0);
        golden_max(0.0, hi, 1e-3, |v| v * self.current(v, g))
    }
}

/// Golden-section maximisation of a unimodal function on `[lo, hi]`.
fn golden_max(mut lo: f64, mut hi: f64, tol: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}
