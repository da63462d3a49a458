//! Tabulated optical data and the Kramers-Kronig transform to the imaginary
//! frequency axis.
//!
//! ε(iξ) = 1 + (2/π) ∫₀^∞ ω Im ε(ω) / (ω² + ξ²) dω, assembled from three
//! pieces: the analytic Drude tail below the splice frequency, log-log linear
//! interpolation across the table, and an ω⁻³ power law above it.

use std::f64::consts::PI;
use std::io::BufRead;

use crate::error::{ensure, CasimirError, Result};
use crate::material::DrudeParameters;
use crate::quadrature::gauss_kronrod_21;

pub const CSV_HEADER: &str = "omega_rad_s,im_eps";

/// Largest ln-width of one quadrature panel inside a table segment.
const MAX_PANEL_LOG_WIDTH: f64 = 0.25;

/// Drude extrapolation of Im ε below the tabulated range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrudeTail {
    pub params: DrudeParameters,
    pub splice_frequency: f64,
}

/// Validated (ω, Im ε(ω)) rows plus extrapolation metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalTable {
    omega: Vec<f64>,
    im_eps: Vec<f64>,
    pub provenance: String,
    pub tail: DrudeTail,
    /// Amplitude A of the high-frequency tail Im ε ≈ A ω⁻³.
    pub high_tail_amplitude: f64,
    pub warnings: Vec<String>,
}

/// Im ε of the Drude model on the real axis: ωp²γ / (ω(ω² + γ²)).
pub fn drude_loss(plasma_frequency: f64, relaxation: f64, omega: f64) -> f64 {
    plasma_frequency * plasma_frequency * relaxation / (omega * (omega * omega + relaxation * relaxation))
}

impl OpticalTable {
    /// Builds a table from rows; the splice defaults to the lowest frequency.
    pub fn new(rows: Vec<(f64, f64)>, tail_params: DrudeParameters, provenance: impl Into<String>) -> Result<Self> {
        Self::from_rows(rows.into_iter().map(|r| (0, r)).collect(), tail_params, provenance.into())
    }

    fn from_rows(rows: Vec<(usize, (f64, f64))>, tail_params: DrudeParameters, provenance: String) -> Result<Self> {
        tail_params.validate()?;
        ensure(rows.len() >= 2, || format!("optical table needs at least 2 rows, got {}", rows.len()))?;
        let mut omega = Vec::with_capacity(rows.len());
        let mut im_eps = Vec::with_capacity(rows.len());
        for (line, (w, e)) in rows {
            if !(w.is_finite() && w > 0.0) {
                return Err(CasimirError::Parse { line, message: format!("frequency must be > 0, got {w}") });
            }
            if let Some(&prev) = omega.last() {
                if w <= prev {
                    return Err(CasimirError::NonMonotone { line, omega: w });
                }
            }
            if !(e.is_finite() && e >= 0.0) {
                return Err(CasimirError::NegativeLoss { line, im_eps: e });
            }
            omega.push(w);
            im_eps.push(e);
        }

        let splice = omega[0];
        let tail = DrudeTail { params: tail_params, splice_frequency: splice };
        let mut warnings = Vec::new();
        let tail_value = drude_loss(tail_params.plasma_frequency, tail_params.reference_relaxation, splice);
        if (tail_value - im_eps[0]).abs() > 0.2 * im_eps[0] {
            warnings.push(format!(
                "splice discontinuity: Drude tail gives Im eps = {tail_value:.4e} at {splice:.4e} rad/s, table has {:.4e}",
                im_eps[0]
            ));
        }

        // Least-squares amplitude of A ω⁻³ in log space over the top decade.
        let top = *omega.last().unwrap();
        let (mut sum, mut count) = (0.0, 0usize);
        for (&w, &e) in omega.iter().zip(&im_eps) {
            if w >= top / 10.0 && e > 0.0 {
                sum += (e * w.powi(3)).ln();
                count += 1;
            }
        }
        let high_tail_amplitude = if count > 0 { (sum / count as f64).exp() } else { 0.0 };
        warnings.push(format!(
            "high-frequency tail: Im eps = {high_tail_amplitude:.4e} * omega^-3 above {top:.4e} rad/s"
        ));

        Ok(OpticalTable { omega, im_eps, provenance, tail, high_tail_amplitude, warnings })
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn rows(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.omega.iter().copied().zip(self.im_eps.iter().copied())
    }

    /// Im ε(ω) across all three regions, using the tail relaxation `gamma`.
    pub fn im_eps_at(&self, omega: f64, gamma: f64) -> f64 {
        let n = self.omega.len();
        if omega < self.tail.splice_frequency {
            return drude_loss(self.tail.params.plasma_frequency, gamma, omega);
        }
        if omega >= self.omega[n - 1] {
            return self.high_tail_amplitude / omega.powi(3);
        }
        let i = self.omega.partition_point(|&w| w <= omega) - 1;
        log_log_interpolate(self.omega[i], self.im_eps[i], self.omega[i + 1], self.im_eps[i + 1], omega)
    }

    /// ε(iξ) with the Drude tail taken at its reference relaxation.
    pub fn kk_to_imaginary_axis(&self, xi: f64) -> Result<f64> {
        self.permittivity_with_relaxation(xi, self.tail.params.reference_relaxation)
    }

    /// ε(iξ) with the Drude tail evaluated at relaxation `gamma`.
    pub fn permittivity_with_relaxation(&self, xi: f64, gamma: f64) -> Result<f64> {
        ensure(xi.is_finite() && xi > 0.0, || format!("imaginary frequency must be > 0, got {xi}"))?;
        let wp = self.tail.params.plasma_frequency;
        let mut integral = drude_tail_integral(wp, gamma, xi, self.tail.splice_frequency);

        for i in 0..self.omega.len() - 1 {
            let (w0, w1) = (self.omega[i], self.omega[i + 1]);
            let (e0, e1) = (self.im_eps[i], self.im_eps[i + 1]);
            if e0 == 0.0 && e1 == 0.0 {
                continue;
            }
            // Substituting ω = eᵘ: ∫ ω Im ε/(ω² + ξ²) dω = ∫ ω² Im ε/(ω² + ξ²) du.
            let f = |u: f64| {
                let w = u.exp();
                let e = log_log_interpolate(w0, e0, w1, e1, w);
                w * w * e / (w * w + xi * xi)
            };
            let (u0, u1) = (w0.ln(), w1.ln());
            let panels = ((u1 - u0) / MAX_PANEL_LOG_WIDTH).ceil().max(1.0) as usize;
            let du = (u1 - u0) / panels as f64;
            for p in 0..panels {
                let a = u0 + p as f64 * du;
                let b = if p + 1 == panels { u1 } else { a + du };
                integral += gauss_kronrod_21(&f, a, b).0;
            }
        }

        integral += high_tail_integral(self.high_tail_amplitude, xi, *self.omega.last().unwrap());
        let eps = 1.0 + 2.0 / PI * integral;
        Ok(eps.max(1.0))
    }

    /// Parses the `omega_rad_s,im_eps` CSV format.
    pub fn load_csv<R: BufRead>(reader: R, tail_params: DrudeParameters, provenance: impl Into<String>) -> Result<Self> {
        let mut rows = Vec::new();
        let mut header_seen = false;
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if !header_seen {
                let normalized: String = trimmed.chars().filter(|c| !c.is_whitespace()).collect();
                if normalized != CSV_HEADER {
                    return Err(CasimirError::Parse {
                        line: line_no,
                        message: format!("expected header '{CSV_HEADER}', found '{trimmed}'"),
                    });
                }
                header_seen = true;
                continue;
            }
            let mut fields = trimmed.split(',');
            let mut field = |name: &str| -> Result<f64> {
                let raw = fields.next().ok_or_else(|| CasimirError::Parse {
                    line: line_no,
                    message: format!("missing {name} column"),
                })?;
                raw.trim().parse::<f64>().map_err(|e| CasimirError::Parse {
                    line: line_no,
                    message: format!("bad {name} value '{}': {e}", raw.trim()),
                })
            };
            let w = field("omega_rad_s")?;
            let e = field("im_eps")?;
            if fields.next().is_some() {
                return Err(CasimirError::Parse { line: line_no, message: "expected exactly 2 columns".into() });
            }
            rows.push((line_no, (w, e)));
        }
        if !header_seen {
            return Err(CasimirError::Parse { line: 0, message: format!("missing header '{CSV_HEADER}'") });
        }
        Self::from_rows(rows, tail_params, provenance.into())
    }

    /// Serializes rows in the CSV format accepted by [`OpticalTable::load_csv`].
    pub fn to_csv(&self) -> String {
        let mut out = format!("# {}\n{CSV_HEADER}\n", self.provenance);
        for (w, e) in self.rows() {
            out.push_str(&format!("{w:e},{e:e}\n"));
        }
        out
    }
}

fn log_log_interpolate(w0: f64, e0: f64, w1: f64, e1: f64, w: f64) -> f64 {
    if e0 <= 0.0 || e1 <= 0.0 {
        // A zero endpoint has no logarithm; fall back to linear.
        return e0 + (e1 - e0) * (w - w0) / (w1 - w0);
    }
    let t = (w / w0).ln() / (w1 / w0).ln();
    (e0.ln() + t * (e1 / e0).ln()).exp()
}

/// ∫₀^a ωp²γ / ((ω² + γ²)(ω² + ξ²)) dω, the Drude loss below the splice.
fn drude_tail_integral(wp: f64, gamma: f64, xi: f64, a: f64) -> f64 {
    if gamma == 0.0 || a <= 0.0 {
        return 0.0;
    }
    let wp2 = wp * wp;
    let diff = xi * xi - gamma * gamma;
    if diff.abs() > 1e-6 * xi * xi {
        wp2 * gamma / diff * ((a / gamma).atan() / gamma - (a / xi).atan() / xi)
    } else {
        // ξ → γ limit: ∫₀^a dω/(ω² + γ²)² = [atan(a/γ)/γ + a/(a² + γ²)] / (2γ²)
        wp2 * gamma * ((a / gamma).atan() / gamma + a / (a * a + gamma * gamma)) / (2.0 * gamma * gamma)
    }
}

/// ∫_a^∞ A ω⁻² / (ω² + ξ²) dω.
fn high_tail_integral(amplitude: f64, xi: f64, a: f64) -> f64 {
    if amplitude == 0.0 {
        return 0.0;
    }
    let s = xi / a;
    let value = if s < 1e-2 {
        // Series of [1/a − atan(ξ/a)/ξ]/ξ² in s = ξ/a.
        let s2 = s * s;
        (1.0 / (3.0 * a.powi(3))) * (1.0 - s2 * (3.0 / 5.0 - s2 * (3.0 / 7.0 - s2 / 3.0)))
    } else {
        (1.0 / a - s.atan() / xi) / (xi * xi)
    };
    amplitude * value
}

/// Table sampled from the Drude loss on a log grid, with matching tail.
pub fn synthetic_drude_table(params: DrudeParameters, omega_min: f64, omega_max: f64, points: usize) -> Result<OpticalTable> {
    ensure(points >= 2 && omega_min > 0.0 && omega_max > omega_min, || {
        "synthetic table needs >= 2 points on 0 < omega_min < omega_max".to_string()
    })?;
    let gamma = params.reference_relaxation;
    let ratio = (omega_max / omega_min).ln() / (points - 1) as f64;
    let rows = (0..points)
        .map(|i| {
            let w = omega_min * (ratio * i as f64).exp();
            (w, drude_loss(params.plasma_frequency, gamma, w))
        })
        .collect();
    OpticalTable::new(rows, params, "synthetic Drude loss")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::io::Cursor;

    fn gold() -> DrudeParameters {
        DrudeParameters::gold()
    }

    fn drude_eps(p: &DrudeParameters, xi: f64) -> f64 {
        1.0 + p.plasma_frequency.powi(2) / (xi * (xi + p.reference_relaxation))
    }

    #[test]
    fn minimal_csv() {
        let csv = "# test\nomega_rad_s,im_eps\n1e13,5.0\n2e13,1.5e-1\n";
        let t = OpticalTable::load_csv(Cursor::new(csv), gold(), "t").unwrap();
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn out_of_order_rows_name_the_line() {
        let csv = "omega_rad_s,im_eps\n2e13,1.0\n# comment\n1e13,1.0\n";
        let err = OpticalTable::load_csv(Cursor::new(csv), gold(), "t").unwrap_err();
        assert_eq!(err, CasimirError::NonMonotone { line: 4, omega: 1e13 });
    }

    #[test]
    fn negative_loss_is_rejected() {
        let csv = "omega_rad_s,im_eps\n1e13,1.0\n2e13,-1.0\n";
        let err = OpticalTable::load_csv(Cursor::new(csv), gold(), "t").unwrap_err();
        assert!(matches!(err, CasimirError::NegativeLoss { line: 3, .. }));
    }

    #[test]
    fn malformed_rows_report_line_numbers() {
        let bad_header = "omega,im\n1,2\n";
        assert!(matches!(
            OpticalTable::load_csv(Cursor::new(bad_header), gold(), "t"),
            Err(CasimirError::Parse { line: 1, .. })
        ));
        let bad_value = "omega_rad_s,im_eps\n1e13,abc\n";
        assert!(matches!(
            OpticalTable::load_csv(Cursor::new(bad_value), gold(), "t"),
            Err(CasimirError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn scientific_notation_and_csv_round_trip() {
        let t = synthetic_drude_table(gold(), 1e12, 1e17, 40).unwrap();
        let back = OpticalTable::load_csv(Cursor::new(t.to_csv()), gold(), "synthetic Drude loss").unwrap();
        assert_eq!(back.len(), t.len());
        for ((a, b), (c, d)) in t.rows().zip(back.rows()) {
            assert_relative_eq!(a, c, max_relative = 1e-15);
            assert_relative_eq!(b, d, max_relative = 1e-15);
        }
    }

    #[test]
    fn zero_loss_gives_vacuum() {
        let rows = vec![(1e13, 0.0), (1e14, 0.0), (1e15, 0.0)];
        let mut t = OpticalTable::new(rows, gold(), "zero").unwrap();
        t.tail.params.reference_relaxation = 1e-300;
        let eps = t.permittivity_with_relaxation(1e14, 0.0).unwrap();
        assert_eq!(eps, 1.0);
    }

    #[test]
    fn synthetic_drude_round_trip() {
        let p = gold();
        let t = synthetic_drude_table(p, 1e11, 1e18, 300).unwrap();
        let gamma = p.reference_relaxation;
        let mut xi = gamma / 10.0;
        while xi <= 100.0 * gamma {
            let eps = t.kk_to_imaginary_axis(xi).unwrap();
            assert_relative_eq!(eps, drude_eps(&p, xi), max_relative = 5e-3);
            xi *= 1.5;
        }
    }

    #[test]
    fn decays_above_table() {
        let t = synthetic_drude_table(gold(), 1e11, 1e17, 200).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..8 {
            let xi = 1e17 * 10f64.powi(k);
            let eps = t.kk_to_imaginary_axis(xi).unwrap();
            assert!(eps >= 1.0 && eps <= prev);
            prev = eps;
        }
        assert!(prev - 1.0 < 1e-6);
    }

    #[test]
    fn splice_mismatch_warns() {
        let rows = vec![(1e13, 1e-3), (1e14, 1e-4)];
        let t = OpticalTable::new(rows, gold(), "mismatch").unwrap();
        assert!(t.warnings.iter().any(|w| w.contains("splice discontinuity")));
    }

    #[test]
    fn drude_tail_integral_matches_quadrature_near_coincidence() {
        let (wp, g, a) = (1.0, 2.0, 5.0);
        for xi in [2.0, 2.0 * (1.0 + 1e-8), 3.0] {
            let f = |w: f64| wp * wp * g / ((w * w + g * g) * (w * w + xi * xi));
            let q = crate::quadrature::integrate(f, 0.0, a, Default::default()).unwrap().value;
            assert_relative_eq!(drude_tail_integral(wp, g, xi, a), q, max_relative = 1e-7);
        }
    }

    #[test]
    fn high_tail_series_matches_closed_form() {
        let a = 1.0;
        for s in [5e-4, 2e-3] {
            let xi = s * a;
            let f = |w: f64| 1.0 / (w * w * (w * w + xi * xi));
            let q = crate::quadrature::integrate_to_infinity(f, a, 1.0, |b| 1.0 / (3.0 * b.powi(3)), Default::default())
                .unwrap()
                .value;
            assert_relative_eq!(high_tail_integral(1.0, xi, a), q, max_relative = 1e-9);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]
            #[test]
            fn kk_result_at_least_one_and_monotone(
                seed in proptest::collection::vec(0.0f64..10.0, 8..20), xi in 1e12f64..1e16
            ) {
                let rows: Vec<(f64, f64)> = seed.iter().enumerate()
                    .map(|(i, &e)| (1e13 * 2f64.powi(i as i32), e))
                    .collect();
                let t = OpticalTable::new(rows, gold(), "random").unwrap();
                let a = t.kk_to_imaginary_axis(xi).unwrap();
                let b = t.kk_to_imaginary_axis(xi * 1.7).unwrap();
                prop_assert!(a >= 1.0 && b >= 1.0 && b <= a);
            }
        }
    }
}
