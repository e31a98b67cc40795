use serde::Serialize;
use silevy::indexing::{Domain, MetricKind, Point};
use silevy::integral::Integrand;
use silevy::measure::Measure;
use silevy::regularity::{mass_curves, predict_1d, predict_bounds, Exponent, GUARD};

/// When the prediction is `+∞` an estimate passes if it reaches this value.
pub const INF_FLOOR: f64 = 2.0;

pub const MEMBERSHIP_RULE: &str =
    "grid membership of the irregular sets decided on fitted mass slopes with a 0.1 guard band";

/// Predicted exponent ranges for the plain and localized estimators.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Prediction {
    pub method: &'static str,
    pub holder: [Exponent; 2],
    pub localized: [Exponent; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_v: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guard: Option<f64>,
}

fn quad_level(domain: &Domain) -> u32 {
    match domain {
        Domain::Box(b) => match b.p() {
            1 => 12,
            2 => 9,
            _ => 5,
        },
        Domain::Tree(t) => t.max_depth(),
    }
}

pub fn alphas() -> Vec<f64> {
    (0..=20).map(|k| 0.1 * k as f64).collect()
}

pub fn rhos() -> Vec<f64> {
    (3..=6).map(|k| (-(k as f64)).exp2()).collect()
}

/// Theory for `∫ f dX` at `t` with Blumenthal-Getoor index `beta`. The
/// one-dimensional box uses the closed form; elsewhere the bounds come
/// from the mass curves of the irregular sets.
pub fn predict(
    domain: &Domain,
    measure: &Measure,
    metric: &MetricKind,
    f: &Integrand,
    t: &Point,
    beta: f64,
) -> silevy::Result<Prediction> {
    if domain.as_box().is_some_and(|b| b.p() == 1) {
        let v = predict_1d(f, domain, t, beta)?;
        return Ok(Prediction {
            method: "closed_form_1d",
            holder: [v, v],
            localized: [v, v],
            q_v: None,
            q_b: None,
            guard: None,
        });
    }
    let curves = mass_curves(
        f,
        domain,
        measure,
        metric,
        t,
        &alphas(),
        &rhos(),
        quad_level(domain),
    )?;
    let b = predict_bounds(&curves, beta)?;
    Ok(Prediction {
        method: "mass_curve_bounds",
        holder: [b.lower, b.upper],
        localized: [b.lower_loc, b.upper_loc],
        q_v: Some(curves.q_v),
        q_b: Some(curves.q_b),
        guard: Some(GUARD),
    })
}

/// Whether `value` lies in `[lo - tol, hi + tol]`; an infinite lower end
/// asks for at least [`INF_FLOOR`].
pub fn within(value: Exponent, band: [Exponent; 2], tol: f64) -> bool {
    match band[0] {
        Exponent::Infinite => value.value() >= INF_FLOOR,
        Exponent::Finite(lo) => {
            let v = value.value();
            v >= lo - tol && v <= band[1].value() + tol
        }
    }
}
