use serde::{Deserialize, Serialize};

use super::metrics::GraphMetrics;
use super::removal::MeanMetrics;

/// Percent change per metric, `(after - before) / before * 100`. A metric
/// undefined on either side (or zero before) has no delta and is listed in
/// `undefined`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricDeltas {
    pub node_count: Option<f64>,
    pub edge_count: Option<f64>,
    pub density: Option<f64>,
    pub diameter: Option<f64>,
    pub avg_path_length: Option<f64>,
    pub undefined: Vec<String>,
}

fn percent_change(before: Option<f64>, after: Option<f64>) -> Option<f64> {
    match (before, after) {
        (Some(b), Some(a)) if b != 0.0 => Some((a - b) / b * 100.0),
        _ => None,
    }
}

pub fn delta_report(before: &GraphMetrics, after: &GraphMetrics) -> MetricDeltas {
    let one = |m: &GraphMetrics| MeanMetrics::of(std::slice::from_ref(m)).expect("one element");
    mean_delta_report(&one(before), &one(after))
}

/// [`delta_report`] over trial means, so fractional means such as a mean
/// diameter of 15.2 are compared without rounding.
pub fn mean_delta_report(before: &MeanMetrics, after: &MeanMetrics) -> MetricDeltas {
    let mut undefined = Vec::new();
    let mut track = |name: &str, v: Option<f64>| {
        if v.is_none() {
            undefined.push(name.to_string());
        }
        v
    };
    let node_count = track("node_count", percent_change(Some(before.node_count), Some(after.node_count)));
    let edge_count = track("edge_count", percent_change(Some(before.edge_count), Some(after.edge_count)));
    let density = track("density", percent_change(Some(before.density), Some(after.density)));
    let diameter = track("diameter", percent_change(before.diameter, after.diameter));
    let avg_path_length = track("avg_path_length", percent_change(before.avg_path_length, after.avg_path_length));
    MetricDeltas { node_count, edge_count, density, diameter, avg_path_length, undefined }
}

/// Rounds half-up (toward +∞) at `decimals` places. The value is first
/// snapped to 9 decimals so binary noise such as `-19.999999999999996` does
/// not decide the rounding direction.
pub fn round_half_up(x: f64, decimals: i32) -> f64 {
    let snapped = (x * 1e9).round() / 1e9;
    let scale = 10f64.powi(decimals);
    (snapped * scale + 0.5).floor() / scale
}

/// Percentage with sign and one decimal, e.g. `-20.0%`, `+140.0%`.
pub fn format_percent(x: f64) -> String {
    let r = round_half_up(x, 1);
    let r = if r == 0.0 { 0.0 } else { r };
    if r > 0.0 {
        format!("+{r:.1}%")
    } else {
        format!("{r:.1}%")
    }
}
