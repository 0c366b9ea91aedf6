use serde::{Deserialize, Serialize};

use crate::metric::EvalReport;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricDelta {
    pub metric: String,
    pub a: Option<f64>,
    pub b: Option<f64>,
    /// `b − a` when both are present.
    pub delta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub value: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub rows: Vec<MetricDelta>,
    pub verdicts: Vec<Verdict>,
}

/// Per-metric deltas from `a` to `b`, with trend verdicts when η or δ moved.
pub fn compare(a: &EvalReport, b: &EvalReport) -> Comparison {
    let pairs = [
        ("hausdorff", a.hausdorff, b.hausdorff),
        ("gh_lower", a.gh_lower, b.gh_lower),
        ("gh_upper", a.gh_upper, b.gh_upper),
        ("n_points", Some(a.n_points as f64), Some(b.n_points as f64)),
        ("n_truth", Some(a.n_truth as f64), Some(b.n_truth as f64)),
        ("eta", Some(a.eta), Some(b.eta)),
        ("delta", Some(a.delta), Some(b.delta)),
        ("J", Some(a.j as f64), Some(b.j as f64)),
    ];
    let rows = pairs
        .iter()
        .map(|&(m, x, y)| MetricDelta {
            metric: m.into(),
            a: x,
            b: y,
            delta: x.zip(y).map(|(x, y)| y - x),
        })
        .collect();
    let mut verdicts = Vec::new();
    if let (Some(ha), Some(hb)) = (a.hausdorff, b.hausdorff) {
        if b.eta < a.eta {
            verdicts.push(Verdict { name: "hausdorff decreasing".into(), value: hb <= ha });
        }
        if b.delta > a.delta {
            verdicts.push(Verdict { name: "hausdorff within 2x of unperturbed".into(), value: (hb - ha).abs() <= 2.0 * ha });
        }
    }
    verdicts.push(Verdict { name: "both ok".into(), value: a.status == "ok" && b.status == "ok" });
    Comparison { rows, verdicts }
}
