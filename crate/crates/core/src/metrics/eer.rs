use crate::corpus::Label;

use super::MetricsError;

/// Error rates at one threshold, as fractions in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetPoint {
    pub threshold: f64,
    /// Fraction of spoof scores `>= threshold`.
    pub far: f64,
    /// Fraction of bona fide scores `< threshold`.
    pub frr: f64,
}

/// FAR/FRR at every unique score in ascending order, followed by a `+inf`
/// sentinel where FAR is 0 and FRR is 1.
pub fn det_points(scores: &[(f64, Label)]) -> Result<Vec<DetPoint>, MetricsError> {
    if let Some(index) = scores.iter().position(|(s, _)| !s.is_finite()) {
        return Err(MetricsError::NonFinite { index });
    }
    let nb = scores.iter().filter(|(_, l)| *l == Label::Bonafide).count();
    let ns = scores.len() - nb;
    if nb == 0 || ns == 0 {
        return Err(MetricsError::SingleClass { bonafide: nb, spoof: ns });
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut points = Vec::new();
    let (mut bona_below, mut spoof_below) = (0usize, 0usize);
    let mut i = 0;
    while i < sorted.len() {
        let tau = sorted[i].0;
        points.push(DetPoint {
            threshold: tau,
            far: (ns - spoof_below) as f64 / ns as f64,
            frr: bona_below as f64 / nb as f64,
        });
        while i < sorted.len() && sorted[i].0 == tau {
            match sorted[i].1 {
                Label::Bonafide => bona_below += 1,
                Label::Spoof => spoof_below += 1,
            }
            i += 1;
        }
    }
    points.push(DetPoint { threshold: f64::INFINITY, far: 0.0, frr: 1.0 });
    Ok(points)
}

/// Equal error rate in percent. FAR falls and FRR rises with the threshold;
/// the crossing is linearly interpolated between the bracketing thresholds.
pub fn compute_eer(scores: &[(f64, Label)]) -> Result<f64, MetricsError> {
    let points = det_points(scores)?;
    // the lowest threshold always has FAR = 1, FRR = 0
    let mut prev = points[0];
    for p in &points[1..] {
        let d = p.far - p.frr;
        if d <= 0.0 {
            let eer = if d == 0.0 {
                p.far
            } else {
                let d0 = prev.far - prev.frr;
                let t = d0 / (d0 - d);
                prev.far + t * (p.far - prev.far)
            };
            let eer = 100.0 * eer;
            if eer > 50.0 {
                log::warn!("EER {eer:.3}% is above 50%; scores may be inverted (higher must mean bona fide)");
            }
            return Ok(eer);
        }
        prev = *p;
    }
    unreachable!("sentinel point has FAR - FRR = -1")
}
