//! Fixed-step fourth-order integration of the radial equation
//! u''(r) = (v(r) - E) u(r) over a list of segments whose boundaries are
//! aligned with the discontinuities of the potential, so no RK4 step ever
//! straddles a jump.

/// One integration segment with its own uniform step count.
#[derive(Debug, Clone, Copy)]
pub struct Segment {
    pub r0: f64,
    pub r1: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct RadialPoint {
    pub r: f64,
    pub u: f64,
    pub du: f64,
}

/// RK4 on (u, u') with k(r) = v(r) - e. Optionally records every node.
/// Renormalizes when |u| explodes (recorded points carry the running scale),
/// returning the total applied scale so callers that only need signs or
/// ratios can ignore it.
pub fn integrate<V: Fn(f64) -> f64>(
    v: &V,
    e: f64,
    segments: &[Segment],
    u0: f64,
    du0: f64,
    mut record: Option<&mut Vec<RadialPoint>>,
) -> (RadialPoint, f64) {
    let mut u = u0;
    let mut du = du0;
    let mut r = segments.first().map(|s| s.r0).unwrap_or(0.0);
    let mut log_scale = 0.0f64;
    if let Some(rec) = record.as_deref_mut() {
        rec.push(RadialPoint { r, u, du });
    }
    for seg in segments {
        let h = (seg.r1 - seg.r0) / seg.steps as f64;
        // evaluate the potential strictly inside the segment so endpoint
        // samples never land on the far side of a jump at the boundary
        let eps = 1e-9 * h;
        let lo = seg.r0 + eps;
        let hi = seg.r1 - eps;
        let ev = |x: f64| v(x.clamp(lo, hi)) - e;
        r = seg.r0;
        for i in 0..seg.steps {
            let k1u = du;
            let k1w = ev(r) * u;
            let rm = r + 0.5 * h;
            let km = ev(rm);
            let k2u = du + 0.5 * h * k1w;
            let k2w = km * (u + 0.5 * h * k1u);
            let k3u = du + 0.5 * h * k2w;
            let k3w = km * (u + 0.5 * h * k2u);
            let re = r + h;
            let ke = ev(re);
            let k4u = du + h * k3w;
            let k4w = ke * (u + h * k3u);
            u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
            du += h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
            r = seg.r0 + (i + 1) as f64 * h;
            let mag = u.abs().max(du.abs());
            if mag > 1e120 {
                u /= mag;
                du /= mag;
                log_scale += mag.ln();
            }
            if let Some(rec) = record.as_deref_mut() {
                rec.push(RadialPoint { r, u, du });
            }
        }
    }
    (RadialPoint { r, u, du }, log_scale)
}

/// Interior sign changes of u along recorded nodes (zeros touching the
/// endpoints excluded).
pub fn count_nodes(points: &[RadialPoint]) -> usize {
    let mut nodes = 0;
    let mut prev = 0.0f64;
    for p in points.iter().skip(1) {
        // skip the u(0)=0 start
        if p.u != 0.0 {
            if prev != 0.0 && p.u.signum() != prev.signum() {
                nodes += 1;
            }
            prev = p.u;
        }
    }
    nodes
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_solution_stays_linear() {
        let segs = [Segment {
            r0: 0.0,
            r1: 2.0,
            steps: 128,
        }];
        let (end, _) = integrate(&|_| 0.0, 0.0, &segs, 0.0, 1.0, None);
        assert!((end.u - 2.0).abs() < 1e-12);
        assert!((end.du - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_barrier_matches_sinh() {
        let kappa = 1.7f64;
        let segs = [Segment {
            r0: 0.0,
            r1: 1.0,
            steps: 2048,
        }];
        let (end, _) = integrate(&|_| kappa * kappa, 0.0, &segs, 0.0, 1.0, None);
        let expect = (kappa).sinh() / kappa;
        assert!((end.u - expect).abs() < 1e-10, "{} vs {expect}", end.u);
        assert!((end.du - kappa.cosh()).abs() < 1e-10);
    }

    #[test]
    fn node_counting_sees_oscillations() {
        // u'' = -k² u has zeros every π/k
        let k = 3.0f64;
        let mut rec = Vec::new();
        let segs = [Segment {
            r0: 0.0,
            r1: 2.0,
            steps: 4096,
        }];
        integrate(&|_| -k * k, 0.0, &segs, 0.0, 1.0, Some(&mut rec));
        let expect = (2.0 * k / std::f64::consts::PI) as usize;
        assert_eq!(count_nodes(&rec), expect);
    }
}
