//! Cubic Hermite dense output and level-crossing search on one step.

/// One component of one accepted step: endpoint values and derivatives.
#[derive(Debug, Clone, Copy)]
pub(crate) struct HermiteSeg {
    pub t0: f64,
    pub h: f64,
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl HermiteSeg {
    pub fn new(t0: f64, t1: f64, y0: f64, y1: f64, f0: f64, f1: f64) -> Self {
        let h = t1 - t0;
        HermiteSeg { t0, h, a: y0, b: h * f0, c: 3.0 * (y1 - y0) - h * (2.0 * f0 + f1), d: 2.0 * (y0 - y1) + h * (f0 + f1) }
    }

    #[inline]
    pub fn at_theta(&self, th: f64) -> f64 {
        self.a + th * (self.b + th * (self.c + th * self.d))
    }

    #[inline]
    pub fn time(&self, th: f64) -> f64 {
        self.t0 + th * self.h
    }

    /// Interior critical points in `(0, 1)`, ascending.
    fn critical_points(&self) -> Vec<f64> {
        // p'(θ) = b + 2cθ + 3dθ²
        let (qa, qb, qc) = (3.0 * self.d, 2.0 * self.c, self.b);
        let mut out = Vec::with_capacity(2);
        let scale = qa.abs().max(qb.abs()).max(qc.abs());
        if scale == 0.0 {
            return out;
        }
        if qa.abs() <= 1e-14 * scale {
            if qb != 0.0 {
                out.push(-qc / qb);
            }
        } else {
            let disc = qb * qb - 4.0 * qa * qc;
            if disc >= 0.0 {
                let sq = disc.sqrt();
                // numerically stable pair
                let q = -0.5 * (qb + qb.signum() * sq);
                if q != 0.0 {
                    out.push(q / qa);
                    out.push(qc / q);
                } else {
                    out.push(0.0);
                }
            }
        }
        out.retain(|&r| r > 0.0 && r < 1.0);
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup();
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Hit {
    Crossing { time: f64, direction: i8 },
    Graze { time: f64, distance: f64 },
}

/// Crossings of `level` on one step, split at the cubic's extrema so that
/// each piece is monotone; the sign predicate is `v > level`, matching the
/// discretization. Interior extrema within `graze_tol` of the level without
/// a sign change are reported as grazes.
pub(crate) fn scan_step(seg: &HermiteSeg, level: f64, time_tol: f64, value_tol: f64, graze_tol: f64) -> Vec<Hit> {
    let above = |v: f64| v > level;
    let crit = seg.critical_points();
    let mut knots = Vec::with_capacity(crit.len() + 2);
    knots.push(0.0);
    knots.extend_from_slice(&crit);
    knots.push(1.0);
    let vals: Vec<f64> = knots.iter().map(|&th| seg.at_theta(th)).collect();
    let mut hits = Vec::new();
    let mut changed = vec![false; knots.len() - 1];
    for k in 0..knots.len() - 1 {
        let (mut lo, mut hi) = (knots[k], knots[k + 1]);
        let (alo, ahi) = (above(vals[k]), above(vals[k + 1]));
        if alo == ahi {
            continue;
        }
        changed[k] = true;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if above(seg.at_theta(mid)) == alo {
                lo = mid;
            } else {
                hi = mid;
            }
            // half the value tolerance leaves room for the time -> theta round trip
            if (hi - lo) * seg.h.abs() < time_tol && (seg.at_theta(hi) - level).abs() < 0.5 * value_tol {
                break;
            }
        }
        // `hi` is the first point on the new side
        hits.push(Hit::Crossing { time: seg.time(hi), direction: if ahi { 1 } else { -1 } });
    }
    for (k, &th) in crit.iter().enumerate() {
        // knot index k+1; adjacent pieces k and k+1
        let dist = (vals[k + 1] - level).abs();
        if dist < graze_tol && !changed[k] && !changed[k + 1] {
            hits.push(Hit::Graze { time: seg.time(th), distance: dist });
        }
    }
    hits
}
