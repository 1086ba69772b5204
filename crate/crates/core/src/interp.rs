//! Shape-preserving cubic interpolation (Fritsch–Carlson) on the radial mesh.
//!
//! Monotone data stays monotone under this interpolant, so resampled
//! profiles cannot overshoot near the origin bubble; overshoot would
//! corrupt the guarded exponentials of the planar model.

/// Piecewise cubic Hermite interpolant with Fritsch–Carlson slopes.
pub(crate) struct MonotoneCubic<'a> {
    x: &'a [f64],
    y: &'a [f64],
    d: Vec<f64>,
}

impl<'a> MonotoneCubic<'a> {
    /// Build over strictly increasing abscissae starting at 0. The axis
    /// derivative is pinned to zero: radial profiles are even in r.
    pub fn new(x: &'a [f64], y: &'a [f64]) -> Self {
        let n = x.len();
        debug_assert!(n >= 3 && y.len() == n);
        let mut h = Vec::with_capacity(n - 1);
        let mut delta = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            let hi = x[i + 1] - x[i];
            h.push(hi);
            delta.push((y[i + 1] - y[i]) / hi);
        }
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] > 0.0 {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        // Even extension at the origin.
        d[0] = 0.0;
        // One-sided shape-limited slope at the outer end.
        let dn = ((2.0 * h[n - 2] + h[n - 3]) * delta[n - 2] - h[n - 2] * delta[n - 3])
            / (h[n - 2] + h[n - 3]);
        d[n - 1] = if dn * delta[n - 2] <= 0.0 {
            0.0
        } else if delta[n - 2] * delta[n - 3] <= 0.0 && dn.abs() > 3.0 * delta[n - 2].abs() {
            3.0 * delta[n - 2]
        } else {
            dn
        };
        MonotoneCubic { x, y, d }
    }

    /// Evaluate at `t`; zero beyond the last node.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t >= self.x[n - 1] {
            return if t == self.x[n - 1] { self.y[n - 1] } else { 0.0 };
        }
        if t <= self.x[0] {
            return self.y[0];
        }
        let mut lo = 0usize;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.x[mid] <= t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        self.eval_on_segment(lo, t)
    }

    /// Evaluate a batch of ascending query points in one left-to-right sweep.
    pub fn eval_ascending(&self, queries: impl Iterator<Item = f64>) -> Vec<f64> {
        let n = self.x.len();
        let mut seg = 0usize;
        let mut out = Vec::new();
        for t in queries {
            if t >= self.x[n - 1] {
                out.push(if t == self.x[n - 1] { self.y[n - 1] } else { 0.0 });
                continue;
            }
            while seg + 2 < n && self.x[seg + 1] <= t {
                seg += 1;
            }
            out.push(self.eval_on_segment(seg, t));
        }
        out
    }

    fn eval_on_segment(&self, i: usize, t: f64) -> f64 {
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y[i] + h * h10 * self.d[i] + h01 * self.y[i + 1] + h * h11 * self.d[i + 1]
    }
}
