//! Real roots of polynomials of degree at most three.

use std::ops::Deref;

/// Up to three real roots, stored inline.
#[derive(Clone, Copy, Default)]
pub struct RootSet {
    vals: [f64; 3],
    len: usize,
}

impl RootSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, r: f64) {
        self.vals[self.len] = r;
        self.len += 1;
    }

    fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.vals[..self.len]
    }

    /// Sorts ascending, drops non-finite entries and exact duplicates.
    fn normalize(&mut self) {
        let mut out = RootSet::new();
        let v = self.as_mut_slice();
        v.sort_by(f64::total_cmp);
        for &r in v.iter() {
            if r.is_finite() && (out.len == 0 || out.vals[out.len - 1] != r) {
                out.push(r);
            }
        }
        *self = out;
    }
}

impl Deref for RootSet {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.vals[..self.len]
    }
}

impl std::fmt::Debug for RootSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.iter()).finish()
    }
}

impl PartialEq for RootSet {
    fn eq(&self, other: &Self) -> bool {
        **self == **other
    }
}

impl<const K: usize> From<[f64; K]> for RootSet {
    fn from(v: [f64; K]) -> Self {
        let mut r = RootSet::new();
        for x in v {
            r.push(x);
        }
        r
    }
}

/// Real roots of `c3 u^3 + c2 u^2 + c1 u + c0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CubicRoots {
    /// Sorted ascending. A double root is reported once.
    Finite(RootSet),
    /// The polynomial is identically zero.
    AllReals,
}

impl CubicRoots {
    pub fn roots(&self) -> &[f64] {
        match self {
            CubicRoots::Finite(r) => r,
            CubicRoots::AllReals => &[],
        }
    }
}

#[inline]
fn horner(c: [f64; 4], u: f64) -> f64 {
    ((c[0] * u + c[1]) * u + c[2]) * u + c[3]
}

#[inline]
fn horner_deriv(c: [f64; 4], u: f64) -> f64 {
    (3.0 * c[0] * u + 2.0 * c[1]) * u + c[2]
}

/// Closed-form roots (trigonometric or Cardano by discriminant sign, with
/// exact deflation of a zero constant term and fall-through to quadratic and
/// linear formulas), each followed by one Newton step that is kept only if
/// it reduces `|p|`.
pub fn cubic_real_roots(c3: f64, c2: f64, c1: f64, c0: f64) -> CubicRoots {
    if c3 == 0.0 && c2 == 0.0 && c1 == 0.0 && c0 == 0.0 {
        return CubicRoots::AllReals;
    }
    let coeffs = [c3, c2, c1, c0];
    let mut roots = if c0 == 0.0 {
        // u (c3 u^2 + c2 u + c1) = 0; keeps u = 0 exact.
        let mut r = RootSet::from([0.0]);
        if let CubicRoots::Finite(q) = quadratic_roots(c3, c2, c1) {
            for &x in q.iter() {
                r.push(x);
            }
        }
        r
    } else if c3 == 0.0 {
        match quadratic_roots(c2, c1, c0) {
            CubicRoots::Finite(q) => q,
            CubicRoots::AllReals => unreachable!("c0 != 0"),
        }
    } else {
        deflated_roots(coeffs, monic_cubic_roots(c2 / c3, c1 / c3, c0 / c3))
    };

    for r in roots.as_mut_slice() {
        if *r == 0.0 && c0 == 0.0 {
            continue;
        }
        let p = horner(coeffs, *r);
        let dp = horner_deriv(coeffs, *r);
        if dp != 0.0 {
            let cand = *r - p / dp;
            if cand.is_finite() && horner(coeffs, cand).abs() < p.abs() {
                *r = cand;
            }
        }
    }
    roots.normalize();
    CubicRoots::Finite(roots)
}

/// Keeps the largest closed-form root, which survives cancellation, and
/// recovers the others from the quotient quadratic. The division runs from
/// the constant term, which is stable for a large root. Falls back to the
/// closed-form roots when the quotient has no real pair.
fn deflated_roots(c: [f64; 4], roots: RootSet) -> RootSet {
    let mut big = roots.iter().copied().fold(0.0, |m: f64, r| if r.abs() > m.abs() { r } else { m });
    for _ in 0..4 {
        let (p, dp) = (horner(c, big), horner_deriv(c, big));
        if dp == 0.0 {
            break;
        }
        let cand = big - p / dp;
        if !(cand.is_finite() && horner(c, cand).abs() < p.abs()) {
            break;
        }
        big = cand;
    }
    let e0 = -c[3] / big;
    let e1 = (e0 - c[2]) / big;
    let e2 = (e1 - c[1]) / big;
    match quadratic_roots(e2, e1, e0) {
        CubicRoots::Finite(q) if q.len() == 2 => RootSet::from([big, q[0], q[1]]),
        _ => roots,
    }
}

/// Roots of `a u^2 + b u + c`, cancellation-free form.
pub fn quadratic_roots(a: f64, b: f64, c: f64) -> CubicRoots {
    if a == 0.0 {
        if b == 0.0 {
            return if c == 0.0 { CubicRoots::AllReals } else { CubicRoots::Finite(RootSet::new()) };
        }
        return CubicRoots::Finite(RootSet::from([-c / b]));
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return CubicRoots::Finite(RootSet::new());
    }
    if disc == 0.0 {
        return CubicRoots::Finite(RootSet::from([-b / (2.0 * a)]));
    }
    // signum(+0.0) == 1.0, so q != 0 whenever disc > 0.
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let (r1, r2) = (q / a, c / q);
    CubicRoots::Finite(RootSet::from(if r1 <= r2 { [r1, r2] } else { [r2, r1] }))
}

/// Roots of `u^3 + a u^2 + b u + c`.
fn monic_cubic_roots(a: f64, b: f64, c: f64) -> RootSet {
    let shift = a / 3.0;
    let q = (a * a - 3.0 * b) / 9.0;
    let r = (2.0 * a * a * a - 9.0 * a * b + 27.0 * c) / 54.0;
    let r2 = r * r;
    let q3 = q * q * q;
    let gap = r2 - q3;
    let scale = r2.abs().max(q3.abs());
    if gap < 0.0 {
        let sq = q.sqrt();
        let theta = (r / (sq * sq * sq)).clamp(-1.0, 1.0).acos();
        // cos(t +- 2pi/3) from cos t and sin t
        let (sin_t, cos_t) = (theta / 3.0).sin_cos();
        let half_sqrt3 = 0.5 * 3f64.sqrt();
        let m = -2.0 * sq;
        RootSet::from([
            m * cos_t - shift,
            m * (-0.5 * cos_t - half_sqrt3 * sin_t) - shift,
            m * (-0.5 * cos_t + half_sqrt3 * sin_t) - shift,
        ])
    } else {
        let big = -r.signum() * (r.abs() + gap.sqrt()).cbrt();
        let small = if big != 0.0 { q / big } else { 0.0 };
        let mut roots = RootSet::from([big + small - shift]);
        if gap <= 64.0 * f64::EPSILON * scale {
            // Discriminant at rounding level: the complex pair has collapsed
            // onto a real double root.
            roots.push(-0.5 * (big + small) - shift);
        }
        roots
    }
}
