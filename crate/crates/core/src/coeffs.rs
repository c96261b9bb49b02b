//! Splitting coefficients and their order conditions.
//!
//! A scheme with `p` stages advances one step as
//!
//! ```text
//! S = B^{b_p dt} A^{a_p dt} ... B^{b_1 dt} A^{a_1 dt}
//! ```
//!
//! so `A^{a_1 dt}` acts first. Both coefficient lists always hold `p` entries;
//! families that end on an `A` substep store `b_p = 0`.
//!
//! The third-order family is parameterised by `omega = b_3`. Two closed-form
//! branches exist, real for `omega > 1/4` and for `omega <= omega_*`, where
//! `omega_* ~ -1.217` is the real root of `D(omega) / (4 omega - 1)`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Distance from `omega = 1/3` (both branches) and `omega = 1` (positive
/// branch) inside which the third-order family is not evaluated.
pub const SINGULAR_RADIUS: f64 = 1e-6;

/// Bounded windows in which every coefficient of a third-order branch lies in
/// `[-1, 1]` (endpoints truncated to five digits).
pub const POSITIVE_BOUNDED_WINDOW: (f64, f64) = (0.26376, 0.29167);
pub const NEGATIVE_BOUNDED_WINDOWS: [(f64, f64); 2] = [(0.26376, 0.27362), (0.5, 1.0)];

#[derive(Debug, Clone, PartialEq)]
pub struct SplitCoefficients {
    a: Vec<f64>,
    b: Vec<f64>,
    claimed_order: u8,
    label: String,
}

impl SplitCoefficients {
    /// Validates stage counts and the order conditions implied by
    /// `claimed_order` (up to third order; fourth-order schemes are checked
    /// against the third-order residuals).
    pub fn new(a: Vec<f64>, b: Vec<f64>, claimed_order: u8, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if a.is_empty() || a.len() != b.len() {
            return Err(Error::InvalidParameter(format!(
                "{label}: need p >= 1 entries in both lists, got {} and {}",
                a.len(),
                b.len()
            )));
        }
        if !(1..=4).contains(&claimed_order) {
            return Err(Error::InvalidParameter(format!(
                "{label}: claimed order {claimed_order} outside 1..=4"
            )));
        }
        if a.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("{label}: non-finite coefficient")));
        }
        let c = Self {
            a,
            b,
            claimed_order,
            label,
        };
        // Residuals are cubic in the coefficients, so rounding grows with them.
        let scale = c.max_abs().max(1.0).powi(3);
        let res = order_residuals(&c);
        let worst = res.max_through(claimed_order.min(3));
        if worst > 1e-12 * scale {
            return Err(Error::InvalidParameter(format!(
                "{}: order-{} conditions violated (max residual {worst:e})",
                c.label,
                c.claimed_order.min(3)
            )));
        }
        Ok(c)
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn stages(&self) -> usize {
        self.a.len()
    }

    pub fn claimed_order(&self) -> u8 {
        self.claimed_order
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `max{|a_j|, |b_j|}`.
    pub fn max_abs(&self) -> f64 {
        self.a.iter().chain(&self.b).fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.a.iter().chain(&self.b).copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.a.iter().chain(&self.b).copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn has_backward_substep(&self) -> bool {
        self.a.iter().chain(&self.b).any(|&v| v < 0.0)
    }

    /// Interleaved `(a_1, b_1, a_2, b_2, ...)`.
    pub fn interleaved(&self) -> Vec<f64> {
        self.a.iter().zip(&self.b).flat_map(|(&a, &b)| [a, b]).collect()
    }
}

/// Residuals of the first-, second- and third-order conditions, in the order
/// `(sum a - 1, sum b - 1, second_a, second_b, third_a, third_b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderResiduals(pub [f64; 6]);

impl OrderResiduals {
    /// Largest magnitude among the residuals required for `order`.
    pub fn max_through(&self, order: u8) -> f64 {
        let n = match order {
            0 => 0,
            1 => 2,
            2 => 4,
            _ => 6,
        };
        self.0[..n].iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub fn order_residuals(c: &SplitCoefficients) -> OrderResiduals {
    let mut r = [0.0; 6];
    r[0] = c.a.iter().sum::<f64>() - 1.0;
    r[1] = c.b.iter().sum::<f64>() - 1.0;

    // b_before = sum_{k<j} b_k, a_through = sum_{k<=j} a_k
    let mut b_before = 0.0;
    let mut a_through = 0.0;
    let (mut s2a, mut s2b, mut s3a, mut s3b) = (0.0, 0.0, 0.0, 0.0);
    for (&a, &b) in c.a.iter().zip(&c.b) {
        a_through += a;
        s2a += a * b_before;
        s3a += a * b_before * b_before;
        s2b += b * a_through;
        s3b += b * a_through * a_through;
        b_before += b;
    }
    r[2] = s2a - 0.5;
    r[3] = s2b - 0.5;
    r[4] = s3a - 1.0 / 3.0;
    r[5] = s3b - 1.0 / 3.0;
    OrderResiduals(r)
}

/// Lie splitting `B^{dt} A^{dt}`.
pub fn first_order() -> SplitCoefficients {
    SplitCoefficients {
        a: vec![1.0],
        b: vec![1.0],
        claimed_order: 1,
        label: "S1".into(),
    }
}

/// `B^{(1-w)dt} A^{dt/(2w)} B^{w dt} A^{(1-1/(2w))dt}`; `w = 1` is Strang.
pub fn second_order_family(omega: f64) -> Result<SplitCoefficients> {
    if omega == 0.0 || !omega.is_finite() {
        return Err(Error::InvalidOmega {
            omega,
            reason: "second-order family needs a finite nonzero omega".into(),
        });
    }
    let a2 = 1.0 / (2.0 * omega);
    Ok(SplitCoefficients {
        a: vec![1.0 - a2, a2],
        b: vec![omega, 1.0 - omega],
        claimed_order: 2,
        label: if omega == 1.0 {
            "S2".into()
        } else {
            format!("S2(w={omega})")
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Positive,
    Negative,
}

impl Branch {
    pub fn sign(&self) -> char {
        match self {
            Branch::Positive => '+',
            Branch::Negative => '-',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchSolution {
    pub omega: f64,
    pub branch: Branch,
    pub coefficients: SplitCoefficients,
    pub discriminant: f64,
}

/// `D(w) = (w-1)^2 (4w-1)^2 + 12 (4w-1) (w-1/3)^2`.
pub fn discriminant(omega: f64) -> f64 {
    let s = 4.0 * omega - 1.0;
    let u = omega - 1.0;
    let v = omega - 1.0 / 3.0;
    u * u * s * s + 12.0 * s * v * v
}

/// Real root of `D(w) / (4w - 1) = (w-1)^2 (4w-1) + 12 (w-1/3)^2`, the upper
/// end of the negative-omega real region.
pub fn omega_star() -> f64 {
    let g = |w: f64| {
        let u = w - 1.0;
        let v = w - 1.0 / 3.0;
        u * u * (4.0 * w - 1.0) + 12.0 * v * v
    };
    bisect(g, -2.0, -1.0, 1e-15).expect("cubic changes sign on [-2, -1]")
}

fn invalid(omega: f64, reason: impl Into<String>) -> Error {
    Error::InvalidOmega {
        omega,
        reason: reason.into(),
    }
}

/// Third-order coefficients with `b_3 = omega` on the requested branch.
pub fn third_order_family(omega: f64, branch: Branch) -> Result<BranchSolution> {
    let (a, b, d) = third_order_raw(omega, branch)?;
    let label = format!("S3{}(w={omega})", branch.sign());
    Ok(BranchSolution {
        omega,
        branch,
        coefficients: SplitCoefficients {
            a: a.to_vec(),
            b: b.to_vec(),
            claimed_order: 3,
            label,
        },
        discriminant: d,
    })
}

fn third_order_raw(omega: f64, branch: Branch) -> Result<([f64; 3], [f64; 3], f64)> {
    if !omega.is_finite() {
        return Err(invalid(omega, "not finite"));
    }
    let d = discriminant(omega);
    if d < 0.0 {
        return Err(invalid(
            omega,
            format!("D(omega) = {d:e} < 0; real solutions need omega > 1/4 or omega <= omega_*"),
        ));
    }
    if omega == 0.25 {
        return Err(invalid(omega, "singular point 1/4 (4 omega - 1 = 0)"));
    }
    if (omega - 1.0 / 3.0).abs() < SINGULAR_RADIUS {
        return Err(invalid(omega, "singular point 1/3 (a_2 = (4w-1)/(2(3w-1)) diverges)"));
    }
    if branch == Branch::Positive && (omega - 1.0).abs() < SINGULAR_RADIUS {
        return Err(invalid(omega, "singular point 1 on the positive branch"));
    }
    if branch == Branch::Negative && omega == 1.0 {
        // removable singularity, closed-form limit
        return Ok(([7.0 / 24.0, 0.75, -1.0 / 24.0], [2.0 / 3.0, -2.0 / 3.0, 1.0], d));
    }

    let s = 4.0 * omega - 1.0;
    let t = 3.0 * omega - 1.0;
    let root = d.sqrt();
    let a2 = s / (2.0 * t);
    let b1 = match branch {
        Branch::Positive => 0.5 * (1.0 - omega) - root / (2.0 * s),
        Branch::Negative => 0.5 * (1.0 - omega) + root / (2.0 * s),
    };

    // a_3 = (1/2 - b_1 a_2) / (1 - w) = -a_2/2 + N / (2c(1 - w)), c = 2(3w-1),
    // N = c + sqrt(D) on the positive branch and c - sqrt(D) on the negative.
    // N_+ N_- = (1 - w) E, so when N cancels we use E / (2c N_conj) instead.
    let c = 2.0 * t;
    let (n, n_conj) = match branch {
        Branch::Positive => (c + root, c - root),
        Branch::Negative => (c - root, c + root),
    };
    let cancels = match branch {
        Branch::Positive => c < 0.0,
        Branch::Negative => c > 0.0,
    };
    let a3 = if cancels {
        let e = 16.0 / 3.0 * t * t - (1.0 - omega) * s * s;
        -0.5 * a2 + e / (2.0 * c * n_conj)
    } else {
        -0.5 * a2 + n / (2.0 * c * (1.0 - omega))
    };
    let a1 = 1.0 - a2 - a3;
    let b2 = 1.0 - b1 - omega;
    Ok(([a1, a2, a3], [b1, b2, omega], d))
}

/// The coefficient equality that selects a special omega.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecialPoint {
    /// Positive branch, `a_1 = b_2`.
    X,
    /// Negative branch, `b_1 = a_3`.
    Y,
    /// Negative branch, `a_2 = b_3`.
    Z,
}

impl SpecialPoint {
    pub const ALL: [SpecialPoint; 3] = [SpecialPoint::X, SpecialPoint::Y, SpecialPoint::Z];

    pub fn branch(&self) -> Branch {
        match self {
            SpecialPoint::X => Branch::Positive,
            SpecialPoint::Y | SpecialPoint::Z => Branch::Negative,
        }
    }

    pub fn window(&self) -> (f64, f64) {
        match self {
            SpecialPoint::X => POSITIVE_BOUNDED_WINDOW,
            SpecialPoint::Y => NEGATIVE_BOUNDED_WINDOWS[0],
            SpecialPoint::Z => NEGATIVE_BOUNDED_WINDOWS[1],
        }
    }

    fn condition(&self, omega: f64) -> Result<f64> {
        let (a, b, _) = third_order_raw(omega, self.branch())?;
        Ok(match self {
            SpecialPoint::X => a[0] - b[1],
            SpecialPoint::Y => b[0] - a[2],
            SpecialPoint::Z => a[1] - b[2],
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            SpecialPoint::X => "S3X",
            SpecialPoint::Y => "S3Y",
            SpecialPoint::Z => "S3Z",
        }
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

fn max_abs_at(omega: f64, branch: Branch) -> Result<f64> {
    let (a, b, _) = third_order_raw(omega, branch)?;
    Ok(a.iter().chain(&b).fold(0.0, |m: f64, v| m.max(v.abs())))
}

/// Locates one special omega: scans its bounded window for a sign change of
/// the defining condition, bisects down to adjacent floating-point values,
/// then checks that `max{|a_j|, |b_j|}` has a local minimum there.
pub fn locate_special(point: SpecialPoint) -> Result<BranchSolution> {
    let (lo, hi) = point.window();
    let branch = point.branch();
    let samples = 256;
    let grid: Vec<f64> = (0..=samples)
        .map(|i| lo + (hi - lo) * i as f64 / samples as f64)
        .collect();
    let values: Vec<Option<f64>> = grid.iter().map(|&w| point.condition(w).ok()).collect();

    let mut found = None;
    for i in 0..samples {
        if let (Some(f0), Some(f1)) = (values[i], values[i + 1]) {
            if f0 == 0.0 || f0.signum() != f1.signum() {
                let root =
                    bisect(|w| point.condition(w).unwrap_or(f64::NAN), grid[i], grid[i + 1], 0.0).ok_or_else(|| {
                        Error::ConvergenceFailure(format!("{}: bisection lost its bracket", point.name()))
                    })?;
                found = Some(root);
                break;
            }
        }
    }
    let omega = found.ok_or_else(|| {
        Error::ConvergenceFailure(format!(
            "{}: no sign change of the defining condition in [{lo}, {hi}]",
            point.name()
        ))
    })?;

    let here = max_abs_at(omega, branch)?;
    let left = max_abs_at(omega - 1e-3, branch)?;
    let right = max_abs_at(omega + 1e-3, branch)?;
    if !(here <= left && here <= right) {
        return Err(Error::ConvergenceFailure(format!(
            "{}: omega = {omega} is not a local minimum of max|coef| ({left}, {here}, {right})",
            point.name()
        )));
    }

    let mut sol = third_order_family(omega, branch)?;
    sol.coefficients.label = point.name().into();
    Ok(sol)
}

/// `(omega_X^+, omega_Y^-, omega_Z^-)` with their coefficients.
pub fn special_omegas() -> Result<[BranchSolution; 3]> {
    Ok([
        locate_special(SpecialPoint::X)?,
        locate_special(SpecialPoint::Y)?,
        locate_special(SpecialPoint::Z)?,
    ])
}

/// Flattens `T^{w_n dt} ... T^{w_1 dt}` with the Strang step
/// `T^{dt} = A^{dt/2} B^{dt} A^{dt/2}`, merging adjacent `A` substeps.
/// `weights` are listed in application order.
pub fn strang_composition(weights: &[f64], claimed_order: u8, label: impl Into<String>) -> Result<SplitCoefficients> {
    if weights.is_empty() {
        return Err(Error::InvalidParameter("empty composition".into()));
    }
    let n = weights.len();
    let mut a = Vec::with_capacity(n + 1);
    let mut b = Vec::with_capacity(n + 1);
    let mut carry = 0.0;
    for &w in weights {
        a.push(carry + 0.5 * w);
        b.push(w);
        carry = 0.5 * w;
    }
    a.push(carry);
    b.push(0.0);
    SplitCoefficients::new(a, b, claimed_order, label)
}

/// `1 / (2 - 2^{1/3})`.
pub fn omega_u() -> f64 {
    1.0 / (2.0 - 2f64.cbrt())
}

/// `1 / (4 - 4^{1/3})`.
pub fn omega_v() -> f64 {
    1.0 / (4.0 - 4f64.cbrt())
}

/// Seven-evaluation symmetric fourth-order scheme `T^{w} T^{1-2w} T^{w}`.
pub fn fourth_order_u() -> SplitCoefficients {
    let w = omega_u();
    let h = 0.5 * (1.0 - w);
    SplitCoefficients {
        a: vec![0.5 * w, h, h, 0.5 * w],
        b: vec![w, 1.0 - 2.0 * w, w, 0.0],
        claimed_order: 4,
        label: "S4U".into(),
    }
}

/// Eleven-evaluation symmetric fourth-order scheme
/// `T^{w} T^{w} T^{1-4w} T^{w} T^{w}`; smaller backward substeps than
/// [`fourth_order_u`].
pub fn fourth_order_v() -> SplitCoefficients {
    let w = omega_v();
    let h = 0.5 * (1.0 - 3.0 * w);
    SplitCoefficients {
        a: vec![0.5 * w, w, h, h, w, 0.5 * w],
        b: vec![w, w, 1.0 - 4.0 * w, w, w, 0.0],
        claimed_order: 4,
        label: "S4V".into(),
    }
}

/// Scheme identifiers accepted by the CLI and config files.
///
/// Text forms: `S1`, `S2`, `S2:<w>`, `S3X`, `S3Y`, `S3Z`, `S3+:<w>`,
/// `S3-:<w>`, `S4U`, `S4V` (case-insensitive).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchemeId {
    S1,
    S2(f64),
    S3X,
    S3Y,
    S3Z,
    S3(f64, Branch),
    S4U,
    S4V,
}

impl SchemeId {
    pub fn claimed_order(&self) -> u8 {
        match self {
            SchemeId::S1 => 1,
            SchemeId::S2(_) => 2,
            SchemeId::S3X | SchemeId::S3Y | SchemeId::S3Z | SchemeId::S3(..) => 3,
            SchemeId::S4U | SchemeId::S4V => 4,
        }
    }

    /// The schemes used in the convergence studies.
    pub fn standard_set() -> Vec<SchemeId> {
        vec![
            SchemeId::S1,
            SchemeId::S2(1.0),
            SchemeId::S3X,
            SchemeId::S3Y,
            SchemeId::S3Z,
            SchemeId::S4U,
            SchemeId::S4V,
        ]
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeId::S1 => write!(f, "S1"),
            SchemeId::S2(w) if *w == 1.0 => write!(f, "S2"),
            SchemeId::S2(w) => write!(f, "S2:{w}"),
            SchemeId::S3X => write!(f, "S3X"),
            SchemeId::S3Y => write!(f, "S3Y"),
            SchemeId::S3Z => write!(f, "S3Z"),
            SchemeId::S3(w, b) => write!(f, "S3{}:{w}", b.sign()),
            SchemeId::S4U => write!(f, "S4U"),
            SchemeId::S4V => write!(f, "S4V"),
        }
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase();
        let unknown = || Error::UnknownScheme(s.to_string());
        let param = |rest: &str| -> Result<f64> { rest.parse::<f64>().map_err(|_| unknown()) };
        Ok(match upper.as_str() {
            "S1" => SchemeId::S1,
            "S2" => SchemeId::S2(1.0),
            "S3X" => SchemeId::S3X,
            "S3Y" => SchemeId::S3Y,
            "S3Z" => SchemeId::S3Z,
            "S4U" => SchemeId::S4U,
            "S4V" => SchemeId::S4V,
            other => {
                if let Some(rest) = other.strip_prefix("S2:") {
                    SchemeId::S2(param(rest)?)
                } else if let Some(rest) = other.strip_prefix("S3+:") {
                    SchemeId::S3(param(rest)?, Branch::Positive)
                } else if let Some(rest) = other.strip_prefix("S3-:") {
                    SchemeId::S3(param(rest)?, Branch::Negative)
                } else {
                    return Err(unknown());
                }
            }
        })
    }
}

pub fn named_scheme(id: SchemeId) -> Result<SplitCoefficients> {
    match id {
        SchemeId::S1 => Ok(first_order()),
        SchemeId::S2(w) => second_order_family(w),
        SchemeId::S3X => Ok(locate_special(SpecialPoint::X)?.coefficients),
        SchemeId::S3Y => Ok(locate_special(SpecialPoint::Y)?.coefficients),
        SchemeId::S3Z => Ok(locate_special(SpecialPoint::Z)?.coefficients),
        SchemeId::S3(w, b) => Ok(third_order_family(w, b)?.coefficients),
        SchemeId::S4U => Ok(fourth_order_u()),
        SchemeId::S4V => Ok(fourth_order_v()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn residuals_of_lie_splitting() {
        let r = order_residuals(&first_order()).0;
        let want = [0.0, 0.0, -0.5, 0.5, -1.0 / 3.0, 2.0 / 3.0];
        assert!(close(&r, &want, 1e-15), "{r:?}");
    }

    #[test]
    fn strang_passes_second_order_only() {
        let c = second_order_family(1.0).unwrap();
        assert_eq!(c.a(), &[0.5, 0.5]);
        assert_eq!(c.b(), &[1.0, 0.0]);
        let r = order_residuals(&c);
        assert_eq!(r.max_through(2), 0.0);
        assert!(r.max_through(3) > 0.01);
    }

    #[test]
    fn second_order_family_values() {
        let c = second_order_family(0.5).unwrap();
        assert_eq!((c.a(), c.b()), (&[0.0, 1.0][..], &[0.5, 0.5][..]));
        let c = second_order_family(0.25).unwrap();
        assert_eq!((c.a(), c.b()), (&[-1.0, 2.0][..], &[0.25, 0.75][..]));
        assert_eq!(order_residuals(&c).max_through(2), 0.0);
        assert!(matches!(second_order_family(0.0), Err(Error::InvalidOmega { .. })));
    }

    #[test]
    fn discriminant_and_real_region() {
        assert!((discriminant(0.0) + 1.0 / 3.0).abs() < 1e-15);
        let ws = omega_star();
        assert!((ws + 1.217).abs() < 1e-3, "{ws}");
        assert!(discriminant(ws - 1e-6) > 0.0);
        assert!(discriminant(ws + 1e-6) < 0.0);
        assert!(third_order_family(ws - 0.1, Branch::Negative).is_ok());
        assert!(third_order_family(0.0, Branch::Positive).is_err());
    }

    #[test]
    fn singular_points_are_rejected() {
        for b in [Branch::Positive, Branch::Negative] {
            assert!(third_order_family(0.25, b).is_err());
            assert!(third_order_family(1.0 / 3.0, b).is_err());
            assert!(third_order_family(1.0 / 3.0 + 5e-7, b).is_err());
        }
        assert!(third_order_family(1.0, Branch::Positive).is_err());
        assert!(third_order_family(1.0 + 1e-7, Branch::Positive).is_err());
        assert!(third_order_family(1.0, Branch::Negative).is_ok());
    }

    #[test]
    fn negative_branch_limit_at_one() {
        let s = third_order_family(1.0, Branch::Negative).unwrap();
        let c = &s.coefficients;
        assert_eq!(c.a(), &[7.0 / 24.0, 0.75, -1.0 / 24.0]);
        assert_eq!(c.b(), &[2.0 / 3.0, -2.0 / 3.0, 1.0]);
        let near = third_order_family(1.0 - 1e-9, Branch::Negative).unwrap();
        assert!(close(&near.coefficients.interleaved(), &c.interleaved(), 1e-6));
    }

    #[test]
    fn cancellation_free_forms_agree_with_direct_formula() {
        for &w in &[0.27, 0.3, 0.45, 0.8, 1.5, 2.5, -1.5, -3.0] {
            for branch in [Branch::Positive, Branch::Negative] {
                let (a, b, d) = third_order_raw(w, branch).unwrap();
                let s = 4.0 * w - 1.0;
                let sign = if branch == Branch::Positive { -1.0 } else { 1.0 };
                let b1 = 0.5 * (1.0 - w) + sign * d.sqrt() / (2.0 * s);
                let a2 = s / (2.0 * (3.0 * w - 1.0));
                let a3 = (0.5 - b1 * a2) / (1.0 - w);
                assert!((a[2] - a3).abs() < 1e-12 * a3.abs().max(1.0), "w={w} {branch:?}");
                assert!((b[0] - b1).abs() < 1e-14 * b1.abs().max(1.0));
            }
        }
    }

    #[test]
    fn degenerates_near_one_quarter() {
        for branch in [Branch::Positive, Branch::Negative] {
            let s = third_order_family(0.25 + 1e-8, branch).unwrap();
            let (a, b) = (s.coefficients.a(), s.coefficients.b());
            assert!(a[1].abs() < 1e-6);
            assert!((a[0] - 1.0 / 3.0).abs() < 1e-4);
            assert!((b[0] + b[1] - 0.75).abs() < 1e-4);
            assert!((a[2] - 2.0 / 3.0).abs() < 1e-4);
            assert!((b[2] - 0.25).abs() < 1e-4);
        }
    }

    #[test]
    fn special_scheme_rows() {
        let [x, y, z] = special_omegas().unwrap();
        let rows = [
            (&x, [0.78868, -0.07189, -0.44191, 0.78868, 0.65324, 0.28322]),
            (&y, [0.26833, 0.91966, -0.18799, -0.18799, 0.91966, 0.26833]),
            (&z, [0.28322, 0.65324, 0.78868, -0.44191, -0.07189, 0.78868]),
        ];
        for (sol, want) in rows {
            let got = sol.coefficients.interleaved();
            // the published digits are truncated
            for (g, w) in got.iter().zip(want) {
                assert!((g - w).abs() < 1e-5, "{}: {g} vs {w}", sol.coefficients.label());
            }
            assert!(order_residuals(&sol.coefficients).max_through(3) < 1e-12);
        }
        // a_2 = b_3 has the closed-form root (3 + sqrt 3) / 6
        assert!((z.omega - (3.0 + 3f64.sqrt()) / 6.0).abs() < 1e-11);
    }

    #[test]
    fn x_and_z_swap_roles() {
        let [x, _, z] = special_omegas().unwrap();
        let mut ax = x.coefficients.a().to_vec();
        let mut bz = z.coefficients.b().to_vec();
        ax.sort_by(f64::total_cmp);
        bz.sort_by(f64::total_cmp);
        assert!(close(&ax, &bz, 1e-10));
        let mut bx = x.coefficients.b().to_vec();
        let mut az = z.coefficients.a().to_vec();
        bx.sort_by(f64::total_cmp);
        az.sort_by(f64::total_cmp);
        assert!(close(&bx, &az, 1e-10));
    }

    #[test]
    fn fourth_order_schemes() {
        let u = fourth_order_u();
        let w = omega_u();
        assert!((w - 1.35121).abs() < 1e-5);
        assert!((u.a()[1] + 0.17560).abs() < 1e-5);
        assert!((u.b()[1] + 1.70241).abs() < 1e-5);
        assert!(order_residuals(&u).max_through(3) < 1e-12);
        let flat = strang_composition(&[w, 1.0 - 2.0 * w, w], 4, "S4U").unwrap();
        assert!(close(&flat.interleaved(), &u.interleaved(), 1e-15));

        let v = fourth_order_v();
        let w = omega_v();
        assert!((w - 0.41449).abs() < 1e-5);
        assert!((v.a()[2] + 0.12174).abs() < 1e-5);
        assert!((v.b()[2] + 0.65797).abs() < 1e-5);
        assert!(order_residuals(&v).max_through(3) < 1e-12);
        let flat = strang_composition(&[w, w, 1.0 - 4.0 * w, w, w], 4, "S4V").unwrap();
        assert!(close(&flat.interleaved(), &v.interleaved(), 1e-15));

        assert!(-v.min() < -u.min());
    }

    #[test]
    fn symmetric_three_stage_is_only_second_order() {
        let c = SplitCoefficients::new(vec![1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0], vec![0.5, 0.5, 0.0], 2, "sym3").unwrap();
        assert!(order_residuals(&c).max_through(3) > 1e-3);
        assert!(SplitCoefficients::new(c.a().to_vec(), c.b().to_vec(), 3, "sym3").is_err());
    }

    #[test]
    fn scheme_ids_round_trip() {
        for s in [
            "S1", "S2", "S2:0.5", "S3X", "S3Y", "S3Z", "S3+:0.28", "S3-:0.8", "S4U", "S4V",
        ] {
            let id: SchemeId = s.parse().unwrap();
            assert_eq!(id.to_string(), s);
        }
        assert_eq!("s4v".parse::<SchemeId>().unwrap(), SchemeId::S4V);
        assert!("S5".parse::<SchemeId>().is_err());
        assert!("S3+:abc".parse::<SchemeId>().is_err());
        assert_eq!(named_scheme(SchemeId::S1).unwrap().a(), &[1.0]);
        let s2 = named_scheme(SchemeId::S2(1.0)).unwrap();
        assert_eq!(s2.interleaved(), vec![0.5, 1.0, 0.5, 0.0]);
    }
}
