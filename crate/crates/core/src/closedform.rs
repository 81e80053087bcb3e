//! Exact CB/diamond norm for differences of unitary conjugations.
//!
//! For `Φ(X) = UXU† − X` the norm equals the diameter of the smallest closed
//! disc containing the eigenvalues of `U`. Two independent routes compute it:
//! a Welzl-style smallest-enclosing-disc pass over the spectrum, and the
//! rotation formula `2√(1−r²)` where `r` is the best achievable minimum real
//! part of the rotated spectrum (`2` when `r ≤ 0`). The two must agree to
//! 1e-9 or the computation is rejected as internally inconsistent, which
//! makes this module a trustworthy oracle for the minimizer.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numerics::{eigenvalues, max_abs, CMatrix, C64};
use crate::superop::UNITARY_TOL;

/// Containment slack for the disc: points may exceed the radius by this much.
const CONTAIN_EPS: f64 = 1e-12;

/// Angular tolerance for deduplicating repeated eigenvalues.
const ANGLE_DEDUP_TOL: f64 = 1e-10;

/// Disagreement threshold between the two computation routes.
const CROSS_CHECK_TOL: f64 = 1e-9;

const SHUFFLE_SEED: u64 = 0x9e3779b97f4a7c15;

/// A closed disc in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disc {
    pub center: C64,
    pub radius: f64,
}

impl Disc {
    fn contains(&self, p: C64) -> bool {
        (p - self.center).norm() <= self.radius + CONTAIN_EPS
    }
}

fn diameter_disc(a: C64, b: C64) -> Disc {
    let center = (a + b) * 0.5;
    Disc {
        center,
        radius: (a - center).norm().max((b - center).norm()),
    }
}

fn cross(a: C64, b: C64) -> f64 {
    a.re * b.im - a.im * b.re
}

/// Circumdisc of three points; `None` when they are collinear.
fn circumdisc(a: C64, b: C64, c: C64) -> Option<Disc> {
    // Shift to the midpoint of the bounding box for numerical stability.
    let ox = (a.re.min(b.re).min(c.re) + a.re.max(b.re).max(c.re)) / 2.0;
    let oy = (a.im.min(b.im).min(c.im) + a.im.max(b.im).max(c.im)) / 2.0;
    let (ax, ay) = (a.re - ox, a.im - oy);
    let (bx, by) = (b.re - ox, b.im - oy);
    let (cx, cy) = (c.re - ox, c.im - oy);
    let d = (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by)) * 2.0;
    if d == 0.0 {
        return None;
    }
    let x = ((ax * ax + ay * ay) * (by - cy)
        + (bx * bx + by * by) * (cy - ay)
        + (cx * cx + cy * cy) * (ay - by))
        / d;
    let y = ((ax * ax + ay * ay) * (cx - bx)
        + (bx * bx + by * by) * (ax - cx)
        + (cx * cx + cy * cy) * (bx - ax))
        / d;
    let center = C64::new(ox + x, oy + y);
    let radius = (center - a)
        .norm()
        .max((center - b).norm())
        .max((center - c).norm());
    Some(Disc { center, radius })
}

// Smallest disc with two boundary points fixed.
fn disc_with_two_points(points: &[C64], p: C64, q: C64) -> Disc {
    let base = diameter_disc(p, q);
    let mut left: Option<Disc> = None;
    let mut right: Option<Disc> = None;
    let pq = q - p;
    for &pt in points {
        if base.contains(pt) {
            continue;
        }
        let side = cross(pq, pt - p);
        let Some(c) = circumdisc(p, q, pt) else {
            continue;
        };
        let lever = cross(pq, c.center - p);
        if side > 0.0 && left.is_none_or(|d| lever > cross(pq, d.center - p)) {
            left = Some(c);
        } else if side < 0.0 && right.is_none_or(|d| lever < cross(pq, d.center - p)) {
            right = Some(c);
        }
    }
    match (left, right) {
        (None, None) => base,
        (Some(l), None) => l,
        (None, Some(r)) => r,
        (Some(l), Some(r)) => {
            if l.radius <= r.radius {
                l
            } else {
                r
            }
        }
    }
}

// Smallest disc with one boundary point fixed.
fn disc_with_one_point(points: &[C64], p: C64) -> Disc {
    let mut disc = Disc {
        center: p,
        radius: 0.0,
    };
    for (i, &q) in points.iter().enumerate() {
        if !disc.contains(q) {
            disc = if disc.radius == 0.0 {
                diameter_disc(p, q)
            } else {
                disc_with_two_points(&points[..=i], p, q)
            };
        }
    }
    disc
}

/// Smallest closed disc containing all points. Expected linear time, with a
/// seeded shuffle so repeated calls are identical.
pub fn smallest_enclosing_disc(points: &[C64]) -> Disc {
    assert!(!points.is_empty(), "point set must be nonempty");
    let mut shuffled = points.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(SHUFFLE_SEED);
    for i in (1..shuffled.len()).rev() {
        let j = rand::Rng::random_range(&mut rng, 0..=i);
        shuffled.swap(i, j);
    }
    let mut disc: Option<Disc> = None;
    for (i, &p) in shuffled.iter().enumerate() {
        if disc.is_none_or(|d| !d.contains(p)) {
            disc = Some(disc_with_one_point(&shuffled[..=i], p));
        }
    }
    disc.expect("nonempty input yields a disc")
}

fn normalized_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut t = theta % two_pi;
    if t < 0.0 {
        t += two_pi;
    }
    t
}

/// The largest achievable minimum real part over rigid rotations of a
/// unit-modulus spectrum, with the optimizing rotation angle.
///
/// Sort the eigenvalue angles, find the largest cyclic gap `g`, take the
/// covering arc `β = 2π − g`; then `r = cos(β/2)` and the optimal rotation
/// centers the covering arc on angle zero.
pub fn max_min_real_rotation(eigs: &[C64]) -> Result<(f64, f64)> {
    if eigs.is_empty() {
        return Err(Error::InvalidParameter(
            "eigenvalue list must be nonempty".into(),
        ));
    }
    for z in eigs {
        if (z.norm() - 1.0).abs() > UNITARY_TOL {
            return Err(Error::NotUnitary(format!(
                "eigenvalue {z} has modulus {:.12}, expected 1",
                z.norm()
            )));
        }
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut angles: Vec<f64> = eigs.iter().map(|z| normalized_angle(z.arg())).collect();
    angles.sort_by(f64::total_cmp);
    let mut distinct: Vec<f64> = Vec::with_capacity(angles.len());
    for &t in &angles {
        if distinct
            .last()
            .is_none_or(|&prev| t - prev > ANGLE_DEDUP_TOL)
        {
            distinct.push(t);
        }
    }
    // Wraparound duplicate: first and last angle may be the same point.
    if distinct.len() > 1 {
        let wrap = distinct[0] + two_pi - distinct[distinct.len() - 1];
        if wrap <= ANGLE_DEDUP_TOL {
            distinct.pop();
        }
    }

    if distinct.len() == 1 {
        return Ok((1.0, -distinct[0]));
    }

    let mut gap_start = distinct.len() - 1;
    let mut max_gap = distinct[0] + two_pi - distinct[distinct.len() - 1];
    for i in 0..distinct.len() - 1 {
        let gap = distinct[i + 1] - distinct[i];
        if gap > max_gap {
            max_gap = gap;
            gap_start = i;
        }
    }
    let beta = two_pi - max_gap;
    let r = (beta / 2.0).cos();
    // The covering arc runs from the end of the largest gap all the way
    // around to its start.
    let arc_begin = distinct[(gap_start + 1) % distinct.len()];
    let arc_mid = arc_begin + beta / 2.0;
    let alpha = normalized_angle(-arc_mid);
    Ok((r, alpha))
}

fn validate_unitary(name: &str, u: &CMatrix) -> Result<()> {
    if u.nrows() != u.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{name} must be square, got {}x{}",
            u.nrows(),
            u.ncols()
        )));
    }
    let defect = max_abs(&(u.adjoint() * u - CMatrix::identity(u.nrows(), u.nrows())));
    if defect > UNITARY_TOL {
        return Err(Error::NotUnitary(format!(
            "{name} deviates from unitarity by {defect:.3e}"
        )));
    }
    Ok(())
}

/// Exact CB (and diamond) norm of `X ↦ UXU† − X`: the diameter of the
/// smallest closed disc containing the spectrum of `U`, cross-checked
/// against the rotation formula.
pub fn unitary_diff_norm(u: &CMatrix) -> Result<f64> {
    validate_unitary("U", u)?;
    let eigs: Vec<C64> = eigenvalues(u)?.into_iter().map(|z| z / z.norm()).collect();
    let disc = smallest_enclosing_disc(&eigs);
    let by_disc = 2.0 * disc.radius;
    let (r, _) = max_min_real_rotation(&eigs)?;
    let by_formula = if r <= 0.0 {
        2.0
    } else {
        2.0 * (1.0 - r * r).sqrt()
    };
    if (by_disc - by_formula).abs() > CROSS_CHECK_TOL {
        return Err(Error::Numerical(format!(
            "closed-form cross-check failed: disc diameter {by_disc:.12e} vs rotation formula {by_formula:.12e}"
        )));
    }
    Ok(by_disc)
}

/// Exact norm of `X ↦ UXU† − VXV†`, by unitary invariance equal to the
/// closed form for `V†U` against the identity.
pub fn unitary_pair_norm(u: &CMatrix, v: &CMatrix) -> Result<f64> {
    validate_unitary("U", u)?;
    validate_unitary("V", v)?;
    if u.nrows() != v.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "U and V must have equal size, got {} and {}",
            u.nrows(),
            v.nrows()
        )));
    }
    unitary_diff_norm(&(v.adjoint() * u))
}
