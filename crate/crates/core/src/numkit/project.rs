//! Euclidean projections onto simple closed convex sets.

use nalgebra::DMatrix;

use crate::error::{check_len, Error, Result};

/// Elementwise clamp onto `[lo, hi]`.
pub fn project_box(x: &[f64], lo: &[f64], hi: &[f64]) -> Result<Vec<f64>> {
    check_len(x.len(), lo.len())?;
    check_len(x.len(), hi.len())?;
    if let Some(i) = lo.iter().zip(hi).position(|(l, h)| l > h) {
        return Err(Error::InvalidBounds(i));
    }
    Ok(x.iter()
        .zip(lo.iter().zip(hi))
        .map(|(v, (l, h))| v.clamp(*l, *h))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetMode {
    /// `{y >= 0, sum(y) <= total}`
    Inequality,
    /// `{y >= 0, sum(y) = total}`
    Equality,
}

/// Projection onto the scaled simplex (or the region under it).
pub fn project_budget_simplex(x: &[f64], total: f64, mode: BudgetMode) -> Result<Vec<f64>> {
    if !(total >= 0.0) {
        return Err(Error::NegativeTotal(total));
    }
    if mode == BudgetMode::Inequality {
        let clipped: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
        if clipped.iter().sum::<f64>() <= total {
            return Ok(clipped);
        }
    }
    if x.is_empty() {
        return Ok(Vec::new());
    }
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - total) / (k + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    Ok(x.iter().map(|v| (v - theta).max(0.0)).collect())
}

/// Projection onto `{y : a^T y <= b}`.
pub fn project_halfspace(x: &[f64], a: &[f64], b: f64) -> Result<Vec<f64>> {
    check_len(x.len(), a.len())?;
    let ax = super::dot(a, x);
    let aa = super::dot(a, a);
    if ax <= b || aa == 0.0 {
        return Ok(x.to_vec());
    }
    let shift = (ax - b) / aa;
    Ok(x.iter().zip(a).map(|(v, ai)| v - shift * ai).collect())
}

/// Projection onto the Euclidean ball of `radius` around `center`.
pub fn project_l2_ball(x: &[f64], center: &[f64], radius: f64) -> Result<Vec<f64>> {
    check_len(x.len(), center.len())?;
    if !(radius >= 0.0) {
        return Err(Error::NegativeTotal(radius));
    }
    let dist = x
        .iter()
        .zip(center)
        .map(|(a, c)| (a - c).powi(2))
        .sum::<f64>()
        .sqrt();
    if dist <= radius {
        return Ok(x.to_vec());
    }
    let scale = radius / dist;
    Ok(x.iter()
        .zip(center)
        .map(|(a, c)| c + scale * (a - c))
        .collect())
}

/// Projection of a matrix onto the Frobenius ball `||X - C||_F <= radius`.
pub fn project_frobenius_ball(
    x: &DMatrix<f64>,
    center: &DMatrix<f64>,
    radius: f64,
) -> Result<DMatrix<f64>> {
    if x.shape() != center.shape() {
        return Err(Error::ShapeMismatch(format!(
            "{:?} vs {:?}",
            x.shape(),
            center.shape()
        )));
    }
    let y = project_l2_ball(x.as_slice(), center.as_slice(), radius)?;
    Ok(DMatrix::from_column_slice(x.nrows(), x.ncols(), &y))
}

/// Projection onto the l1 ball of `radius` around `center`: soft-thresholding
/// of the offset with the threshold picked by sorting.
pub fn project_l1_ball(x: &[f64], center: &[f64], radius: f64) -> Result<Vec<f64>> {
    check_len(x.len(), center.len())?;
    if !(radius >= 0.0) {
        return Err(Error::NegativeTotal(radius));
    }
    let offset: Vec<f64> = x.iter().zip(center).map(|(a, c)| a - c).collect();
    if offset.iter().map(|v| v.abs()).sum::<f64>() <= radius {
        return Ok(x.to_vec());
    }
    let magnitudes: Vec<f64> = offset.iter().map(|v| v.abs()).collect();
    let shrunk = project_budget_simplex(&magnitudes, radius, BudgetMode::Equality)?;
    Ok(center
        .iter()
        .zip(offset.iter().zip(&shrunk))
        .map(|(c, (o, m))| c + o.signum() * m)
        .collect())
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn box_examples() {
        let lo = [0.0, 0.0];
        let hi = [1.0, 1.0];
        assert_eq!(project_box(&[-1.0, 2.0], &lo, &hi).unwrap(), vec![0.0, 1.0]);
        assert_eq!(project_box(&[0.3, 0.7], &lo, &hi).unwrap(), vec![0.3, 0.7]);
        assert_eq!(
            project_box(&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]),
            Err(Error::InvalidBounds(0))
        );
    }

    /// Water-filling reference: bisection on the threshold.
    fn simplex_by_bisection(x: &[f64], total: f64) -> Vec<f64> {
        let mass = |t: f64| x.iter().map(|v| (v - t).max(0.0)).sum::<f64>();
        let mut lo = x.iter().cloned().fold(f64::MAX, f64::min) - total - 1.0;
        let mut hi = x.iter().cloned().fold(f64::MIN, f64::max);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mass(mid) > total {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        x.iter().map(|v| (v - 0.5 * (lo + hi)).max(0.0)).collect()
    }

    #[test]
    fn simplex_examples() {
        assert_eq!(
            project_budget_simplex(&[0.2, 0.3], 1.0, BudgetMode::Inequality).unwrap(),
            vec![0.2, 0.3]
        );
        assert_eq!(
            project_budget_simplex(&[2.0, 0.0], 1.0, BudgetMode::Equality).unwrap(),
            vec![1.0, 0.0]
        );
        assert_eq!(
            project_budget_simplex(&[0.0, 0.0], 1.0, BudgetMode::Inequality).unwrap(),
            vec![0.0, 0.0]
        );
        assert_eq!(
            project_budget_simplex(&[0.0, 0.0], 1.0, BudgetMode::Equality).unwrap(),
            vec![0.5, 0.5]
        );
        assert_eq!(
            project_budget_simplex(&[1.0], -1.0, BudgetMode::Equality),
            Err(Error::NegativeTotal(-1.0))
        );
    }

    #[test]
    fn frobenius_ball_examples() {
        let c = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(project_frobenius_ball(&c, &c, 0.5).unwrap(), c);
        let x = &c + DMatrix::from_element(2, 2, 1.0);
        // ||x - c||_F = 2 = 2r, so the offset is halved.
        let y = project_frobenius_ball(&x, &c, 1.0).unwrap();
        assert!((y - (&c + DMatrix::from_element(2, 2, 0.5))).norm() < 1e-15);
        assert!(project_frobenius_ball(&c, &DMatrix::zeros(3, 3), 1.0).is_err());
    }

    fn vec_pair(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (
            prop::collection::vec(-3.0..3.0f64, n),
            prop::collection::vec(-3.0..3.0f64, n),
        )
    }

    fn dist(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
    }

    proptest! {
        #[test]
        fn simplex_matches_water_filling(x in prop::collection::vec(-2.0..2.0f64, 1..8), total in 0.0..3.0f64) {
            let y = project_budget_simplex(&x, total, BudgetMode::Equality).unwrap();
            let oracle = simplex_by_bisection(&x, total);
            for (a, b) in y.iter().zip(&oracle) {
                prop_assert!((a - b).abs() < 1e-9);
            }
            // KKT: positive entries share the same offset from x.
            let s: f64 = y.iter().sum();
            prop_assert!((s - total).abs() < 1e-9);
        }

        #[test]
        fn projections_idempotent_and_nonexpansive((x, y) in vec_pair(6), r in 0.0..2.0f64) {
            let lo = vec![0.0; 6];
            let hi = vec![1.0; 6];
            let center = vec![0.5; 6];
            let a = vec![1.0, -1.0, 0.5, 0.0, 2.0, 1.0];
            type Proj<'a> = Box<dyn Fn(&[f64]) -> Vec<f64> + 'a>;
            let projections: Vec<Proj> = vec![
                Box::new(|v| project_box(v, &lo, &hi).unwrap()),
                Box::new(|v| project_budget_simplex(v, r, BudgetMode::Inequality).unwrap()),
                Box::new(|v| project_budget_simplex(v, r, BudgetMode::Equality).unwrap()),
                Box::new(|v| project_halfspace(v, &a, r).unwrap()),
                Box::new(|v| project_l2_ball(v, &center, r).unwrap()),
                Box::new(|v| project_l1_ball(v, &center, r).unwrap()),
            ];
            for p in &projections {
                let px = p(&x);
                let py = p(&y);
                let ppx = p(&px);
                prop_assert!(dist(&px, &ppx) < 1e-9);
                prop_assert!(dist(&px, &py) <= dist(&x, &y) + 1e-9);
            }
        }

        #[test]
        fn l1_ball_result_is_feasible_and_on_boundary(x in prop::collection::vec(-3.0..3.0f64, 1..8), r in 0.0..2.0f64) {
            let c = vec![0.0; x.len()];
            let y = project_l1_ball(&x, &c, r).unwrap();
            let norm: f64 = y.iter().map(|v| v.abs()).sum();
            let orig: f64 = x.iter().map(|v| v.abs()).sum();
            prop_assert!(norm <= r + 1e-9);
            if orig > r {
                prop_assert!((norm - r).abs() < 1e-9);
            }
        }
    }
}
