//! Polarization, disagreement and the polarization–disagreement index.
//!
//! All three are quadratic forms in the internal opinions and can be
//! evaluated through the mean-centered equilibrium, the mean-centered
//! internal opinions, or the raw internal opinions wrapped in centering
//! projectors. [`MetricRoute`] selects which one.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dynamics::{equilibrium, OpinionVector};
use crate::error::{check_len, Error, Result};
use crate::graph::Graph;
use crate::numkit::spd_inverse;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricRoute {
    /// Solve the equilibrium, then apply the definitions.
    FromZ,
    /// Quadratic forms in the centered internal opinions.
    FromSbar,
    /// Quadratic forms in the raw internal opinions.
    FromS,
}

impl MetricRoute {
    pub const ALL: [MetricRoute; 3] = [MetricRoute::FromZ, MetricRoute::FromSbar, MetricRoute::FromS];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricReport {
    pub polarization: f64,
    pub disagreement: f64,
    pub pdi: f64,
    pub mu: f64,
    pub route: MetricRoute,
}

/// Which metric matrix `M` a quadratic form `s_bar^T M s_bar` uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricMatrixKind {
    /// `(L+I)^-2`
    Polarization,
    /// `(L+I)^-1 L (L+I)^-1`
    Disagreement,
    /// `(L+I)^-1`
    Pdi,
}

impl MetricMatrixKind {
    pub const ALL: [MetricMatrixKind; 3] = [
        MetricMatrixKind::Polarization,
        MetricMatrixKind::Disagreement,
        MetricMatrixKind::Pdi,
    ];
}

/// Returns `(v - mean * 1, mean)`.
pub fn mean_center(v: &[f64]) -> Result<(OpinionVector, f64)> {
    if v.is_empty() {
        return Err(Error::EmptyVector);
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    Ok((v.iter().map(|x| x - mean).collect::<Vec<_>>().into(), mean))
}

/// `sum_i (z_i - mean(z))^2`.
pub fn polarization(z: &[f64]) -> Result<f64> {
    let (centered, _) = mean_center(z)?;
    Ok(centered.iter().map(|x| x * x).sum())
}

/// `sum over edges of W_ij (z_i - z_j)^2`.
pub fn disagreement(g: &Graph, z: &[f64]) -> Result<f64> {
    check_len(g.n(), z.len())?;
    Ok(g.laplacian_quadratic(z))
}

pub fn local_disagreement(g: &Graph, z: &[f64], i: usize, j: usize) -> Result<f64> {
    check_len(g.n(), z.len())?;
    let w = g.edge_weight(i, j).ok_or(Error::NoSuchEdge(i, j))?;
    Ok(w * (z[i] - z[j]).powi(2))
}

/// `(L + I)^-1` by dense Cholesky.
pub fn shifted_inverse(g: &Graph) -> Result<DMatrix<f64>> {
    let mut a = g.laplacian();
    for i in 0..g.n() {
        a[(i, i)] += 1.0;
    }
    spd_inverse(&a)
}

fn centering(n: usize) -> DMatrix<f64> {
    DMatrix::identity(n, n) - DMatrix::from_element(n, n, 1.0 / n as f64)
}

fn quad(a: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    x.dot(&(a * x))
}

/// Computes polarization, disagreement and `PDI(mu) = P + mu * D` from
/// internal opinions through the requested route. For `mu = 1` the index is
/// evaluated through the route's own closed form.
pub fn metrics_from_internal(
    g: &Graph,
    s: &[f64],
    mu: f64,
    route: MetricRoute,
) -> Result<MetricReport> {
    check_len(g.n(), s.len())?;
    if s.is_empty() {
        return Err(Error::EmptyVector);
    }
    let n = g.n();
    let (p, d, pdi1) = match route {
        MetricRoute::FromZ => {
            let z = equilibrium(g, s)?;
            let (zbar, _) = mean_center(&z)?;
            let p = polarization(&z)?;
            let d = disagreement(g, &z)?;
            let pdi1 = zbar.iter().map(|x| x * x).sum::<f64>() + g.laplacian_quadratic(&zbar);
            (p, d, pdi1)
        }
        MetricRoute::FromSbar => {
            let (sbar, _) = mean_center(s)?;
            let sbar = DVector::from_column_slice(&sbar);
            let m = shifted_inverse(g)?;
            let l = g.laplacian();
            let p = quad(&(&m * &m), &sbar);
            let d = quad(&(&m * &l * &m), &sbar);
            (p, d, quad(&m, &sbar))
        }
        MetricRoute::FromS => {
            let sv = DVector::from_column_slice(s);
            let m = shifted_inverse(g)?;
            let l = g.laplacian();
            let c = centering(n);
            let p = quad(&(&m * &c * &m), &sv);
            let d = quad(&(&m * &l * &m), &sv);
            (p, d, quad(&(&c * &m * &c), &sv))
        }
    };
    let (p, d) = (p.max(0.0), d.max(0.0));
    let pdi = if mu == 1.0 { pdi1.max(0.0) } else { p + mu * d };
    Ok(MetricReport {
        polarization: p,
        disagreement: d,
        pdi,
        mu,
        route,
    })
}

/// The dense metric matrix `M_*`.
pub fn metric_matrix(g: &Graph, kind: MetricMatrixKind) -> Result<DMatrix<f64>> {
    let m = shifted_inverse(g)?;
    Ok(match kind {
        MetricMatrixKind::Polarization => &m * &m,
        MetricMatrixKind::Disagreement => &m * g.laplacian() * &m,
        MetricMatrixKind::Pdi => m,
    })
}

/// Average-case conflict risk: the expected metric under independent
/// centered opinions with identity second moment, `Tr(M_*)`.
pub fn acr(g: &Graph, kind: MetricMatrixKind) -> Result<f64> {
    Ok(metric_matrix(g, kind)?.trace())
}

/// Evaluates metrics as functions of the internal opinions on a fixed graph,
/// reusing one dense `(L+I)^-1`.
#[derive(Debug, Clone)]
pub struct MetricEvaluator<'a> {
    graph: &'a Graph,
    inverse: DMatrix<f64>,
}

impl<'a> MetricEvaluator<'a> {
    pub fn new(graph: &'a Graph) -> Result<Self> {
        Ok(MetricEvaluator {
            graph,
            inverse: shifted_inverse(graph)?,
        })
    }

    pub fn graph(&self) -> &Graph {
        self.graph
    }

    pub fn equilibrium(&self, s: &[f64]) -> Vec<f64> {
        let n = self.graph.n();
        let mut z = vec![0.0; n];
        // M is symmetric, so walk it column-major.
        for (j, sj) in s.iter().enumerate() {
            if *sj != 0.0 {
                let col = self.inverse.column(j);
                for i in 0..n {
                    z[i] += col[i] * sj;
                }
            }
        }
        z
    }

    pub fn polarization(&self, s: &[f64]) -> f64 {
        let z = self.equilibrium(s);
        let mean = z.iter().sum::<f64>() / z.len() as f64;
        z.iter().map(|v| (v - mean).powi(2)).sum()
    }

    pub fn disagreement(&self, s: &[f64]) -> f64 {
        self.graph.laplacian_quadratic(&self.equilibrium(s))
    }

    /// `PDI(1) = s_bar^T (L+I)^-1 s_bar`.
    pub fn pdi(&self, s: &[f64]) -> f64 {
        let (sbar, _) = mean_center(s).expect("nonempty");
        let y = self.equilibrium(&sbar);
        crate::numkit::dot(&sbar, &y).max(0.0)
    }

    pub fn value(&self, kind: MetricMatrixKind, s: &[f64]) -> f64 {
        match kind {
            MetricMatrixKind::Polarization => self.polarization(s),
            MetricMatrixKind::Disagreement => self.disagreement(s),
            MetricMatrixKind::Pdi => self.pdi(s),
        }
    }

    /// Gradient with respect to `s`: `2 C M_* C s` with `C` the centering
    /// projector.
    pub fn gradient(&self, kind: MetricMatrixKind, s: &[f64]) -> Vec<f64> {
        let (sbar, _) = mean_center(s).expect("nonempty");
        let y = self.equilibrium(&sbar);
        let v = match kind {
            MetricMatrixKind::Polarization => self.equilibrium(&y),
            MetricMatrixKind::Disagreement => {
                let mut ly = vec![0.0; y.len()];
                self.graph.laplacian_apply(&y, &mut ly);
                self.equilibrium(&ly)
            }
            MetricMatrixKind::Pdi => y,
        };
        let (centered, _) = mean_center(&v).expect("nonempty");
        centered.iter().map(|x| 2.0 * x).collect()
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::graph::random_graph;

    fn k2() -> Graph {
        Graph::new(2, [(0, 1, 1.0)]).unwrap()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300) || (a - b).abs() < 1e-15
    }

    #[test]
    fn mean_center_examples() {
        let (c, m) = mean_center(&[0.0, 1.0]).unwrap();
        assert_eq!(&*c, &[-0.5, 0.5]);
        assert_eq!(m, 0.5);
        let (c, m) = mean_center(&[0.3; 4]).unwrap();
        assert!(c.iter().all(|x| x.abs() < 1e-16));
        assert!((m - 0.3).abs() < 1e-16);
        let v = [0.1, 0.7, 0.4];
        let (c1, _) = mean_center(&v).unwrap();
        let (c2, m2) = mean_center(&c1).unwrap();
        assert!(m2.abs() < 1e-16);
        assert!(crate::numkit::max_abs_diff(&c1, &c2) < 1e-16);
        assert_eq!(mean_center(&[]).unwrap_err(), Error::EmptyVector);
    }

    #[test]
    fn polarization_examples() {
        assert_eq!(polarization(&[0.4; 5]).unwrap(), 0.0);
        assert!((polarization(&[1.0 / 3.0, 2.0 / 3.0]).unwrap() - 1.0 / 18.0).abs() < 1e-16);
        assert_eq!(polarization(&[]), Err(Error::EmptyVector));
    }

    #[test]
    fn disagreement_examples() {
        assert_eq!(disagreement(&k2(), &[0.5, 0.5]).unwrap(), 0.0);
        assert!((disagreement(&k2(), &[1.0 / 3.0, 2.0 / 3.0]).unwrap() - 1.0 / 9.0).abs() < 1e-16);
        assert_eq!(disagreement(&Graph::empty(3), &[0.0, 0.5, 1.0]).unwrap(), 0.0);
        assert!(disagreement(&k2(), &[0.0]).is_err());
    }

    #[test]
    fn local_disagreement_examples() {
        let g = Graph::new(3, [(0, 1, 2.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(local_disagreement(&g, &[0.4, 0.4, 0.0], 0, 1).unwrap(), 0.0);
        assert_eq!(local_disagreement(&g, &[0.0, 0.0, 1.0], 2, 1).unwrap(), 1.0);
        assert_eq!(
            local_disagreement(&g, &[0.0; 3], 0, 2),
            Err(Error::NoSuchEdge(0, 2))
        );
        let g = random_graph(10, 0.5, 0.5, 2.0, 5).unwrap();
        let z = crate::rng::uniform_opinions(10, 5);
        let sum: f64 = g
            .edges()
            .iter()
            .map(|e| local_disagreement(&g, &z, e.i, e.j).unwrap())
            .sum();
        assert!(close(sum, disagreement(&g, &z).unwrap(), 1e-14));
    }

    #[test]
    fn k2_reports_on_every_route() {
        for route in MetricRoute::ALL {
            let r = metrics_from_internal(&k2(), &[0.0, 1.0], 1.0, route).unwrap();
            assert!((r.polarization - 1.0 / 18.0).abs() < 1e-15, "{route:?}");
            assert!((r.disagreement - 1.0 / 9.0).abs() < 1e-15, "{route:?}");
            assert!((r.pdi - 1.0 / 6.0).abs() < 1e-15, "{route:?}");
        }
    }

    #[test]
    fn constant_opinions_have_zero_metrics() {
        let g = random_graph(6, 0.6, 0.5, 1.5, 1).unwrap();
        for route in MetricRoute::ALL {
            let r = metrics_from_internal(&g, &[0.8; 6], 1.0, route).unwrap();
            assert!(r.polarization < 1e-14 && r.disagreement < 1e-14 && r.pdi < 1e-14);
        }
    }

    #[test]
    fn mu_weights_disagreement() {
        let g = random_graph(6, 0.6, 0.5, 1.5, 1).unwrap();
        let s = crate::rng::uniform_opinions(6, 1);
        let r = metrics_from_internal(&g, &s, 2.5, MetricRoute::FromSbar).unwrap();
        assert!(close(r.pdi, r.polarization + 2.5 * r.disagreement, 1e-14));
    }

    #[test]
    fn acr_examples() {
        let e = Graph::empty(3);
        assert!((acr(&e, MetricMatrixKind::Pdi).unwrap() - 3.0).abs() < 1e-15);
        assert!((acr(&k2(), MetricMatrixKind::Pdi).unwrap() - 4.0 / 3.0).abs() < 1e-14);
        assert!((acr(&k2(), MetricMatrixKind::Polarization).unwrap() - 10.0 / 9.0).abs() < 1e-14);
        assert!((acr(&k2(), MetricMatrixKind::Disagreement).unwrap() - 2.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn evaluator_matches_routes() {
        let g = random_graph(9, 0.4, 0.5, 1.5, 8).unwrap();
        let s = crate::rng::uniform_opinions(9, 8);
        let ev = MetricEvaluator::new(&g).unwrap();
        let r = metrics_from_internal(&g, &s, 1.0, MetricRoute::FromZ).unwrap();
        assert!(close(ev.polarization(&s), r.polarization, 1e-12));
        assert!(close(ev.disagreement(&s), r.disagreement, 1e-12));
        assert!(close(ev.pdi(&s), r.pdi, 1e-12));
    }

    fn instance() -> impl Strategy<Value = (u64, usize, f64)> {
        (0u64..100_000, 2usize..30, 0.1..0.9f64)
    }

    proptest! {
        #[test]
        fn routes_agree((seed, n, p) in instance()) {
            let g = random_graph(n, p, 0.2, 2.0, seed).unwrap();
            let s = crate::rng::uniform_opinions(n, seed);
            let a = metrics_from_internal(&g, &s, 1.0, MetricRoute::FromZ).unwrap();
            for route in [MetricRoute::FromSbar, MetricRoute::FromS] {
                let b = metrics_from_internal(&g, &s, 1.0, route).unwrap();
                prop_assert!(close(a.polarization, b.polarization, 1e-9));
                prop_assert!(close(a.disagreement, b.disagreement, 1e-9));
                prop_assert!(close(a.pdi, b.pdi, 1e-9));
            }
            prop_assert!(close(a.pdi, a.polarization + a.disagreement, 1e-9));
        }

        #[test]
        fn edge_sum_equals_quadratic_form((seed, n, p) in instance()) {
            let g = random_graph(n, p, 0.2, 2.0, seed).unwrap();
            let z = crate::rng::uniform_opinions(n, seed ^ 7);
            let (zbar, _) = mean_center(&z).unwrap();
            let zv = DVector::from_column_slice(&zbar);
            let form = zv.dot(&(g.laplacian() * &zv));
            prop_assert!(close(disagreement(&g, &z).unwrap(), form, 1e-10));
        }

        #[test]
        fn acr_is_additive((seed, n, p) in instance()) {
            let g = random_graph(n, p, 0.2, 2.0, seed).unwrap();
            let total = acr(&g, MetricMatrixKind::Pdi).unwrap();
            let parts = acr(&g, MetricMatrixKind::Polarization).unwrap()
                + acr(&g, MetricMatrixKind::Disagreement).unwrap();
            prop_assert!((total - parts).abs() <= 1e-9);
        }

        #[test]
        fn metrics_are_shift_invariant((seed, n, p) in instance(), c in -10.0..10.0f64) {
            let g = random_graph(n, p, 0.2, 2.0, seed).unwrap();
            let s = crate::rng::uniform_opinions(n, seed);
            let shifted: Vec<f64> = s.iter().map(|v| v + c).collect();
            let ev = MetricEvaluator::new(&g).unwrap();
            for kind in MetricMatrixKind::ALL {
                prop_assert!((ev.value(kind, &s) - ev.value(kind, &shifted)).abs() <= 1e-9);
            }
        }
    }
}
