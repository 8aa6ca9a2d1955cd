use crate::error::{Error, Result};
use crate::glmo::{lmo_l1_ball, lmo_nuclear_ball};
use crate::numerics::{nuclear_norm, DenseMatrix, Point, RngState};

const NUCLEAR_LMO_TOL: f64 = 1e-10;

/// Compact convex feasible set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DomainSpec {
    /// `{x ∈ ℝ^dim : ‖x‖₁ ≤ tau}`.
    L1Ball { dim: usize, tau: f64 },
    /// Probability simplex in `ℝ^simplex_dim` times `[lo, hi]`; the interval
    /// coordinate is stored last.
    SimplexCrossInterval { simplex_dim: usize, lo: f64, hi: f64 },
    /// `{X ∈ ℝ^{rows×cols} : ‖X‖_* ≤ tau}`, flattened row-major.
    NuclearBall { rows: usize, cols: usize, tau: f64 },
    /// `[lo, hi]^dim`.
    Box { dim: usize, lo: f64, hi: f64 },
}

impl DomainSpec {
    pub fn l1_ball(dim: usize, tau: f64) -> Result<Self> {
        DomainSpec::L1Ball { dim, tau }.validated()
    }

    pub fn simplex_cross_interval(simplex_dim: usize, lo: f64, hi: f64) -> Result<Self> {
        DomainSpec::SimplexCrossInterval { simplex_dim, lo, hi }.validated()
    }

    pub fn nuclear_ball(rows: usize, cols: usize, tau: f64) -> Result<Self> {
        DomainSpec::NuclearBall { rows, cols, tau }.validated()
    }

    pub fn box_domain(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        DomainSpec::Box { dim, lo, hi }.validated()
    }

    fn validated(self) -> Result<Self> {
        let ok = match self {
            DomainSpec::L1Ball { dim, tau } => dim >= 1 && tau > 0.0 && tau.is_finite(),
            DomainSpec::SimplexCrossInterval { simplex_dim, lo, hi } => {
                simplex_dim >= 1 && lo.is_finite() && hi.is_finite() && lo <= hi
            }
            DomainSpec::NuclearBall { rows, cols, tau } => {
                rows >= 1 && cols >= 1 && tau > 0.0 && tau.is_finite()
            }
            DomainSpec::Box { dim, lo, hi } => dim >= 1 && lo.is_finite() && hi.is_finite() && lo <= hi,
        };
        if ok {
            Ok(self)
        } else {
            Err(Error::config(format!("invalid domain {self:?}")))
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            DomainSpec::L1Ball { dim, .. } | DomainSpec::Box { dim, .. } => dim,
            DomainSpec::SimplexCrossInterval { simplex_dim, .. } => simplex_dim + 1,
            DomainSpec::NuclearBall { rows, cols, .. } => rows * cols,
        }
    }

    /// Euclidean diameter `D_X`.
    pub fn diameter(&self) -> f64 {
        match *self {
            DomainSpec::L1Ball { tau, .. } | DomainSpec::NuclearBall { tau, .. } => 2.0 * tau,
            DomainSpec::SimplexCrossInterval { simplex_dim, lo, hi } => {
                let simplex = if simplex_dim >= 2 { 2.0 } else { 0.0 };
                (simplex + (hi - lo) * (hi - lo)).sqrt()
            }
            DomainSpec::Box { dim, lo, hi } => (hi - lo) * (dim as f64).sqrt(),
        }
    }

    pub fn is_polyhedral(&self) -> bool {
        !matches!(self, DomainSpec::NuclearBall { .. })
    }

    /// Amount by which `x` leaves the set (0 inside).
    pub fn violation(&self, x: &[f64]) -> f64 {
        if x.len() != self.dim() {
            return f64::INFINITY;
        }
        match *self {
            DomainSpec::L1Ball { tau, .. } => (x.iter().map(|v| v.abs()).sum::<f64>() - tau).max(0.0),
            DomainSpec::SimplexCrossInterval { simplex_dim, lo, hi } => {
                let s = &x[..simplex_dim];
                let sum_err = (s.iter().sum::<f64>() - 1.0).abs();
                let neg = s.iter().fold(0.0_f64, |a, v| a.max(-v));
                let y0 = x[simplex_dim];
                sum_err.max(neg).max(lo - y0).max(y0 - hi).max(0.0)
            }
            DomainSpec::NuclearBall { rows, cols, tau } => {
                let m = DenseMatrix::from_row_major(rows, cols, x.to_vec()).expect("dims checked");
                (nuclear_norm(&m) - tau).max(0.0)
            }
            DomainSpec::Box { lo, hi, .. } => x.iter().fold(0.0_f64, |a, v| a.max(lo - v).max(v - hi)),
        }
    }

    /// Membership within `tol` (relative to `tau` for the nuclear ball).
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        let scale = match *self {
            DomainSpec::NuclearBall { tau, .. } => tau.max(1.0),
            _ => 1.0,
        };
        self.violation(x) <= tol * scale
    }

    /// Canonical minimizer of `⟨g, x⟩`; ties broken toward the lowest index or the lower bound.
    pub fn lmo(&self, g: &[f64]) -> Result<Point> {
        if g.len() != self.dim() {
            return Err(Error::contract(format!(
                "LMO direction has dim {}, domain has {}",
                g.len(),
                self.dim()
            )));
        }
        match *self {
            DomainSpec::L1Ball { tau, .. } => Ok(lmo_l1_ball(g, tau)),
            DomainSpec::SimplexCrossInterval { simplex_dim, lo, hi } => {
                let mut best = 0;
                for i in 1..simplex_dim {
                    if g[i] < g[best] {
                        best = i;
                    }
                }
                let mut x = vec![0.0; simplex_dim + 1];
                x[best] = 1.0;
                x[simplex_dim] = if g[simplex_dim] < 0.0 { hi } else { lo };
                Ok(Point::from_vec(x))
            }
            DomainSpec::NuclearBall { rows, cols, tau } => {
                let gm = DenseMatrix::from_row_major(rows, cols, g.to_vec())?;
                Ok(Point::from_vec(lmo_nuclear_ball(&gm, tau, NUCLEAR_LMO_TOL)?.into_vec()))
            }
            DomainSpec::Box { lo, hi, .. } => {
                Ok(Point::from_vec(g.iter().map(|&v| if v < 0.0 { hi } else { lo }).collect()))
            }
        }
    }

    /// Default starting iterate: the origin for balls, the barycenter otherwise.
    pub fn default_start(&self) -> Point {
        match *self {
            DomainSpec::L1Ball { dim, .. } => Point::zeros(dim),
            DomainSpec::NuclearBall { rows, cols, .. } => Point::zeros(rows * cols),
            DomainSpec::SimplexCrossInterval { simplex_dim, lo, hi } => {
                let mut x = vec![1.0 / simplex_dim as f64; simplex_dim + 1];
                x[simplex_dim] = 0.5 * (lo + hi);
                Point::from_vec(x)
            }
            DomainSpec::Box { dim, lo, hi } => Point::from_vec(vec![0.5 * (lo + hi); dim]),
        }
    }

    /// A uniformly chosen extreme point (random rank-one matrix for the nuclear ball).
    pub fn sample_vertex(&self, rng: &mut RngState) -> Point {
        match *self {
            DomainSpec::L1Ball { dim, tau } => {
                let i = rng.index(dim);
                Point::basis(dim, i, tau * rng.sign())
            }
            DomainSpec::SimplexCrossInterval { simplex_dim, lo, hi } => {
                let mut x = vec![0.0; simplex_dim + 1];
                x[rng.index(simplex_dim)] = 1.0;
                x[simplex_dim] = if rng.sign() > 0.0 { hi } else { lo };
                Point::from_vec(x)
            }
            DomainSpec::NuclearBall { rows, cols, tau } => {
                let u = rng.unit_vector(rows);
                let v = rng.unit_vector(cols);
                Point::from_vec(DenseMatrix::outer(&u, &v).scaled(tau).into_vec())
            }
            DomainSpec::Box { dim, lo, hi } => {
                Point::from_vec((0..dim).map(|_| if rng.sign() > 0.0 { hi } else { lo }).collect())
            }
        }
    }

    /// A random point of the set: convex combination of random extreme points.
    pub fn sample_interior(&self, rng: &mut RngState) -> Point {
        match *self {
            DomainSpec::Box { dim, lo, hi } => {
                Point::from_vec((0..dim).map(|_| lo + (hi - lo) * rng.uniform()).collect())
            }
            DomainSpec::SimplexCrossInterval { simplex_dim, lo, hi } => {
                let w = dirichlet(simplex_dim, rng);
                let mut x = w;
                x.push(lo + (hi - lo) * rng.uniform());
                Point::from_vec(x)
            }
            _ => {
                let k = (self.dim() + 1).min(8);
                let w = dirichlet(k, rng);
                let mut x = Point::zeros(self.dim());
                for wi in w {
                    let v = self.sample_vertex(rng);
                    x.axpy(wi, &v);
                }
                x
            }
        }
    }

    /// Random point, half the time an extreme point.
    pub fn sample_mixed(&self, rng: &mut RngState) -> Point {
        if rng.uniform() < 0.5 {
            self.sample_vertex(rng)
        } else {
            self.sample_interior(rng)
        }
    }

    /// All extreme points of a small polyhedral domain.
    pub fn vertices(&self) -> Result<Vec<Point>> {
        match *self {
            DomainSpec::L1Ball { dim, tau } => Ok((0..dim)
                .flat_map(|i| [Point::basis(dim, i, tau), Point::basis(dim, i, -tau)])
                .collect()),
            DomainSpec::SimplexCrossInterval { simplex_dim, lo, hi } => {
                let mut out = Vec::new();
                for i in 0..simplex_dim {
                    for y0 in [lo, hi] {
                        let mut x = vec![0.0; simplex_dim + 1];
                        x[i] = 1.0;
                        x[simplex_dim] = y0;
                        out.push(Point::from_vec(x));
                    }
                }
                Ok(out)
            }
            DomainSpec::Box { dim, lo, hi } if dim <= 16 => Ok((0..1usize << dim)
                .map(|mask| {
                    Point::from_vec((0..dim).map(|j| if mask >> j & 1 == 1 { hi } else { lo }).collect())
                })
                .collect()),
            _ => Err(Error::config(format!("cannot enumerate vertices of {self:?}"))),
        }
    }
}

fn dirichlet(k: usize, rng: &mut RngState) -> Vec<f64> {
    let e: Vec<f64> = (0..k).map(|_| -rng.uniform_open().ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diameters() {
        assert_eq!(DomainSpec::l1_ball(5, 2.0).unwrap().diameter(), 4.0);
        let s = DomainSpec::simplex_cross_interval(3, -1.0, 1.0).unwrap();
        assert!((s.diameter() - 6f64.sqrt()).abs() < 1e-15);
        assert_eq!(DomainSpec::nuclear_ball(3, 2, 1.5).unwrap().diameter(), 3.0);
        assert_eq!(DomainSpec::simplex_cross_interval(1, 0.0, 2.0).unwrap().diameter(), 2.0);
    }

    #[test]
    fn samples_are_feasible() {
        let mut rng = RngState::new(5);
        for dom in [
            DomainSpec::l1_ball(4, 2.0).unwrap(),
            DomainSpec::simplex_cross_interval(3, -1.0, 1.0).unwrap(),
            DomainSpec::nuclear_ball(3, 2, 1.0).unwrap(),
            DomainSpec::box_domain(3, -1.0, 2.0).unwrap(),
        ] {
            for _ in 0..50 {
                assert!(dom.contains(dom.sample_mixed(&mut rng).as_slice(), 1e-9), "{dom:?}");
            }
            assert!(dom.contains(dom.default_start().as_slice(), 1e-12));
        }
    }

    #[test]
    fn polyhedral_lmo_matches_vertices() {
        let mut rng = RngState::new(8);
        for dom in [
            DomainSpec::l1_ball(4, 1.5).unwrap(),
            DomainSpec::simplex_cross_interval(3, -1.0, 1.0).unwrap(),
            DomainSpec::box_domain(3, -2.0, 1.0).unwrap(),
        ] {
            for _ in 0..20 {
                let g = rng.normal_vec(dom.dim());
                let x = dom.lmo(&g).unwrap();
                let best = dom
                    .vertices()
                    .unwrap()
                    .iter()
                    .map(|v| crate::numerics::dot(&g, v.as_slice()))
                    .fold(f64::INFINITY, f64::min);
                assert!((crate::numerics::dot(&g, x.as_slice()) - best).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn box_ties_go_low() {
        let dom = DomainSpec::box_domain(2, -1.0, 1.0).unwrap();
        assert_eq!(dom.lmo(&[0.0, -1.0]).unwrap().as_slice(), &[-1.0, 1.0]);
    }
}
