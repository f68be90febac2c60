//! Learning colour terms from membership ground truth.
//!
//! Each term is fitted on its own: the objective is the sum of squared
//! differences between the term's belongingness at every bin centre and the
//! bin's membership for that term.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::ground_truth::{build_ground_truth_with_terms, MembershipGroundTruth, TrainingExample};
use super::optimiser::{BoxLeastSquares, StopReason};
use crate::colourspace::Lab;
use crate::ellipsoid::{
    canonical_order, sigmoid_membership, ColourModel, ColourTerm, Ellipsoid, DEGENERATE_DISTANCE,
};
use crate::error::{Error, Result};
use crate::linalg::{self, Mat3};
use crate::scalar::{lit, to_f64, Real};

/// Number of free parameters per term: centre, semi-axes, angles, steepness.
pub const PARAMETER_COUNT: usize = 10;

/// Initial semi-axis length and steepness of a fresh term.
pub const INITIAL_SEMI_AXIS: f64 = 10.0;
pub const INITIAL_STEEPNESS: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub max_iterations: usize,
    pub tolerance: f64,
    pub bin_size: f64,
    pub seed: u64,
    /// Extra local searches from seeded random orientations; the best result wins.
    pub restarts: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            max_iterations: 1000,
            tolerance: 1e-3,
            bin_size: 1.0,
            seed: 0,
            restarts: 2,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::InvalidParameter(
                "max_iterations must be at least 1".into(),
            ));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter("tolerance must be positive".into()));
        }
        if !(self.bin_size > 0.0) || !self.bin_size.is_finite() {
            return Err(Error::InvalidParameter("bin_size must be positive".into()));
        }
        Ok(())
    }
}

/// Box on the ten parameters. Centres are unbounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterBounds {
    pub min_semi_axis: f64,
    /// Closed upper end used for the half-open `[0, π)` angle range.
    pub max_angle: f64,
    pub min_steepness: f64,
    pub max_steepness: f64,
}

impl Default for ParameterBounds {
    fn default() -> Self {
        ParameterBounds {
            min_semi_axis: 0.1,
            max_angle: std::f64::consts::PI - 1e-9,
            min_steepness: 1e-3,
            max_steepness: 1.0,
        }
    }
}

impl ParameterBounds {
    pub fn lower<T: Real>(&self) -> Vec<T> {
        let mut v = vec![T::neg_infinity(); 3];
        v.extend([lit::<T>(self.min_semi_axis); 3]);
        v.extend([T::zero(); 3]);
        v.push(lit(self.min_steepness));
        v
    }

    pub fn upper<T: Real>(&self) -> Vec<T> {
        let mut v = vec![T::infinity(); 6];
        v.extend([lit::<T>(self.max_angle); 3]);
        v.push(lit(self.max_steepness));
        v
    }

    /// Whether a term lies inside the box (and inside the model's validity domain).
    pub fn contains<T: Real>(&self, term: &ColourTerm<T>) -> bool {
        let p = term_to_params(term);
        let (lo, hi) = (self.lower::<T>(), self.upper::<T>());
        p.iter()
            .zip(lo.iter().zip(&hi))
            .all(|(&v, (&l, &h))| v >= l && v <= h)
            && term.ellipsoid.rotation.iter().all(|&a| a < T::PI())
            && term.steepness > T::zero()
    }
}

pub fn term_to_params<T: Real>(term: &ColourTerm<T>) -> Vec<T> {
    let e = &term.ellipsoid;
    let mut p = e.centre.to_array().to_vec();
    p.extend(e.semi_axes);
    p.extend(e.rotation);
    p.push(term.steepness);
    p
}

pub fn params_to_term<T: Real>(name: &str, p: &[T]) -> Result<ColourTerm<T>> {
    let e = Ellipsoid::new(
        Lab::new(p[0], p[1], p[2]),
        [p[3], p[4], p[5]],
        [p[6], p[7], p[8]],
    )?;
    ColourTerm::new(name, e, p[9])
}

/// Evaluates `B` at many points for a raw parameter vector.
struct ParamEvaluator<T> {
    centre: [T; 3],
    shape: Mat3<T>,
    steepness: T,
    fallback: T,
}

impl<T: Real> ParamEvaluator<T> {
    fn new(p: &[T]) -> Self {
        let r = crate::ellipsoid::rotation_matrix([p[6], p[7], p[8]]);
        let inv_sq = [p[3], p[4], p[5]].map(|s| T::one() / (s * s));
        let mut shape = [[T::zero(); 3]; 3];
        for (i, row) in shape.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).fold(T::zero(), |acc, k| acc + r[i][k] * inv_sq[k] * r[j][k]);
            }
        }
        ParamEvaluator {
            centre: [p[0], p[1], p[2]],
            shape,
            steepness: p[9],
            fallback: (p[3] + p[4] + p[5]) / lit(3.0),
        }
    }

    #[inline]
    fn eval(&self, x: &[T; 3]) -> T {
        let d = linalg::sub(x, &self.centre);
        let dist = linalg::norm(&d);
        let h = if dist < lit(DEGENERATE_DISTANCE) {
            self.fallback
        } else {
            dist / linalg::quad_form(&self.shape, &d).sqrt()
        };
        sigmoid_membership(self.steepness, dist, h)
    }
}

/// Sum of squared residuals between the term's belongingness and the ground truth of term `t`.
pub fn fit_objective<T: Real>(term: &ColourTerm<T>, gt: &MembershipGroundTruth<T>, t: usize) -> T {
    let prepared = term.prepared();
    gt.iter()
        .map(|(k, m)| {
            let r = prepared.belongingness(&gt.bin_centre(*k).to_array()) - m[t];
            r * r
        })
        .fold(T::zero(), |a, b| a + b)
}

/// Start point: mean of the supporting bins, axes 10, no rotation, steepness 1.
pub fn initialise_term<T: Real>(
    name: &str,
    gt: &MembershipGroundTruth<T>,
) -> Result<ColourTerm<T>> {
    let t = gt
        .term_index(name)
        .ok_or_else(|| Error::UnknownTerm(name.to_string()))?;
    let support = gt.support(t);
    if support.is_empty() {
        return Err(Error::NoSupport {
            term: name.to_string(),
        });
    }
    let n = T::from_usize(support.len()).unwrap();
    let sum = support.iter().fold([T::zero(); 3], |acc, p| {
        [acc[0] + p.l, acc[1] + p.a, acc[2] + p.b]
    });
    let centre = Lab::new(sum[0] / n, sum[1] / n, sum[2] / n);
    let axis = lit(INITIAL_SEMI_AXIS);
    ColourTerm::new(
        name,
        Ellipsoid::new(centre, [axis; 3], [T::zero(); 3])?,
        lit(INITIAL_STEEPNESS),
    )
}

/// Diagnostics of one term fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub term: String,
    pub initial_objective: f64,
    pub final_objective: f64,
    pub bins: usize,
    pub iterations: usize,
    pub evaluations: usize,
    /// False when no step improved on the start point (the start point is returned).
    pub improved: bool,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct FittedTerm<T> {
    pub term: ColourTerm<T>,
    pub report: FitReport,
}

fn name_seed(seed: u64, name: &str) -> u64 {
    // FNV-1a, stable across platforms and runs
    name.bytes().fold(0xcbf2_9ce4_8422_2325u64 ^ seed, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Fits one term from its ground-truth column, starting at [`initialise_term`].
pub fn fit_term<T: Real>(
    name: &str,
    gt: &MembershipGroundTruth<T>,
    config: &FitConfig,
    bounds: &ParameterBounds,
) -> Result<FittedTerm<T>> {
    config.validate()?;
    let t = gt
        .term_index(name)
        .ok_or_else(|| Error::UnknownTerm(name.to_string()))?;
    let start = initialise_term(name, gt)?;
    let (points, targets) = gt.targets(t);
    let m = points.len();
    let residuals = |p: &[T], r: &mut [T]| {
        let ev = ParamEvaluator::new(p);
        for ((ri, x), g) in r.iter_mut().zip(&points).zip(&targets) {
            *ri = ev.eval(x) - *g;
        }
    };
    let solver = BoxLeastSquares {
        lower: bounds.lower(),
        upper: bounds.upper(),
        max_iterations: config.max_iterations,
        tolerance: lit(config.tolerance),
    };
    let x0 = term_to_params(&start);
    let first = solver.minimise(residuals, m, &x0);
    let initial_cost = first.initial_cost;
    let mut best = first;
    let mut iterations = best.iterations;
    let mut evaluations = best.evaluations;

    let mut rng = ChaCha8Rng::seed_from_u64(name_seed(config.seed, name));
    for _ in 0..config.restarts {
        let mut x = best.x.clone();
        for a in x.iter_mut().skip(6).take(3) {
            *a = lit(rng.random_range(0.0..bounds.max_angle));
        }
        let out = solver.minimise(residuals, m, &x);
        iterations += out.iterations;
        evaluations += out.evaluations;
        if out.cost < best.cost {
            best = out;
        }
    }

    let improved = best.cost < initial_cost;
    let (params, cost) = if improved {
        (best.x, best.cost)
    } else {
        (x0, initial_cost)
    };
    let term = params_to_term(name, &params)?;
    debug_assert!(bounds.contains(&term));
    Ok(FittedTerm {
        term,
        report: FitReport {
            term: name.to_string(),
            initial_objective: to_f64(initial_cost),
            final_objective: to_f64(cost),
            bins: m,
            iterations,
            evaluations,
            improved,
            converged: improved && best.stop != StopReason::MaxIterations,
        },
    })
}

/// Fits every named term independently and assembles them in canonical order.
pub fn fit_model<T: Real>(
    term_names: &[String],
    gt: &MembershipGroundTruth<T>,
    config: &FitConfig,
) -> Result<(ColourModel<T>, Vec<FitReport>)> {
    config.validate()?;
    let names = canonical_order(term_names);
    let bounds = ParameterBounds::default();
    let fitted: Vec<FittedTerm<T>> = names
        .par_iter()
        .map(|n| {
            fit_term(n, gt, config, &bounds).map_err(|e| Error::Fit {
                term: n.clone(),
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    let (terms, reports) = fitted.into_iter().map(|f| (f.term, f.report)).unzip();
    Ok((ColourModel::new(terms)?, reports))
}

/// Learns one extra term from its examples alone and appends it; existing terms are untouched.
pub fn extend_model<T: Real>(
    model: &ColourModel<T>,
    name: &str,
    examples: &[TrainingExample<T>],
    config: &FitConfig,
) -> Result<(ColourModel<T>, FitReport)> {
    config.validate()?;
    if model.index_of(name).is_some() {
        return Err(Error::DuplicateTerm(name.to_string()));
    }
    if examples.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "no example images for '{name}'"
        )));
    }
    if let Some(ex) = examples.iter().find(|e| e.pixels.is_empty()) {
        return Err(Error::EmptyMask(ex.source.clone()));
    }
    let relabelled: Vec<TrainingExample<T>> = examples
        .iter()
        .map(|e| TrainingExample::new(name, e.source.clone(), e.pixels.clone()))
        .collect();
    let gt =
        build_ground_truth_with_terms(&relabelled, lit(config.bin_size), vec![name.to_string()])?;
    let fitted = fit_term(name, &gt, config, &ParameterBounds::default())?;
    let mut terms = model.terms().to_vec();
    terms.push(fitted.term);
    Ok((ColourModel::new(terms)?, fitted.report))
}
