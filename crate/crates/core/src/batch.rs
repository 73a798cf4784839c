//! Independent solves over many parameter points.
//!
//! Every point is solved and verified in isolation; results come back in
//! input order whichever runner is used.

use serde::Serialize;

use crate::error::Error;
use crate::model::{CouplingParameters, ProblemSpec};
use crate::shoot::{fixed_point_solve, ProfileSolution, SolverControls};
use crate::verify::{verify, VerificationReport, VerifyTolerances};

/// One parameter point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub params: CouplingParameters,
    pub spec: ProblemSpec,
}

#[derive(Debug, Clone)]
pub struct PointOutcome {
    pub point: SweepPoint,
    pub result: Result<(ProfileSolution, VerificationReport), Error>,
}

/// Solves and verifies one point.
pub fn solve_point(point: &SweepPoint, controls: &SolverControls, tol: &VerifyTolerances) -> PointOutcome {
    let result = fixed_point_solve(&point.params, &point.spec, controls).map(|sol| {
        let report = verify(&sol, tol);
        (sol, report)
    });
    PointOutcome {
        point: point.clone(),
        result,
    }
}

/// Maps `work` over `items` on the calling thread.
pub fn run_sequential<T, R>(items: &[T], work: impl Fn(&T) -> R) -> Vec<R> {
    items.iter().map(work).collect()
}

/// Maps `work` over `items` on a pool of `jobs` threads (all cores when `jobs == 0`).
#[cfg(feature = "parallel")]
pub fn run_parallel<T, R>(items: &[T], jobs: usize, work: impl Fn(&T) -> R + Sync + Send) -> Vec<R>
where
    T: Sync,
    R: Send,
{
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build();
    match pool {
        Ok(pool) => pool.install(|| items.par_iter().map(&work).collect()),
        // a pool that cannot be built still leaves the calling thread
        Err(_) => run_sequential(items, work),
    }
}

/// Parallel when the `parallel` feature is on and `jobs != 1`, sequential otherwise.
pub fn run<T, R>(items: &[T], jobs: usize, work: impl Fn(&T) -> R + Sync + Send) -> Vec<R>
where
    T: Sync,
    R: Send,
{
    #[cfg(feature = "parallel")]
    if jobs != 1 {
        return run_parallel(items, jobs, work);
    }
    let _ = jobs;
    run_sequential(items, work)
}

/// Solves every point, `jobs` at a time.
pub fn solve_all(points: &[SweepPoint], controls: &SolverControls, tol: &VerifyTolerances, jobs: usize) -> Vec<PointOutcome> {
    run(points, jobs, |p| solve_point(p, controls, tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn runners_preserve_order() {
        let xs: Vec<u64> = (0..100).collect();
        let seq = run_sequential(&xs, |x| x * x);
        assert_eq!(run(&xs, 3, |x| x * x), seq);
        assert_eq!(run(&xs, 1, |x| x * x), seq);
    }
}
