use super::{GraphError, GraphProblem, GraphSolution};

/// Follows the solution's policy from `start` until it reaches a motionless
/// node.  The returned sequence ends at that node, which then repeats
/// forever.
pub fn extract_path(solution: &GraphSolution, start: usize) -> Result<Vec<usize>, GraphError> {
    let n = solution.policy.len();
    if start >= n {
        return Err(GraphError::NodeOutOfRange(start));
    }
    let mut seen = vec![false; n];
    let mut path = vec![start];
    let mut cur = start;
    seen[start] = true;
    loop {
        let next = solution.policy[cur];
        if next == cur {
            return Ok(path);
        }
        if seen[next] {
            return Err(GraphError::PolicyCycle(next));
        }
        seen[next] = true;
        path.push(next);
        cur = next;
    }
}

/// Expected cost of an eventually-motionless path `(y_0, .., y_m, y_m, ..)`.
///
/// Termination after transition `t` happens with probability
/// `p_t * Π_{s<t} (1 - p_s)` and costs `Σ_{s<t} K(y_s, y_{s+1}) + q(y_t)`.
/// Once the path sits at `y_m` it pays `q(y_m) + K_mm / p_mm` in expectation,
/// so the sum is exact with no truncation.
pub fn path_cost(problem: &GraphProblem, path: &[usize]) -> Result<f64, GraphError> {
    let (&last, _) = path.split_last().ok_or(GraphError::EmptyPath)?;
    let n = problem.node_count();
    if let Some(&bad) = path.iter().find(|&&i| i >= n) {
        return Err(GraphError::NodeOutOfRange(bad));
    }
    let q = problem.q();
    let mut survive = 1.0;
    let mut running = 0.0;
    let mut total = 0.0;
    for w in path.windows(2) {
        let e = problem
            .edge(w[0], w[1])
            .ok_or(GraphError::MissingTransition {
                from: w[0],
                to: w[1],
            })?;
        running += e.cost;
        total += survive * e.p * (running + q[w[1]]);
        survive *= 1.0 - e.p;
    }
    let stay = problem
        .edge(last, last)
        .ok_or(GraphError::MissingTransition {
            from: last,
            to: last,
        })?;
    let tail = if stay.cost == 0.0 {
        q[last]
    } else {
        q[last] + stay.cost / stay.p
    };
    Ok(total + survive * (running + tail))
}
