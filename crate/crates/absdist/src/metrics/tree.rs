use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::Serialize;

use super::{check_compatible, DistanceReport, MetricError, SubDistance};
use crate::analyzer::AndOrGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    Iterative,
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeDistParams {
    mu: f64,
    solver: Solver,
    tol: f64,
}

impl Default for TreeDistParams {
    fn default() -> Self {
        TreeDistParams { mu: 0.2, solver: Solver::Iterative, tol: 1e-9 }
    }
}

impl TreeDistParams {
    pub fn new(mu: f64, solver: Solver, tol: f64) -> Result<Self, MetricError> {
        if !(mu > 0.0 && mu <= 1.0) {
            return Err(MetricError::Param(format!("mu must lie in (0,1], got {mu}")));
        }
        if tol.is_nan() || tol <= 0.0 {
            return Err(MetricError::Param(format!("tolerance must be positive, got {tol}")));
        }
        Ok(TreeDistParams { mu, solver, tol })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn solver(&self) -> Solver {
        self.solver
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }
}

/// One solved node pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairValue {
    pub a: usize,
    pub b: usize,
    pub pp: String,
    pub local: f64,
    pub value: f64,
}

/// `X_i = μ·ℓ_i + (1−μ)/|C_i| · Σ_{j∈C_i} X_j`, or `X_i = ℓ_i` when `C_i`
/// is empty.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub mu: f64,
    pub local: Vec<f64>,
    pub children: Vec<Vec<usize>>,
}

impl LinearSystem {
    fn coeff(&self, i: usize) -> (f64, f64) {
        if self.children[i].is_empty() {
            (self.local[i], 0.0)
        } else {
            (self.mu * self.local[i], (1.0 - self.mu) / self.children[i].len() as f64)
        }
    }
}

/// Gauss-Seidel sweeps from zero until no unknown moves by more than `tol`.
/// Returns the solution and the number of sweeps.
pub fn solve_iterative(sys: &LinearSystem, tol: f64) -> (Vec<f64>, usize) {
    let n = sys.local.len();
    let mut x = vec![0.0; n];
    let mut sweeps = 0;
    loop {
        sweeps += 1;
        let mut delta: f64 = 0.0;
        for i in 0..n {
            let (c, w) = sys.coeff(i);
            let v = c + w * sys.children[i].iter().map(|&j| x[j]).sum::<f64>();
            delta = delta.max((v - x[i]).abs());
            x[i] = v;
        }
        if delta <= tol || sweeps >= 1_000_000 {
            return (x, sweeps);
        }
    }
}

/// Gaussian elimination with partial pivoting on the dense system.
pub fn solve_direct(sys: &LinearSystem) -> Vec<f64> {
    let n = sys.local.len();
    let mut m = vec![vec![0.0; n + 1]; n];
    for (i, row) in m.iter_mut().enumerate() {
        let (c, w) = sys.coeff(i);
        row[i] = 1.0;
        for &j in &sys.children[i] {
            row[j] -= w;
        }
        row[n] = c;
    }
    for col in 0..n {
        let piv = (col..n).max_by(|&r, &s| m[r][col].abs().total_cmp(&m[s][col].abs())).expect("non-empty range");
        m.swap(col, piv);
        let pivot = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != col && row[col] != 0.0 {
                let f = row[col] / pivot[col];
                for (x, y) in row[col..].iter_mut().zip(&pivot[col..]) {
                    *x -= f * y;
                }
            }
        }
    }
    (0..n).map(|i| m[i][n] / m[i][i]).collect()
}

/// Tree distance between two analyses. Node pairs reachable from the root
/// pair through children with the same (clause, literal) key become the
/// unknowns. `per_point` holds the largest pair value at each program point.
pub fn tree_distance(
    a: &AndOrGraph,
    b: &AndOrGraph,
    d: &SubDistance,
    params: TreeDistParams,
) -> Result<DistanceReport, MetricError> {
    check_compatible(a, b)?;
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut children: Vec<Vec<usize>> = Vec::new();
    let mut queue = VecDeque::new();
    index.insert((a.root, b.root), 0);
    pairs.push((a.root, b.root));
    children.push(Vec::new());
    queue.push_back(0);
    while let Some(i) = queue.pop_front() {
        let (x, y) = pairs[i];
        let cx = a.children(x);
        let cy: BTreeMap<(usize, usize), usize> = b.children(y).into_iter().collect();
        if !cx.is_empty() && !cy.is_empty() && (cx.len() != cy.len() || cx.iter().any(|(k, _)| !cy.contains_key(k))) {
            return Err(MetricError::ShapeMismatch(a.nodes[x].pp.to_string()));
        }
        for (key, cx) in cx {
            let Some(&cy) = cy.get(&key) else { continue };
            let j = *index.entry((cx, cy)).or_insert_with(|| {
                pairs.push((cx, cy));
                children.push(Vec::new());
                queue.push_back(pairs.len() - 1);
                pairs.len() - 1
            });
            children[i].push(j);
        }
    }
    let mut local = Vec::with_capacity(pairs.len());
    for &(x, y) in &pairs {
        let (nx, ny) = (&a.nodes[x], &b.nodes[y]);
        local.push(0.5 * (d(&nx.call, &ny.call)? + d(&nx.success, &ny.success)?));
    }
    let sys = LinearSystem { mu: params.mu, local, children };
    let (x, iterations) = match params.solver {
        Solver::Iterative => solve_iterative(&sys, params.tol),
        Solver::Direct => (solve_direct(&sys), 0),
    };
    let mut per_point: BTreeMap<String, f64> = BTreeMap::new();
    let mut values = Vec::with_capacity(pairs.len());
    for (i, &(pa, pb)) in pairs.iter().enumerate() {
        let pp = a.nodes[pa].pp.to_string();
        let slot = per_point.entry(pp.clone()).or_insert(0.0);
        *slot = slot.max(x[i]);
        values.push(PairValue { a: pa, b: pb, pp, local: sys.local[i], value: x[i] });
    }
    Ok(DistanceReport {
        metric: "tree".into(),
        mu: Some(params.mu),
        value: x[0],
        per_point,
        pairs_solved: pairs.len(),
        iterations,
        pairs: values,
    })
}
