use std::collections::BTreeMap;

use serde::Serialize;

use super::SweepPoint;
use crate::error::{Error, Result};

/// `p` dominates `q` when it is no worse on both axes (higher accuracy, lower
/// ECE) and strictly better on at least one.
pub fn dominates(p: (f64, f64), q: (f64, f64)) -> bool {
    p.0 >= q.0 && p.1 <= q.1 && (p.0 > q.0 || p.1 < q.1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParetoResult {
    pub acc_task: String,
    pub ece_task: String,
    pub points: Vec<SweepPoint>,
    /// Indices into `points` of the non-dominated set, ascending.
    pub frontier: Vec<usize>,
    /// Dominated point index -> first dominating point in lambda order.
    pub dominated_by: BTreeMap<usize, usize>,
}

impl ParetoResult {
    pub fn is_on_frontier(&self, idx: usize) -> bool {
        self.frontier.binary_search(&idx).is_ok()
    }

    pub fn frontier_points(&self) -> impl Iterator<Item = &SweepPoint> {
        self.frontier.iter().map(|&i| &self.points[i])
    }
}

/// Indices sorted by lambda, input position breaking ties.
fn lambda_order(points: &[SweepPoint]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].lambda.total_cmp(&points[b].lambda).then(a.cmp(&b)));
    order
}

/// Split a sweep into its non-dominated frontier and dominated points.
///
/// Membership comes from a sort-and-sweep over accuracy; witnesses are the
/// first dominating point in lambda order.
pub fn pareto_classify(points: &[SweepPoint], acc_task: &str, ece_task: &str) -> Result<ParetoResult> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    let axes: Vec<(f64, f64)> = points
        .iter()
        .map(|p| p.axes(acc_task, ece_task))
        .collect::<Result<_>>()?;

    // accuracy descending, ECE ascending
    let mut by_acc: Vec<usize> = (0..points.len()).collect();
    by_acc.sort_by(|&a, &b| {
        axes[b].0
            .total_cmp(&axes[a].0)
            .then(axes[a].1.total_cmp(&axes[b].1))
    });

    let mut on_frontier = vec![false; points.len()];
    let mut best_ece_above: Option<f64> = None;
    let mut i = 0;
    while i < by_acc.len() {
        let acc = axes[by_acc[i]].0;
        let mut j = i;
        while j < by_acc.len() && axes[by_acc[j]].0 == acc {
            j += 1;
        }
        let group_min = by_acc[i..j]
            .iter()
            .map(|&idx| axes[idx].1)
            .fold(f64::INFINITY, f64::min);
        for &idx in &by_acc[i..j] {
            let ece = axes[idx].1;
            on_frontier[idx] = !best_ece_above.is_some_and(|b| b <= ece) && ece <= group_min;
        }
        best_ece_above = Some(best_ece_above.map_or(group_min, |b| b.min(group_min)));
        i = j;
    }

    let order = lambda_order(points);
    let mut dominated_by = BTreeMap::new();
    for (idx, &on) in on_frontier.iter().enumerate() {
        if on {
            continue;
        }
        let witness = order
            .iter()
            .copied()
            .find(|&w| dominates(axes[w], axes[idx]))
            .expect("a dominated point has a dominator");
        dominated_by.insert(idx, witness);
    }

    Ok(ParetoResult {
        acc_task: acc_task.to_owned(),
        ece_task: ece_task.to_owned(),
        points: points.to_vec(),
        frontier: (0..points.len()).filter(|&i| on_frontier[i]).collect(),
        dominated_by,
    })
}

/// The sweet spot: the frontier point with the highest accuracy, ties broken
/// by lower ECE and then lower lambda. The sweep must contain both parents.
pub fn select_lambda_star(points: &[SweepPoint], acc_task: &str, ece_task: &str) -> Result<SweepPoint> {
    let has = |l: f64| points.iter().any(|p| p.lambda == l);
    if !has(0.0) || !has(1.0) {
        return Err(Error::MissingParents);
    }
    let result = pareto_classify(points, acc_task, ece_task)?;
    let star = result
        .frontier
        .iter()
        .copied()
        .max_by(|&a, &b| {
            let (pa, pb) = (&points[a], &points[b]);
            let (aa, ea) = pa.axes(acc_task, ece_task).unwrap();
            let (ab, eb) = pb.axes(acc_task, ece_task).unwrap();
            aa.total_cmp(&ab)
                .then(eb.total_cmp(&ea))
                .then(pb.lambda.total_cmp(&pa.lambda))
        })
        .expect("frontier is never empty");
    Ok(points[star].clone())
}
