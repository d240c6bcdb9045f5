use crate::error::{Error, Result};
use crate::model::{Node, PowerPolicy, Role, Scenario, SystemParams, TargetState};

use super::{evaluate_metric, McConfig, Metric};

/// Exhaustive choice of `choose` nodes out of `candidates`.
#[derive(Debug, Clone)]
pub struct SelectionProblem {
    pub params: SystemParams,
    pub candidates: Vec<Node>,
    pub choose: usize,
    pub metric: Metric,
    pub target: TargetState,
    pub mc: McConfig,
    pub policy: PowerPolicy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ranked {
    /// Node ids, sorted.
    pub ids: Vec<String>,
    pub value: f64,
    pub flag: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub best: Ranked,
    /// Every evaluated subset, best first. Subsets that cannot form a valid
    /// scenario carry `value = inf` and the reason in `flag`.
    pub ranking: Vec<Ranked>,
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn same_value(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

/// Ascending by value; values within 1e-12 relative count as ties, broken
/// by lexicographic id order.
fn rank(mut rows: Vec<Ranked>) -> Result<Selection> {
    rows.sort_by(|a, b| a.value.total_cmp(&b.value).then_with(|| a.ids.cmp(&b.ids)));
    let mut out = Vec::with_capacity(rows.len());
    let mut i = 0;
    while i < rows.len() {
        let mut j = i + 1;
        while j < rows.len() && same_value(rows[i].value, rows[j].value) {
            j += 1;
        }
        let mut group = rows[i..j].to_vec();
        group.sort_by(|a, b| a.ids.cmp(&b.ids));
        out.extend(group);
        i = j;
    }
    match out.first() {
        Some(b) if b.value.is_finite() => Ok(Selection {
            best: b.clone(),
            ranking: out,
        }),
        _ => Err(Error::NoFeasibleSubset),
    }
}

fn evaluate_subset(
    params: &SystemParams,
    nodes: Vec<Node>,
    policy: PowerPolicy,
    metric: Metric,
    t: &TargetState,
    mc: &McConfig,
) -> Ranked {
    let mut ids: Vec<String> = nodes.iter().map(|n| n.id.clone()).collect();
    ids.sort();
    let r = Scenario::new(params.clone(), nodes, policy).and_then(|s| {
        // Common random headings for every subset.
        let mut rng = mc.stream(0);
        evaluate_metric(&s, t, metric, metric.needs_velocity().then_some((mc, &mut rng)))
    });
    match r {
        Ok(v) => Ranked {
            ids,
            value: v.value,
            flag: v.flag,
        },
        Err(e) => Ranked {
            ids,
            value: f64::INFINITY,
            flag: match e {
                Error::NoInformation => "no_information".into(),
                other => other.to_string(),
            },
        },
    }
}

/// Evaluates every `C(n, k)` subset of the candidates with power
/// re-normalized per subset, and returns the minimizer.
pub fn select_nodes(p: &SelectionProblem) -> Result<Selection> {
    let n = p.candidates.len();
    if p.choose < 1 || p.choose > n {
        return Err(Error::invalid(
            "choose",
            format!("{} is outside 1..={n}", p.choose),
        ));
    }
    p.target.validate()?;
    if p.metric.needs_velocity() {
        p.mc.validate()?;
    }
    let mut cands = p.candidates.clone();
    cands.sort_by(|a, b| a.id.cmp(&b.id));
    if cands.windows(2).any(|w| w[0].id == w[1].id) {
        return Err(Error::Scenario("duplicate candidate id".into()));
    }
    let rows = combinations(n, p.choose)
        .into_iter()
        .map(|c| {
            let nodes = c.iter().map(|&i| cands[i].clone()).collect();
            evaluate_subset(&p.params, nodes, p.policy, p.metric, &p.target, &p.mc)
        })
        .collect();
    rank(rows)
}

/// Tries every node as the single transmitter with all others receiving from
/// it. Roles and explicit powers in `s` are ignored. The chosen transmitter
/// is the only entry of `best.ids`.
pub fn select_tx(s: &Scenario, t: &TargetState, metric: Metric, mc: &McConfig) -> Result<Selection> {
    if s.nodes.len() < 2 {
        return Err(Error::invalid("nodes", "need at least two nodes"));
    }
    t.validate()?;
    if metric.needs_velocity() {
        mc.validate()?;
    }
    let rows = s
        .nodes
        .iter()
        .map(|tx| {
            let nodes: Vec<Node> = s
                .nodes
                .iter()
                .map(|n| {
                    let role = if n.id == tx.id {
                        Role::Tx
                    } else {
                        Role::Rx { tx: tx.id.clone() }
                    };
                    Node {
                        role,
                        sensing_power: None,
                        ..n.clone()
                    }
                })
                .collect();
            let mut r = evaluate_subset(&s.params, nodes, s.power_policy, metric, t, mc);
            r.ids = vec![tx.id.clone()];
            r
        })
        .collect();
    rank(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Vec<Node> {
        let c = [42.0, 42.0];
        vec![
            Node::monostatic("d", [42.0, 84.0], c),
            Node::monostatic("a", [42.0, 0.0], c),
            Node::monostatic("c", [84.0, 42.0], c),
            Node::monostatic("b", [0.0, 42.0], c),
        ]
    }

    fn problem(k: usize, metric: Metric, target: [f64; 2]) -> SelectionProblem {
        SelectionProblem {
            params: SystemParams::table_one(),
            candidates: square(),
            choose: k,
            metric,
            target: TargetState::moving(target, 22.0, 0.3),
            mc: McConfig {
                draws: 20,
                seed: 1,
                speed: 22.0,
            },
            policy: PowerPolicy::NormalizedTotal,
        }
    }

    #[test]
    fn combination_count() {
        assert_eq!(combinations(8, 4).len(), 70);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(combinations(3, 1).len(), 3);
    }

    #[test]
    fn full_set_when_k_equals_n() {
        let s = select_nodes(&problem(4, Metric::Peb, [30.0, 50.0])).unwrap();
        assert_eq!(s.best.ids, vec!["a", "b", "c", "d"]);
        assert_eq!(s.ranking.len(), 1);
    }

    #[test]
    fn center_tie_breaks_lexicographically() {
        let s = select_nodes(&problem(2, Metric::Peb, [42.0, 42.0])).unwrap();
        assert_eq!(s.ranking.len(), 6);
        let v = s.best.value;
        let tied: Vec<_> = s.ranking.iter().filter(|r| same_value(r.value, v)).collect();
        assert!(tied.len() >= 2);
        let first = tied.iter().map(|r| &r.ids).min().unwrap();
        assert_eq!(&s.best.ids, first);
    }

    #[test]
    fn order_invariant() {
        let mut p = problem(2, Metric::Veb, [20.0, 60.0]);
        let a = select_nodes(&p).unwrap();
        p.candidates.reverse();
        let b = select_nodes(&p).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tx_selection_two_nodes() {
        let s = Scenario::new(
            SystemParams::table_one(),
            vec![
                Node::monostatic("a", [0.0, 0.0], [42.0, 42.0]),
                Node::monostatic("b", [84.0, 0.0], [42.0, 42.0]),
            ],
            PowerPolicy::NormalizedTotal,
        )
        .unwrap();
        let t = TargetState::moving([40.0, 50.0], 22.0, 1.0);
        let r = select_tx(&s, &t, Metric::Peb, &McConfig::default()).unwrap();
        assert_eq!(r.ranking.len(), 2);
        assert!(r.ranking.iter().all(|x| x.value.is_finite()));
    }

    #[test]
    fn all_infeasible_is_error() {
        let mut p = problem(1, Metric::Peb, [42.0, 42.0]);
        // every node faces away from the target
        for n in p.candidates.iter_mut() {
            n.orientation = crate::geom::wrap_angle(n.orientation + std::f64::consts::PI);
        }
        assert!(matches!(select_nodes(&p), Err(Error::NoFeasibleSubset)));
    }
}
