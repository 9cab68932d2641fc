//! Exact discrete optimal transport on small supports.
//!
//! The solver is successive-shortest-paths min-cost flow with node
//! potentials (Dijkstra on the residual graph), which is exact for the
//! transportation LP up to floating-point roundoff. Concave costs such as
//! the truncated Hölder distance rule out the monotone-coupling shortcut,
//! so a genuine LP-grade solver is required.
//!
//! Callers keep instances small two ways: common mass between the two
//! measures is removed first (valid whenever the cost is a metric), and
//! what remains is coarsened to at most `cap` atoms per side by
//! mean-preserving equal-mass slices. The coarsening error is therefore
//! proportional to the *difference* mass, not to the total mass.

use crate::error::LabError;
use crate::Result;

/// A weighted point on the line/circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub pos: f64,
    pub mass: f64,
}

/// Exact minimum transport cost between two equal-mass atom families.
pub fn min_cost_transport(
    sources: &[Atom],
    sinks: &[Atom],
    cost: impl Fn(f64, f64) -> f64,
) -> Result<f64> {
    let ns = sources.len();
    let nt = sinks.len();
    let total_src: f64 = sources.iter().map(|a| a.mass).sum();
    let total_dst: f64 = sinks.iter().map(|a| a.mass).sum();
    if ns == 0 || nt == 0 {
        if total_src.abs() < 1e-12 && total_dst.abs() < 1e-12 {
            return Ok(0.0);
        }
        return Err(LabError::Transport("empty side with nonzero mass".into()));
    }
    if (total_src - total_dst).abs() > 1e-9 * total_src.max(total_dst).max(1.0) {
        return Err(LabError::Transport(format!(
            "mass mismatch: {total_src} vs {total_dst}"
        )));
    }
    // equalize masses exactly; the relative adjustment is within float noise
    let scale = total_src / total_dst;

    let mut supply: Vec<f64> = sources.iter().map(|a| a.mass).collect();
    let mut demand: Vec<f64> = sinks.iter().map(|a| a.mass * scale).collect();
    let total = total_src;
    let eps = 1e-14 * total.max(1.0);

    let c = |s: usize, t: usize| cost(sources[s].pos, sinks[t].pos);

    let n_nodes = ns + nt;
    let mut flow = vec![0.0_f64; ns * nt];
    let mut potential = vec![0.0_f64; n_nodes];
    let max_aug = 80 * (n_nodes + 1);
    let stop = 1e-12 * total.max(1e-300);

    let mut dist = vec![0.0_f64; n_nodes];
    let mut parent = vec![usize::MAX; n_nodes];
    let mut done = vec![false; n_nodes];
    let mut aug = 0usize;

    loop {
        let remaining: f64 = supply.iter().sum();
        if remaining <= stop {
            break;
        }
        aug += 1;
        if aug > max_aug {
            return Err(LabError::Transport(format!(
                "augmentation cap hit with {remaining:.3e} mass unrouted"
            )));
        }
        // multi-source Dijkstra over the residual graph
        for v in 0..n_nodes {
            dist[v] = f64::INFINITY;
            parent[v] = usize::MAX;
            done[v] = false;
        }
        for (s, &sup) in supply.iter().enumerate() {
            if sup > 0.0 {
                dist[s] = 0.0;
            }
        }
        loop {
            let mut u = usize::MAX;
            let mut best = f64::INFINITY;
            for v in 0..n_nodes {
                if !done[v] && dist[v] < best {
                    best = dist[v];
                    u = v;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            if u < ns {
                // forward arcs source u -> every sink
                for t in 0..nt {
                    let v = ns + t;
                    if done[v] {
                        continue;
                    }
                    let rc = (c(u, t) + potential[u] - potential[v]).max(0.0);
                    let nd = dist[u] + rc;
                    if nd < dist[v] {
                        dist[v] = nd;
                        parent[v] = u;
                    }
                }
            } else {
                // backward arcs sink -> sources with positive flow
                let t = u - ns;
                for s in 0..ns {
                    if done[s] || flow[s * nt + t] <= eps {
                        continue;
                    }
                    let rc = (-c(s, t) + potential[u] - potential[s]).max(0.0);
                    let nd = dist[u] + rc;
                    if nd < dist[s] {
                        dist[s] = nd;
                        parent[s] = u;
                    }
                }
            }
        }
        // cheapest reachable sink with unmet demand
        let mut t_star = usize::MAX;
        let mut best = f64::INFINITY;
        for (t, &dem) in demand.iter().enumerate() {
            let v = ns + t;
            if dem > 0.0 && dist[v] < best {
                best = dist[v];
                t_star = t;
            }
        }
        if t_star == usize::MAX {
            // all residual demand is float crumb: supplies and demands can
            // only disagree at roundoff scale here
            if remaining <= 1e-9 * total.max(1.0) {
                break;
            }
            return Err(LabError::Transport("no augmenting path found".into()));
        }
        // trace back to the root source, collecting the bottleneck
        let mut bottleneck = demand[t_star];
        let mut v = ns + t_star;
        while parent[v] != usize::MAX {
            let p = parent[v];
            if v < ns {
                // arrived through a backward arc; residual is the flow on (v, p-ns)
                bottleneck = bottleneck.min(flow[v * nt + (p - ns)]);
            }
            v = p;
        }
        let s_root = v;
        debug_assert!(s_root < ns);
        bottleneck = bottleneck.min(supply[s_root]);
        if !(bottleneck > 0.0) {
            return Err(LabError::Transport("zero bottleneck augmentation".into()));
        }
        // apply the augmentation
        let mut v = ns + t_star;
        while parent[v] != usize::MAX {
            let p = parent[v];
            if v >= ns {
                flow[p * nt + (v - ns)] += bottleneck;
            } else {
                flow[v * nt + (p - ns)] -= bottleneck;
            }
            v = p;
        }
        supply[s_root] -= bottleneck;
        demand[t_star] -= bottleneck;
        // potential update keeps reduced costs nonnegative
        for v in 0..n_nodes {
            if dist[v].is_finite() {
                potential[v] += dist[v];
            }
        }
    }
    let mut total_cost = 0.0;
    for s in 0..ns {
        for t in 0..nt {
            let f = flow[s * nt + t];
            if f > 0.0 {
                total_cost += f * c(s, t);
            }
        }
    }
    Ok(total_cost)
}

/// Mean-preserving coarsening to at most `cap` atoms: sort by position,
/// cut into equal-mass slices, replace each slice by its barycenter.
pub fn quantile_coarsen(atoms: &[Atom], cap: usize) -> Vec<Atom> {
    let live: Vec<Atom> = atoms.iter().copied().filter(|a| a.mass > 0.0).collect();
    if live.len() <= cap {
        return live;
    }
    let mut sorted = live;
    sorted.sort_by(|a, b| a.pos.partial_cmp(&b.pos).unwrap());
    let total: f64 = sorted.iter().map(|a| a.mass).sum();
    let slice = total / cap as f64;
    let mut out = Vec::with_capacity(cap);
    let mut acc_mass = 0.0;
    let mut acc_moment = 0.0;
    let mut room = slice;
    for a in sorted {
        let mut m = a.mass;
        while m > 0.0 {
            let take = m.min(room);
            acc_mass += take;
            acc_moment += take * a.pos;
            room -= take;
            m -= take;
            if room <= 1e-15 * slice {
                out.push(Atom { pos: acc_moment / acc_mass, mass: acc_mass });
                acc_mass = 0.0;
                acc_moment = 0.0;
                room = slice;
            }
        }
    }
    if acc_mass > 1e-12 * total {
        out.push(Atom { pos: acc_moment / acc_mass, mass: acc_mass });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    /// Exhaustive assignment oracle: equal masses, equal counts.
    fn assignment_oracle(xs: &[f64], ys: &[f64], cost: impl Fn(f64, f64) -> f64 + Copy) -> f64 {
        fn rec(
            xs: &[f64],
            ys: &[f64],
            used: &mut Vec<bool>,
            i: usize,
            acc: f64,
            best: &mut f64,
            cost: impl Fn(f64, f64) -> f64 + Copy,
        ) {
            if acc >= *best {
                return;
            }
            if i == xs.len() {
                *best = acc;
                return;
            }
            for j in 0..ys.len() {
                if !used[j] {
                    used[j] = true;
                    rec(xs, ys, used, i + 1, acc + cost(xs[i], ys[j]), best, cost);
                    used[j] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        rec(xs, ys, &mut vec![false; ys.len()], 0, 0.0, &mut best, cost);
        best / xs.len() as f64
    }

    #[test]
    fn matches_assignment_oracle_on_concave_cost() {
        let mut rng = crate::fit::test_rng(101);
        let dstar = |x: f64, y: f64| (6.0 * crate::dynamics::circle_dist(x, y)).min(1.0);
        for _ in 0..25 {
            let n = rng.gen_range(2..=8);
            let xs: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
            let ys: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
            let src: Vec<Atom> = xs.iter().map(|&p| Atom { pos: p, mass: 1.0 / n as f64 }).collect();
            let dst: Vec<Atom> = ys.iter().map(|&p| Atom { pos: p, mass: 1.0 / n as f64 }).collect();
            let solver = min_cost_transport(&src, &dst, dstar).unwrap();
            let oracle = assignment_oracle(&xs, &ys, dstar);
            assert_abs_diff_eq!(solver, oracle, epsilon = 1e-9);
        }
    }

    /// Exhaustive transportation-polytope oracle: every basic solution is a
    /// spanning tree of the bipartite support graph; enumerate 3x3 trees.
    fn tree_oracle(sup: [f64; 3], dem: [f64; 3], c: &[[f64; 3]; 3]) -> f64 {
        let mut best = f64::INFINITY;
        // choose 5 of the 9 arcs
        for mask in 0u32..(1 << 9) {
            if mask.count_ones() != 5 {
                continue;
            }
            let arcs: Vec<(usize, usize)> = (0..9)
                .filter(|b| mask & (1 << b) != 0)
                .map(|b| (b / 3, b % 3))
                .collect();
            // solve conservation on the tree by leaf elimination
            let mut flows = vec![f64::NAN; 5];
            let mut sup = sup;
            let mut dem = dem;
            let mut remaining: Vec<usize> = (0..5).collect();
            let mut ok = true;
            while !remaining.is_empty() {
                let mut progressed = false;
                for (pos, &ai) in remaining.iter().enumerate() {
                    let (s, t) = arcs[ai];
                    let s_deg = remaining.iter().filter(|&&b| arcs[b].0 == s).count();
                    let t_deg = remaining.iter().filter(|&&b| arcs[b].1 == t).count();
                    if s_deg == 1 {
                        flows[ai] = sup[s];
                        dem[t] -= sup[s];
                        sup[s] = 0.0;
                        remaining.remove(pos);
                        progressed = true;
                        break;
                    } else if t_deg == 1 {
                        flows[ai] = dem[t];
                        sup[s] -= dem[t];
                        dem[t] = 0.0;
                        remaining.remove(pos);
                        progressed = true;
                        break;
                    }
                }
                if !progressed {
                    ok = false; // has a cycle; not a tree
                    break;
                }
            }
            if !ok || sup.iter().any(|&x| x.abs() > 1e-9) || dem.iter().any(|&x| x.abs() > 1e-9) {
                continue;
            }
            if flows.iter().any(|&f| f < -1e-12) {
                continue;
            }
            let cost: f64 = arcs.iter().zip(&flows).map(|(&(s, t), &f)| f * c[s][t]).sum();
            best = best.min(cost);
        }
        best
    }

    #[test]
    fn matches_tree_enumeration_with_unequal_weights() {
        let mut rng = crate::fit::test_rng(103);
        for _ in 0..20 {
            let mut sup = [rng.gen::<f64>() + 0.1, rng.gen::<f64>() + 0.1, rng.gen::<f64>() + 0.1];
            let s: f64 = sup.iter().sum();
            sup.iter_mut().for_each(|x| *x /= s);
            let mut dem = [rng.gen::<f64>() + 0.1, rng.gen::<f64>() + 0.1, rng.gen::<f64>() + 0.1];
            let d: f64 = dem.iter().sum();
            dem.iter_mut().for_each(|x| *x /= d);
            let xs: [f64; 3] = [rng.gen(), rng.gen(), rng.gen()];
            let ys: [f64; 3] = [rng.gen(), rng.gen(), rng.gen()];
            let cost_fn =
                |x: f64, y: f64| (8.0 * crate::dynamics::circle_dist(x, y).powf(0.7)).min(1.0);
            let mut c = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    c[i][j] = cost_fn(xs[i], ys[j]);
                }
            }
            let src: Vec<Atom> = (0..3).map(|i| Atom { pos: xs[i], mass: sup[i] }).collect();
            let dst: Vec<Atom> = (0..3).map(|j| Atom { pos: ys[j], mass: dem[j] }).collect();
            let solver = min_cost_transport(&src, &dst, cost_fn).unwrap();
            let oracle = tree_oracle(sup, dem, &c);
            assert_abs_diff_eq!(solver, oracle, epsilon = 1e-9);
        }
    }

    #[test]
    fn coarsening_preserves_mass_and_mean() {
        let mut rng = crate::fit::test_rng(107);
        let atoms: Vec<Atom> = (0..2000)
            .map(|_| Atom { pos: rng.gen(), mass: rng.gen::<f64>() + 0.01 })
            .collect();
        let total: f64 = atoms.iter().map(|a| a.mass).sum();
        let mean: f64 = atoms.iter().map(|a| a.mass * a.pos).sum::<f64>() / total;
        let coarse = quantile_coarsen(&atoms, 128);
        assert!(coarse.len() <= 129);
        let ctotal: f64 = coarse.iter().map(|a| a.mass).sum();
        let cmean: f64 = coarse.iter().map(|a| a.mass * a.pos).sum::<f64>() / ctotal;
        assert_abs_diff_eq!(ctotal, total, epsilon = 1e-9);
        assert_abs_diff_eq!(cmean, mean, epsilon = 1e-9);
    }
}
