//! Slow, independent reference solvers for the test suites.
//!
//! Nothing here calls into the closed forms it is meant to check; every
//! routine recomputes SINRs, utilities and costs from scratch.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub primary: f64,
    pub oracle: f64,
    pub abs_gap: f64,
    pub rel_gap: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl OracleReport {
    /// Compares on the relative scale `|a − b| / max(1, |b|)`.
    pub fn new(primary: f64, oracle: f64, tolerance: f64) -> Self {
        let abs_gap = (primary - oracle).abs();
        let rel_gap = abs_gap / oracle.abs().max(1.0);
        Self { primary, oracle, abs_gap, rel_gap, tolerance, pass: rel_gap <= tolerance }
    }
}

/// Straight double loop over interferers.
pub fn naive_sinr(h: &[f64], w: &[f64], eps: f64, noise: f64) -> Vec<f64> {
    let k = h.len();
    let mut out = vec![0.0; k];
    for i in 0..k {
        let mut interference = noise;
        for j in 0..k {
            if j < i {
                interference += eps * w[j] * h[j];
            }
            if j > i {
                interference += w[j] * h[j];
            }
        }
        out[i] = w[i] * h[i] / interference;
    }
    out
}

fn utility(rate: f64, alpha: f64) -> f64 {
    let r = rate.max(1.0);
    if alpha == 1.0 {
        r.ln()
    } else {
        (r.powf(1.0 - alpha) - 1.0) / (1.0 - alpha)
    }
}

/// Gaussian elimination with partial pivoting. `None` if singular.
pub fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().zip(b).map(|(r, &v)| r.iter().copied().chain([v]).collect()).collect();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs()))?;
        if m[p][c].abs() < 1e-300 {
            return None;
        }
        m.swap(c, p);
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for j in c..=n {
                m[r][j] -= f * m[c][j];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    Some(x)
}

/// Minimal received powers from the linear system `(I − diag(Γ̄) H) p =
/// Γ̄ σ`, or `None` if the solution is not positive.
pub fn pareto_oracle(csc: &[f64], eps: f64, noise: f64) -> Option<Vec<f64>> {
    let k = csc.len();
    let a: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    let hij = if i < j {
                        1.0
                    } else if i > j {
                        eps
                    } else {
                        0.0
                    };
                    if i == j {
                        1.0
                    } else {
                        -csc[i] * hij
                    }
                })
                .collect()
        })
        .collect();
    let b: Vec<f64> = csc.iter().map(|g| g * noise).collect();
    let p = dense_solve(&a, &b)?;
    p.iter().all(|&x| x > 0.0 && x.is_finite()).then_some(p)
}

/// Perron root of `diag(Γ̄) H` by power iteration on the shifted matrix
/// `F + I`, which has the same dominant eigenvector and no competing
/// eigenvalue of equal modulus.
pub fn perron_root(csc: &[f64], eps: f64) -> f64 {
    let k = csc.len();
    if k <= 1 {
        return 0.0;
    }
    let mut v = vec![1.0 / k as f64; k];
    let mut est = 0.0;
    for it in 0..2_000_000 {
        let mut nv = vec![0.0; k];
        for i in 0..k {
            let mut s = v[i];
            for j in 0..k {
                let hij = if i < j {
                    1.0
                } else if i > j {
                    eps
                } else {
                    0.0
                };
                s += csc[i] * hij * v[j];
            }
            nv[i] = s;
        }
        let norm: f64 = nv.iter().sum();
        let new_est = norm / v.iter().sum::<f64>() - 1.0;
        for x in nv.iter_mut() {
            *x /= norm;
        }
        v = nv;
        if it > 10 && (new_est - est).abs() <= 1e-15 * new_est.abs().max(1e-300) {
            return new_est;
        }
        est = new_est;
    }
    est
}

/// A cluster instance for [`grid_slave`].
#[derive(Debug, Clone)]
pub struct SlaveInstance {
    pub gains: Vec<f64>,
    pub csc: Vec<f64>,
    pub noise: f64,
    pub eps: f64,
    pub bandwidth: f64,
    pub alpha: f64,
}

impl SlaveInstance {
    pub fn utility(&self, w: &[f64]) -> f64 {
        naive_sinr(&self.gains, w, self.eps, self.noise)
            .iter()
            .map(|&g| utility(self.bandwidth * (1.0 + g).log2(), self.alpha))
            .sum()
    }

    /// Raise weights until every SINR floor holds (monotone fixed point).
    /// `None` if some weight must exceed one.
    fn repair(&self, w: &[f64]) -> Option<Vec<f64>> {
        let k = w.len();
        let mut w = w.to_vec();
        for _ in 0..20_000 {
            let mut moved = false;
            for i in 0..k {
                let mut interference = self.noise;
                for j in 0..k {
                    if j < i {
                        interference += self.eps * w[j] * self.gains[j];
                    }
                    if j > i {
                        interference += w[j] * self.gains[j];
                    }
                }
                let need = self.csc[i] * interference / self.gains[i] * (1.0 + 1e-13);
                if need > w[i] {
                    if need > 1.0 {
                        return None;
                    }
                    if need > w[i] * (1.0 + 1e-15) {
                        moved = true;
                    }
                    w[i] = need;
                }
            }
            if !moved {
                return Some(w);
            }
        }
        None
    }
}

/// Best feasible weights found by a log grid over `[0, 1]^K` (each point
/// repaired onto the feasible set) followed by random local refinement
/// from the best few points. `None` when nothing is feasible.
pub fn grid_slave(p: &SlaveInstance, resolution: usize, seed: u64) -> Option<(Vec<f64>, f64)> {
    let k = p.gains.len();
    let mut levels: Vec<f64> = (0..resolution)
        .map(|i| 10f64.powf(-8.0 * (1.0 - i as f64 / (resolution - 1).max(1) as f64)))
        .collect();
    levels.push(1.0);
    levels.dedup();

    // Min-power point along its full-power ray is always worth a look.
    let mut starts: Vec<Vec<f64>> = Vec::new();
    if let Some(pstar) = pareto_oracle(&p.csc, p.eps, p.noise) {
        let w: Vec<f64> = pstar.iter().zip(&p.gains).map(|(x, h)| x / h).collect();
        let tmax = w.iter().fold(f64::INFINITY, |m, &x| m.min(1.0 / x));
        if tmax >= 1.0 {
            for i in 0..=40 {
                let t = tmax.powf(i as f64 / 40.0);
                starts.push(w.iter().map(|x| (x * t).min(1.0)).collect());
            }
        }
    }

    let mut scored: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut idx = vec![0usize; k];
    loop {
        let w: Vec<f64> = idx.iter().map(|&i| levels[i]).collect();
        if let Some(r) = p.repair(&w) {
            scored.push((p.utility(&r), r));
        }
        let mut d = 0;
        while d < k {
            idx[d] += 1;
            if idx[d] < levels.len() {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
        if d == k {
            break;
        }
    }
    for s in starts {
        if let Some(r) = p.repair(&s) {
            scored.push((p.utility(&r), r));
        }
    }
    if scored.is_empty() {
        return None;
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    scored.truncate(6);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = scored[0].clone();
    for (mut u, mut w) in scored {
        let mut radius = 0.5;
        while radius > 1e-10 {
            let mut improved = false;
            for _ in 0..(12 * k) {
                let cand: Vec<f64> = w
                    .iter()
                    .map(|&x| {
                        let step = radius * (2.0 * rng.random::<f64>() - 1.0);
                        (x * step.exp()).min(1.0)
                    })
                    .collect();
                if let Some(r) = p.repair(&cand) {
                    let v = p.utility(&r);
                    if v > u {
                        u = v;
                        w = r;
                        improved = true;
                    }
                }
            }
            // Coordinate pushes to the upper bound catch full-power corners.
            for i in 0..k {
                let mut cand = w.clone();
                cand[i] = 1.0;
                if let Some(r) = p.repair(&cand) {
                    let v = p.utility(&r);
                    if v > u {
                        u = v;
                        w = r;
                        improved = true;
                    }
                }
            }
            if !improved {
                radius *= 0.5;
            }
        }
        if u > best.0 {
            best = (u, w);
        }
    }
    Some((best.1, best.0))
}

fn oracle_edge(members: &[f64], h: f64, room: bool) -> f64 {
    if !room {
        return f64::INFINITY;
    }
    let mut cost = 0.0;
    let stronger: Vec<f64> = members.iter().copied().filter(|&g| g >= h).collect();
    let weaker: Vec<f64> = members.iter().copied().filter(|&g| g <= h).collect();
    if let Some(m) = stronger.iter().copied().reduce(f64::min) {
        cost += m / h;
    }
    if let Some(m) = weaker.iter().copied().reduce(f64::max) {
        cost += h / m;
    }
    cost
}

/// Exhaustive rectangular assignment. Maximises the number of finite
/// pairs, then minimises their total cost. Returns `(pairs, cost)`.
pub fn enum_assignment(cost: &[Vec<f64>]) -> (usize, f64) {
    let rows = cost.len();
    let cols = cost.first().map_or(0, |r| r.len());
    fn go(cost: &[Vec<f64>], r: usize, used: &mut Vec<bool>) -> (usize, f64) {
        if r == cost.len() {
            return (0, 0.0);
        }
        // Row left unmatched.
        let mut best = go(cost, r + 1, used);
        for c in 0..used.len() {
            if !used[c] && cost[r][c].is_finite() {
                used[c] = true;
                let (n, v) = go(cost, r + 1, used);
                used[c] = false;
                let cand = (n + 1, v + cost[r][c]);
                if cand.0 > best.0 || (cand.0 == best.0 && cand.1 < best.1) {
                    best = cand;
                }
            }
        }
        best
    }
    if rows <= cols {
        go(cost, 0, &mut vec![false; cols])
    } else {
        let t: Vec<Vec<f64>> = (0..cols).map(|c| (0..rows).map(|r| cost[r][c]).collect()).collect();
        go(&t, 0, &mut vec![false; rows])
    }
}

/// Exhaustive optimum of one matching round: clusters (member gains and
/// whether they have room) against candidate gains. Returns
/// `(pairs, cost)` as [`enum_assignment`].
pub fn enum_round(clusters: &[(Vec<f64>, bool)], candidates: &[f64]) -> (usize, f64) {
    let cost: Vec<Vec<f64>> = clusters
        .iter()
        .map(|(m, room)| candidates.iter().map(|&h| oracle_edge(m, h, *room)).collect())
        .collect();
    enum_assignment(&cost)
}

/// Every way to split `items` into groups of at most `cap`, each group
/// containing exactly one of `seeds`. Used to enumerate small partitions.
pub fn enum_partitions(items: &[usize], seeds: &[usize], cap: usize) -> Vec<Vec<Vec<usize>>> {
    let rest: Vec<usize> = items.iter().copied().filter(|i| !seeds.contains(i)).collect();
    let mut out = Vec::new();
    let mut groups: Vec<Vec<usize>> = seeds.iter().map(|&s| vec![s]).collect();
    fn go(rest: &[usize], cap: usize, groups: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        let Some((&first, tail)) = rest.split_first() else {
            out.push(groups.clone());
            return;
        };
        for g in 0..groups.len() {
            if groups[g].len() < cap {
                groups[g].push(first);
                go(tail, cap, groups, out);
                groups[g].pop();
            }
        }
    }
    go(&rest, cap, &mut groups, &mut out);
    out
}

/// Total single-round cost of a partition whose groups each start from
/// their seed (first element).
pub fn partition_cost(groups: &[Vec<usize>], gain: &dyn Fn(usize) -> f64) -> f64 {
    groups
        .iter()
        .map(|g| {
            let seed = [gain(g[0])];
            g[1..].iter().map(|&u| oracle_edge(&seed, gain(u), true)).sum::<f64>()
        })
        .sum()
}

/// A bandwidth instance for [`concave_master`].
#[derive(Debug, Clone)]
pub struct MasterOracleInstance {
    pub densities: Vec<Vec<f64>>,
    pub lower: Vec<f64>,
    pub budget: f64,
}

impl MasterOracleInstance {
    pub fn objective(&self, theta: &[f64], alpha: f64) -> f64 {
        self.densities
            .iter()
            .zip(theta)
            .map(|(d, &t)| {
                d.iter()
                    .map(|&v| {
                        let r = t * v;
                        if alpha == 1.0 {
                            r.ln()
                        } else {
                            (r.powf(1.0 - alpha) - 1.0) / (1.0 - alpha)
                        }
                    })
                    .sum::<f64>()
            })
            .sum()
    }

    fn gradient(&self, theta: &[f64], alpha: f64) -> Vec<f64> {
        self.densities
            .iter()
            .zip(theta)
            .map(|(d, &t)| d.iter().map(|&v| v.powf(1.0 - alpha) * t.powf(-alpha)).sum())
            .collect()
    }

    /// Euclidean projection onto `{θ ≥ lower, Σθ = budget}`.
    fn project(&self, y: &[f64]) -> Vec<f64> {
        let free = self.budget - self.lower.iter().sum::<f64>();
        let z: Vec<f64> = y.iter().zip(&self.lower).map(|(a, b)| a - b).collect();
        let mut s = z.clone();
        s.sort_by(|a, b| b.total_cmp(a));
        let mut acc = 0.0;
        let mut tau = 0.0;
        for (i, &v) in s.iter().enumerate() {
            acc += v;
            let t = (acc - free) / (i + 1) as f64;
            if v - t > 0.0 {
                tau = t;
            }
        }
        z.iter().zip(&self.lower).map(|(v, l)| (v - tau).max(0.0) + l).collect()
    }
}

/// Projected-gradient ascent with backtracking steps, stopped when the
/// projected step moves less than `1e-8` of the budget.
pub fn concave_master(inst: &MasterOracleInstance, alpha: f64) -> Vec<f64> {
    let n = inst.lower.len();
    let free = inst.budget - inst.lower.iter().sum::<f64>();
    let mut theta: Vec<f64> = inst.lower.iter().map(|l| l + free / n as f64).collect();
    let mut f = inst.objective(&theta, alpha);
    let mut step = inst.budget;
    for _ in 0..200_000 {
        let g = inst.gradient(&theta, alpha);
        let gnorm = g.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
        let mut moved = false;
        let mut s = step * 2.0;
        while s > 1e-18 * inst.budget {
            let y: Vec<f64> = theta.iter().zip(&g).map(|(t, gi)| t + s * gi / gnorm).collect();
            let cand = inst.project(&y);
            let fc = inst.objective(&cand, alpha);
            if fc > f {
                let dist: f64 = cand.iter().zip(&theta).map(|(a, b)| (a - b).abs()).sum();
                theta = cand;
                f = fc;
                step = s;
                moved = dist > 1e-8 * inst.budget;
                break;
            }
            s *= 0.5;
        }
        if !moved {
            break;
        }
    }
    theta
}
