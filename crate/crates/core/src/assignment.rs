//! Exact min-cost rectangular assignment (Hungarian method with potentials).
//!
//! Infinite costs mark forbidden pairs. A row whose every option is
//! forbidden (or that loses to other rows when columns run out) is left
//! unassigned.

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// Column chosen for each row, if any.
    pub row_to_col: Vec<Option<usize>>,
    /// Sum of finite costs over assigned pairs.
    pub total_cost: f64,
}

impl Assignment {
    pub fn col_to_row(&self, cols: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; cols];
        for (r, c) in self.row_to_col.iter().enumerate() {
            if let Some(c) = c {
                out[*c] = Some(r);
            }
        }
        out
    }
}

/// Assigns every row to a distinct column (or every column to a distinct
/// row when there are fewer columns) minimising total cost.
pub fn solve(cost: &[Vec<f64>]) -> Assignment {
    let rows = cost.len();
    let cols = cost.first().map_or(0, |r| r.len());
    if rows == 0 || cols == 0 {
        return Assignment { row_to_col: vec![None; rows], total_cost: 0.0 };
    }
    // Big-M replaces infinities so the potentials stay finite.
    let finite_max = cost.iter().flatten().filter(|c| c.is_finite()).fold(0.0f64, |m, &c| m.max(c.abs()));
    let big = (finite_max + 1.0) * (rows.max(cols) as f64 + 1.0) * 4.0;
    let at = |r: usize, c: usize| {
        let v = cost[r][c];
        if v.is_finite() {
            v
        } else {
            big
        }
    };

    let transposed = rows > cols;
    let (n, m) = if transposed { (cols, rows) } else { (rows, cols) };
    let a = |i: usize, j: usize| if transposed { at(j, i) } else { at(i, j) };

    // 1-based arrays; p[j] is the row matched to column j.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = a(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![None; rows];
    for j in 1..=m {
        if p[j] != 0 {
            let (r, c) = if transposed { (j - 1, p[j] - 1) } else { (p[j] - 1, j - 1) };
            if cost[r][c].is_finite() {
                row_to_col[r] = Some(c);
            }
        }
    }
    let total_cost = row_to_col
        .iter()
        .enumerate()
        .filter_map(|(r, c)| c.map(|c| cost[r][c]))
        .sum();
    Assignment { row_to_col, total_cost }
}
