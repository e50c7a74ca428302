//! Dual solver for the working-set problem
//!
//! ```text
//! min ½‖w‖² + (C/m) Σ_i ξ_i   s.t.  w·δψ_c ≥ Δ_c − ξ_i,  ξ_i ≥ 0
//! ```
//!
//! over constraints `c` grouped by example `i`. The dual has one box-simplex
//! block per example (`α ≥ 0`, `Σ_{c∈i} α_c ≤ C/m`) and is solved by exact
//! coordinate and pairwise steps on the Gram matrix until the KKT residual
//! vanishes.

#[derive(Debug, Clone, Default)]
pub(crate) struct DualSolver {
    /// Feature differences of the constraints.
    dpsi: Vec<Vec<f64>>,
    loss: Vec<f64>,
    group: Vec<usize>,
    gram: Vec<Vec<f64>>,
    pub(crate) alpha: Vec<f64>,
    /// `K α`, i.e. `w·δψ_c` for every constraint.
    margin: Vec<f64>,
}

const TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 200_000;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl DualSolver {
    #[cfg(test)]
    fn len(&self) -> usize {
        self.loss.len()
    }

    pub(crate) fn push(&mut self, group: usize, dpsi: Vec<f64>, loss: f64) {
        let row: Vec<f64> = self.dpsi.iter().map(|d| dot(d, &dpsi)).collect();
        for (g, &k) in self.gram.iter_mut().zip(&row) {
            g.push(k);
        }
        let mut row = row;
        row.push(dot(&dpsi, &dpsi));
        let m = row[..self.alpha.len()].iter().zip(&self.alpha).map(|(k, a)| k * a).sum();
        self.gram.push(row);
        self.dpsi.push(dpsi);
        self.loss.push(loss);
        self.group.push(group);
        self.alpha.push(0.0);
        self.margin.push(m);
    }

    /// Current violation `Δ_c − w·δψ_c`.
    fn h(&self, c: usize) -> f64 {
        self.loss[c] - self.margin[c]
    }

    fn step(&mut self, c: usize, t: f64) {
        if t == 0.0 {
            return;
        }
        self.alpha[c] += t;
        for (m, k) in self.margin.iter_mut().zip(&self.gram[c]) {
            *m += t * k;
        }
    }

    /// Solves to optimality with budget `b = C/m` per group.
    pub(crate) fn solve(&mut self, b: f64, groups: usize) -> usize {
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); groups];
        for (c, &g) in self.group.iter().enumerate() {
            members[g].push(c);
        }
        let mut sweeps = 0;
        while sweeps < MAX_SWEEPS {
            sweeps += 1;
            let mut worst = 0.0f64;
            for idx in &members {
                if idx.is_empty() {
                    continue;
                }
                worst = worst.max(self.sweep_group(idx, b));
            }
            if worst <= TOL {
                break;
            }
        }
        sweeps
    }

    /// One pass of updates over a group; returns its KKT residual before
    /// the pass.
    fn sweep_group(&mut self, idx: &[usize], b: f64) -> f64 {
        let residual = self.residual(idx, b);
        for &c in idx {
            let used: f64 = idx.iter().map(|&d| self.alpha[d]).sum();
            let room = (b - used).max(0.0);
            let k = self.gram[c][c];
            let h = self.h(c);
            let t = if k > 0.0 { h / k } else if h > 0.0 { room } else { -self.alpha[c] };
            let t = t.clamp(-self.alpha[c], room);
            self.step(c, t);
        }
        // transfer mass between the most and least violated members
        let up = *idx
            .iter()
            .max_by(|&&x, &&y| self.h(x).total_cmp(&self.h(y)))
            .unwrap();
        let down = idx
            .iter()
            .copied()
            .filter(|&d| d != up && self.alpha[d] > 0.0)
            .min_by(|&x, &y| self.h(x).total_cmp(&self.h(y)));
        if let Some(d) = down {
            let gap = self.h(up) - self.h(d);
            if gap > 0.0 {
                let curv = self.gram[up][up] + self.gram[d][d] - 2.0 * self.gram[up][d];
                let t = if curv > 0.0 { gap / curv } else { self.alpha[d] };
                let t = t.min(self.alpha[d]);
                self.step(up, t);
                self.step(d, -t);
            }
        }
        residual
    }

    fn residual(&self, idx: &[usize], b: f64) -> f64 {
        let used: f64 = idx.iter().map(|&d| self.alpha[d]).sum();
        let up = idx.iter().map(|&c| self.h(c)).fold(f64::NEG_INFINITY, f64::max);
        let down = idx
            .iter()
            .filter(|&&c| self.alpha[c] > 0.0)
            .map(|&c| self.h(c))
            .fold(f64::INFINITY, f64::min);
        let mut r = 0.0f64;
        if down.is_finite() {
            // positive weight requires zero slack gap to the maximum
            r = r.max(-down.min(0.0)).max(up - down);
        }
        if used < b * (1.0 - 1e-15) {
            r = r.max(up);
        }
        r
    }

    pub(crate) fn weights(&self, dim: usize) -> Vec<f64> {
        let mut w = vec![0.0; dim];
        for (a, d) in self.alpha.iter().zip(&self.dpsi) {
            if *a != 0.0 {
                for (wi, di) in w.iter_mut().zip(d) {
                    *wi += a * di;
                }
            }
        }
        w
    }

    #[cfg(test)]
    fn dual_objective(&self) -> f64 {
        let lin: f64 = self.alpha.iter().zip(&self.loss).map(|(a, l)| a * l).sum();
        let quad: f64 = self.alpha.iter().zip(&self.margin).map(|(a, m)| a * m).sum();
        lin - 0.5 * quad
    }
}
