//! Solving Gram-type problems through their dual.
//!
//! A problem qualifies when every PSD block is a plain matrix variable: `F0 = 0`
//! and each upper-triangle position is driven by exactly one variable that
//! appears nowhere else ("selector"). All remaining variables must be free,
//! i.e. absent from every block. The dual then lives in the equality space,
//! which is much smaller for coefficient-matching problems.

use nalgebra::DMatrix;

use crate::sdp::{EqConstraints, PsdBlock, SdpProblem, SdpSolution, SolveStatus};

#[derive(Clone, Copy, Debug)]
struct Selector {
    block: usize,
    i: usize,
    j: usize,
    /// `1/(mult·v)` where `mult` is 2 off the diagonal and `v` the triplet value.
    scale: f64,
    v: f64,
}

pub(crate) struct Dualized {
    pub problem: SdpProblem,
    selectors: Vec<Option<Selector>>,
    /// Equality row of the dual problem for each free variable.
    free_rows: Vec<Option<usize>>,
}

pub(crate) fn dualize(p: &SdpProblem) -> Option<Dualized> {
    let mut selectors: Vec<Option<Selector>> = vec![None; p.vars];
    let mut seen = vec![false; p.vars];
    for (b, blk) in p.psd_blocks.iter().enumerate() {
        if blk.f0.iter().any(|t| t.2 != 0.0) {
            return None;
        }
        let mut covered = vec![false; blk.size * blk.size];
        for &(var, i, j, v) in &blk.fj {
            if seen[var] || v == 0.0 || covered[i * blk.size + j] {
                return None;
            }
            seen[var] = true;
            covered[i * blk.size + j] = true;
            let mult = if i == j { 1.0 } else { 2.0 };
            selectors[var] = Some(Selector {
                block: b,
                i,
                j,
                scale: 1.0 / (mult * v),
                v,
            });
        }
        for i in 0..blk.size {
            for j in i..blk.size {
                if !covered[i * blk.size + j] {
                    return None;
                }
            }
        }
    }

    let rows = p.eq.rows();
    let mut blocks: Vec<PsdBlock> = p.psd_blocks.iter().map(|b| PsdBlock::new(b.size)).collect();
    for (var, sel) in selectors.iter().enumerate() {
        if let Some(s) = sel {
            let c = p.objective[var];
            if c != 0.0 {
                blocks[s.block].f0.push((s.i, s.j, c * s.scale));
            }
        }
    }
    let mut free_rows = vec![None; p.vars];
    let mut nfree = 0;
    for var in 0..p.vars {
        if selectors[var].is_none() {
            free_rows[var] = Some(nfree);
            nfree += 1;
        }
    }
    let mut eq = EqConstraints {
        a: Vec::new(),
        b: vec![0.0; nfree],
    };
    for var in 0..p.vars {
        if let Some(r) = free_rows[var] {
            eq.b[r] = p.objective[var];
        }
    }
    for &(row, var, a) in &p.eq.a {
        if a == 0.0 {
            continue;
        }
        match (selectors[var], free_rows[var]) {
            (Some(s), _) => blocks[s.block].fj.push((row, s.i, s.j, -a * s.scale)),
            (None, Some(r)) => eq.a.push((r, row, a)),
            (None, None) => unreachable!("every variable is a selector or free"),
        }
    }
    let problem = SdpProblem {
        vars: rows,
        objective: p.eq.b.iter().map(|b| -b).collect(),
        psd_blocks: blocks,
        eq,
    };
    Some(Dualized {
        problem,
        selectors,
        free_rows,
    })
}

impl Dualized {
    /// Maps a solution of the dual problem back to the original problem.
    pub fn recover(&self, original: &SdpProblem, d: &SdpSolution) -> SdpSolution {
        let status = match d.status {
            SolveStatus::Infeasible => SolveStatus::Unbounded,
            SolveStatus::Unbounded => SolveStatus::Infeasible,
            s => s,
        };
        let mut y = vec![0.0; original.vars];
        for var in 0..original.vars {
            if let Some(s) = self.selectors[var] {
                if let Some(x) = d.z.get(s.block) {
                    y[var] = x[(s.i, s.j)] / s.v;
                }
            } else if let Some(r) = self.free_rows[var] {
                y[var] = -d.nu.get(r).copied().unwrap_or(0.0);
            }
        }
        let nu = d.y.clone();
        let z: Vec<DMatrix<f64>> = self
            .problem
            .psd_blocks
            .iter()
            .map(|b| b.eval(&nu))
            .collect();
        let residuals = original.residuals(&y, &z, &nu);
        SdpSolution {
            status,
            primal_objective: residuals.primal_objective,
            dual_objective: residuals.dual_objective,
            y,
            z,
            nu,
            residuals,
            iterations: d.iterations,
        }
    }
}
